"""JSON run configuration.

Example::

    {
      "network": {"family": "complete", "M": 10, "p": 0.1, "q": 1.0, "I0": 0.0},
      "horizon": 10,
      "grid": 50,
      "tol": {"rel": 1e-8, "abs": 1e-10},
      "replicates": 10000,
      "seed": 1
    }

Rates are numbers (constants) or ``{"segments": [{"t0", "t1", "kind", "c" | "a", "b"}], "tail": x}``.
General networks list edges as ``{"from": k, "to": j, "schedule": ...}`` with 0-based node ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .networks import CircleNetwork, CompleteNetwork, GeneralNetwork, NetworkSpec, TwoGroupNetwork
from .odesolver import DEFAULT_ATOL, DEFAULT_RTOL
from .schedules import RateSchedule, ScheduleError


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    network: NetworkSpec | None = None
    horizon: float = 10.0
    grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 10.0, 51))
    rel_tol: float = DEFAULT_RTOL
    abs_tol: float = DEFAULT_ATOL
    replicates: int = 1000
    seed: int = 0
    workers: int | None = None
    M_list: list = field(default_factory=list)
    override: bool = False
    out: str | None = None
    raw: dict = field(default_factory=dict)


def _sched(obj, name, override):
    if obj is None:
        raise ConfigError(f"network is missing rate {name!r}")
    try:
        return RateSchedule.from_config(obj, check=not override)
    except ScheduleError as exc:
        raise ConfigError(f"bad schedule {name!r}: {exc}") from exc


def _int(obj, name):
    v = obj.get(name)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"network needs an integer {name!r}")
    return v


def parse_network(obj: dict, override: bool = False) -> NetworkSpec:
    if not isinstance(obj, dict):
        raise ConfigError("'network' must be an object")
    fam = obj.get("family")
    if fam == "complete":
        return CompleteNetwork(
            _int(obj, "M"), _sched(obj.get("p"), "p", override), _sched(obj.get("q"), "q", override),
            float(obj.get("I0", 0.0)),
        )
    if fam == "circle":
        return CircleNetwork(
            _int(obj, "M"), _sched(obj.get("p"), "p", override), _sched(obj.get("qL"), "qL", override),
            _sched(obj.get("qR", 0.0), "qR", override), float(obj.get("I0", 0.0)),
        )
    if fam == "two-groups":
        s = {k: _sched(obj.get(k), k, override) for k in ("p1", "p2", "q1", "q2")}
        return TwoGroupNetwork(_int(obj, "M"), **s, I01=float(obj.get("I01", 0.0)), I02=float(obj.get("I02", 0.0)))
    if fam == "general":
        M = _int(obj, "M")
        p = obj.get("p", 0.0)
        # a list is per-node unless it is itself a list of segments
        if isinstance(p, list) and not _is_segment_list(p):
            p = [_sched(x, f"p[{j}]", override) for j, x in enumerate(p)]
        else:
            p = _sched(p, "p", override)
        q = {}
        for e in obj.get("edges", []):
            try:
                key = (int(e["from"]), int(e["to"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed edge {e!r}") from exc
            q[key] = _sched(e.get("schedule"), f"edge {key}", override)
        return GeneralNetwork(M, p, q, obj.get("I0", 0.0))
    raise ConfigError(f"unknown network family {fam!r}; expected complete, circle, two-groups or general")


def _is_segment_list(x):
    return bool(x) and all(isinstance(i, dict) and "t0" in i for i in x)


def parse_grid(spec, horizon: float) -> np.ndarray:
    """``N`` -> N evenly spaced times on [0, horizon]; list -> explicit times;
    ``"a,b,c"`` -> explicit times; ``"N"`` -> N points."""
    if isinstance(spec, str):
        parts = [x for x in spec.split(",") if x.strip()]
        if len(parts) == 1 and parts[0].strip().isdigit():
            spec = int(parts[0])
        else:
            try:
                spec = [float(x) for x in parts]
            except ValueError as exc:
                raise ConfigError(f"cannot parse grid {spec!r}") from exc
    if isinstance(spec, bool):
        raise ConfigError("grid must be a count or a list of times")
    if isinstance(spec, int):
        if spec < 1:
            raise ConfigError("grid count must be positive")
        return np.linspace(0.0, horizon, spec) if spec > 1 else np.array([horizon])
    if isinstance(spec, list):
        g = np.array(spec, dtype=float)
        if np.any(np.diff(g) < 0):
            raise ConfigError("grid times must be sorted")
        if g.size and (g[0] < 0 or g[-1] > horizon):
            raise ConfigError(f"grid must lie in [0, {horizon}]")
        return g
    raise ConfigError("grid must be a count or a list of times")


def parse_tol(spec) -> tuple[float, float]:
    if isinstance(spec, str):
        try:
            rel, abs_ = (float(x) for x in spec.split(","))
        except ValueError as exc:
            raise ConfigError("--tol expects REL,ABS") from exc
    elif isinstance(spec, dict):
        rel, abs_ = float(spec.get("rel", DEFAULT_RTOL)), float(spec.get("abs", DEFAULT_ATOL))
    else:
        raise ConfigError("tol must be {'rel': .., 'abs': ..}")
    if rel <= 0 or abs_ <= 0:
        raise ConfigError("tolerances must be positive")
    return rel, abs_


def build_config(raw: dict, require_network: bool = True) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = RunConfig(raw=raw)
    cfg.override = bool(raw.get("override", False))
    if "network" in raw:
        cfg.network = parse_network(raw["network"], cfg.override)
    elif require_network:
        raise ConfigError("config has no 'network' key")
    cfg.horizon = float(raw.get("horizon", 10.0))
    if cfg.horizon <= 0:
        raise ConfigError("horizon must be positive")
    cfg.grid = parse_grid(raw.get("grid", 51), cfg.horizon)
    if "tol" in raw:
        cfg.rel_tol, cfg.abs_tol = parse_tol(raw["tol"])
    cfg.replicates = int(raw.get("replicates", cfg.replicates))
    cfg.seed = int(raw.get("seed", cfg.seed))
    if "workers" in raw:
        cfg.workers = int(raw["workers"])
    cfg.M_list = [int(m) for m in raw.get("M_list", [])]
    cfg.out = raw.get("out")
    return cfg


def load_config(path: str, require_network: bool = True) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return build_config(raw, require_network)
