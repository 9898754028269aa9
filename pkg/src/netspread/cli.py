"""Command-line front end: ``netspread simulate|master|limit|sweep|verify``.

Exit codes: 0 success, 1 failed verification, 2 bad configuration or usage,
3 node count above the exact-solver cap.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import verify as verify_mod
from .config import ConfigError, RunConfig, build_config, load_config, parse_grid, parse_tol
from .limits import solve_limit_for
from .master_exact import NodeCapError, check_cap, solve_exact
from .master_reduced import solve_network_reduced
from .networks import NetworkValidationError
from .simulate import estimate_f, worker_count

LIMIT_FAMILIES = {"compartmental": "complete", "onedim": "circle", "two-groups": "two-groups"}


def _fmt(x) -> str:
    return format(float(x), ".17g")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_csv(path, columns: dict) -> None:
    names = list(columns)
    rows = zip(*(np.asarray(columns[n]) for n in names))
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _config(args, require_network=True) -> RunConfig:
    if args.config:
        cfg = load_config(args.config, require_network)
    else:
        cfg = build_config({}, require_network)
    if args.grid is not None:
        cfg.grid = parse_grid(args.grid, cfg.horizon)
    if args.tol is not None:
        cfg.rel_tol, cfg.abs_tol = parse_tol(args.tol)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicates is not None:
        cfg.replicates = args.replicates
    if args.out is not None:
        cfg.out = args.out
    if args.override:
        cfg.override = True
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config(args)
    net = cfg.network.materialize(override=cfg.override)
    workers = args.workers if args.workers is not None else cfg.workers
    res = estimate_f(net, cfg.horizon, cfg.grid, cfg.replicates, cfg.seed, workers)
    write_csv(cfg.out, {"t": res.grid, "mean_f": res.mean_f, "std_err": res.std_err})
    return 0


def cmd_master(args) -> int:
    cfg = _config(args)
    spec = cfg.network
    if args.backend == "exact":
        M = 2 * spec.M if spec.family == "two-groups" else spec.M
        check_cap(M, args.allow_large)
        traj = solve_exact(spec.materialize(override=cfg.override), cfg.grid, cfg.rel_tol, cfg.abs_tol, args.allow_large)
        cols = {"t": traj.t, "f": traj.f}
        if args.per_node:
            cols.update(traj.parts)
    else:
        if spec.family == "general":
            raise ConfigError("the reduced backend needs a complete, circle or two-groups network")
        if not cfg.override:
            spec.materialize()  # validation only
        traj = solve_network_reduced(spec, cfg.grid, cfg.rel_tol, cfg.abs_tol)
        cols = traj.columns()
    write_csv(cfg.out, cols)
    return 0


def cmd_limit(args) -> int:
    cfg = _config(args)
    spec = cfg.network
    if args.family is not None and LIMIT_FAMILIES[args.family] != spec.family:
        raise ConfigError(f"--family {args.family} needs a {LIMIT_FAMILIES[args.family]} network, got {spec.family}")
    res = solve_limit_for(spec, cfg.grid, cfg.rel_tol, cfg.abs_tol)
    write_csv(cfg.out, res.columns())
    return 0


def _sweep_one(job):
    spec, M, grid, rel, abs_ = job
    return solve_network_reduced(verify_mod.make_spec(spec.family, M, _params_of(spec)), grid, rel, abs_).f


def _params_of(spec) -> dict:
    if spec.family == "complete":
        return {"p": spec.p, "q": spec.q, "I0": spec.I0}
    if spec.family == "circle":
        return {"p": spec.p, "qL": spec.qL, "qR": spec.qR, "I0": spec.I0}
    if spec.family == "two-groups":
        return {k: getattr(spec, k) for k in ("p1", "p2", "q1", "q2", "I01", "I02")}
    raise ConfigError("sweeps need a complete, circle or two-groups network")


def cmd_sweep(args) -> int:
    cfg = _config(args)
    spec = cfg.network
    _params_of(spec)
    M_list = [int(m) for m in args.M.split(",")] if args.M else cfg.M_list
    if not M_list:
        raise ConfigError("sweep needs M_list in the config or --M")
    jobs = [(spec, M, cfg.grid, cfg.rel_tol, cfg.abs_tol) for M in M_list]
    n = worker_count(cfg.workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            curves = list(ex.map(_sweep_one, jobs))
    else:
        curves = [_sweep_one(j) for j in jobs]
    cols = {"t": cfg.grid}
    for M, f in zip(M_list, curves):
        cols[f"f_M{M}"] = f
    cols["f_limit"] = solve_limit_for(spec, cfg.grid, cfg.rel_tol, cfg.abs_tol).f
    write_csv(cfg.out, cols)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args, require_network=False)
    rel, abs_ = (cfg.rel_tol, cfg.abs_tol) if args.tol else (verify_mod.VERIFY_RTOL, verify_mod.VERIFY_ATOL)
    out = {}
    ok = True
    if cfg.network is not None:
        rep = cfg.network.validate()
        out["validation"] = rep.as_dict()
        out["validation"]["override"] = cfg.override
        ok = rep.ok or cfg.override
    reports = verify_mod.run_suite(args.suite, rel, abs_)
    out["checks"] = [r.as_dict() for r in reports]
    failed = [r for r in reports if not r.passed]
    ok = ok and not failed
    out["passed"] = ok
    with _output(cfg.out) as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    for r in failed:
        print(f"FAILED {r.name}: worst margin {r.worst_margin:.3e}", file=sys.stderr)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netspread", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--replicates", type=int)
    common.add_argument("--grid", help="point count N or comma-separated times")
    common.add_argument("--tol", help="solver tolerances REL,ABS")
    common.add_argument("--override", action="store_true", help="accept parameters that fail validation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo estimate of f(t)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("master", parents=[common], help="solve the master equations")
    p.add_argument("--backend", choices=("exact", "reduced"), default="reduced")
    p.add_argument("--per-node", action="store_true", help="add f_1..f_M columns (exact backend)")
    p.add_argument("--allow-large", action="store_true", help="raise the exact-solver cap to 20 nodes")
    p.set_defaults(func=cmd_master)

    p = sub.add_parser("limit", parents=[common], help="infinite-population limit")
    p.add_argument("--family", choices=tuple(LIMIT_FAMILIES))
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("sweep", parents=[common], help="f(t; M) for several M plus the limit")
    p.add_argument("--M", help="comma-separated network sizes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the verification suites")
    p.add_argument("--suite", choices=("all", *verify_mod.SUITES), default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NodeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NetworkValidationError as exc:
        print(f"error: invalid network: {exc} (use --override to proceed)", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
