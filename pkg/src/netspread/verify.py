"""Numerical certification of the monotonicity, bound, reduction and limit results.

Each check returns a :class:`CheckReport` whose ``worst_margin`` is the
smallest slack of the tested inequality over all grid points and cases; the
check passes when that slack is positive (after subtracting the tolerance).
All checks use deterministic solvers only.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .limits import solve_limit_for
from .master_exact import solve_exact
from .master_reduced import exact_seed_initial, solve_complete_reduced, solve_network_reduced
from .networks import CircleNetwork, CompleteNetwork, GeneralForm, TwoGroupNetwork, random_general_network
from .schedules import RateSchedule, as_schedule

# tight enough that 10x the tolerance sits well below the smallest gaps in the default suites
VERIFY_RTOL = 1e-12
VERIFY_ATOL = 1e-14

SUITES = ("monotone", "bounds", "equivalence", "reduction", "convergence")


@dataclass
class CheckReport:
    name: str
    digest: str
    grid: list
    worst_margin: float
    passed: bool
    tolerance: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _jsonable(obj):
    if isinstance(obj, RateSchedule):
        return obj.to_config()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def digest(params) -> str:
    blob = json.dumps(_jsonable(params), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def make_spec(family: str, M: int, params: dict):
    if family == "complete":
        return CompleteNetwork(M, params["p"], params["q"], params.get("I0", 0.0))
    if family == "circle":
        return CircleNetwork(M, params["p"], params["qL"], params["qR"], params.get("I0", 0.0))
    if family == "two-groups":
        return TwoGroupNetwork(
            M, params["p1"], params["p2"], params["q1"], params["q2"], params.get("I01", 0.0), params.get("I02", 0.0)
        )
    raise ValueError(f"unknown structured family {family!r}")


def _positive_times(grid):
    grid = np.asarray(grid, dtype=float)
    return grid[grid > 0]


def _report(name, params, grid, margin, tol, **details):
    return CheckReport(
        name, digest(params), [float(x) for x in grid], float(margin), bool(margin > 0), float(tol), _jsonable(details)
    )


def _solve_family(family, M, params, grid, rel_tol, abs_tol):
    return solve_network_reduced(make_spec(family, M, params), grid, rel_tol, abs_tol)


def check_monotone_in_M(family, M_list, params, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, margin=None):
    """``f(t; M_{i+1}) - f(t; M_i) > margin`` at every grid ``t > 0``; also the
    per-group survival probabilities for two groups."""
    M_list = list(M_list)
    if len(M_list) < 2 or M_list != sorted(M_list):
        raise ValueError("M_list must be ascending with at least two entries")
    if margin is None:
        margin = 10 * rel_tol
    grid = _positive_times(grid)
    sols = [_solve_family(family, M, params, grid, rel_tol, abs_tol) for M in M_list]
    F = np.array([s.f for s in sols])
    diffs = np.diff(F, axis=0)
    series = {"f": diffs}
    if family == "two-groups":
        # [S^{1,0}] = 1 - 2 f1 decreasing  <=>  f1 increasing
        series["f1"] = np.diff(np.array([s.parts["f1"] for s in sols]), axis=0)
        series["f2"] = np.diff(np.array([s.parts["f2"] for s in sols]), axis=0)
    worst = min(float(d.min()) for d in series.values())
    per_pair = {f"{a}->{b}": float(diffs[i].min()) for i, (a, b) in enumerate(zip(M_list, M_list[1:]))}
    return _report(
        f"monotone/{family}", {"family": family, "M": M_list, "params": params}, grid, worst - margin, margin,
        min_gap=worst, min_gap_by_pair=per_pair,
    )


def lower_bound(family, params, t):
    """Adoption level without internal influence, ``1 - (1 - I0) exp(-int p)``."""
    if family in ("complete", "circle"):
        p = as_schedule(params["p"])
        P = np.array([p.antiderivative(x) for x in t])
        return 1.0 - (1.0 - params.get("I0", 0.0)) * np.exp(-P)
    if family == "two-groups":
        out = 0.0
        for k in (1, 2):
            p = as_schedule(params[f"p{k}"])
            P = np.array([p.antiderivative(x) for x in t])
            out = out + 0.5 * (1.0 - (1.0 - params.get(f"I0{k}", 0.0)) * np.exp(-P))
        return out
    raise ValueError(family)


def check_bounds(family, M, params, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, margin=None):
    """Strict sandwich ``lower < f(t; M) < f_limit(t)`` for ``t > 0``."""
    if margin is None:
        margin = 10 * rel_tol
    grid = _positive_times(grid)
    spec = make_spec(family, M, params)
    f = solve_network_reduced(spec, grid, rel_tol, abs_tol).f
    lim = solve_limit_for(spec, grid, rel_tol, abs_tol).f
    lo = lower_bound(family, params, grid)
    below = float((f - lo).min())
    above = float((lim - f).min())
    return _report(
        f"bounds/{family}/M={M}", {"family": family, "M": M, "params": params}, grid,
        min(below, above) - margin, margin, lower_gap=below, upper_gap=above,
    )


def check_survival_bound(net: GeneralForm, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, name="survival"):
    """``[S_O](t) <= [S_O](0) exp(-int_0^t p_O) + 10 abs_tol`` for every subset O."""
    grid = np.asarray(grid, dtype=float)
    traj = solve_exact(net, grid, rel_tol, abs_tol, keep_states=True)
    S = traj.states
    M = net.M
    masks = np.arange(1, 2**M, dtype=np.int64)
    B = ((masks[:, None] >> np.arange(M)) & 1).astype(float)
    P = np.array([[s.antiderivative(t) for s in net.p] for t in grid])  # (G, M)
    S0 = np.prod(np.where(B > 0, 1.0 - net.I0[None, :], 1.0), axis=1)
    bound = S0[None, :] * np.exp(-(P @ B.T))
    slack = bound - S
    tol = 10 * abs_tol
    positive = grid > 0
    strict = float(slack[positive].min()) if positive.any() else 0.0
    return _report(
        name, {"M": M, "I0": net.I0, "p": list(net.p), "q": {f"{k},{j}": s for (k, j), s in net.q.items()}},
        grid, float(slack.min()) + tol, tol, min_slack=float(slack.min()), min_slack_positive_t=strict,
    )


def si_bass_sides(M, q, I0, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL):
    """Both sides of the SI/Bass relation; returns ``(f_SI, I0 + (1-I0) f_Bass, f_SI_independent)``.

    The relation describes exactly ``M*I0`` initially infected nodes; ``f_SI`` uses
    that initial condition.  The third output is the same SI network with
    independently seeded nodes, for which the relation is only approximate.
    """
    q = as_schedule(q)
    M_t = M * (1.0 - I0)
    seeds = M * I0
    if abs(M_t - round(M_t)) > 1e-9 or abs(seeds - round(seeds)) > 1e-9:
        raise ValueError(f"M*(1-I0)={M_t} is not a node count")
    M_t, seeds = int(round(M_t)), int(round(seeds))
    zero = RateSchedule.constant(0.0)
    f_si = solve_complete_reduced(M, zero, q, I0, grid, rel_tol, abs_tol, initial=exact_seed_initial(M, seeds)).f
    f_si_ind = solve_complete_reduced(M, zero, q, I0, grid, rel_tol, abs_tol).f
    if M_t == 0:
        rhs = np.full_like(f_si, I0)
    else:
        p_t = q.scaled(seeds / (M - 1))
        q_t = q.scaled((M_t - 1) / (M - 1))
        f_bass = solve_complete_reduced(M_t, p_t, q_t, 0.0, grid, rel_tol, abs_tol).f
        rhs = I0 + (1.0 - I0) * f_bass
    return f_si, rhs, f_si_ind


def check_si_bass_equivalence(M, q, I0, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, tol=1e-8):
    grid = np.asarray(grid, dtype=float)
    f_si, rhs, f_ind = si_bass_sides(M, q, I0, grid, rel_tol, abs_tol)
    dev = float(np.abs(f_si - rhs).max())
    return _report(
        f"equivalence/M={M}/I0={I0}", {"M": M, "q": q, "I0": I0}, grid, tol - dev, tol,
        max_deviation=dev, independent_seeding_deviation=float(np.abs(f_ind - rhs).max()),
    )


def check_exact_vs_reduced(family, M, params, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, tol=1e-7):
    grid = np.asarray(grid, dtype=float)
    spec = make_spec(family, M, params)
    a = solve_exact(spec.materialize(override=True), grid, rel_tol, abs_tol).f
    b = solve_network_reduced(spec, grid, rel_tol, abs_tol).f
    dev = float(np.abs(a - b).max())
    return _report(
        f"reduction/{family}/M={M}", {"family": family, "M": M, "params": params}, grid, tol - dev, tol,
        max_deviation=dev,
    )


def check_limit_convergence(family, M_list, params, grid, rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, margin=None):
    """Gap ``f_limit - f(M)`` positive and strictly decreasing along ``M_list``."""
    M_list = list(M_list)
    if M_list != sorted(M_list):
        raise ValueError("M_list must be ascending")
    if margin is None:
        margin = 10 * rel_tol
    grid = _positive_times(grid)
    lim = solve_limit_for(make_spec(family, M_list[0], params), grid, rel_tol, abs_tol).f
    gaps = np.array([lim - _solve_family(family, M, params, grid, rel_tol, abs_tol).f for M in M_list])
    positive = float(gaps.min())
    shrink = float((gaps[:-1] - gaps[1:]).min()) if len(M_list) > 1 else np.inf
    worst = min(positive, shrink)
    return _report(
        f"convergence/{family}", {"family": family, "M": M_list, "params": params}, grid, worst - margin, margin,
        min_gap=positive, min_gap_decrease=shrink,
    )


# default parameter sets


def sweep_params(time_dependent=False):
    """q/p = 10 with p = 0.1, I0 = 0 (two groups: p2 = 2 p1, q2/p2 = 10)."""
    base = {
        "complete": {"p": 0.1, "q": 1.0, "I0": 0.0},
        "circle": {"p": 0.1, "qL": 1.0, "qR": 0.0, "I0": 0.0},
        "two-groups": {"p1": 0.1, "p2": 0.2, "q1": 1.0, "q2": 2.0, "I01": 0.0, "I02": 0.0},
    }
    return {fam: schedule_params(v, time_dependent) for fam, v in base.items()}


SWEEP_M = {"complete": [2, 10, 30, 200], "circle": [2, 4, 6, 8], "two-groups": [2, 8, 20, 80]}


def time_dependent(name: str, value: float) -> RateSchedule:
    """Rates named ``p*`` become a linear ramp to twice their value at t=5; ``q*``
    rates double at t=1."""
    if name.startswith("p"):
        return RateSchedule.ramp(value, 2 * value, 5.0)
    return RateSchedule.piecewise_constant([1.0], [value, 2 * value])


def schedule_params(params: dict, time_dep: bool = False) -> dict:
    out = {}
    for k, v in params.items():
        if k.startswith("I0"):
            out[k] = v
        elif time_dep:
            out[k] = time_dependent(k, v)
        else:
            out[k] = RateSchedule.constant(v)
    return out


def reduction_cases(time_dep=False):
    return [
        ("complete", 8, schedule_params({"p": 1.0, "q": 2.0, "I0": 0.0}, time_dep)),
        ("circle", 8, schedule_params({"p": 0.5, "qL": 1.5, "qR": 0.5, "I0": 0.1}, time_dep)),
        ("two-groups", 2, schedule_params({"p1": 1.0, "p2": 2.0, "q1": 10.0, "q2": 10.0, "I01": 0.0, "I02": 0.0}, time_dep)),
    ]


def random_networks(count=20, M=6, seed=2024, time_dep=False):
    rng = np.random.default_rng(seed)
    nets = []
    for _ in range(count):
        spec = random_general_network(M, rng)
        if time_dep:
            p = [time_dependent("p", s.tail) for s in spec.p]
            q = {e: time_dependent("q", s.tail) for e, s in spec.q.items()}
            spec = type(spec)(M, p, q, spec.I0)
        nets.append(spec.materialize())
    return nets


# Gaps between consecutive M shrink like t^(M+1) near t = 0 on the circle and
# vanish into roundoff once the time-dependent runs saturate, so the default
# window keeps every strict inequality resolvable at 10x the solver tolerance.
SUITE_GRID = np.linspace(1.0, 6.0, 11)


def run_suite(suite="all", rel_tol=VERIFY_RTOL, abs_tol=VERIFY_ATOL, time_dep=(False, True), grid=None) -> list[CheckReport]:
    """Run one or all default suites, for constant and time-dependent parameters."""
    wanted = SUITES if suite == "all" else (suite,)
    for s in wanted:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}")
    grid = SUITE_GRID if grid is None else np.asarray(grid, dtype=float)
    reports = []
    kw = dict(rel_tol=rel_tol, abs_tol=abs_tol)
    for td in time_dep:
        tag = "td" if td else "const"
        sets = sweep_params(td)
        batch = []
        if "monotone" in wanted:
            for fam, Ms in SWEEP_M.items():
                batch.append(check_monotone_in_M(fam, Ms, sets[fam], grid, **kw))
        if "convergence" in wanted:
            for fam, Ms in SWEEP_M.items():
                batch.append(check_limit_convergence(fam, Ms, sets[fam], grid, **kw))
        if "bounds" in wanted:
            for fam in ("complete", "circle"):
                for M in (2, 5, 10):
                    batch.append(check_bounds(fam, M, sets[fam], grid, **kw))
            for i, net in enumerate(random_networks(time_dep=td)):
                batch.append(check_survival_bound(net, np.linspace(0, 5, 11), **kw, name=f"bounds/survival/{i:02d}"))
        if "equivalence" in wanted:
            q = time_dependent("q", 1.0) if td else RateSchedule.constant(1.0)
            batch.append(check_si_bass_equivalence(10, q, 0.2, np.linspace(0, 5, 30), **kw))
        if "reduction" in wanted:
            for fam, M, params in reduction_cases(td):
                batch.append(check_exact_vs_reduced(fam, M, params, np.linspace(0, 5, 21), **kw))
        for r in batch:
            r.name = f"{tag}/{r.name}"
        reports.extend(batch)
    reports.sort(key=lambda r: r.name)
    return reports
