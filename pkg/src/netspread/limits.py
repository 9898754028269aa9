"""Infinite-population limits of the expected adoption level."""

from __future__ import annotations

import numpy as np

from .odesolver import DEFAULT_ATOL, DEFAULT_RTOL, solve
from .schedules import as_schedule, merge_breakpoints
from .trajectory import LimitResult


def solve_compartmental(p, q, I0, grid, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> LimitResult:
    """Complete-network limit: ``f' = (1 - f)(p + q f)``, ``f(0) = I0``."""
    p, q = as_schedule(p), as_schedule(q)

    def rhs(t, y):
        return (1.0 - y) * (p.eval(t) + q.eval(t) * y)

    grid = np.asarray(grid, dtype=float)
    f = solve(rhs, [I0], grid, merge_breakpoints(p, q), rel_tol, abs_tol)[:, 0]
    return LimitResult(grid, f, label="compartmental")


def solve_1d_limit(p, q_total, I0, grid, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> LimitResult:
    """Circle limit (1D lattice): ``f' = (1 - f)(p + q (1 - (1 - I0) exp(-int_0^t p)))``.

    ``q_total`` is ``qL + qR``.
    """
    p, q = as_schedule(p), as_schedule(q_total)

    def rhs(t, y):
        reached = 1.0 - (1.0 - I0) * np.exp(-p.antiderivative(t))
        return (1.0 - y) * (p.eval(t) + q.eval(t) * reached)

    grid = np.asarray(grid, dtype=float)
    f = solve(rhs, [I0], grid, merge_breakpoints(p, q), rel_tol, abs_tol)[:, 0]
    return LimitResult(grid, f, label="onedim")


def solve_twogroups_limit(p1, p2, q1, q2, I01, I02, grid, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> LimitResult:
    """Two-group limit; ``f1``, ``f2`` are the adopter fractions of the whole
    population that belong to each group (each at most 1/2)."""
    p1, p2, q1, q2 = map(as_schedule, (p1, p2, q1, q2))

    def rhs(t, y):
        tot = y[0] + y[1]
        return np.array(
            [
                (0.5 - y[0]) * (p1.eval(t) + q1.eval(t) * tot),
                (0.5 - y[1]) * (p2.eval(t) + q2.eval(t) * tot),
            ]
        )

    grid = np.asarray(grid, dtype=float)
    Y = solve(rhs, [I01 / 2, I02 / 2], grid, merge_breakpoints(p1, p2, q1, q2), rel_tol, abs_tol)
    return LimitResult(grid, Y[:, 0] + Y[:, 1], {"f1": Y[:, 0], "f2": Y[:, 1]}, label="two-groups")


def solve_limit_for(spec, grid, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> LimitResult:
    """Limit curve matching a structured network family."""
    fam = spec.family
    if fam == "complete":
        return solve_compartmental(spec.p, spec.q, spec.I0, grid, rel_tol, abs_tol)
    if fam == "circle":
        return solve_1d_limit(spec.p, spec.q, spec.I0, grid, rel_tol, abs_tol)
    if fam == "two-groups":
        return solve_twogroups_limit(spec.p1, spec.p2, spec.q1, spec.q2, spec.I01, spec.I02, grid, rel_tol, abs_tol)
    raise ValueError(f"no infinite-population limit for family {fam!r}")


# time-independent closed forms


def closed_form_bass_compart(p, q, t):
    if p <= 0:
        raise ValueError("bass_compart needs p > 0; use closed_form_si_compart for p = 0")
    e = np.exp(-(p + q) * np.asarray(t, dtype=float))
    return (1.0 - e) / (1.0 + (q / p) * e)


def closed_form_si_compart(q, I0, t):
    return 1.0 / (1.0 + (1.0 / I0 - 1.0) * np.exp(-q * np.asarray(t, dtype=float)))


def closed_form_bass_1d(p, q, t):
    t = np.asarray(t, dtype=float)
    return 1.0 - np.exp(-(p + q) * t + q * (1.0 - np.exp(-p * t)) / p)


def closed_form_si_1d(q, I0, t):
    return 1.0 - (1.0 - I0) * np.exp(-q * I0 * np.asarray(t, dtype=float))
