"""Symmetry-reduced master equations.

complete network: ``[S^n]`` for n = 1..M, probability that a fixed n-subset is all nonadopters;
circle:           ``[S^n]`` for n adjacent nodes;
two groups:       ``[S^{k1,k2}]`` on the grid (M+1) x (M+1), slot (0, 0) fixed at 1.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .odesolver import DEFAULT_ATOL, DEFAULT_RTOL, solve
from .schedules import as_schedule, merge_breakpoints
from .trajectory import Trajectory


def exact_seed_initial(M: int, seeds: int) -> np.ndarray:
    """``[S^n](0)`` when exactly ``seeds`` of the ``M`` nodes, chosen uniformly, start
    adopted (hypergeometric survival); the independent-seeding analogue is ``(1-I0)**n``."""
    return np.array([comb(M - seeds, n) / comb(M, n) for n in range(1, M + 1)])


def solve_complete_reduced(
    M: int,
    p,
    q,
    I0: float,
    grid,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    initial=None,
    keep_states: bool = False,
) -> Trajectory:
    """Expected adoption level on the homogeneous complete network of ``M`` nodes.

    ``initial`` overrides the independent-seeding initial condition ``(1-I0)**n``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    p, q = as_schedule(p), as_schedule(q)
    n = np.arange(1, M + 1, dtype=float)
    w = (M - n) / (M - 1) if M > 1 else np.zeros(1)
    nw = n * w

    def rhs(t, S):
        pt, qt = p.eval(t), q.eval(t)
        nxt = np.empty_like(S)
        nxt[:-1] = S[1:]
        nxt[-1] = 0.0
        return -(n * pt + qt * nw) * S + qt * nw * nxt

    y0 = (1.0 - I0) ** n if initial is None else np.asarray(initial, dtype=float)
    grid = np.asarray(grid, dtype=float)
    S = solve(rhs, y0, grid, merge_breakpoints(p, q), rel_tol, abs_tol)
    return Trajectory(grid, 1.0 - S[:, 0], {}, S if keep_states else None, "complete")


def solve_circle_reduced(
    M: int,
    p,
    qL,
    qR,
    I0: float,
    grid,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    keep_states: bool = False,
) -> Trajectory:
    if M < 2:
        raise ValueError("the circle needs M >= 2")
    p = as_schedule(p)
    q = as_schedule(qL) + as_schedule(qR)
    n = np.arange(1, M + 1, dtype=float)
    chain = np.ones(M)
    chain[-1] = 0.0

    def rhs(t, S):
        pt, qt = p.eval(t), q.eval(t)
        nxt = np.empty_like(S)
        nxt[:-1] = S[1:]
        nxt[-1] = 0.0
        return -(n * pt + qt * chain) * S + qt * nxt

    grid = np.asarray(grid, dtype=float)
    S = solve(rhs, (1.0 - I0) ** n, grid, merge_breakpoints(p, q), rel_tol, abs_tol)
    return Trajectory(grid, 1.0 - S[:, 0], {}, S if keep_states else None, "circle")


def solve_twogroups_reduced(
    M: int,
    p1,
    p2,
    q1,
    q2,
    I01: float,
    I02: float,
    grid,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    keep_states: bool = False,
) -> Trajectory:
    """Two complete groups of ``M`` nodes each.  ``states`` rows are the flattened
    ``(M+1, M+1)`` grid of ``[S^{k1,k2}]``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    p1, p2, q1, q2 = map(as_schedule, (p1, p2, q1, q2))
    k1 = np.arange(M + 1, dtype=float)[:, None]
    k2 = np.arange(M + 1, dtype=float)[None, :]
    out_frac = (2 * M - k1 - k2) / (2 * M)
    up1 = (M - k1) / (2 * M)
    up2 = (M - k2) / (2 * M)
    shape = (M + 1, M + 1)

    def rhs(t, y):
        S = y.reshape(shape)
        infl = k1 * q1.eval(t) + k2 * q2.eval(t)
        loss = k1 * p1.eval(t) + k2 * p2.eval(t) + out_frac * infl
        # shifted copies; the row/column past M is multiplied by M - k = 0
        s1 = np.zeros(shape)
        s1[:-1, :] = S[1:, :]
        s2 = np.zeros(shape)
        s2[:, :-1] = S[:, 1:]
        return (-loss * S + (up1 * s1 + up2 * s2) * infl).ravel()

    y0 = ((1.0 - I01) ** k1 * (1.0 - I02) ** k2).ravel()
    grid = np.asarray(grid, dtype=float)
    Y = solve(rhs, y0, grid, merge_breakpoints(p1, p2, q1, q2), rel_tol, abs_tol)
    f1 = (1.0 - Y[:, M + 1]) / 2  # slot (1, 0)
    f2 = (1.0 - Y[:, 1]) / 2  # slot (0, 1)
    return Trajectory(grid, f1 + f2, {"f1": f1, "f2": f2}, Y if keep_states else None, "two-groups")


def solve_network_reduced(spec, grid, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL, keep_states=False) -> Trajectory:
    """Dispatch on a structured :class:`~netspread.networks.NetworkSpec`."""
    fam = spec.family
    if fam == "complete":
        return solve_complete_reduced(spec.M, spec.p, spec.q, spec.I0, grid, rel_tol, abs_tol, keep_states=keep_states)
    if fam == "circle":
        return solve_circle_reduced(spec.M, spec.p, spec.qL, spec.qR, spec.I0, grid, rel_tol, abs_tol, keep_states)
    if fam == "two-groups":
        return solve_twogroups_reduced(
            spec.M, spec.p1, spec.p2, spec.q1, spec.q2, spec.I01, spec.I02, grid, rel_tol, abs_tol, keep_states
        )
    raise ValueError(f"no reduced master equations for family {fam!r}")

