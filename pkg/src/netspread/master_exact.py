"""Full master equations over all nonempty node subsets.

State slot ``mask - 1`` holds ``[S_Omega]``, the probability that every node
whose bit is set in ``mask`` is still a nonadopter.  For each subset

    d[S_O]/dt = -(p_O + sum_{k not in O} q_{k,O}) [S_O] + sum_{k not in O} q_{k,O} [S_{O+k}]

with ``p_O = sum_{m in O} p_m`` and ``q_{k,O} = sum_{m in O} q_{k,m}``.
"""

from __future__ import annotations

import warnings

import numpy as np

from .networks import GeneralForm
from .odesolver import DEFAULT_ATOL, DEFAULT_RTOL, solve
from .trajectory import Trajectory

DEFAULT_CAP = 16
HARD_CAP = 20


class NodeCapError(ValueError):
    pass


def check_cap(M: int, allow_large: bool = False) -> None:
    cap = HARD_CAP if allow_large else DEFAULT_CAP
    if M > cap:
        hint = "" if allow_large else f" (override raises the limit to {HARD_CAP})"
        raise NodeCapError(f"exact master equations need 2^M-1 states; M={M} exceeds the cap {cap}{hint}")
    if M > DEFAULT_CAP:
        warnings.warn(f"solving {2**M - 1} master equations for M={M}; this may be slow", RuntimeWarning)


def membership(M: int) -> np.ndarray:
    """Boolean array of shape ``(2^M - 1, M)``: row ``mask-1`` marks members of ``mask``."""
    masks = np.arange(1, 2**M, dtype=np.int64)
    return ((masks[:, None] >> np.arange(M)) & 1).astype(bool)


def initial_state(net: GeneralForm) -> np.ndarray:
    B = membership(net.M)
    return np.prod(np.where(B, 1.0 - net.I0[None, :], 1.0), axis=1)


def build_rhs(net: GeneralForm, allow_large: bool = False):
    M = net.M
    check_cap(M, allow_large)
    B = membership(M)
    Bf = B.astype(float)
    masks = np.arange(1, 2**M, dtype=np.int64)
    # slot of O + {k}; for k already in O it points back at O with zero weight
    plus = (masks[:, None] | (1 << np.arange(M))[None, :]) - 1
    outside = ~B
    rates = net.rate_evaluator()

    def rhs(t, S):
        p, Q = rates(t)
        pO = Bf @ p
        # C[O, k] = q_{k,O}, zeroed for k in O
        C = (Bf @ Q.T) * outside
        return -(pO + C.sum(axis=1)) * S + np.einsum("ok,ok->o", C, S[plus])

    return rhs


def solve_exact(
    net: GeneralForm,
    grid,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    allow_large: bool = False,
    keep_states: bool = False,
) -> Trajectory:
    grid = np.asarray(grid, dtype=float)
    rhs = build_rhs(net, allow_large)
    S = solve(rhs, initial_state(net), grid, net.breakpoints(), rel_tol, abs_tol)
    singles = S[:, (1 << np.arange(net.M)) - 1]
    fj = 1.0 - singles
    parts = {f"f_{j + 1}": fj[:, j] for j in range(net.M)}
    return Trajectory(grid, fj.mean(axis=1), parts, S if keep_states else None, "exact")
