"""Adaptive Dormand-Prince 5(4) integrator for piecewise-smooth right-hand sides.

The integration interval is cut at every schedule breakpoint and every output
time; each piece is integrated separately so no step ever straddles a jump in
the coefficients.  Stage times inside a piece are kept strictly left of its
upper end so right-continuous schedules are sampled on the correct side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10

# Dormand & Prince (1980), 5th-order propagating solution
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# difference between the 5th and embedded 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t!r}")
        self.t = t


@dataclass
class IvpProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t_end: float
    grid: Sequence[float]
    breakpoints: Sequence[float] = ()
    t0: float = 0.0

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=float)
        g = np.asarray(self.grid, dtype=float)
        lo, hi = sorted((self.t0, self.t_end))
        if g.size and (g.min() < lo or g.max() > hi):
            raise ValueError("output grid must lie inside the integration interval")
        d = np.diff(g)
        if self.t_end >= self.t0 and np.any(d < 0) or self.t_end < self.t0 and np.any(d > 0):
            raise ValueError("output grid must be ordered in the direction of integration")
        self.grid = g

    @property
    def dimension(self) -> int:
        return self.y0.size


@dataclass
class OdeSolution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), dimension)
    stats: dict = field(default_factory=dict)


def _check_finite(k, t):
    if not np.all(np.isfinite(k)):
        raise IntegrationError("non-finite value in right-hand side", t)


def _initial_step(rhs, t, y, f0, direction, span, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t + direction * h0, y + direction * h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(
    prob: IvpProblem,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    max_steps: int = 1_000_000,
) -> OdeSolution:
    """Solve ``prob`` and return the solution sampled at ``prob.grid``.

    Every accepted step satisfies ``|err_i| <= rel_tol*max(|y_i|, |y_new_i|) + abs_tol``
    componentwise.  Works in either time direction.
    """
    if not (rel_tol > 0 and abs_tol > 0):
        raise ValueError("tolerances must be positive")
    t0, t_end = float(prob.t0), float(prob.t_end)
    direction = 1.0 if t_end >= t0 else -1.0
    lo, hi = sorted((t0, t_end))
    stops = {t_end}
    stops.update(float(b) for b in prob.breakpoints if lo < b < hi)
    stops.update(float(g) for g in prob.grid if g != t0)
    stops = sorted(stops, reverse=direction < 0)

    rhs = prob.rhs
    y = prob.y0.copy()
    t = t0
    out = np.empty((len(prob.grid), y.size))
    gi = 0
    while gi < len(prob.grid) and prob.grid[gi] == t0:
        out[gi] = y
        gi += 1

    h = None
    n_steps = n_rejected = n_evals = 0
    for stop in stops:
        # stage times stay strictly below the upper end of the piece, so a
        # right-continuous coefficient is read from the piece being integrated
        inner = math.nextafter(max(t, stop), -math.inf)
        clamp = lambda s: s if s < inner else inner  # noqa: E731
        span = abs(stop - t)
        k1 = rhs(clamp(t), y)
        n_evals += 1
        _check_finite(k1, t)
        if h is None:
            h = _initial_step(rhs, t, y, k1, direction, span, rel_tol, abs_tol)
            n_evals += 1
        while direction * (stop - t) > 0:
            if n_steps + n_rejected >= max_steps:
                raise IntegrationError("maximum number of steps exceeded", t)
            span = abs(stop - t)
            last = h >= span * (1 - 1e-12)
            step = span if last else h
            if not last and step <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
                raise IntegrationError("step size underflow", t)
            hs = direction * step
            ks = [k1]
            for i in range(1, 7):
                yi = y.copy()
                for aij, kj in zip(_A[i], ks):
                    if aij != 0.0:
                        yi += (hs * aij) * kj
                if i == 6:
                    y_new = yi
                ks.append(rhs(clamp(t + _C[i] * hs), yi))
            n_evals += 6
            k7 = ks[6]
            _check_finite(k7, t)
            err = np.zeros_like(y)
            for ej, kj in zip(_E, ks):
                if ej != 0.0:
                    err += (hs * ej) * kj
            scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            enorm = float(np.max(np.abs(err) / scale)) if err.size else 0.0
            if not math.isfinite(enorm):
                raise IntegrationError("non-finite error estimate", t)
            if enorm <= 1.0:
                t = stop if last else t + hs
                y = y_new
                k1 = k7
                n_steps += 1
                factor = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
                if not last:
                    h = step * factor
                else:
                    h = max(h, step * factor)
            else:
                n_rejected += 1
                h = step * max(0.2, 0.9 * enorm ** -0.2)
        while gi < len(prob.grid) and prob.grid[gi] == stop:
            out[gi] = y
            gi += 1
    return OdeSolution(
        prob.grid.copy(),
        out,
        {"steps": n_steps, "rejected": n_rejected, "evaluations": n_evals},
    )


def solve(
    rhs,
    y0,
    grid,
    breakpoints=(),
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
    t_end: float | None = None,
) -> np.ndarray:
    """Convenience wrapper: integrate from 0 and return ``y`` on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if t_end is None:
        t_end = float(grid[-1]) if grid.size else 0.0
    prob = IvpProblem(rhs, y0, t_end, grid, breakpoints)
    return integrate(prob, rel_tol, abs_tol).y
