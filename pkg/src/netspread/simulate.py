"""Exact Monte-Carlo simulation of the node-level adoption process.

Between adoptions the total hazard ``Lambda(t) = sum_{j nonadopter} lambda_j(t)``
is piecewise affine in ``t``, so the next event time is found by inverting the
integrated hazard in closed form one segment at a time (no thinning).  The
adopting node is then drawn with probability ``lambda_j(t*) / Lambda(t*)``.

Many replicates are advanced together with numpy.  Replicate ``r`` draws its
uniforms from its own counter-based Philox stream keyed by ``(seed, r)``, and a
fixed budget of ``3M`` uniforms is consumed per replicate (``M`` for the seeds,
two per adoption), so results never depend on batching or worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .networks import GeneralForm

CHUNK = 2048
THREADS_ENV = "NETSPREAD_THREADS"


@dataclass
class EventLog:
    seeds: frozenset
    events: list = field(default_factory=list)  # (node, time) in time order

    def count_at(self, t: float) -> int:
        return len(self.seeds) + sum(1 for _, s in self.events if s <= t)


@dataclass
class EnsembleResult:
    grid: np.ndarray
    mean_f: np.ndarray
    std_err: np.ndarray
    replicates: int
    seed: int


class CompiledNetwork:
    """Per-segment affine coefficients of every rate: ``r(t) = a + b t``."""

    def __init__(self, net: GeneralForm):
        self.M = M = net.M
        self.edges = np.array([0.0, *net.breakpoints()])
        nseg = len(self.edges)
        self.upper = np.r_[self.edges[1:], np.inf]
        self.Pa = np.zeros((nseg, M))
        self.Pb = np.zeros((nseg, M))
        cache = {}
        for j, s in enumerate(net.p):
            if id(s) not in cache:
                cache[id(s)] = s.affine_pieces(self.edges)
            self.Pa[:, j], self.Pb[:, j] = cache[id(s)]
        self.Qa = np.zeros((nseg, M, M))
        self.Qb = np.zeros((nseg, M, M))
        for (k, j), s in net.q.items():
            if id(s) not in cache:
                cache[id(s)] = s.affine_pieces(self.edges)
            self.Qa[:, k, j], self.Qb[:, k, j] = cache[id(s)]
        self.I0 = net.I0.copy()

    def segment_of(self, t):
        return np.searchsorted(self.edges, t, side="right") - 1


def _node_rates(cn: CompiledNetwork, X, seg):
    """Affine coefficients ``(A, B)`` of ``lambda_j`` for nonadopters, zero for adopters."""
    A = np.empty(X.shape)
    B = np.empty(X.shape)
    Xf = X.astype(float)
    for s in np.unique(seg):
        rows = seg == s
        A[rows] = cn.Pa[s] + Xf[rows] @ cn.Qa[s]
        B[rows] = cn.Pb[s] + Xf[rows] @ cn.Qb[s]
    A[X] = 0.0
    B[X] = 0.0
    return A, B


def run_batch(cn: CompiledNetwork, horizon: float, U: np.ndarray) -> np.ndarray:
    """Adoption times, shape ``(R, M)``: 0 for seeds, ``inf`` if not adopted by ``horizon``.

    ``U`` holds ``3M`` uniforms in [0, 1) per replicate.
    """
    R, M = U.shape[0], cn.M
    X = U[:, :M] < cn.I0
    times = np.where(X, 0.0, np.inf)
    t_now = np.zeros(R)
    live = ~X.all(axis=1)
    for i in range(M):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        E = -np.log1p(-U[idx, M + 2 * i])
        t = t_now[idx]
        seg = cn.segment_of(t)
        Xi = X[idx]
        t_star = np.full(idx.size, np.inf)
        A_hit = np.zeros((idx.size, M))
        B_hit = np.zeros((idx.size, M))
        pending = np.arange(idx.size)
        while pending.size:
            A, B = _node_rates(cn, Xi[pending], seg[pending])
            alpha, beta = A.sum(axis=1), B.sum(axis=1)
            tp = t[pending]
            end = np.minimum(cn.upper[seg[pending]], horizon)
            rate0 = alpha + beta * tp
            d = end - tp
            with np.errstate(invalid="ignore"):
                mass = np.where(np.isinf(d), np.where(rate0 > 0, np.inf, 0.0), rate0 * d + 0.5 * beta * d * d)
            e = E[pending]
            hit = e <= mass
            if hit.any():
                c, bb, eh = rate0[hit], beta[hit], e[hit]
                disc = np.maximum(c * c + 2.0 * bb * eh, 0.0)
                with np.errstate(invalid="ignore", divide="ignore"):
                    dt = np.where(eh > 0, 2.0 * eh / (c + np.sqrt(disc)), 0.0)
                dt = np.minimum(dt, d[hit])
                rows = pending[hit]
                t_star[rows] = tp[hit] + dt
                A_hit[rows] = A[hit]
                B_hit[rows] = B[hit]
            miss = ~hit
            # past the horizon (or no hazard left): this replicate is finished
            done = miss & (end >= horizon)
            move = miss & ~done
            E[pending[move]] = e[move] - mass[move]
            t[pending[move]] = end[move]
            seg[pending[move]] += 1
            pending = pending[move]
        fired = np.isfinite(t_star)
        live[idx[~fired]] = False
        if not fired.any():
            continue
        rows = np.flatnonzero(fired)
        ts = t_star[rows]
        rates = A_hit[rows] + B_hit[rows] * ts[:, None]
        np.maximum(rates, 0.0, out=rates)
        cum = np.cumsum(rates, axis=1)
        target = (1.0 - U[idx[rows], M + 2 * i + 1]) * cum[:, -1]
        pick = np.minimum((cum < target[:, None]).sum(axis=1), M - 1)
        g = idx[rows]
        X[g, pick] = True
        times[g, pick] = ts
        t_now[g] = ts
        live[g] = ~X[g].all(axis=1)
    return times


def replicate_uniforms(seed: int, start: int, stop: int, M: int) -> np.ndarray:
    """Uniforms for replicates ``start..stop-1``; row ``r`` depends only on ``(seed, r)``."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be in [0, 2**64)")
    out = np.empty((stop - start, 3 * M))
    for i, r in enumerate(range(start, stop)):
        out[i] = np.random.Generator(np.random.Philox(key=(seed << 64) | r)).random(3 * M)
    return out


def simulate_once(net: GeneralForm, horizon: float, rng: np.random.Generator) -> EventLog:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    cn = CompiledNetwork(net)
    times = run_batch(cn, horizon, rng.random((1, 3 * net.M)))[0]
    seeds = frozenset(int(j) for j in np.flatnonzero(times == 0.0))
    order = [j for j in np.argsort(times, kind="stable") if 0 < times[j] < np.inf]
    return EventLog(seeds, [(int(j), float(times[j])) for j in order])


def _chunk_counts(args):
    cn, horizon, grid, seed, start, stop = args
    times = run_batch(cn, horizon, replicate_uniforms(seed, start, stop, cn.M))
    counts = (times[:, None, :] <= grid[None, :, None]).sum(axis=2).astype(np.int64)
    return counts.sum(axis=0), (counts * counts).sum(axis=0)


def worker_count(workers: int | None = None) -> int:
    """Requested workers (default: all CPUs), capped by ``NETSPREAD_THREADS``."""
    if workers is None:
        workers = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        workers = min(workers, int(cap))
    return max(1, workers)


def estimate_f(
    net: GeneralForm,
    horizon: float,
    grid,
    replicates: int,
    seed: int,
    workers: int | None = None,
) -> EnsembleResult:
    """Monte-Carlo mean of ``f(t)`` and its standard error on ``grid``.

    Adopter counts are accumulated as exact integers, so the result is
    bit-identical for any ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > horizon):
        raise ValueError("grid must lie in [0, horizon]")
    cn = CompiledNetwork(net)
    jobs = [
        (cn, horizon, grid, seed, s, min(s + CHUNK, replicates)) for s in range(0, replicates, CHUNK)
    ]
    n = worker_count(workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            parts = list(ex.map(_chunk_counts, jobs))
    else:
        parts = [_chunk_counts(j) for j in jobs]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    M, R = net.M, replicates
    mean = s1 / (R * M)
    if R > 1:
        num = np.array([R * int(a) - int(b) * int(b) for a, b in zip(s2, s1)], dtype=float)
        se = np.sqrt(num / (R * (R - 1) * float(M) ** 2) / R)
    else:
        se = np.zeros_like(mean)
    return EnsembleResult(grid, mean, se, R, seed)
