"""Network families and their node-level representation.

Four families are supported: the homogeneous complete network, the circle with
left/right neighbour weights, the complete network with two equal-size groups,
and an arbitrary weighted directed network.  Every family can be materialized
into a :class:`GeneralForm` holding per-node external rates ``p_j``, directed
edge weights ``q_{k,j}`` (influence of adopter ``k`` on ``j``) and initial
adoption probabilities ``I0_j``.  Nodes are numbered from 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .schedules import RateSchedule, as_schedule, merge_breakpoints


class NetworkValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(i.message for i in report.issues))
        self.report = report


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    # True: a modelling assumption the convergence results rely on.
    # False: the model itself is ill-defined (negative rate, bad probability).
    assumption_only: bool


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def well_defined(self) -> bool:
        """The stochastic model makes sense even if some modelling assumptions fail."""
        return all(i.assumption_only for i in self.issues)

    def add(self, code, message, assumption_only):
        self.issues.append(Issue(code, message, assumption_only))

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "well_defined": self.well_defined,
            "issues": [
                {"code": i.code, "message": i.message, "kind": "assumption" if i.assumption_only else "invalid"}
                for i in self.issues
            ],
        }


def _check_probability(report, name, value, strict_upper=True):
    if not 0.0 <= value <= 1.0:
        report.add("probability", f"{name}={value} is not a probability", False)
    elif strict_upper and value >= 1.0:
        report.add("probability-one", f"{name}={value}: assumption {name} < 1 violated", True)


def _check_nonnegative(report, name, sched):
    if not sched.is_nonnegative():
        report.add("negative-rate", f"{name}(t) takes negative values", False)


@dataclass(frozen=True)
class GeneralForm:
    """Node-level parameters: ``lambda_j(t) = p_j(t) + sum_k q_{k,j}(t) X_k(t)``."""

    M: int
    p: tuple[RateSchedule, ...]
    q: Mapping[tuple[int, int], RateSchedule]
    I0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(self.p))
        object.__setattr__(self, "I0", np.asarray(self.I0, dtype=float))
        if len(self.p) != self.M or self.I0.shape != (self.M,):
            raise ValueError("p and I0 must have one entry per node")
        for k, j in self.q:
            if k == j:
                raise ValueError(f"self-edge ({k},{j}) is not allowed")
            if not (0 <= k < self.M and 0 <= j < self.M):
                raise ValueError(f"edge ({k},{j}) refers to a node outside 0..{self.M - 1}")

    def schedules(self) -> list[RateSchedule]:
        return [*self.p, *self.q.values()]

    def breakpoints(self) -> list[float]:
        return merge_breakpoints(self.schedules())

    def edge_arrays(self):
        """Sources, targets and the index of each edge's schedule in ``unique``.

        Edges sharing one schedule object (the usual case after materializing a
        symmetric family) share a single slot so each is evaluated once.
        """
        unique: list[RateSchedule] = []
        slot: dict[int, int] = {}
        src, dst, idx = [], [], []
        for (k, j), s in self.q.items():
            if id(s) not in slot:
                slot[id(s)] = len(unique)
                unique.append(s)
            src.append(k)
            dst.append(j)
            idx.append(slot[id(s)])
        return np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp), np.array(idx, dtype=np.intp), unique

    def rate_evaluator(self):
        """Return ``f(t) -> (p_vec, Q)`` with ``Q[k, j] = q_{k,j}(t)``."""
        src, dst, idx, unique = self.edge_arrays()
        p_unique: list[RateSchedule] = []
        p_slot: dict[int, int] = {}
        p_idx = []
        for s in self.p:
            if id(s) not in p_slot:
                p_slot[id(s)] = len(p_unique)
                p_unique.append(s)
            p_idx.append(p_slot[id(s)])
        p_idx = np.array(p_idx, dtype=np.intp)
        M = self.M

        def rates(t):
            pv = np.array([s.eval(t) for s in p_unique])[p_idx]
            Q = np.zeros((M, M))
            if len(unique):
                qv = np.array([s.eval(t) for s in unique])
                Q[src, dst] = qv[idx]
            return pv, Q

        return rates

    def permuted(self, perm: Sequence[int]) -> "GeneralForm":
        """Relabel nodes: old node ``i`` becomes ``perm[i]``."""
        perm = list(perm)
        inv = np.argsort(perm)
        p = tuple(self.p[inv[j]] for j in range(self.M))
        q = {(perm[k], perm[j]): s for (k, j), s in self.q.items()}
        return GeneralForm(self.M, p, q, self.I0[inv])


class NetworkSpec:
    """Base class of the four network families."""

    family: str = ""

    def validate(self) -> ValidationReport:
        raise NotImplementedError

    def _build(self) -> GeneralForm:
        raise NotImplementedError

    def materialize(self, override: bool = False) -> GeneralForm:
        report = self.validate()
        if not report.ok and not override:
            raise NetworkValidationError(report)
        return self._build()

    def schedules(self) -> list[RateSchedule]:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        return merge_breakpoints(self.schedules())


def _check_M(report, M, minimum):
    if not isinstance(M, (int, np.integer)) or M < minimum:
        report.add("node-count", f"M={M} must be an integer >= {minimum}", False)
        return False
    return True


@dataclass(frozen=True)
class CompleteNetwork(NetworkSpec):
    M: int
    p: RateSchedule
    q: RateSchedule
    I0: float = 0.0
    family = "complete"

    def __post_init__(self):
        object.__setattr__(self, "p", as_schedule(self.p))
        object.__setattr__(self, "q", as_schedule(self.q))

    def schedules(self):
        return [self.p, self.q]

    def validate(self) -> ValidationReport:
        r = ValidationReport()
        _check_M(r, self.M, 1)
        _check_probability(r, "I0", self.I0)
        _check_nonnegative(r, "p", self.p)
        _check_nonnegative(r, "q", self.q)
        if not self.q.is_positive():
            r.add("q-positive", "assumption q(t) > 0 for t > 0 violated", True)
        if not (self.I0 > 0 or self.p.is_positive()):
            r.add("seed-or-external", "assumption I0 > 0 or p(t) > 0 violated", True)
        return r

    def _build(self) -> GeneralForm:
        M = self.M
        q = {}
        if M > 1:
            w = self.q.scaled(1.0 / (M - 1))
            q = {(k, j): w for k in range(M) for j in range(M) if k != j}
        return GeneralForm(M, (self.p,) * M, q, np.full(M, float(self.I0)))


@dataclass(frozen=True)
class CircleNetwork(NetworkSpec):
    M: int
    p: RateSchedule
    qL: RateSchedule
    qR: RateSchedule
    I0: float = 0.0
    family = "circle"

    def __post_init__(self):
        for name in ("p", "qL", "qR"):
            object.__setattr__(self, name, as_schedule(getattr(self, name)))

    @property
    def q(self) -> RateSchedule:
        return self.qL + self.qR

    def schedules(self):
        return [self.p, self.qL, self.qR]

    def validate(self) -> ValidationReport:
        r = ValidationReport()
        _check_M(r, self.M, 2)
        _check_probability(r, "I0", self.I0)
        _check_nonnegative(r, "p", self.p)
        _check_nonnegative(r, "qL", self.qL)
        _check_nonnegative(r, "qR", self.qR)
        if not self.q.is_positive():
            r.add("q-positive", "assumption qL(t) + qR(t) > 0 for t > 0 violated", True)
        if not (self.I0 > 0 or self.p.is_positive()):
            r.add("seed-or-external", "assumption I0 > 0 or p(t) > 0 violated", True)
        return r

    def _build(self) -> GeneralForm:
        M = self.M
        q = {}
        if M == 2:
            # both indicators select the single neighbour
            both = self.qL + self.qR
            q = {(0, 1): both, (1, 0): both}
        else:
            for j in range(M):
                q[((j - 1) % M, j)] = self.qL
                q[((j + 1) % M, j)] = self.qR
        return GeneralForm(M, (self.p,) * M, q, np.full(M, float(self.I0)))


@dataclass(frozen=True)
class TwoGroupNetwork(NetworkSpec):
    """Complete network on ``2M`` nodes; nodes ``0..M-1`` form group 1."""

    M: int
    p1: RateSchedule
    p2: RateSchedule
    q1: RateSchedule
    q2: RateSchedule
    I01: float = 0.0
    I02: float = 0.0
    family = "two-groups"

    def __post_init__(self):
        for name in ("p1", "p2", "q1", "q2"):
            object.__setattr__(self, name, as_schedule(getattr(self, name)))

    def schedules(self):
        return [self.p1, self.p2, self.q1, self.q2]

    def validate(self) -> ValidationReport:
        r = ValidationReport()
        _check_M(r, self.M, 1)
        for g, (p, q, i0) in enumerate(((self.p1, self.q1, self.I01), (self.p2, self.q2, self.I02)), 1):
            _check_probability(r, f"I0{g}", i0)
            _check_nonnegative(r, f"p{g}", p)
            _check_nonnegative(r, f"q{g}", q)
            if not q.is_positive():
                r.add("q-positive", f"assumption q{g}(t) > 0 for t > 0 violated", True)
            if not (i0 > 0 or p.is_positive()):
                r.add("seed-or-external", f"assumption I0{g} + p{g}(t) > 0 violated", True)
        return r

    def _build(self) -> GeneralForm:
        M = self.M
        w1 = self.q1.scaled(1.0 / (2 * M))
        w2 = self.q2.scaled(1.0 / (2 * M))
        q = {}
        for j in range(2 * M):
            w = w1 if j < M else w2
            for m in range(2 * M):
                if m != j:
                    q[(m, j)] = w
        p = (self.p1,) * M + (self.p2,) * M
        I0 = np.r_[np.full(M, float(self.I01)), np.full(M, float(self.I02))]
        return GeneralForm(2 * M, p, q, I0)


@dataclass(frozen=True)
class GeneralNetwork(NetworkSpec):
    M: int
    p: tuple
    q: Mapping[tuple[int, int], RateSchedule]
    I0: tuple
    family = "general"

    def __post_init__(self):
        p = self.p
        if isinstance(p, (RateSchedule, int, float, dict)):
            p = [p] * self.M
        object.__setattr__(self, "p", tuple(as_schedule(s) for s in p))
        I0 = self.I0
        if np.ndim(I0) == 0:
            I0 = [float(I0)] * self.M
        object.__setattr__(self, "I0", tuple(float(x) for x in I0))
        object.__setattr__(self, "q", {(int(k), int(j)): as_schedule(s) for (k, j), s in dict(self.q).items()})

    def schedules(self):
        return [*self.p, *self.q.values()]

    def validate(self) -> ValidationReport:
        r = ValidationReport()
        if not _check_M(r, self.M, 1):
            return r
        if len(self.p) != self.M or len(self.I0) != self.M:
            r.add("shape", "p and I0 need one entry per node", False)
        for j, i0 in enumerate(self.I0):
            _check_probability(r, f"I0[{j}]", i0, strict_upper=False)
        for j, s in enumerate(self.p):
            _check_nonnegative(r, f"p[{j}]", s)
        for (k, j), s in self.q.items():
            if k == j:
                r.add("self-edge", f"self-edge ({k},{j})", False)
            if not (0 <= k < self.M and 0 <= j < self.M):
                r.add("edge-range", f"edge ({k},{j}) refers to a missing node", False)
            _check_nonnegative(r, f"q[{k},{j}]", s)
        return r

    def _build(self) -> GeneralForm:
        return GeneralForm(self.M, self.p, dict(self.q), np.array(self.I0))


def validate(spec: NetworkSpec) -> ValidationReport:
    return spec.validate()


def materialize(spec: NetworkSpec, override: bool = False) -> GeneralForm:
    return spec.materialize(override=override)


def random_general_network(M, rng, density=0.5, p_range=(0.1, 1.0), q_range=(0.1, 2.0), I0_max=0.3):
    """Random constant-rate network, used by the verification suite."""
    p = [RateSchedule.constant(rng.uniform(*p_range)) for _ in range(M)]
    q = {}
    for k in range(M):
        for j in range(M):
            if k != j and rng.random() < density:
                q[(k, j)] = RateSchedule.constant(rng.uniform(*q_range))
    I0 = rng.uniform(0, I0_max, size=M)
    return GeneralNetwork(M, p, q, tuple(I0))
