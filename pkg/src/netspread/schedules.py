"""Piecewise constant / affine rate functions of time.

A :class:`RateSchedule` is a finite list of contiguous segments starting at
``t = 0`` followed by a constant tail.  On each segment the rate is either a
constant ``c`` or an affine ramp ``a + b * (t - t_start)``.  Evaluation is
right-continuous at breakpoints and integrals are computed in closed form.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_EPS = np.finfo(float).eps


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    t0: float
    t1: float
    a: float
    b: float = 0.0

    @property
    def kind(self) -> str:
        return "const" if self.b == 0.0 else "linear"

    def value(self, t: float) -> float:
        return self.a + self.b * (t - self.t0)

    def left_limit(self) -> float:
        return self.a + self.b * (self.t1 - self.t0)

    def is_nonnegative(self) -> bool:
        # a ramp down to exactly zero may land a rounding error below it
        slack = 4 * _EPS * (abs(self.a) + abs(self.b) * (self.t1 - self.t0))
        return self.a >= 0 and self.left_limit() >= -slack


class RateSchedule:
    """Nonnegative piecewise rate ``r(t)`` with exact integrals.

    Parameters
    ----------
    segments : sequence of Segment
        Contiguous, sorted segments; the first must start at 0.
    tail : float
        Constant value for ``t`` beyond the end of the last segment.  With no
        segments the schedule is the constant ``tail``.
    check : bool
        Reject negative values.  Disable only to build deliberately invalid
        inputs (the network validator will then report them).
    """

    __slots__ = ("segments", "tail", "_starts", "_cum", "_end")

    def __init__(self, segments: Sequence[Segment] = (), tail: float = 0.0, check: bool = True):
        segments = tuple(segments)
        tail = float(tail)
        if not math.isfinite(tail):
            raise ScheduleError("tail must be finite")
        prev_end = 0.0
        for i, seg in enumerate(segments):
            if not all(math.isfinite(x) for x in (seg.t0, seg.t1, seg.a, seg.b)):
                raise ScheduleError(f"segment {i} has non-finite fields")
            if seg.t0 != prev_end:
                raise ScheduleError(
                    f"segment {i} starts at {seg.t0}, expected {prev_end} (segments must be contiguous from 0)"
                )
            if not seg.t1 > seg.t0:
                raise ScheduleError(f"segment {i} is empty or reversed: [{seg.t0}, {seg.t1})")
            prev_end = seg.t1
        if check:
            for i, seg in enumerate(segments):
                if not seg.is_nonnegative():
                    raise ScheduleError(f"segment {i} takes negative values")
            if tail < 0:
                raise ScheduleError("tail must be nonnegative")
        self.segments = segments
        self.tail = tail
        self._starts = [s.t0 for s in segments]
        self._end = segments[-1].t1 if segments else 0.0
        cum = [0.0]
        for s in segments:
            h = s.t1 - s.t0
            cum.append(cum[-1] + h * (s.a + 0.5 * s.b * h))
        self._cum = cum

    # construction helpers

    @classmethod
    def constant(cls, c: float, check: bool = True) -> "RateSchedule":
        return cls((), tail=c, check=check)

    @classmethod
    def piecewise_constant(
        cls, breaks: Sequence[float], values: Sequence[float], check: bool = True
    ) -> "RateSchedule":
        """``values[i]`` on ``[breaks[i-1], breaks[i])`` with ``breaks[-1] = 0``;
        the last value continues forever.  ``len(values) == len(breaks) + 1``."""
        if len(values) != len(breaks) + 1:
            raise ScheduleError("need exactly one more value than breakpoints")
        edges = [0.0, *map(float, breaks)]
        segs = [Segment(edges[i], edges[i + 1], float(values[i])) for i in range(len(breaks))]
        return cls(segs, tail=float(values[-1]), check=check)

    @classmethod
    def ramp(cls, start: float, stop: float, t_end: float, check: bool = True) -> "RateSchedule":
        """Linear ramp from ``start`` at 0 to ``stop`` at ``t_end``, then constant ``stop``."""
        slope = (stop - start) / t_end
        return cls([Segment(0.0, float(t_end), float(start), slope)], tail=stop, check=check)

    # evaluation

    def _index(self, t: float) -> int:
        # -1 means the tail
        if t >= self._end:
            return -1
        return bisect.bisect_right(self._starts, t) - 1

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.eval(float(t))
        t = np.asarray(t, dtype=float)
        return np.array([self.eval(x) for x in t.ravel()]).reshape(t.shape)

    def eval(self, t: float) -> float:
        if t < 0:
            raise ScheduleError(f"negative time {t}")
        i = self._index(t)
        if i < 0:
            return self.tail
        return self.segments[i].value(t)

    def left_value(self, t: float) -> float:
        """Left limit ``r(t-)``; equals ``eval`` away from breakpoints."""
        if t <= 0:
            return self.eval(0.0)
        if t > self._end:
            return self.tail
        i = bisect.bisect_left(self._starts, t) - 1
        return self.segments[i].value(t)

    def antiderivative(self, t: float) -> float:
        """``integral(0, t)``."""
        if t < 0:
            raise ScheduleError(f"negative time {t}")
        i = self._index(t)
        if i < 0:
            return self._cum[-1] + self.tail * (t - self._end)
        s = self.segments[i]
        h = t - s.t0
        return self._cum[i] + h * (s.a + 0.5 * s.b * h)

    def integral(self, t0: float, t1: float) -> float:
        if t0 > t1:
            raise ScheduleError(f"integral bounds reversed: {t0} > {t1}")
        if t0 < 0:
            raise ScheduleError(f"negative time {t0}")
        return self.antiderivative(t1) - self.antiderivative(t0)

    def breakpoints(self) -> list[float]:
        pts = set(self._starts[1:])
        if self.segments:
            pts.add(self._end)
        return sorted(p for p in pts if p > 0)

    # algebra, needed for the derived schedules q/(M-1), qL+qR, ...

    def scaled(self, factor: float) -> "RateSchedule":
        factor = float(factor)
        segs = [Segment(s.t0, s.t1, s.a * factor, s.b * factor) for s in self.segments]
        return RateSchedule(segs, self.tail * factor, check=factor >= 0 and self.is_nonnegative())

    def __add__(self, other: "RateSchedule") -> "RateSchedule":
        if not isinstance(other, RateSchedule):
            return NotImplemented
        edges = merge_breakpoints(self, other)
        segs = []
        lo = 0.0
        for hi in edges:
            a = self.eval(lo) + other.eval(lo)
            b = self._slope_at(lo) + other._slope_at(lo)
            segs.append(Segment(lo, hi, a, b))
            lo = hi
        ok = self.is_nonnegative() and other.is_nonnegative()
        return RateSchedule(segs, self.tail + other.tail, check=ok)

    def _slope_at(self, t: float) -> float:
        i = self._index(t)
        return 0.0 if i < 0 else self.segments[i].b

    def affine_pieces(self, edges: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Absolute-time coefficients ``(alpha, beta)`` with ``r(t) = alpha + beta*t``
        on each interval ``[edges[k], edges[k+1])``; the last interval is open-ended.

        ``edges`` must start at 0 and contain every breakpoint of this schedule.
        """
        alpha = np.empty(len(edges))
        beta = np.empty(len(edges))
        for k, lo in enumerate(edges):
            b = self._slope_at(lo)
            beta[k] = b
            alpha[k] = self.eval(lo) - b * lo
        return alpha, beta

    def is_nonnegative(self) -> bool:
        if self.tail < 0:
            return False
        return all(s.is_nonnegative() for s in self.segments)

    def is_positive(self) -> bool:
        """``r(t) > 0`` for every ``t > 0`` (endpoint checks; exact for affine pieces)."""
        if self.tail <= 0:
            return False
        for s in self.segments:
            v0, v1 = s.value(s.t0), s.left_limit()
            if v0 < 0 or v1 < 0:
                return False
            if s.t0 > 0 and v0 == 0:
                return False
            if v0 == 0 and v1 == 0:
                return False
        return True

    def is_zero(self) -> bool:
        return self.tail == 0 and all(s.a == 0 and s.b == 0 for s in self.segments)

    # serialization

    def to_config(self):
        if not self.segments:
            return self.tail
        out = []
        for s in self.segments:
            if s.b == 0.0:
                out.append({"t0": s.t0, "t1": s.t1, "kind": "const", "c": s.a})
            else:
                out.append({"t0": s.t0, "t1": s.t1, "kind": "linear", "a": s.a, "b": s.b})
        return {"segments": out, "tail": self.tail}

    @classmethod
    def from_config(cls, obj, check: bool = True) -> "RateSchedule":
        """Parse a number (constant), a list of segment objects, or
        ``{"segments": [...], "tail": x}``."""
        if isinstance(obj, (int, float)) and not isinstance(obj, bool):
            return cls.constant(float(obj), check=check)
        if isinstance(obj, dict):
            items = obj.get("segments")
            if items is None:
                raise ScheduleError("schedule object needs a 'segments' list")
            tail = obj.get("tail")
        elif isinstance(obj, list):
            items, tail = obj, None
        else:
            raise ScheduleError(f"cannot parse schedule from {obj!r}")
        segs = []
        for item in items:
            try:
                kind = item.get("kind", "const")
                t0, t1 = float(item["t0"]), float(item["t1"])
                if kind == "const":
                    segs.append(Segment(t0, t1, float(item["c"])))
                elif kind == "linear":
                    segs.append(Segment(t0, t1, float(item["a"]), float(item["b"])))
                else:
                    raise ScheduleError(f"unknown segment kind {kind!r}")
            except (KeyError, TypeError, AttributeError) as exc:
                raise ScheduleError(f"malformed segment {item!r}") from exc
        if tail is None:
            tail = segs[-1].left_limit() if segs else 0.0
        return cls(segs, float(tail), check=check)

    def __eq__(self, other):
        if not isinstance(other, RateSchedule):
            return NotImplemented
        return self.segments == other.segments and self.tail == other.tail

    def __hash__(self):
        return hash((self.segments, self.tail))

    def __repr__(self):
        if not self.segments:
            return f"RateSchedule.constant({self.tail!r})"
        return f"RateSchedule({list(self.segments)!r}, tail={self.tail!r})"

    def __reduce__(self):
        return (_rebuild, (self.segments, self.tail))


def _rebuild(segments, tail):
    return RateSchedule(segments, tail, check=False)


def merge_breakpoints(*schedules: RateSchedule | Iterable[RateSchedule]) -> list[float]:
    """Sorted union of the breakpoints of all given schedules."""
    pts: set[float] = set()
    for s in schedules:
        if isinstance(s, RateSchedule):
            pts.update(s.breakpoints())
        else:
            for x in s:
                pts.update(x.breakpoints())
    return sorted(pts)


def as_schedule(x) -> RateSchedule:
    if isinstance(x, RateSchedule):
        return x
    return RateSchedule.from_config(x)
