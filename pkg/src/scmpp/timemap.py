"""Bijection between size marks and derived arrival times.

The largest mark maps to time 0 (the anchor), the smallest to time 1;
`delta` bends the mapping, with delta = 1 linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRangeError, InvalidInputError, RangeError
from .pattern import MarkedPattern, Window

MAX_DELTA = 16.0


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not np.isfinite(delta) or delta <= 0 or delta > MAX_DELTA:
        raise RangeError(f"delta must lie in (0, {MAX_DELTA}], got {delta}")
    return delta


@dataclass(frozen=True)
class TimeMapping:
    delta: float
    size_min: float
    size_max: float

    def __post_init__(self):
        _check_delta(self.delta)
        if not (
            np.isfinite(self.size_min)
            and np.isfinite(self.size_max)
            and 0 < self.size_min < self.size_max
        ):
            raise DegenerateRangeError(
                f"size range [{self.size_min}, {self.size_max}] is degenerate"
            )


def size_to_time(size, mapping: TimeMapping):
    """t = 1 - ((size - size_min)/(size_max - size_min))**delta, in [0, 1]."""
    size = np.asarray(size, dtype=float)
    span = mapping.size_max - mapping.size_min
    if np.any(size < mapping.size_min) or np.any(size > mapping.size_max):
        raise RangeError("size outside the mapping range")
    t = 1.0 - ((size - mapping.size_min) / span) ** mapping.delta
    return float(t) if t.ndim == 0 else t


def time_to_size(t, mapping: TimeMapping):
    """Exact inverse of size_to_time on [0, 1]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise RangeError("time outside [0, 1]")
    span = mapping.size_max - mapping.size_min
    s = mapping.size_min + span * (1.0 - t) ** (1.0 / mapping.delta)
    return float(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class TemporalPattern:
    """Events relabeled by derived time; index 0 is the anchor at t = 0.

    `permutation[i]` is the index of event i in the original pattern, so
    applying its inverse recovers the input ordering exactly.
    """

    window: Window
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    size: np.ndarray
    permutation: np.ndarray
    delta: float
    secondary: np.ndarray | None = field(default=None)

    def __post_init__(self):
        for name in ("times", "x", "y", "size", "permutation"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if self.secondary is not None:
            object.__setattr__(self, "secondary", np.asarray(self.secondary, float))
        t = self.times
        if t.size < 2:
            raise InvalidInputError("temporal pattern needs at least two events")
        if not (np.diff(t) > 0).all():
            raise InvalidInputError("event times must be strictly increasing")
        if t[0] != 0.0 or abs(t[-1] - 1.0) > 1e-12:
            raise InvalidInputError("event times must span [0, 1]")

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def anchor(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.y[0])

    @property
    def size_range(self) -> tuple[float, float]:
        return float(self.size.min()), float(self.size.max())

    def mapping(self) -> TimeMapping:
        lo, hi = self.size_range
        return TimeMapping(self.delta, lo, hi)


def _break_time_ties(t: np.ndarray) -> np.ndarray:
    """Nudge duplicate sorted times up by one ulp each; keep max at 1."""
    t = t.copy()
    for i in range(1, t.size):
        if t[i] <= t[i - 1]:
            t[i] = np.nextafter(t[i - 1], np.inf)
    if t[-1] > 1.0:
        t[-1] = 1.0
        for i in range(t.size - 2, -1, -1):
            if t[i] >= t[i + 1]:
                t[i] = np.nextafter(t[i + 1], -np.inf)
    if not (np.diff(t) > 0).all() or t[0] < 0.0:
        raise DegenerateRangeError("could not break time ties; too many equal sizes")
    return t


def order_by_time(pattern: MarkedPattern, delta: float) -> TemporalPattern:
    """Map sizes to times and relabel events in increasing time order.

    Equal sizes are ordered stably by input index, then tied times are
    separated by minimal float increments so downstream code can rely on
    a strict ordering.
    """
    _check_delta(delta)
    if len(pattern) < 2:
        raise InvalidInputError("ordering needs at least two points")
    smin, smax = float(pattern.size.min()), float(pattern.size.max())
    if smin == smax:
        raise DegenerateRangeError("all sizes equal; size-to-time mapping is degenerate")
    mapping = TimeMapping(delta, smin, smax)
    t_raw = size_to_time(pattern.size, mapping)
    order = np.argsort(t_raw, kind="stable")
    t = _break_time_ties(t_raw[order])
    return TemporalPattern(
        window=pattern.window,
        times=t,
        x=pattern.x[order],
        y=pattern.y[order],
        size=pattern.size[order],
        permutation=order,
        delta=float(delta),
        secondary=None if pattern.secondary is None else pattern.secondary[order],
    )
