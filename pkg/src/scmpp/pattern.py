"""Geometry primitives: windows, marked patterns, distances, nn statistics.

All values are immutable after construction and safe to share across
parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

# Above this point count, nearest-neighbor statistics stream pair blocks
# instead of materializing the full distance matrix.
_DENSE_LIMIT = 5000


@dataclass(frozen=True)
class Window:
    """Closed axis-aligned rectangle; points on the boundary are inside."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (np.isfinite([self.x_min, self.x_max, self.y_min, self.y_max]).all()):
            raise InvalidInputError("window bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInputError(
                f"degenerate window [{self.x_min},{self.x_max}]x[{self.y_min},{self.y_max}]"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))

    def contains(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (
            (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)
        )


@dataclass(frozen=True)
class MarkedPoint:
    x: float
    y: float
    size: float
    secondary: float | None = None


@dataclass(frozen=True)
class MarkedPattern:
    """Point locations with positive size marks inside a window.

    Stores coordinates as arrays; ``point(i)`` gives a record view.
    Construction allows an empty pattern, individual operations enforce
    their own minimum point counts.
    """

    window: Window
    x: np.ndarray
    y: np.ndarray
    size: np.ndarray
    secondary: np.ndarray | None = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        size = np.asarray(self.size, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "size", size)
        if self.secondary is not None:
            sec = np.asarray(self.secondary, dtype=float)
            object.__setattr__(self, "secondary", sec)
            if sec.shape != x.shape:
                raise InvalidInputError("secondary mark length mismatch")
            if sec.size and not (np.isfinite(sec).all() and (sec > 0).all()):
                raise InvalidInputError("secondary marks must be finite and positive")
        if not (x.shape == y.shape == size.shape) or x.ndim != 1:
            raise InvalidInputError("x, y, size must be equal-length 1-d arrays")
        if x.size:
            if not np.isfinite(x).all() or not np.isfinite(y).all():
                raise InvalidInputError("coordinates must be finite")
            if not np.isfinite(size).all() or not (size > 0).all():
                raise InvalidInputError("sizes must be finite and positive")
            inside = self.window.contains(x, y)
            if not inside.all():
                bad = int(np.flatnonzero(~inside)[0])
                raise InvalidInputError(
                    f"point {bad} at ({x[bad]}, {y[bad]}) lies outside the window"
                )

    def __len__(self) -> int:
        return int(self.x.size)

    def point(self, i: int) -> MarkedPoint:
        sec = None if self.secondary is None else float(self.secondary[i])
        return MarkedPoint(float(self.x[i]), float(self.y[i]), float(self.size[i]), sec)

    @classmethod
    def from_points(cls, window: Window, points) -> "MarkedPattern":
        pts = list(points)
        sec = None
        if pts and any(p.secondary is not None for p in pts):
            if not all(p.secondary is not None for p in pts):
                raise InvalidInputError("secondary mark must be present on all points or none")
            sec = np.array([p.secondary for p in pts], dtype=float)
        return cls(
            window=window,
            x=np.array([p.x for p in pts], dtype=float),
            y=np.array([p.y for p in pts], dtype=float),
            size=np.array([p.size for p in pts], dtype=float),
            secondary=sec,
        )


@dataclass(frozen=True)
class DistanceMetric:
    """Euclidean metric, or the flat-torus metric induced by a window."""

    kind: str
    window: Window | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "toroidal"):
            raise InvalidInputError(f"unknown metric kind {self.kind!r}")
        if self.kind == "toroidal" and self.window is None:
            raise InvalidInputError("toroidal metric requires a window")

    @classmethod
    def euclidean(cls) -> "DistanceMetric":
        return cls("euclidean")

    @classmethod
    def toroidal(cls, window: Window) -> "DistanceMetric":
        return cls("toroidal", window)


def _separations(ax, ay, bx, by, metric: DistanceMetric):
    dx = np.abs(ax[:, None] - bx[None, :])
    dy = np.abs(ay[:, None] - by[None, :])
    if metric.kind == "toroidal":
        w, h = metric.window.width, metric.window.height
        dx = np.minimum(dx, w - dx)
        dy = np.minimum(dy, h - dy)
    return np.hypot(dx, dy)


def cross_distances(ax, ay, bx, by, metric: DistanceMetric | None = None) -> np.ndarray:
    """Distance matrix between two point sets under the given metric."""
    if metric is None:
        metric = DistanceMetric.euclidean()
    return _separations(
        np.asarray(ax, float), np.asarray(ay, float), np.asarray(bx, float), np.asarray(by, float), metric
    )


def pairwise_distances(pattern: MarkedPattern, metric: DistanceMetric | None = None) -> np.ndarray:
    """Symmetric matrix of interpoint distances; zero diagonal.

    The toroidal metric identifies opposite window edges, so a pair hugging
    opposite sides of the window can be close.
    """
    if len(pattern) < 1:
        raise InvalidInputError("pairwise_distances needs at least one point")
    d = cross_distances(pattern.x, pattern.y, pattern.x, pattern.y, metric)
    np.fill_diagonal(d, 0.0)
    return d


def nn_distances(x, y, metric: DistanceMetric | None = None) -> np.ndarray:
    """Per-point distance to the nearest other point."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    if n < 2:
        raise InvalidInputError("nearest-neighbor distances need at least two points")
    if metric is None:
        metric = DistanceMetric.euclidean()
    if n <= _DENSE_LIMIT:
        d = _separations(x, y, x, y, metric)
        np.fill_diagonal(d, np.inf)
        return d.min(axis=1)
    out = np.empty(n)
    block = 1024
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _separations(x[start:stop], y[start:stop], x, y, metric)
        for i in range(start, stop):
            d[i - start, i] = np.inf
        out[start:stop] = d.min(axis=1)
    return out


def nn_distance_summary(pattern: MarkedPattern) -> dict:
    """Six-number summary of nearest-neighbor distances.

    Quantiles use linear interpolation of the order statistics (the
    numpy default, type-7).
    """
    if len(pattern) < 2:
        raise InvalidInputError("nn_distance_summary needs at least two points")
    d = nn_distances(pattern.x, pattern.y)
    q1, med, q3 = np.quantile(d, [0.25, 0.5, 0.75])
    return {
        "min": float(d.min()),
        "q1": float(q1),
        "median": float(med),
        "mean": float(d.mean()),
        "q3": float(q3),
        "max": float(d.max()),
    }


def window_geometry(window: Window) -> dict:
    """Area and euclidean diagonal of a window."""
    return {"area": window.area, "diagonal": window.diagonal}


def boundary_distance(x, y, window: Window) -> np.ndarray:
    """Distance from each point to the nearest window edge."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.minimum.reduce(
        [x - window.x_min, window.x_max - x, y - window.y_min, window.y_max - y]
    )
