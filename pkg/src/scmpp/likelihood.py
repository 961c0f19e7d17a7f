"""Self-correcting conditional intensity components and the quadrature
negative log-likelihood.

The intensity factorizes into a temporal part exp(a1 + b1*t - g1*N(t)),
a spatial inhibition density built from the pairwise interaction psi,
and a space-time interaction penalty; the mark component is estimated
separately and never enters this objective.

Parameter vector order everywhere: (alpha1, beta1, gamma1, alpha2, beta2,
alpha3, beta3, gamma3), where the last three are the space-time
interaction strength, radius, and minimum lag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalDegeneracyError
from .pattern import Window
from .timemap import TemporalPattern

PARAM_NAMES = (
    "alpha1",
    "beta1",
    "gamma1",
    "alpha2",
    "beta2",
    "alpha3",
    "beta3",
    "gamma3",
)


@dataclass(frozen=True)
class ScParameters:
    """The 8 self-correcting parameters; all but alpha1 are nonnegative."""

    alpha1: float
    beta1: float
    gamma1: float
    alpha2: float
    beta2: float
    alpha3: float
    beta3: float
    gamma3: float

    def __post_init__(self):
        arr = self.to_array()
        if not np.isfinite(arr).all():
            raise InvalidInputError("parameters must be finite")
        if (arr[1:] < 0).any():
            bad = [PARAM_NAMES[i] for i in range(1, 8) if arr[i] < 0]
            raise InvalidInputError(f"negative parameter(s): {', '.join(bad)}")

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.alpha1,
                self.beta1,
                self.gamma1,
                self.alpha2,
                self.beta2,
                self.alpha3,
                self.beta3,
                self.gamma3,
            ],
            dtype=float,
        )

    @classmethod
    def from_array(cls, arr) -> "ScParameters":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (8,):
            raise InvalidInputError("parameter vector must have length 8")
        return cls(*[float(v) for v in arr])

    def canonical(self) -> "ScParameters":
        """Zero interaction strength zeroes its radius and lag."""
        if self.alpha3 == 0.0 and (self.beta3 != 0.0 or self.gamma3 != 0.0):
            return ScParameters(
                self.alpha1, self.beta1, self.gamma1, self.alpha2, self.beta2, 0.0, 0.0, 0.0
            )
        return self


@dataclass(frozen=True)
class QuadratureSchedule:
    """Integration bounds plus one or more (nt, nx, ny) grid levels,
    coarsest first."""

    upper_bounds: tuple[float, float, float]
    levels: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        ub = tuple(float(v) for v in self.upper_bounds)
        levels = tuple(tuple(int(r) for r in lv) for lv in self.levels)
        object.__setattr__(self, "upper_bounds", ub)
        object.__setattr__(self, "levels", levels)
        if len(ub) != 3 or any(v <= 0 for v in ub):
            raise InvalidInputError("upper_bounds must be three positive reals")
        if not levels:
            raise InvalidInputError("at least one grid level required")
        sizes = []
        for lv in levels:
            if len(lv) != 3 or any(r < 2 for r in lv):
                raise InvalidInputError(f"grid resolutions must be >= 2, got {lv}")
            sizes.append(lv[0] * lv[1] * lv[2])
        if any(b < a for a, b in zip(sizes, sizes[1:])):
            raise InvalidInputError("grid levels must be ordered coarsest first")


@dataclass(frozen=True)
class EventHistory:
    """Time-ordered (t, x, y) triples with strictly increasing times."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("times", "x", "y"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), float)))
        t = self.times
        if t.size and (t[0] < 0 or not (np.diff(t) > 0).all()):
            raise InvalidInputError("history times must be nonnegative and strictly increasing")
        if not (t.shape == self.x.shape == self.y.shape):
            raise InvalidInputError("history arrays must share a shape")

    def __len__(self) -> int:
        return int(self.times.size)

    @classmethod
    def empty(cls) -> "EventHistory":
        z = np.empty(0)
        return cls(z, z, z)

    def before(self, t: float) -> "EventHistory":
        k = int(np.searchsorted(self.times, t, side="left"))
        return EventHistory(self.times[:k], self.x[:k], self.y[:k])


def temporal_intensity(params: ScParameters, t: float, history: EventHistory) -> float:
    """exp(alpha1 + beta1*t - gamma1*N(t)) with N(t) = #{t_i < t}."""
    n_before = int(np.searchsorted(history.times, t, side="left"))
    return float(np.exp(params.alpha1 + params.beta1 * t - params.gamma1 * n_before))


def psi(r, params: ScParameters):
    """Pairwise inhibition factor in [0, 1].

    (r/alpha2)**beta2 inside the interaction radius, 1 outside;
    alpha2 = 0 disables inhibition entirely.
    """
    r = np.asarray(r, dtype=float)
    if params.alpha2 == 0.0:
        out = np.ones_like(r)
    else:
        out = np.minimum(r / params.alpha2, 1.0) ** params.beta2
    return float(out) if out.ndim == 0 else out


def log_psi(r, params: ScParameters):
    """log psi, with -inf at hard-core zeros; shape follows r."""
    r = np.asarray(r, dtype=float)
    if params.alpha2 == 0.0 or params.beta2 == 0.0:
        return np.zeros_like(r)
    with np.errstate(divide="ignore"):
        lp = params.beta2 * (np.log(r) - np.log(params.alpha2))
    return np.where(r < params.alpha2, lp, 0.0)


def _grid_centers(window: Window, nx: int, ny: int):
    xs = window.x_min + (np.arange(nx) + 0.5) * (window.width / nx)
    ys = window.y_min + (np.arange(ny) + 0.5) * (window.height / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return gx.ravel(), gy.ravel(), window.area / (nx * ny)


def spatial_log_density(
    point: tuple[float, float],
    earlier: EventHistory,
    params: ScParameters,
    window: Window,
    grid: tuple[int, int],
) -> float:
    """Log of the normalized inhibition density at `point`.

    The normalizing constant integrates the psi product over the window by
    the midpoint rule on an (nx, ny) grid.
    """
    nx, ny = int(grid[0]), int(grid[1])
    if nx < 2 or ny < 2:
        raise InvalidInputError("spatial quadrature needs at least 2 cells per axis")
    if not window.contains(point[0], point[1]):
        raise InvalidInputError("evaluation point outside the window")
    r = np.hypot(point[0] - earlier.x, point[1] - earlier.y)
    log_num = float(log_psi(r, params).sum()) if len(earlier) else 0.0
    gx, gy, cell_area = _grid_centers(window, nx, ny)
    if len(earlier):
        d = np.hypot(gx[:, None] - earlier.x[None, :], gy[:, None] - earlier.y[None, :])
        logp = log_psi(d, params).sum(axis=1)
    else:
        logp = np.zeros(gx.size)
    c = float(np.exp(logp).sum() * cell_area)
    if not np.isfinite(c) or c <= 0.0:
        raise NumericalDegeneracyError(
            "spatial normalizing constant underflowed (window fully inhibited)",
            parameters=(params.alpha2, params.beta2),
        )
    return log_num - np.log(c)


def interaction_log_f(
    event: tuple[float, float, float], history: EventHistory, params: ScParameters
) -> float:
    """-alpha3 times the number of earlier neighbors within radius beta3
    whose time lag is at least gamma3. Nonpositive by construction."""
    t, x, y = event
    if len(history) and history.times[-1] >= t:
        raise InvalidInputError("history must strictly precede the event")
    if params.alpha3 == 0.0 or len(history) == 0:
        return 0.0
    d = np.hypot(history.x - x, history.y - y)
    lag = t - history.times
    count = int(((d <= params.beta3) & (lag >= params.gamma3)).sum())
    return -params.alpha3 * count


def integrated_temporal_intensity(
    params: ScParameters, t: float, history: EventHistory
) -> float:
    """Lambda*(t) = integral of the temporal intensity, piecewise exact.

    Between event times the intensity is log-linear in s, so every piece
    integrates in closed form.
    """
    if t <= 0:
        return 0.0
    cuts = history.times[(history.times > 0) & (history.times < t)]
    bounds = np.concatenate([[0.0], cuts, [t]])
    a1, b1, g1 = params.alpha1, params.beta1, params.gamma1
    total = 0.0
    for s0, s1 in zip(bounds[:-1], bounds[1:]):
        if s1 <= s0:
            continue
        mid = 0.5 * (s0 + s1)
        n = int(np.searchsorted(history.times, mid, side="left"))
        scale = np.exp(a1 - g1 * n)
        if b1 == 0.0:
            total += scale * (s1 - s0)
        else:
            total += scale * (np.exp(b1 * s1) - np.exp(b1 * s0)) / b1
    return float(total)


class LikelihoodContext:
    """Precomputed geometry for repeated objective evaluations.

    Everything that does not depend on the parameters (pair distances,
    cell-to-event distances, per-time-cell history counts) is computed
    once; `value()` is then a handful of vectorized passes. A context is
    confined to one evaluation thread; concurrent fits each build their own.
    """

    def __init__(
        self,
        pattern: TemporalPattern,
        grid: tuple[int, int, int],
        t_upper: float | None = None,
    ):
        nt, nx, ny = (int(g) for g in grid)
        if min(nt, nx, ny) < 2:
            raise InvalidInputError("quadrature grid needs at least 2 cells per axis")
        if len(pattern) < 2:
            raise InvalidInputError("likelihood needs at least two events")
        self.pattern = pattern
        self.grid = (nt, nx, ny)
        self.t_upper = float(t_upper) if t_upper is not None else float(pattern.times[-1])
        w = pattern.window
        self.area = w.area
        t, x, y = pattern.times, pattern.x, pattern.y
        self.n = t.size
        self.times = t
        # pairwise distances and strictly-lower-triangle mask
        self.pair_d = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
        self.lower = np.tril(np.ones((self.n, self.n), dtype=bool), k=-1)
        self.pair_lag = t[:, None] - t[None, :]
        # spatial cells
        gx, gy, self.cell_area = _grid_centers(w, nx, ny)
        self.cell_d = np.hypot(gx[:, None] - x[None, :], gy[:, None] - y[None, :])
        # time cells
        dt = self.t_upper / nt
        self.dt = dt
        self.t_centers = (np.arange(nt) + 0.5) * dt
        # events strictly before each time cell center
        self.k_t = np.searchsorted(t, self.t_centers, side="left")

    def value(self, params) -> float:
        """Negative log-likelihood at an 8-vector or ScParameters."""
        if isinstance(params, ScParameters):
            p = params
        else:
            p = ScParameters.from_array(params)
        n = self.n
        t = self.times
        a1, b1, g1, a3, b3, g3 = p.alpha1, p.beta1, p.gamma1, p.alpha3, p.beta3, p.gamma3

        # temporal event terms; the anchor (index 0) is history, not data
        idx = np.arange(n)
        log_lam = a1 + b1 * t[1:] - g1 * idx[1:]

        # psi log-products: per-event sums over earlier events, and
        # per-cell prefix sums over the first k events
        lp_pairs = log_psi(self.pair_d, p)
        event_logpsi = np.where(self.lower, lp_pairs, 0.0).sum(axis=1)
        lp_cells = log_psi(self.cell_d, p)
        prefix = np.zeros((lp_cells.shape[0], n + 1))
        np.cumsum(lp_cells, axis=1, out=prefix[:, 1:])
        with np.errstate(over="ignore"):
            e_prefix = np.exp(prefix)
        c_prefix = self.cell_area * e_prefix.sum(axis=0)
        if not np.isfinite(c_prefix).all() or (c_prefix[1:] <= 0.0).any():
            raise NumericalDegeneracyError(
                "spatial normalizing constant underflowed", parameters=(p.alpha2, p.beta2)
            )
        event_spatial = event_logpsi[1:] - np.log(c_prefix[1 : n])

        # interaction event terms
        if a3 > 0.0:
            qual = self.lower & (self.pair_d <= b3) & (self.pair_lag >= g3)
            event_inter = -a3 * qual.sum(axis=1)[1:]
        else:
            event_inter = np.zeros(n - 1)

        event_total = float(log_lam.sum() + event_spatial.sum() + event_inter.sum())
        if not np.isfinite(event_total):
            raise NumericalDegeneracyError("non-finite event term", parameters=tuple(p.to_array()))

        # triple integral by midpoint rule
        k = self.k_t
        lam_t = np.exp(a1 + b1 * self.t_centers - g1 * k)
        if a3 > 0.0:
            if g3 > 0.0:
                m = np.minimum(k, np.searchsorted(t, self.t_centers - g3, side="right"))
            else:
                m = k
            within = self.cell_d <= b3
            w_prefix = np.zeros((within.shape[0], n + 1))
            np.cumsum(within, axis=1, out=w_prefix[:, 1:])
            inner = np.empty(k.size)
            for j in range(k.size):
                inner[j] = (
                    np.exp(prefix[:, k[j]] - a3 * w_prefix[:, m[j]]).sum() * self.cell_area
                )
        else:
            inner = c_prefix[k]
        integral = float(self.dt * np.sum(lam_t * inner / c_prefix[k]))
        if not np.isfinite(integral):
            raise NumericalDegeneracyError("non-finite integral", parameters=tuple(p.to_array()))
        return -event_total + integral


def neg_log_likelihood(
    params: ScParameters,
    pattern: TemporalPattern,
    grid: tuple[int, int, int],
    t_upper: float | None = None,
) -> float:
    """One-shot negative log-likelihood; builds a context and evaluates.

    Fitting code should hold a LikelihoodContext instead to amortize the
    geometry precomputation across evaluations.
    """
    return LikelihoodContext(pattern, grid, t_upper=t_upper).value(params)
