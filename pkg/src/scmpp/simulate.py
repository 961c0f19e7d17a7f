"""Realization generation on [t_min, t_max] x window.

Arrival times come from dominated rejection of a Poisson candidate set,
locations from rejection sampling against the inhibition product, an
optional sequential interaction thinning pass, and marks either from a
trained mark model or by inverting the size-to-time mapping. The anchor
location is injected at t_min as the first history event and is never
thinned.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetError, InvalidInputError, SaturationError
from .likelihood import ScParameters, psi
from .pattern import Window
from .timemap import TimeMapping, time_to_size
from .utils import derive_rng

MAX_POISSON_MEAN = 1e7
MAX_LOCATION_REJECTIONS = 1_000_000
_PROPOSAL_BATCH = 64


@dataclass(frozen=True)
class SimConfig:
    anchor: tuple[float, float]
    t_min: float = 0.0
    t_max: float = 1.0
    thinning: bool = True
    mark_mode: str = "time_to_size"
    competition_radius: float | None = None
    edge_correction: str = "none"
    seed: int = 1

    def __post_init__(self):
        if self.t_min >= self.t_max:
            raise InvalidInputError("t_min must be below t_max")
        if self.mark_mode not in ("mark_model", "time_to_size"):
            raise InvalidInputError(f"unknown mark_mode {self.mark_mode!r}")
        if self.edge_correction not in ("none", "toroidal"):
            raise InvalidInputError("simulation edge correction must be none or toroidal")


@dataclass
class SimRealization:
    """Anchor-first events with marks, plus acceptance diagnostics."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    marks: np.ndarray
    diagnostics: dict
    config: SimConfig = field(repr=False, default=None)

    def __len__(self) -> int:
        return int(self.times.size)


def simulate_arrival_times(
    params: ScParameters,
    t_range: tuple[float, float],
    rng: np.random.Generator,
    initial_times=(),
    info: dict | None = None,
) -> np.ndarray:
    """Dominated rejection of Poisson candidates on (t_min, t_max].

    Candidate count is Poisson with mean exp(alpha1 + beta1*t_max) times
    the interval length; each sorted candidate is accepted with
    probability lambda*(t)/exp(alpha1 + beta1*t_max), where the history is
    the initial times plus previously accepted candidates.
    """
    if params.gamma1 < 0:
        raise InvalidInputError("gamma1 must be nonnegative for the dominating bound")
    t_min, t_max = float(t_range[0]), float(t_range[1])
    log_bound = params.alpha1 + params.beta1 * t_max
    mean = np.exp(log_bound) * (t_max - t_min)
    if not np.isfinite(mean) or mean > MAX_POISSON_MEAN:
        raise BudgetError(f"dominating Poisson mean {mean:.3g} exceeds {MAX_POISSON_MEAN:.0e}")
    n_cand = int(rng.poisson(mean))
    if info is not None:
        info["n_candidates"] = n_cand
    candidates = np.sort(rng.uniform(t_min, t_max, size=n_cand))
    u = rng.uniform(size=n_cand)
    history = list(initial_times)
    n_initial = len(history)
    accepted = []
    for t, ui in zip(candidates, u):
        n_before = n_initial + len(accepted)  # all history is earlier by construction
        log_ratio = params.beta1 * (t - t_max) - params.gamma1 * n_before
        if ui < np.exp(log_ratio):
            accepted.append(t)
    out = np.asarray(accepted, dtype=float)
    out.flags.writeable = False
    return out


def sample_location(
    params: ScParameters,
    earlier_x,
    earlier_y,
    window: Window,
    rng: np.random.Generator,
) -> tuple[float, float, int]:
    """Uniform proposals accepted with probability prod psi(r to earlier).

    Returns (x, y, n_proposals). Raises after 10^6 consecutive rejections,
    which signals an essentially fully inhibited window.
    """
    ex = np.asarray(earlier_x, float)
    ey = np.asarray(earlier_y, float)
    tried = 0
    while tried < MAX_LOCATION_REJECTIONS:
        px = rng.uniform(window.x_min, window.x_max, size=_PROPOSAL_BATCH)
        py = rng.uniform(window.y_min, window.y_max, size=_PROPOSAL_BATCH)
        u = rng.uniform(size=_PROPOSAL_BATCH)
        if ex.size:
            r = np.hypot(px[:, None] - ex[None, :], py[:, None] - ey[None, :])
            accept_p = psi(r, params).prod(axis=1)
        else:
            accept_p = np.ones(_PROPOSAL_BATCH)
        hit = np.flatnonzero(u < accept_p)
        if hit.size:
            k = int(hit[0])
            return float(px[k]), float(py[k]), tried + k + 1
        tried += _PROPOSAL_BATCH
    raise SaturationError(
        f"no location accepted after {MAX_LOCATION_REJECTIONS} proposals",
        parameters=(params.alpha2, params.beta2),
    )


def thin_by_interaction(
    times, xs, ys, params: ScParameters, rng: np.random.Generator
) -> np.ndarray:
    """Sequential interaction thinning; returns the boolean keep mask.

    Events are swept in time order and kept with probability
    exp(-alpha3 * #qualifying PREVIOUSLY KEPT neighbors); the first event
    always survives.
    """
    times = np.asarray(times, float)
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    n = times.size
    keep = np.zeros(n, dtype=bool)
    kept_idx: list[int] = []
    for i in range(n):
        if params.alpha3 == 0.0 or not kept_idx:
            p_keep = 1.0
        else:
            kj = np.asarray(kept_idx)
            d = np.hypot(xs[kj] - xs[i], ys[kj] - ys[i])
            lag = times[i] - times[kj]
            count = int(((d <= params.beta3) & (lag >= params.gamma3)).sum())
            p_keep = np.exp(-params.alpha3 * count)
        if rng.uniform() < p_keep:
            keep[i] = True
            kept_idx.append(i)
    return keep


def _predict_realization_marks(mark_source, times, xs, ys, window, config: SimConfig):
    from .markmodel import predict_for_events  # deferred; marks stack is optional here

    return predict_for_events(
        mark_source,
        times,
        xs,
        ys,
        window,
        competition_radius=config.competition_radius,
        edge_correction=config.edge_correction,
    )


def simulate_mpp(fit, mark_source, config: SimConfig, window: Window | None = None) -> SimRealization:
    """Full realization: arrival times, locations, optional thinning, marks.

    `fit` supplies the parameters plus window/size-range context (a
    FitResult, or anything with .parameters and .window). `mark_source` is
    a TimeMapping under mark_mode="time_to_size" and a trained mark model
    under "mark_model". Deterministic given config.seed.
    """
    params: ScParameters = fit.parameters
    win = window if window is not None else fit.window
    ax, ay = config.anchor
    if not win.contains(ax, ay):
        raise InvalidInputError("anchor must lie inside the window")
    rng = derive_rng(int(config.seed))

    time_info: dict = {}
    arrivals = simulate_arrival_times(
        params, (config.t_min, config.t_max), rng,
        initial_times=(config.t_min,), info=time_info,
    )
    n_accepted = arrivals.size

    times = np.concatenate([[config.t_min], arrivals])
    xs = np.empty(times.size)
    ys = np.empty(times.size)
    xs[0], ys[0] = ax, ay
    n_proposals = 0
    for i in range(1, times.size):
        xs[i], ys[i], tried = sample_location(params, xs[:i], ys[:i], win, rng)
        n_proposals += tried

    n_thinned = 0
    if config.thinning and times.size > 1:
        keep = thin_by_interaction(times, xs, ys, params, rng)
        keep[0] = True  # the anchor is conditioned on, never thinned
        n_thinned = int((~keep).sum())
        times, xs, ys = times[keep], xs[keep], ys[keep]

    if config.mark_mode == "time_to_size":
        if not isinstance(mark_source, TimeMapping):
            mark_source = TimeMapping(
                float(fit.selected_delta), float(fit.size_range[0]), float(fit.size_range[1])
            )
        span = config.t_max - config.t_min
        marks = time_to_size((times - config.t_min) / span, mark_source)
        marks = np.atleast_1d(np.asarray(marks, float))
    else:
        marks = _predict_realization_marks(mark_source, times, xs, ys, win, config)

    return SimRealization(
        times=times,
        x=xs,
        y=ys,
        marks=marks,
        diagnostics={
            "n_candidates": int(time_info["n_candidates"]),
            "n_time_accepted": int(n_accepted),
            "n_spatial_proposals": int(n_proposals),
            "n_thinned": int(n_thinned),
        },
        config=config,
    )
