"""Bound-constrained likelihood fitting.

Strategies compose the two optimizers: "local" polishes through every
grid level, "global_local" runs one controlled-random-search stage plus a
local polish on the coarsest level, and "multires_global_local" adds
local-only refinement on finer levels with candidate rescoring between
levels. Multi-starts jitter the stage start point; a delta list triggers
independent fits per candidate mapping with the best objective winning.

Everything is deterministic given (seed, stage, start index), so parallel
and serial execution agree bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EstimationFailedError,
    InvalidInputError,
    NumericalError,
)
from .likelihood import LikelihoodContext, QuadratureSchedule, ScParameters
from .optimize import BudgetSpec, OptimizeResult, minimize_global, minimize_local
from .pattern import MarkedPattern, nn_distances
from .timemap import TemporalPattern, order_by_time
from .utils import derive_rng, parallel_map

STRATEGIES = ("local", "global_local", "multires_global_local")

ALPHA1_HALF_RANGE = 10.0
BETA1_CAP_OVER_SPAN = 20.0
BETA2_CAP = 50.0
ALPHA3_CAP = 30.0


@dataclass(frozen=True)
class BudgetSchedule:
    """Optimizer budgets for the global stage and the two local stages."""

    global_stage: BudgetSpec
    local_first: BudgetSpec
    local_refine: BudgetSpec

    @classmethod
    def default(cls) -> "BudgetSchedule":
        return cls(
            global_stage=BudgetSpec(500, 1e-3, 1e-3),
            local_first=BudgetSpec(1000, 1e-4, 1e-4),
            local_refine=BudgetSpec(2000, 1e-6, 1e-6),
        )


@dataclass(frozen=True)
class StartsConfig:
    global_restarts: int = 1
    local_starts: int = 1
    jitter_sd: float = 0.35
    seed: int = 1

    def __post_init__(self):
        if self.global_restarts < 1 or self.local_starts < 1:
            raise InvalidInputError("restart counts must be >= 1")
        if self.jitter_sd < 0:
            raise InvalidInputError("jitter_sd must be nonnegative")


@dataclass(frozen=True)
class RescoreControl:
    enabled: bool = True
    top: int = 5
    objective_tol: float = 1e-6
    param_tol: float = 0.10
    bound_eps: float = 1e-8
    avoid_bound_solutions: bool = True

    def __post_init__(self):
        if self.top < 1:
            raise InvalidInputError("rescore top must be >= 1")
        if min(self.objective_tol, self.param_tol, self.bound_eps) <= 0:
            raise InvalidInputError("rescore tolerances must be positive")


@dataclass
class Candidate:
    x: np.ndarray
    value: float
    status: str
    origin: str


@dataclass
class FitResult:
    parameters: ScParameters
    objective: float
    status: str
    selected_delta: float
    lower: np.ndarray
    upper: np.ndarray
    schedule: QuadratureSchedule
    budgets: BudgetSchedule
    starts: StartsConfig
    rescore: RescoreControl
    strategy: str
    seed: int
    elapsed: float
    window: object
    size_range: tuple[float, float]
    anchor: tuple[float, float]
    n_events: int
    data: MarkedPattern | None = field(default=None, repr=False)


def _poisson_slope(times: np.ndarray, span: float) -> float | None:
    """Slope of a two-parameter Poisson regression of binned counts on
    bin-center time with a log bin-width offset; None on non-convergence."""
    n_bins = int(np.ceil(np.sqrt(times.size)))
    edges = np.linspace(0.0, span, n_bins + 1)
    counts = np.histogram(times, bins=edges)[0].astype(float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    offset = np.log(span / n_bins)
    beta = np.zeros(2)
    X = np.column_stack([np.ones(n_bins), centers])
    for _ in range(50):
        eta = X @ beta + offset
        mu = np.exp(eta)
        if not np.isfinite(mu).all():
            return None
        grad = X.T @ (counts - mu)
        hess = X.T @ (X * mu[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        beta = beta + step
        if np.abs(step).max() < 1e-10:
            return float(beta[1])
    return None


def default_initialization(
    pattern: TemporalPattern, schedule: QuadratureSchedule
) -> tuple[ScParameters, np.ndarray, np.ndarray]:
    """Data-adaptive start point and finite box for the 8 parameters.

    Baseline rate log(n/span), self-correction on a log(n)/n scale, trend
    from a Poisson regression of binned counts (fallback: a 2x change over
    the window), inhibition range from the median nearest-neighbor
    distance. Spatial scales are capped by the window diagonal and the
    temporal interaction lag by the time span.
    """
    if len(pattern) < 2:
        raise InvalidInputError("initialization needs at least two events")
    n = len(pattern)
    span = schedule.upper_bounds[0]
    diag = pattern.window.diagonal

    alpha_base = np.log(n / span)
    gamma1 = np.log(n) / n
    slope = _poisson_slope(pattern.times, span)
    beta1 = slope if slope is not None else np.log(2.0) / span
    nn_med = float(np.median(nn_distances(pattern.x, pattern.y)))
    alpha2 = min(nn_med, diag)

    lower = np.array([alpha_base - ALPHA1_HALF_RANGE, 0, 0, 0, 0, 0, 0, 0], dtype=float)
    upper = np.array(
        [
            alpha_base + ALPHA1_HALF_RANGE,
            BETA1_CAP_OVER_SPAN / span,
            max(1.0, 10.0 * gamma1),
            diag,
            BETA2_CAP,
            ALPHA3_CAP,
            diag,
            span,
        ],
        dtype=float,
    )
    init = np.clip(
        np.array([alpha_base, beta1, gamma1, alpha2, 1.0, 0.1, alpha2, 0.05 * span]),
        lower,
        upper,
    )
    return ScParameters.from_array(init), lower, upper


def _is_boundary(x, lower, upper, bound_eps):
    tol = bound_eps * (upper - lower)
    return bool(((x - lower) <= tol).any() or ((upper - x) <= tol).any())


def _box_distance(a, b, lower, upper):
    return float(np.max(np.abs(a - b) / (upper - lower)))


def rescore_candidates(
    candidates: list[Candidate],
    objective,
    control: RescoreControl,
    lower,
    upper,
) -> list[Candidate]:
    """Deduplicate, re-evaluate the top candidates on a finer grid, and
    rank them, demoting near-bound solutions behind comparable interior
    ones when requested."""
    if not candidates:
        raise InvalidInputError("no candidates to rescore")
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    ordered = sorted(enumerate(candidates), key=lambda iv: (iv[1].value, iv[0]))
    kept: list[Candidate] = []
    for _, cand in ordered:
        dup = any(
            _box_distance(cand.x, k.x, lower, upper) <= control.param_tol
            and abs(cand.value - k.value) <= control.objective_tol * (1.0 + abs(k.value))
            for k in kept
        )
        if not dup:
            kept.append(cand)
        if len(kept) >= control.top:
            break
    rescored = [
        replace(c, value=float(objective(c.x)), origin=c.origin + "+rescored") for c in kept
    ]
    rescored.sort(key=lambda c: (c.value if np.isfinite(c.value) else np.inf))
    if control.avoid_bound_solutions and len(rescored) > 1:
        changed = True
        while changed:
            changed = False
            for i in range(len(rescored) - 1):
                a, b = rescored[i], rescored[i + 1]
                comparable = (b.value - a.value) <= control.objective_tol * (1.0 + abs(a.value))
                if (
                    comparable
                    and _is_boundary(a.x, lower, upper, control.bound_eps)
                    and not _is_boundary(b.x, lower, upper, control.bound_eps)
                ):
                    rescored[i], rescored[i + 1] = b, a
                    changed = True
    return rescored


def _make_objective(tp: TemporalPattern, level, t_upper):
    ctx = LikelihoodContext(tp, level, t_upper=t_upper)

    def objective(x):
        try:
            return ctx.value(x)
        except NumericalError:
            return np.inf

    return objective


def _jittered_starts(center, lower, upper, starts: StartsConfig, rng):
    """Stage start points: the center itself plus jittered copies."""
    pts = [np.asarray(center, float)]
    scale = starts.jitter_sd * (upper - lower) / 10.0
    for _ in range(starts.local_starts - 1):
        pts.append(np.clip(center + rng.normal(0.0, 1.0, center.size) * scale, lower, upper))
    return pts


def _local_stage(objective, center, lower, upper, budget, starts, rng, origin, diagnostics):
    cands = []
    for si, x0 in enumerate(_jittered_starts(center, lower, upper, starts, rng)):
        try:
            res: OptimizeResult = minimize_local(objective, x0, lower, upper, budget)
        except NumericalError as exc:
            diagnostics.append(f"{origin} start {si}: {exc}")
            continue
        if np.isfinite(res.value):
            cands.append(Candidate(res.x, res.value, res.status, f"{origin}[{si}]"))
        else:
            diagnostics.append(f"{origin} start {si}: non-finite result")
    return cands


def _run_levels(
    tp,
    levels,
    t_upper,
    budgets: BudgetSchedule,
    strategy: str,
    starts: StartsConfig,
    rescore: RescoreControl,
    lower,
    upper,
    init_x,
    seed,
    delta_idx,
    diagnostics,
    candidates: list[Candidate] | None = None,
    progress=None,
    level_offset: int = 0,
):
    """Level loop shared by all strategies and by best-delta refinement.

    A non-None `candidates` list means an earlier stage's output is being
    refined: every level is then a refinement level (local polish only).
    """
    refining = candidates is not None
    for li, level in enumerate(levels):
        gi = li + level_offset
        objective = _make_objective(tp, level, t_upper)
        first = (li == 0) and not refining
        if first:
            budget = budgets.local_first
            center = np.asarray(init_x, float)
            if strategy in ("global_local", "multires_global_local"):
                best_g = None
                for ri in range(starts.global_restarts):
                    if progress is not None:
                        progress("global", ri, starts.global_restarts)
                    try:
                        g = minimize_global(
                            objective, lower, upper, budgets.global_stage,
                            derive_rng(seed, delta_idx, 1, gi, ri),
                        )
                    except NumericalError as exc:
                        diagnostics.append(f"global restart {ri}: {exc}")
                        continue
                    if np.isfinite(g.value) and (best_g is None or g.value < best_g.value):
                        best_g = g
                if best_g is not None:
                    center = best_g.x
            carried: list[Candidate] = []
        else:
            budget = budgets.local_refine
            if rescore.enabled:
                ranked = rescore_candidates(candidates, objective, rescore, lower, upper)
                center = ranked[0].x
                carried = ranked[1:]
            else:
                best = min(candidates, key=lambda c: (c.value, c.origin))
                center = best.x
                carried = []
        if progress is not None:
            progress("local", gi, len(levels) + level_offset)
        polished = _local_stage(
            objective, center, lower, upper, budget, starts,
            derive_rng(seed, delta_idx, 2, gi), f"L{gi}", diagnostics,
        )
        candidates = polished + carried
        if not candidates:
            raise EstimationFailedError(
                "all optimization starts failed", diagnostics=diagnostics
            )
    return candidates


def _fit_one_delta(args):
    """Fit a single delta candidate; top-level function so delta searches
    can be parallel map tasks."""
    (pattern, schedule, levels, budgets, strategy, starts, rescore, delta,
     delta_idx, seed) = args
    diagnostics: list[str] = []
    tp = order_by_time(pattern, delta)
    init, lower, upper = default_initialization(tp, schedule)
    t_upper = schedule.upper_bounds[0]
    candidates = _run_levels(
        tp, levels, t_upper, budgets, strategy, starts, rescore,
        lower, upper, init.to_array(), seed, delta_idx, diagnostics,
    )
    best = min(candidates, key=lambda c: (c.value, c.origin))
    return candidates, best, init, lower, upper, diagnostics


def _select_final(candidates, init, objective, diagnostics):
    """Best candidate by objective, with the initialization point included
    so the descent guarantee holds structurally."""
    init_val = float(objective(init.to_array()))
    finite_runs = [c for c in candidates if np.isfinite(c.value)]
    fallback = min(finite_runs, key=lambda c: c.value).status if finite_runs else "failed"
    pool = candidates + [Candidate(init.to_array(), init_val, fallback, "init")]
    finite = [c for c in pool if np.isfinite(c.value)]
    if not finite:
        raise EstimationFailedError("no start produced a finite objective", diagnostics)
    return min(finite, key=lambda c: (c.value, c.origin))


def fit_process(
    pattern: MarkedPattern,
    schedule: QuadratureSchedule,
    budgets: BudgetSchedule,
    strategy: str = "global_local",
    starts: StartsConfig = StartsConfig(),
    delta_spec=1.0,
    rescore: RescoreControl = RescoreControl(),
    refine_best_delta: bool = True,
    seed: int | None = None,
    num_cores: int = 1,
    data_echo: bool = True,
    progress=None,
) -> FitResult:
    """Estimate the self-correcting parameters from a marked pattern.

    `delta_spec` is a scalar or a list of candidate mapping exponents; a
    list triggers independent fits with the best objective winning and,
    when `refine_best_delta` and the schedule has several levels, local
    refinement of the winner on the remaining levels. The explicit `seed`
    overrides `starts.seed`.
    """
    if strategy not in STRATEGIES:
        raise InvalidInputError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    win = pattern.window
    ub = schedule.upper_bounds
    if abs(win.x_max - ub[1]) > 1e-6 * max(1.0, abs(ub[1])) or abs(
        win.y_max - ub[2]
    ) > 1e-6 * max(1.0, abs(ub[2])):
        raise InvalidInputError(
            f"schedule spatial upper bounds {ub[1:]} do not match the window "
            f"upper corner ({win.x_max}, {win.y_max})"
        )
    base_seed = int(seed) if seed is not None else int(starts.seed)
    deltas = [float(d) for d in np.atleast_1d(np.asarray(delta_spec, dtype=float))]
    t_start = time.perf_counter()

    levels = schedule.levels
    if strategy == "global_local":
        fit_levels = levels[:1]
    else:
        fit_levels = levels
    search_levels = fit_levels
    multi_delta = len(deltas) > 1
    if multi_delta and refine_best_delta and len(fit_levels) > 1:
        search_levels = fit_levels[:1]

    tasks = [
        (pattern, schedule, search_levels, budgets, strategy, starts, rescore,
         d, di, base_seed)
        for di, d in enumerate(deltas)
    ]
    results = parallel_map(_fit_one_delta, tasks, num_cores=num_cores)

    best_idx = int(np.argmin([r[1].value for r in results]))
    candidates, _, init, lower, upper, diagnostics = results[best_idx]
    selected_delta = deltas[best_idx]
    tp = order_by_time(pattern, selected_delta)

    remaining = fit_levels[len(search_levels):]
    if multi_delta and remaining:
        candidates = _run_levels(
            tp, remaining, schedule.upper_bounds[0], budgets, strategy, starts,
            rescore, lower, upper, init.to_array(), base_seed, best_idx,
            diagnostics, candidates=candidates, progress=progress,
            level_offset=len(search_levels),
        )

    final_level = (remaining or search_levels)[-1]
    final_objective = _make_objective(tp, final_level, schedule.upper_bounds[0])
    winner = _select_final(candidates, init, final_objective, diagnostics)

    x = np.clip(winner.x, lower, upper)
    params = ScParameters.from_array(x).canonical()
    return FitResult(
        parameters=params,
        objective=float(winner.value),
        status=winner.status,
        selected_delta=selected_delta,
        lower=lower,
        upper=upper,
        schedule=schedule,
        budgets=budgets,
        starts=starts,
        rescore=rescore,
        strategy=strategy,
        seed=base_seed,
        elapsed=time.perf_counter() - t_start,
        window=win,
        size_range=(float(pattern.size.min()), float(pattern.size.max())),
        anchor=tp.anchor,
        n_events=len(tp),
        data=pattern if data_echo else None,
    )
