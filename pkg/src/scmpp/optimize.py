"""Derivative-free bound-constrained minimizers.

Global stage: controlled random search with the local-mutation variant
(population 10(d+1), best-anchored reflection simplex). Local stage:
Nelder-Mead with box feasibility enforced by coordinate projection.
Both treat non-finite objective values as +inf after initialization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateObjectiveError, InvalidInputError
from .utils import derive_rng

FTOL_REACHED = "ftol_reached"
XTOL_REACHED = "xtol_reached"
MAXEVAL_REACHED = "maxeval_reached"
FAILED = "failed"


@dataclass(frozen=True)
class BudgetSpec:
    maxeval: int
    ftol_rel: float
    xtol_rel: float

    def __post_init__(self):
        if self.maxeval < 1:
            raise InvalidInputError("maxeval must be >= 1")
        if self.ftol_rel <= 0 or self.xtol_rel <= 0:
            raise InvalidInputError("tolerances must be positive")


@dataclass
class OptimizeResult:
    x: np.ndarray
    value: float
    evals: int
    status: str
    iterations: int = 0


def _safe_eval(objective, x):
    v = objective(x)
    v = float(v)
    return v if np.isfinite(v) else np.inf


def _ftol_converged(f_best, f_worst, ftol_rel):
    if not np.isfinite(f_worst):
        return False
    return (f_worst - f_best) <= ftol_rel * max(abs(f_best), abs(f_worst), 1e-12)


def minimize_global(objective, lower, upper, budget: BudgetSpec, seed) -> OptimizeResult:
    """Controlled random search with local mutation over a finite box.

    The population is seeded uniformly; each iteration reflects a random
    simplex member through the centroid of the best-anchored remainder and,
    when the reflection fails, tries a coordinate-wise mutation between the
    best point and the failed trial. Only the worst member is ever replaced,
    so the best value is monotone.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    if upper.shape != lower.shape or not np.isfinite(lower).all() or not np.isfinite(upper).all():
        raise InvalidInputError("global stage needs finite bounds on every coordinate")
    if (upper <= lower).any():
        raise InvalidInputError("upper bounds must exceed lower bounds")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(int(seed))

    n_pop = 10 * (d + 1)
    pop = lower + rng.uniform(size=(n_pop, d)) * (upper - lower)
    fvals = np.empty(n_pop)
    n_bad = 0
    for i in range(n_pop):
        v = objective(pop[i])
        if not np.isfinite(v):
            n_bad += 1
            fvals[i] = np.inf
        else:
            fvals[i] = v
    if n_bad > n_pop // 2:
        raise DegenerateObjectiveError(
            f"objective non-finite at {n_bad}/{n_pop} initial population points"
        )
    evals = n_pop
    iterations = 0
    status = MAXEVAL_REACHED
    while True:
        b = int(np.argmin(fvals))
        w = int(np.argmax(fvals))
        if _ftol_converged(fvals[b], fvals[w], budget.ftol_rel):
            status = FTOL_REACHED
            break
        spread = pop.max(axis=0) - pop.min(axis=0)
        if (spread <= budget.xtol_rel * (upper - lower)).all():
            status = XTOL_REACHED
            break
        if evals >= budget.maxeval:
            status = MAXEVAL_REACHED
            break
        iterations += 1
        # simplex: best point plus d distinct random others; reflect the last
        others = rng.choice(n_pop - 1, size=d, replace=False)
        others = np.where(others >= b, others + 1, others)
        simplex = np.concatenate([[b], others])
        centroid = pop[simplex[:d]].mean(axis=0)
        trial = 2.0 * centroid - pop[simplex[d]]
        replaced = False
        if ((trial >= lower) & (trial <= upper)).all():
            ft = _safe_eval(objective, trial)
            evals += 1
            if ft < fvals[w]:
                pop[w] = trial
                fvals[w] = ft
                replaced = True
        if not replaced and evals < budget.maxeval:
            omega = rng.uniform(size=d)
            mutant = np.clip((1.0 + omega) * pop[b] - omega * trial, lower, upper)
            fm = _safe_eval(objective, mutant)
            evals += 1
            if fm < fvals[w]:
                pop[w] = mutant
                fvals[w] = fm
    b = int(np.argmin(fvals))
    if not np.isfinite(fvals[b]):
        return OptimizeResult(pop[b].copy(), np.inf, evals, FAILED, iterations)
    return OptimizeResult(pop[b].copy(), float(fvals[b]), evals, status, iterations)


def minimize_local(objective, start, lower, upper, budget: BudgetSpec) -> OptimizeResult:
    """Projected Nelder-Mead simplex descent inside a box.

    Reflection/expansion/contraction/shrink with standard coefficients;
    every trial point is clipped to the box before evaluation. The returned
    value never exceeds the objective at the start point.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    start = np.clip(np.asarray(start, dtype=float), lower, upper)
    d = start.size
    f_start = objective(start)
    if not np.isfinite(f_start):
        raise InvalidInputError("objective non-finite at the start point")
    evals = 1

    span = np.where(np.isfinite(upper - lower), upper - lower, 1.0)
    step = 0.05 * span
    step[step == 0.0] = 1e-8
    simplex = np.tile(start, (d + 1, 1))
    for i in range(d):
        cand = start[i] + step[i]
        simplex[i + 1, i] = cand if cand <= upper[i] else start[i] - step[i]
        simplex[i + 1] = np.clip(simplex[i + 1], lower, upper)
    fvals = np.empty(d + 1)
    fvals[0] = f_start
    for i in range(1, d + 1):
        fvals[i] = _safe_eval(objective, simplex[i])
        evals += 1

    rho, chi, gam, sig = 1.0, 2.0, 0.5, 0.5
    iterations = 0
    status = MAXEVAL_REACHED
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        if _ftol_converged(fvals[0], fvals[-1], budget.ftol_rel):
            status = FTOL_REACHED
            break
        extent = np.abs(simplex[1:] - simplex[0]).max(axis=0)
        if (extent <= budget.xtol_rel * span).all():
            status = XTOL_REACHED
            break
        if evals >= budget.maxeval:
            status = MAXEVAL_REACHED
            break
        iterations += 1
        centroid = simplex[:-1].mean(axis=0)

        def _try(point):
            nonlocal evals
            p = np.clip(point, lower, upper)
            v = _safe_eval(objective, p)
            evals += 1
            return p, v

        xr, fr = _try(centroid + rho * (centroid - simplex[-1]))
        if fr < fvals[0]:
            xe, fe = _try(centroid + chi * (xr - centroid))
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc, fc = _try(centroid + gam * (xr - centroid))
                better, fb = (xc, fc) if fc <= fr else (xr, fr)
            else:
                better, fb = _try(centroid - gam * (centroid - simplex[-1]))
            if fb < fvals[-1]:
                simplex[-1], fvals[-1] = better, fb
            else:
                for i in range(1, d + 1):
                    simplex[i] = simplex[0] + sig * (simplex[i] - simplex[0])
                    fvals[i] = _safe_eval(objective, simplex[i])
                    evals += 1
    best = int(np.argmin(fvals))
    return OptimizeResult(simplex[best].copy(), float(fvals[best]), evals, status, iterations)
