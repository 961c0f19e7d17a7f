import numpy as np
import pytest

from scmpp.errors import DegenerateObjectiveError, InvalidInputError
from scmpp.optimize import (
    FTOL_REACHED,
    BudgetSpec,
    minimize_global,
    minimize_local,
)

D = 8
LO = np.full(D, -5.0)
HI = np.full(D, 5.0)


def sphere(x):
    return float(np.sum(x * x))


class TestMinimizeGlobal:
    def test_sphere_reaches_near_zero(self):
        budget = BudgetSpec(maxeval=5000, ftol_rel=1e-12, xtol_rel=1e-12)
        res = minimize_global(sphere, LO, HI, budget, seed=1)
        assert res.value < 1e-2

    @pytest.mark.parametrize("seed", [2, 3, 4])
    def test_sphere_multiple_seeds(self, seed):
        budget = BudgetSpec(maxeval=5000, ftol_rel=1e-12, xtol_rel=1e-12)
        res = minimize_global(sphere, LO, HI, budget, seed=seed)
        assert res.value < 1e-2

    def test_constant_objective_ftol(self):
        budget = BudgetSpec(maxeval=2000, ftol_rel=1e-6, xtol_rel=1e-12)
        res = minimize_global(lambda x: 3.25, LO, HI, budget, seed=5)
        assert res.status == FTOL_REACHED
        assert res.value == 3.25
        assert ((res.x >= LO) & (res.x <= HI)).all()

    def test_elitism_never_worse_than_initial_best(self):
        calls = []

        def noisy(x):
            v = sphere(x) + 10 * np.sin(5 * x).sum()
            calls.append(v)
            return v

        budget = BudgetSpec(maxeval=400, ftol_rel=1e-15, xtol_rel=1e-15)
        res = minimize_global(noisy, LO, HI, budget, seed=7)
        initial_best = min(calls[: 10 * (D + 1)])
        assert res.value <= initial_best

    def test_result_within_bounds(self):
        budget = BudgetSpec(maxeval=1500, ftol_rel=1e-10, xtol_rel=1e-12)
        shifted = lambda x: sphere(x - 4.9)  # optimum close to the upper corner
        res = minimize_global(shifted, LO, HI, budget, seed=11)
        assert ((res.x >= LO) & (res.x <= HI)).all()

    def test_mostly_nonfinite_objective_raises(self):
        def bad(x):
            return np.nan if x[0] > -4.0 else sphere(x)

        budget = BudgetSpec(maxeval=500, ftol_rel=1e-8, xtol_rel=1e-12)
        with pytest.raises(DegenerateObjectiveError):
            minimize_global(bad, LO, HI, budget, seed=13)

    def test_infinite_bounds_rejected(self):
        budget = BudgetSpec(maxeval=100, ftol_rel=1e-8, xtol_rel=1e-8)
        lo = LO.copy()
        lo[0] = -np.inf
        with pytest.raises(InvalidInputError):
            minimize_global(sphere, lo, HI, budget, seed=1)

    def test_deterministic_given_seed(self):
        budget = BudgetSpec(maxeval=800, ftol_rel=1e-12, xtol_rel=1e-12)
        r1 = minimize_global(sphere, LO, HI, budget, seed=42)
        r2 = minimize_global(sphere, LO, HI, budget, seed=42)
        assert (r1.x == r2.x).all() and r1.value == r2.value and r1.evals == r2.evals


class TestMinimizeLocal:
    def test_quadratic_interior_minimum(self):
        target = np.linspace(-2, 2, D)
        obj = lambda x: float(np.sum((x - target) ** 2))
        budget = BudgetSpec(maxeval=20000, ftol_rel=1e-14, xtol_rel=1e-12)
        res = minimize_local(obj, np.zeros(D), LO, HI, budget)
        assert np.abs(res.x - target).max() < 1e-6

    def test_minimum_on_bound_face(self):
        # 1-d constrained quadratic: unconstrained argmin at 7, box caps at 5
        obj = lambda x: float((x[0] - 7.0) ** 2) + float(np.sum(x[1:] ** 2))
        budget = BudgetSpec(maxeval=20000, ftol_rel=1e-14, xtol_rel=1e-14)
        res = minimize_local(obj, np.zeros(D), LO, HI, budget)
        assert res.x[0] == pytest.approx(5.0, abs=1e-6)
        assert res.value == pytest.approx(4.0, abs=1e-6)

    def test_start_at_optimum_quick_ftol(self):
        center = np.full(D, 0.5)
        obj = lambda x: 1.0 + float(np.sum((x - center) ** 2))
        budget = BudgetSpec(maxeval=20000, ftol_rel=1e-3, xtol_rel=1e-12)
        res = minimize_local(obj, center, np.zeros(D), np.ones(D), budget)
        assert res.status == FTOL_REACHED
        assert res.iterations <= D + 2
        assert res.value == 1.0
        assert (res.x == center).all()

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(3)
        obj = lambda x: float(np.sum(np.abs(x)) + 3 * np.cos(x[0]))
        start = rng.uniform(-5, 5, D)
        budget = BudgetSpec(maxeval=300, ftol_rel=1e-10, xtol_rel=1e-10)
        res = minimize_local(obj, start, LO, HI, budget)
        assert res.value <= obj(start)

    def test_nonfinite_start_rejected(self):
        obj = lambda x: np.inf
        budget = BudgetSpec(maxeval=100, ftol_rel=1e-8, xtol_rel=1e-8)
        with pytest.raises(InvalidInputError):
            minimize_local(obj, np.zeros(D), LO, HI, budget)

    def test_iterates_stay_in_bounds(self):
        seen = []

        def obj(x):
            seen.append(x.copy())
            return sphere(x - 3.0)

        budget = BudgetSpec(maxeval=2000, ftol_rel=1e-12, xtol_rel=1e-12)
        minimize_local(obj, np.full(D, 4.0), LO, HI, budget)
        pts = np.array(seen)
        assert (pts >= LO - 1e-12).all() and (pts <= HI + 1e-12).all()


class TestBudgetSpec:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            BudgetSpec(0, 1e-6, 1e-6)
        with pytest.raises(InvalidInputError):
            BudgetSpec(10, 0.0, 1e-6)
