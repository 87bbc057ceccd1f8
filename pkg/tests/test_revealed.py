"""Revealed-preference layer: choice data, NIAS, penalty bounds."""

import numpy as np
import pytest

from linecall.core import AttentionCost, Prior, UtilityEnvironment
from linecall.revealed import (
    BoundDirection,
    BoundSource,
    ChoiceData,
    PenaltyBound,
    Regime,
    niac_bound,
    nias_check,
    nias_penalty_bounds,
    penalty_region,
)
from linecall.solver import choice_data_for_env, solve_optimal_structure


def informative_data(regime=Regime.NO_CHALLENGES):
    return ChoiceData(np.array([[0.45, 0.10], [0.05, 0.40]]), regime)


class TestChoiceData:
    def test_shape_and_sum_validation(self):
        with pytest.raises(ValueError):
            ChoiceData(np.ones((2, 3)) / 6, Regime.NO_CHALLENGES)
        with pytest.raises(ValueError):
            ChoiceData(np.full((2, 2), 0.3), Regime.NO_CHALLENGES)
        with pytest.raises(ValueError):
            ChoiceData(np.array([[0.6, -0.1], [0.2, 0.3]]), Regime.NO_CHALLENGES)

    def test_from_counts_normalizes_and_keeps_counts(self):
        cd = ChoiceData.from_counts(np.array([[45, 10], [5, 40]]), Regime.CHALLENGES)
        assert cd.joint.sum() == pytest.approx(1.0)
        assert cd.n_obs.sum() == 100
        assert cd.p_call_in == pytest.approx(0.55)
        assert cd.p_state_in == pytest.approx(0.50)


class TestNias:
    def test_informative_data_passes_without_challenges(self):
        res = nias_check(informative_data(), UtilityEnvironment())
        assert res["passed"]
        assert res["slack_in_switch"] > 0
        assert res["slack_out_switch"] > 0

    def test_anti_correlated_data_fails(self):
        bad = ChoiceData(np.array([[0.10, 0.45], [0.40, 0.05]]), Regime.NO_CHALLENGES)
        res = nias_check(bad, UtilityEnvironment())
        assert not res["passed"]

    def test_solver_generated_data_passes_with_symmetric_costs(self):
        env = UtilityEnvironment(0.4, 0.3, -1.8, -0.6)
        sol = solve_optimal_structure(env, AttentionCost(0.8, 0.8), Prior(0.52))
        res = nias_check(choice_data_for_env(sol, env), env)
        assert res["passed"]

    def test_sampling_standard_error_reported_with_counts(self):
        cd = ChoiceData.from_counts(np.array([[45, 10], [5, 40]]), Regime.NO_CHALLENGES)
        res = nias_check(cd, UtilityEnvironment())
        assert "sampling_se" in res and res["sampling_se"] > 0


class TestPenaltyBounds:
    def test_published_bound_line_shapes(self):
        data = informative_data(Regime.CHALLENGES)
        upper, lower = nias_penalty_bounds(data, 0.427, 0.410)
        assert upper.direction is BoundDirection.UPPER
        assert lower.direction is BoundDirection.LOWER
        assert upper.source is BoundSource.NIAS_IN_SWITCH
        assert lower.source is BoundSource.NIAS_OUT_SWITCH
        assert upper.slope > 0 and lower.slope > 0

    def test_bounds_follow_printed_formulas(self):
        # upper: [P(aI,wI)(1-etaI) - P(aI,wO)(1-etaO)] / [P(aI,wI) etaI]
        #        + [P(aI,wO) etaO / (P(aI,wI) etaI)] * c_out
        data = informative_data(Regime.CHALLENGES)
        ei, eo = 0.427, 0.410
        upper, lower = nias_penalty_bounds(data, ei, eo)
        pii, pio = 0.45, 0.10
        poi, poo = 0.05, 0.40
        assert upper.intercept == pytest.approx(
            (pii * (1 - ei) - pio * (1 - eo)) / (pii * ei), abs=1e-12
        )
        assert upper.slope == pytest.approx(pio * eo / (pii * ei), abs=1e-12)
        assert lower.intercept == pytest.approx(
            (poi * (1 - ei) - poo * (1 - eo)) / (poi * ei), abs=1e-12
        )
        assert lower.slope == pytest.approx(poo * eo / (poi * ei), abs=1e-12)

    def test_true_penalties_lie_inside_bounds_for_model_data(self):
        c_in, c_out = -1.8, -0.6
        env = UtilityEnvironment(0.4, 0.3, c_in, c_out)
        sol = solve_optimal_structure(env, AttentionCost(0.8, 0.8), Prior(0.52))
        upper, lower = nias_penalty_bounds(choice_data_for_env(sol, env), 0.4, 0.3)
        assert upper.satisfied_by(c_in, c_out)
        assert lower.satisfied_by(c_in, c_out)

    def test_penalty_bound_evaluate(self):
        b = PenaltyBound(0.6207, 0.5012, BoundDirection.UPPER, BoundSource.NIAS_IN_SWITCH)
        assert b.evaluate(-1.0) == pytest.approx(0.1195, abs=1e-12)
        assert b.satisfied_by(-2.0, -1.0)
        assert not b.satisfied_by(0.5, -1.0)


class TestNiac:
    def test_cycle_bound_holds_for_model_data(self):
        c_in, c_out = -1.8, -0.6
        eta_in, eta_out = 0.4, 0.3
        cost = AttentionCost(0.8, 0.8)
        env_pre = UtilityEnvironment()
        env_post = UtilityEnvironment(eta_in, eta_out, c_in, c_out)
        pre = choice_data_for_env(solve_optimal_structure(env_pre, cost, Prior(0.52)), env_pre)
        post = choice_data_for_env(solve_optimal_structure(env_post, cost, Prior(0.52)), env_post)
        bound = niac_bound(pre, post, eta_in, eta_out)
        assert bound.source is BoundSource.NIAC
        assert bound.satisfied_by(c_in, c_out)

    def test_region_intersects_all_bounds(self):
        data = informative_data(Regime.CHALLENGES)
        bounds = nias_penalty_bounds(data, 0.427, 0.410)
        grid = np.arange(-3.0, 0.01, 0.5)
        region = penalty_region(bounds, grid)
        assert len(region) == len(grid)
        for row in region:
            assert row["empty"] == (row["c_in_lower"] > row["c_in_upper"])
