"""Two-stage structural estimation of attention costs and penalties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linecall.core import AttentionCost, Prior, UtilityEnvironment
from linecall.errors import NumericalError
from linecall.estimation import (
    EstimationConvention,
    RevealedPosteriors,
    estimate_kappa,
    estimate_penalties,
    penalty_from_log_gap,
    revealed_posteriors,
    two_stage_pipeline,
)
from linecall.revealed import ChoiceData, Regime
from linecall.solver import choice_data_for_env, solve_optimal_structure

TABLE = EstimationConvention.TABLE_REPRODUCTION
PRINTED = EstimationConvention.AS_PRINTED


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


class TestRevealedPosteriors:
    def test_conditioning_on_actions(self):
        cd = ChoiceData(np.array([[0.45, 0.10], [0.05, 0.40]]), Regime.NO_CHALLENGES)
        rp = revealed_posteriors(cd)
        assert rp.gamma_in_given_call_in == pytest.approx(0.45 / 0.55)
        assert rp.gamma_out_given_call_out == pytest.approx(0.40 / 0.45)
        assert not rp.boundary

    def test_degenerate_action_marginal_raises(self):
        cd = ChoiceData(np.array([[0.6, 0.4], [0.0, 0.0]]), Regime.NO_CHALLENGES)
        with pytest.raises(NumericalError):
            revealed_posteriors(cd)

    def test_boundary_flag(self):
        cd = ChoiceData(np.array([[0.5, 0.0], [0.1, 0.4]]), Regime.NO_CHALLENGES)
        assert revealed_posteriors(cd).boundary


class TestStageOne:
    def test_published_near_line_costs(self):
        kappa = estimate_kappa(RevealedPosteriors(0.599, 0.751), TABLE)
        assert kappa.kappa_in == pytest.approx(2.492, abs=0.005)
        assert kappa.kappa_out == pytest.approx(0.906, abs=0.005)

    def test_published_mid_range_costs(self):
        kappa = estimate_kappa(RevealedPosteriors(0.912, 0.913), TABLE)
        assert kappa.kappa_in == pytest.approx(0.428, abs=0.005)
        assert kappa.kappa_out == pytest.approx(0.425, abs=0.005)

    def test_conventions_differ_off_diagonal(self):
        rp = RevealedPosteriors(0.599, 0.751)
        k_table = estimate_kappa(rp, TABLE)
        k_printed = estimate_kappa(rp, PRINTED)
        assert abs(k_table.kappa_in - k_printed.kappa_in) > 0.1

    def test_uninformative_posteriors_rejected(self):
        with pytest.raises(NumericalError):
            estimate_kappa(RevealedPosteriors(0.5, 0.5), TABLE)
        with pytest.raises(NumericalError):
            estimate_kappa(RevealedPosteriors(0.3, 0.4), TABLE)

    def test_boundary_posteriors_rejected(self):
        with pytest.raises(NumericalError):
            estimate_kappa(RevealedPosteriors(1.0, 0.9), TABLE)


class TestStageTwo:
    def test_published_near_line_penalties(self):
        kappa = AttentionCost(2.492, 0.906)
        rp = RevealedPosteriors(sigmoid(0.573147), sigmoid(0.691037))
        pen = estimate_penalties(rp, kappa, 0.427, 0.410, TABLE)
        assert pen.c_in == pytest.approx(-2.003, abs=0.005)
        assert pen.c_out == pytest.approx(-0.088, abs=0.005)

    def test_published_mid_range_penalties(self):
        kappa = AttentionCost(0.428, 0.425)
        rp = RevealedPosteriors(
            sigmoid(2.713605140186916), sigmoid(2.4311976470588235)
        )
        pen = estimate_penalties(rp, kappa, 0.479, 0.421, TABLE)
        assert pen.c_in == pytest.approx(-1.337, abs=0.005)
        assert pen.c_out == pytest.approx(-1.079, abs=0.005)

    def test_positive_penalty_is_flagged(self):
        pen = estimate_penalties(
            RevealedPosteriors(0.55, 0.55), AttentionCost(0.5, 0.5), 0.4, 0.4, TABLE
        )
        assert any("c_in" in f or "c_out" in f for f in pen.flags) or (
            pen.c_in <= 0 and pen.c_out <= 0
        )

    def test_standard_errors_shrink_with_sample_size(self):
        kappa = AttentionCost(2.492, 0.906)
        rp = RevealedPosteriors(0.64, 0.66)
        small = estimate_penalties(rp, kappa, 0.427, 0.410, TABLE, n_obs=100)
        large = estimate_penalties(rp, kappa, 0.427, 0.410, TABLE, n_obs=10000)
        assert small.se_c_in > large.se_c_in > 0
        assert small.se_c_out > large.se_c_out > 0

    @given(
        kappa=st.floats(0.2, 4.0),
        eta=st.floats(0.05, 0.9),
        c=st.floats(-3.0, 0.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_penalty_inversion_round_trip(self, kappa, eta, c):
        # forward map: gap = (1 - eta * (1 + c)) / kappa
        gap = (1.0 - eta * (1.0 + c)) / kappa
        assert penalty_from_log_gap(kappa, eta, gap) == pytest.approx(c, abs=1e-9)

    def test_eta_out_of_range_rejected(self):
        with pytest.raises(NumericalError):
            penalty_from_log_gap(1.0, 0.0, 0.5)


class TestTwoStagePipeline:
    def test_regime_enforcement(self):
        cd = ChoiceData(np.array([[0.45, 0.10], [0.05, 0.40]]), Regime.NO_CHALLENGES)
        with pytest.raises(NumericalError):
            two_stage_pipeline(cd, cd, 0.4, 0.4)

    def test_exact_recovery_from_model_choice_data(self):
        """On exact model data, the printed convention inverts the model."""
        kappa_true = AttentionCost(2.0, 1.0)
        c_in, c_out = -1.5, -0.5
        eta_in, eta_out = 0.4, 0.4
        prior = Prior(0.55)
        env_pre = UtilityEnvironment()
        env_post = UtilityEnvironment(eta_in, eta_out, c_in, c_out)
        pre = choice_data_for_env(
            solve_optimal_structure(env_pre, kappa_true, prior), env_pre
        )
        post = choice_data_for_env(
            solve_optimal_structure(env_post, kappa_true, prior), env_post
        )
        kappa, pen, report = two_stage_pipeline(pre, post, eta_in, eta_out, PRINTED)
        assert kappa.kappa_in == pytest.approx(2.0, abs=1e-10)
        assert kappa.kappa_out == pytest.approx(1.0, abs=1e-10)
        assert pen.c_in == pytest.approx(c_in, abs=1e-10)
        assert pen.c_out == pytest.approx(c_out, abs=1e-10)
        assert report["convention"] == "printed"
        assert report["stage1"]["kappa_in"] == kappa.kappa_in
        assert report["stage2"]["c_out"] == pen.c_out
