"""Domain primitives: utilities, structures, and the attention cost."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linecall.core import (
    AGGREGATE_TOL,
    Action,
    AttentionCost,
    InformationStructure,
    Posterior,
    Prior,
    State,
    UtilityEnvironment,
    gross_utility,
    shannon_cost,
    validate_information_structure,
)


def two_point(mu, x, y):
    w = (mu - y) / (x - y)
    return InformationStructure(Prior(mu), ((Posterior(x), w), (Posterior(y), 1 - w)))


def independent_mutual_information(structure):
    """Plain I(state; posterior) in nats, computed from first principles."""
    mu = structure.prior.p_in
    joint = []
    for gamma, w in structure.posteriors:
        joint.append((w * gamma.p_in, w * gamma.p_out))
    mi = 0.0
    for (j_in, j_out), (gamma, w) in zip(joint, structure.posteriors):
        for j, marg_state in ((j_in, mu), (j_out, 1 - mu)):
            if j > 0:
                mi += j * math.log(j / (w * marg_state))
    return mi


class TestUtilityEnvironment:
    def test_correct_calls_pay_one(self):
        env = UtilityEnvironment(0.4, 0.4, -1.5, -0.5)
        assert gross_utility(env, Action.CALL_IN, State.IN) == 1.0
        assert gross_utility(env, Action.CALL_OUT, State.OUT) == 1.0

    def test_incorrect_calls_pay_challenge_weighted_penalty(self):
        env = UtilityEnvironment(0.4, 0.3, -1.5, -0.5)
        # calling out on an in ball: eta_in * (1 + c_in)
        assert gross_utility(env, Action.CALL_OUT, State.IN) == pytest.approx(0.4 * (1 - 1.5))
        # calling in on an out ball: eta_out * (1 + c_out)
        assert gross_utility(env, Action.CALL_IN, State.OUT) == pytest.approx(0.3 * (1 - 0.5))

    def test_no_challenge_regime_zeroes_incorrect_payoffs(self):
        env = UtilityEnvironment(0.0, 0.0, 0.0, 0.0)
        assert not env.has_challenges
        assert gross_utility(env, Action.CALL_OUT, State.IN) == 0.0
        assert gross_utility(env, Action.CALL_IN, State.OUT) == 0.0

    def test_probability_validation(self):
        with pytest.raises(ValueError):
            UtilityEnvironment(1.4, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            UtilityEnvironment(-0.1, 0.0, 0.0, 0.0)


class TestProbabilityTypes:
    @pytest.mark.parametrize("bad", [-0.01, 1.01, float("nan")])
    def test_prior_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            Prior(bad)

    def test_posterior_complement(self):
        assert Posterior(0.3).p_out == pytest.approx(0.7)

    def test_attention_cost_positive(self):
        with pytest.raises(ValueError):
            AttentionCost(0.0, 1.0)
        with pytest.raises(ValueError):
            AttentionCost(1.0, -2.0)


class TestInformationStructure:
    def test_uninformative_is_valid(self):
        s = InformationStructure.uninformative(Prior(0.3))
        diag = validate_information_structure(s)
        assert diag["max_abs_residual"] <= AGGREGATE_TOL

    def test_bayes_consistency_detects_broken_structure(self):
        s = InformationStructure(
            Prior(0.5), ((Posterior(0.9), 0.5), (Posterior(0.4), 0.5))
        )
        with pytest.raises(ValueError):
            s.require_valid()

    def test_conditional_weights_sum_to_one(self):
        s = two_point(0.55, 0.8, 0.3)
        for state in (State.IN, State.OUT):
            assert sum(s.conditional_weights(state)) == pytest.approx(1.0)

    def test_json_round_trip(self):
        s = two_point(0.516, 0.73091162303213483, 0.40113280367640621)
        back = InformationStructure.from_json(s.to_json())
        assert back.prior.p_in == pytest.approx(s.prior.p_in, abs=1e-12)
        for (g1, w1), (g2, w2) in zip(s.posteriors, back.posteriors):
            assert g2.p_in == pytest.approx(g1.p_in, abs=1e-12)
            assert w2 == pytest.approx(w1, abs=1e-12)


class TestShannonCost:
    def test_zero_on_uninformative(self):
        cost = AttentionCost(2.0, 1.0)
        s = InformationStructure.uninformative(Prior(0.37))
        assert shannon_cost(s, cost) == pytest.approx(0.0, abs=1e-15)

    def test_full_information_uniform_prior_is_kappa_ln2(self):
        kappa = 1.7
        s = InformationStructure(
            Prior(0.5), ((Posterior(1.0), 0.5), (Posterior(0.0), 0.5))
        )
        assert shannon_cost(s, AttentionCost(kappa, kappa)) == pytest.approx(
            kappa * math.log(2), abs=1e-12
        )

    def test_matches_independent_mutual_information(self):
        rng = np.random.default_rng(123)
        kappa = 0.9
        for _ in range(200):
            mu = rng.uniform(0.05, 0.95)
            x = rng.uniform(mu, 1.0)
            y = rng.uniform(0.0, mu)
            if x - y < 1e-6:
                continue
            s = two_point(mu, x, y)
            expected = kappa * independent_mutual_information(s)
            assert shannon_cost(s, AttentionCost(kappa, kappa)) == pytest.approx(
                expected, abs=1e-12
            )

    def test_linear_in_per_state_weights(self):
        s = two_point(0.4, 0.7, 0.2)
        base_in = shannon_cost(s, AttentionCost(1.0, 1e-9))
        base_out = shannon_cost(s, AttentionCost(1e-9, 1.0))
        combined = shannon_cost(s, AttentionCost(2.5, 0.5))
        assert combined == pytest.approx(2.5 * base_in + 0.5 * base_out, abs=1e-7)

    @given(
        mu=st.floats(0.05, 0.95),
        x_frac=st.floats(0.01, 0.99),
        y_frac=st.floats(0.01, 0.99),
        kappa=st.floats(0.1, 5.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_nonnegative_and_bounded_by_full_information(self, mu, x_frac, y_frac, kappa):
        x = mu + x_frac * (1 - mu)
        y = mu * (1 - y_frac)
        if x - y < 1e-9:
            return
        s = two_point(mu, x, y)
        cost = AttentionCost(kappa, kappa)
        c = shannon_cost(s, cost)
        full = InformationStructure(
            Prior(mu), ((Posterior(1.0), mu), (Posterior(0.0), 1 - mu))
        )
        assert c >= -1e-12
        assert c <= shannon_cost(full, cost) + 1e-10
