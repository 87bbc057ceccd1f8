"""Decision-theoretic primitives for the binary line-call problem.

States: the ball is In or Out. Actions: call In or call Out. An incorrect
call may be challenged and overturned by the review system, in which case
the umpire receives the normalized correction payoff 1 plus a (weakly
negative) oversight penalty. Attention is priced by a state-asymmetric
Shannon mutual-information cost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

SIMPLEX_TOL = 1e-12       # on construction of a single probability vector
AGGREGATE_TOL = 1e-10     # on weight sums and Bayes-plausibility checks


class State(Enum):
    IN = "in"
    OUT = "out"


class Action(Enum):
    CALL_IN = "call_in"
    CALL_OUT = "call_out"


STATES = (State.IN, State.OUT)
ACTIONS = (Action.CALL_IN, Action.CALL_OUT)


def _check_prob(p: float, name: str) -> None:
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class UtilityEnvironment:
    """Challenge-augmented payoff environment.

    ``eta_in`` / ``eta_out`` are the probabilities that an incorrect call is
    challenged (and overturned) when the ball is in / out. ``c_in`` /
    ``c_out`` are the oversight penalties incurred on an overturned call,
    on top of the normalized correction payoff of 1. The no-oversight
    environment is eta_in = eta_out = 0.
    """

    eta_in: float = 0.0
    eta_out: float = 0.0
    c_in: float = 0.0
    c_out: float = 0.0
    correct_payoff: float = 1.0
    incorrect_unchallenged_payoff: float = 0.0

    def __post_init__(self):
        _check_prob(self.eta_in, "eta_in")
        _check_prob(self.eta_out, "eta_out")

    @property
    def has_challenges(self) -> bool:
        return self.eta_in > 0.0 or self.eta_out > 0.0

    def diagnostics(self) -> dict:
        """Flag parameter values outside the theory's expected region."""
        flags = []
        if self.c_in > 0:
            flags.append("c_in > 0: umpire prefers being overturned to being correct")
        if self.c_out > 0:
            flags.append("c_out > 0: umpire prefers being overturned to being correct")
        return {"flags": flags}


@dataclass(frozen=True)
class Prior:
    p_in: float

    def __post_init__(self):
        _check_prob(self.p_in, "p_in")

    @property
    def p_out(self) -> float:
        return 1.0 - self.p_in

    def prob(self, w: State) -> float:
        return self.p_in if w is State.IN else self.p_out


@dataclass(frozen=True)
class Posterior:
    p_in: float

    def __post_init__(self):
        _check_prob(self.p_in, "p_in")

    @property
    def p_out(self) -> float:
        return 1.0 - self.p_in

    def prob(self, w: State) -> float:
        return self.p_in if w is State.IN else self.p_out


@dataclass(frozen=True)
class AttentionCost:
    """State-asymmetric marginal costs of Shannon information."""

    kappa_in: float
    kappa_out: float

    def __post_init__(self):
        if not (self.kappa_in > 0 and math.isfinite(self.kappa_in)):
            raise ValueError(f"kappa_in must be strictly positive and finite, got {self.kappa_in}")
        if not (self.kappa_out > 0 and math.isfinite(self.kappa_out)):
            raise ValueError(f"kappa_out must be strictly positive and finite, got {self.kappa_out}")


@dataclass(frozen=True)
class InformationStructure:
    """A prior together with a finite-support distribution over posteriors.

    ``posteriors`` pairs each supported posterior with its unconditional
    weight. Construction does not enforce Bayes plausibility; use
    :func:`validate_information_structure` (diagnostic) or
    ``require_valid`` (raising) for that.
    """

    prior: Prior
    posteriors: tuple[tuple[Posterior, float], ...]

    def __post_init__(self):
        if len(self.posteriors) < 1:
            raise ValueError("support size must be >= 1")
        object.__setattr__(self, "posteriors", tuple(self.posteriors))

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.posteriors)

    def conditional_weights(self, w: State) -> tuple[float, ...]:
        """pi(gamma | state) implied by Bayes rule."""
        mu = self.prior.prob(w)
        if mu == 0.0:
            return tuple(0.0 for _ in self.posteriors)
        return tuple(wt * g.prob(w) / mu for g, wt in self.posteriors)

    def require_valid(self, tol: float = AGGREGATE_TOL) -> None:
        diag = validate_information_structure(self)
        if diag["max_abs_residual"] > tol:
            raise ValueError(
                "information structure is not Bayes-consistent: "
                f"max residual {diag['max_abs_residual']:.3e}"
            )

    def to_json(self) -> str:
        def sig12(v: float) -> float:
            return float(f"{v:.12g}")

        payload = {
            "prior": {"p_in": sig12(self.prior.p_in)},
            "posteriors": [
                {"p_in": sig12(g.p_in), "weight": sig12(wt)}
                for g, wt in self.posteriors
            ],
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(text: str) -> "InformationStructure":
        payload = json.loads(text)
        return InformationStructure(
            prior=Prior(payload["prior"]["p_in"]),
            posteriors=tuple(
                (Posterior(item["p_in"]), item["weight"])
                for item in payload["posteriors"]
            ),
        )

    @staticmethod
    def uninformative(prior: Prior) -> "InformationStructure":
        return InformationStructure(prior, ((Posterior(prior.p_in), 1.0),))


def gross_utility(env: UtilityEnvironment, a: Action, w: State) -> float:
    """Expected payoff of action ``a`` in state ``w`` before attention costs.

    Correct calls pay the normalized 1. An incorrect call pays 0 unless
    challenged, so its expected value is eta * (1 + c) for the relevant state.
    """
    if a is Action.CALL_IN and w is State.IN:
        return env.correct_payoff
    if a is Action.CALL_OUT and w is State.OUT:
        return env.correct_payoff
    if a is Action.CALL_IN and w is State.OUT:
        return env.eta_out * (env.correct_payoff + env.c_out) + (1 - env.eta_out) * env.incorrect_unchallenged_payoff
    return env.eta_in * (env.correct_payoff + env.c_in) + (1 - env.eta_in) * env.incorrect_unchallenged_payoff


def _xlogx(p: float) -> float:
    # entropy convention: 0 * ln 0 = 0
    return p * math.log(p) if p > 0.0 else 0.0


def shannon_cost(structure: InformationStructure, cost: AttentionCost) -> float:
    """State-asymmetric Shannon cost of an information structure.

    Sums, for each state, the weight-averaged posterior p*ln(p) term minus
    the prior term, scaled by that state's marginal cost. With equal
    marginal costs this is kappa times the mutual information between
    states and posteriors, hence non-negative.
    """
    structure.require_valid()
    in_term = sum(wt * _xlogx(g.p_in) for g, wt in structure.posteriors)
    in_term -= _xlogx(structure.prior.p_in)
    out_term = sum(wt * _xlogx(g.p_out) for g, wt in structure.posteriors)
    out_term -= _xlogx(structure.prior.p_out)
    return cost.kappa_in * in_term + cost.kappa_out * out_term


def validate_information_structure(structure: InformationStructure) -> dict:
    """Diagnostic report on Bayes consistency; never raises."""
    weights = structure.weights
    weight_sum_residual = abs(sum(weights) - 1.0)
    bayes_in = sum(wt * g.p_in for g, wt in structure.posteriors)
    bayes_residual_p_in = bayes_in - structure.prior.p_in
    simplex_violations = []
    for i, (g, wt) in enumerate(structure.posteriors):
        excess = max(0.0, -wt) + max(0.0, wt - 1.0)
        if excess > 0:
            simplex_violations.append({"index": i, "weight_excess": excess})
    cond_violation = 0.0
    for w in STATES:
        for cw in structure.conditional_weights(w):
            cond_violation = max(cond_violation, -cw, cw - 1.0, 0.0)
    max_abs = max(weight_sum_residual, abs(bayes_residual_p_in), cond_violation)
    return {
        "weight_sum_residual": weight_sum_residual,
        "bayes_residual_p_in": bayes_residual_p_in,
        "conditional_weight_violation": cond_violation,
        "simplex_violations": simplex_violations,
        "max_abs_residual": max_abs,
    }
