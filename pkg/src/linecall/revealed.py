"""Revealed-preference rationality checks and penalty bounds.

Works on state-dependent stochastic choice data: the joint distribution of
calls and true states. The no-improving-action-switches (NIAS) condition
tests Bayesian expected-utility rationality; with challenges active it
yields half-plane bounds on the oversight penalty for in-balls in terms of
the penalty for out-balls. The no-improving-attention-cycles (NIAC)
condition across a no-challenge and a challenge problem adds one more
half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Action, State, UtilityEnvironment, gross_utility
from .errors import NumericalError

NIAS_SLACK_TOL = 1e-10


class Regime(Enum):
    NO_CHALLENGES = "no_challenges"
    CHALLENGES = "challenges"


class BoundDirection(Enum):
    UPPER = "upper_bound_on_c_in"
    LOWER = "lower_bound_on_c_in"


class BoundSource(Enum):
    NIAS_IN_SWITCH = "nias_in_switch"    # wholesale switch away from calling in
    NIAS_OUT_SWITCH = "nias_out_switch"  # wholesale switch away from calling out
    NIAC = "niac"


@dataclass(frozen=True)
class ChoiceData:
    """Joint probabilities P(action, state) as a 2x2 matrix.

    Row order (CALL_IN, CALL_OUT), column order (IN, OUT). ``n_obs`` holds
    per-cell counts when the data come from a finite sample.
    """

    joint: np.ndarray
    regime: Regime
    n_obs: np.ndarray | None = None

    def __post_init__(self):
        j = np.asarray(self.joint, dtype=float)
        if j.shape != (2, 2):
            raise ValueError(f"joint must be 2x2, got shape {j.shape}")
        if (j < -1e-15).any():
            raise ValueError("joint probabilities must be non-negative")
        if abs(j.sum() - 1.0) > 1e-10:
            raise ValueError(f"joint probabilities must sum to 1, got {j.sum()}")
        object.__setattr__(self, "joint", j)
        if self.n_obs is not None:
            object.__setattr__(self, "n_obs", np.asarray(self.n_obs, dtype=float))

    def prob(self, a: Action, w: State) -> float:
        i = 0 if a is Action.CALL_IN else 1
        k = 0 if w is State.IN else 1
        return float(self.joint[i, k])

    @property
    def p_call_in(self) -> float:
        return float(self.joint[0].sum())

    @property
    def p_state_in(self) -> float:
        return float(self.joint[:, 0].sum())

    @staticmethod
    def from_counts(counts: np.ndarray, regime: Regime) -> "ChoiceData":
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise ValueError("counts must sum to a positive total")
        return ChoiceData(counts / total, regime, n_obs=counts)


@dataclass(frozen=True)
class PenaltyBound:
    """The half-plane  c_in  <=/>=  intercept + slope * c_out."""

    intercept: float
    slope: float
    direction: BoundDirection
    source: BoundSource

    def evaluate(self, c_out: float) -> float:
        return self.intercept + self.slope * c_out

    def satisfied_by(self, c_in: float, c_out: float, tol: float = 1e-10) -> bool:
        line = self.evaluate(c_out)
        if self.direction is BoundDirection.UPPER:
            return c_in <= line + tol
        return c_in >= line - tol


def nias_check(data: ChoiceData, env: UtilityEnvironment, tol: float = NIAS_SLACK_TOL) -> dict:
    """Evaluate both no-improving-action-switch inequalities.

    Slack is (value of keeping the action) minus (value of the wholesale
    switch), per observed joint cell. With eta = 0 the two inequalities
    reduce to P(in,in) >= P(in,out) and P(out,out) >= P(out,in).
    """
    u = {(a, w): gross_utility(env, a, w) for a in Action for w in State}
    # switch everything called in to out
    slack_in = sum(
        data.prob(Action.CALL_IN, w) * (u[(Action.CALL_IN, w)] - u[(Action.CALL_OUT, w)])
        for w in State
    )
    # switch everything called out to in
    slack_out = sum(
        data.prob(Action.CALL_OUT, w) * (u[(Action.CALL_OUT, w)] - u[(Action.CALL_IN, w)])
        for w in State
    )
    result = {
        "slack_in_switch": slack_in,
        "slack_out_switch": slack_out,
        "passed": slack_in >= -tol and slack_out >= -tol,
    }
    if data.n_obs is not None:
        n = float(data.n_obs.sum())
        if n > 0:
            # crude binomial band on each slack from cell-level sampling error
            se = math.sqrt(sum(
                p * (1 - p) / n for p in np.ravel(data.joint)
            ))
            result["sampling_se"] = se
    return result


def nias_penalty_bounds(data: ChoiceData, eta_in: float, eta_out: float) -> list[PenaltyBound]:
    """Half-plane bounds on c_in implied by NIAS under challenges.

    Requires positive challenge probability for in-balls and positive mass
    on both (call-in, in) and (call-out, in) cells, since both appear in
    denominators.
    """
    if data.regime is not Regime.CHALLENGES:
        raise NumericalError("penalty bounds require challenge-regime choice data")
    p_ii = data.prob(Action.CALL_IN, State.IN)
    p_io = data.prob(Action.CALL_IN, State.OUT)
    p_oi = data.prob(Action.CALL_OUT, State.IN)
    p_oo = data.prob(Action.CALL_OUT, State.OUT)
    if p_ii * eta_in <= 0:
        raise NumericalError("zero denominator: P(call in, in) * eta_in must be positive")
    if p_oi * eta_in <= 0:
        raise NumericalError("zero denominator: P(call out, in) * eta_in must be positive")
    upper = PenaltyBound(
        intercept=(p_ii * (1 - eta_in) - p_io * (1 - eta_out)) / (p_ii * eta_in),
        slope=(p_io * eta_out) / (p_ii * eta_in),
        direction=BoundDirection.UPPER,
        source=BoundSource.NIAS_IN_SWITCH,
    )
    lower = PenaltyBound(
        intercept=(p_oi * (1 - eta_in) - p_oo * (1 - eta_out)) / (p_oi * eta_in),
        slope=(p_oo * eta_out) / (p_oi * eta_in),
        direction=BoundDirection.LOWER,
        source=BoundSource.NIAS_OUT_SWITCH,
    )
    return [upper, lower]


def niac_bound(
    data_no_challenge: ChoiceData,
    data_challenge: ChoiceData,
    eta_in: float,
    eta_out: float,
) -> PenaltyBound:
    """The no-improving-attention-cycles half-plane across the two problems.

    Derived from swapping the two chosen information structures between the
    no-challenge and challenge environments: costs cancel in the
    two-problem cycle, leaving a linear restriction on (c_in, c_out). The
    inequality direction depends on the sign of the divisor, so it is
    resolved at runtime rather than hard-coded.
    """
    pn_oi = data_no_challenge.prob(Action.CALL_OUT, State.IN)
    pn_io = data_no_challenge.prob(Action.CALL_IN, State.OUT)
    pc_oi = data_challenge.prob(Action.CALL_OUT, State.IN)
    pc_io = data_challenge.prob(Action.CALL_IN, State.OUT)
    denom = (pn_oi - pc_oi) * eta_in
    if denom == 0.0:
        raise NumericalError(
            "degenerate attention cycle: (P_no(call out, in) - P_ch(call out, in)) * eta_in is zero"
        )
    a = (pc_io - pn_io) * eta_out  # coefficient on (1 + c_out)
    intercept = -1.0 + a / denom
    slope = a / denom
    direction = BoundDirection.UPPER if denom > 0 else BoundDirection.LOWER
    return PenaltyBound(intercept=intercept, slope=slope, direction=direction, source=BoundSource.NIAC)


def penalty_region(bounds: list[PenaltyBound], c_out_grid) -> list[dict]:
    """Intersect half-planes pointwise over a grid of c_out values.

    Returns one record per grid point with the feasible c_in interval
    (lower may be -inf, upper +inf) and an ``empty`` flag.
    """
    if not bounds:
        raise ValueError("bound list must be non-empty")
    out = []
    for c_out in c_out_grid:
        upper = math.inf
        lower = -math.inf
        for b in bounds:
            v = b.evaluate(c_out)
            if b.direction is BoundDirection.UPPER:
                upper = min(upper, v)
            else:
                lower = max(lower, v)
        out.append({
            "c_out": float(c_out),
            "c_in_lower": lower,
            "c_in_upper": upper,
            "empty": lower > upper,
        })
    return out
