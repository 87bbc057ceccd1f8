"""Two-stage structural estimation of attention costs and oversight penalties.

Stage 1 uses no-challenge choice data: the posteriors revealed by
conditioning on each call pin down the marginal attention costs through
the ILR conditions. Stage 2 uses challenge-regime choice data plus the
observed challenge rates: with the stage-1 costs fixed, the post-period
log-odds gap identifies the oversight penalties.

Two recovery conventions are provided. ``AS_PRINTED`` takes the log gap
across the two revealed posteriors (the form the ILR conditions imply, and
the one under which solver round-trips are exact). ``TABLE_REPRODUCTION``
takes the within-posterior log odds of each call's own posterior, the rule
that reproduces the published attention-cost numbers from their companion
posteriors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import Action, AttentionCost, State
from .errors import NumericalError
from .revealed import ChoiceData, Regime


class EstimationConvention(Enum):
    AS_PRINTED = "printed"
    TABLE_REPRODUCTION = "table"


@dataclass(frozen=True)
class RevealedPosteriors:
    """P(state | action) computed from choice data.

    ``gamma_in_given_call_in`` is P(in | call in); ``gamma_out_given_call_out``
    is P(out | call out).
    """

    gamma_in_given_call_in: float
    gamma_out_given_call_out: float
    boundary: bool = False

    @property
    def gamma_in_p_in(self) -> float:
        return self.gamma_in_given_call_in

    @property
    def gamma_out_p_in(self) -> float:
        return 1.0 - self.gamma_out_given_call_out


@dataclass(frozen=True)
class PenaltyEstimate:
    c_in: float
    c_out: float
    eta_in: float
    eta_out: float
    flags: tuple[str, ...] = ()
    se_c_in: float | None = None
    se_c_out: float | None = None


def revealed_posteriors(data: ChoiceData) -> RevealedPosteriors:
    """Condition the observed joint on each action."""
    p_call_in = data.prob(Action.CALL_IN, State.IN) + data.prob(Action.CALL_IN, State.OUT)
    p_call_out = data.prob(Action.CALL_OUT, State.IN) + data.prob(Action.CALL_OUT, State.OUT)
    if p_call_in <= 0:
        raise NumericalError("zero marginal on call-in: revealed posterior undefined")
    if p_call_out <= 0:
        raise NumericalError("zero marginal on call-out: revealed posterior undefined")
    g_in = data.prob(Action.CALL_IN, State.IN) / p_call_in
    g_out = data.prob(Action.CALL_OUT, State.OUT) / p_call_out
    boundary = g_in in (0.0, 1.0) or g_out in (0.0, 1.0)
    return RevealedPosteriors(g_in, g_out, boundary=boundary)


def _log_gaps(rp: RevealedPosteriors, convention: EstimationConvention) -> tuple[float, float]:
    """Per-state log terms entering the recovery equations.

    AS_PRINTED: gap_in = ln g_in(in) - ln g_out(in), gap_out symmetric.
    TABLE_REPRODUCTION: within-posterior log odds of each call's posterior.
    """
    x = rp.gamma_in_given_call_in      # P(in | call in)
    z = rp.gamma_out_given_call_out    # P(out | call out)
    if not (0.0 < x < 1.0 and 0.0 < z < 1.0):
        raise NumericalError(
            "boundary revealed posteriors: log terms undefined "
            f"(gamma_in={x}, gamma_out={z})"
        )
    if convention is EstimationConvention.AS_PRINTED:
        gap_in = math.log(x) - math.log(1.0 - z)
        gap_out = math.log(z) - math.log(1.0 - x)
    else:
        gap_in = math.log(x) - math.log(1.0 - x)
        gap_out = math.log(z) - math.log(1.0 - z)
    return gap_in, gap_out


def estimate_kappa(rp: RevealedPosteriors, convention: EstimationConvention) -> AttentionCost:
    """Stage 1: marginal attention costs from no-challenge revealed posteriors."""
    gap_in, gap_out = _log_gaps(rp, convention)
    if gap_in <= 0 or gap_out <= 0:
        raise NumericalError(
            "non-informative posteriors: calls are uncorrelated or anti-correlated "
            f"with states (log gaps {gap_in:.4g}, {gap_out:.4g})"
        )
    return AttentionCost(kappa_in=1.0 / gap_in, kappa_out=1.0 / gap_out)


def penalty_from_log_gap(kappa: float, eta: float, gap: float) -> float:
    """Invert one ILR condition for the oversight penalty: (1 - kappa*gap)/eta - 1."""
    if not (0.0 < eta <= 1.0):
        raise NumericalError(f"eta must be in (0, 1]: penalty unidentified at eta={eta}")
    return (1.0 - kappa * gap) / eta - 1.0


def estimate_penalties(
    rp_post: RevealedPosteriors,
    kappa: AttentionCost,
    eta_in: float,
    eta_out: float,
    convention: EstimationConvention = EstimationConvention.AS_PRINTED,
    n_obs: float | None = None,
) -> PenaltyEstimate:
    """Stage 2: oversight penalties from challenge-regime revealed posteriors."""
    gap_in, gap_out = _log_gaps(rp_post, convention)
    c_in = penalty_from_log_gap(kappa.kappa_in, eta_in, gap_in)
    c_out = penalty_from_log_gap(kappa.kappa_out, eta_out, gap_out)
    flags = []
    if c_in > 0:
        flags.append("c_in > 0: outside the theory's predicted sign")
    if c_out > 0:
        flags.append("c_out > 0: outside the theory's predicted sign")
    se_c_in = se_c_out = None
    if n_obs is not None and n_obs > 0:
        # delta method on the revealed posteriors, treating stage-1 kappa and
        # eta as fixed; var(g) ~ g(1-g)/n per conditional binomial
        x = rp_post.gamma_in_given_call_in
        z = rp_post.gamma_out_given_call_out
        var_x = x * (1 - x) / n_obs
        var_z = z * (1 - z) / n_obs
        if convention is EstimationConvention.AS_PRINTED:
            d_in = (1 / x) ** 2 * var_x + (1 / (1 - z)) ** 2 * var_z
            d_out = (1 / z) ** 2 * var_z + (1 / (1 - x)) ** 2 * var_x
        else:
            d_in = (1 / (x * (1 - x))) ** 2 * var_x
            d_out = (1 / (z * (1 - z))) ** 2 * var_z
        se_c_in = kappa.kappa_in / eta_in * math.sqrt(d_in)
        se_c_out = kappa.kappa_out / eta_out * math.sqrt(d_out)
    return PenaltyEstimate(
        c_in=c_in,
        c_out=c_out,
        eta_in=eta_in,
        eta_out=eta_out,
        flags=tuple(flags),
        se_c_in=se_c_in,
        se_c_out=se_c_out,
    )


def two_stage_pipeline(
    data_pre: ChoiceData,
    data_post: ChoiceData,
    eta_in: float,
    eta_out: float,
    convention: EstimationConvention = EstimationConvention.AS_PRINTED,
) -> tuple[AttentionCost, PenaltyEstimate, dict]:
    """Compose both stages and return a report mirroring the two result tables."""
    if data_pre.regime is not Regime.NO_CHALLENGES:
        raise NumericalError("stage 1 requires no-challenge choice data")
    if data_post.regime is not Regime.CHALLENGES:
        raise NumericalError("stage 2 requires challenge-regime choice data")
    rp_pre = revealed_posteriors(data_pre)
    kappa = estimate_kappa(rp_pre, convention)
    rp_post = revealed_posteriors(data_post)
    n_post = float(data_post.n_obs.sum()) if data_post.n_obs is not None else None
    penalties = estimate_penalties(rp_post, kappa, eta_in, eta_out, convention, n_obs=n_post)
    report = {
        "convention": convention.value,
        "stage1": {
            "gamma_in_given_call_in": rp_pre.gamma_in_given_call_in,
            "gamma_out_given_call_out": rp_pre.gamma_out_given_call_out,
            "kappa_in": kappa.kappa_in,
            "kappa_out": kappa.kappa_out,
        },
        "stage2": {
            "gamma_in_given_call_in": rp_post.gamma_in_given_call_in,
            "gamma_out_given_call_out": rp_post.gamma_out_given_call_out,
            "eta_in": eta_in,
            "eta_out": eta_out,
            "c_in": penalties.c_in,
            "c_out": penalties.c_out,
            "flags": list(penalties.flags),
        },
    }
    return kappa, penalties, report
