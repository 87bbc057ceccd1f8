"""Forward solution of the rational-inattention call problem.

In the binary Shannon model the optimal information structure uses at most
two posteriors, one per action, pinned down by the invariant-likelihood-
ratio (ILR) conditions: the log-odds gap between the two posteriors in
each state equals that state's payoff advantage of the correct action
divided by its marginal attention cost. The posteriors are therefore
independent of the prior; the prior only sets the mixing weights through
Bayes plausibility, or pushes the solution to an inattentive corner when
it falls outside the posterior span.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Action,
    AttentionCost,
    InformationStructure,
    Posterior,
    Prior,
    State,
    UtilityEnvironment,
    gross_utility,
    shannon_cost,
)
from .errors import NumericalError
from .revealed import ChoiceData, Regime

CORNER_TOL = 1e-12


class SolutionRegime(Enum):
    INTERIOR = "interior"
    CORNER_ALL_IN = "corner_all_in"
    CORNER_ALL_OUT = "corner_all_out"


@dataclass(frozen=True)
class SolverSolution:
    structure: InformationStructure
    posterior_call_in: Posterior
    posterior_call_out: Posterior
    regime: SolutionRegime
    net_utility: float
    weight_call_in: float

    @property
    def choice_probs(self) -> ChoiceData:
        return predicted_choice_data(self)

    def to_json(self) -> str:
        def sig12(v: float) -> float:
            return float(f"{v:.12g}")

        return json.dumps({
            "regime": self.regime.value,
            "posterior_call_in_p_in": sig12(self.posterior_call_in.p_in),
            "posterior_call_out_p_in": sig12(self.posterior_call_out.p_in),
            "weight_call_in": sig12(self.weight_call_in),
            "net_utility": sig12(self.net_utility),
            "structure": json.loads(self.structure.to_json()),
        })


def _log_expm1(t: float) -> float:
    # log(e^t - 1), stable for large t
    if t > 30.0:
        return t + math.log1p(-math.exp(-t))
    return math.log(math.expm1(t))


def payoff_advantages(env: UtilityEnvironment) -> tuple[float, float]:
    """Per-state utility advantage of the correct action."""
    adv_in = gross_utility(env, Action.CALL_IN, State.IN) - gross_utility(env, Action.CALL_OUT, State.IN)
    adv_out = gross_utility(env, Action.CALL_OUT, State.OUT) - gross_utility(env, Action.CALL_IN, State.OUT)
    return adv_in, adv_out


def solve_ilr_posteriors(env: UtilityEnvironment, cost: AttentionCost) -> tuple[Posterior, Posterior]:
    """Closed-form solve of the two ILR conditions.

    With a = advantage_in / kappa_in and b = advantage_out / kappa_out the
    conditions are x / y = e^a and (1 - y) / (1 - x) = e^b for
    x = P(in | call in) and y = P(in | call out). Eliminating x gives
    y = (e^b - 1) / (e^(a+b) - 1); the second condition then recovers
    1 - x = (1 - y) e^(-b) without cancellation.
    """
    adv_in, adv_out = payoff_advantages(env)
    if adv_in <= 0 or adv_out <= 0:
        raise NumericalError(
            "degenerate or reversed incentives: the correct action must have a "
            f"strictly positive advantage in each state (got {adv_in}, {adv_out})"
        )
    a = adv_in / cost.kappa_in
    b = adv_out / cost.kappa_out
    y = math.exp(_log_expm1(b) - _log_expm1(a + b))
    x = 1.0 - (1.0 - y) * math.exp(-b)
    return Posterior(x), Posterior(y)


def ilr_residuals(
    env: UtilityEnvironment,
    cost: AttentionCost,
    gamma_in: Posterior,
    gamma_out: Posterior,
) -> tuple[float, float]:
    """Log-space residuals of the two ILR conditions."""
    adv_in, adv_out = payoff_advantages(env)
    r1 = math.log(gamma_in.p_in) - math.log(gamma_out.p_in) - adv_in / cost.kappa_in
    r2 = math.log(gamma_out.p_out) - math.log(gamma_in.p_out) - adv_out / cost.kappa_out
    return r1, r2


def _corner_solution(env: UtilityEnvironment, prior: Prior, regime: SolutionRegime) -> SolverSolution:
    g = Posterior(prior.p_in)
    structure = InformationStructure.uninformative(prior)
    action = Action.CALL_IN if regime is SolutionRegime.CORNER_ALL_IN else Action.CALL_OUT
    net = sum(prior.prob(w) * gross_utility(env, action, w) for w in State)
    weight = 1.0 if regime is SolutionRegime.CORNER_ALL_IN else 0.0
    return SolverSolution(
        structure=structure,
        posterior_call_in=g,
        posterior_call_out=g,
        regime=regime,
        net_utility=net,
        weight_call_in=weight,
    )


def solve_optimal_structure(
    env: UtilityEnvironment, cost: AttentionCost, prior: Prior
) -> SolverSolution:
    """Optimal attention and calls for one environment and prior."""
    gamma_in, gamma_out = solve_ilr_posteriors(env, cost)
    x, y = gamma_in.p_in, gamma_out.p_in
    mu = prior.p_in
    if mu <= y - CORNER_TOL or mu >= x + CORNER_TOL:
        # prior outside the posterior span: buy no information, take the
        # unconditionally better action
        eu_in = sum(prior.prob(w) * gross_utility(env, Action.CALL_IN, w) for w in State)
        eu_out = sum(prior.prob(w) * gross_utility(env, Action.CALL_OUT, w) for w in State)
        regime = SolutionRegime.CORNER_ALL_IN if eu_in >= eu_out else SolutionRegime.CORNER_ALL_OUT
        return _corner_solution(env, prior, regime)
    weight = min(1.0, max(0.0, (mu - y) / (x - y)))
    structure = InformationStructure(prior, ((gamma_in, weight), (gamma_out, 1.0 - weight)))
    gross = weight * sum(gamma_in.prob(w) * gross_utility(env, Action.CALL_IN, w) for w in State)
    gross += (1.0 - weight) * sum(gamma_out.prob(w) * gross_utility(env, Action.CALL_OUT, w) for w in State)
    net = gross - shannon_cost(structure, cost)
    return SolverSolution(
        structure=structure,
        posterior_call_in=gamma_in,
        posterior_call_out=gamma_out,
        regime=SolutionRegime.INTERIOR,
        net_utility=net,
        weight_call_in=weight,
    )


def predicted_choice_data(solution: SolverSolution) -> ChoiceData:
    """Joint P(action, state) implied by a solution: weight times posterior."""
    w = solution.weight_call_in
    x = solution.posterior_call_in.p_in
    y = solution.posterior_call_out.p_in
    joint = np.array([
        [w * x, w * (1.0 - x)],
        [(1.0 - w) * y, (1.0 - w) * (1.0 - y)],
    ])
    # the solution does not retain its environment; use choice_data_for_env
    # when the challenge-regime tag matters
    return ChoiceData(joint, Regime.NO_CHALLENGES)


def choice_data_for_env(solution: SolverSolution, env: UtilityEnvironment) -> ChoiceData:
    base = predicted_choice_data(solution)
    regime = Regime.CHALLENGES if env.has_challenges else Regime.NO_CHALLENGES
    return ChoiceData(base.joint, regime)


def brute_force_oracle(
    env: UtilityEnvironment,
    cost: AttentionCost,
    prior: Prior,
    grid_resolution: int = 2000,
) -> SolverSolution:
    """Grid-search verification oracle, independent of the closed-form solve.

    Sweeps Bayes-plausible two-posterior structures (x, y) with
    x >= prior >= y and selects the grid point maximizing the decision
    objective of the attention model: expected utility with each state's
    payoffs deflated by that state's marginal attention cost, minus the
    mutual information between state and posterior.  With equal per-state
    costs this is (up to the common scale) expected gross utility minus
    the weighted Shannon cost; with unequal costs it is the objective
    whose first-order conditions are the per-state likelihood-ratio
    equations.  Runs coarse-to-fine refinement passes around the best grid
    point and also evaluates the uninformative corner candidates.  The
    returned net utility is reported in gross-utility units (expected
    gross utility minus the weighted Shannon cost at the selected point),
    matching `solve_optimal_structure`.
    """
    if grid_resolution < 100:
        raise ValueError("grid_resolution must be >= 100")
    mu = prior.p_in
    u_ii = gross_utility(env, Action.CALL_IN, State.IN)
    u_io = gross_utility(env, Action.CALL_IN, State.OUT)
    u_oi = gross_utility(env, Action.CALL_OUT, State.IN)
    u_oo = gross_utility(env, Action.CALL_OUT, State.OUT)
    # State-deflated payoffs: the objective the interior optimum satisfies.
    d_ii, d_oi = u_ii / cost.kappa_in, u_oi / cost.kappa_in
    d_io, d_oo = u_io / cost.kappa_out, u_oo / cost.kappa_out

    def xlogx(p):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        return v

    entropy_prior = -(
        (mu * math.log(mu) if mu > 0 else 0.0)
        + ((1 - mu) * math.log(1 - mu) if mu < 1 else 0.0)
    )

    def objective(xv: np.ndarray, yv: np.ndarray) -> np.ndarray:
        w = (mu - yv) / (xv - yv)
        deflated = w * (xv * d_ii + (1 - xv) * d_io) + (1 - w) * (
            yv * d_oi + (1 - yv) * d_oo
        )
        mutual_info = entropy_prior + (
            w * (xlogx(xv) + xlogx(1 - xv)) + (1 - w) * (xlogx(yv) + xlogx(1 - yv))
        )
        return deflated - mutual_info

    n = min(int(grid_resolution), 400)
    x_lo, x_hi = mu, 1.0
    y_lo, y_hi = 0.0, mu
    best_x, best_y, best_val = mu, mu, -math.inf
    for _ in range(4):
        xs = np.linspace(x_lo, x_hi, n)
        ys = np.linspace(y_lo, y_hi, n)
        xv, yv = np.meshgrid(xs, ys, indexing="ij")
        mask = xv - yv > 1e-9
        vals = np.full(xv.shape, -np.inf)
        vals[mask] = objective(xv[mask], yv[mask])
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_x, best_y = float(xv[idx]), float(yv[idx])
        hx = (x_hi - x_lo) / (n - 1)
        hy = (y_hi - y_lo) / (n - 1)
        x_lo, x_hi = max(mu, best_x - 4 * hx), min(1.0, best_x + 4 * hx)
        y_lo, y_hi = max(0.0, best_y - 4 * hy), min(mu, best_y + 4 * hy)

    # corner candidates: no information, one action (zero attention cost)
    corner_val = max(mu * d_ii + (1 - mu) * d_io, mu * d_oi + (1 - mu) * d_oo)
    if corner_val >= best_val:
        eu_in = mu * u_ii + (1 - mu) * u_io
        eu_out = mu * u_oi + (1 - mu) * u_oo
        regime = SolutionRegime.CORNER_ALL_IN if eu_in >= eu_out else SolutionRegime.CORNER_ALL_OUT
        return _corner_solution(env, prior, regime)

    weight = (mu - best_y) / (best_x - best_y)
    structure = InformationStructure(
        prior, ((Posterior(best_x), weight), (Posterior(best_y), 1.0 - weight))
    )
    gross = weight * (best_x * u_ii + (1 - best_x) * u_io) + (1 - weight) * (
        best_y * u_oi + (1 - best_y) * u_oo
    )
    net = gross - shannon_cost(structure, cost)
    return SolverSolution(
        structure=structure,
        posterior_call_in=Posterior(best_x),
        posterior_call_out=Posterior(best_y),
        regime=SolutionRegime.INTERIOR,
        net_utility=net,
        weight_call_in=weight,
    )
