"""Seeded synthetic tournament generator.

Produces bounce, point, and challenge logs from the rational-inattention
call model, plus a hidden truth table linking every challenge to its
bounce. Umpire calls are sampled per bounce from the optimal policy of the
unsigned-distance bin the bounce falls in (per-bin prior = that bin's
configured in-share). Post-period tournaments use the challenge
environment; incorrect calls are challenged with the state's challenge
rate and every challenge of an incorrect call is won.

Rally construction guarantees that the incorrect-call audit criteria are
exhaustive: after an unchallenged incorrect in-call the next two strokes
are deep-court "safe" strokes, so the point can only end with the
mistaken-call beneficiary winning (criterion: out-hitter wins) or with at
least three further strokes on record (criterion: play continued after an
out).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .core import Action, AttentionCost, Prior, State, UtilityEnvironment
from .errors import ConfigError
from .solver import SolutionRegime, solve_optimal_structure

NEAR_BIN_EDGES = (0.0, 20.0, 40.0, 60.0, 80.0, 100.0)  # unsigned mm
FAR_TAIL_SCALE_MM = 400.0


@dataclass(frozen=True)
class CorruptionSpec:
    score_flip_prob: float = 0.0
    missing_set_prob: float = 0.0
    missing_game_prob: float = 0.0
    distance_noise_mm: float = 0.0

    @staticmethod
    def broadcast_like() -> "CorruptionSpec":
        return CorruptionSpec(
            score_flip_prob=0.3,
            missing_set_prob=0.15,
            missing_game_prob=0.15,
            distance_noise_mm=5.0,
        )


@dataclass(frozen=True)
class SimConfig:
    master_seed: int = 20060322
    n_tournaments_pre: int = 4
    n_tournaments_post: int = 12
    matches_per_tournament: int = 6
    # distance law: unsigned-bin category shares and per-category in-shares
    share_within_20mm: float = 0.0065
    share_within_100mm: float = 0.035
    in_share_20mm: float = 0.516
    in_share_20_100mm: float = 0.547
    far_in_share: float = 0.85
    serve_share: float = 0.28
    lets_enabled: bool = False
    let_prob: float = 0.03
    # attention costs per unsigned 20 mm bin within 100 mm, then beyond
    bin_kappas: tuple[AttentionCost, ...] = (
        AttentionCost(1.139, 1.594),
        AttentionCost(0.426, 0.427),
        AttentionCost(0.426, 0.427),
        AttentionCost(0.426, 0.427),
        AttentionCost(0.426, 0.427),
    )
    far_kappa: AttentionCost = AttentionCost(0.05, 0.05)
    c_in: float = 0.0
    c_out: float = 0.0
    eta_in: float = 0.0
    eta_out: float = 0.0
    penalty_phase_in: bool = False
    # stress-only: challenges against correct calls (always lost); excluded
    # from estimation inputs
    unsuccessful_challenge_rate: float = 0.0

    def __post_init__(self):
        for name in ("share_within_20mm", "share_within_100mm", "in_share_20mm",
                     "in_share_20_100mm", "far_in_share", "serve_share",
                     "eta_in", "eta_out", "let_prob", "unsuccessful_challenge_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.share_within_20mm > self.share_within_100mm:
            raise ConfigError("share_within_20mm cannot exceed share_within_100mm")
        if len(self.bin_kappas) != 5:
            raise ConfigError("bin_kappas must list five unsigned 20 mm bins")
        if self.n_tournaments_pre < 0 or self.n_tournaments_post < 0:
            raise ConfigError("tournament counts must be non-negative")
        if self.matches_per_tournament <= 0:
            raise ConfigError("matches_per_tournament must be positive")


@dataclass(frozen=True)
class SimulationOutput:
    bounces: pd.DataFrame
    points: pd.DataFrame
    challenges: pd.DataFrame
    truth: pd.DataFrame
    config: SimConfig


@dataclass
class _BinPolicy:
    """Conditional call probabilities for one unsigned-distance bin."""

    p_call_in_given_in: float
    p_call_in_given_out: float
    prior_in: float
    regime: SolutionRegime


def bin_index(distance_mm: float) -> int:
    """Unsigned 20 mm bin index: 0..4 within 100 mm, 5 beyond."""
    d = abs(distance_mm)
    if d >= 100.0:
        return 5
    return int(d // 20.0)


def _bin_prior(config: SimConfig, idx: int) -> float:
    if idx == 0:
        return config.in_share_20mm
    if idx <= 4:
        return config.in_share_20_100mm
    return config.far_in_share


def _bin_kappa(config: SimConfig, idx: int) -> AttentionCost:
    return config.bin_kappas[idx] if idx <= 4 else config.far_kappa


def bin_policies(config: SimConfig, env: UtilityEnvironment) -> list[_BinPolicy]:
    """Solve the per-bin call policies for one environment."""
    policies = []
    for idx in range(6):
        prior = Prior(_bin_prior(config, idx))
        sol = solve_optimal_structure(env, _bin_kappa(config, idx), prior)
        cd = sol.choice_probs
        p_in = prior.p_in
        if sol.regime is SolutionRegime.CORNER_ALL_IN:
            pii, pio = 1.0, 1.0
        elif sol.regime is SolutionRegime.CORNER_ALL_OUT:
            pii, pio = 0.0, 0.0
        else:
            pii = cd.prob(Action.CALL_IN, State.IN) / p_in if p_in > 0 else 0.0
            pio = cd.prob(Action.CALL_IN, State.OUT) / (1 - p_in) if p_in < 1 else 0.0
        policies.append(_BinPolicy(pii, pio, p_in, sol.regime))
    return policies


def _called_out_prob(config: SimConfig, policies: list[_BinPolicy]) -> float:
    """Per-stroke probability a ball is called out, under the distance law."""
    s20 = config.share_within_20mm
    s100 = config.share_within_100mm
    cat_probs = [s20] + [(s100 - s20) / 4.0] * 4 + [1.0 - s100]
    total = 0.0
    for p, pol in zip(cat_probs, policies):
        total += p * (pol.prior_in * (1 - pol.p_call_in_given_in)
                      + (1 - pol.prior_in) * (1 - pol.p_call_in_given_out))
    return total


def _rally_end_prob(config: SimConfig, policies: list[_BinPolicy]) -> float:
    """Winner hazard tuned so the serve share of bounces lands near target."""
    f = _called_out_prob(config, policies)
    s = config.serve_share
    serves_per_point = 1.0 + f
    rally_hazard = s * (1.0 - f * f) / (serves_per_point * (1.0 - s))
    return min(0.9, max(0.02, rally_hazard - f))


@dataclass
class _Stroke:
    stroke_index: int
    distance_mm: float
    is_serve: bool
    speed_kmh: float
    true_in: bool
    original_call_in: bool
    recorded_call_in: bool
    challenged: bool
    challenge_won: bool
    hitter: str


def _sample_distance(config: SimConfig, rng: np.random.Generator) -> float:
    u = rng.random()
    s20 = config.share_within_20mm
    s100 = config.share_within_100mm
    if u < s20:
        mag = rng.random() * 20.0
        in_share = config.in_share_20mm
    elif u < s100:
        mag = 20.0 + rng.random() * 80.0
        in_share = config.in_share_20_100mm
    else:
        mag = 100.0 + rng.exponential(FAR_TAIL_SCALE_MM)
        in_share = config.far_in_share
    sign = 1.0 if rng.random() < in_share else -1.0
    return sign * mag


def _sample_far_in_distance(config: SimConfig, rng: np.random.Generator) -> float:
    return 100.0 + rng.exponential(FAR_TAIL_SCALE_MM)


def _sample_speed(is_serve: bool, rng: np.random.Generator) -> float:
    if is_serve:
        v = rng.normal(150.0, 23.0)
    else:
        v = rng.normal(83.0, 20.5)
    return max(1.0, v)


class _PointBuilder:
    """Plays out one point, tracking strokes, challenges, and the winner."""

    def __init__(self, config: SimConfig, policies: list[_BinPolicy],
                 rally_end_prob: float, allow_challenges: bool,
                 server: str, receiver: str, rng: np.random.Generator):
        self.config = config
        self.policies = policies
        self.rally_end_prob = rally_end_prob
        self.allow_challenges = allow_challenges
        self.server = server
        self.receiver = receiver
        self.rng = rng
        self.strokes: list[_Stroke] = []
        self.winner: str | None = None
        self.safe_remaining = 0
        self.last_serve_index = 0

    def _hitter(self, index: int, is_serve: bool = False) -> str:
        # serves (including faults and lets) are all the server's; rally
        # strokes alternate starting from the last serve
        if is_serve:
            return self.server
        gap = index - self.last_serve_index
        return self.receiver if gap % 2 == 1 else self.server

    def _other(self, player: str) -> str:
        return self.receiver if player == self.server else self.server

    def _call(self, distance_mm: float, true_in: bool) -> bool:
        pol = self.policies[bin_index(distance_mm)]
        p = pol.p_call_in_given_in if true_in else pol.p_call_in_given_out
        return self.rng.random() < p

    def _challenge_roll(self, true_in: bool) -> bool:
        if not self.allow_challenges:
            return False
        eta = self.config.eta_in if true_in else self.config.eta_out
        return self.rng.random() < eta

    def _push(self, index: int, distance: float, is_serve: bool, call_in: bool,
              recorded_in: bool, challenged: bool, won: bool) -> _Stroke:
        if is_serve:
            self.last_serve_index = index
        s = _Stroke(
            stroke_index=index,
            distance_mm=distance,
            is_serve=is_serve,
            speed_kmh=_sample_speed(is_serve, self.rng),
            true_in=distance >= 0.0,
            original_call_in=call_in,
            recorded_call_in=recorded_in,
            challenged=challenged,
            challenge_won=won,
            hitter=self._hitter(index, is_serve),
        )
        self.strokes.append(s)
        return s

    def _maybe_stress_challenge(self, stroke: _Stroke) -> None:
        # unsuccessful challenge of a correct call; recorded call unchanged
        if (self.allow_challenges
                and self.config.unsuccessful_challenge_rate > 0
                and stroke.original_call_in == stroke.true_in
                and not stroke.challenged
                and self.rng.random() < self.config.unsuccessful_challenge_rate):
            stroke.challenged = True
            stroke.challenge_won = False

    def play(self) -> None:
        index = 1
        index = self._serve_phase(index)
        if self.winner is not None:
            return
        # rally
        while self.winner is None:
            self._rally_stroke(index)
            index += 1

    def _serve_phase(self, index: int) -> int:
        """First serve (with optional let), fault handling, second serve."""
        if self.config.lets_enabled and self.rng.random() < self.config.let_prob:
            # let: bounce recorded, call is the correct one, serve replayed
            d = _sample_distance(self.config, self.rng)
            self._push(index, d, True, d >= 0.0, d >= 0.0, False, False)
            index += 1
        for attempt in (1, 2):
            d = _sample_distance(self.config, self.rng)
            true_in = d >= 0.0
            call_in = self._call(d, true_in)
            if call_in and true_in:
                s = self._push(index, d, True, True, True, False, False)
                self._maybe_stress_challenge(s)
                return index + 1  # rally begins
            if call_in and not true_in:
                challenged = self._challenge_roll(true_in)
                if challenged:
                    # overturned: serve is out after all -> fault
                    self._push(index, d, True, True, False, True, True)
                    index += 1
                    if attempt == 2:
                        self.winner = self.receiver  # double fault
                        return index
                    continue
                s = self._push(index, d, True, True, True, False, False)
                self._maybe_stress_challenge(s)
                self.safe_remaining = 2
                return index + 1  # play (incorrectly) continues
            # called out
            if true_in:
                challenged = self._challenge_roll(true_in)
                if challenged:
                    # overturned incorrect out-call: point awarded to the server
                    self._push(index, d, True, False, True, True, True)
                    self.winner = self.server
                    return index + 1
                # unchallenged incorrect out-call on a serve: ruled a fault
                self._push(index, d, True, False, False, False, False)
                index += 1
                if attempt == 2:
                    self.winner = self.receiver
                    return index
                continue  # ruled fault, second serve
            # correct out call: fault
            s = self._push(index, d, True, False, False, False, False)
            self._maybe_stress_challenge(s)
            index += 1
            if attempt == 2:
                self.winner = self.receiver
                return index
        return index

    def _rally_stroke(self, index: int) -> None:
        hitter = self._hitter(index)
        if self.safe_remaining > 0:
            # deep-court continuation after an unchallenged incorrect in-call
            self.safe_remaining -= 1
            d = _sample_far_in_distance(self.config, self.rng)
            call_in = self._call(d, True)
            self._push(index, d, False, call_in, call_in, False, False)
            return
        d = _sample_distance(self.config, self.rng)
        true_in = d >= 0.0
        call_in = self._call(d, true_in)
        if call_in and true_in:
            s = self._push(index, d, False, True, True, False, False)
            self._maybe_stress_challenge(s)
            if self.rng.random() < self.rally_end_prob:
                self.winner = hitter  # unreturned winner
            return
        if call_in and not true_in:
            challenged = self._challenge_roll(true_in)
            if challenged:
                self._push(index, d, False, True, False, True, True)
                self.winner = self._other(hitter)
                return
            s = self._push(index, d, False, True, True, False, False)
            self._maybe_stress_challenge(s)
            self.safe_remaining = 2
            return
        # called out
        if true_in:
            challenged = self._challenge_roll(true_in)
            if challenged:
                # overturned: ball was in; point awarded to the striker
                self._push(index, d, False, False, True, True, True)
                self.winner = hitter
                return
            self._push(index, d, False, False, False, False, False)
            self.winner = self._other(hitter)
            return
        s = self._push(index, d, False, False, False, False, False)
        self._maybe_stress_challenge(s)
        self.winner = self._other(hitter)


_ROUNDS = ("other", "other", "other", "round_of_16", "quarterfinal", "semifinal", "final")


def _match_round(match_idx: int) -> str:
    return _ROUNDS[match_idx % len(_ROUNDS)]


class _MatchScore:
    """Simplified scoring: best of 3 sets, 6 games per set, 4 points per
    game (no deuce), 7-point tiebreak at 6-6. Enough structure for linkage
    keys; not a full rulebook."""

    def __init__(self):
        self.sets = [0, 0]
        self.games = [0, 0]
        self.points = [0, 0]
        self.set_no = 1
        self.game_no = 1
        self.tiebreak = False
        self.finished = False

    def score_str(self) -> str:
        return f"{self.points[0]}-{self.points[1]}"

    def record(self, winner_idx: int) -> None:
        self.points[winner_idx] += 1
        target = 7 if self.tiebreak else 4
        if self.points[winner_idx] < target:
            return
        # game won
        self.points = [0, 0]
        self.games[winner_idx] += 1
        self.game_no += 1
        won_set = self.tiebreak or (
            self.games[winner_idx] >= 6 and self.games[1 - winner_idx] < 6
        )
        if won_set:
            self.sets[winner_idx] += 1
            self.games = [0, 0]
            self.set_no += 1
            self.game_no = 1
            self.tiebreak = False
            if self.sets[winner_idx] >= 2:
                self.finished = True
        elif self.games[0] == 6 and self.games[1] == 6:
            self.tiebreak = True


def simulate(config: SimConfig) -> SimulationOutput:
    """Generate the full synthetic corpus, deterministically in the seed."""
    root = np.random.SeedSequence(config.master_seed)
    n_total = config.n_tournaments_pre + config.n_tournaments_post
    t_seeds = root.spawn(max(1, n_total))

    env_pre = UtilityEnvironment(0.0, 0.0, 0.0, 0.0)
    policies_pre = bin_policies(config, env_pre)
    rally_end = _rally_end_prob(config, policies_pre)

    bounce_rows, point_rows, challenge_rows, truth_rows = [], [], [], []
    challenge_counter = 0

    for t in range(n_total):
        post = t >= config.n_tournaments_pre
        if post:
            post_idx = t - config.n_tournaments_pre
            month = post_idx
            if config.penalty_phase_in and config.n_tournaments_post > 0:
                scale = (post_idx + 1) / config.n_tournaments_post
            else:
                scale = 1.0
            env = UtilityEnvironment(
                config.eta_in, config.eta_out,
                config.c_in * scale, config.c_out * scale,
            )
            policies = bin_policies(config, env)
        else:
            month = t - config.n_tournaments_pre
            policies = policies_pre
        tournament_id = f"T{t + 1:03d}"
        tier = "atp1000" if t % 2 == 0 else "atp250"
        m_seeds = t_seeds[t].spawn(config.matches_per_tournament)

        for m in range(config.matches_per_tournament):
            rng = np.random.default_rng(m_seeds[m])
            match_id = f"{tournament_id}-M{m + 1:02d}"
            round_name = _match_round(m)
            players = ("P1", "P2")
            score = _MatchScore()
            point_no = 0
            serving_idx = 0
            current_game = (1, 1)
            while not score.finished:
                point_no += 1
                if (score.set_no, score.game_no) != current_game:
                    current_game = (score.set_no, score.game_no)
                    serving_idx = (score.game_no + score.set_no) % 2
                server = players[serving_idx]
                receiver = players[1 - serving_idx]
                point_id = f"{match_id}-P{point_no:04d}"
                set_no, game_no = score.set_no, score.game_no
                score_at_play = score.score_str()
                tiebreak = score.tiebreak

                builder = _PointBuilder(
                    config, policies, rally_end, post, server, receiver, rng
                )
                builder.play()
                winner = builder.winner
                score.record(players.index(winner))
                if point_no > 400:  # safety valve; never hit in practice
                    score.finished = True

                point_rows.append({
                    "tournament_id": tournament_id,
                    "match_id": match_id,
                    "point_id": point_id,
                    "set": set_no,
                    "game": game_no,
                    "score": score_at_play,
                    "tiebreak": int(tiebreak),
                    "server": server,
                    "winner": winner,
                    "post_period": int(post),
                    "month": month,
                    "round": round_name,
                    "tier": tier,
                })
                for s in builder.strokes:
                    bounce_rows.append({
                        "tournament_id": tournament_id,
                        "match_id": match_id,
                        "point_id": point_id,
                        "stroke_index": s.stroke_index,
                        "distance_mm": round(s.distance_mm, 3),
                        "is_serve": int(s.is_serve),
                        "speed_kmh": round(s.speed_kmh, 1),
                        "true_state": "in" if s.true_in else "out",
                        "call": "in" if s.recorded_call_in else "out",
                        "challenged": int(s.challenged),
                        "challenge_won": int(s.challenge_won),
                    })
                    if s.challenged:
                        challenge_counter += 1
                        challenge_id = f"C{challenge_counter:05d}"
                        challenge_rows.append({
                            "challenge_id": challenge_id,
                            "match_id": match_id,
                            "set": str(set_no),
                            "game": str(game_no),
                            "score": score_at_play,
                            "tiebreak": int(tiebreak),
                            "player": s.hitter,
                            "distance_mm": round(abs(s.distance_mm), 3),
                            "outcome": "won" if s.challenge_won else "lost",
                        })
                        truth_rows.append({
                            "challenge_id": challenge_id,
                            "match_id": match_id,
                            "point_id": point_id,
                            "stroke_index": s.stroke_index,
                            "original_call": "in" if s.original_call_in else "out",
                        })

    bounces = pd.DataFrame(bounce_rows)
    points = pd.DataFrame(point_rows)
    challenges = pd.DataFrame(
        challenge_rows,
        columns=["challenge_id", "match_id", "set", "game", "score",
                 "tiebreak", "player", "distance_mm", "outcome"],
    )
    truth = pd.DataFrame(
        truth_rows,
        columns=["challenge_id", "match_id", "point_id", "stroke_index", "original_call"],
    )
    return SimulationOutput(bounces, points, challenges, truth, config)


def corrupt_challenge_log(
    challenges: pd.DataFrame, spec: CorruptionSpec, seed: int
) -> pd.DataFrame:
    """Apply independent field corruptions; the truth table is untouched."""
    rng = np.random.default_rng(seed)
    out = challenges.copy()
    n = len(out)
    if n == 0:
        return out
    flip = rng.random(n) < spec.score_flip_prob
    missing_set = rng.random(n) < spec.missing_set_prob
    missing_game = rng.random(n) < spec.missing_game_prob
    noise = rng.normal(0.0, spec.distance_noise_mm, n) if spec.distance_noise_mm > 0 else np.zeros(n)

    def flip_score(s: str) -> str:
        a, _, b = s.partition("-")
        return f"{b}-{a}"

    out["score"] = [
        flip_score(s) if f else s for s, f in zip(out["score"], flip)
    ]
    out["set"] = [("" if m else s) for s, m in zip(out["set"].astype(str), missing_set)]
    out["game"] = [("" if m else s) for s, m in zip(out["game"].astype(str), missing_game)]
    out["distance_mm"] = np.maximum(0.0, out["distance_mm"].to_numpy(dtype=float) + noise).round(3)
    return out


def write_outputs(output: SimulationOutput, out_dir) -> dict:
    """Write the four CSV artifacts; returns the path map."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, df in (
        ("bounces", output.bounces),
        ("points", output.points),
        ("challenges", output.challenges),
        ("truth", output.truth),
    ):
        path = out_dir / f"{name}.csv"
        df.to_csv(path, index=False)
        paths[name] = str(path)
    return paths
