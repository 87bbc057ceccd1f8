"""Challenge-to-bounce record linkage and incorrect-call auditing.

The challenge log carries only coarse, partially corrupted context (set,
game, score, player, approximate distance) while the bounce log is keyed
by point and stroke. Linking proceeds in deterministic passes from strict
to loose key sets; early passes demand a unique candidate and defer
ambiguous cases, late passes break ties by closeness.

The audit infers original umpire calls from measured ball positions and
point dynamics alone, without reading the recorded calls: a ball measured
out after which play continued must have been called in; a point lost by
the last hitter with every ball measured in must have ended on an
incorrect out-call; a close serve measured in but followed by another
serve was ruled a fault. Recorded calls serve only as ground truth when
scoring the audit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataFormatError

# (pass number, key columns, tiebreak-only, distance threshold mm, resolve ties)
_PASS_SPECS = (
    (1, ("set", "game", "score", "player"), False, 35.0, False),
    (2, ("set", "game", "player"), False, 15.0, False),
    (3, ("set", "score", "player"), False, 15.0, False),
    (4, ("game", "score", "player"), False, 10.0, False),
    (5, ("game", "score"), True, 35.0, False),
    (6, ("game",), True, 15.0, True),
    (7, ("set", "game", "player"), False, 35.0, True),
    (8, ("set", "player"), False, 35.0, True),
)

_BOUNCE_COLUMNS = {"match_id", "point_id", "stroke_index", "distance_mm", "is_serve"}
_POINT_COLUMNS = {"match_id", "point_id", "set", "game", "score", "tiebreak",
                  "server", "winner"}
_CHALLENGE_COLUMNS = {"challenge_id", "match_id", "set", "game", "score",
                      "player", "distance_mm", "outcome"}


@dataclass(frozen=True)
class LinkResult:
    links: pd.DataFrame        # challenge_id, point_id, stroke_index, pass_number, distance_gap
    unlinked: tuple[str, ...]  # challenge ids never matched
    pass_counts: dict[int, int]

    @property
    def n_linked(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class CallAudit:
    """Inferred incorrect calls plus point-level criterion flags."""

    flags: pd.DataFrame      # point_id, criterion, stroke_index, inferred_original_call
    flagged_points: tuple[str, ...]


def _require_columns(df: pd.DataFrame, required: set, name: str) -> None:
    missing = required - set(df.columns)
    if missing:
        raise DataFormatError(f"{name} table missing columns: {sorted(missing)}")


def _hitters(point: pd.DataFrame, server: str) -> list[str]:
    """Hitter of each stroke: serves by the server, then alternating."""
    receiver = "P2" if server == "P1" else "P1"
    out = []
    last_serve = 0
    for _, row in point.iterrows():
        if row["is_serve"]:
            out.append(server)
            last_serve = row["stroke_index"]
        else:
            gap = row["stroke_index"] - last_serve
            out.append(receiver if gap % 2 == 1 else server)
    return out


def prepare_bounce_table(bounces: pd.DataFrame, points: pd.DataFrame) -> pd.DataFrame:
    """Merge bounce and point context needed for linkage keys."""
    _require_columns(bounces, _BOUNCE_COLUMNS, "bounces")
    _require_columns(points, _POINT_COLUMNS, "points")
    merged = bounces.merge(
        points[["point_id", "set", "game", "score", "tiebreak", "server", "winner"]],
        on="point_id",
        how="left",
        validate="many_to_one",
    )
    if merged["set"].isna().any():
        raise DataFormatError("bounce rows reference point ids absent from the point table")
    merged = merged.sort_values(["point_id", "stroke_index"], kind="stable").reset_index(drop=True)
    # hitter of each stroke: serves by the server, then alternating from
    # the most recent serve (vectorized form of `_hitters`)
    is_serve = merged["is_serve"].to_numpy() == 1
    last_serve = (
        merged["stroke_index"]
        .where(pd.Series(is_serve, index=merged.index))
        .groupby(merged["point_id"], sort=False)
        .ffill()
        .fillna(0)
        .to_numpy()
    )
    gap = merged["stroke_index"].to_numpy() - last_serve
    server = merged["server"].to_numpy()
    receiver = np.where(server == "P1", "P2", "P1")
    merged["player"] = np.where(is_serve | (gap % 2 == 0), server, receiver)
    merged["abs_distance"] = merged["distance_mm"].abs()
    merged["set"] = merged["set"].astype(str)
    merged["game"] = merged["game"].astype(str)
    return merged


def _score_gap(a: str, b: str) -> float:
    try:
        a1, _, a2 = a.partition("-")
        b1, _, b2 = b.partition("-")
        return abs(int(a1) - int(b1)) + abs(int(a2) - int(b2))
    except ValueError:
        return float("inf")


def link_challenges(
    bounces: pd.DataFrame, points: pd.DataFrame, challenges: pd.DataFrame
) -> LinkResult:
    """Multi-pass deterministic linkage of challenges to bounces."""
    _require_columns(challenges, _CHALLENGE_COLUMNS, "challenges")
    table = prepare_bounce_table(bounces, points)
    table = table.reset_index(drop=True)
    n = len(table)
    assigned = np.zeros(n, dtype=bool)
    cols = {
        key: table[key].astype(str).to_numpy()
        for key in ("set", "game", "score", "player", "point_id")
    }
    stroke_index = table["stroke_index"].to_numpy()
    abs_distance = table["abs_distance"].to_numpy(dtype=float)
    tiebreak = table["tiebreak"].to_numpy() == 1

    ch = challenges.copy().reset_index(drop=True)
    ch["set"] = ch["set"].astype(str)
    ch["game"] = ch["game"].astype(str)
    if "tiebreak" not in ch.columns:
        ch["tiebreak"] = 0
    ch_records = ch.to_dict("records")
    linked: dict[str, tuple] = {}
    pass_counts = {p[0]: 0 for p in _PASS_SPECS}

    by_match = {mid: grp.index.to_numpy() for mid, grp in table.groupby("match_id")}

    for pass_no, keys, tb_only, max_gap, resolve in _PASS_SPECS:
        for crow in ch_records:
            cid = crow["challenge_id"]
            if cid in linked:
                continue
            if tb_only and int(crow["tiebreak"]) != 1:
                continue
            idx = by_match.get(crow["match_id"])
            if idx is None:
                continue
            cand = idx[~assigned[idx]]
            if tb_only:
                cand = cand[tiebreak[cand]]
            dropped = False
            for key in keys:
                val = str(crow[key])
                if val == "" or val == "nan":
                    if resolve:
                        # tie-break passes guess; a missing key there is
                        # too loose, so require their keys in full
                        dropped = True
                        break
                    continue  # strict pass: wildcard, uniqueness still required
                cand = cand[cols[key][cand] == val]
            if dropped or cand.size == 0:
                continue
            gaps = np.abs(abs_distance[cand] - float(crow["distance_mm"]))
            keep = gaps <= max_gap
            cand, gaps = cand[keep], gaps[keep]
            if cand.size == 0:
                continue
            if cand.size > 1 and not resolve:
                continue  # strict pass: ambiguity defers to a later pass
            if cand.size > 1:
                if pass_no == 7:
                    score_gaps = np.array(
                        [_score_gap(s, crow["score"]) for s in cols["score"][cand]]
                    )
                    rank_keys = (stroke_index[cand], cols["point_id"][cand], gaps, score_gaps)
                else:
                    rank_keys = (stroke_index[cand], cols["point_id"][cand], gaps)
                best_pos = np.lexsort(rank_keys)[0]
            else:
                best_pos = 0
            row_pos = int(cand[best_pos])
            assigned[row_pos] = True
            linked[cid] = (
                cols["point_id"][row_pos],
                int(stroke_index[row_pos]),
                pass_no,
                float(gaps[best_pos]),
            )
            pass_counts[pass_no] += 1

    links = pd.DataFrame(
        [
            {
                "challenge_id": cid,
                "point_id": v[0],
                "stroke_index": v[1],
                "pass_number": v[2],
                "distance_gap": v[3],
            }
            for cid, v in linked.items()
        ],
        columns=["challenge_id", "point_id", "stroke_index", "pass_number", "distance_gap"],
    )
    unlinked = tuple(c for c in ch["challenge_id"] if c not in linked)
    return LinkResult(links=links, unlinked=unlinked, pass_counts=pass_counts)


def linkage_accuracy(result: LinkResult, truth: pd.DataFrame) -> dict:
    """Compare links against the hidden truth table."""
    merged = result.links.merge(truth, on="challenge_id", suffixes=("", "_true"))
    if merged.empty:
        return {"n_linked": 0, "n_correct": 0, "accuracy": float("nan"),
                "point_accuracy": float("nan"), "false_positive_rate": float("nan"),
                "coverage": 0.0 if len(truth) else float("nan")}
    correct = (
        (merged["point_id"] == merged["point_id_true"])
        & (merged["stroke_index"] == merged["stroke_index_true"])
    )
    correct_point = merged["point_id"] == merged["point_id_true"]
    return {
        "n_linked": int(len(result.links)),
        "n_correct": int(correct.sum()),
        "accuracy": float(correct.mean()),
        "point_accuracy": float(correct_point.mean()),
        "false_positive_rate": float(1.0 - correct_point.mean()),
        "coverage": float(len(result.links) / len(truth)) if len(truth) else float("nan"),
    }


def restore_original_calls(
    bounces: pd.DataFrame, links: pd.DataFrame, challenges: pd.DataFrame
) -> pd.DataFrame:
    """Undo post-challenge corrections on linked bounces.

    A won challenge means the recorded call was corrected after review, so
    the original call is the opposite of the recorded one. Lost challenges
    leave the record as called.
    """
    out = bounces.copy()
    out["original_call"] = out["call"]
    won = set(challenges.loc[challenges["outcome"] == "won", "challenge_id"])
    overturned = links[links["challenge_id"].isin(won)]
    key = out.set_index(["point_id", "stroke_index"]).index
    flip_idx = pd.MultiIndex.from_frame(overturned[["point_id", "stroke_index"]])
    mask = key.isin(flip_idx)
    out.loc[mask, "original_call"] = np.where(
        out.loc[mask, "call"] == "in", "out", "in"
    )
    return out


SERVE_AUDIT_WINDOW_MM = 40.0


def identify_incorrect_calls(bounces: pd.DataFrame, points: pd.DataFrame) -> CallAudit:
    """Infer unchallenged incorrect calls from positions and dynamics.

    Uses only measured distances, stroke order, serve markers, and point
    winners. Per point, serves followed by another serve are ruled faults
    (or lets) and excluded from the rally criteria. Flags:

    - ``out_hitter_won``: the first non-fault ball measured out was hit by
      the eventual point winner, so it must have been called in.
    - ``play_continued``: at least three strokes follow the first
      non-fault ball measured out and its hitter lost, so again it must
      have been called in.
    - ``all_in_loser``: every non-fault ball measured in, yet the last
      hitter lost the point; the final ball must have been called out.
    - ``fault_serve_in``: a serve measured in by at most 40 mm followed by
      another serve; it was ruled a fault (lets excepted).
    """
    table = prepare_bounce_table(bounces, points)
    rows = []
    for point_id, grp in table.groupby("point_id", sort=False):
        grp = grp.sort_values("stroke_index")
        winner = grp["winner"].iloc[0]
        serve_idx = grp.loc[grp["is_serve"] == 1, "stroke_index"].to_list()
        fault_serves = {
            s for s in serve_idx if any(t > s for t in serve_idx)
        }
        non_fault = grp[~grp["stroke_index"].isin(fault_serves)]
        outs = non_fault[non_fault["distance_mm"] < 0]
        if not outs.empty:
            first = outs.iloc[0]
            n_after = int((grp["stroke_index"] > first["stroke_index"]).sum())
            if first["player"] == winner:
                rows.append((point_id, "out_hitter_won",
                             int(first["stroke_index"]), "in"))
            elif n_after >= 3:
                rows.append((point_id, "play_continued",
                             int(first["stroke_index"]), "in"))
        else:
            last = non_fault.iloc[-1]
            if last["player"] != winner:
                rows.append((point_id, "all_in_loser",
                             int(last["stroke_index"]), "out"))
        for s in sorted(fault_serves):
            srow = grp[grp["stroke_index"] == s].iloc[0]
            if 0.0 <= srow["distance_mm"] <= SERVE_AUDIT_WINDOW_MM:
                rows.append((point_id, "fault_serve_in", int(s), "out"))
    flags = pd.DataFrame(
        rows, columns=["point_id", "criterion", "stroke_index", "inferred_original_call"]
    )
    flagged = tuple(dict.fromkeys(flags["point_id"])) if len(flags) else ()
    return CallAudit(flags=flags, flagged_points=flagged)


def audit_metrics(audit: CallAudit, bounces: pd.DataFrame) -> dict:
    """Score the audit against simulator ground truth.

    Ground truth is the set of points containing an unchallenged stroke
    whose recorded call disagrees with the measured side, restricted to
    the audit's stated scope: rally balls and serves within the 40 mm
    serve window. Precision counts any flagged point containing some
    unchallenged incorrect call (in or out of scope) as correct.
    """
    b = bounces.copy()
    measured_in = b["distance_mm"] >= 0
    wrong = (b["challenged"] == 0) & (
        (measured_in & (b["call"] == "out")) | (~measured_in & (b["call"] == "in"))
    )
    # serves ruled fault: followed by a later serve in the same point
    serve_mask = b["is_serve"] == 1
    max_serve = b[serve_mask].groupby("point_id")["stroke_index"].transform("max")
    is_fault_serve = pd.Series(False, index=b.index)
    is_fault_serve.loc[max_serve.index] = b.loc[max_serve.index, "stroke_index"] < max_serve
    out_of_window = is_fault_serve & (b["distance_mm"].abs() > SERVE_AUDIT_WINDOW_MM)
    in_scope = wrong & ~out_of_window
    truth_points = set(b.loc[in_scope, "point_id"])
    any_wrong_points = set(b.loc[wrong, "point_id"])
    flagged = set(audit.flagged_points)
    tp = len(flagged & any_wrong_points)
    precision = tp / len(flagged) if flagged else float("nan")
    covered = len(truth_points & flagged)
    recall = covered / len(truth_points) if truth_points else float("nan")
    return {
        "n_flagged_points": len(flagged),
        "n_truth_points": len(truth_points),
        "precision": precision,
        "recall": recall,
    }


@dataclass(frozen=True)
class PipelineResult:
    link: LinkResult
    restored_bounces: pd.DataFrame
    audit: CallAudit


def data_pipeline(
    bounces: pd.DataFrame, points: pd.DataFrame, challenges: pd.DataFrame
) -> PipelineResult:
    """Link, restore original calls, and audit in one sweep."""
    link = link_challenges(bounces, points, challenges)
    restored = restore_original_calls(bounces, link.links, challenges)
    audit = identify_incorrect_calls(bounces, points)
    return PipelineResult(link=link, restored_bounces=restored, audit=audit)
