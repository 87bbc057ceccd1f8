"""Reduced-form analysis of consolidated call data.

Implements the linear-probability fixed-effects regression of incorrect
calls on oversight exposure, binned mistake-rate summaries by signed
distance to the line, per-bin treatment interactions, and the
post-period call-in-rate trend. Fixed effects are explicit dummy columns
with the lowest key dropped; standard errors come classical,
heteroskedasticity-robust (HC1), and cluster-robust with the standard
small-sample corrections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataFormatError, NumericalError


@dataclass(frozen=True)
class RegressionSpec:
    outcome: str = "incorrect_call"
    treatment: str = "post_period"
    categorical_controls: tuple[str, ...] = ()
    continuous_controls: tuple[str, ...] = ()
    cluster: str | None = "match_id"


@dataclass(frozen=True)
class RegressionResult:
    params: dict[str, float]
    se_classical: dict[str, float]
    se_robust: dict[str, float]
    se_cluster: dict[str, float] | None
    n_obs: int
    n_clusters: int | None
    baseline_mean: float
    r_squared: float
    residual_orthogonality: float  # max |X'e| / n, should be ~0

    @property
    def alpha0(self) -> float:
        return self.params["const"]

    @property
    def alpha1(self) -> float:
        return self.params[self.treatment_name]

    @property
    def treatment_name(self) -> str:
        return self.__dict__.get("_treatment", "post_period")

    def table(self) -> pd.DataFrame:
        rows = []
        for name, coef in self.params.items():
            rows.append({
                "term": name,
                "coef": coef,
                "se_classical": self.se_classical[name],
                "se_robust": self.se_robust[name],
                "se_cluster": self.se_cluster[name] if self.se_cluster else float("nan"),
            })
        return pd.DataFrame(rows)


def signed_bin(distance_mm: float, bin_width_mm: float = 20.0, window_mm: float = 100.0):
    """Lower edge of the signed distance bin, or None outside the window."""
    if abs(distance_mm) >= window_mm:
        return None
    return int(math.floor(distance_mm / bin_width_mm) * bin_width_mm)


def consolidated_table(bounces: pd.DataFrame, points: pd.DataFrame) -> pd.DataFrame:
    """Per-bounce analysis frame joining point and match context.

    The incorrect-call indicator compares the pre-challenge call (column
    ``original_call`` when present, else ``call``) against the measured
    side of the line.
    """
    call_col = "original_call" if "original_call" in bounces.columns else "call"
    need = {"point_id", "distance_mm", "is_serve", call_col}
    missing = need - set(bounces.columns)
    if missing:
        raise DataFormatError(f"bounce table missing columns: {sorted(missing)}")
    df = bounces.merge(
        points[["point_id", "match_id", "tournament_id", "set", "game", "score",
                "tiebreak", "post_period", "month", "round", "tier"]],
        on="point_id",
        how="left",
        suffixes=("", "_pt"),
    )
    measured_in = df["distance_mm"] >= 0
    called_in = df[call_col] == "in"
    df["incorrect_call"] = (measured_in ^ called_in).astype(float)
    df["called_in"] = called_in.astype(float)
    if "speed_kmh" in df.columns:
        median = df["speed_kmh"].median()
        df["speed_above_median"] = (df["speed_kmh"] > median).astype(int)
    df["distance_bin"] = [
        signed_bin(d) if abs(d) < 100.0 else None for d in df["distance_mm"]
    ]
    return df


def binned_mistake_rates(
    data: pd.DataFrame,
    bin_width_mm: float = 20.0,
    window_mm: float = 100.0,
    split_by: str | None = None,
) -> pd.DataFrame:
    """Mistake rates per signed distance bin, pre and post, with binomial SEs."""
    df = data[data["distance_mm"].abs() < window_mm].copy()
    df["bin_lo"] = [
        int(math.floor(d / bin_width_mm) * bin_width_mm) for d in df["distance_mm"]
    ]
    groups = ["bin_lo", "post_period"]
    if split_by is not None:
        groups.append(split_by)
    rows = []
    edges = np.arange(-window_mm, window_mm, bin_width_mm).astype(int)
    for keys, grp in df.groupby(groups):
        keys = keys if isinstance(keys, tuple) else (keys,)
        n = len(grp)
        rate = grp["incorrect_call"].mean()
        row = {
            "bin_lo": keys[0],
            "bin_hi": keys[0] + int(bin_width_mm),
            "post_period": keys[1],
            "n": n,
            "mistake_rate": rate,
            "se": math.sqrt(rate * (1 - rate) / n) if n > 0 else float("nan"),
        }
        if split_by is not None:
            row[split_by] = keys[2]
        rows.append(row)
    out = pd.DataFrame(rows)
    # report empty bins as missing rows with zero counts
    seen = set(zip(out["bin_lo"], out["post_period"])) if len(out) else set()
    for lo in edges:
        for period in (0, 1):
            if (lo, period) not in seen and split_by is None:
                rows.append({
                    "bin_lo": int(lo), "bin_hi": int(lo + bin_width_mm),
                    "post_period": period, "n": 0,
                    "mistake_rate": float("nan"), "se": float("nan"),
                })
    out = pd.DataFrame(rows).sort_values(["post_period", "bin_lo"]).reset_index(drop=True)
    return out


def pooled_mistake_rate(data: pd.DataFrame, window_mm: float, post_period: int | None = None) -> float:
    df = data[data["distance_mm"].abs() < window_mm]
    if post_period is not None:
        df = df[df["post_period"] == post_period]
    if df.empty:
        return float("nan")
    return float(df["incorrect_call"].mean())


def _design_matrix(spec: RegressionSpec, data: pd.DataFrame) -> tuple[np.ndarray, list[str]]:
    cols = [np.ones(len(data))]
    names = ["const"]
    cols.append(data[spec.treatment].to_numpy(dtype=float))
    names.append(spec.treatment)
    for ctrl in spec.categorical_controls:
        if ctrl not in data.columns:
            raise DataFormatError(f"categorical control column missing: {ctrl}")
        levels = sorted(data[ctrl].astype(str).unique())
        for level in levels[1:]:  # lowest key is the reference
            cols.append((data[ctrl].astype(str) == level).to_numpy(dtype=float))
            names.append(f"{ctrl}[{level}]")
    for ctrl in spec.continuous_controls:
        if ctrl not in data.columns:
            raise DataFormatError(f"continuous control column missing: {ctrl}")
        cols.append(data[ctrl].to_numpy(dtype=float))
        names.append(ctrl)
    X = np.column_stack(cols)
    return X, names


def _drop_rank_deficient(X: np.ndarray, names: list[str]) -> tuple[np.ndarray, list[str], list[str]]:
    """Greedy removal of columns that do not increase the rank."""
    keep, dropped = [], []
    rank = 0
    kept_cols = []
    for j in range(X.shape[1]):
        trial = np.column_stack(kept_cols + [X[:, j]]) if kept_cols else X[:, [j]]
        r = np.linalg.matrix_rank(trial)
        if r > rank:
            kept_cols.append(X[:, j])
            keep.append(j)
            rank = r
        else:
            dropped.append(names[j])
    return X[:, keep], [names[j] for j in keep], dropped


def ols_fixed_effects(spec: RegressionSpec, data: pd.DataFrame) -> RegressionResult:
    """Linear probability model with the requested fixed effects."""
    if spec.outcome not in data.columns:
        raise DataFormatError(f"outcome column missing: {spec.outcome}")
    if spec.treatment not in data.columns:
        raise DataFormatError(f"treatment column missing: {spec.treatment}")
    y = data[spec.outcome].to_numpy(dtype=float)
    X, names = _design_matrix(spec, data)
    X, names, dropped = _drop_rank_deficient(X, names)
    if spec.treatment not in names:
        raise NumericalError(
            f"treatment column is collinear with controls; dropped: {dropped}"
        )
    n, k = X.shape
    if n <= k:
        raise NumericalError(f"too few observations ({n}) for {k} parameters")
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < k:
        raise NumericalError("design matrix rank-deficient after pruning")
    resid = y - X @ beta
    xtx_inv = np.linalg.inv(X.T @ X)

    sigma2 = float(resid @ resid) / (n - k)
    v_classical = sigma2 * xtx_inv

    meat_hc = (X * (resid ** 2)[:, None]).T @ X
    v_robust = (n / (n - k)) * xtx_inv @ meat_hc @ xtx_inv

    se_cluster = None
    n_clusters = None
    if spec.cluster is not None:
        if spec.cluster not in data.columns:
            raise DataFormatError(f"cluster column missing: {spec.cluster}")
        clusters = data[spec.cluster].to_numpy()
        uniq = pd.unique(clusters)
        n_clusters = len(uniq)
        if n_clusters < 2:
            raise NumericalError("clustered errors need at least 2 clusters")
        meat = np.zeros((k, k))
        for c in uniq:
            mask = clusters == c
            xg = X[mask]
            ug = resid[mask]
            s = xg.T @ ug
            meat += np.outer(s, s)
        correction = (n_clusters / (n_clusters - 1)) * ((n - 1) / (n - k))
        v_cl = correction * xtx_inv @ meat @ xtx_inv
        se_cluster = {nm: math.sqrt(max(0.0, v_cl[i, i])) for i, nm in enumerate(names)}

    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else float("nan")
    pre = data[data[spec.treatment] == 0]
    baseline = float(pre[spec.outcome].mean()) if len(pre) else float("nan")
    ortho = float(np.abs(X.T @ resid).max()) / n

    result = RegressionResult(
        params={nm: float(beta[i]) for i, nm in enumerate(names)},
        se_classical={nm: math.sqrt(max(0.0, v_classical[i, i])) for i, nm in enumerate(names)},
        se_robust={nm: math.sqrt(max(0.0, v_robust[i, i])) for i, nm in enumerate(names)},
        se_cluster=se_cluster,
        n_obs=n,
        n_clusters=n_clusters,
        baseline_mean=baseline,
        r_squared=r2,
        residual_orthogonality=ortho,
    )
    object.__setattr__(result, "_treatment", spec.treatment)
    object.__setattr__(result, "_dropped_columns", tuple(dropped))
    return result


def interaction_by_bin(
    data: pd.DataFrame,
    treatment: str = "post_period",
    cluster: str | None = "match_id",
    bin_width_mm: float = 20.0,
    window_mm: float = 100.0,
) -> pd.DataFrame:
    """Per-bin treatment effects: bin fixed effects plus treatment-by-bin terms.

    Each interaction coefficient is the within-bin post-minus-pre change in
    the mistake rate; 95% intervals use cluster-robust errors when a
    cluster column is given.
    """
    df = data[data["distance_mm"].abs() < window_mm].copy()
    if df.empty:
        raise DataFormatError("no observations within the distance window")
    df["bin_lo"] = [
        int(math.floor(d / bin_width_mm) * bin_width_mm) for d in df["distance_mm"]
    ]
    bins = sorted(df["bin_lo"].unique())
    y = df["incorrect_call"].to_numpy(dtype=float)
    cols = [np.ones(len(df))]
    names = ["const"]
    for b in bins[1:]:
        cols.append((df["bin_lo"] == b).to_numpy(dtype=float))
        names.append(f"bin[{b}]")
    treat = df[treatment].to_numpy(dtype=float)
    for b in bins:
        cols.append((df["bin_lo"] == b).to_numpy(dtype=float) * treat)
        names.append(f"{treatment}x bin[{b}]")
    X = np.column_stack(cols)
    n, k = X.shape
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < k:
        raise NumericalError("interaction design rank-deficient (empty pre or post cells)")
    resid = y - X @ beta
    xtx_inv = np.linalg.inv(X.T @ X)
    if cluster is not None and cluster in df.columns:
        clusters = df[cluster].to_numpy()
        uniq = pd.unique(clusters)
        meat = np.zeros((k, k))
        for c in uniq:
            mask = clusters == c
            s = X[mask].T @ resid[mask]
            meat += np.outer(s, s)
        g = len(uniq)
        corr = (g / (g - 1)) * ((n - 1) / (n - k)) if g > 1 else 1.0
        v = corr * xtx_inv @ meat @ xtx_inv
    else:
        meat = (X * (resid ** 2)[:, None]).T @ X
        v = (n / (n - k)) * xtx_inv @ meat @ xtx_inv
    rows = []
    for i, nm in enumerate(names):
        if "x bin[" not in nm:
            continue
        b = int(nm.split("bin[")[1].rstrip("]"))
        se = math.sqrt(max(0.0, v[i, i]))
        rows.append({
            "bin_lo": b,
            "bin_hi": b + int(bin_width_mm),
            "coef": float(beta[i]),
            "se": se,
            "ci_low": float(beta[i] - 1.96 * se),
            "ci_high": float(beta[i] + 1.96 * se),
        })
    return pd.DataFrame(rows).sort_values("bin_lo").reset_index(drop=True)


def callin_rate_trend(data: pd.DataFrame, window_mm: float = 20.0) -> dict:
    """Post-period call-in-rate trend for near-line balls.

    Per-tournament call-in rates for |distance| < window, a count-weighted
    least-squares line in the tournament month index (slope reported in
    percentage points per month), and the pre-period mean with a 95%
    binomial band.
    """
    near = data[data["distance_mm"].abs() < window_mm]
    post = near[near["post_period"] == 1]
    pre = near[near["post_period"] == 0]
    per_t = (
        post.groupby(["tournament_id", "month"])
        .agg(n=("called_in", "size"), call_in_rate=("called_in", "mean"))
        .reset_index()
        .sort_values("month")
    )
    result: dict = {"per_tournament": per_t}
    if len(pre):
        p = float(pre["called_in"].mean())
        se = math.sqrt(p * (1 - p) / len(pre))
        result["pre_mean"] = p
        result["pre_band"] = (p - 1.96 * se, p + 1.96 * se)
    else:
        result["pre_mean"] = float("nan")
        result["pre_band"] = (float("nan"), float("nan"))
    if len(per_t) >= 2:
        w = per_t["n"].to_numpy(dtype=float)
        x = per_t["month"].to_numpy(dtype=float)
        yv = per_t["call_in_rate"].to_numpy(dtype=float)
        X = np.column_stack([np.ones_like(x), x])
        W = np.sqrt(w)
        beta, *_ = np.linalg.lstsq(X * W[:, None], yv * W, rcond=None)
        result["intercept"] = float(beta[0])
        result["slope_per_month"] = float(beta[1])
        result["slope_pp_per_month"] = float(beta[1] * 100.0)
    else:
        result["intercept"] = float("nan")
        result["slope_per_month"] = float("nan")
        result["slope_pp_per_month"] = float("nan")
    return result
