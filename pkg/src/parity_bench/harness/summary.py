"""Summary tables over stored run records."""

import logging

import numpy as np
import pandas as pd
from scipy.stats import binomtest

from ..errors import ConfigurationError
from .runner import BAND_INDEPENDENT

logger = logging.getLogger('parity_bench.summary')

KL_CONTENDERS = ("iqp-parity", "ising-sparse", "ising-dense", "maxent")
DEFAULT_PAIRS = (("iqp-parity", "iqp-mse"),)
INSTANCE_COLUMNS = ["n", "beta", "seed", "sigma", "K"]
CI_METHOD = "normal"
Z_95 = 1.96

CROSS_CLASS_COLUMNS = [
    "model", "mean_kl", "ci95", "median_kl", "kl_wins", "mean_coverage_1000",
    "n", "sigma", "K", "instances", "kl_ties", "kl_clamped", "contender",
    "ci_method",
]
SIZE_SWEEP_COLUMNS = ["model", "n", "median_kl", "mean_kl", "ci95", "count",
                      "beta", "sigma", "K"]
BETA_CURVE_COLUMNS = ["n", "sigma", "K", "model", "beta", "mean_kl", "ci95",
                      "median_kl", "mean_coverage_1000", "count"]
BAND_GRID_COLUMNS = ["n", "beta", "model", "sigma", "K", "mean_kl", "ci95",
                     "median_kl", "count"]
RECOVERY_COLUMNS = ["n", "beta", "sigma", "K", "model", "budget",
                    "mean_recovery", "ci95", "count"]
SCORE_LEVEL_COLUMNS = ["n", "beta", "sigma", "K", "model", "level", "mean_mass"]
PAIRED_COLUMNS = ["model_a", "model_b", "n", "sigma", "K", "pairs", "wins",
                  "losses", "ties", "mean_difference", "p_value"]


def ci95(values):
    """Half-width of the normal-approximation 95% interval; 0 below 2 values."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(Z_95 * values.std(ddof=1) / np.sqrt(values.size))


def records_frame(records):
    """One row per successful record with KL and per-budget coverage."""
    rows = []
    for record in records:
        if not record.ok or record.metrics is None:
            continue
        metrics = record.metrics
        row = {column: record.instance[column] for column in INSTANCE_COLUMNS}
        row["model"] = record.model
        row["kl"] = metrics["kl"]
        row["kl_clamped"] = metrics["kl_clamped"]
        coverage = metrics.get("coverage")
        if coverage:
            for Q, C, R in zip(
                coverage["budgets"], coverage["coverage"], coverage["recovery"]
            ):
                row[f"coverage_{Q}"] = C
                row[f"recovery_{Q}"] = R
        row["score_levels"] = metrics.get("score_levels", [])
        rows.append(row)
    frame = pd.DataFrame(rows)
    for column in INSTANCE_COLUMNS + ["model", "kl", "kl_clamped",
                                      "coverage_1000", "score_levels"]:
        if column not in frame:
            frame[column] = pd.Series(dtype=object if column in
                                      ("model", "score_levels") else float)
    return frame


def _aggregate(frame, keys, value, columns):
    """Mean, ci95, median and count of value per group."""
    if frame.empty:
        return pd.DataFrame(columns=columns)
    grouped = frame.groupby(keys, sort=True)[value]
    stats = grouped.agg(["mean", "median", "size"]).reset_index()
    stats["ci95"] = grouped.apply(ci95).to_numpy()
    return stats.rename(columns={"size": "count"})


def kl_wins(frame, contenders=KL_CONTENDERS):
    """Per-instance winner among contenders; ties go to the first name."""
    pool = frame[frame["model"].isin(contenders)]
    rows = []
    for key, group in pool.groupby(INSTANCE_COLUMNS, sort=True):
        best = group["kl"].min()
        tied = sorted(group.loc[group["kl"] == best, "model"])
        row = dict(zip(INSTANCE_COLUMNS, key))
        row["model"] = tied[0]
        row["tie"] = len(tied) > 1
        rows.append(row)
    return pd.DataFrame(rows, columns=INSTANCE_COLUMNS + ["model", "tie"])


def cross_class_table(frame, contenders=KL_CONTENDERS):
    """Mean KL with CI, median KL, KL wins and mean coverage at Q = 1000.

    kl_clamped counts the instances whose KL hit the floor.
    """
    keys = ["n", "sigma", "K", "model"]
    if frame.empty:
        return pd.DataFrame(columns=CROSS_CLASS_COLUMNS)
    stats = _aggregate(frame, keys, "kl", None).rename(
        columns={"mean": "mean_kl", "median": "median_kl", "count": "instances"}
    )
    coverage = frame.groupby(keys)["coverage_1000"].mean().rename(
        "mean_coverage_1000").reset_index()
    stats = stats.merge(coverage, on=keys, how="left")
    clamped = frame.assign(kl_clamped=frame["kl_clamped"].astype(bool)).groupby(
        keys)["kl_clamped"].sum().reset_index()
    stats = stats.merge(clamped, on=keys, how="left")
    stats["kl_clamped"] = stats["kl_clamped"].fillna(0).astype(int)

    winners = kl_wins(frame, contenders)
    if winners.empty:
        stats["kl_wins"] = 0
        stats["kl_ties"] = 0
    else:
        wins = winners.groupby(keys).agg(
            kl_wins=("tie", "size"), kl_ties=("tie", "sum")).reset_index()
        stats = stats.merge(wins, on=keys, how="left")
        stats["kl_wins"] = stats["kl_wins"].fillna(0).astype(int)
        stats["kl_ties"] = stats["kl_ties"].fillna(0).astype(int)
    stats["contender"] = stats["model"].isin(contenders)
    stats["ci_method"] = CI_METHOD
    return stats[CROSS_CLASS_COLUMNS]


def beta_curves(frame):
    keys = ["n", "sigma", "K", "model", "beta"]
    stats = _aggregate(frame, keys, "kl", BETA_CURVE_COLUMNS)
    if frame.empty:
        return stats
    coverage = frame.groupby(keys)["coverage_1000"].mean().rename(
        "mean_coverage_1000").reset_index()
    stats = stats.merge(coverage, on=keys, how="left").rename(
        columns={"mean": "mean_kl", "median": "median_kl"})
    return stats[BETA_CURVE_COLUMNS]


def band_grid(frame):
    keys = ["n", "beta", "model", "sigma", "K"]
    stats = _aggregate(frame, keys, "kl", BAND_GRID_COLUMNS)
    if frame.empty:
        return stats
    return stats.rename(columns={"mean": "mean_kl", "median": "median_kl"})[
        BAND_GRID_COLUMNS]


def recovery_curves(frame):
    """Mean recovery against budget, one row per (instance group, budget)."""
    columns = [c for c in frame.columns if str(c).startswith("recovery_")]
    if frame.empty or not columns:
        return pd.DataFrame(columns=RECOVERY_COLUMNS)
    long = frame.melt(
        id_vars=INSTANCE_COLUMNS + ["model"], value_vars=columns,
        var_name="budget", value_name="recovery",
    ).dropna(subset=["recovery"])
    long["budget"] = long["budget"].str.slice(len("recovery_")).astype(int)
    keys = ["n", "beta", "sigma", "K", "model", "budget"]
    stats = _aggregate(long, keys, "recovery", RECOVERY_COLUMNS)
    if long.empty:
        return stats
    return stats.rename(columns={"mean": "mean_recovery"})[RECOVERY_COLUMNS]


def n_sweep(frame):
    """Median KL by register width."""
    keys = ["beta", "sigma", "K", "model", "n"]
    stats = _aggregate(frame, keys, "kl", SIZE_SWEEP_COLUMNS)
    if frame.empty:
        return stats
    stats = stats.rename(columns={"mean": "mean_kl", "median": "median_kl"})
    return stats.sort_values(["model", "n"])[SIZE_SWEEP_COLUMNS].reset_index(
        drop=True)


def score_levels(frame):
    """Mean model mass per score level."""
    rows = []
    for _, row in frame.iterrows():
        for level, mass in enumerate(row["score_levels"] or []):
            rows.append({**{c: row[c] for c in ["n", "beta", "sigma", "K",
                                                   "model"]},
                         "level": level, "mass": mass})
    if not rows:
        return pd.DataFrame(columns=SCORE_LEVEL_COLUMNS)
    long = pd.DataFrame(rows)
    keys = ["n", "beta", "sigma", "K", "model", "level"]
    return long.groupby(keys)["mass"].mean().rename("mean_mass").reset_index()[
        SCORE_LEVEL_COLUMNS]


def paired_comparison(frame, model_a, model_b):
    """Per-instance wins of model_a over model_b with a one-sided sign test.

    Band-independent models are paired on (n, beta, seed) only, so they
    match every band of the other model.
    """
    if not isinstance(frame, pd.DataFrame):
        frame = records_frame(frame)
    keys = INSTANCE_COLUMNS
    if model_a in BAND_INDEPENDENT or model_b in BAND_INDEPENDENT:
        keys = ["n", "beta", "seed"]
    left = frame[frame["model"] == model_a]
    right = frame[frame["model"] == model_b]
    if model_a in BAND_INDEPENDENT:
        left, right = right, left
        flip = True
    else:
        flip = False
    paired = left.merge(right[keys + ["kl"]], on=keys, suffixes=("_x", "_y"))
    if paired.empty:
        return pd.DataFrame(columns=PAIRED_COLUMNS)
    kl_a, kl_b = paired["kl_x"], paired["kl_y"]
    if flip:
        kl_a, kl_b = kl_b, kl_a
    paired = paired.assign(diff=(kl_b - kl_a).to_numpy())

    rows = []
    for (n, sigma, K), group in paired.groupby(["n", "sigma", "K"], sort=True):
        wins = int((group["diff"] > 0).sum())
        losses = int((group["diff"] < 0).sum())
        trials = wins + losses
        p_value = (binomtest(wins, trials, 0.5, alternative="greater").pvalue
                   if trials else 1.0)
        rows.append({
            "model_a": model_a, "model_b": model_b, "n": n, "sigma": sigma,
            "K": K, "pairs": len(group), "wins": wins, "losses": losses,
            "ties": len(group) - trials,
            "mean_difference": float(group["diff"].mean()),
            "p_value": float(p_value),
        })
    return pd.DataFrame(rows, columns=PAIRED_COLUMNS)


SUMMARIES = {
    "cross_class": cross_class_table,
    "size_sweep": n_sweep,
    "beta_curves": beta_curves,
    "band_grid": band_grid,
    "recovery_curves": recovery_curves,
    "score_levels": score_levels,
}


def summarize(records, grouping=None, contenders=KL_CONTENDERS,
              pairs=DEFAULT_PAIRS):
    """Build summary tables from run records.

    Args:
        records: Iterable of RunRecords.
        grouping: Names from SUMMARIES plus "paired"; all when None.
        contenders: Models competing for KL wins.
        pairs: (model_a, model_b) pairs for the paired comparison.

    Returns:
        dict: Name to DataFrame.
    """
    frame = records_frame(records)
    names = list(SUMMARIES) + ["paired"] if grouping is None else list(grouping)
    tables = {}
    for name in names:
        if name == "paired":
            parts = [paired_comparison(frame, a, b) for a, b in pairs]
            parts = [p for p in parts if not p.empty]
            tables[name] = (pd.concat(parts, ignore_index=True) if parts
                            else pd.DataFrame(columns=PAIRED_COLUMNS))
        elif name == "cross_class":
            tables[name] = cross_class_table(frame, contenders)
        elif name in SUMMARIES:
            tables[name] = SUMMARIES[name](frame)
        else:
            raise ConfigurationError(f"unknown summary '{name}'")
    logger.info("Summarised %s records into %s tables", len(frame), len(tables))
    return tables
