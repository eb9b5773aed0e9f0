"""
Unit tests for the summary tables
"""

import numpy as np
import pandas as pd
import pytest

from src.parity_bench.errors import ConfigurationError
from src.parity_bench.harness.store import STATUS_FAILED, RunRecord, record_key
from src.parity_bench.harness.summary import (
    CROSS_CLASS_COLUMNS,
    PAIRED_COLUMNS,
    ci95,
    cross_class_table,
    kl_wins,
    paired_comparison,
    records_frame,
    summarize,
)


def _record(model, kl, seed=111, beta=0.9, sigma=1.0, K=512, n=12,
            coverage=0.05, status="ok", kl_clamped=False):
    instance = {"n": n, "beta": beta, "seed": seed, "m": 200, "sigma": sigma,
                "K": K, "tau": 0.1}
    metrics = None
    if status == "ok":
        metrics = {
            "kl": kl,
            "kl_clamped": kl_clamped,
            "coverage": {
                "budgets": [1000, 2000],
                "expected_discoveries": [coverage * 1000, coverage * 1500],
                "coverage": [coverage, coverage * 0.75],
                "recovery": [coverage * 2, coverage * 3],
                "elite_size": 500,
            },
            "score_levels": [0.25, 0.75],
        }
    return RunRecord(
        key=record_key(instance, model, "v"),
        instance=instance,
        model=model,
        config_version="v",
        status=status,
        metrics=metrics,
    )


class TestHelpers:
    """Unit tests for ci95 and records_frame."""

    def test_ci95(self):
        """Test the normal-approximation half width."""
        assert ci95([1.0]) == 0.0
        assert ci95([]) == 0.0
        assert ci95([1.0, 2.0, 3.0]) == pytest.approx(1.96 / np.sqrt(3))

    def test_records_frame_skips_failed_runs(self):
        """Test only successful records become rows."""
        frame = records_frame([
            _record("maxent", 0.3),
            _record("iqp-parity", None, status=STATUS_FAILED),
        ])
        assert frame["model"].tolist() == ["maxent"]
        assert frame.loc[0, "coverage_1000"] == 0.05
        assert frame.loc[0, "recovery_2000"] == pytest.approx(0.15)

    def test_empty_frame_has_columns(self):
        """Test the frame of no records."""
        frame = records_frame([])
        assert frame.empty
        assert {"model", "kl", "coverage_1000", "seed"} <= set(frame.columns)


class TestKlWins:
    """Unit tests for per-instance winners."""

    def test_lowest_kl_wins(self):
        """Test the winner among contenders, ignoring references."""
        frame = records_frame([
            _record("iqp-parity", 0.2),
            _record("maxent", 0.1),
            _record("uniform", 0.01),
        ])
        winners = kl_wins(frame)
        assert winners["model"].tolist() == ["maxent"]
        assert not winners["tie"].any()

    def test_ties_go_to_first_name(self):
        """Test tie-breaking by name with the tie flagged."""
        frame = records_frame([
            _record("maxent", 0.1),
            _record("iqp-parity", 0.1),
        ])
        winners = kl_wins(frame)
        assert winners["model"].tolist() == ["iqp-parity"]
        assert winners["tie"].tolist() == [True]


class TestCrossClassTable:
    """Unit tests for the cross-class table."""

    def test_statistics(self):
        """Test means, wins and coverage per model."""
        records = []
        for seed, (parity, dense) in enumerate([(0.1, 0.2), (0.3, 0.2),
                                                 (0.2, 0.4)]):
            records.append(_record("iqp-parity", parity, seed=seed, coverage=0.06))
            records.append(_record("ising-dense", dense, seed=seed, coverage=0.02))
            records.append(_record("uniform", 1.0, seed=seed, coverage=0.01))
        table = cross_class_table(records_frame(records)).set_index("model")
        assert list(table.reset_index().columns) == CROSS_CLASS_COLUMNS
        assert table.loc["iqp-parity", "mean_kl"] == pytest.approx(0.2)
        assert table.loc["iqp-parity", "median_kl"] == pytest.approx(0.2)
        assert table.loc["iqp-parity", "kl_wins"] == 2
        assert table.loc["ising-dense", "kl_wins"] == 1
        assert table.loc["uniform", "kl_wins"] == 0
        assert not table.loc["uniform", "contender"]
        assert table.loc["iqp-parity", "instances"] == 3
        assert table.loc["iqp-parity", "mean_coverage_1000"] == pytest.approx(0.06)
        assert table.loc["ising-dense", "ci95"] == pytest.approx(
            ci95([0.2, 0.2, 0.4])
        )
        assert table["kl_clamped"].tolist() == [0, 0, 0]

    def test_clamped_count(self):
        """Test instances whose KL hit the floor are counted per model."""
        table = cross_class_table(records_frame([
            _record("maxent", 1e-12, seed=1, kl_clamped=True),
            _record("maxent", 0.3, seed=2),
            _record("maxent", 1e-12, seed=3, kl_clamped=True),
            _record("uniform", 0.7, seed=1),
        ])).set_index("model")
        assert table.loc["maxent", "kl_clamped"] == 2
        assert table.loc["uniform", "kl_clamped"] == 0
        assert table.loc["maxent", "instances"] == 3

    def test_no_contenders(self):
        """Test a table with reference models only."""
        table = cross_class_table(records_frame([_record("uniform", 0.7)]))
        assert table["kl_wins"].tolist() == [0]


class TestPairedComparison:
    """Unit tests for the paired sign test."""

    def test_sign_test(self):
        """Test wins, losses and the one-sided p-value."""
        records = []
        for seed, (parity, mse) in enumerate(
            [(0.1, 0.2), (0.1, 0.3), (0.2, 0.5), (0.3, 0.4), (0.6, 0.5)]
        ):
            records.append(_record("iqp-parity", parity, seed=seed))
            records.append(_record("iqp-mse", mse, seed=seed))
        result = paired_comparison(records, "iqp-parity", "iqp-mse")
        row = result.iloc[0]
        assert (row["pairs"], row["wins"], row["losses"], row["ties"]) == (5, 4, 1, 0)
        assert row["p_value"] == pytest.approx(6 / 32)
        assert row["mean_difference"] == pytest.approx(0.12)

    def test_band_independent_partner_matches_every_band(self):
        """Test pairing across an ablation grid."""
        records = [
            _record("iqp-parity", 0.1, sigma=1.0, K=512),
            _record("iqp-parity", 0.5, sigma=2.0, K=128),
            _record("iqp-mse", 0.3, sigma=1.0, K=512),
        ]
        result = paired_comparison(records, "iqp-parity", "iqp-mse")
        assert len(result) == 2
        by_band = result.set_index(["sigma", "K"])
        assert by_band.loc[(1.0, 512), "wins"] == 1
        assert by_band.loc[(2.0, 128), "losses"] == 1

    def test_order_of_models(self):
        """Test a band-independent first model keeps its orientation."""
        records = [
            _record("iqp-parity", 0.1),
            _record("iqp-mse", 0.3),
        ]
        result = paired_comparison(records, "iqp-mse", "iqp-parity")
        assert result.iloc[0]["losses"] == 1
        assert result.iloc[0]["mean_difference"] == pytest.approx(-0.2)

    def test_no_pairs(self):
        """Test an empty result."""
        result = paired_comparison([_record("maxent", 0.1)], "iqp-parity",
                                   "iqp-mse")
        assert result.empty
        assert list(result.columns) == PAIRED_COLUMNS


class TestSummarize:
    """Unit tests for summarize."""

    def test_all_tables(self):
        """Test the default set of tables."""
        records = [_record("iqp-parity", 0.1, beta=b, seed=s)
                   for b in (0.5, 0.9) for s in (1, 2)]
        records += [_record("iqp-mse", 0.2, beta=b, seed=s)
                    for b in (0.5, 0.9) for s in (1, 2)]
        tables = summarize(records)
        assert set(tables) == {
            "cross_class", "size_sweep", "beta_curves", "band_grid",
            "recovery_curves", "score_levels", "paired",
        }
        curves = tables["beta_curves"]
        assert len(curves) == 4
        assert set(curves["count"]) == {2}
        recovery = tables["recovery_curves"]
        assert sorted(recovery["budget"].unique()) == [1000, 2000]
        levels = tables["score_levels"]
        assert levels["mean_mass"].tolist()[:2] == [0.25, 0.75]
        assert tables["paired"].iloc[0]["wins"] == 4

    def test_selected_tables(self):
        """Test grouping restricts the output."""
        tables = summarize([_record("maxent", 0.1)], grouping=["size_sweep"])
        assert list(tables) == ["size_sweep"]
        assert tables["size_sweep"].iloc[0]["median_kl"] == 0.1

    def test_empty_records(self):
        """Test every table is empty but typed."""
        for table in summarize([]).values():
            assert isinstance(table, pd.DataFrame)
            assert table.empty

    def test_unknown_table(self):
        """Test an unknown summary name."""
        with pytest.raises(ConfigurationError):
            summarize([], grouping=["figure_9"])
