"""End-to-end selective training loop."""

import dataclasses

import numpy as np
import pytest

from ksetsel.datasets import LabelNoiseSpec, apply_label_noise, make_blobs
from ksetsel.errors import ParameterError
from ksetsel.selection import Strategy
from ksetsel.training import TrainConfig, train_selective


def small_noisy_dataset(seed=0):
    data = make_blobs(120, 4, 3, separation=8.0, seed=seed)
    return apply_label_noise(data, LabelNoiseSpec(kind="sym", rate=0.4, seed=seed + 1))


def strip_wall(metrics):
    # wall time is excluded from determinism, and nan != nan for test_acc
    out = []
    for m in metrics:
        m = dataclasses.replace(m, wall_ms=0.0)
        if np.isnan(m.test_acc):
            m = dataclasses.replace(m, test_acc=-1.0)
        out.append(m)
    return out


class TestTrainSelective:
    def test_fpl_at_eta_zero_equals_naive(self):
        data = small_noisy_dataset()
        base = dict(k=30, epochs=8, hidden=16, lr=0.05, batch_size=16, seed=42)
        fpl = train_selective(data, None, TrainConfig(strategy=Strategy.FPL, eta=0.0, **base))
        naive = train_selective(data, None, TrainConfig(strategy=Strategy.NAIVE, eta=0.0, **base))
        assert strip_wall(fpl.metrics) == strip_wall(naive.metrics)
        for a, b in zip(fpl.selections, naive.selections):
            np.testing.assert_array_equal(a.indices, b.indices)

    def test_deterministic_across_reruns(self):
        data = small_noisy_dataset()
        config = TrainConfig(strategy=Strategy.FPL, k=30, epochs=6, eta=2.0,
                             hidden=16, lr=0.05, batch_size=16, seed=7)
        a = train_selective(data, None, config)
        b = train_selective(data, None, config)
        assert strip_wall(a.metrics) == strip_wall(b.metrics)
        for name in ("w1", "b1", "w2", "b2"):
            np.testing.assert_array_equal(getattr(a.model, name), getattr(b.model, name))

    def test_seed_changes_trajectory(self):
        data = small_noisy_dataset()
        base = dict(strategy=Strategy.FPL, k=30, epochs=6, eta=2.0,
                    hidden=16, lr=0.05, batch_size=16)
        a = train_selective(data, None, TrainConfig(seed=1, **base))
        b = train_selective(data, None, TrainConfig(seed=2, **base))
        assert [m.selection_risk for m in a.metrics] != [m.selection_risk for m in b.metrics]

    def test_epoch_metrics_shape_and_ranges(self):
        data = small_noisy_dataset()
        test_data = make_blobs(60, 4, 3, separation=8.0, seed=99)
        result = train_selective(
            data,
            test_data,
            TrainConfig(strategy=Strategy.FPL, k=24, epochs=5, eta=1.0,
                        hidden=16, lr=0.05, batch_size=16, seed=3),
        )
        assert len(result.metrics) == 5
        assert len(result.selections) == 5
        assert [m.epoch for m in result.metrics] == [1, 2, 3, 4, 5]
        for m in result.metrics:
            # selection risk is a sum of k per-sample risks in [0, 1]
            assert 0.0 <= m.selection_risk <= 24.0
            assert 0.0 <= m.label_precision <= 1.0
            assert 0.0 <= m.train_acc <= 1.0
            assert 0.0 <= m.test_acc <= 1.0
            assert m.wall_ms >= 0.0
        for sel in result.selections:
            assert sel.k == 24

    def test_no_test_set_reports_nan(self):
        data = small_noisy_dataset()
        result = train_selective(
            data,
            None,
            TrainConfig(strategy=Strategy.NAIVE, k=20, epochs=3, eta=0.0,
                        hidden=8, lr=0.05, batch_size=16, seed=0),
        )
        assert all(np.isnan(m.test_acc) for m in result.metrics)

    def test_mismatched_test_set_rejected(self):
        from ksetsel.errors import InputError

        data = small_noisy_dataset()
        wrong_dim = make_blobs(30, 5, 3, separation=8.0, seed=1)
        with pytest.raises(InputError):
            train_selective(data, wrong_dim,
                            TrainConfig(strategy=Strategy.FPL, k=10, epochs=2, seed=0))

    def test_cum_regret_is_prefix_consistent(self):
        # Regret at epoch t uses hindsight over epochs 1..t, so the final
        # regret is bounded by the realized total and never negative.
        data = small_noisy_dataset()
        result = train_selective(
            data,
            None,
            TrainConfig(strategy=Strategy.FPL, k=20, epochs=6, eta=1.0,
                        hidden=16, lr=0.05, batch_size=16, seed=5),
        )
        total = sum(m.selection_risk for m in result.metrics)
        assert result.cum.epochs_seen == 6
        assert result.metrics[-1].cum_regret >= -1e-9
        assert result.metrics[-1].cum_regret <= total + 1e-9

    def test_random_with_k_equal_n_selects_everything(self):
        data = small_noisy_dataset()
        with pytest.warns(UserWarning):
            result = train_selective(
                data,
                None,
                TrainConfig(strategy=Strategy.RANDOM, k=120, epochs=3, eta=0.0,
                            hidden=8, lr=0.05, batch_size=16, seed=0),
            )
        for sel in result.selections:
            np.testing.assert_array_equal(sel.indices, np.arange(120))

    def test_selection_favors_clean_labels(self):
        # Directional smoke test: after a few epochs on well-separated blobs,
        # FPL's picks should beat the clean base rate (60% here).
        data = small_noisy_dataset(seed=11)
        result = train_selective(
            data,
            None,
            TrainConfig(strategy=Strategy.FPL, k=30, epochs=15, eta=0.5,
                        hidden=32, lr=0.05, batch_size=16, seed=13),
        )
        assert result.metrics[-1].label_precision > 0.6

    def test_invalid_k(self):
        data = small_noisy_dataset()
        with pytest.raises(ParameterError):
            TrainConfig(strategy=Strategy.FPL, k=0, epochs=2, eta=0.0, seed=0)
        with pytest.raises(ParameterError):
            train_selective(data, None,
                            TrainConfig(strategy=Strategy.FPL, k=121, epochs=2, eta=0.0, seed=0))

    def test_negative_eta_rejected(self):
        with pytest.raises(ParameterError):
            TrainConfig(strategy=Strategy.FPL, k=10, epochs=2, eta=-1.0, seed=0)
