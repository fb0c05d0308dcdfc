import numpy as np
import pytest

from drauc import (DataFormatError, Dataset, auc_mann_whitney, corrupt,
                   gen_synthetic, load_csv, make_long_tailed, save_csv, score,
                   ScoringModel)


class TestGenSynthetic:
    def test_normalization_contract(self):
        ds = gen_synthetic(100, 3, seed=0)
        assert ds.features.min() >= 0.0 and ds.features.max() <= 1.0
        assert np.allclose(ds.features.min(axis=0), 0.0)
        assert np.allclose(ds.features.max(axis=0), 1.0)

    def test_deterministic(self):
        a = gen_synthetic(50, 2, seed=9)
        b = gen_synthetic(50, 2, seed=9)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_half_and_half(self):
        ds = gen_synthetic(101, 2, seed=0)
        assert ds.n_pos == 50 and ds.n_neg == 51
        assert ds.p_hat == 50 / 101

    def test_collapsed_blobs_are_separable(self):
        ds = gen_synthetic(60, 2, sigma=1e-6, seed=1)
        scorer = ScoringModel("linear-sigmoid", np.array([1.0, 1.0, 0.0]), 2)
        s = score(scorer, ds.features)
        assert auc_mann_whitney(s[ds.labels == 1], s[ds.labels == 0]) == 1.0

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            gen_synthetic(3, 2, seed=0)
        with pytest.raises(ValueError):
            gen_synthetic(10, 0, seed=0)
        with pytest.raises(ValueError):
            gen_synthetic(10, 2, sigma=0.0, seed=0)


class TestMakeLongTailed:
    def test_keep_count_arithmetic(self):
        feats = np.random.default_rng(0).uniform(0, 1, size=(200, 2))
        labels = np.concatenate([np.ones(100, dtype=int), np.zeros(100, dtype=int)])
        ds = Dataset.from_arrays(feats, labels)
        lt = make_long_tailed(ds, 0.1, seed=0)
        assert lt.n_pos == 11  # floor(0.1 * 100 / 0.9)
        assert lt.n_neg == 100
        assert lt.p_hat == 11 / 111

    def test_ratio_at_current_p_hat_keeps_everything(self):
        ds = gen_synthetic(40, 2, seed=2)
        same = make_long_tailed(ds, ds.p_hat, seed=5)
        assert np.array_equal(same.features, ds.features)
        assert np.array_equal(same.labels, ds.labels)

    def test_zero_positive_guard(self):
        feats = np.random.default_rng(1).uniform(0, 1, size=(102, 1))
        labels = np.concatenate([np.ones(2, dtype=int), np.zeros(100, dtype=int)])
        ds = Dataset.from_arrays(feats, labels)
        with pytest.raises(ValueError):
            make_long_tailed(ds, 0.001, seed=0)

    def test_ratio_above_current_rejected(self):
        ds = gen_synthetic(40, 2, seed=3)
        with pytest.raises(ValueError):
            make_long_tailed(ds, 0.9, seed=0)

    def test_negatives_untouched(self):
        ds = gen_synthetic(100, 2, seed=4)
        lt = make_long_tailed(ds, 0.2, seed=4)
        assert np.array_equal(ds.features[ds.labels == 0],
                              lt.features[lt.labels == 0])

    def test_p_hat_recomputed(self):
        ds = gen_synthetic(100, 2, seed=5)
        lt = make_long_tailed(ds, 0.25, seed=5)
        assert lt.p_hat == (lt.labels == 1).mean()


class TestCorrupt:
    def test_sigma_zero_is_identity(self):
        ds = gen_synthetic(30, 2, seed=6)
        same = corrupt(ds, 0.0, seed=1)
        assert np.array_equal(same.features, ds.features)

    def test_outputs_clipped(self):
        ds = gen_synthetic(30, 2, seed=7)
        noisy = corrupt(ds, 5.0, seed=1)
        assert noisy.features.min() >= 0.0 and noisy.features.max() <= 1.0
        assert np.array_equal(noisy.labels, ds.labels)

    def test_deterministic(self):
        ds = gen_synthetic(30, 2, seed=8)
        a = corrupt(ds, 0.2, seed=3)
        b = corrupt(ds, 0.2, seed=3)
        assert np.array_equal(a.features, b.features)

    def test_negative_sigma_rejected(self):
        ds = gen_synthetic(30, 2, seed=8)
        with pytest.raises(ValueError):
            corrupt(ds, -0.1, seed=0)


class TestCsvRoundTrip:
    def test_save_load_bitwise(self, tmp_path):
        ds = gen_synthetic(60, 3, seed=10)
        path = tmp_path / "ds.csv"
        save_csv(ds, path)
        back = load_csv(path)
        assert np.array_equal(back.features, ds.features)
        assert np.array_equal(back.labels, ds.labels)
        assert back.p_hat == ds.p_hat

    def test_file_bytes_stable(self, tmp_path):
        ds = gen_synthetic(60, 2, seed=11)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_csv(ds, p1)
        save_csv(load_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_constant_column_maps_to_half(self, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("y,x1,x2\n1,3.0,0.2\n0,3.0,0.8\n", encoding="utf-8")
        ds = load_csv(path)
        assert np.all(ds.features[:, 0] == 0.5)
        assert ds.scaler_min[0] == ds.scaler_max[0] == 3.0

    def test_normalization_idempotent(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("y,x1\n1,5.0\n0,1.0\n0,3.0\n", encoding="utf-8")
        once = load_csv(path)
        save_csv(once, path)
        twice = load_csv(path)
        assert np.array_equal(once.features, twice.features)


class TestCsvErrors:
    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,x1\n1,0.5\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="line 1"):
            load_csv(path)

    def test_label_out_of_range_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1,0.1\n0,0.2\n1,0.3\n2,0.4\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="line 5"):
            load_csv(path)

    def test_non_numeric_field(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1,oops\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="line 2"):
            load_csv(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1,x2\n1,0.1,0.2\n0,0.3\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="line 3"):
            load_csv(path)

    def test_empty_data(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n", encoding="utf-8")
        with pytest.raises(DataFormatError):
            load_csv(path)


class TestDatasetValidation:
    def test_rejects_out_of_box_features(self):
        with pytest.raises(ValueError):
            Dataset.from_arrays(np.array([[1.5]]), np.array([1]))

    def test_rejects_non_binary_labels(self):
        with pytest.raises(ValueError):
            Dataset.from_arrays(np.array([[0.5]]), np.array([2]))

    def test_p_hat_cached_consistently(self):
        ds = gen_synthetic(80, 2, seed=12)
        assert ds.p_hat == (ds.labels == 1).mean()
