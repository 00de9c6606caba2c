import numpy as np
import pytest

from cqr_bench.conformal import calibrate
from cqr_bench.core import Dataset, MethodTag, QuantileLevels
from cqr_bench.data import (
    SplitConfig,
    StandardizationParams,
    load_csv,
    save_csv,
    split,
    standardize_response,
)
from cqr_bench.datasets import bundled_csv_path
from cqr_bench.regressors import QuantileRegressorSpec, RegressorKind, fit
from cqr_bench.bench import evaluate


class TestLoadCsv:
    def _write(self, tmp_path, text, name="data.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_basic_parse(self, tmp_path):
        p = self._write(tmp_path, "a,b,target\n1,2,3\n4,5,6\n7,8,9\n")
        ds = load_csv(p, "target")
        assert ds.d == 2 and len(ds) == 3
        assert ds.y.tolist() == [3.0, 6.0, 9.0]
        assert ds.x[1].tolist() == [4.0, 5.0]

    def test_target_by_index(self, tmp_path):
        p = self._write(tmp_path, "a,b,c\n1,2,3\n")
        ds = load_csv(p, 1)
        assert ds.y.tolist() == [2.0]
        assert ds.x[0].tolist() == [1.0, 3.0]

    def test_missing_target_named(self, tmp_path):
        p = self._write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(ValueError, match="'nope'"):
            load_csv(p, "nope")
        with pytest.raises(ValueError, match="index 5"):
            load_csv(p, 5)

    def test_nan_cell_reports_position(self, tmp_path):
        p = self._write(tmp_path, "a,b\n1,2\n1,NaN\n")
        with pytest.raises(ValueError, match=r"row 2, column 'b'"):
            load_csv(p, "a")

    def test_non_numeric_cell_reports_position(self, tmp_path):
        p = self._write(tmp_path, "a,b\nx,2\n")
        with pytest.raises(ValueError, match=r"row 1, column 'a'"):
            load_csv(p, "b")

    def test_ragged_row(self, tmp_path):
        p = self._write(tmp_path, "a,b\n1,2\n3\n")
        with pytest.raises(ValueError, match="row 2"):
            load_csv(p, "a")

    def test_missing_and_empty_files(self, tmp_path):
        with pytest.raises(ValueError, match="no such file"):
            load_csv(tmp_path / "absent.csv", "a")
        p = self._write(tmp_path, "")
        with pytest.raises(ValueError, match="empty file"):
            load_csv(p, "a")
        p2 = self._write(tmp_path, "a,b\n", name="headeronly.csv")
        with pytest.raises(ValueError, match="no data rows"):
            load_csv(p2, "a")

    def test_round_trip(self, tmp_path, rng):
        ds = Dataset(rng.random((20, 3)), rng.standard_normal(20))
        p = tmp_path / "rt.csv"
        save_csv(ds, p, target_name="y")
        back = load_csv(p, "y")
        assert back == ds

    def test_bundled_dataset_loads(self):
        ds = load_csv(bundled_csv_path(), "strength")
        assert ds.d == 8 and len(ds) == 1030


class TestSplit:
    def _ds(self, n, rng):
        return Dataset(rng.random((n, 2)), rng.standard_normal(n))

    def test_documented_sizes(self, rng):
        ds = self._ds(100, rng)
        tr, ca, te = split(ds, SplitConfig(gamma=0.75, test_fraction=0.2, seed=0))
        assert (len(tr), len(ca), len(te)) == (60, 20, 20)

    def test_fixed_counts_protocol(self, rng):
        ds = self._ds(21613, rng)
        tr, ca, te = split(ds, SplitConfig(gamma=0.5, fixed_counts=(15000, 3000, 3613)))
        assert (len(tr), len(ca), len(te)) == (15000, 3000, 3613)

    def test_fixed_counts_must_partition(self, rng):
        ds = self._ds(100, rng)
        with pytest.raises(ValueError, match="fixed_counts"):
            split(ds, SplitConfig(gamma=0.5, fixed_counts=(50, 40, 20)))

    def test_same_seed_same_partition(self, rng):
        ds = self._ds(97, rng)
        cfg = SplitConfig(gamma=0.6, seed=11)
        a = split(ds, cfg)
        b = split(ds, cfg)
        for pa, pb in zip(a, b):
            assert pa == pb

    def test_partition_is_exact(self, rng):
        ds = self._ds(83, rng)
        tr, ca, te = split(ds, SplitConfig(gamma=0.7, test_fraction=0.25, seed=3))
        assert len(tr) + len(ca) + len(te) == 83
        combined = np.sort(np.concatenate([tr.y, ca.y, te.y]))
        assert np.array_equal(combined, np.sort(ds.y))

    def test_insufficient_samples(self, rng):
        ds = self._ds(3, rng)
        with pytest.raises(ValueError, match="insufficient"):
            split(ds, SplitConfig(gamma=0.9, test_fraction=0.2, seed=0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SplitConfig(gamma=0.0)
        with pytest.raises(ValueError):
            SplitConfig(gamma=0.5, test_fraction=1.0)
        with pytest.raises(ValueError):
            SplitConfig(gamma=0.5, fixed_counts=(10, 0, 5))


class TestStandardize:
    def test_documented_example(self):
        train = Dataset(np.zeros((3, 1)), np.array([-2.0, 2.0, 4.0]))
        other = Dataset(np.zeros((1, 1)), np.array([4.0]))
        tr, ca, te, params = standardize_response(train, other, other)
        assert params.scale == pytest.approx(8.0 / 3.0)
        assert ca.y[0] == pytest.approx(1.5)

    def test_unit_scale_identity(self):
        train = Dataset(np.zeros((2, 1)), np.array([-1.0, 1.0]))
        tr, _, _, params = standardize_response(train, train, train)
        assert params.scale == 1.0
        assert np.array_equal(tr.y, train.y)

    def test_all_zero_rejected(self):
        train = Dataset(np.zeros((2, 1)), np.zeros(2))
        with pytest.raises(ValueError, match="zero"):
            standardize_response(train, train, train)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            StandardizationParams(scale=0.0)

    def test_features_untouched(self, rng):
        train = Dataset(rng.random((5, 2)), rng.standard_normal(5) + 3)
        tr, _, _, _ = standardize_response(train, train, train)
        assert np.array_equal(tr.x, train.x)

    def test_coverage_invariant_for_scale_equivariant_regressor(self, rng):
        # KNN quantiles are order statistics, hence exactly scale-equivariant:
        # conformal coverage must match between raw and standardized responses
        x = rng.random((300, 2))
        y = 5.0 * x[:, 0] + rng.standard_normal(300) * (1 + 4 * x[:, 1])
        ds = Dataset(x, y)
        tr, ca, te = split(ds, SplitConfig(gamma=0.7, seed=4))
        trs, cas, tes, _ = standardize_response(tr, ca, te)
        covs = {}
        for tag, parts in {"raw": (tr, ca, te), "std": (trs, cas, tes)}.items():
            model = fit(QuantileRegressorSpec(RegressorKind.KNN), parts[0], QuantileLevels.symmetric(0.1))
            p = calibrate(MethodTag.CQR, model, parts[1], 0.1)
            covs[tag], _, _ = evaluate(p, parts[2])
        assert covs["raw"] == pytest.approx(covs["std"], abs=1e-12)
