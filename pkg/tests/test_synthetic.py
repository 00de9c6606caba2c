import math

import numpy as np
import pytest
from scipy.stats import norm

from cqr_bench import synthetic
from cqr_bench.synthetic import SyntheticConfig


class TestConfig:
    def test_default_beta(self):
        cfg = SyntheticConfig()
        assert cfg.d == 100
        assert cfg.beta[:5].tolist() == [1.0] * 5
        assert not np.any(cfg.beta[5:])

    def test_validation(self):
        with pytest.raises(ValueError):
            SyntheticConfig(d=0)
        with pytest.raises(ValueError):
            SyntheticConfig(d=3, beta=np.ones(2))
        with pytest.raises(ValueError, match="nonzero"):
            SyntheticConfig(d=3, beta=np.zeros(3))
        with pytest.raises(ValueError):
            SyntheticConfig(seed=-1)


class TestLocationScale:
    def test_location_values(self):
        # 2*sin(pi) + pi = pi; 2*sin(pi/2) + pi/2 = 2 + pi/2
        assert math.isclose(synthetic.location(1.0), math.pi, rel_tol=1e-12)
        assert math.isclose(synthetic.location(0.5), 2.0 + math.pi / 2, rel_tol=1e-12)

    def test_scale(self):
        assert synthetic.noise_scale(0.0) == 1.0
        assert math.isclose(synthetic.noise_scale(1.0), math.sqrt(2.0), rel_tol=1e-12)


class TestGenerate:
    def test_shapes_and_determinism(self):
        cfg = SyntheticConfig(seed=9)
        a = synthetic.generate(cfg, 200)
        b = synthetic.generate(cfg, 200)
        assert a.x.shape == (200, 100) and a.y.shape == (200,)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
        c = synthetic.generate(SyntheticConfig(seed=10), 200)
        assert not np.array_equal(a.y, c.y)

    def test_n_domain(self):
        with pytest.raises(ValueError):
            synthetic.generate(SyntheticConfig(), 0)

    def test_index_mean(self):
        # beta . X sums five independent Unif(0,1): mean 2.5
        ds = synthetic.generate(SyntheticConfig(seed=3), 10**5)
        s = ds.x @ SyntheticConfig().beta
        assert abs(float(s.mean()) - 2.5) < 0.02

    def test_features_in_unit_cube(self):
        ds = synthetic.generate(SyntheticConfig(seed=4), 500)
        assert ds.x.min() >= 0.0 and ds.x.max() <= 1.0


class TestNormalQuantile:
    def test_against_scipy(self):
        taus = np.concatenate(
            [np.linspace(1e-6, 1 - 1e-6, 4001), [1e-8, 1e-7, 1 - 1e-7, 1 - 1e-8]]
        )
        for tau in taus:
            assert abs(synthetic.normal_quantile(float(tau)) - norm.ppf(tau)) < 1e-8

    def test_median_is_zero(self):
        assert synthetic.normal_quantile(0.5) == 0.0

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.5, 2.0])
    def test_domain(self, tau):
        with pytest.raises(ValueError):
            synthetic.normal_quantile(tau)


class TestOracleQuantile:
    def test_median_equals_location(self, rng):
        cfg = SyntheticConfig(seed=1)
        for _ in range(20):
            x = rng.random(cfg.d)
            s = float(x @ cfg.beta)
            assert math.isclose(
                synthetic.oracle_quantile(cfg, x, 0.5), synthetic.location(s), rel_tol=1e-12
            )

    def test_unit_scale_point(self):
        # beta . x = 0 at the origin: the 0.95 quantile is z_{0.95}
        cfg = SyntheticConfig()
        got = synthetic.oracle_quantile(cfg, np.zeros(cfg.d), 0.95)
        assert abs(got - norm.ppf(0.95)) < 1e-8

    def test_symmetric_width_identity(self, rng):
        cfg = SyntheticConfig(seed=2)
        for _ in range(20):
            x = rng.random(cfg.d)
            s = float(x @ cfg.beta)
            width = synthetic.oracle_quantile(cfg, x, 0.95) - synthetic.oracle_quantile(
                cfg, x, 0.05
            )
            expected = 2.0 * norm.ppf(0.95) * math.sqrt(1.0 + s * s)
            assert math.isclose(width, expected, rel_tol=1e-8)

    def test_strictly_increasing_in_tau(self, rng):
        cfg = SyntheticConfig(seed=5)
        x = rng.random(cfg.d)
        qs = [synthetic.oracle_quantile(cfg, x, t) for t in np.linspace(0.01, 0.99, 25)]
        assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            synthetic.oracle_quantile(SyntheticConfig(), np.zeros(7), 0.5)
        with pytest.raises(ValueError):
            synthetic.oracle_quantile(SyntheticConfig(), np.zeros(100), 1.5)

    def test_batch_matches_single(self, rng):
        cfg = SyntheticConfig(seed=6)
        x = rng.random((10, cfg.d))
        batch = synthetic.oracle_quantile_batch(cfg, x, 0.9)
        for i in range(10):
            assert synthetic.oracle_quantile(cfg, x[i], 0.9) == batch[i]

    def test_conditional_coverage_at_fixed_x(self, rng):
        # draw noise directly at one covariate: the oracle band must cover 90%
        cfg = SyntheticConfig(seed=7)
        x = rng.random(cfg.d)
        s = float(x @ cfg.beta)
        n = 10**5
        y = synthetic.location(s) + rng.standard_normal(n) * synthetic.noise_scale(s)
        lo = synthetic.oracle_quantile(cfg, x, 0.05)
        hi = synthetic.oracle_quantile(cfg, x, 0.95)
        cov = float(np.mean((y >= lo) & (y <= hi)))
        se = math.sqrt(0.9 * 0.1 / n)
        assert abs(cov - 0.9) < 3 * se


class TestOracleExpectedWidth:
    def test_zero_index_closed_form(self):
        # degenerate all-zero beta (test-only override): scale is exactly 1
        cfg = SyntheticConfig()
        object.__setattr__(cfg, "beta", np.zeros(cfg.d))
        got = synthetic.oracle_expected_width(cfg, 0.1, mc_samples=100)
        assert math.isclose(got, 2.0 * norm.ppf(0.95), rel_tol=1e-8)

    def test_with_se(self):
        w, se = synthetic.oracle_expected_width(
            SyntheticConfig(), 0.1, mc_samples=20_000, with_se=True
        )
        assert se > 0.0
        assert abs(w - 8.898) < 5 * se + 0.02

    def test_domain(self):
        with pytest.raises(ValueError):
            synthetic.oracle_expected_width(SyntheticConfig(), 0.1, mc_samples=0)
        with pytest.raises(ValueError):
            synthetic.oracle_expected_width(SyntheticConfig(), 1.5)
