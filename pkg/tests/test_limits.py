"""Limiting diffusions: closed-form coefficients, exactness of the random
slope, invariant-law oracle, explosion handling, OU moments."""

import numpy as np
import pytest
from scipy import stats as sps

from meanfield.core import ConfigError, DisorderLaw, SeedSpec
from meanfield.limits import (
    LimitPaths,
    LimitSdeSpec,
    LinearOuSystem,
    SdeKind,
    StoppingKind,
    StoppingRule,
    cubic_drift_coefficient,
    cubic_noise_amplitude,
    radial_moments,
    simulate_limit,
)


class TestCoefficients:
    def test_closed_form_values(self):
        assert cubic_drift_coefficient(0.0) == 0.25
        assert abs(cubic_drift_coefficient(0.5 / np.sqrt(2.0))) < 1e-14
        assert cubic_drift_coefficient(0.25) == pytest.approx(0.43573, abs=5e-6)
        assert cubic_drift_coefficient(0.4) == pytest.approx(-3.4788, abs=2e-4)
        assert cubic_noise_amplitude(0.0) == np.sqrt(0.5)

    def test_sign_dichotomy(self):
        for w in (0.0, 0.1, 0.2, 0.3, 0.35):
            assert cubic_drift_coefficient(w) > 0.0
        for w in (0.36, 0.4, 0.45, 0.49):
            assert cubic_drift_coefficient(w) < 0.0

    def test_coefficient_tables(self):
        t = LimitSdeSpec.kuramoto_cubic(0.0).coefficient_table()
        assert t["cubic_drift"] == 0.25 and t["noise"] == np.sqrt(0.5)
        t1 = LimitSdeSpec.cw_cubic().coefficient_table()
        assert t1 == {"cubic_drift": 2.0 / 3.0, "noise": 2.0}


class TestRandomSlope:
    def test_homogeneous_law_is_frozen_at_zero(self):
        spec = LimitSdeSpec.cw_random_slope(DisorderLaw.delta(), 1.0)
        assert spec.slope_variance == 0.0
        paths = simulate_limit(spec, 2.0, 1e-3, 50, SeedSpec(1))
        assert np.abs(paths.values).max() == 0.0

    def test_exact_linear_ramp_and_variance(self):
        law = DisorderLaw.symmetric_pair(0.3)
        beta = 1.1164
        spec = LimitSdeSpec.cw_random_slope(law, beta)
        v = spec.slope_variance
        n = 4000
        paths = simulate_limit(spec, 2.0, 1e-3, n, SeedSpec(3), n_snapshots=5)
        # zero discretization error: columns are exact multiples
        ratio = paths.values[:, -1, 0] / paths.times[-1]
        for j in range(1, paths.times.size):
            assert np.abs(paths.values[:, j, 0] - ratio * paths.times[j]).max() < 1e-12
        var_hat = paths.values[:, -1, 0].var(ddof=1)
        target = 4.0 * v * paths.times[-1] ** 2
        se = target * np.sqrt(2.0 / (n - 1))
        assert abs(var_hat - target) < 3.0 * se


class TestCubic2d:
    def test_omega_zero_reduction_matches_declared_system(self):
        spec = LimitSdeSpec.kuramoto_cubic(0.0)
        table = spec.coefficient_table()
        assert table["cubic_drift"] == 0.25
        assert table["noise"] == np.sqrt(0.5)

    def test_explosive_requires_stopping(self):
        spec = LimitSdeSpec.kuramoto_cubic(0.4)
        with pytest.raises(ConfigError, match="localization"):
            simulate_limit(spec, 1.0, 1e-3, 4, SeedSpec(0))

    def test_cubic_needs_fine_dt(self):
        with pytest.raises(ConfigError):
            simulate_limit(LimitSdeSpec.cw_cubic(), 1.0, 1e-2, 4, SeedSpec(0))

    def test_driftless_radius_moment(self):
        # at omega = 1/(2 sqrt 2) the cubic coefficient vanishes: |V(t)|^2 is
        # a pure 2-d Brownian radius with mean (1 + 4 w^2) t = 1.5 t
        w = 0.5 / np.sqrt(2.0)
        spec = LimitSdeSpec.kuramoto_cubic(w)
        mom = radial_moments(spec, 1.0, 30_000, 1e-3, SeedSpec(5))
        assert abs(mom.mean - 1.5) < 3.0 * mom.se_mean

    def test_ergodic_invariant_law_quadrature_oracle(self):
        # gradient diffusion: stationary density prop. to
        # exp(-c |v|^4 / (2 sigma^2)); compare radial CDF by KS
        spec = LimitSdeSpec.kuramoto_cubic(0.0)
        paths = simulate_limit(spec, 10.0, 1e-3, 4000, SeedSpec(11), n_snapshots=2)
        r = np.hypot(paths.marginal(-1)[:, 0], paths.marginal(-1)[:, 1])

        c = cubic_drift_coefficient(0.0)
        sig2 = cubic_noise_amplitude(0.0) ** 2
        grid = np.linspace(0.0, 6.0, 20_001)
        dens = grid * np.exp(-c * grid**4 / (2.0 * sig2))
        cdf = np.cumsum(dens)
        cdf /= cdf[-1]
        rng = SeedSpec(12).generator("oracle-radial")
        oracle = np.interp(rng.random(40_000), cdf, grid)
        res = sps.ks_2samp(r, oracle)
        assert res.pvalue > 0.01

    def test_rotational_invariance(self):
        # two independent noise streams give the same radial law
        spec = LimitSdeSpec.kuramoto_cubic(0.2)
        a = simulate_limit(spec, 2.0, 1e-3, 3000, SeedSpec(21), n_snapshots=2)
        b = simulate_limit(spec, 2.0, 1e-3, 3000, SeedSpec(22), n_snapshots=2)
        # rotate stream b by a fixed angle before comparing radii
        vb = b.marginal(-1) @ np.array(
            [[np.cos(0.7), -np.sin(0.7)], [np.sin(0.7), np.cos(0.7)]]
        )
        ra = np.hypot(a.marginal(-1)[:, 0], a.marginal(-1)[:, 1])
        rb = np.hypot(vb[:, 0], vb[:, 1])
        assert sps.ks_2samp(ra, rb).pvalue > 0.01

    def test_explosive_stopped_fraction_grows(self):
        spec = LimitSdeSpec.kuramoto_cubic(0.4)
        rule = StoppingRule(StoppingKind.RADIAL, 10.0)
        paths = simulate_limit(spec, 5.0, 1e-3, 2000, SeedSpec(31), rule, n_snapshots=6)
        fr = [paths.stopped_fraction(t) for t in (1.0, 3.0, 5.0)]
        assert fr[0] <= fr[1] <= fr[2]
        assert fr[2] > 0.5
        # paths freeze at their stopping value
        stopped = ~np.isnan(paths.stop_times)
        r2_final = (paths.values[stopped, -1, :] ** 2).sum(axis=1)
        assert (r2_final >= 10.0 - 1e-9).all()

    def test_inward_regime_radius_bounded_in_time(self):
        spec = LimitSdeSpec.kuramoto_cubic(0.2)
        m1 = radial_moments(spec, 2.0, 4000, 1e-3, SeedSpec(41))
        m2 = radial_moments(spec, 6.0, 4000, 1e-3, SeedSpec(42))
        assert m2.mean < m1.mean * 1.5 + 1.0  # saturates, no blow-up


class TestLinearOu:
    def test_exact_moments_scalar(self):
        sys = LinearOuSystem(np.array([[-1.0]]), np.array([2.0]), np.array([[1.0]]))
        _, cov = sys.moments_at(1.0)
        expected = np.exp(-2.0) + 2.0 * (1.0 - np.exp(-2.0))
        assert cov[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_simulated_matches_exact_moments(self):
        a = np.array([[-0.5, 0.3], [-0.3, -0.8]])
        sys = LinearOuSystem(a, np.array([1.0, 0.5]), 0.25 * np.eye(2))
        _, cov = sys.moments_at(2.0)
        paths = simulate_limit(
            LimitSdeSpec.linear_ou(sys), 2.0, 1e-3, 20_000, SeedSpec(51), n_snapshots=2
        )
        cov_hat = np.cov(paths.marginal(-1).T)
        se = np.sqrt(
            (np.outer(np.diag(cov), np.diag(cov)) + cov**2) / paths.n_paths
        )
        assert (np.abs(cov_hat - cov) <= 3.5 * se).all()

    def test_radial_moments_requires_planar_kind(self):
        with pytest.raises(ConfigError):
            radial_moments(LimitSdeSpec.cw_cubic(), 1.0, 100, 1e-3, SeedSpec(0))
