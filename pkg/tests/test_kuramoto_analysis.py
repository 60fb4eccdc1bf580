"""Macroscopic rotator theory: critical coupling, stationary densities,
Galerkin evolution, linearized spectrum, fluctuation blocks."""

import numpy as np
import pytest
from scipy.special import iv

from meanfield.core import ConfigError, DisorderLaw, KuramotoParams, TWO_PI
from meanfield.kuramoto_analysis import (
    KuramotoCltSystem,
    KuramotoDensity,
    analytic_spectrum,
    _galerkin_rhs,
    kernel_coefficient_vectors,
    kuramoto_clt_system,
    kuramoto_stationary,
    linearized_kuramoto,
    mckean_vlasov_kuramoto,
    solve_r_star,
    theta_critical,
)

H1 = DisorderLaw.rademacher()


class TestThetaCritical:
    def test_h1_closed_form(self):
        tc = theta_critical(0.25, H1)
        assert tc.theta_c == pytest.approx(1.25, abs=1e-14)
        assert tc.effective == pytest.approx(1.25, abs=1e-14)
        assert tc.binding == "spectral"

    def test_omega_zero_any_law(self):
        for law in (H1, DisorderLaw.delta(), DisorderLaw.symmetric_pair(0.7)):
            assert theta_critical(0.0, law).theta_c == pytest.approx(1.0, abs=1e-14)

    def test_h1_at_larger_omega(self):
        tc = theta_critical(0.45, H1)
        assert tc.theta_c == pytest.approx(1.81, abs=1e-12)
        assert tc.effective == pytest.approx(1.81, abs=1e-12)

    def test_cap_branch(self):
        tc = theta_critical(0.7, H1)  # 1 + 4*0.49 = 2.96 > 2
        assert tc.effective == 2.0
        assert tc.binding == "cap"


class TestStationaryDensity:
    def test_incoherent_is_uniform(self):
        params = KuramotoParams(1.25, 0.25, H1, 10)
        for eta in (-1.0, 1.0):
            _, dens, mom = kuramoto_stationary(0.0, params, eta)
            assert np.abs(dens - 1.0 / TWO_PI).max() < 1e-12
            assert abs(mom) < 1e-12

    def test_von_mises_fixed_point_oracle(self):
        # frequency-free synchronized branch: r = I1(2 theta r)/I0(2 theta r)
        params = KuramotoParams(2.0, 0.0, DisorderLaw.delta(), 10)
        roots = solve_r_star(params)
        assert roots[0] == 0.0
        assert len(roots) == 2
        r = 0.5
        for _ in range(300):
            r = iv(1, 2 * params.theta * r) / iv(0, 2 * params.theta * r)
        assert roots[1] == pytest.approx(r, abs=1e-6)

    def test_normalization_random_parameters(self):
        rng = np.random.default_rng(5)
        for _ in range(3):
            params = KuramotoParams(
                float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.0, 0.45)), H1, 10
            )
            x, dens, _ = kuramoto_stationary(float(rng.uniform(0, 0.8)), params, 1.0)
            from scipy.integrate import simpson

            assert simpson(dens, x=x) == pytest.approx(1.0, abs=1e-8)
            assert (dens >= -1e-12).all()

    def test_requires_grid(self):
        params = KuramotoParams(1.0, 0.1, H1, 10)
        with pytest.raises(ConfigError):
            kuramoto_stationary(0.0, params, 1.0, grid_points=100)


class TestGalerkin:
    def test_uniform_is_exact_fixed_point(self):
        params = KuramotoParams(1.25, 0.25, H1, 10)
        q0 = KuramotoDensity.uniform(H1, 16)
        _, snaps = mckean_vlasov_kuramoto(q0, params, 2.0, store_every=500)
        assert np.abs(snaps).max() == 0.0

    def test_linear_stability_dichotomy(self):
        # tiny first-harmonic perturbation decays below the critical coupling
        # and grows above it
        def final_coherence(theta):
            params = KuramotoParams(theta, 0.25, H1, 10)
            c = np.zeros((2, 17), dtype=complex)
            c[:, 0] = 1.0 / TWO_PI
            c[:, 1] = 1e-4
            q0 = KuramotoDensity(H1, c)
            _, snaps = mckean_vlasov_kuramoto(q0, params, 16.0, store_every=1000)
            amp = np.abs((H1.weights[None, :] * snaps[:, :, 0]).sum(axis=1))
            return amp[-1] / amp[0]

        # slowest linear rates at omega=0.25: -0.1575 below theta_c, +0.125
        # above; over t=16 the split is unambiguous
        assert final_coherence(1.05) < 0.4
        assert final_coherence(1.45) > 2.0

    def test_jacobian_matches_linearization(self):
        # finite differences of the Galerkin flow at uniform against the
        # density-side (adjoint) matrix of the linearized operator
        params = KuramotoParams(1.25, 0.25, H1, 10)
        k_max = 8
        spec = linearized_kuramoto(params, truncation=k_max)
        dense = spec.as_density_jacobian()

        # basis map: density side indexes (h in 1..K) x (atom eta)
        base = np.zeros((2, k_max), dtype=complex)
        eps = 1e-7

        def rhs(c):
            return _galerkin_rhs(c, H1, params.theta, params.omega)

        n_dof = 2 * k_max
        jac = np.zeros((n_dof, n_dof), dtype=complex)
        r0 = rhs(base)
        for col in range(n_dof):
            atom, h = divmod(col, k_max)
            pert = base.copy()
            pert[atom, h] += eps
            jac[:, col] = ((rhs(pert) - r0) / eps).reshape(-1)

        # assemble the expected Jacobian from the operator matrix: restrict to
        # h >= 1 and convert the (1, eta) function basis to atom values
        idx = {
            (h, e): i
            for i, (h, e) in enumerate(zip(spec.harmonics, spec.eta_power))
        }
        expected = np.zeros((n_dof, n_dof), dtype=complex)
        atoms = H1.values  # [-1, +1]
        # transformation between nodal values f(eta) and (1, eta) components
        for h_in in range(1, k_max + 1):
            for a_in in range(2):
                comp = np.zeros(dense.shape[0], dtype=complex)
                # nodal delta at atom a_in = 0.5*(1 + eta_in * eta) in basis
                comp[idx[(h_in, 0)]] = 0.5
                comp[idx[(h_in, 1)]] = 0.5 * atoms[a_in]
                out = dense @ comp
                for h_out in range(1, k_max + 1):
                    for a_out in range(2):
                        val = out[idx[(h_out, 0)]] + atoms[a_out] * out[idx[(h_out, 1)]]
                        expected[a_out * k_max + (h_out - 1), a_in * k_max + (h_in - 1)] = val
        assert np.abs(jac - expected).max() < 1e-6

    def test_truncation_guard(self):
        with pytest.raises(ConfigError):
            mckean_vlasov_kuramoto(
                KuramotoDensity.uniform(H1, 4),
                KuramotoParams(1.0, 0.1, H1, 10),
                1.0,
            )

    def test_truncation_verification_raises_when_k_too_small(self):
        from meanfield.core import TruncationError

        # strongly synchronizing run cascades into high harmonics: K = 8 is
        # certifiably too small, K = 32 passes the doubling check
        law = DisorderLaw.delta()
        params = KuramotoParams(3.0, 0.0, law, 10)

        def run(k):
            c = np.zeros((1, k + 1), dtype=complex)
            c[:, 0] = 1.0 / TWO_PI
            c[:, 1] = 0.02
            return mckean_vlasov_kuramoto(
                KuramotoDensity(law, c), params, 6.0, verify_truncation=True
            )

        with pytest.raises(TruncationError):
            run(8)
        run(32)


class TestLinearizedSpectrum:
    def test_critical_spectrum_closed_form(self):
        params = KuramotoParams(1.25, 0.25, H1, 10)
        spec = linearized_kuramoto(params, truncation=32)
        expected = analytic_spectrum(0.25, 32)
        eigs = list(spec.eigenvalues)
        worst = 0.0
        for target in expected:
            dist = np.abs(np.array(eigs) - target)
            i = int(np.argmin(dist))
            worst = max(worst, float(dist[i]))
            eigs.pop(i)
        assert worst < 1e-8
        assert len(eigs) == 0  # exact count: 4K eigenvalues for k <= K

    def test_kernel_is_critical_pair(self):
        params = KuramotoParams(1.25, 0.25, H1, 10)
        spec = linearized_kuramoto(params, truncation=16)
        kv = kernel_coefficient_vectors(spec)
        assert np.abs(spec.matrix @ kv).max() < 1e-12
        assert spec.kernel_dimension() == 2

    def test_frequency_free_kernel(self):
        params = KuramotoParams(1.0, 0.0, DisorderLaw.rademacher(), 10)
        spec = linearized_kuramoto(params, truncation=8)
        kv = kernel_coefficient_vectors(spec)  # reduces to cos x, sin x
        assert np.abs(spec.matrix @ kv).max() < 1e-14
        assert (np.abs(kv[spec.eta_power == 1, :]) < 1e-14).all()

    def test_kernel_empty_off_criticality(self):
        for theta in (1.15, 1.35):
            params = KuramotoParams(theta, 0.25, H1, 10)
            spec = linearized_kuramoto(params, truncation=16)
            assert spec.kernel_dimension() == 0
        crit = linearized_kuramoto(KuramotoParams(1.25, 0.25, H1, 10), 16)
        assert crit.kernel_dimension() == 2

    def test_spectrum_stable_under_doubling(self):
        params = KuramotoParams(1.25, 0.2, H1, 10)
        a = linearized_kuramoto(params, truncation=16)
        b = linearized_kuramoto(params, truncation=32)
        for lam in a.eigenvalues:
            assert np.abs(b.eigenvalues - lam).min() < 1e-8


class TestCltBlocks:
    def test_first_harmonic_block(self):
        system = kuramoto_clt_system(KuramotoParams(1.25, 0.25, H1, 10), 4)
        a = system.drift_block(1)
        assert a[0, 0] == pytest.approx(0.125, abs=1e-14)
        assert a[1, 1] == pytest.approx(0.125, abs=1e-14)
        assert a[2, 2] == pytest.approx(-0.5, abs=1e-14)
        assert a[3, 3] == pytest.approx(-0.5, abs=1e-14)
        assert a[0, 3] == pytest.approx(-0.25, abs=1e-14)
        assert a[1, 2] == pytest.approx(0.25, abs=1e-14)
        assert np.abs(system.noise_diag(1) - 1 / np.sqrt(2)).max() < 1e-15
        assert np.abs(system.initial_covariance(1) - 0.5 * np.eye(4)).max() < 1e-15

    def test_second_harmonic_diagonal(self):
        system = kuramoto_clt_system(KuramotoParams(1.25, 0.25, H1, 10), 4)
        a = system.drift_block(2)
        assert np.allclose(np.diag(a), -2.0, atol=1e-14)

    def test_stationary_covariance_solves_lyapunov(self):
        system = kuramoto_clt_system(KuramotoParams(1.25, 0.25, H1, 10), 4)
        a = system.drift_block(2)
        sigma = system.stationary_covariance(2)
        bbt = np.diag(system.noise_diag(2) ** 2)
        resid = a @ sigma + sigma @ a.T + bbt
        assert np.abs(resid).max() < 1e-12

    def test_unstable_block_refused(self):
        system = kuramoto_clt_system(KuramotoParams(1.25, 0.25, H1, 10), 4)
        with pytest.raises(ConfigError):
            system.stationary_covariance(1)  # critical block, not stable
