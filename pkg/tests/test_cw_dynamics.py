"""Event-driven spin dynamics: rates, exactness, conservation, observables."""

import numpy as np
import pytest
from scipy import stats as sps

from meanfield.core import ConfigError, CwParams, DisorderLaw, SeedSpec, SpaceScale, TimeScale
from meanfield.cw_analysis import tilted_profile
from meanfield.cw_dynamics import (
    cell_rates,
    cw_order_parameters,
    initial_cw_state,
    simulate_cw,
)
from meanfield.stats import simulate_cw_sites


class TestInitialState:
    def test_all_up(self):
        params = CwParams(1.0, DisorderLaw.symmetric_pair(0.3), 50)
        state = initial_cw_state(params, 1.0, SeedSpec(3))
        assert state.counts[1].sum() == 0
        assert state.magnetization == 1.0

    def test_centered_product_law(self):
        # q0 = q_* with m_* = 0: the replica-mean magnetization is centered
        law = DisorderLaw.symmetric_pair(0.3)
        n, reps = 100, 1000
        params = CwParams(1.0, law, n)
        prof = tilted_profile(1.0, law, 0.0)
        q0 = {v: prof.table[0, k] for k, v in enumerate(law.values)}
        means = [
            initial_cw_state(params, q0, SeedSpec(21, r)).magnetization
            for r in range(reps)
        ]
        assert abs(np.mean(means)) < 4.0 * np.sqrt(1.0 / (reps * n))

    def test_binomial_cell_counts(self):
        # N=2, fair spins: up-count is Binomial(2, 1/2) across seeds
        params = CwParams(1.0, DisorderLaw.delta(), 2)
        counts = np.zeros(3)
        reps = 20_000
        for r in range(reps):
            st = initial_cw_state(params, 0.5, SeedSpec(77, r))
            counts[int(st.counts[0, 0])] += 1
        expected = reps * np.array([0.25, 0.5, 0.25])
        _, p = sps.chisquare(counts, expected)
        assert p > 0.001

    def test_rejects_bad_probability(self):
        params = CwParams(1.0, DisorderLaw.delta(), 4)
        with pytest.raises(ConfigError):
            initial_cw_state(params, 1.2, SeedSpec(0))


class TestCellRates:
    def test_closed_form_all_up(self):
        params = CwParams(1.0, DisorderLaw.delta(), 10)
        state = initial_cw_state(params, 1.0, SeedSpec(1))
        rates = cell_rates(state, params)
        assert rates[0, 0] == pytest.approx(10 * np.exp(-1.0), rel=1e-14)
        assert rates[1, 0] == 0.0

    def test_zero_exponent(self):
        params = CwParams(2.0, DisorderLaw.delta(), 8)
        state = initial_cw_state(params, 0.5, SeedSpec(8))
        # enforce m = 0 exactly
        state.counts[0, 0] = 4
        state.counts[1, 0] = 4
        rates = cell_rates(state, params)
        assert rates[0, 0] == pytest.approx(4.0, abs=1e-12)
        assert rates[1, 0] == pytest.approx(4.0, abs=1e-12)

    def test_scalar_oracle(self):
        # rate = count * exp(-beta j (m + eta)) at beta=1.116, m=0.1, eta=0.3
        law = DisorderLaw.symmetric_pair(0.3)
        params = CwParams(1.116, law, 200)
        state = initial_cw_state(params, 1.0, SeedSpec(5))
        state.counts[:] = [[10, 100], [50, 40]]  # m = 0.1, count(up, +0.3) = 100
        m = state.magnetization
        assert m == pytest.approx(0.1, abs=1e-15)
        rates = cell_rates(state, params)
        k_plus = int(np.nonzero(state.field_values == 0.3)[0][0])
        assert rates[0, k_plus] == pytest.approx(
            100 * np.exp(-1.116 * (m + 0.3)), rel=1e-13
        )

    def test_spec_arithmetic_value(self):
        assert 100 * np.exp(-1.116 * (0.1 + 0.3)) == pytest.approx(63.97, abs=0.03)


class TestSimulate:
    def test_single_spin_symmetric_occupation(self):
        # beta -> 0 limit via beta tiny: rate-1 flipping, half time up
        fields = np.zeros(1)
        res = simulate_cw_sites(fields, 1e-12, 1e4, SeedSpec(4), track_occupation=True)
        frac_up = res.occupation[1]
        assert abs(frac_up - 0.5) < 0.02

    def test_poisson_event_count_beta_small(self):
        # with beta ~ 0 every spin flips at rate 1: events over [0,t] are
        # Poisson(N t)
        params = CwParams(1e-12, DisorderLaw.delta(), 100)
        reps, t_end = 500, 10.0
        counts = []
        for r in range(reps):
            st = initial_cw_state(params, 0.5, SeedSpec(31, r))
            traj = simulate_cw(st, params, t_end, np.array([t_end]), SeedSpec(31, r))
            counts.append(traj.n_events)
        mean = np.mean(counts)
        se = np.sqrt(1000.0 / reps)
        assert abs(mean - 1000.0) < 3.0 * se

    def test_per_field_conservation_exact(self):
        law = DisorderLaw.symmetric_pair(0.3)
        params = CwParams(1.2, law, 400)
        st = initial_cw_state(params, 0.5, SeedSpec(9))
        per_field0 = st.counts.sum(axis=0)
        traj = simulate_cw(st, params, 5.0, np.linspace(0, 5, 21), SeedSpec(9))
        for snap in traj.snap_counts:
            assert np.array_equal(snap.sum(axis=0), per_field0)

    def test_snapshots_are_cadlag_initial(self):
        params = CwParams(1.0, DisorderLaw.delta(), 30)
        st = initial_cw_state(params, 0.5, SeedSpec(2))
        traj = simulate_cw(st, params, 1.0, np.array([0.0, 1.0]), SeedSpec(2))
        assert np.array_equal(traj.snap_counts[0], st.counts)

    def test_event_records_are_strictly_increasing_single_flips(self):
        law = DisorderLaw.symmetric_pair(0.3)
        params = CwParams(1.2, law, 50)
        st = initial_cw_state(params, 0.5, SeedSpec(44))
        traj = simulate_cw(
            st, params, 2.0, np.array([2.0]), SeedSpec(44), record_events=True
        )
        assert traj.event_times.size == traj.n_events
        assert (np.diff(traj.event_times) > 0).all()
        assert (traj.event_cells >= 0).all() and (traj.event_cells < 4).all()
        # replaying the channel flips reproduces the snapshot counts
        counts = traj.initial_counts.copy()
        m_cells = traj.field_values.size
        for ch in traj.event_cells:
            row, k = divmod(int(ch), m_cells)
            counts[row, k] -= 1
            counts[1 - row, k] += 1
        assert np.array_equal(counts, traj.snap_counts[-1])

    def test_reproducibility(self):
        params = CwParams(1.3, DisorderLaw.symmetric_pair(0.3), 300)
        st = initial_cw_state(params, 0.5, SeedSpec(17))
        a = simulate_cw(st, params, 3.0, np.linspace(0, 3, 7), SeedSpec(17))
        b = simulate_cw(st, params, 3.0, np.linspace(0, 3, 7), SeedSpec(17))
        assert a.snap_counts.tobytes() == b.snap_counts.tobytes()
        assert a.n_events == b.n_events

    def test_aggregation_exactness_vs_site_oracle(self):
        # the aggregated-channel chain and the per-site chain induce the same
        # law of m_N(t): KS on 10^4 replicas each
        law = DisorderLaw.symmetric_pair(0.3)
        n, t_end, reps = 20, 1.0, 10_000
        params = CwParams(1.1, law, n)
        rng = SeedSpec(1234).generator("fields-fixture")
        fields = np.where(rng.random(n) < 0.5, 0.3, -0.3)
        m_agg = np.empty(reps)
        m_site = np.empty(reps)
        for r in range(reps):
            st = initial_cw_state(params, 0.5, SeedSpec(40, r), fields=fields)
            traj = simulate_cw(st, params, t_end, np.array([t_end]), SeedSpec(40, r))
            m_agg[r] = traj.snap_m[0]
            site = simulate_cw_sites(
                fields, 1.1, t_end, SeedSpec(81, r), grid=np.array([t_end])
            )
            m_site[r] = site.snap_m[0]
        res = sps.ks_2samp(m_agg, m_site)
        assert res.pvalue > 0.001


class TestOrderParameters:
    def test_exact_reference_gives_zero(self):
        law = DisorderLaw.symmetric_pair(0.3)
        params = CwParams(1.0, law, 8)
        prof = tilted_profile(1.0, law, 0.0)
        state = initial_cw_state(params, 0.5, SeedSpec(3))
        traj = simulate_cw(state, params, 0.5, np.array([0.5]), SeedSpec(3))
        # overwrite the snapshot with the exact reference counts
        w = law.weights
        traj.snap_counts[0, 0] = np.round(prof.table[0] * w * 1e6)
        traj.snap_counts[0, 1] = np.round(prof.table[1] * w * 1e6)
        traj.params = CwParams(1.0, law, int(traj.snap_counts[0].sum()))
        n = traj.params.n_particles
        ref = traj.snap_counts[0] / n / w[None, :]
        series = cw_order_parameters(
            traj, np.ones((1, 2)), ref, SpaceScale.MODERATE, TimeScale.UNIT
        )
        assert abs(series.values[0, 0]) < 1e-10

    def test_homogeneous_reduces_to_magnetization(self):
        params = CwParams(1.0, DisorderLaw.delta(), 256)
        state = initial_cw_state(params, 0.5, SeedSpec(6))
        grid = np.linspace(0.0, 2.0, 5)
        traj = simulate_cw(state, params, 2.0, grid, SeedSpec(6))
        prof = tilted_profile(1.0, DisorderLaw.delta(), 0.0)
        series = cw_order_parameters(
            traj, np.ones((1, 1)), prof.table, SpaceScale.MODERATE, TimeScale.UNIT
        )
        expected = 256**0.25 * traj.snap_m
        assert np.abs(series.values[:, 0] - expected).max() < 1e-12

    def test_dense_sum_oracle(self):
        # cell sums equal brute-force per-particle sums
        law = DisorderLaw.symmetric_pair(0.3)
        params = CwParams(1.1164, law, 100)
        state = initial_cw_state(params, 0.5, SeedSpec(15))
        grid = np.array([0.0, 0.7])
        traj = simulate_cw(state, params, 0.7, grid, SeedSpec(15))
        from meanfield.cw_analysis import linearized_cw

        spec = linearized_cw(params, 0.0)
        prof = tilted_profile(params.beta, law, 0.0)
        series = cw_order_parameters(
            traj, spec.basis, prof.table, SpaceScale.MODERATE, TimeScale.UNIT
        )
        w = law.weights
        for snap_idx in range(2):
            counts = traj.snap_counts[snap_idx]
            for i in range(2):
                phi = spec.basis[i]
                dense = 0.0
                # expand cells into particles explicitly
                for row, sign in ((0, 1.0), (1, -1.0)):
                    for k in range(2):
                        dense += counts[row, k] * sign * phi[k] / 100.0
                ref = float(((prof.table[0] - prof.table[1]) * w * phi).sum())
                expected = 100**0.25 * (dense - ref)
                assert series.values[snap_idx, i] == pytest.approx(expected, abs=1e-12)

    def test_time_rescaling_column(self):
        params = CwParams(1.0, DisorderLaw.delta(), 16)
        state = initial_cw_state(params, 0.5, SeedSpec(2))
        micro = np.array([0.0, 2.0, 4.0])
        traj = simulate_cw(state, params, 4.0, micro, SeedSpec(2))
        prof = tilted_profile(1.0, DisorderLaw.delta(), 0.0)
        series = cw_order_parameters(
            traj, np.ones((1, 1)), prof.table, SpaceScale.MODERATE, TimeScale.N_QUARTER
        )
        assert np.allclose(series.times, micro / 2.0)
