"""Core types: disorder laws, seeding contract, measure algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy import stats as sps

from meanfield.core import (
    ConfigError,
    DisorderLaw,
    EmpiricalMeasure,
    FluctuationSeries,
    SeedSpec,
    SpaceScale,
    StructureError,
    TimeScale,
    empirical_to_fluctuation,
    sample_disorder,
)


class TestDisorderLaw:
    def test_delta_and_pairs(self):
        assert DisorderLaw.delta().atoms == ((0.0, 1.0),)
        law = DisorderLaw.symmetric_pair(0.3)
        assert law.n_atoms == 2
        assert law.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert DisorderLaw.rademacher().is_two_point_unit

    def test_rejects_asymmetric(self):
        with pytest.raises(ConfigError):
            DisorderLaw(((0.3, 0.5), (-0.2, 0.5)))

    def test_rejects_bad_weights(self):
        with pytest.raises(ConfigError):
            DisorderLaw(((0.3, 0.45), (-0.3, 0.45)))
        with pytest.raises(ConfigError):
            DisorderLaw(((0.3, 0.5), (-0.3, -0.5)))
        with pytest.raises(ConfigError):
            DisorderLaw(((0.0, 0.5), (0.0, 0.5)))

    def test_parse(self):
        law = DisorderLaw.parse("0.3:0.5,-0.3:0.5")
        assert law == DisorderLaw.symmetric_pair(0.3)
        with pytest.raises(ConfigError):
            DisorderLaw.parse("0.3;0.5")

    @given(
        value=hst.floats(min_value=0.01, max_value=5.0),
        w0=hst.floats(min_value=0.05, max_value=0.9),
    )
    @settings(max_examples=50, deadline=None)
    def test_three_atom_symmetric_always_valid(self, value, w0):
        side = (1.0 - w0) / 2.0
        law = DisorderLaw(((0.0, w0), (value, side), (-value, side)))
        assert law.n_atoms == 3
        assert abs(float(law.weights @ law.values)) < 1e-12


class TestSeedSpec:
    def test_streams_are_independent_and_reproducible(self):
        s = SeedSpec(123, 4)
        a1 = s.generator("x").random(8)
        a2 = s.generator("x").random(8)
        b = s.generator("y").random(8)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)

    def test_replicas_differ(self):
        base = SeedSpec(99)
        r0 = base.replica(0).generator().random(6)
        r1 = base.replica(1).generator().random(6)
        assert not np.array_equal(r0, r1)


class TestSampleDisorder:
    def test_degenerate_law(self):
        vals = sample_disorder(DisorderLaw.delta(), 5, SeedSpec(1))
        assert np.array_equal(vals, np.zeros(5))

    def test_coin_mean_bound(self):
        # 4-sigma event at fixed seed
        vals = sample_disorder(DisorderLaw.rademacher(), 10**6, SeedSpec(7))
        assert abs(vals.mean()) < 4.0 / np.sqrt(10**6)

    def test_bit_identical_counts(self):
        law = DisorderLaw.symmetric_pair(0.3)
        a = sample_disorder(law, 10**4, SeedSpec(5, 3))
        b = sample_disorder(law, 10**4, SeedSpec(5, 3))
        assert a.tobytes() == b.tobytes()

    def test_requires_positive_n(self):
        with pytest.raises(ConfigError):
            sample_disorder(DisorderLaw.delta(), 0, SeedSpec(0))

    def test_negation_symmetry_chi_square(self):
        # negating an independent draw leaves the law invariant
        law = DisorderLaw(((0.0, 0.4), (0.7, 0.3), (-0.7, 0.3)))
        n = 30_000
        a = sample_disorder(law, n, SeedSpec(11, 0))
        b = -sample_disorder(law, n, SeedSpec(11, 1))
        vals = law.values
        counts = np.array(
            [[(a == v).sum() for v in vals], [(b == v).sum() for v in vals]]
        )
        _, p, _, _ = sps.chi2_contingency(counts)
        assert p > 0.001


class TestEmpiricalToFluctuation:
    def make_reference(self):
        return {(1.0, 0.0): 0.5, (-1.0, 0.0): 0.5}

    def test_fixed_point_gives_zero(self):
        rho = EmpiricalMeasure({(1.0, 0.0): 2, (-1.0, 0.0): 2}, 4)
        out = empirical_to_fluctuation(rho, self.make_reference())
        assert all(abs(v) < 1e-14 for v in out.values())

    def test_two_cell_arithmetic(self):
        rho = EmpiricalMeasure({(1.0, 0.0): 4}, 4)
        out = empirical_to_fluctuation(rho, self.make_reference())
        assert out[(1.0, 0.0)] == pytest.approx(1.0, abs=1e-12)
        assert out[(-1.0, 0.0)] == pytest.approx(-1.0, abs=1e-12)

    def test_structure_mismatch(self):
        rho = EmpiricalMeasure({(1.0, 0.5): 4}, 4)
        with pytest.raises(StructureError):
            empirical_to_fluctuation(rho, self.make_reference())
        with pytest.raises(StructureError):
            empirical_to_fluctuation(
                EmpiricalMeasure({(1.0, 0.0): 4}, 4), {(1.0, 0.0): 0.7}
            )

    @given(
        c1=hst.integers(min_value=0, max_value=50),
        c2=hst.integers(min_value=0, max_value=50),
        c3=hst.integers(min_value=1, max_value=50),
        moderate=hst.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_signed_mass_zero(self, c1, c2, c3, moderate):
        ref = {(1.0, 0.3): 0.3, (-1.0, 0.3): 0.2, (1.0, -0.3): 0.25, (-1.0, -0.3): 0.25}
        rho = EmpiricalMeasure(
            {(1.0, 0.3): c1, (-1.0, 0.3): c2, (1.0, -0.3): c3}, c1 + c2 + c3
        )
        scale = SpaceScale.MODERATE if moderate else SpaceScale.SQRT_N
        out = empirical_to_fluctuation(rho, ref, scale)
        assert abs(sum(out.values())) < 1e-10


class TestEmpiricalMeasure:
    def test_rejects_negative_and_mismatched_totals(self):
        with pytest.raises(StructureError):
            EmpiricalMeasure({(1.0, 0.0): -1, (-1.0, 0.0): 5}, 4)
        with pytest.raises(StructureError):
            EmpiricalMeasure({(1.0, 0.0): 2, (-1.0, 0.0): 1}, 4)

    def test_probability_totals_one(self):
        rho = EmpiricalMeasure({(1.0, 0.3): 3, (-1.0, 0.3): 1}, 4)
        total = sum(rho.probability(c) for c in rho.cells)
        assert total == pytest.approx(1.0, abs=1e-15)


class TestFluctuationSeries:
    def test_shape_checks(self):
        ser = FluctuationSeries(
            np.array([0.0, 1.0]),
            np.array([[1.0, 2.0], [3.0, 4.0]]),
            SpaceScale.SQRT_N,
            TimeScale.UNIT,
            ("a", "b"),
        )
        assert np.array_equal(ser.column("b"), [2.0, 4.0])
        with pytest.raises(StructureError):
            FluctuationSeries(
                np.array([0.0]),
                np.zeros((2, 1)),
                SpaceScale.SQRT_N,
                TimeScale.UNIT,
            )

    def test_time_scale_factors(self):
        assert TimeScale.UNIT.factor(4096) == 1.0
        assert TimeScale.N_QUARTER.factor(4096) == pytest.approx(8.0, abs=1e-12)
        assert TimeScale.N_HALF.factor(4096) == pytest.approx(64.0, abs=1e-12)
