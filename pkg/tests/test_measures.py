import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_measures, float_measures
from stochorder.families import binomial, poisson
from stochorder.measures import (
    FiniteMeasure,
    convolve,
    convolve_power,
    dirac,
    expectation,
    mean,
    mixture,
    pushforward_affine,
)

MU = FiniteMeasure.from_atoms({-3: F(1, 2), 1: F(1, 2)})
NU = FiniteMeasure.from_atoms({0: F(3, 4), 4: F(1, 4)})


def brute_convolution(a, b):
    """Pairwise-sum enumeration."""
    out = {}
    for x, wx in a:
        for y, wy in b:
            out[x + y] = out.get(x + y, 0) + wx * wy
    return out


class TestDirac:
    @pytest.mark.parametrize("x", [0, -3, F(7, 2)])
    def test_point_mass(self, x):
        d = dirac(x)
        assert d.support == (F(x),)
        assert d.weights == (1,)
        assert d.mass_defect == 0
        assert d.regime == "exact"

    def test_mean(self):
        assert mean(dirac(F(7, 2))) == F(7, 2)

    def test_float_point_mass(self):
        assert dirac(0.5).regime == "float"


class TestValidation:
    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            FiniteMeasure((F(0), F(1)), (F(1, 2), F(1, 3)))
        with pytest.raises(ValueError):
            FiniteMeasure((F(0), F(1)), (F(3, 2), F(-1, 2)))

    def test_rejects_unsorted_support(self):
        with pytest.raises(ValueError):
            FiniteMeasure((F(1), F(0)), (F(1, 2), F(1, 2)))

    def test_exact_regime_has_no_defect(self):
        with pytest.raises(ValueError):
            FiniteMeasure((F(0),), (F(1, 2),), "exact", F(1, 2))

    def test_float_defect_balances(self):
        m = FiniteMeasure((0.0,), (0.75,), "float", 0.25)
        assert m.total_weight + m.mass_defect == 1.0

    def test_from_atoms_merges_and_drops_zeros(self):
        m = FiniteMeasure.from_atoms([(1, F(1, 4)), (1, F(1, 4)), (2, F(1, 2)), (5, 0)])
        assert m.as_dict() == {1: F(1, 2), 2: F(1, 2)}

    def test_float_snap(self):
        m = FiniteMeasure.from_atoms([(0.1 + 0.2, 0.5), (0.3, 0.5)])
        assert len(m) == 1


class TestMixture:
    def test_idempotent(self):
        assert mixture([F(1, 2), F(1, 2)], [dirac(0), dirac(0)]) == dirac(0)

    def test_two_point_measures(self):
        assert mixture([F(1, 2), F(1, 2)], [dirac(-3), dirac(1)]).as_dict() == {
            -3: F(1, 2), 1: F(1, 2)}
        assert mixture([F(3, 4), F(1, 4)], [dirac(0), dirac(4)]).as_dict() == {
            0: F(3, 4), 4: F(1, 4)}

    def test_errors(self):
        with pytest.raises(ValueError):
            mixture([F(1, 2), F(1, 3)], [dirac(0), dirac(1)])
        with pytest.raises(ValueError):
            mixture([F(3, 2), F(-1, 2)], [dirac(0), dirac(1)])
        with pytest.raises(ValueError):
            mixture([0.5, 0.4], [dirac(0), dirac(1)])

    def test_defect_is_weighted(self):
        a = FiniteMeasure((0.0,), (0.9,), "float", 0.1)
        m = mixture([0.5, 0.5], [a, dirac(1.0)])
        assert m.mass_defect == pytest.approx(0.05)

    @given(exact_measures(), exact_measures(), st.fractions(0, 1))
    def test_mean_is_linear(self, a, b, c):
        m = mixture([c, 1 - c], [a, b])
        assert mean(m) == c * mean(a) + (1 - c) * mean(b)


class TestConvolve:
    def test_translation(self):
        assert convolve(dirac(2), dirac(-5)) == dirac(-3)

    def test_bernoulli_squared(self):
        b = binomial(1, F(1, 2))
        assert convolve(b, b).as_dict() == {0: F(1, 4), 1: F(1, 2), 2: F(1, 4)}

    def test_example_pair(self):
        # enumerated by hand over the four support pairs
        expected = {-3: F(3, 8), 1: F(4, 8), 5: F(1, 8)}
        assert convolve(MU, NU).as_dict() == expected
        assert brute_convolution(MU, NU) == expected

    @given(exact_measures(), exact_measures())
    def test_matches_enumeration(self, a, b):
        assert convolve(a, b).as_dict() == brute_convolution(a, b)

    @given(exact_measures(), exact_measures(), exact_measures(max_atoms=3))
    @settings(max_examples=50)
    def test_commutative_and_associative(self, a, b, c):
        assert convolve(a, b) == convolve(b, a)
        assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))

    @given(float_measures(), float_measures(), float_measures(max_atoms=3))
    @settings(max_examples=50)
    def test_float_commutative_and_associative(self, a, b, c):
        assert convolve(a, b).isclose(convolve(b, a), 1e-12)
        assert convolve(convolve(a, b), c).isclose(convolve(a, convolve(b, c)), 1e-12)

    @given(exact_measures())
    def test_neutral_element(self, a):
        assert convolve(a, dirac(0)) == a

    @given(exact_measures(), exact_measures())
    def test_mean_additive(self, a, b):
        assert mean(convolve(a, b)) == mean(a) + mean(b)

    def test_non_lattice_support(self):
        a = FiniteMeasure.from_atoms({0: F(1, 2), F(1, 3): F(1, 2)})
        b = FiniteMeasure.from_atoms({0: F(1, 2), F(1, 5): F(1, 2)})
        assert convolve(a, b).as_dict() == brute_convolution(a, b)

    def test_float_dense_path_matches_pairwise(self):
        a = poisson(3.0)
        b = pushforward_affine(poisson(2.0), 1)
        dense = convolve(a, b)
        xs = np.add.outer(a.xs, b.xs).ravel()
        ws = np.multiply.outer(a.ws, b.ws).ravel()
        ref = np.bincount(np.rint(xs).astype(int), weights=ws)
        assert np.allclose(dense.ws, ref[ref > 0], atol=1e-15)

    def test_defect_combines(self):
        a = FiniteMeasure((0.0,), (0.9,), "float", 0.1)
        b = FiniteMeasure((0.0, 1.0), (0.4, 0.4), "float", 0.2)
        assert convolve(a, b).mass_defect == pytest.approx(1 - 0.9 * 0.8)

    def test_mixed_regime_coerces_to_float(self):
        m = convolve(dirac(1), dirac(0.5))
        assert m.regime == "float" and m.support == (1.5,)


class TestConvolvePower:
    def test_zero_power_is_point_mass_at_zero(self):
        assert convolve_power(MU, 0) == dirac(0)

    def test_translation(self):
        assert convolve_power(dirac(1), 3) == dirac(3)

    def test_square(self):
        b = binomial(1, F(1, 2))
        assert convolve_power(b, 2) == convolve(b, b)

    @given(exact_measures(max_atoms=3), st.integers(0, 5))
    @settings(max_examples=40)
    def test_matches_repeated_convolution(self, a, m):
        ref = dirac(0)
        for _ in range(m):
            ref = convolve(ref, a)
        assert convolve_power(a, m) == ref

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            convolve_power(MU, -1)


class TestPushforward:
    def test_point_mass(self):
        assert pushforward_affine(dirac(2), F(1, 4), 0) == dirac(F(1, 2))

    def test_rescale(self):
        m = FiniteMeasure.from_atoms({0: F(1, 4), 1: F(1, 2), 2: F(1, 4)})
        assert pushforward_affine(m, F(1, 2), 0).as_dict() == {
            0: F(1, 4), F(1, 2): F(1, 2), 1: F(1, 4)}

    def test_identity(self):
        assert pushforward_affine(MU, 1, 0) == MU

    def test_negative_scale_resorts(self):
        m = pushforward_affine(MU, -1, 0)
        assert m.as_dict() == {-1: F(1, 2), 3: F(1, 2)}

    def test_zero_scale(self):
        with pytest.raises(ValueError):
            pushforward_affine(MU, 0, 1)

    @given(exact_measures(), st.fractions(-5, 5).filter(bool), st.fractions(-5, 5))
    def test_inverse_roundtrip(self, a, s, t):
        b = pushforward_affine(pushforward_affine(a, s, t), 1 / s, -t / s)
        assert b == a


class TestMoments:
    def test_means(self):
        assert mean(MU) == -1
        assert mean(NU) == 1

    def test_expectation_point_mass(self):
        assert expectation(dirac(3), lambda x: x * x) == 9

    def test_expectation_float_fallback(self):
        # max() is not vectorized, so evaluation falls back to point-wise calls
        m = FiniteMeasure.from_atoms([(0.0, 0.5), (3.0, 0.5)])
        assert expectation(m, lambda x: max(0, x - 2)) == pytest.approx(0.5)

    def test_expectation_undefined(self):
        with pytest.raises(ValueError):
            expectation(FiniteMeasure.from_atoms({-1: F(1, 2), 1: F(1, 2)}), math.log)

    def test_cdf(self):
        assert MU.cdf(-3) == F(1, 2)
        assert MU.cdf(F(-7, 2)) == 0
        assert MU.cdf(1) == 1


class TestJson:
    def test_exact_roundtrip(self):
        data = MU.to_json()
        assert data["atoms"][0] == {"x": "-3/1", "w": "1/2"}
        assert FiniteMeasure.from_json(json.loads(json.dumps(data))) == MU

    def test_float_roundtrip(self):
        p = poisson(1.5)
        back = FiniteMeasure.from_json(json.loads(json.dumps(p.to_json())))
        assert back.isclose(p, 0) and back.mass_defect == p.mass_defect

    def test_plain_integer_strings(self):
        m = FiniteMeasure.from_json({"regime": "exact", "atoms": [{"x": "2", "w": "1"}]})
        assert m == dirac(2)
