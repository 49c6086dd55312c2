"""Tests for the material model, stresses and regime classification."""
import math
from itertools import permutations

import pytest

from constitutive import (
    NEGATIVE_SHIFT_RATIO,
    MaterialModel,
    Regime,
    StretchTriple,
    baker_ericksen_holds,
    classify_coefficients,
    classify_regime,
    poynting_sign,
    principal_cauchy_stress,
    principal_piola_stress,
    strain_energy,
)
from errors import InvalidModelError, InvalidStretchError


class TestMaterialModel:
    """Admissibility of the coefficient pair."""

    def test_shear_modulus(self):
        model = MaterialModel(1.92, 0.48)
        assert model.mu == pytest.approx(2.4)
        assert model.ratio == pytest.approx(0.25)

    def test_neo_hookean_default(self):
        model = MaterialModel(0.52)
        assert model.mu2 == 0.0
        assert model.is_neo_hookean

    @pytest.mark.parametrize("mu1,mu2", [(0.0, 1.0), (-1.0, 3.0), (1.0, -1.0), (1.0, -2.0)])
    def test_rejects_inadmissible(self, mu1, mu2):
        with pytest.raises(InvalidModelError):
            MaterialModel(mu1, mu2)

    def test_rejects_nan(self):
        with pytest.raises(InvalidModelError):
            MaterialModel(float("nan"), 0.0)

    def test_scaled(self):
        scaled = MaterialModel(2.0, -0.1).scaled(10.0)
        assert scaled.mu1 == pytest.approx(20.0)
        assert scaled.mu2 == pytest.approx(-1.0)


class TestStretchTriple:
    """Isochoric stretch triples."""

    def test_identity(self):
        assert StretchTriple.identity().as_tuple() == (1.0, 1.0, 1.0)

    def test_two_equal(self):
        s = StretchTriple.two_equal(4.0)
        assert s.as_tuple() == (4.0, 0.5, 0.5)

    def test_from_reduced(self):
        s = StretchTriple.from_reduced(2.0, 0.25)
        assert s.l3 == pytest.approx(2.0)

    def test_rejects_volume_change(self):
        with pytest.raises(InvalidStretchError):
            StretchTriple(1.0, 1.0, 1.001)

    def test_rejects_non_positive(self):
        with pytest.raises(InvalidStretchError):
            StretchTriple(-1.0, -1.0, 1.0)

    def test_permuted(self):
        s = StretchTriple.from_reduced(2.0, 0.25).permuted((2, 0, 1))
        assert s.l2 == 2.0
        assert s.l3 == 0.25


class TestStrainEnergy:
    def test_zero_at_identity(self):
        assert strain_energy(MaterialModel(1.0, 0.5), StretchTriple.identity()) == 0.0

    def test_neo_hookean_uniaxial(self):
        # 0.5 * (4 + 0.5 + 0.5 - 3)
        assert strain_energy(MaterialModel(1.0, 0.0), StretchTriple.two_equal(2.0)) == pytest.approx(1.0)

    def test_second_invariant_term(self):
        s = StretchTriple.two_equal(2.0)
        expected = 0.5 * (0.25 + 2.0 + 2.0 - 3.0)
        assert strain_energy(MaterialModel(1.0, 1.0), s) - strain_energy(MaterialModel(1.0, 0.0), s) == pytest.approx(expected)

    def test_non_negative_for_positive_coefficients(self, rng):
        model = MaterialModel(1.3, 0.4)
        for _ in range(200):
            l1, l2 = rng.uniform(0.2, 3.0, size=2)
            assert strain_energy(model, StretchTriple.from_reduced(l1, l2)) >= -1e-12

    def test_degree_one_homogeneous_in_coefficients(self, rng):
        for _ in range(200):
            mu1 = rng.uniform(0.1, 10.0)
            model = MaterialModel(mu1, mu1 * rng.uniform(-0.99, 1.5))
            s = StretchTriple.from_reduced(*rng.uniform(0.2, 3.0, size=2))
            c = rng.uniform(0.1, 10.0)
            assert strain_energy(model.scaled(c), s) == pytest.approx(c * strain_energy(model, s), rel=1e-12, abs=1e-12)


class TestStresses:
    def test_cauchy_at_identity(self):
        assert principal_cauchy_stress(MaterialModel(1.0, 0.5), StretchTriple.identity(), 0.5) == (0.0, 0.0, 0.0)

    def test_piola_is_cauchy_over_stretch(self):
        model = MaterialModel(1.0, 0.2)
        s = StretchTriple.two_equal(2.0)
        cauchy = principal_cauchy_stress(model, s, 0.3)
        piola = principal_piola_stress(model, s, 0.3)
        for t, p, lam in zip(cauchy, piola, s):
            assert p == pytest.approx(t / lam)

    def test_equal_piola_on_two_equal_branch(self):
        """The branch load balances all three faces with a common pressure."""
        model = MaterialModel(1.0, 0.3)
        lam = 1.7
        tau = (model.mu1 + model.mu2 / lam) * (lam + 1.0 / math.sqrt(lam))
        pressure = model.mu1 * lam ** 2 - model.mu2 / lam ** 2 - tau * lam
        piola = principal_piola_stress(model, StretchTriple.two_equal(lam), pressure)
        assert piola == pytest.approx((tau, tau, tau))


class TestBakerEricksen:
    def test_fails_for_large_negative_mu2(self):
        assert baker_ericksen_holds(MaterialModel(1.0, -0.5), StretchTriple(0.5, 2.0, 1.0)) is False

    def test_holds_for_positive_coefficients(self):
        assert baker_ericksen_holds(MaterialModel(1.0, 0.5), StretchTriple(0.5, 2.0, 1.0)) is True

    def test_equal_stretches_impose_nothing(self):
        assert baker_ericksen_holds(MaterialModel(1.0, -0.9), StretchTriple.identity()) is True

    def test_two_equal_bound(self):
        model = MaterialModel(1.0, -0.2)
        assert baker_ericksen_holds(model, StretchTriple.two_equal(0.25)) is True
        assert baker_ericksen_holds(model, StretchTriple.two_equal(0.15)) is False

    def test_permutation_invariant(self, rng):
        outcomes = set()
        for _ in range(300):
            mu1 = rng.uniform(0.5, 2.0)
            model = MaterialModel(mu1, mu1 * rng.uniform(-0.99, 0.5))
            s = StretchTriple.from_reduced(*rng.uniform(0.2, 3.0, size=2))
            expected = baker_ericksen_holds(model, s)
            outcomes.add(expected)
            for order in permutations(range(3)):
                assert baker_ericksen_holds(model, s.permuted(order)) is expected
        assert outcomes == {True, False}


class TestClassifyRegime:
    """Regime boundaries of the coefficient plane."""

    @pytest.mark.parametrize("mu1,mu2,regime", [
        (1.0, 0.0, Regime.NEO_HOOKEAN),
        (3.0, 1.0, Regime.E11),
        (1.0, 0.5, Regime.E11),
        (1.92, 0.48, Regime.E12),
        (2.484, -0.148, Regime.E21),
        (1.0, -0.1, Regime.E22),
        (1.0, -0.9, Regime.E22),
    ])
    def test_regimes(self, mu1, mu2, regime):
        assert classify_regime(MaterialModel(mu1, mu2)) is regime

    def test_fitted_negative_ratio(self):
        model = MaterialModel(2.484, -0.148)
        assert round(model.ratio, 4) == -0.0596
        assert round(-NEGATIVE_SHIFT_RATIO, 4) == -0.0684
        assert model.ratio > -NEGATIVE_SHIFT_RATIO

    def test_negative_boundary_is_e22(self):
        assert classify_coefficients(1.0, -NEGATIVE_SHIFT_RATIO) is Regime.E22

    @pytest.mark.parametrize("mu1,mu2", [(0.0, 1.0), (1.0, -1.0), (-2.0, 1.0)])
    def test_inadmissible_pairs(self, mu1, mu2):
        assert classify_coefficients(mu1, mu2) is Regime.INADMISSIBLE

    def test_string_names(self):
        assert str(Regime.E21) == "E21"
        assert str(Regime.NEO_HOOKEAN) == "NeoHookean"

    def test_scale_invariant(self):
        for factor in (0.1, 10.0):
            assert classify_coefficients(2.484 * factor, -0.148 * factor) is Regime.E21


class TestPoyntingSign:
    def test_signs(self):
        assert poynting_sign(MaterialModel(1.0, 0.3)) == 1
        assert poynting_sign(MaterialModel(1.0, 0.0)) == 0
        assert poynting_sign(MaterialModel(1.0, -0.3)) == -1
