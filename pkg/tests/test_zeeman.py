"""Tests of the effective spin-1/2 Zeeman model."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeepump import constants
from zeepump.zeeman import (
    DoubletEigensystem,
    FieldConfig,
    GTensor,
    doublet_eigensystem,
    effective_g,
    hamiltonian_ghz,
    zeeman_splitting,
)

MU_B = constants.BOHR_MAGNETON_GHZ_PER_T

GROUND = GTensor(constants.GROUND_G_PARALLEL, constants.GROUND_G_PERPENDICULAR)
EXCITED = GTensor(constants.EXCITED_G_PARALLEL, constants.EXCITED_G_PERPENDICULAR)


def eigenvalue_gap_oracle(g: GTensor, b_tesla: float, theta_deg: float) -> float:
    """Independent route: numeric eigenvalue gap of the 2x2 Hamiltonian."""
    t = math.radians(theta_deg)
    h = 0.5 * MU_B * b_tesla * np.array([
        [g.g_parallel * math.cos(t), g.g_perpendicular * math.sin(t)],
        [g.g_perpendicular * math.sin(t), -g.g_parallel * math.cos(t)],
    ])
    ev = np.linalg.eigvalsh(h)
    return float(ev[1] - ev[0])


class TestGTensor:
    def test_rejects_zero_and_nonfinite(self):
        with pytest.raises(ValueError):
            GTensor(0.0, -1.0)
        with pytest.raises(ValueError):
            GTensor(-1.0, float("nan"))
        with pytest.raises(ValueError):
            GTensor(-1.0, float("inf"))

    def test_from_magnitudes_applies_negative_convention(self):
        g = GTensor.from_magnitudes(0.915, 2.361)
        assert g.g_parallel == -0.915
        assert g.g_perpendicular == -2.361


class TestFieldConfig:
    def test_theta_range(self):
        with pytest.raises(ValueError):
            FieldConfig(0.31, -1.0)
        with pytest.raises(ValueError):
            FieldConfig(0.31, 90.5)

    def test_negative_field_rejected(self):
        with pytest.raises(ValueError):
            FieldConfig(-0.1, 10.0)


class TestEffectiveG:
    def test_parallel_limit(self):
        assert effective_g(GROUND, 0.0) == pytest.approx(0.915, abs=1e-12)

    def test_perpendicular_limit(self):
        assert effective_g(GROUND, 90.0) == pytest.approx(2.361, abs=1e-12)

    def test_midangle_against_eigenvalue_gap(self):
        # oracle: numeric gap of the 2x2 Hamiltonian divided by muB * B
        oracle = eigenvalue_gap_oracle(GROUND, 0.31, 45.0) / (MU_B * 0.31)
        assert oracle == pytest.approx(1.7905, abs=1e-4)
        assert effective_g(GROUND, 45.0) == pytest.approx(oracle, abs=1e-12)

    def test_out_of_range_theta(self):
        with pytest.raises(ValueError):
            effective_g(GROUND, 91.0)
        with pytest.raises(ValueError):
            effective_g(GROUND, -0.5)


class TestDoubletEigensystem:
    def test_splitting_at_zero_angle(self):
        # 0.915 * 13.99624 * 0.31 = 3.970033476
        es = doublet_eigensystem(GROUND, FieldConfig(0.31, 0.0))
        assert es.splitting_ghz == pytest.approx(0.915 * MU_B * 0.31, abs=1e-12)
        assert es.splitting_ghz == pytest.approx(3.971, abs=5e-3)

    def test_splitting_at_45_degrees(self):
        es = doublet_eigensystem(GROUND, FieldConfig(0.31, 45.0))
        assert es.splitting_ghz == pytest.approx(eigenvalue_gap_oracle(GROUND, 0.31, 45.0), rel=1e-12)
        assert es.splitting_ghz == pytest.approx(7.77, abs=1e-2)

    def test_excited_splitting_at_45_degrees(self):
        es = doublet_eigensystem(EXCITED, FieldConfig(0.31, 45.0))
        assert es.splitting_ghz == pytest.approx(3.57, abs=1e-2)

    def test_energies_ordered_and_symmetric(self):
        es = doublet_eigensystem(GROUND, FieldConfig(0.31, 30.0))
        assert es.energy_low_ghz <= es.energy_high_ghz
        assert es.energy_low_ghz == pytest.approx(-es.energy_high_ghz, abs=1e-12)

    @pytest.mark.parametrize("theta", [0.0, 13.0, 45.0, 77.5, 90.0])
    @pytest.mark.parametrize("spin_up_index", [0, 1])
    def test_eigenvector_invariants(self, theta, spin_up_index):
        es = doublet_eigensystem(GROUND, FieldConfig(0.31, theta), spin_up_index)
        low, high = es.coeff_low, es.coeff_high
        assert abs(np.vdot(low, low) - 1.0) < 1e-12
        assert abs(np.vdot(high, high) - 1.0) < 1e-12
        assert abs(np.vdot(low, high)) < 1e-12
        # structure (-c2*, c1*) up to a global phase
        partner = np.array([-np.conj(low[1]), np.conj(low[0])])
        overlap = abs(np.vdot(partner, high))
        assert overlap == pytest.approx(1.0, abs=1e-12)
        # phase convention: first nonzero component real and nonnegative
        first = low[0] if abs(low[0]) > 1e-14 else low[1]
        assert first.imag == pytest.approx(0.0, abs=1e-12)
        assert first.real >= 0

    def test_pure_states_at_zero_angle(self):
        ground = doublet_eigensystem(GROUND, FieldConfig(0.31, 0.0), spin_up_index=0)
        assert np.allclose(ground.coeff_low, [1.0, 0.0], atol=1e-12)
        assert np.allclose(np.abs(ground.coeff_high), [0.0, 1.0], atol=1e-12)
        # excited doublet: the +1/2 projection is the second basis state,
        # so the low level at theta=0 is the second field-free state
        excited = doublet_eigensystem(EXCITED, FieldConfig(0.31, 0.0), spin_up_index=1)
        assert np.allclose(np.abs(excited.coeff_low), [0.0, 1.0], atol=1e-12)

    def test_equal_weight_mixture_at_90_degrees(self):
        es = doublet_eigensystem(GROUND, FieldConfig(0.31, 90.0))
        assert np.allclose(np.abs(es.coeff_low), [math.sqrt(0.5)] * 2, atol=1e-12)
        assert np.allclose(np.abs(es.coeff_high), [math.sqrt(0.5)] * 2, atol=1e-12)

    def test_mixing_angle_closed_form(self):
        # tan(chi) = (g_perp / g_par) tan(theta); |coeffs| = (cos, sin)(chi / 2)
        for theta in np.arange(0.0, 90.0 + 0.5, 1.0):
            es = doublet_eigensystem(GROUND, FieldConfig(0.31, float(theta)))
            ratio = GROUND.g_perpendicular / GROUND.g_parallel
            chi = math.atan2(abs(ratio) * math.sin(math.radians(theta)), math.cos(math.radians(theta)))
            assert abs(abs(es.coeff_low[0]) - math.cos(chi / 2)) < 1e-9
            assert abs(abs(es.coeff_low[1]) - math.sin(chi / 2)) < 1e-9

    def test_zero_field_degenerate_convention(self):
        es = doublet_eigensystem(GROUND, FieldConfig(0.0, 45.0))
        assert es.splitting_ghz == 0.0
        assert np.allclose(es.coeff_low, [1.0, 0.0])
        assert np.allclose(es.coeff_high, [0.0, 1.0])

    def test_sign_swap_keeps_splitting_swaps_ordering(self):
        flipped = GTensor(-GROUND.g_parallel, -GROUND.g_perpendicular)
        field = FieldConfig(0.31, 25.0)
        es = doublet_eigensystem(GROUND, field)
        es_flipped = doublet_eigensystem(flipped, field)
        assert es_flipped.splitting_ghz == pytest.approx(es.splitting_ghz, rel=1e-12)
        assert abs(np.vdot(es_flipped.coeff_low, es.coeff_high)) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.vdot(es_flipped.coeff_high, es.coeff_low)) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_spin_up_index(self):
        with pytest.raises(ValueError):
            hamiltonian_ghz(GROUND, FieldConfig(0.31, 45.0), spin_up_index=2)


class TestZeemanSplitting:
    def test_zero_field(self):
        assert zeeman_splitting(GROUND, FieldConfig(0.0, 12.0)) == 0.0

    def test_ground_parallel(self):
        assert zeeman_splitting(GROUND, FieldConfig(0.31, 0.0)) == pytest.approx(3.970033476, abs=1e-9)

    def test_excited_parallel(self):
        # oracle: 1.13 * 13.99624 * 0.31 = 4.902882872
        assert zeeman_splitting(EXCITED, FieldConfig(0.31, 0.0)) == pytest.approx(
            1.13 * MU_B * 0.31, abs=1e-12)
        assert zeeman_splitting(EXCITED, FieldConfig(0.31, 0.0)) == pytest.approx(4.9029, abs=1e-3)

    @settings(max_examples=60, deadline=None)
    @given(b=st.floats(0.0, 6.0), k=st.floats(0.0, 5.0), theta=st.floats(0.0, 90.0))
    def test_linear_in_field(self, b, k, theta):
        s1 = zeeman_splitting(GROUND, FieldConfig(b, theta))
        s2 = zeeman_splitting(GROUND, FieldConfig(k * b, theta))
        assert s2 == pytest.approx(k * s1, rel=1e-9, abs=1e-12)
