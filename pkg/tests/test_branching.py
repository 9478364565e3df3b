"""Tests of the Lambda-system construction and branching ratios."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeepump import constants
from zeepump.branching import (
    LambdaCoefficients,
    branching_ratios,
    branching_scan,
    excited_eigensystem,
    ground_eigensystem,
    lambda_coefficients,
    lambda_system,
    optimal_angle,
    transition_table,
)
from zeepump.zeeman import FieldConfig, GTensor, doublet_eigensystem, zeeman_splitting

GROUND = GTensor(constants.GROUND_G_PARALLEL, constants.GROUND_G_PERPENDICULAR)
EXCITED = GTensor(constants.EXCITED_G_PARALLEL, constants.EXCITED_G_PERPENDICULAR)
FIELD_45 = FieldConfig(0.31, 45.0)


def mixing_angle(g: GTensor, theta_deg: float) -> float:
    """tan(chi) = (g_perp / g_par) tan(theta), chi in [0, pi/2]."""
    ratio = abs(g.g_perpendicular / g.g_parallel)
    t = math.radians(theta_deg)
    return math.atan2(ratio * math.sin(t), math.cos(t))


def closed_form_r_parallel(theta_deg: float) -> float:
    """Independent oracle: R_par = tan^2((chi_g - chi_e) / 2)."""
    half = (mixing_angle(GROUND, theta_deg) - mixing_angle(EXCITED, theta_deg)) / 2.0
    return math.tan(half) ** 2


class TestLambdaCoefficients:
    def test_pure_states_at_zero_angle(self):
        co = lambda_system(GROUND, EXCITED, FieldConfig(0.31, 0.0))
        assert abs(co.alpha) == pytest.approx(1.0, abs=1e-12)
        assert abs(co.beta) == pytest.approx(0.0, abs=1e-12)
        # the low excited level at theta=0 is the second basis state
        assert abs(co.gamma) == pytest.approx(0.0, abs=1e-12)
        assert abs(co.delta) == pytest.approx(1.0, abs=1e-12)

    def test_equal_weights_at_90_degrees(self):
        co = lambda_system(GROUND, EXCITED, FieldConfig(0.31, 90.0))
        for c in (co.alpha, co.beta, co.gamma, co.delta):
            assert abs(c) == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_half_angle_values_at_45_degrees(self):
        # oracle: cos/sin of half the mixing angles
        co = lambda_system(GROUND, EXCITED, FIELD_45)
        chi_g = mixing_angle(GROUND, 45.0)
        chi_e = mixing_angle(EXCITED, 45.0)
        assert chi_g == pytest.approx(math.atan(2.5803), abs=1e-4)
        assert abs(co.alpha) == pytest.approx(math.cos(chi_g / 2), abs=1e-12)
        assert abs(co.beta) == pytest.approx(math.sin(chi_g / 2), abs=1e-12)
        assert abs(co.gamma) == pytest.approx(math.sin(chi_e / 2), abs=1e-12)
        assert abs(co.delta) == pytest.approx(math.cos(chi_e / 2), abs=1e-12)
        assert abs(co.alpha) == pytest.approx(0.825033, abs=1e-6)
        assert abs(co.beta) == pytest.approx(0.565084, abs=1e-6)

    def test_real_in_coplanar_case(self):
        assert lambda_system(GROUND, EXCITED, FIELD_45).is_real

    def test_mismatched_fields_rejected(self):
        g = ground_eigensystem(GROUND, FIELD_45)
        e = excited_eigensystem(EXCITED, FieldConfig(0.31, 44.0))
        with pytest.raises(ValueError, match="different fields"):
            lambda_coefficients(g, e)

    def test_wrong_basis_mapping_rejected(self):
        g = ground_eigensystem(GROUND, FIELD_45)
        e_wrong = doublet_eigensystem(EXCITED, FIELD_45, spin_up_index=0)
        with pytest.raises(ValueError, match="basis mapping"):
            lambda_coefficients(g, e_wrong)

    def test_norm_validation(self):
        with pytest.raises(ValueError):
            LambdaCoefficients(1.0, 1.0, 1.0, 0.0)


class TestBranchingRatios:
    def test_vanishes_at_zero_angle(self):
        res = branching_ratios(lambda_system(GROUND, EXCITED, FieldConfig(0.31, 0.0)))
        assert res.r_parallel == 0.0
        assert res.r_perpendicular_infinite

    def test_value_at_45_degrees(self):
        res = branching_ratios(lambda_system(GROUND, EXCITED, FIELD_45))
        assert res.r_parallel == pytest.approx(0.270, abs=1e-3)

    def test_value_at_51_degrees(self):
        res = branching_ratios(lambda_system(GROUND, EXCITED, FieldConfig(0.31, 51.0)))
        assert res.r_parallel == pytest.approx(0.278, abs=1e-3)

    def test_reciprocity(self):
        for theta in np.arange(1.0, 90.0, 1.0):
            res = branching_ratios(lambda_system(GROUND, EXCITED, FieldConfig(0.31, float(theta))))
            assert abs(res.r_parallel * res.r_perpendicular - 1.0) < 1e-9

    def test_matches_closed_form_oracle(self):
        for theta in np.arange(0.0, 90.0 + 0.25, 0.5):
            res = branching_ratios(lambda_system(GROUND, EXCITED, FieldConfig(0.31, float(theta))))
            assert abs(res.r_parallel - closed_form_r_parallel(float(theta))) < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(phase_g=st.floats(0.0, 2 * math.pi), phase_e=st.floats(0.0, 2 * math.pi))
    def test_global_phase_invariance(self, phase_g, phase_e):
        co = lambda_system(GROUND, EXCITED, FIELD_45)
        rotated = LambdaCoefficients(
            alpha=co.alpha * cmath.exp(1j * phase_g),
            beta=co.beta * cmath.exp(1j * phase_g),
            gamma=co.gamma * cmath.exp(1j * phase_e),
            delta=co.delta * cmath.exp(1j * phase_e),
        )
        base = branching_ratios(co)
        res = branching_ratios(rotated)
        assert res.r_parallel == pytest.approx(base.r_parallel, rel=1e-9)
        assert res.r_perpendicular == pytest.approx(base.r_perpendicular, rel=1e-9)


class TestTransitionTable:
    def table(self, theta):
        field = FieldConfig(0.31, theta)
        return transition_table(
            lambda_system(GROUND, EXCITED, field),
            zeeman_splitting(GROUND, field),
            zeeman_splitting(EXCITED, field),
        )

    def test_offsets_at_45_degrees(self):
        # derived from splittings 7.7685 and 3.5717 GHz
        t = self.table(45.0)
        assert t["b"].offset_ghz == pytest.approx(-2.10, abs=0.02)
        assert t["c"].offset_ghz == pytest.approx(2.10, abs=0.02)
        assert t["a"].offset_ghz == pytest.approx(-5.67, abs=0.02)
        assert t["d"].offset_ghz == pytest.approx(5.67, abs=0.02)

    def test_inner_offsets_at_zero_angle(self):
        # (4.902883 - 3.970033) / 2 = 0.466425
        t = self.table(0.0)
        assert t["c"].offset_ghz == pytest.approx(0.466, abs=1e-3)

    def test_offsets_symmetric_and_ordered(self):
        for theta in (0.0, 20.0, 45.0, 70.0, 90.0):
            t = self.table(theta)
            offs = t.offsets_ghz
            assert np.all(np.diff(offs) >= 0)
            assert abs(offs[0] + offs[3]) < 1e-9
            assert abs(offs[1] + offs[2]) < 1e-9

    def test_outer_pair_is_spin_flip(self):
        t = self.table(45.0)
        assert t["a"].spin_flip and t["d"].spin_flip
        assert not t["b"].spin_flip and not t["c"].spin_flip

    def test_pi_forbidden_outer_lines_at_zero_angle(self):
        t = self.table(0.0)
        assert t["a"].strength_pi == pytest.approx(0.0, abs=1e-12)
        assert t["d"].strength_pi == pytest.approx(0.0, abs=1e-12)
        # sigma light couples only the outer lines there
        assert t["b"].strength_sigma == pytest.approx(0.0, abs=1e-12)

    def test_strength_sums_invariant_over_theta(self):
        for theta in np.arange(0.0, 90.5, 5.0):
            t = self.table(float(theta))
            assert t.strengths_pi.sum() == pytest.approx(2.0, abs=1e-9)
            assert t.strengths_sigma.sum() == pytest.approx(2.0, abs=1e-9)

    def test_flip_over_preserve_equals_branching_ratio(self):
        field = FieldConfig(0.31, 37.0)
        co = lambda_system(GROUND, EXCITED, field)
        t = transition_table(co, zeeman_splitting(GROUND, field), zeeman_splitting(EXCITED, field))
        res = branching_ratios(co)
        assert t["a"].strength_pi / t["b"].strength_pi == pytest.approx(res.r_parallel, rel=1e-9)
        assert t["a"].strength_sigma / t["b"].strength_sigma == pytest.approx(res.r_perpendicular, rel=1e-9)

    def test_negative_splitting_rejected(self):
        co = lambda_system(GROUND, EXCITED, FIELD_45)
        with pytest.raises(ValueError):
            transition_table(co, -1.0, 0.5)


class TestBranchingScan:
    def test_empty_grid(self):
        assert branching_scan(GROUND, EXCITED, 0.31, []) == []

    def test_zero_angle_row(self):
        rows = branching_scan(GROUND, EXCITED, 0.31, [0.0])
        assert rows[0][0] == 0.0
        assert rows[0][1] == 0.0
        assert math.isinf(rows[0][2])

    def test_45_degree_row(self):
        rows = branching_scan(GROUND, EXCITED, 0.31, [45.0])
        assert rows[0][1] == pytest.approx(0.270, abs=1e-3)
        assert rows[0][2] == pytest.approx(3.70, abs=0.02)

    def test_90_degree_row(self):
        rows = branching_scan(GROUND, EXCITED, 0.31, [90.0])
        assert rows[0][1] == pytest.approx(0.0, abs=1e-9)

    def test_misalignment_lifts_zero_angle(self):
        rows = branching_scan(GROUND, EXCITED, 0.31, [0.0], misalignment_deg=2.0)
        assert rows[0][1] > 0.0
        oracle = branching_scan(GROUND, EXCITED, 0.31, [2.0])[0][1]
        assert rows[0][1] == pytest.approx(oracle, rel=1e-12)


class TestOptimalAngle:
    def test_default_tensors(self):
        theta, r = optimal_angle(GROUND, EXCITED, 0.31)
        assert theta == pytest.approx(51.0, abs=0.5)
        assert r == pytest.approx(0.278, abs=1e-3)

    def test_equal_ratios_give_zero(self):
        scaled = GTensor(2.0 * GROUND.g_parallel, 2.0 * GROUND.g_perpendicular)
        theta, r = optimal_angle(GROUND, scaled, 0.31)
        assert r == pytest.approx(0.0, abs=1e-15)

    def test_against_dense_grid_oracle(self):
        # excited tensor with twice the ground anisotropy ratio
        ratio = abs(GROUND.g_perpendicular / GROUND.g_parallel)
        excited = GTensor(GROUND.g_parallel, GROUND.g_parallel * 2.0 * ratio)

        def r_par(theta):
            chi_g = mixing_angle(GROUND, theta)
            chi_e = mixing_angle(excited, theta)
            return math.tan((chi_g - chi_e) / 2.0) ** 2

        grid = np.arange(0.0, 90.0 + 0.005, 0.01)
        oracle_theta = grid[int(np.argmax([r_par(t) for t in grid]))]
        theta, r = optimal_angle(GROUND, excited, 0.31)
        assert theta == pytest.approx(oracle_theta, abs=0.02)

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            optimal_angle(GROUND, EXCITED, 0.31, resolution_deg=0.0)
