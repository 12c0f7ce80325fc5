"""The four integrals of motion: values, gradients, involution, independence."""

import math

import numpy as np
import pytest

from helpers import random_point
from ring_dynamics import (CoulombParams, OscillatorParams, PhasePoint,
                           coulomb_integrals, independence_rank,
                           involution_residuals, numerical_gradient,
                           oscillator_integrals, poisson_bracket)
from ring_dynamics.integrals import (available_sets, coulomb_integral_functions,
                                     integral_columns, integral_functions,
                                     involution_set,
                                     oscillator_integral_functions)


def test_oscillator_integral_values():
    vals = oscillator_integrals(OscillatorParams(1.0, 0.0),
                                PhasePoint.of(1, 0, 0, 0, 1, 0))
    assert (vals.H, vals.A1, vals.A2, vals.A3) == (1.0, 1.0, 0.0, 1.0)
    vals = oscillator_integrals(OscillatorParams(1.0, 2.0),
                                PhasePoint.of(1, 0, 0, 0, 1, 0))
    assert (vals.H, vals.A1, vals.A2, vals.A3) == (2.0, 3.0, 0.0, 1.0)


def test_planar_state_has_zero_axial_energy():
    rng = np.random.default_rng(3)
    for _ in range(10):
        pt = random_point(rng)
        flat = PhasePoint.of(pt.q.x, pt.q.y, 0.0, pt.p.x, pt.p.y, 0.0)
        vals = oscillator_integrals(OscillatorParams(1.7, 0.4), flat)
        assert vals.A2 == 0.0


def test_coulomb_integral_values():
    vals = coulomb_integrals(CoulombParams(1.0, 0.0),
                             PhasePoint.of(1, 0, 0, 0, 1, 0))
    assert (vals.H, vals.B1, vals.B2, vals.B3) == (-0.5, 1.0, 1.0, 0.0)


def test_equatorial_lenz_component_reduces():
    # z = 0 kills the Z z/r and ring corrections exactly.
    rng = np.random.default_rng(5)
    for _ in range(10):
        pt = random_point(rng)
        flat = PhasePoint.of(pt.q.x, pt.q.y, 0.0, *pt.p)
        vals = coulomb_integrals(CoulombParams(1.3, 0.7), flat)
        (x, y, _), (px, py, pz) = flat
        lx = y * pz
        ly = -x * pz
        assert abs(vals.B3 - (lx * py - ly * px)) < 1e-14


def test_pure_coulomb_lenz_matches_component_formula():
    # With Q = 0, B3 must equal Lx py - Ly px + Z z / r built from parts.
    rng = np.random.default_rng(7)
    params = CoulombParams(1.9, 0.0)
    for _ in range(25):
        pt = random_point(rng)
        (x, y, z), (px, py, pz) = pt
        lx = y * pz - z * py
        ly = z * px - x * pz
        r = math.sqrt(x * x + y * y + z * z)
        expected = lx * py - ly * px + params.Z * z / r
        assert abs(coulomb_integrals(params, pt).B3 - expected) < 1e-12


def test_invariant_lower_bounds():
    # A1 >= A3^2 + Q and B1 >= B2^2 + Q, hence M^2 = m^2 + Q >= Q.
    rng = np.random.default_rng(11)
    po = OscillatorParams(1.2, 1.7)
    pc = CoulombParams(1.5, 2.4)
    for _ in range(50):
        pt = random_point(rng)
        osc = oscillator_integrals(po, pt)
        cou = coulomb_integrals(pc, pt)
        assert osc.A2 >= 0.0
        assert osc.A1 >= osc.A3 ** 2 + po.Q - 1e-12
        assert cou.B1 >= cou.B2 ** 2 + pc.Q - 1e-12


def test_ring_l2_is_shared_between_systems():
    # A1 and B1 are the same phase-space function for equal Q.
    rng = np.random.default_rng(13)
    for _ in range(10):
        pt = random_point(rng)
        a1 = oscillator_integrals(OscillatorParams(2.0, 1.3), pt).A1
        b1 = coulomb_integrals(CoulombParams(1.0, 1.3), pt).B1
        assert a1 == b1


def test_all_integral_gradients_match_finite_differences():
    rng = np.random.default_rng(17)
    for params in (OscillatorParams(1.3, 2.2), OscillatorParams(0.8, 0.0),
                   CoulombParams(1.6, 1.1), CoulombParams(2.2, 0.0)):
        for fn in integral_functions(params):
            for _ in range(10):
                pt = random_point(rng)
                ana = fn.gradient(pt)
                num = numerical_gradient(fn, pt)
                scale = max(1.0, float(np.max(np.abs(ana))))
                assert np.max(np.abs(ana - num)) / scale < 1e-7, fn.name


def test_integral_functions_match_scalar_evaluators():
    rng = np.random.default_rng(19)
    po = OscillatorParams(1.1, 0.9)
    pc = CoulombParams(1.4, 0.6)
    for _ in range(10):
        pt = random_point(rng)
        osc = oscillator_integrals(po, pt)
        for fn, ref in zip(oscillator_integral_functions(po), osc.as_array()):
            assert abs(fn(pt) - ref) < 1e-12
        cou = coulomb_integrals(pc, pt)
        for fn, ref in zip(coulomb_integral_functions(pc), cou.as_array()):
            assert abs(fn(pt) - ref) < 1e-12


def test_involution_residuals_analytic():
    rng = np.random.default_rng(23)
    for params in (OscillatorParams(1.3, 2.0), OscillatorParams(1.3, 0.0),
                   CoulombParams(1.7, 2.5), CoulombParams(1.7, 0.0)):
        for set_id in available_sets(params):
            for _ in range(10):
                pt = random_point(rng)
                res = involution_residuals(params, set_id, pt, a=1.4, tau=0.35)
                assert max(abs(v) for v in res) < 1e-12, (set_id, res)


def test_involution_residuals_finite_difference_oracle():
    rng = np.random.default_rng(29)
    po = OscillatorParams(1.0, 2.0)
    pc = CoulombParams(1.5, 1.5)
    for params, set_id in [(po, "cylindrical"), (po, "spherical"),
                           (pc, "spherical"), (pc, "parabolic")]:
        for _ in range(5):
            pt = random_point(rng)
            res = involution_residuals(params, set_id, pt, numerical=True)
            assert max(abs(v) for v in res) < 1e-6, (set_id, res)


def test_limit_sets_rejected_for_positive_q():
    with pytest.raises(ValueError, match="Q = 0"):
        involution_set(OscillatorParams(1.0, 1.0), "cartesian_limit")
    with pytest.raises(ValueError, match="Q = 0"):
        involution_set(CoulombParams(1.0, 0.5), "tilted_l2_limit")
    with pytest.raises(ValueError, match="unknown"):
        involution_set(OscillatorParams(1.0, 1.0), "nonsense")


def test_spheroidal_family_commutes_for_any_shift():
    rng = np.random.default_rng(31)
    params = OscillatorParams(1.2, 1.8)
    for a in (0.5, 1.0, 2.5):
        pt = random_point(rng)
        for set_id in ("spheroidal_minus", "spheroidal_plus"):
            res = involution_residuals(params, set_id, pt, a=a)
            assert max(abs(v) for v in res) < 1e-12


def test_first_and_second_oscillator_invariants_do_not_commute():
    # The four integrals are not mutually in involution (the system is not
    # maximally super-integrable); this pair has bracket -0.72 here.
    params = OscillatorParams(1.0, 2.0)
    _, a1, a2, _ = oscillator_integral_functions(params)
    pt = PhasePoint.of(1.0, 1.0, 1.0, 0.3, -0.2, 0.5)
    assert abs(poisson_bracket(a1, a2, pt) + 0.72) < 1e-12


def test_independence_rank_generic_points():
    pt = PhasePoint.of(1.0, 0.5, -0.3, 0.2, -0.7, 0.4)
    assert independence_rank(OscillatorParams(1.0, 2.0), pt) == 4
    assert independence_rank(CoulombParams(1.0, 2.0), pt) == 4


def test_independence_rank_degenerates_on_symmetric_orbits():
    # Circular equatorial configurations collapse the Jacobian; this is
    # flagged by a smaller rank, not an error.
    pt = PhasePoint.of(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    assert independence_rank(CoulombParams(1.0, 0.0), pt) < 4
    assert independence_rank(OscillatorParams(1.0, 0.0), pt) < 4


def test_integral_columns_match_scalar_path():
    rng = np.random.default_rng(37)
    po = OscillatorParams(1.3, 1.1)
    pc = CoulombParams(1.8, 0.9)
    pts = [random_point(rng) for _ in range(8)]
    q = np.array([pt.q for pt in pts])
    p = np.array([pt.p for pt in pts])
    osc_cols = integral_columns(po, q, p)
    cou_cols = integral_columns(pc, q, p)
    for i, pt in enumerate(pts):
        assert np.max(np.abs(osc_cols[i] - oscillator_integrals(po, pt).as_array())) < 1e-12
        assert np.max(np.abs(cou_cols[i] - coulomb_integrals(pc, pt).as_array())) < 1e-12
