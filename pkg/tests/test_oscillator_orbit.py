"""Closed-form oscillator trajectories: turning points, phases, azimuth."""

import math

import numpy as np
import pytest

from helpers import max_state_diff, random_point, simpson
from ring_dynamics import DomainError, OscillatorParams, PhasePoint
from ring_dynamics.integrals import oscillator_integrals
from ring_dynamics.oscillator_orbit import (orbit_from_constants,
                                            orbit_from_state, periods,
                                            phi_arcsin_branch, phi_of_t,
                                            rho_of_t, state_of_t, trap_period,
                                            turning_points, z_of_t)

TWO_PI = 2.0 * math.pi


def test_turning_points_example():
    assert turning_points(OscillatorParams(1.0, 3.0), 2.5, 1.0) == (1.0, 2.0)


def test_turning_points_circular_boundary():
    params = OscillatorParams(1.0, 3.0)
    M = 2.0  # m = 1, Q = 3
    rho1, rho2 = turning_points(params, M, 1.0)  # E1 = omega * M
    assert abs(rho1 - rho2) < 1e-7
    assert abs(rho1 - math.sqrt(M)) < 1e-7


def test_turning_points_radial_line():
    rho1, rho2 = turning_points(OscillatorParams(1.0, 0.0), 1.0, 0.0)
    assert rho1 == 0.0
    assert abs(rho2 - math.sqrt(2.0)) < 1e-15


def test_turning_points_below_minimum_rejected():
    with pytest.raises(DomainError):
        turning_points(OscillatorParams(1.0, 3.0), 1.0, 1.0)


def test_orbit_from_state_example():
    params = OscillatorParams(1.0, 3.0)
    orbit = orbit_from_state(params, PhasePoint.of(1, 0, 0, 0, 2, 0), 0.0)
    assert orbit.m == 2.0
    assert abs(orbit.M_abs - math.sqrt(7.0)) < 1e-15
    assert abs(orbit.E1 - 4.0) < 1e-15
    assert orbit.E2 == 0.0


def test_orbit_invariant_relations():
    rng = np.random.default_rng(41)
    for Q in (0.0, 1.0, 3.0):
        params = OscillatorParams(1.3, Q)
        for _ in range(10):
            orbit = orbit_from_state(params, random_point(rng), 0.0)
            w = params.omega
            assert abs(orbit.rho1 * orbit.rho2 - orbit.M_abs / w) < 1e-10
            assert abs(orbit.rho1 ** 2 + orbit.rho2 ** 2 - 2 * orbit.E1 / w ** 2) < 1e-10
            assert abs(orbit.z0 - math.sqrt(2 * orbit.E2) / w) < 1e-12
            assert orbit.E1 >= w * orbit.M_abs - 1e-12
            assert orbit.E2 >= 0.0


def test_state_round_trip():
    rng = np.random.default_rng(43)
    for Q in (0.0, 0.7, 3.0):
        params = OscillatorParams(1.1, Q)
        for _ in range(20):
            pt = random_point(rng)
            t = rng.uniform(-5.0, 5.0)
            orbit = orbit_from_state(params, pt, t)
            assert max_state_diff(state_of_t(orbit, t), pt) < 1e-10


def test_periods_examples():
    orbit = orbit_from_constants(OscillatorParams(1.0, 1.0), 2.0, 0.3, 1.0)
    assert periods(orbit) == (math.pi, TWO_PI, TWO_PI)
    orbit = orbit_from_constants(OscillatorParams(2.0, 1.0), 4.0, 0.3, 1.0)
    t_rho, t_z, t_all = periods(orbit)
    assert (t_rho, t_z, t_all) == (math.pi / 2, math.pi, math.pi)
    assert t_z == 2.0 * t_rho


def test_libration_periods_in_time_domain():
    params = OscillatorParams(1.4, 2.0)
    orbit = orbit_from_constants(params, 3.0, 0.5, 0.9, phi0=0.7)
    t_rho, t_z, _ = periods(orbit)
    for t in np.linspace(0.0, 4.0, 17):
        assert abs(rho_of_t(orbit, t + t_rho) - rho_of_t(orbit, t)) < 1e-12
        assert abs(z_of_t(orbit, t + t_z) - z_of_t(orbit, t)) < 1e-12


def test_azimuth_matches_quadrature_oracle():
    # phi(t) - phi(0) must equal the integral of m / rho^2 over [0, t].
    params = OscillatorParams(1.0, 2.0)
    orbit = orbit_from_constants(params, 2.4, 0.4, 1.1, t0=0.3, phi0=0.2)
    t_end = 3.0 * trap_period(params)
    oracle = simpson(lambda t: orbit.m / rho_of_t(orbit, t) ** 2, 0.0, t_end,
                     n=40001)
    assert abs((phi_of_t(orbit, t_end) - phi_of_t(orbit, 0.0)) - oracle) < 1e-8


def test_azimuth_continuity():
    params = OscillatorParams(1.0, 3.0)
    orbit = orbit_from_constants(params, 2.5, 0.5, 1.0)
    ts = np.linspace(-7.0, 7.0, 4001)
    phis = np.array([phi_of_t(orbit, t) for t in ts])
    assert np.max(np.abs(np.diff(phis))) < 0.1
    # m > 0 azimuth must be non-decreasing.
    assert np.min(np.diff(phis)) > 0.0


def test_arcsin_branch_form_agrees_on_principal_branch():
    # The single-arcsin azimuth matches the quadrature form up to a
    # constant while cos 2w(t - t0) > 0.
    params = OscillatorParams(1.0, 3.0)
    orbit = orbit_from_constants(params, 2.5, 0.4, 1.0, t0=0.6, phi0=0.1)
    ts = orbit.t0 + np.linspace(-0.7, 0.7, 31)
    offset = phi_arcsin_branch(orbit, ts[0]) - phi_of_t(orbit, ts[0])
    for t in ts:
        assert abs(phi_arcsin_branch(orbit, t) - phi_of_t(orbit, t) - offset) < 1e-10


def test_envelope_bounds_hold_densely():
    rng = np.random.default_rng(47)
    for Q in (0.0, 1.0, 3.0):
        params = OscillatorParams(1.2, Q)
        orbit = orbit_from_state(params, random_point(rng), 0.0)
        for t in np.linspace(0.0, 3.0 * trap_period(params), 500):
            rho = rho_of_t(orbit, t)
            assert orbit.rho1 - 1e-10 <= rho <= orbit.rho2 + 1e-10
            assert abs(z_of_t(orbit, t)) <= orbit.z0 + 1e-10


def test_integrals_constant_along_closed_form():
    rng = np.random.default_rng(53)
    params = OscillatorParams(1.0, 2.0)
    for _ in range(5):
        orbit = orbit_from_state(params, random_point(rng), 0.0)
        ref = oscillator_integrals(params, state_of_t(orbit, 0.0)).as_array()
        for t in np.linspace(0.0, 2.0 * TWO_PI, 100):
            vals = oscillator_integrals(params, state_of_t(orbit, t)).as_array()
            rel = np.max(np.abs(vals - ref) / np.maximum(1.0, np.abs(ref)))
            assert rel < 1e-10


def test_pure_oscillator_orbits_close_after_one_period():
    rng = np.random.default_rng(59)
    params = OscillatorParams(1.7, 0.0)
    T = trap_period(params)
    for _ in range(10):
        orbit = orbit_from_state(params, random_point(rng), 0.0)
        for t in (0.0, 0.37, 2.2):
            assert max_state_diff(state_of_t(orbit, t + T),
                                  state_of_t(orbit, t)) < 1e-12


def test_zero_lz_orbit_freezes_azimuth_and_closes():
    params = OscillatorParams(1.0, 2.0)
    pt = PhasePoint.of(1.0, 0.0, 0.3, -0.4, 0.0, 0.5)  # m = 0, Q > 0
    orbit = orbit_from_state(params, pt, 0.0)
    assert orbit.m == 0.0
    T = trap_period(params)
    for t in np.linspace(0.0, 2.0 * T, 50):
        assert phi_of_t(orbit, t) == orbit.phi0
    assert max_state_diff(state_of_t(orbit, T), state_of_t(orbit, 0.0)) < 1e-12


def test_axis_crossing_line_orbit():
    # Q = 0, m = 0: straight-line oscillation through the axis.
    params = OscillatorParams(1.0, 0.0)
    pt = PhasePoint.of(0.8, 0.6, 0.2, 0.4, 0.3, -0.1)  # p_xy parallel to q_xy
    orbit = orbit_from_state(params, pt, 0.0)
    assert orbit.through_axis
    assert orbit.rho1 == 0.0
    assert max_state_diff(state_of_t(orbit, 0.0), pt) < 1e-12
    # The transverse motion stays on the fixed line through the axis.
    d = np.array([0.8, 0.6]) / 1.0
    crossed = False
    for t in np.linspace(0.0, TWO_PI, 200):
        s = state_of_t(orbit, t)
        transverse = np.array([s.q.x, s.q.y])
        assert abs(transverse @ (d[::-1] * [1.0, -1.0])) < 1e-12
        if transverse @ d < -1e-3:
            crossed = True
    assert crossed


def test_circular_orbit_has_constant_radius_and_linear_azimuth():
    params = OscillatorParams(1.0, 3.0)
    M = 2.0
    rho_c = math.sqrt(M)  # E1 = omega * M
    pt = PhasePoint.of(rho_c, 0.0, 0.0, 0.0, 1.0 / rho_c, 0.0)  # m = 1
    orbit = orbit_from_state(params, pt, 0.0)
    assert abs(orbit.rho1 - orbit.rho2) < 1e-7
    rate = orbit.m / rho_c ** 2
    for t in np.linspace(0.0, 10.0, 50):
        assert abs(rho_of_t(orbit, t) - rho_c) < 1e-7
        assert abs(phi_of_t(orbit, t) - (orbit.phi0 + rate * t)) < 1e-7


def test_planar_orbit_stays_exactly_planar():
    params = OscillatorParams(1.0, 3.0)
    pt = PhasePoint.of(1.0, 0.0, 0.0, 0.1, 1.2, 0.0)  # E2 = 0
    orbit = orbit_from_state(params, pt, 0.0)
    assert orbit.E2 == 0.0 and orbit.z0 == 0.0
    for t in np.linspace(0.0, 20.0, 200):
        assert state_of_t(orbit, t).q.z == 0.0


def test_orbit_from_constants_validation():
    params = OscillatorParams(1.0, 3.0)
    with pytest.raises(DomainError):
        orbit_from_constants(params, 2.5, -0.1, 1.0)
    with pytest.raises(DomainError):
        orbit_from_constants(params, 1.0, 0.0, 1.0)  # E1 < omega |M| = 2


def test_on_axis_state_with_ring_rejected():
    with pytest.raises(DomainError):
        orbit_from_state(OscillatorParams(1.0, 1.0),
                         PhasePoint.of(0.0, 0.0, 1.0, 0.0, 0.0, 0.5), 0.0)
