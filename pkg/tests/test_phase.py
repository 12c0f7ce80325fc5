"""Phase-space primitives: cross products, gradients, Poisson brackets."""

import math

import numpy as np
import pytest

from helpers import random_point
from ring_dynamics import (DomainError, OscillatorParams, PhaseFunction,
                           PhasePoint, angular_momentum, numerical_gradient,
                           poisson_bracket, v_oscillator)
from ring_dynamics.integrals import oscillator_integral_functions
from ring_dynamics.potentials import grad_v, hamiltonian


def test_angular_momentum_unit_cross():
    L = angular_momentum(PhasePoint.of(1, 0, 0, 0, 1, 0))
    assert L == (0.0, 0.0, 1.0)


def test_angular_momentum_parallel_vanishes():
    L = angular_momentum(PhasePoint.of(1, 0, 0, 2, 0, 0))
    assert L == (0.0, 0.0, 0.0)


def test_angular_momentum_generic():
    L = angular_momentum(PhasePoint.of(1, 2, 3, 4, 5, 6))
    assert L == (-3.0, 6.0, -3.0)


def test_gradient_of_constant_is_zero():
    grad = numerical_gradient(lambda pt: 4.2, PhasePoint.of(1, 2, 3, 4, 5, 6))
    assert np.all(grad == 0.0)


def test_gradient_of_bilinear_form():
    pt = PhasePoint.of(0.7, -1.2, 0.4, 1.3, 0.2, -0.8)
    grad = numerical_gradient(lambda p: p.q.x * p.p.x, pt)
    expected = np.array([1.3, 0, 0, 0.7, 0, 0])
    assert np.max(np.abs(grad - expected)) < 1e-9


def test_gradient_matches_analytic_hamiltonian():
    # Central differences are O(h^2); the analytic gradient is the oracle.
    params = OscillatorParams(1.0, 2.0)
    pt = PhasePoint.of(1.1, -0.6, 0.4, 0.3, 0.8, -0.2)
    num = numerical_gradient(lambda p: hamiltonian(params, p), pt)
    ana = np.array([*grad_v(params, pt.q), *pt.p])
    h = float(np.finfo(float).eps) ** (1.0 / 3.0)
    scale = max(1.0, float(np.max(np.abs(ana))))
    assert np.max(np.abs(num - ana)) < 10.0 * h * h * scale


def test_gradient_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        numerical_gradient(lambda pt: 0.0, PhasePoint.of(1, 0, 0, 0, 0, 0), h=0.0)


def test_gradient_stencil_domain_error_propagates():
    # Stencil straddles the rejected neighborhood of the z-axis.
    params = OscillatorParams(1.0, 2.0)
    pt = PhasePoint.of(2e-9, 0.0, 0.5, 0.0, 0.0, 0.0)
    assert v_oscillator(params, pt.q) > 0.0
    with pytest.raises(DomainError):
        numerical_gradient(lambda p: v_oscillator(params, p.q), pt, h=1.5e-9)


def test_canonical_bracket_relations():
    rng = np.random.default_rng(7)
    for _ in range(5):
        pt = random_point(rng)
        for i in range(3):
            for j in range(3):
                qi = lambda p, i=i: p.q[i]
                pj = lambda p, j=j: p.p[j]
                qj = lambda p, j=j: p.q[j]
                pi = lambda p, i=i: p.p[i]
                delta = 1.0 if i == j else 0.0
                assert abs(poisson_bracket(qi, pj, pt) - delta) < 1e-9
                assert abs(poisson_bracket(qi, qj, pt)) < 1e-9
                assert abs(poisson_bracket(pi, pj, pt)) < 1e-9


def _random_quadratic(rng):
    c = rng.uniform(-1.0, 1.0, (6, 6))
    c = 0.5 * (c + c.T)
    lin = rng.uniform(-1.0, 1.0, 6)

    def fn(pt):
        v = pt.to_array()
        return float(v @ c @ v + lin @ v)

    return fn


def test_bracket_antisymmetry():
    rng = np.random.default_rng(11)
    for _ in range(10):
        f = _random_quadratic(rng)
        g = _random_quadratic(rng)
        pt = random_point(rng)
        fg = poisson_bracket(f, g, pt)
        gf = poisson_bracket(g, f, pt)
        assert abs(fg + gf) < 1e-10 * max(1.0, abs(fg))


def test_bracket_leibniz_rule():
    rng = np.random.default_rng(13)
    for _ in range(10):
        f = _random_quadratic(rng)
        g = _random_quadratic(rng)
        h = _random_quadratic(rng)
        pt = random_point(rng)
        fg = lambda p: f(p) * g(p)
        lhs = poisson_bracket(fg, h, pt)
        rhs = f(pt) * poisson_bracket(g, h, pt) + g(pt) * poisson_bracket(f, h, pt)
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs), abs(rhs))


def test_axial_symmetry_forces_lz_conservation():
    params = OscillatorParams(1.0, 2.0)
    rng = np.random.default_rng(17)
    lz = lambda pt: pt.q.x * pt.p.y - pt.q.y * pt.p.x
    for _ in range(5):
        pt = random_point(rng)
        assert abs(poisson_bracket(lz, lambda p: hamiltonian(params, p), pt)) < 1e-8


def test_bracket_of_first_two_oscillator_invariants_is_nonzero():
    # At q=(1,1,1), p=(0.3,-0.2,0.5) with omega=1, Q=2 the bracket of the
    # ring-shifted L^2 with the axial energy is -0.72 (frozen from the
    # finite-difference oracle): the two belong to different involution
    # triplets and do not commute with each other.
    params = OscillatorParams(1.0, 2.0)
    _, a1, a2, _ = oscillator_integral_functions(params)
    pt = PhasePoint.of(1.0, 1.0, 1.0, 0.3, -0.2, 0.5)
    numeric = poisson_bracket(a1, a2, pt, numerical=True)
    analytic = poisson_bracket(a1, a2, pt)
    assert abs(numeric - (-0.72)) < 1e-6
    assert abs(analytic - (-0.72)) < 1e-12


def test_phase_function_uses_analytic_gradient():
    grad_calls = []

    def grad(pt):
        grad_calls.append(pt)
        return np.arange(6.0)

    f = PhaseFunction(lambda pt: 0.0, grad)
    pt = PhasePoint.of(1, 0, 0, 0, 0, 0)
    assert f.has_gradient
    assert np.all(f.gradient(pt) == np.arange(6.0))
    assert grad_calls

    g = PhaseFunction(lambda pt: pt.q.x)
    assert not g.has_gradient
    assert abs(g.gradient(pt)[0] - 1.0) < 1e-9


def test_phase_point_array_round_trip():
    pt = PhasePoint.of(1, 2, 3, 4, 5, 6)
    assert PhasePoint.from_array(pt.to_array()) == pt
    assert pt.is_finite()
    assert not PhasePoint.of(math.nan, 0, 0, 0, 0, 0).is_finite()
