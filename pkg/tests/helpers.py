"""Shared test utilities: random valid phase points and a Simpson oracle."""

import math

import numpy as np

from ring_dynamics import PhasePoint


def random_point(rng, z_span=1.2, p_span=1.2, rho_lo=0.6, rho_hi=1.6):
    """A random phase point safely away from the z-axis and the origin."""
    rho = rng.uniform(rho_lo, rho_hi)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    z = rng.uniform(-z_span, z_span)
    px, py, pz = rng.uniform(-p_span, p_span, 3)
    return PhasePoint.of(rho * math.cos(phi), rho * math.sin(phi), z, px, py, pz)


def simpson(fn, a, b, n=20001):
    """Composite Simpson quadrature with n (odd) uniformly spaced nodes.

    Error ~ ((b-a)/n)^4 per unit length; with the default n it sits far
    below the 1e-8 tolerances it oracles for.
    """
    if n % 2 == 0:
        n += 1
    xs = np.linspace(a, b, n)
    ys = np.array([fn(x) for x in xs])
    h = (b - a) / (n - 1)
    return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-2:2].sum())


def max_state_diff(p1, p2):
    return max(abs(a - b) for a, b in zip(p1.to_array(), p2.to_array()))
