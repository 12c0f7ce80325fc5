"""The two ring-shaped potentials, their exact gradients, and the Hamiltonian.

Both wells are axially symmetric and share the repulsive ring barrier
Q/2 * 1/(x^2+y^2) around the z-axis:

    oscillator well:  omega^2/2 * (x^2+y^2+z^2) + Q/2 * 1/(x^2+y^2)
    Coulomb well:     -Z / sqrt(x^2+y^2+z^2)    + Q/2 * 1/(x^2+y^2)

With Q = 0 they reduce exactly to the isotropic harmonic oscillator and the
attractive Coulomb potential. The reduced mass is 1 throughout.
"""

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError
from .phase import AXIS_EPSILON, PhasePoint, Vec3


@dataclass(frozen=True)
class OscillatorParams:
    """omega: trap frequency (> 0); Q: ring barrier strength (>= 0)."""

    omega: float
    Q: float

    def __post_init__(self):
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (self.Q >= 0.0 and math.isfinite(self.Q)):
            raise ValueError(f"Q must be non-negative and finite, got {self.Q}")


@dataclass(frozen=True)
class CoulombParams:
    """Z: attractive Coulomb strength (> 0); Q: ring barrier strength (>= 0)."""

    Z: float
    Q: float

    def __post_init__(self):
        if not (self.Z > 0.0 and math.isfinite(self.Z)):
            raise ValueError(f"Z must be positive and finite, got {self.Z}")
        if not (self.Q >= 0.0 and math.isfinite(self.Q)):
            raise ValueError(f"Q must be non-negative and finite, got {self.Q}")


Params = Union[OscillatorParams, CoulombParams]


def _check_ring_domain(Q, x, y):
    """The ring barrier is singular on the z-axis; reject its neighborhood."""
    if Q > 0.0 and x * x + y * y < AXIS_EPSILON * AXIS_EPSILON:
        raise DomainError(
            f"point (x={x}, y={y}) is within {AXIS_EPSILON} of the z-axis "
            f"while the ring strength Q={Q} is positive")


def _check_origin_domain(x, y, z):
    r2 = x * x + y * y + z * z
    if r2 < AXIS_EPSILON * AXIS_EPSILON:
        raise DomainError(
            f"point (x={x}, y={y}, z={z}) is within {AXIS_EPSILON} of the "
            f"Coulomb center")


def v_oscillator(params: OscillatorParams, q) -> float:
    """Oscillator-plus-ring potential at position q."""
    x, y, z = q
    _check_ring_domain(params.Q, x, y)
    value = 0.5 * params.omega ** 2 * (x * x + y * y + z * z)
    if params.Q > 0.0:
        value += 0.5 * params.Q / (x * x + y * y)
    return value


def v_coulomb(params: CoulombParams, q) -> float:
    """Coulomb-plus-ring potential at position q."""
    x, y, z = q
    _check_origin_domain(x, y, z)
    _check_ring_domain(params.Q, x, y)
    value = -params.Z / math.sqrt(x * x + y * y + z * z)
    if params.Q > 0.0:
        value += 0.5 * params.Q / (x * x + y * y)
    return value


def potential(params: Params, q) -> float:
    if isinstance(params, OscillatorParams):
        return v_oscillator(params, q)
    return v_coulomb(params, q)


def grad_v(params: Params, q) -> Vec3:
    """Exact gradient of the potential (the force is its negative)."""
    x, y, z = q
    return Vec3(*make_gradient(params)(x, y, z))


def make_gradient(params: Params):
    """Return a plain-float closure (x, y, z) -> (dV/dx, dV/dy, dV/dz).

    This is the single implementation of the gradient; grad_v and the
    numerical integrator both consume it. The ring term contributes
    (-Q x / rho^4, -Q y / rho^4, 0) with rho^2 = x^2 + y^2.
    """
    Q = params.Q
    eps2 = AXIS_EPSILON * AXIS_EPSILON
    if isinstance(params, OscillatorParams):
        w2 = params.omega ** 2

        def grad(x, y, z):
            gx = w2 * x
            gy = w2 * y
            gz = w2 * z
            if Q > 0.0:
                rho2 = x * x + y * y
                if rho2 < eps2:
                    raise DomainError(
                        f"gradient at (x={x}, y={y}) too close to the z-axis "
                        f"for ring strength Q={Q}")
                qr = Q / (rho2 * rho2)
                gx -= qr * x
                gy -= qr * y
            return gx, gy, gz

        return grad

    Z = params.Z

    def grad(x, y, z):
        r2 = x * x + y * y + z * z
        if r2 < eps2:
            raise DomainError(
                f"gradient at (x={x}, y={y}, z={z}) too close to the Coulomb center")
        zr3 = Z / (r2 * math.sqrt(r2))
        gx = zr3 * x
        gy = zr3 * y
        gz = zr3 * z
        if Q > 0.0:
            rho2 = x * x + y * y
            if rho2 < eps2:
                raise DomainError(
                    f"gradient at (x={x}, y={y}) too close to the z-axis "
                    f"for ring strength Q={Q}")
            qr = Q / (rho2 * rho2)
            gx -= qr * x
            gy -= qr * y
        return gx, gy, gz

    return grad


def hamiltonian(params: Params, pt: PhasePoint) -> float:
    """Total energy |p|^2 / 2 + V(q)."""
    (x, y, z), (px, py, pz) = pt
    return 0.5 * (px * px + py * py + pz * pz) + potential(params, (x, y, z))
