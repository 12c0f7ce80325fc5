"""Closed-form trajectories of the oscillator-plus-ring system.

In cylindrical coordinates (rho, phi, z) the motion separates into three
constants (transverse energy E1, axial energy E2, axial angular momentum m)
plus three phases. With M = sqrt(m^2 + Q):

    rho^2(t) = [rho1^2 + rho2^2 + (rho2^2 - rho1^2) sin 2w(t - t0)] / 2
    z(t)     = z0 sin w(t - t0')
    phi(t)   = phi0 + m * Integral dt / rho^2(t)

where w is the trap frequency and rho1, rho2, z0 are the libration turning
points. The azimuth is defined here by the quadrature identity
d(phi)/dt = m / rho^2, evaluated in closed form with explicit branch
accumulation so it is continuous for all t; the equivalent single-arcsin
form (valid on one radial half-period) is kept for cross-checks.

Radial period: pi/w. Axial period: 2 pi/w. Bounded orbits with Q = 0 and
m = 0 run through the axis; they use a signed radial coordinate and are the
only orbits allowed to touch rho = 0.
"""

import math
from dataclasses import dataclass

from .errors import DomainError
from .phase import AXIS_EPSILON, PhasePoint, Vec3, require_finite
from .potentials import OscillatorParams

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OscillatorOrbit:
    """Constants and phases that fully parametrize one bounded orbit.

    E1/E2 are the transverse/axial energies, m the axial angular momentum,
    M_abs = sqrt(m^2 + Q). rho1 <= rho2 and z0 bound the librations:
    rho1 * rho2 = M_abs / omega and rho1^2 + rho2^2 = 2 E1 / omega^2.
    t0 anchors the radial phase, t0p the axial phase, and phi0 is the
    azimuth at t0 (for axis-crossing orbits: the fixed line-of-motion
    azimuth).
    """

    params: OscillatorParams
    E1: float
    E2: float
    m: float
    M_abs: float
    rho1: float
    rho2: float
    z0: float
    t0: float
    t0p: float
    phi0: float

    @property
    def through_axis(self) -> bool:
        """True for the Q = 0, m = 0 orbits that cross the z-axis."""
        return self.M_abs == 0.0


def turning_points(params: OscillatorParams, E1: float, m: float):
    """Radial libration bounds (rho1, rho2) for transverse energy E1.

    rho_{1,2}^2 = (E1 -/+ sqrt(E1^2 - omega^2 M^2)) / omega^2; requires
    E1 >= omega * |M| (the circular-orbit minimum).
    """
    w2 = params.omega ** 2
    M2 = m * m + params.Q
    disc = E1 * E1 - w2 * M2
    scale = max(E1 * E1, w2 * M2)
    if disc < 0.0:
        if disc < -1e-12 * scale:
            raise DomainError(
                f"E1={E1} below the circular minimum omega*|M|="
                f"{math.sqrt(w2 * M2)}")
        disc = 0.0
    root = math.sqrt(disc)
    if E1 + root == 0.0:
        return (0.0, 0.0)
    # rho1^2 written as M^2/(E1+root) to avoid cancellation for small M.
    rho1 = math.sqrt(M2 / (E1 + root))
    rho2 = math.sqrt((E1 + root) / w2)
    return (rho1, rho2)


def orbit_from_state(params: OscillatorParams, pt: PhasePoint,
                     t: float = 0.0) -> OscillatorOrbit:
    """Fit the orbit constants and phases so the closed form passes
    through `pt` at time `t`."""
    require_finite(pt)
    (x, y, z), (px, py, pz) = pt
    w = params.omega
    Q = params.Q
    rho2_sq = x * x + y * y
    if Q > 0.0 and rho2_sq < AXIS_EPSILON * AXIS_EPSILON:
        raise DomainError(f"state on the z-axis (x={x}, y={y}) with Q={Q}")
    m = x * py - y * px
    E1 = 0.5 * (px * px + py * py) + 0.5 * w * w * rho2_sq
    if Q > 0.0:
        E1 += 0.5 * Q / rho2_sq
    E2 = 0.5 * (pz * pz + w * w * z * z)
    M = math.sqrt(m * m + Q)
    rho1, rho2 = turning_points(params, E1, m)
    z0 = math.sqrt(2.0 * E2) / w

    # Axial phase: z = z0 sin w(t - t0p).
    if z0 == 0.0:
        t0p = t
    else:
        chi = math.atan2(z / z0, pz / (z0 * w))
        t0p = t - chi / w

    if M == 0.0:
        # Axis-crossing line orbit: signed transverse coordinate
        # u(t) = rho2 sin w(t - t0) along the fixed direction phi0.
        rho = math.sqrt(rho2_sq)
        if rho > 0.0:
            dx, dy = x / rho, y / rho
            u, udot = rho, (x * px + y * py) / rho
        elif px * px + py * py > 0.0:
            pnorm = math.hypot(px, py)
            dx, dy = px / pnorm, py / pnorm
            u, udot = 0.0, pnorm
        else:
            dx, dy = 1.0, 0.0
            u, udot = 0.0, 0.0
        phi0 = math.atan2(dy, dx)
        if rho2 == 0.0:
            t0 = t
        else:
            alpha = math.atan2(u / rho2, udot / (rho2 * w))
            t0 = t - alpha / w
        return OscillatorOrbit(params, E1, E2, m, M, rho1, rho2, z0,
                               t0, t0p, phi0)

    rho = math.sqrt(rho2_sq)
    rho_dot = (x * px + y * py) / rho
    a = rho1 * rho1 + rho2 * rho2
    b = rho2 * rho2 - rho1 * rho1
    if b <= 1e-13 * a:
        # Circular radial motion: the radial phase is meaningless.
        psi0 = 0.0
        t0 = t
    else:
        psi0 = math.atan2(2.0 * rho2_sq - a, 2.0 * rho * rho_dot / w)
        t0 = t - psi0 / (2.0 * w)
    phi_obs = math.atan2(y, x)
    phi0 = phi_obs - (m / w) * _azimuth_progress(a, b, psi0)
    return OscillatorOrbit(params, E1, E2, m, M, rho1, rho2, z0, t0, t0p, phi0)


def orbit_from_constants(params: OscillatorParams, E1: float, E2: float,
                         m: float, t0: float = 0.0, t0p: float = 0.0,
                         phi0: float = 0.0) -> OscillatorOrbit:
    """Build an orbit directly from (E1, E2, m) plus phases."""
    if E2 < 0.0:
        raise DomainError(f"axial energy E2 must be >= 0, got {E2}")
    rho1, rho2 = turning_points(params, E1, m)
    M = math.sqrt(m * m + params.Q)
    z0 = math.sqrt(2.0 * E2) / params.omega
    return OscillatorOrbit(params, float(E1), float(E2), float(m), M,
                           rho1, rho2, z0, float(t0), float(t0p), float(phi0))


def periods(orbit: OscillatorOrbit):
    """(radial, axial, overall) periods: (pi/w, 2pi/w, 2pi/w)."""
    w = orbit.params.omega
    return (math.pi / w, _TWO_PI / w, _TWO_PI / w)


def trap_period(params: OscillatorParams) -> float:
    """The base oscillator period 2 pi / omega."""
    return _TWO_PI / params.omega


def rho_of_t(orbit: OscillatorOrbit, t: float) -> float:
    """Cylindrical radius at time t (the unsigned distance to the axis)."""
    if orbit.through_axis:
        return abs(_signed_u(orbit, t)[0])
    psi = 2.0 * orbit.params.omega * (t - orbit.t0)
    return math.sqrt(_rho_squared(orbit, psi))


def z_of_t(orbit: OscillatorOrbit, t: float) -> float:
    return orbit.z0 * math.sin(orbit.params.omega * (t - orbit.t0p))


def phi_of_t(orbit: OscillatorOrbit, t: float) -> float:
    """Continuous (branch-accumulated) azimuth at time t."""
    if orbit.m == 0.0 or orbit.through_axis:
        return orbit.phi0
    w = orbit.params.omega
    a = orbit.rho1 ** 2 + orbit.rho2 ** 2
    b = orbit.rho2 ** 2 - orbit.rho1 ** 2
    psi = 2.0 * w * (t - orbit.t0)
    return orbit.phi0 + (orbit.m / w) * _azimuth_progress(a, b, psi)


def state_of_t(orbit: OscillatorOrbit, t: float) -> PhasePoint:
    """Phase point at time t from the closed-form trajectory; momenta are
    the analytic time derivatives."""
    w = orbit.params.omega
    z = orbit.z0 * math.sin(w * (t - orbit.t0p))
    zdot = orbit.z0 * w * math.cos(w * (t - orbit.t0p))

    if orbit.through_axis:
        u, udot = _signed_u(orbit, t)
        c0, s0 = math.cos(orbit.phi0), math.sin(orbit.phi0)
        return PhasePoint(Vec3(u * c0, u * s0, z),
                          Vec3(udot * c0, udot * s0, zdot))

    a = orbit.rho1 ** 2 + orbit.rho2 ** 2
    b = orbit.rho2 ** 2 - orbit.rho1 ** 2
    psi = 2.0 * w * (t - orbit.t0)
    rho_sq = 0.5 * (a + b * math.sin(psi))
    rho = math.sqrt(rho_sq)
    rho_dot = 0.5 * b * w * math.cos(psi) / rho
    if orbit.m == 0.0:
        phi, phi_dot = orbit.phi0, 0.0
    else:
        phi = orbit.phi0 + (orbit.m / w) * _azimuth_progress(a, b, psi)
        phi_dot = orbit.m / rho_sq
    cphi, sphi = math.cos(phi), math.sin(phi)
    return PhasePoint(
        Vec3(rho * cphi, rho * sphi, z),
        Vec3(rho_dot * cphi - rho * phi_dot * sphi,
             rho_dot * sphi + rho * phi_dot * cphi,
             zdot))


def phi_arcsin_branch(orbit: OscillatorOrbit, t: float) -> float:
    """Single-arcsin closed form of the azimuth, without its constant.

    Valid (up to an additive constant) on radial half-periods where
    cos 2w(t - t0) > 0; elsewhere its derivative flips sign. Kept as an
    independent cross-check of phi_of_t on the principal branch.
    """
    if orbit.M_abs == 0.0:
        raise DomainError("arcsin azimuth form undefined for M = 0 orbits")
    a = orbit.rho1 ** 2 + orbit.rho2 ** 2
    b = orbit.rho2 ** 2 - orbit.rho1 ** 2
    s = math.sin(2.0 * orbit.params.omega * (t - orbit.t0))
    arg = (a * s + b) / (b * s + a)
    arg = min(1.0, max(-1.0, arg))
    return 0.5 * (orbit.m / orbit.M_abs) * math.asin(arg)


def _rho_squared(orbit, psi):
    a = orbit.rho1 ** 2 + orbit.rho2 ** 2
    b = orbit.rho2 ** 2 - orbit.rho1 ** 2
    return 0.5 * (a + b * math.sin(psi))


def _signed_u(orbit, t):
    """Signed transverse coordinate of an axis-crossing line orbit."""
    w = orbit.params.omega
    u = orbit.rho2 * math.sin(w * (t - orbit.t0))
    udot = orbit.rho2 * w * math.cos(w * (t - orbit.t0))
    return u, udot


def _azimuth_progress(a, b, psi):
    """Continuous integral of d(psi') / (a + b sin psi') from 0 to psi.

    a > b >= 0 is guaranteed (a - b = 2 rho1^2 > 0 whenever m != 0). The
    antiderivative (2/c) atan[(a tan(psi/2) + b)/c], c = sqrt(a^2 - b^2),
    jumps at odd multiples of pi; each full 2 pi turn contributes 2 pi / c,
    accumulated here explicitly.
    """
    c = math.sqrt(a * a - b * b)
    turns = math.floor((psi + math.pi) / _TWO_PI)
    psi_loc = psi - _TWO_PI * turns
    val = math.atan((a * math.tan(0.5 * psi_loc) + b) / c)
    anchor = math.atan(b / c)
    return (2.0 / c) * (val + math.pi * turns - anchor)
