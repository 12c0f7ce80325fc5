"""Closed-form/semi-analytic trajectories of the Coulomb-plus-ring system.

In spherical coordinates (r, theta, phi) the bounded motion (E < 0) is
governed by three constants: energy E, the ring-shifted total angular
momentum K, and the axial angular momentum m, with M = sqrt(m^2 + Q).
The radial problem is exactly Keplerian with K playing the role of L^2:

    r oscillates in [r1, r2],  r_{1,2} = (Z -/+ sqrt(Z^2 + 2 E K)) / (-2E)

and r(t) is obtained by inverting the Kepler-like time equation on its
monotone half-branch (safeguarded Newton on the eccentric anomaly). In the
rescaled angle nu (d(nu)/dt = sqrt(K)/r^2, advancing by exactly 2 pi per
radial period) the polar motion is

    cos theta = cos(theta0) * sin(nu - nu_z),   sin(theta0) = M / sqrt(K)

so theta librates in [theta0, pi - theta0] with the radial period, and the
azimuth follows from the quadrature d(phi)/dt = m / (r^2 sin^2 theta),
evaluated in closed form with explicit branch accumulation. The two-arcsin
closed form of phi(theta), valid per polar half-cycle, is kept as a
cross-check. The radial/axial base period is T = 2 pi Z (-2E)^(-3/2).

Conventions: t0 is a pericenter passage time (the minimum of r adjacent to
the fitted state); beta0 = nu_z + pi/2 reproduces the ascending-branch
axial closed form z(r) (see axial_coordinate_ascending); phi0 is the
azimuth at nu = nu_z.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, UnboundedOrbitError
from .phase import PhasePoint, Vec3, require_finite
from .potentials import CoulombParams, hamiltonian

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CoulombOrbit:
    params: CoulombParams
    E: float
    K: float
    m: float
    M_abs: float
    r1: float
    r2: float
    theta0: float
    t0: float
    beta0: float
    phi0: float

    @property
    def semi_major(self) -> float:
        return 0.5 * (self.r1 + self.r2)

    @property
    def eccentricity(self) -> float:
        return (self.r2 - self.r1) / (self.r2 + self.r1)

    @property
    def mean_motion(self) -> float:
        return (-2.0 * self.E) ** 1.5 / self.params.Z

    @property
    def nu_z(self) -> float:
        """Rescaled angle at which z crosses zero going up."""
        return self.beta0 - 0.5 * math.pi

    @property
    def equatorial(self) -> bool:
        """K = M^2: theta is pinned to pi/2 and the motion is planar."""
        return math.cos(self.theta0) < 1e-12

    @property
    def through_axis(self) -> bool:
        """M = 0 (so Q = 0, m = 0): a planar orbit crossing the z-axis."""
        return self.M_abs == 0.0


def kepler_period(orbit: CoulombOrbit) -> float:
    """Radial (= axial) libration period 2 pi Z (-2E)^(-3/2)."""
    return _TWO_PI / orbit.mean_motion


def solve_kepler(mean_anom: float, ecc: float, tol: float = 1e-14) -> float:
    """Invert u - e sin(u) = mean_anom for the eccentric anomaly u.

    Newton iteration bracketed by bisection on the monotone branch; whole
    turns are split off first so u is returned on the same revolution as
    the mean anomaly. Accuracy: |residual| <= tol * (1 + |mean_anom|).
    """
    if not 0.0 <= ecc < 1.0:
        raise ValueError(f"eccentricity must be in [0, 1), got {ecc}")
    turns = math.floor(mean_anom / _TWO_PI)
    M = mean_anom - _TWO_PI * turns
    lo, hi = 0.0, _TWO_PI
    u = M + ecc * math.sin(M)
    for _ in range(120):
        f = u - ecc * math.sin(u) - M
        if abs(f) <= tol * (1.0 + abs(M)):
            break
        if f > 0.0:
            hi = u
        else:
            lo = u
        u_next = u - f / (1.0 - ecc * math.cos(u))
        if not lo < u_next < hi:
            u_next = 0.5 * (lo + hi)
        u = u_next
    return u + _TWO_PI * turns


def orbit_from_state(params: CoulombParams, pt: PhasePoint,
                     t: float = 0.0) -> CoulombOrbit:
    """Fit the orbit constants and phases so the trajectory passes through
    `pt` at time `t`. Raises UnboundedOrbitError for E >= 0."""
    require_finite(pt)
    (x, y, z), (px, py, pz) = pt
    Z, Q = params.Z, params.Q
    E = hamiltonian(params, pt)
    if E >= 0.0:
        raise UnboundedOrbitError(
            f"energy {E} >= 0: the motion is unbounded, no finite orbit exists")
    lx = y * pz - z * py
    ly = z * px - x * pz
    m = x * py - y * px
    l2 = lx * lx + ly * ly + m * m
    rho2 = x * x + y * y
    K = l2 + (Q * (1.0 + z * z / rho2) if Q > 0.0 else 0.0)
    if K <= 0.0:
        raise DomainError(
            "zero angular measure (K = 0): radial collision line through the "
            "center is not a supported orbit")
    M2 = m * m + Q
    M = math.sqrt(M2)

    a = Z / (-2.0 * E)
    n = (-2.0 * E) ** 1.5 / Z
    disc = max(0.0, Z * Z + 2.0 * E * K)
    e = math.sqrt(disc) / Z
    r1, r2 = a * (1.0 - e), a * (1.0 + e)
    s0 = min(1.0, math.sqrt(M2 / K))
    theta0 = math.asin(s0)
    w0 = math.sqrt(max(0.0, 1.0 - M2 / K))

    r = math.sqrt(rho2 + z * z)
    r_dot = (x * px + y * py + z * pz) / r

    # Radial phase: eccentric anomaly of the fitted state, then the
    # adjacent pericenter time.
    if e < 1e-12:
        u0 = 0.0
        t0 = t
    else:
        cos_u = min(1.0, max(-1.0, (1.0 - r / a) / e))
        sin_u = r_dot * r / (a * a * e * n)
        u0 = math.atan2(sin_u, cos_u)
        t0 = t - (u0 - e * math.sin(u0)) / n
    nu0 = _true_anomaly(u0, e)

    # Polar phase: cos theta = w0 sin(nu - nu_z).
    w = z / r
    w_dot = (pz * r - z * r_dot) / (r * r)
    if w0 < 1e-12:
        chi0 = 0.0
        nu_z = nu0
    else:
        chi0 = math.atan2(w, w_dot * r * r / math.sqrt(K))
        nu_z = nu0 - chi0
    beta0 = nu_z + 0.5 * math.pi

    if M == 0.0:
        # Planar orbit through the axis: signed horizontal coordinate
        # u_h = r cos(nu - nu_z) along the fixed direction phi0.
        u_h = r * math.cos(chi0)
        if abs(u_h) > 1e-12 * r:
            phi0 = math.atan2(y, x) if u_h > 0.0 else math.atan2(-y, -x)
        else:
            udot_h = r_dot * math.cos(chi0) - math.sin(chi0) * math.sqrt(K) / r
            if udot_h >= 0.0:
                phi0 = math.atan2(py, px)
            else:
                phi0 = math.atan2(-py, -px)
    else:
        phi0 = math.atan2(y, x) - (m / M) * _tilted_angle(s0, chi0)
    return CoulombOrbit(params, E, K, m, M, r1, r2, theta0, t0, beta0, phi0)


def orbit_from_constants(params: CoulombParams, E: float, K: float, m: float,
                         t0: float = 0.0, beta0: float = 0.5 * math.pi,
                         phi0: float = 0.0) -> CoulombOrbit:
    """Build an orbit directly from (E, K, m) plus phases."""
    if E >= 0.0:
        raise UnboundedOrbitError(f"energy {E} >= 0: no bounded orbit")
    if K <= 0.0:
        raise DomainError(f"K must be positive, got {K}")
    M2 = m * m + params.Q
    if M2 > K * (1.0 + 1e-12):
        raise DomainError(f"K={K} below M^2={M2}: no real polar libration")
    Z = params.Z
    disc = Z * Z + 2.0 * E * K
    if disc < -1e-12 * Z * Z:
        raise DomainError(
            f"E={E} below the circular minimum -Z^2/(2K)={-Z * Z / (2 * K)}")
    a = Z / (-2.0 * E)
    e = math.sqrt(max(0.0, disc)) / Z
    s0 = min(1.0, math.sqrt(M2 / K))
    return CoulombOrbit(params, float(E), float(K), float(m), math.sqrt(M2),
                        a * (1.0 - e), a * (1.0 + e), math.asin(s0),
                        float(t0), float(beta0), float(phi0))


def time_of_r(orbit: CoulombOrbit, r: float, half_cycle: int = 0) -> float:
    """Time at which the radius passes through r on a given half-cycle.

    Half-cycle 0 is the ascending branch t in [t0, t0 + T/2] (pericenter to
    apocenter); each following half-cycle reflects the branch and adds T/2.
    Rejected for (near-)circular orbits, where r(t) is constant.
    """
    T = kepler_period(orbit)
    if orbit.eccentricity < 1e-12:
        raise DomainError("time_of_r is undefined for circular orbits")
    offset = _ascending_offset(orbit, r)
    if half_cycle % 2 == 0:
        return orbit.t0 + 0.5 * T * half_cycle + offset
    return orbit.t0 + 0.5 * T * (half_cycle + 1) - offset


def r_of_t(orbit: CoulombOrbit, t: float) -> float:
    """Radius at time t, by safeguarded inversion of the time equation."""
    u = solve_kepler(orbit.mean_motion * (t - orbit.t0), orbit.eccentricity)
    return orbit.semi_major * (1.0 - orbit.eccentricity * math.cos(u))


def theta_of_t(orbit: CoulombOrbit, t: float) -> float:
    """Polar angle at time t."""
    _, _, _, nu = _radial_state(orbit, t)
    chi = nu - orbit.nu_z
    if orbit.equatorial:
        return 0.5 * math.pi
    w = math.cos(orbit.theta0) * math.sin(chi)
    return math.acos(min(1.0, max(-1.0, w)))


def phi_of_t(orbit: CoulombOrbit, t: float) -> float:
    """Continuous (branch-accumulated) azimuth at time t."""
    if orbit.through_axis or orbit.m == 0.0:
        return orbit.phi0
    _, _, _, nu = _radial_state(orbit, t)
    chi = nu - orbit.nu_z
    s0 = math.sin(orbit.theta0)
    return orbit.phi0 + (orbit.m / orbit.M_abs) * _tilted_angle(s0, chi)


def state_of_t(orbit: CoulombOrbit, t: float) -> PhasePoint:
    """Phase point at time t; momenta are the analytic time derivatives."""
    r, r_dot, _, nu = _radial_state(orbit, t)
    chi = nu - orbit.nu_z
    chi_dot = math.sqrt(orbit.K) / (r * r)

    if orbit.through_axis:
        u_h = r * math.cos(chi)
        udot_h = r_dot * math.cos(chi) - r * math.sin(chi) * chi_dot
        z = r * math.sin(chi)
        z_dot = r_dot * math.sin(chi) + r * math.cos(chi) * chi_dot
        c0, s0 = math.cos(orbit.phi0), math.sin(orbit.phi0)
        return PhasePoint(Vec3(u_h * c0, u_h * s0, z),
                          Vec3(udot_h * c0, udot_h * s0, z_dot))

    if orbit.equatorial:
        w, w_dot = 0.0, 0.0
    else:
        w0 = math.cos(orbit.theta0)
        w = w0 * math.sin(chi)
        w_dot = w0 * math.cos(chi) * chi_dot
    z = r * w
    z_dot = r_dot * w + r * w_dot
    sin_th = math.sqrt(1.0 - w * w)
    rho = r * sin_th
    rho_dot = r_dot * sin_th - r * w * w_dot / sin_th
    if orbit.m == 0.0:
        phi, phi_dot = orbit.phi0, 0.0
    else:
        s0 = math.sin(orbit.theta0)
        phi = orbit.phi0 + (orbit.m / orbit.M_abs) * _tilted_angle(s0, chi)
        phi_dot = orbit.m / (r * r * (1.0 - w * w))
    cphi, sphi = math.cos(phi), math.sin(phi)
    return PhasePoint(
        Vec3(rho * cphi, rho * sphi, z),
        Vec3(rho_dot * cphi - rho * phi_dot * sphi,
             rho_dot * sphi + rho * phi_dot * cphi,
             z_dot))


def axial_coordinate_ascending(orbit: CoulombOrbit, r: float) -> float:
    """z as a closed-form function of r on ascending half-cycles.

    z(r) = cos(theta0)/(r2 - r1) * { [2 r1 r2 - (r1 + r2) r] cos(beta0)
           + 2 sqrt(r1 r2) sqrt((r - r1)(r2 - r)) sin(beta0) }.
    On descending half-cycles the square-root term flips sign. Cross-check
    helper for the beta0 convention.
    """
    r1, r2 = orbit.r1, orbit.r2
    if not r1 <= r <= r2:
        raise DomainError(f"r={r} outside the radial bounds [{r1}, {r2}]")
    span = r2 - r1
    if span == 0.0:
        raise DomainError("undefined for circular orbits")
    root = math.sqrt(max(0.0, (r - r1) * (r2 - r)))
    return math.cos(orbit.theta0) / span * (
        (2.0 * r1 * r2 - (r1 + r2) * r) * math.cos(orbit.beta0)
        + 2.0 * math.sqrt(r1 * r2) * root * math.sin(orbit.beta0))


def azimuth_two_arcsin(orbit: CoulombOrbit, theta: float) -> float:
    """Two-arcsin closed form of the azimuth as a function of theta,
    without its additive constant.

    Valid (up to a constant) per polar half-cycle; its derivative tracks
    -sgn(cos(nu - nu_z)) times the quadrature rate, so the sign convention
    is fixed branch by branch. Undefined in the equatorial limit. Kept as
    an independent cross-check of phi_of_t.
    """
    w0 = math.cos(orbit.theta0)
    if w0 < 1e-12:
        raise DomainError("two-arcsin azimuth form undefined for equatorial orbits")
    s0sq = math.sin(orbit.theta0) ** 2
    w = math.cos(theta)
    g1 = (-1.0 + s0sq / (1.0 + w)) / w0
    g2 = (-1.0 + s0sq / (1.0 - w)) / w0
    g1 = min(1.0, max(-1.0, g1))
    g2 = min(1.0, max(-1.0, g2))
    if orbit.M_abs == 0.0:
        return 0.0
    return 0.5 * (orbit.m / orbit.M_abs) * (math.asin(g1) - math.asin(g2))


# ---------------------------------------------------------------------------

def _ascending_offset(orbit, r):
    """Time past pericenter at radius r on the ascending branch, via the
    closed-form time equation (the arcsin form of Kepler's equation)."""
    r1, r2 = orbit.r1, orbit.r2
    slack = 1e-9 * (r2 - r1)
    if not r1 - slack <= r <= r2 + slack:
        raise DomainError(f"r={r} outside the radial bounds [{r1}, {r2}]")
    r = min(r2, max(r1, r))
    E, Z = orbit.E, orbit.params.Z
    sqrt_term = math.sqrt(max(0.0, (r - r1) * (r2 - r)))
    asin_arg = min(1.0, max(-1.0, (2.0 * r - r1 - r2) / (r2 - r1)))
    tau = (-(-2.0 * E) ** -0.5 * sqrt_term
           + Z * (-2.0 * E) ** -1.5 * math.asin(asin_arg))
    return tau + 0.25 * kepler_period(orbit)


def _true_anomaly(u, e):
    """Rescaled angle nu on the same revolution as the eccentric anomaly."""
    turns = math.floor((u + math.pi) / _TWO_PI)
    u_loc = u - _TWO_PI * turns
    nu_loc = 2.0 * math.atan2(math.sqrt(1.0 + e) * math.sin(0.5 * u_loc),
                              math.sqrt(1.0 - e) * math.cos(0.5 * u_loc))
    return nu_loc + _TWO_PI * turns


def _radial_state(orbit, t):
    """(r, dr/dt, u, nu) at time t."""
    e = orbit.eccentricity
    n = orbit.mean_motion
    a = orbit.semi_major
    u = solve_kepler(n * (t - orbit.t0), e)
    one_ec = 1.0 - e * math.cos(u)
    r = a * one_ec
    r_dot = a * e * n * math.sin(u) / one_ec
    return r, r_dot, u, _true_anomaly(u, e)


def _tilted_angle(s0, chi):
    """Continuous antiderivative of s0 / (cos^2 x + s0^2 sin^2 x) at x=chi,
    zero at chi=0; advances by pi per half polar cycle."""
    half_turns = math.floor((chi + 0.5 * math.pi) / math.pi)
    chi_loc = chi - math.pi * half_turns
    return math.atan(s0 * math.tan(chi_loc)) + math.pi * half_turns
