"""The four integrals of motion of each system, with exact gradients.

Oscillator system: H, A1 = L^2 + Q(1 + z^2/rho^2), A2 = (pz^2 + omega^2 z^2)/2,
A3 = Lz. Coulomb system: H, B1 = L^2 + Q r^2/rho^2, B2 = Lz, and B3, a
ring-corrected axial Runge-Lenz component. Note B1 and A1 are the same
phase-space function (r^2/rho^2 = 1 + z^2/rho^2), so one implementation
serves both.

Each integral is exposed as a PhaseFunction carrying its analytic gradient;
the finite-difference machinery in `phase` stays available as the
independent oracle. Involution sets (triplets with all pairwise Poisson
brackets zero) are registered by the separating coordinate system they
correspond to.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError
from .phase import PhaseFunction, PhasePoint, poisson_bracket
from .potentials import (CoulombParams, OscillatorParams, Params, grad_v,
                         hamiltonian)


@dataclass(frozen=True)
class OscillatorIntegrals:
    H: float
    A1: float
    A2: float
    A3: float

    def as_array(self):
        return np.array([self.H, self.A1, self.A2, self.A3])


@dataclass(frozen=True)
class CoulombIntegrals:
    H: float
    B1: float
    B2: float
    B3: float

    def as_array(self):
        return np.array([self.H, self.B1, self.B2, self.B3])


def _rho2_checked(pt, Q):
    (x, y, _), _ = pt
    rho2 = x * x + y * y
    if Q > 0.0 and rho2 == 0.0:
        raise DomainError(f"integral undefined on the z-axis for Q={Q}")
    return rho2


def oscillator_integrals(params: OscillatorParams, pt: PhasePoint) -> OscillatorIntegrals:
    """Evaluate (H, A1, A2, A3) at a phase point."""
    (x, y, z), (px, py, pz) = pt
    H = hamiltonian(params, pt)
    A1 = _ring_l2_value(params.Q, pt)
    A2 = 0.5 * (pz * pz + params.omega ** 2 * z * z)
    A3 = x * py - y * px
    return OscillatorIntegrals(H, A1, A2, A3)


def coulomb_integrals(params: CoulombParams, pt: PhasePoint) -> CoulombIntegrals:
    """Evaluate (H, B1, B2, B3) at a phase point."""
    (x, y, _), (px, py, _) = pt
    H = hamiltonian(params, pt)
    B1 = _ring_l2_value(params.Q, pt)
    B2 = x * py - y * px
    B3 = _ring_lenz_value(params, pt)
    return CoulombIntegrals(H, B1, B2, B3)


def integrals_of(params: Params, pt: PhasePoint):
    if isinstance(params, OscillatorParams):
        return oscillator_integrals(params, pt)
    return coulomb_integrals(params, pt)


def integral_names(params: Params):
    if isinstance(params, OscillatorParams):
        return ("H", "A1", "A2", "A3")
    return ("H", "B1", "B2", "B3")


# ---------------------------------------------------------------------------
# values and gradients (phase-coordinate order x, y, z, px, py, pz)

def _l2_value(pt):
    (x, y, z), (px, py, pz) = pt
    q2 = x * x + y * y + z * z
    p2 = px * px + py * py + pz * pz
    qp = x * px + y * py + z * pz
    return q2 * p2 - qp * qp


def _l2_gradient(pt):
    (x, y, z), (px, py, pz) = pt
    q2 = x * x + y * y + z * z
    p2 = px * px + py * py + pz * pz
    qp = x * px + y * py + z * pz
    return np.array([
        2.0 * (p2 * x - qp * px),
        2.0 * (p2 * y - qp * py),
        2.0 * (p2 * z - qp * pz),
        2.0 * (q2 * px - qp * x),
        2.0 * (q2 * py - qp * y),
        2.0 * (q2 * pz - qp * z),
    ])


def _ring_l2_value(Q, pt):
    value = _l2_value(pt)
    if Q > 0.0:
        (x, y, z), _ = pt
        rho2 = _rho2_checked(pt, Q)
        value += Q * (1.0 + z * z / rho2)
    return value


def _ring_l2_gradient(Q, pt):
    grad = _l2_gradient(pt)
    if Q > 0.0:
        (x, y, z), _ = pt
        rho2 = _rho2_checked(pt, Q)
        grad[0] += -2.0 * Q * x * z * z / (rho2 * rho2)
        grad[1] += -2.0 * Q * y * z * z / (rho2 * rho2)
        grad[2] += 2.0 * Q * z / rho2
    return grad


def _ring_lenz_value(params: CoulombParams, pt):
    (x, y, z), (px, py, pz) = pt
    s = x * px + y * py
    value = pz * s - z * (px * px + py * py)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise DomainError("Runge-Lenz component undefined at the origin")
    value += params.Z * z / r
    if params.Q > 0.0:
        rho2 = _rho2_checked(pt, params.Q)
        value -= params.Q * z / rho2
    return value


def _ring_lenz_gradient(params: CoulombParams, pt):
    (x, y, z), (px, py, pz) = pt
    Z, Q = params.Z, params.Q
    s = x * px + y * py
    pp = px * px + py * py
    r2 = x * x + y * y + z * z
    r3 = r2 * math.sqrt(r2)
    rho2 = x * x + y * y
    grad = np.array([
        pz * px - Z * x * z / r3,
        pz * py - Z * y * z / r3,
        -pp + Z * rho2 / r3,
        pz * x - 2.0 * z * px,
        pz * y - 2.0 * z * py,
        s,
    ])
    if Q > 0.0:
        if rho2 == 0.0:
            raise DomainError(f"integral undefined on the z-axis for Q={Q}")
        grad[0] += 2.0 * Q * x * z / (rho2 * rho2)
        grad[1] += 2.0 * Q * y * z / (rho2 * rho2)
        grad[2] -= Q / rho2
    return grad


# ---------------------------------------------------------------------------
# PhaseFunction factories

def hamiltonian_function(params: Params) -> PhaseFunction:
    def grad(pt):
        gq = grad_v(params, pt.q)
        return np.array([*gq, *pt.p])

    return PhaseFunction(lambda pt: hamiltonian(params, pt), grad, name="H")


def ring_l2_function(Q: float) -> PhaseFunction:
    """L^2 plus the ring correction Q(1 + z^2/rho^2); this is A1 and B1."""
    return PhaseFunction(lambda pt: _ring_l2_value(Q, pt),
                         lambda pt: _ring_l2_gradient(Q, pt), name="ring_l2")


def axial_energy_function(omega: float) -> PhaseFunction:
    """The decoupled z-oscillator energy (pz^2 + omega^2 z^2)/2; this is A2."""
    w2 = omega * omega

    def grad(pt):
        (_, _, z), (_, _, pz) = pt
        return np.array([0.0, 0.0, w2 * z, 0.0, 0.0, pz])

    return PhaseFunction(
        lambda pt: 0.5 * (pt.p.z ** 2 + w2 * pt.q.z ** 2), grad, name="axial_energy")


def lz_function() -> PhaseFunction:
    """Axial angular momentum Lz = x py - y px; this is A3 and B2."""
    def grad(pt):
        (x, y, _), (px, py, _) = pt
        return np.array([py, -px, 0.0, -y, x, 0.0])

    return PhaseFunction(lambda pt: pt.q.x * pt.p.y - pt.q.y * pt.p.x,
                         grad, name="Lz")


def ring_lenz_function(params: CoulombParams) -> PhaseFunction:
    """Ring-corrected axial Runge-Lenz component; this is B3."""
    return PhaseFunction(lambda pt: _ring_lenz_value(params, pt),
                         lambda pt: _ring_lenz_gradient(params, pt), name="ring_lenz_z")


def l2_function() -> PhaseFunction:
    """Plain squared angular momentum (the Q = 0 limit of A1/B1)."""
    return PhaseFunction(_l2_value, _l2_gradient, name="L2")


def cartesian_mode_function(omega: float, axis: int) -> PhaseFunction:
    """1-D oscillator mode energy (p_i^2 + omega^2 q_i^2)/2 along x or y."""
    if axis not in (0, 1):
        raise ValueError("axis must be 0 (x) or 1 (y)")
    w2 = omega * omega

    def value(pt):
        return 0.5 * (pt.p[axis] ** 2 + w2 * pt.q[axis] ** 2)

    def grad(pt):
        g = np.zeros(6)
        g[axis] = w2 * pt.q[axis]
        g[axis + 3] = pt.p[axis]
        return g

    return PhaseFunction(value, grad, name=f"mode_{'xy'[axis]}")


def tilted_l2_function(tau: float) -> PhaseFunction:
    """Lx^2 + tau Ly^2 with 0 < tau < 1 (Coulomb Q = 0 limit set member)."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly between 0 and 1, got {tau}")

    def value(pt):
        (x, y, z), (px, py, pz) = pt
        lx = y * pz - z * py
        ly = z * px - x * pz
        return lx * lx + tau * ly * ly

    def grad(pt):
        (x, y, z), (px, py, pz) = pt
        lx = y * pz - z * py
        ly = z * px - x * pz
        glx = np.array([0.0, pz, -py, 0.0, -z, y])
        gly = np.array([-pz, 0.0, px, z, 0.0, -x])
        return 2.0 * lx * glx + 2.0 * tau * ly * gly

    return PhaseFunction(value, grad, name="tilted_l2")


def combine(coeffs_and_fns, name="") -> PhaseFunction:
    """Linear combination of PhaseFunctions, gradient included."""
    terms = [(float(c), f) for c, f in coeffs_and_fns]

    def value(pt):
        return sum(c * f(pt) for c, f in terms)

    def grad(pt):
        return sum(c * f.gradient(pt) for c, f in terms)

    return PhaseFunction(value, grad, name=name)


def oscillator_integral_functions(params: OscillatorParams):
    return (hamiltonian_function(params),
            ring_l2_function(params.Q),
            axial_energy_function(params.omega),
            lz_function())


def coulomb_integral_functions(params: CoulombParams):
    return (hamiltonian_function(params),
            ring_l2_function(params.Q),
            lz_function(),
            ring_lenz_function(params))


def integral_functions(params: Params):
    if isinstance(params, OscillatorParams):
        return oscillator_integral_functions(params)
    return coulomb_integral_functions(params)


# ---------------------------------------------------------------------------
# involution sets

OSCILLATOR_SETS = ("spherical", "cylindrical", "spheroidal_minus",
                   "spheroidal_plus", "cartesian_limit", "angular_limit")
COULOMB_SETS = ("spherical", "parabolic", "tilted_l2_limit")
_LIMIT_SETS = {"cartesian_limit", "angular_limit", "tilted_l2_limit"}


def involution_set(params: Params, set_id: str, a: float = 1.0, tau: float = 0.5):
    """The three PhaseFunctions of a registered involution triplet.

    Sets are named for the coordinate system in which the corresponding
    separation of variables happens. The *_limit sets only commute in the
    pure (Q = 0) wells and are rejected for Q > 0.
    """
    if set_id in _LIMIT_SETS and params.Q != 0.0:
        raise ValueError(f"set '{set_id}' is only in involution for Q = 0, "
                         f"got Q={params.Q}")
    H = hamiltonian_function(params)
    if isinstance(params, OscillatorParams):
        A1 = ring_l2_function(params.Q)
        A2 = axial_energy_function(params.omega)
        A3 = lz_function()
        if set_id == "spherical":
            return (H, A1, A3)
        if set_id == "cylindrical":
            return (H, A2, A3)
        if set_id in ("spheroidal_minus", "spheroidal_plus"):
            sign = -1.0 if set_id.endswith("minus") else 1.0
            # A1 +/- 2 a^2 (H - A2), one member per spheroidal focus choice.
            shifted = combine([(1.0, A1), (2.0 * sign * a * a, H),
                               (-2.0 * sign * a * a, A2)],
                              name=f"spheroidal(a={a})")
            return (H, shifted, A3)
        if set_id == "cartesian_limit":
            return (H, cartesian_mode_function(params.omega, 0),
                    cartesian_mode_function(params.omega, 1))
        if set_id == "angular_limit":
            return (H, l2_function(), lz_function())
        raise ValueError(f"unknown oscillator involution set '{set_id}'; "
                         f"expected one of {OSCILLATOR_SETS}")
    if set_id == "spherical":
        return (H, ring_l2_function(params.Q), lz_function())
    if set_id == "parabolic":
        return (H, lz_function(), ring_lenz_function(params))
    if set_id == "tilted_l2_limit":
        return (H, l2_function(), tilted_l2_function(tau))
    raise ValueError(f"unknown Coulomb involution set '{set_id}'; "
                     f"expected one of {COULOMB_SETS}")


def available_sets(params: Params):
    """Involution set ids applicable to these parameters."""
    names = OSCILLATOR_SETS if isinstance(params, OscillatorParams) else COULOMB_SETS
    if params.Q != 0.0:
        names = tuple(n for n in names if n not in _LIMIT_SETS)
    return names


def involution_residuals(params: Params, set_id: str, pt: PhasePoint,
                         a: float = 1.0, tau: float = 0.5,
                         numerical: bool = False, h=None):
    """All three pairwise Poisson brackets within a registered set.

    Returns [{f1,f2}, {f1,f3}, {f2,f3}]; every entry should vanish up to
    numerical error. With `numerical` the finite-difference bracket is used
    instead of the analytic gradients (looser tolerances apply).
    """
    f1, f2, f3 = involution_set(params, set_id, a=a, tau=tau)
    return [poisson_bracket(f1, f2, pt, h=h, numerical=numerical),
            poisson_bracket(f1, f3, pt, h=h, numerical=numerical),
            poisson_bracket(f2, f3, pt, h=h, numerical=numerical)]


def independence_rank(params: Params, pt: PhasePoint,
                      threshold: float = 1e-8) -> int:
    """Numerical rank of the 4x6 Jacobian of the four integrals.

    A singular value counts iff sigma / sigma_max > threshold. Generic
    points give 4; symmetric configurations (e.g. circular equatorial
    orbits) may legitimately give less and are flagged by the caller, not
    treated as errors here.
    """
    rows = [f.gradient(pt) for f in integral_functions(params)]
    sigma = np.linalg.svd(np.vstack(rows), compute_uv=False)
    if sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma / sigma[0] > threshold))


# ---------------------------------------------------------------------------
# vectorized evaluation along trajectories

def integral_columns(params: Params, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Evaluate the four integrals at every sample; q, p have shape (N, 3).

    Returns an (N, 4) array ordered as integral_names(params). Ring terms
    are skipped entirely when Q = 0 so that on-axis samples (legal there)
    do not divide by zero.
    """
    x, y, z = q[:, 0], q[:, 1], q[:, 2]
    px, py, pz = p[:, 0], p[:, 1], p[:, 2]
    rho2 = x * x + y * y
    p2 = px * px + py * py + pz * pz
    q2 = rho2 + z * z
    qp = x * px + y * py + z * pz
    l2 = q2 * p2 - qp * qp
    lz = x * py - y * px
    Q = params.Q
    if isinstance(params, OscillatorParams):
        H = 0.5 * p2 + 0.5 * params.omega ** 2 * q2
        A1 = l2.copy()
        if Q > 0.0:
            H = H + 0.5 * Q / rho2
            A1 += Q * (1.0 + z * z / rho2)
        A2 = 0.5 * (pz * pz + params.omega ** 2 * z * z)
        return np.column_stack([H, A1, A2, lz])
    r = np.sqrt(q2)
    H = 0.5 * p2 - params.Z / r
    B1 = l2.copy()
    B3 = pz * (x * px + y * py) - z * (px * px + py * py) + params.Z * z / r
    if Q > 0.0:
        H = H + 0.5 * Q / rho2
        B1 += Q * (1.0 + z * z / rho2)
        B3 = B3 - Q * z / rho2
    return np.column_stack([H, B1, lz, B3])
