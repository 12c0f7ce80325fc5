"""Periodicity classification, closure measurement, bounds auditing, and
planarity diagnostics.

A bounded orbit of either system is globally periodic iff the ratio
sqrt(m^2 + Q) / |m| is rational, say k1/k2 in lowest terms; the overall
period is then k1 times the base period (trap period or Kepler period) for
both systems. Irrational ratios give quasi-periodic motion: each separated
coordinate librates periodically but the orbit never closes, and rational
ratios are dense around every irrational one. The classifier finds the
best rational approximation with bounded denominator via continued
fractions and compares it against the requested tolerance.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from .coulomb_orbit import CoulombOrbit, state_of_t as _coulomb_state
from .errors import DomainError
from .integrate import Trajectory, interpolate_state
from .oscillator_orbit import OscillatorOrbit, state_of_t as _oscillator_state
from .phase import PhasePoint, Vec3

PERIODIC = "periodic"
QUASI_PERIODIC = "quasi-periodic"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class PeriodicityVerdict:
    """Outcome of the commensurability test.

    periodic: (k1, k2) coprime with ratio = k1/k2 and overall period
    T = k1 * base_period. quasi-periodic: best_num/best_den is the best
    rational approximation within the denominator cap, approx_error its
    absolute error. planar_m0 marks the m = 0, Q > 0 special case (phi
    frozen, planar, period = base_period); its k2 is recorded as 0 to flag
    the infinite ratio.
    """

    kind: str
    ratio: Optional[float] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    T: Optional[float] = None
    best_num: Optional[int] = None
    best_den: Optional[int] = None
    approx_error: Optional[float] = None
    planar_m0: bool = False


def classify_periodicity(m: float, Q: float, base_period: float,
                         tol: float = 1e-12,
                         max_denominator: int = 10 ** 6) -> PeriodicityVerdict:
    """Classify an orbit family by the commensurability of sqrt(m^2+Q)/|m|.

    The condition depends only on (m, Q); it is identical for the two
    systems, which enter only through base_period (trap period 2 pi/omega
    or Kepler period). Periodic iff the best bounded-denominator rational
    k1/k2 satisfies |ratio - k1/k2| <= tol; the default tol discriminates
    double-precision rationals (error ~1e-16) from irrationals (best error
    >~1e-12 at the default denominator cap).
    """
    if base_period <= 0.0:
        raise ValueError(f"base_period must be positive, got {base_period}")
    if Q < 0.0:
        raise ValueError(f"Q must be non-negative, got {Q}")
    if max_denominator < 1:
        raise ValueError(f"max_denominator must be >= 1, got {max_denominator}")
    if m == 0.0:
        if Q == 0.0:
            # Degenerate line orbit of the pure well: closes in one period.
            return PeriodicityVerdict(PERIODIC, ratio=1.0, k1=1, k2=1,
                                      T=base_period)
        # phi is frozen: planar and periodic with the base period.
        return PeriodicityVerdict(PERIODIC, ratio=math.inf, k1=1, k2=0,
                                  T=base_period, planar_m0=True)
    ratio = math.sqrt(m * m + Q) / abs(m)
    best = Fraction(ratio).limit_denominator(max_denominator)
    err = float(abs(Fraction(ratio) - best))
    if err <= tol:
        return PeriodicityVerdict(PERIODIC, ratio=ratio,
                                  k1=best.numerator, k2=best.denominator,
                                  T=best.numerator * base_period)
    return PeriodicityVerdict(QUASI_PERIODIC, ratio=ratio,
                              best_num=best.numerator,
                              best_den=best.denominator, approx_error=err)


def m_for_periodicity(k1: int, k2: int, Q: float) -> float:
    """The axial angular momentum that makes (k1, k2) orbits close:
    m = k2 sqrt(Q / (k1^2 - k2^2))."""
    if k1 == k2:
        raise DomainError(f"k1 = k2 = {k1}: no finite m closes the orbit for Q > 0")
    if not k1 > k2 >= 1:
        raise ValueError(f"need k1 > k2 >= 1, got ({k1}, {k2})")
    if math.gcd(k1, k2) != 1:
        raise ValueError(f"(k1, k2) = ({k1}, {k2}) are not coprime")
    if Q <= 0.0:
        raise ValueError(f"Q must be positive, got {Q}")
    return k2 * math.sqrt(Q / (k1 * k1 - k2 * k2))


def convergents(x: float, max_denominator: int = 10 ** 6,
                max_terms: int = 64) -> List[Tuple[int, int]]:
    """Continued-fraction convergents (p, q) of x with q <= max_denominator.

    Each convergent is the best rational approximation to x among all
    fractions with denominator up to its own.
    """
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    result = []
    h_prev, h_prev2 = 1, 0
    k_prev, k_prev2 = 0, 1
    value = x
    for _ in range(max_terms):
        a = math.floor(value)
        h = a * h_prev + h_prev2
        k = a * k_prev + k_prev2
        if k > max_denominator:
            break
        result.append((h, k))
        frac = value - a
        if frac <= 0.0 or h / k == x:
            break
        value = 1.0 / frac
        h_prev2, h_prev = h_prev, h
        k_prev2, k_prev = k_prev, k
    return result


OrbitOrTrajectory = Union[OscillatorOrbit, CoulombOrbit, Trajectory]


def _state_and_scales(source: OrbitOrTrajectory):
    """Uniform access to state(t) plus orbit-scale length/momentum norms."""
    if isinstance(source, OscillatorOrbit):
        length = max(source.rho2, source.z0)
        momentum = math.sqrt(2.0 * max(source.E1 + source.E2, 0.0))
        return (lambda t: _oscillator_state(source, t),
                length or 1.0, momentum or 1.0)
    if isinstance(source, CoulombOrbit):
        length = source.r2
        momentum = math.sqrt(2.0 * max(source.E + source.params.Z / source.r1, 0.0))
        return (lambda t: _coulomb_state(source, t),
                length or 1.0, momentum or 1.0)
    if isinstance(source, Trajectory):
        length = float(np.max(np.linalg.norm(source.q, axis=1)))
        momentum = float(np.max(np.linalg.norm(source.p, axis=1)))
        return (lambda t: interpolate_state(source, t),
                length or 1.0, momentum or 1.0)
    raise TypeError(f"unsupported closure source {type(source).__name__}")


def closure_distance(source: OrbitOrTrajectory, T: float,
                     t_ref: float = 0.0) -> float:
    """Orbit-scale-normalized phase-space distance between the states at
    t_ref and t_ref + T; ~0 iff the orbit closes after T."""
    state, length, momentum = _state_and_scales(source)
    a = state(t_ref)
    b = state(t_ref + T)
    dq = sum((u - v) ** 2 for u, v in zip(a.q, b.q))
    dp = sum((u - v) ** 2 for u, v in zip(a.p, b.p))
    return math.sqrt(dq / length ** 2 + dp / momentum ** 2)


@dataclass(frozen=True)
class BoundsViolation:
    index: int
    t: float
    coordinate: str
    value: float
    lower: float
    upper: float
    excess: float


def bounds_audit(traj: Trajectory, orbit: Union[OscillatorOrbit, CoulombOrbit],
                 slack: float = 1e-6) -> List[BoundsViolation]:
    """Samples whose libration coordinate leaves its envelope by more than
    slack. A clean trajectory returns an empty list."""
    if isinstance(orbit, OscillatorOrbit):
        checks = [("rho", traj.rho, orbit.rho1, orbit.rho2),
                  ("z", traj.q[:, 2], -orbit.z0, orbit.z0)]
    elif isinstance(orbit, CoulombOrbit):
        checks = [("r", traj.r, orbit.r1, orbit.r2),
                  ("theta", traj.theta, orbit.theta0, math.pi - orbit.theta0)]
    else:
        raise TypeError(f"unsupported orbit type {type(orbit).__name__}")
    violations = []
    for name, values, lower, upper in checks:
        excess = np.maximum(lower - values, values - upper)
        for i in np.nonzero(excess > slack)[0]:
            violations.append(BoundsViolation(
                int(i), float(traj.t[i]), name, float(values[i]),
                lower, upper, float(excess[i])))
    violations.sort(key=lambda v: (v.index, v.coordinate))
    return violations


@dataclass(frozen=True)
class PlanarityReport:
    planar: bool
    normal: Optional[Vec3]
    max_offset: float
    scale: float
    max_torsion: float
    collinear: bool = False


def planarity(traj: Trajectory, tol: float = 1e-6) -> PlanarityReport:
    """Least-squares plane fit plus a numerical torsion profile.

    planar iff the largest point-to-plane distance is below tol times the
    orbit scale (largest centered radius). Collinear trajectories are
    reported planar with an undefined normal. Torsion comes from five-point
    finite-difference derivatives of the sampled curve and is reported for
    diagnostics, never thresholded.
    """
    pos = traj.q
    if len(pos) < 4:
        raise ValueError(f"need at least 4 samples, got {len(pos)}")
    centered = pos - pos.mean(axis=0)
    scale = float(np.max(np.linalg.norm(centered, axis=1)))
    if scale == 0.0:
        return PlanarityReport(True, None, 0.0, 0.0, 0.0, collinear=True)
    _, sigma, vt = np.linalg.svd(centered, full_matrices=False)
    if sigma[1] <= 1e-12 * sigma[0]:
        return PlanarityReport(True, None, 0.0, scale,
                               _max_torsion(traj), collinear=True)
    normal = vt[2]
    max_offset = float(np.max(np.abs(centered @ normal)))
    return PlanarityReport(max_offset < tol * scale, Vec3(*normal),
                           max_offset, scale, _max_torsion(traj))


def _max_torsion(traj: Trajectory) -> float:
    """Largest |torsion| over interior samples, via five-point stencils.

    Requires >= 5 uniformly spaced samples (fixed-step trajectories);
    returns nan otherwise. Points where the curve is locally straight
    (|r' x r''| ~ 0, torsion undefined) are skipped.
    """
    t, pos = traj.t, traj.q
    if len(t) < 5:
        return math.nan
    steps = np.diff(t)
    h = steps[0]
    if np.max(np.abs(steps - h)) > 1e-9 * h:
        return math.nan
    f2, f1 = pos[4:], pos[3:-1]
    b1, b2 = pos[1:-3], pos[:-4]
    mid = pos[2:-2]
    d1 = (-f2 + 8.0 * f1 - 8.0 * b1 + b2) / (12.0 * h)
    d2 = (-f2 + 16.0 * f1 - 30.0 * mid + 16.0 * b1 - b2) / (12.0 * h * h)
    d3 = (f2 - 2.0 * f1 + 2.0 * b1 - b2) / (2.0 * h ** 3)
    cross = np.cross(d1, d2)
    denom = np.einsum("ij,ij->i", cross, cross)
    numer = np.einsum("ij,ij->i", cross, d3)
    good = denom > (1e-12 * np.max(denom)) if np.max(denom) > 0.0 else denom > 0.0
    if not np.any(good):
        return 0.0
    return float(np.max(np.abs(numer[good] / denom[good])))
