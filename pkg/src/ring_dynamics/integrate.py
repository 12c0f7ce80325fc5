"""Direct numerical integration of Hamilton's equations in Cartesian
coordinates, for both potentials.

Two fixed-step methods with different error characters serve as mutual
cross-checks: a symplectic position-Verlet leapfrog (2nd order, bounded
energy error) and classic Runge-Kutta 4 (4th order, secular but tiny
drift). Fixed steps only: adaptive stepping would break symplecticity.
Orbits that approach the ring barrier closer than the configured
axis_epsilon abort with the last good state attached.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .coulomb_orbit import CoulombOrbit, state_of_t as _coulomb_state
from .errors import DomainError, SingularityError, StepLimitError
from .integrals import integral_columns, integral_names
from .oscillator_orbit import OscillatorOrbit, state_of_t as _oscillator_state
from .phase import PhasePoint, Vec3, require_finite
from .potentials import CoulombParams, OscillatorParams, Params, make_gradient

METHODS = ("leapfrog", "rk4")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "leapfrog"
    step: float = 1e-3
    axis_epsilon: float = 1e-8
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.step > 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.axis_epsilon > 0.0:
            raise ValueError(f"axis_epsilon must be positive, got {self.axis_epsilon}")
        if not self.max_steps > 0:
            raise ValueError(f"max_steps must be positive, got {self.max_steps}")


@dataclass
class Trajectory:
    """Time-ordered phase-space samples with cached curvilinear coordinates.

    t is strictly increasing with uniform spacing for the fixed-step
    methods; phi is unwrapped (no 2 pi jumps between consecutive samples).
    """

    params: Params
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    rho: np.ndarray = field(init=False)
    phi: np.ndarray = field(init=False)
    r: np.ndarray = field(init=False)
    theta: np.ndarray = field(init=False)

    def __post_init__(self):
        x, y, z = self.q[:, 0], self.q[:, 1], self.q[:, 2]
        self.rho = np.hypot(x, y)
        self.phi = np.unwrap(np.arctan2(y, x))
        self.r = np.sqrt(x * x + y * y + z * z)
        # Convention: theta = pi/2 at the (Q = 0 only) origin crossings.
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_th = np.where(self.r > 0.0, z / np.where(self.r > 0.0, self.r, 1.0), 0.0)
        self.theta = np.arccos(np.clip(cos_th, -1.0, 1.0))

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> PhasePoint:
        return PhasePoint(Vec3(*self.q[i]), Vec3(*self.p[i]))

    def integrals(self) -> np.ndarray:
        """(N, 4) array of the four integrals at every sample."""
        return integral_columns(self.params, self.q, self.p)


def integrate(params: Params, pt0: PhasePoint, t_span: Tuple[float, float],
              config: IntegratorConfig) -> Trajectory:
    """Integrate Hamilton's equations over t_span with fixed steps.

    The number of steps is round(span / step); t_span should be an integer
    multiple of the step for exact endpoint placement. Raises
    StepLimitError when the span needs more than max_steps steps, and
    SingularityError (carrying the last good state and time) when the
    trajectory approaches the ring barrier or the Coulomb center.
    """
    require_finite(pt0)
    t_start, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t_start:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    h = config.step
    n_steps = max(1, int(round((t_end - t_start) / h)))
    if n_steps > config.max_steps:
        raise StepLimitError(
            f"span {t_end - t_start} at step {h} needs {n_steps} steps, "
            f"more than max_steps={config.max_steps}")

    grad = make_gradient(params)
    coulomb = isinstance(params, CoulombParams)
    guard_axis = params.Q > 0.0
    eps2 = config.axis_epsilon ** 2

    qs = np.empty((n_steps + 1, 3))
    ps = np.empty((n_steps + 1, 3))
    x, y, z = pt0.q
    px, py, pz = pt0.p
    qs[0] = (x, y, z)
    ps[0] = (px, py, pz)
    _check_point(x, y, z, guard_axis, coulomb, eps2, t_start, None)

    leapfrog = config.method == "leapfrog"
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(1, n_steps + 1):
        t_prev = t_start + (i - 1) * h
        last_good = PhasePoint(Vec3(x, y, z), Vec3(px, py, pz))
        try:
            if leapfrog:
                # Position Verlet: drift h/2, kick h, drift h/2.
                x += half * px
                y += half * py
                z += half * pz
                gx, gy, gz = grad(x, y, z)
                px -= h * gx
                py -= h * gy
                pz -= h * gz
                x += half * px
                y += half * py
                z += half * pz
            else:
                k1x, k1y, k1z = grad(x, y, z)
                qx2, qy2, qz2 = x + half * px, y + half * py, z + half * pz
                px2, py2, pz2 = px - half * k1x, py - half * k1y, pz - half * k1z
                k2x, k2y, k2z = grad(qx2, qy2, qz2)
                qx3 = x + half * px2
                qy3 = y + half * py2
                qz3 = z + half * pz2
                px3, py3, pz3 = px - half * k2x, py - half * k2y, pz - half * k2z
                k3x, k3y, k3z = grad(qx3, qy3, qz3)
                qx4 = x + h * px3
                qy4 = y + h * py3
                qz4 = z + h * pz3
                px4, py4, pz4 = px - h * k3x, py - h * k3y, pz - h * k3z
                k4x, k4y, k4z = grad(qx4, qy4, qz4)
                x += sixth * (px + 2.0 * (px2 + px3) + px4)
                y += sixth * (py + 2.0 * (py2 + py3) + py4)
                z += sixth * (pz + 2.0 * (pz2 + pz3) + pz4)
                px -= sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
                py -= sixth * (k1y + 2.0 * (k2y + k3y) + k4y)
                pz -= sixth * (k1z + 2.0 * (k2z + k3z) + k4z)
        except DomainError as exc:
            raise SingularityError(
                f"singular force evaluation during step to t={t_prev + h}: {exc}",
                t=t_prev, last_state=last_good) from exc
        _check_point(x, y, z, guard_axis, coulomb, eps2, t_prev + h, last_good)
        qs[i] = (x, y, z)
        ps[i] = (px, py, pz)

    t = t_start + h * np.arange(n_steps + 1)
    return Trajectory(params, t, qs, ps)


def _check_point(x, y, z, guard_axis, coulomb, eps2, t, last_good):
    if guard_axis and x * x + y * y < eps2:
        raise SingularityError(
            f"trajectory within axis_epsilon of the ring barrier at t={t} "
            f"(x={x}, y={y})", t=t, last_state=last_good)
    if coulomb and x * x + y * y + z * z < eps2:
        raise SingularityError(
            f"trajectory within axis_epsilon of the Coulomb center at t={t}",
            t=t, last_state=last_good)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise SingularityError(f"non-finite position at t={t}",
                               t=t, last_state=last_good)


def sample_orbit(orbit: Union[OscillatorOrbit, CoulombOrbit],
                 times: np.ndarray) -> Trajectory:
    """Evaluate a closed-form orbit on a time grid, as a Trajectory."""
    times = np.asarray(times, dtype=float)
    state_fn = _oscillator_state if isinstance(orbit, OscillatorOrbit) else _coulomb_state
    qs = np.empty((len(times), 3))
    ps = np.empty((len(times), 3))
    for i, t in enumerate(times):
        pt = state_fn(orbit, float(t))
        qs[i] = pt.q
        ps[i] = pt.p
    return Trajectory(orbit.params, times.copy(), qs, ps)


def drift_report(traj: Trajectory) -> dict:
    """Max relative drift |I(t) - I(0)| / max(1, |I(0)|) of each integral."""
    cols = traj.integrals()
    first = cols[0]
    drift = np.max(np.abs(cols - first), axis=0) / np.maximum(1.0, np.abs(first))
    return dict(zip(integral_names(traj.params), (float(d) for d in drift)))


def interpolate_state(traj: Trajectory, time: float) -> PhasePoint:
    """Phase point at an arbitrary time inside the sampled span.

    Exact at the samples; between them, cubic Hermite using the stored
    momenta as position slopes and the force as momentum slopes (both
    O(h^4) accurate), so interpolation noise stays far below method error.
    """
    t = traj.t
    if not t[0] <= time <= t[-1]:
        raise ValueError(f"time {time} outside the sampled span [{t[0]}, {t[-1]}]")
    i = int(np.searchsorted(t, time))
    if i > 0 and abs(t[i - 1] - time) <= 1e-9 * (t[1] - t[0]):
        return traj.state(i - 1)
    if i < len(t) and abs(t[i] - time) <= 1e-9 * (t[1] - t[0]):
        return traj.state(i)
    lo = i - 1
    h = t[i] - t[lo]
    s = (time - t[lo]) / h
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    grad = make_gradient(traj.params)
    q0, q1 = traj.q[lo], traj.q[i]
    p0, p1 = traj.p[lo], traj.p[i]
    a0 = -np.array(grad(*q0))
    a1 = -np.array(grad(*q1))
    q = h00 * q0 + h10 * h * p0 + h01 * q1 + h11 * h * p1
    p = h00 * p0 + h10 * h * a0 + h01 * p1 + h11 * h * a1
    return PhasePoint(Vec3(*q), Vec3(*p))
