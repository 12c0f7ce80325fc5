"""Phase-space primitives: points, numerical gradients, Poisson brackets.

Phase space is 6-dimensional, coordinates ordered (x, y, z, px, py, pz),
with the reduced mass fixed to 1 so momentum equals velocity. Everything
here is a pure function; nothing holds mutable state.
"""

import math
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError

# Central differences balance truncation against rounding at h ~ eps^(1/3).
FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)

# Points closer than this to the z-axis are rejected whenever the ring
# barrier 1/(x^2+y^2) is present.
AXIS_EPSILON = 1e-9


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


class PhasePoint(NamedTuple):
    """A point (q, p) in phase space; p is momentum = velocity (unit mass)."""

    q: Vec3
    p: Vec3

    @classmethod
    def of(cls, x, y, z, px, py, pz):
        return cls(Vec3(float(x), float(y), float(z)),
                   Vec3(float(px), float(py), float(pz)))

    @classmethod
    def from_array(cls, arr):
        x, y, z, px, py, pz = (float(v) for v in arr)
        return cls(Vec3(x, y, z), Vec3(px, py, pz))

    def to_array(self):
        return np.array([*self.q, *self.p], dtype=float)

    def is_finite(self):
        return all(math.isfinite(v) for v in (*self.q, *self.p))


# A PhaseFunction argument is any callable PhasePoint -> float. Wrapping it
# in this class attaches an analytic gradient (6-vector, same coordinate
# order) that poisson_bracket will prefer over finite differences.
class PhaseFunction:
    """Scalar function on phase space, optionally with an exact gradient."""

    def __init__(self, fn: Callable[[PhasePoint], float],
                 grad: Optional[Callable[[PhasePoint], np.ndarray]] = None,
                 name: str = ""):
        self._fn = fn
        self._grad = grad
        self.name = name

    def __call__(self, pt: PhasePoint) -> float:
        return self._fn(pt)

    @property
    def has_gradient(self) -> bool:
        return self._grad is not None

    def gradient(self, pt: PhasePoint) -> np.ndarray:
        """Exact gradient if supplied, otherwise central differences."""
        if self._grad is not None:
            return np.asarray(self._grad(pt), dtype=float)
        return numerical_gradient(self, pt)

    def __repr__(self):
        return f"PhaseFunction({self.name or self._fn!r})"


def require_finite(pt: PhasePoint):
    if not pt.is_finite():
        raise DomainError(f"non-finite phase point {pt}")


def angular_momentum(pt: PhasePoint) -> Vec3:
    """L = q x p, componentwise."""
    (x, y, z), (px, py, pz) = pt
    return Vec3(y * pz - z * py, z * px - x * pz, x * py - y * px)


def numerical_gradient(f, pt: PhasePoint, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of f over all six phase coordinates.

    The step along coordinate i is h * max(1, |coordinate_i|); with the
    default h = eps^(1/3) the error is O(h^2). Domain errors raised by f
    inside the stencil propagate to the caller.
    """
    base = FD_STEP if h is None else float(h)
    if base <= 0.0:
        raise ValueError(f"step must be positive, got {base}")
    coords = pt.to_array()
    grad = np.empty(6)
    for i in range(6):
        hi = base * max(1.0, abs(coords[i]))
        up = coords.copy()
        dn = coords.copy()
        up[i] += hi
        dn[i] -= hi
        # Evaluate at the actually-representable abscissae.
        grad[i] = (f(PhasePoint.from_array(up)) - f(PhasePoint.from_array(dn))) \
            / (up[i] - dn[i])
    return grad


def poisson_bracket(f, g, pt: PhasePoint, h: Optional[float] = None,
                    numerical: bool = False) -> float:
    """Canonical Poisson bracket {f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i).

    Analytic gradients are used for any argument that carries one (see
    PhaseFunction) unless `numerical` forces the finite-difference route,
    which is kept as the independent oracle.
    """
    def grad_of(fn):
        if not numerical and getattr(fn, "has_gradient", False):
            return fn.gradient(pt)
        return numerical_gradient(fn, pt, h)

    gf = grad_of(f)
    gg = grad_of(g)
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])
