"""Analytic fields over spacetime, exact differential operators and
finite-difference oracles.

Points are arrays with a trailing axis of length 4 holding ``(x, y, z, t)``;
every evaluator broadcasts over the leading axes, so a whole grid can be
evaluated in one call.  Derivatives always come from closed-form evaluators
supplied by the constructor.  Finite differences live in :func:`fd_oracle`
and are only ever used to check those evaluators.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "PhysicalConstants",
    "NORMALIZED",
    "SI",
    "GridSpec",
    "Ball",
    "Cylinder",
    "SingularSet",
    "SingularPointError",
    "ScalarField",
    "VectorField",
    "point4",
    "as_points",
    "grad",
    "div",
    "curl",
    "laplacian",
    "gradient_field",
    "curl_field",
    "DerivativeBundle",
    "fd_oracle",
    "observed_order",
]


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.eps0 > 0 and self.mu0 > 0):
            raise ValueError("c, eps0 and mu0 must be positive")
        if abs(self.mu0 * self.eps0 * self.c**2 - 1.0) > 1e-14:
            raise ValueError("constants violate mu0*eps0*c**2 == 1")

    @classmethod
    def si(cls) -> "PhysicalConstants":
        c = 299792458.0
        eps0 = 8.8541878128e-12
        return cls(c=c, eps0=eps0, mu0=1.0 / (eps0 * c * c))


NORMALIZED = PhysicalConstants()
SI = PhysicalConstants.si()


def point4(x=0.0, y=0.0, z=0.0, t=0.0) -> np.ndarray:
    return np.array([x, y, z, t], dtype=float)


def as_points(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (4,):
        raise ValueError(f"points need a trailing axis of length 4, got shape {p.shape}")
    return p


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box sampled with ``points`` nodes per axis at fixed ``time``."""

    lower: tuple
    upper: tuple
    points: tuple
    time: float = 0.0

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        points = tuple(int(n) for n in np.broadcast_to(self.points, (3,)))
        if len(lower) != 3 or len(upper) != 3:
            raise ValueError("lower and upper corners must be 3-vectors")
        if any(u <= lo for lo, u in zip(lower, upper)):
            raise ValueError("upper corner must exceed lower corner componentwise")
        if any(n < 3 for n in points):
            raise ValueError("need at least 3 points per axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points", points)

    @classmethod
    def cube(cls, half_width: float, n: int, center=(0.0, 0.0, 0.0), time: float = 0.0):
        c = np.asarray(center, dtype=float)
        return cls(tuple(c - half_width), tuple(c + half_width), (n, n, n), time)

    def with_points(self, n) -> "GridSpec":
        return GridSpec(self.lower, self.upper, n, self.time)

    def axes(self) -> list:
        return [np.linspace(lo, u, n) for lo, u, n in zip(self.lower, self.upper, self.points)]

    def cell_axes(self) -> list:
        """Cell-centre coordinates for ``points`` equal cells per axis."""
        out = []
        for lo, u, n in zip(self.lower, self.upper, self.points):
            h = (u - lo) / n
            out.append(lo + (np.arange(n) + 0.5) * h)
        return out

    def cell_volume(self) -> float:
        return float(np.prod([(u - lo) / n for lo, u, n in zip(self.lower, self.upper, self.points)]))

    def nodes(self) -> np.ndarray:
        return _mesh(self.axes(), self.time)

    def cell_centers(self) -> np.ndarray:
        return _mesh(self.cell_axes(), self.time)

    def face_nodes(self) -> np.ndarray:
        """Nodes lying on the six faces of the box, flattened to shape (m, 4)."""
        pts = self.nodes()
        mask = np.zeros(pts.shape[:3], dtype=bool)
        mask[[0, -1], :, :] = True
        mask[:, [0, -1], :] = True
        mask[:, :, [0, -1]] = True
        return pts[mask]


def _mesh(axes, time) -> np.ndarray:
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return np.stack([X, Y, Z, np.full_like(X, time)], axis=-1)


# -- singular sets ---------------------------------------------------------


class SingularPointError(ValueError):
    """Raised when a field is evaluated inside its declared exclusion region."""


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains(self, p: np.ndarray, pad: float = 0.0) -> np.ndarray:
        d = p[..., :3] - np.asarray(self.center, dtype=float)
        return np.einsum("...i,...i->...", d, d) < (self.radius + pad) ** 2

    def moved(self, rotation: np.ndarray, shift: np.ndarray) -> "Ball":
        return Ball(tuple(rotation @ np.asarray(self.center, float) + shift), self.radius)


@dataclass(frozen=True)
class Cylinder:
    """Infinite cylinder of ``radius`` about the line through ``point`` along ``direction``."""

    point: tuple
    direction: tuple
    radius: float

    def contains(self, p: np.ndarray, pad: float = 0.0) -> np.ndarray:
        n = np.asarray(self.direction, dtype=float)
        n = n / np.linalg.norm(n)
        d = p[..., :3] - np.asarray(self.point, dtype=float)
        along = d @ n
        perp2 = np.einsum("...i,...i->...", d, d) - along**2
        return perp2 < (self.radius + pad) ** 2

    def moved(self, rotation: np.ndarray, shift: np.ndarray) -> "Cylinder":
        return Cylinder(
            tuple(rotation @ np.asarray(self.point, float) + shift),
            tuple(rotation @ np.asarray(self.direction, float)),
            self.radius,
        )


@dataclass(frozen=True)
class SingularSet:
    regions: tuple = ()

    def contains(self, p, pad: float = 0.0) -> np.ndarray:
        p = as_points(p)
        out = np.zeros(p.shape[:-1], dtype=bool)
        for region in self.regions:
            out |= region.contains(p, pad)
        return out

    def check(self, p, pad: float = 0.0) -> None:
        if self.regions and np.any(self.contains(p, pad)):
            raise SingularPointError("point lies inside the declared singular set")

    def union(self, other: "SingularSet") -> "SingularSet":
        return SingularSet(self.regions + other.regions)

    def moved(self, rotation, shift) -> "SingularSet":
        return SingularSet(tuple(r.moved(rotation, shift) for r in self.regions))

    def __bool__(self):
        return bool(self.regions)


EMPTY = SingularSet()


# -- fields ----------------------------------------------------------------


def _zero_scalar(p):
    return np.zeros(np.shape(p)[:-1])


def _zero_vector(p):
    return np.zeros(np.shape(p)[:-1] + (3,))


def _zero_matrix(p):
    return np.zeros(np.shape(p)[:-1] + (3, 3))


@dataclass(frozen=True)
class ScalarField:
    """Scalar field with closed-form gradient, Hessian and time derivative.

    ``time_derivative`` defaults to zero (static field).
    """

    value: Callable
    gradient: Callable
    hessian: Callable
    time_derivative: Callable = _zero_scalar
    singular: SingularSet = EMPTY

    def __call__(self, p):
        return self.value(as_points(p))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(
            lambda p: self.value(p) + other.value(p),
            lambda p: self.gradient(p) + other.gradient(p),
            lambda p: self.hessian(p) + other.hessian(p),
            lambda p: self.time_derivative(p) + other.time_derivative(p),
            self.singular.union(other.singular),
        )

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        def value(p):
            return self.value(p) * other.value(p)

        def gradient(p):
            return self.value(p)[..., None] * other.gradient(p) + other.value(p)[..., None] * self.gradient(p)

        def hessian(p):
            f, g = self.value(p)[..., None, None], other.value(p)[..., None, None]
            df, dg = self.gradient(p), other.gradient(p)
            cross = df[..., :, None] * dg[..., None, :]
            return f * other.hessian(p) + g * self.hessian(p) + cross + np.swapaxes(cross, -1, -2)

        def time_derivative(p):
            return self.value(p) * other.time_derivative(p) + other.value(p) * self.time_derivative(p)

        return ScalarField(value, gradient, hessian, time_derivative, self.singular.union(other.singular))

    def scaled(self, alpha: float) -> "ScalarField":
        return ScalarField(
            lambda p: alpha * self.value(p),
            lambda p: alpha * self.gradient(p),
            lambda p: alpha * self.hessian(p),
            lambda p: alpha * self.time_derivative(p),
            self.singular,
        )

    @classmethod
    def constant(cls, a: float) -> "ScalarField":
        return cls(lambda p: np.full(np.shape(p)[:-1], float(a)), _zero_vector, _zero_matrix)


@dataclass(frozen=True)
class VectorField:
    """Vector field with closed-form Jacobian ``J[..., i, j] = d v_i / d x_j``."""

    value: Callable
    jacobian: Callable
    time_derivative: Callable = _zero_vector
    singular: SingularSet = EMPTY

    def __call__(self, p):
        return self.value(as_points(p))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            lambda p: self.value(p) + other.value(p),
            lambda p: self.jacobian(p) + other.jacobian(p),
            lambda p: self.time_derivative(p) + other.time_derivative(p),
            self.singular.union(other.singular),
        )

    def scaled(self, alpha: float) -> "VectorField":
        return VectorField(
            lambda p: alpha * self.value(p),
            lambda p: alpha * self.jacobian(p),
            lambda p: alpha * self.time_derivative(p),
            self.singular,
        )

    @classmethod
    def constant(cls, v) -> "VectorField":
        v = np.asarray(v, dtype=float)
        return cls(lambda p: np.broadcast_to(v, np.shape(p)[:-1] + (3,)).copy(), _zero_matrix)

    @classmethod
    def zero(cls) -> "VectorField":
        return cls(_zero_vector, _zero_matrix)


# -- operators -------------------------------------------------------------


def grad(field: ScalarField, p) -> np.ndarray:
    return field.gradient(as_points(p))


def div(vf: VectorField, p) -> np.ndarray:
    return np.trace(vf.jacobian(as_points(p)), axis1=-2, axis2=-1)


def curl_from_jacobian(J: np.ndarray) -> np.ndarray:
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]],
        axis=-1,
    )


def curl(vf: VectorField, p) -> np.ndarray:
    return curl_from_jacobian(vf.jacobian(as_points(p)))


def laplacian(field: ScalarField, p) -> np.ndarray:
    return np.trace(field.hessian(as_points(p)), axis1=-2, axis2=-1)


def gradient_field(psi: ScalarField) -> VectorField:
    """The vector field grad(psi); its Jacobian is the Hessian of psi."""
    return VectorField(
        psi.gradient,
        psi.hessian,
        # d/dt grad(psi) is not derivable from the stored evaluators unless static
        _zero_vector,
        psi.singular,
    )


def curl_field(psi: ScalarField, axis: int = 2) -> VectorField:
    """curl(psi * e_axis) for a static scalar ``psi``."""
    j, k = (axis + 1) % 3, (axis + 2) % 3

    def value(p):
        g = psi.gradient(p)
        out = np.zeros_like(g)
        out[..., j] = g[..., k]
        out[..., k] = -g[..., j]
        return out

    def jacobian(p):
        H = psi.hessian(p)
        out = np.zeros_like(H)
        out[..., j, :] = H[..., k, :]
        out[..., k, :] = -H[..., j, :]
        return out

    return VectorField(value, jacobian, _zero_vector, psi.singular)


# -- finite-difference oracle ------------------------------------------------


@dataclass(frozen=True)
class DerivativeBundle:
    """Central-difference derivatives at one step size ``h``.

    Scalar fields fill ``gradient``, ``hessian``, ``laplacian`` and
    ``time_derivative``; vector fields fill ``jacobian`` and
    ``time_derivative``.
    """

    h: float
    step_too_small: bool
    gradient: Optional[np.ndarray] = None
    hessian: Optional[np.ndarray] = None
    laplacian: Optional[np.ndarray] = None
    jacobian: Optional[np.ndarray] = None
    time_derivative: Optional[np.ndarray] = None


def fd_oracle(field, p, h: float) -> DerivativeBundle:
    """Second-order central differences of ``field`` at ``p``."""
    if not h > 0:
        raise ValueError("step must be positive")
    p = as_points(p)
    field.singular.check(p, pad=2.0 * h)
    scale = max(1.0, float(np.max(np.abs(p))))
    too_small = h < 1e3 * np.finfo(float).eps * scale
    if too_small:
        warnings.warn(f"finite-difference step {h:g} is below the rounding floor", RuntimeWarning)

    f = field.value
    e = np.eye(4) * h

    def d1(axis):
        return (f(p + e[axis]) - f(p - e[axis])) / (2.0 * h)

    time_derivative = d1(3)
    first = np.stack([d1(i) for i in range(3)], axis=-1)
    if isinstance(field, VectorField):
        # first[..., comp, axis]
        return DerivativeBundle(h, too_small, jacobian=first, time_derivative=time_derivative)

    f0 = f(p)
    H = np.empty(p.shape[:-1] + (3, 3))
    for i in range(3):
        H[..., i, i] = (f(p + e[i]) - 2.0 * f0 + f(p - e[i])) / h**2
        for j in range(i + 1, 3):
            mixed = (
                f(p + e[i] + e[j]) - f(p + e[i] - e[j]) - f(p - e[i] + e[j]) + f(p - e[i] - e[j])
            ) / (4.0 * h * h)
            H[..., i, j] = H[..., j, i] = mixed
    return DerivativeBundle(
        h,
        too_small,
        gradient=first,
        hessian=H,
        laplacian=np.trace(H, axis1=-2, axis2=-1),
        time_derivative=time_derivative,
    )


def observed_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return math.inf if np.all(errors == 0) else math.nan
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)
