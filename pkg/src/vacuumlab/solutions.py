"""Closed-form field families of the nonlinear vacuum system.

Every constructor returns an :class:`EMSolution` whose E and B carry exact
Jacobians and time derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .chart import ChartFunction, axis_exclusion, lift, uk_function
from .fieldcore import (
    NORMALIZED,
    PhysicalConstants,
    ScalarField,
    SingularSet,
    VectorField,
    as_points,
)

__all__ = [
    "EMSolution",
    "Profile",
    "mollifier",
    "smooth_cutoff",
    "polarized_profile",
    "zero_profile",
    "photon_wave",
    "uk_solution",
    "stationary_pair_solution",
    "constant_background",
    "zero_solution",
    "superpose",
    "transformed",
    "rotated",
    "translated",
    "scaled",
    "AXIS_ROTATIONS",
]


@dataclass(frozen=True)
class EMSolution:
    E: VectorField
    B: VectorField
    constants: PhysicalConstants = NORMALIZED
    singular: SingularSet = SingularSet()
    label: str = ""


@dataclass(frozen=True)
class Profile:
    """A static, compactly supported scalar profile a0(x, y, z)."""

    field: ScalarField
    support_radius: float
    center: tuple = (0.0, 0.0, 0.0)
    label: str = ""

    def verify_support(self, rng: np.random.Generator, n: int = 256) -> bool:
        """Sample points outside the support ball and check every evaluator is zero there."""
        d = rng.normal(size=(n, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.support_radius * (1.0 + rng.uniform(0.0, 1.0, size=(n, 1)))
        p = np.concatenate([np.asarray(self.center) + r * d, np.zeros((n, 1))], axis=1)
        return bool(
            np.all(self.field.value(p) == 0)
            and np.all(self.field.gradient(p) == 0)
            and np.all(self.field.hessian(p) == 0)
        )


def _offsets(p, center):
    p = as_points(p)
    return p[..., :3] - np.asarray(center, dtype=float)


# beyond this q the bump exp(1 - 1/(1-q)) underflows to exactly 0.0
_Q_CUT = 1.0 - 1e-3


def mollifier(center=(0.0, 0.0, 0.0), radius: float = 1.0, amplitude: float = 1.0) -> Profile:
    """Bump ``amplitude * exp(1 - 1/(1 - r^2/R^2))`` inside radius R, zero outside."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    R2 = radius * radius

    def parts(p):
        d = _offsets(p, center)
        q = np.einsum("...i,...i->...", d, d) / R2
        inside = q < _Q_CUT
        qi = np.where(inside, q, 0.0)
        om = 1.0 - qi
        phi = np.where(inside, np.exp(1.0 - 1.0 / om), 0.0)
        d1 = -phi / om**2
        d2 = phi * (2.0 * qi - 1.0) / om**4
        return d, amplitude * phi, amplitude * d1, amplitude * d2

    def value(p):
        return parts(p)[1]

    def gradient(p):
        d, _, d1, _ = parts(p)
        return (2.0 / R2) * d1[..., None] * d

    def hessian(p):
        d, _, d1, d2 = parts(p)
        outer = d[..., :, None] * d[..., None, :]
        return (4.0 / R2**2) * d2[..., None, None] * outer + (2.0 / R2) * d1[..., None, None] * np.eye(3)

    field = ScalarField(value, gradient, hessian)
    return Profile(field, radius, tuple(float(c) for c in center), f"mollifier(R={radius:g})")


def _smooth_step(t):
    """C-infinity step 0 -> 1 on [0, 1] and its first two derivatives."""
    t = np.asarray(t, dtype=float)
    lo, hi = t <= 1e-3, t >= 1.0 - 1e-3
    tm = np.clip(t, 1e-3, 1.0 - 1e-3)
    w = 1.0 / (1.0 - tm) - 1.0 / tm
    w1 = 1.0 / (1.0 - tm) ** 2 + 1.0 / tm**2
    w2 = 2.0 / (1.0 - tm) ** 3 - 2.0 / tm**3
    sig = expit(w)
    ds = sig * (1.0 - sig)
    S = np.where(lo, 0.0, np.where(hi, 1.0, sig))
    flat = lo | hi
    S1 = np.where(flat, 0.0, ds * w1)
    S2 = np.where(flat, 0.0, ds * (1.0 - 2.0 * sig) * w1 * w1 + ds * w2)
    return S, S1, S2


def smooth_cutoff(inner_radius: float, outer_radius: float, center=(0.0, 0.0, 0.0)) -> ScalarField:
    """Radial cutoff equal to 1 inside ``inner_radius`` and 0 outside ``outer_radius``."""
    if not 0 < inner_radius < outer_radius:
        raise ValueError("need 0 < inner_radius < outer_radius")
    width = outer_radius - inner_radius

    def parts(p):
        d = _offsets(p, center)
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        S, S1, S2 = _smooth_step((r - inner_radius) / width)
        return d, r, 1.0 - S, -S1 / width, -S2 / width**2

    def value(p):
        return parts(p)[2]

    def gradient(p):
        d, r, _, c1, _ = parts(p)
        # c1 vanishes for r < inner_radius, so r > 0 wherever it is used
        rr = np.where(r > 0, r, 1.0)
        return (c1 / rr)[..., None] * d

    def hessian(p):
        d, r, _, c1, c2 = parts(p)
        rr = np.where(r > 0, r, 1.0)
        n = d / rr[..., None]
        nn = n[..., :, None] * n[..., None, :]
        return c2[..., None, None] * nn + (c1 / rr)[..., None, None] * (np.eye(3) - nn)

    return ScalarField(value, gradient, hessian)


def polarized_profile(
    A: float,
    Bamp: float,
    omega: float,
    inner_radius: float,
    outer_radius: float,
    center=(0.0, 0.0, 0.0),
) -> Profile:
    """``(A y sin(omega x) + Bamp z cos(omega x)) * chi`` with chi a smooth radial cutoff."""
    if not omega > 0:
        raise ValueError("omega must be positive")

    def trig(p):
        d = _offsets(p, center)
        x, y, z = d[..., 0], d[..., 1], d[..., 2]
        return x, y, z, np.sin(omega * x), np.cos(omega * x)

    def value(p):
        x, y, z, sn, cs = trig(p)
        return A * y * sn + Bamp * z * cs

    def gradient(p):
        x, y, z, sn, cs = trig(p)
        return np.stack([omega * (A * y * cs - Bamp * z * sn), A * sn, Bamp * cs], axis=-1)

    def hessian(p):
        x, y, z, sn, cs = trig(p)
        H = np.zeros(np.shape(x) + (3, 3))
        H[..., 0, 0] = -omega**2 * (A * y * sn + Bamp * z * cs)
        H[..., 0, 1] = H[..., 1, 0] = A * omega * cs
        H[..., 0, 2] = H[..., 2, 0] = -Bamp * omega * sn
        return H

    carrier = ScalarField(value, gradient, hessian)
    field = carrier * smooth_cutoff(inner_radius, outer_radius, center)
    label = f"polarized(A={A:g},B={Bamp:g},omega={omega:g})"
    return Profile(field, outer_radius, tuple(float(c) for c in center), label)


def zero_profile() -> Profile:
    return Profile(ScalarField.constant(0.0), 0.0, label="zero")


# -- solutions ---------------------------------------------------------------

# E = c * P_E grad(a), B = P_B grad(a)
_P_E = np.array([[0.0, 0, 0], [0, 1, 0], [0, 0, 1]])
_P_B = np.array([[0.0, 0, 0], [0, 0, -1], [0, 1, 0]])

# proper rotations carrying x-hat to the named axis
AXIS_ROTATIONS = {
    "x": np.eye(3),
    "y": np.array([[0.0, 0, 1], [1, 0, 0], [0, 1, 0]]),
    "z": np.array([[0.0, 1, 0], [0, 0, 1], [1, 0, 0]]),
}


def photon_wave(profile: Profile, constants: PhysicalConstants = NORMALIZED, direction: str = "x") -> EMSolution:
    """Traveling wave E = c(0, a_y, a_z), B = (0, -a_z, a_y) with a = a0(x - ct, y, z).

    ``direction`` rotates the construction so the packet travels along +y or +z.
    """
    c = constants.c
    a0 = profile.field

    def retarded(p):
        p = as_points(p)
        q = p.copy()
        q[..., 0] = p[..., 0] - c * p[..., 3]
        q[..., 3] = 0.0
        return q

    def proj(P, v):
        return np.einsum("ij,...j->...i", P, v)

    def projm(P, M):
        return np.einsum("ij,...jk->...ik", P, M)

    E = VectorField(
        lambda p: c * proj(_P_E, a0.gradient(retarded(p))),
        lambda p: c * projm(_P_E, a0.hessian(retarded(p))),
        lambda p: -c * c * proj(_P_E, a0.hessian(retarded(p))[..., :, 0]),
    )
    B = VectorField(
        lambda p: proj(_P_B, a0.gradient(retarded(p))),
        lambda p: projm(_P_B, a0.hessian(retarded(p))),
        lambda p: -c * proj(_P_B, a0.hessian(retarded(p))[..., :, 0]),
    )
    sol = EMSolution(E, B, constants, SingularSet(), f"photon_wave[{profile.label}]")
    if direction != "x":
        sol = rotated(sol, AXIS_ROTATIONS[direction])
    return sol


def uk_solution(
    k: float,
    constants: PhysicalConstants = NORMALIZED,
    origin_radius: float = 1e-3,
    axis_radius: float = 1e-3,
) -> EMSolution:
    """E = grad(u_k), B = (2k / (c s)) (y u_k, -x u_k, 0), singular at the origin
    and, for k != 0, along the z-axis."""
    c = constants.c
    u = uk_function(k)
    singular = axis_exclusion(origin_radius, axis_radius if k != 0 else 0.0)
    E_scalar = lift(u, singular)
    E = VectorField(E_scalar.gradient, E_scalar.hessian, singular=singular)
    b = 2.0 * k / c
    if k == 0:
        return EMSolution(E, VectorField.zero(), constants, singular, "u_0")

    def parts(p):
        p = as_points(p)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        s = x * x + y * y
        j = u.jet(s, z)
        w = j.v / s
        w_s = j.s / s - j.v / s**2
        w_z = j.z / s
        return x, y, w, w_s, w_z

    def value(p):
        x, y, w, _, _ = parts(p)
        return b * np.stack([y * w, -x * w, np.zeros_like(w)], axis=-1)

    def jacobian(p):
        x, y, w, w_s, w_z = parts(p)
        J = np.zeros(np.shape(w) + (3, 3))
        J[..., 0, 0] = 2 * x * y * w_s
        J[..., 0, 1] = w + 2 * y * y * w_s
        J[..., 0, 2] = y * w_z
        J[..., 1, 0] = -(w + 2 * x * x * w_s)
        J[..., 1, 1] = -2 * x * y * w_s
        J[..., 1, 2] = -x * w_z
        return b * J

    B = VectorField(value, jacobian, singular=singular)
    return EMSolution(E, B, constants, singular, f"u_{k:g}")


def stationary_pair_solution(psi: ChartFunction, constants: PhysicalConstants = NORMALIZED) -> EMSolution:
    """E = grad(psi), B = (2/c) psi_s (-y, x, 0) for psi = psi(s)."""
    extra = set(psi.depends_on) - {"s"}
    if extra:
        raise ValueError(f"psi must depend on s only, but depends on {sorted(extra)}")
    c = constants.c
    field = lift(psi)
    E = VectorField(field.gradient, field.hessian)

    def parts(p):
        p = as_points(p)
        x, y = p[..., 0], p[..., 1]
        j = psi.jet(x * x + y * y, p[..., 2])
        return x, y, j.s, j.ss

    def value(p):
        x, y, m, _ = parts(p)
        return (2.0 / c) * np.stack([-y * m, x * m, np.zeros_like(m)], axis=-1)

    def jacobian(p):
        x, y, m, m_s = parts(p)
        J = np.zeros(np.shape(m) + (3, 3))
        J[..., 0, 0] = -2 * x * y * m_s
        J[..., 0, 1] = -(m + 2 * y * y * m_s)
        J[..., 1, 0] = m + 2 * x * x * m_s
        J[..., 1, 1] = 2 * x * y * m_s
        return (2.0 / c) * J

    return EMSolution(E, VectorField(value, jacobian), constants, SingularSet(), f"stationary_pair[{psi.label}]")


def constant_background(h1: float, h2: float, h3: float, constants: PhysicalConstants = NORMALIZED) -> EMSolution:
    """Uniform fields E = (0, c h2, c h3), B = (h1, -h3, h2)."""
    c = constants.c
    E = VectorField.constant((0.0, c * h2, c * h3))
    B = VectorField.constant((h1, -h3, h2))
    return EMSolution(E, B, constants, SingularSet(), f"background({h1:g},{h2:g},{h3:g})")


def zero_solution(constants: PhysicalConstants = NORMALIZED) -> EMSolution:
    return EMSolution(VectorField.zero(), VectorField.zero(), constants, SingularSet(), "zero")


def superpose(s1: EMSolution, s2: EMSolution) -> EMSolution:
    if s1.constants != s2.constants:
        raise ValueError("cannot superpose solutions built with different constants")
    return EMSolution(
        s1.E + s2.E,
        s1.B + s2.B,
        s1.constants,
        s1.singular.union(s2.singular),
        f"{s1.label}+{s2.label}",
    )


def scaled(sol: EMSolution, alpha: float) -> EMSolution:
    return EMSolution(sol.E.scaled(alpha), sol.B.scaled(alpha), sol.constants, sol.singular, f"{alpha:g}*{sol.label}")


def _transform_field(vf: VectorField, R: np.ndarray, shift: np.ndarray, tau: float) -> VectorField:
    def pull(p):
        p = as_points(p)
        q = np.empty_like(p)
        q[..., :3] = (p[..., :3] - shift) @ R
        q[..., 3] = p[..., 3] - tau
        return q

    return VectorField(
        lambda p: vf.value(pull(p)) @ R.T,
        lambda p: np.einsum("ij,...jk,lk->...il", R, vf.jacobian(pull(p)), R),
        lambda p: vf.time_derivative(pull(p)) @ R.T,
        vf.singular.moved(R, shift),
    )


def transformed(sol: EMSolution, rotation=None, shift=(0.0, 0.0, 0.0), tau: float = 0.0) -> EMSolution:
    """The solution moved by x -> R x + shift, t -> t + tau.

    ``rotation`` must be proper (det +1) so that E x B keeps its orientation.
    """
    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    if not np.allclose(R @ R.T, np.eye(3), atol=1e-12) or np.linalg.det(R) < 0:
        raise ValueError("rotation must be a proper orthogonal matrix")
    shift = np.asarray(shift, dtype=float)
    return EMSolution(
        _transform_field(sol.E, R, shift, tau),
        _transform_field(sol.B, R, shift, tau),
        sol.constants,
        sol.singular.moved(R, shift),
        sol.label,
    )


def rotated(sol: EMSolution, rotation) -> EMSolution:
    return transformed(sol, rotation=rotation)


def translated(sol: EMSolution, shift, tau: float = 0.0) -> EMSolution:
    return transformed(sol, shift=shift, tau=tau)
