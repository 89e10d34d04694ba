"""Residual checkers for axisymmetric fields.

Everything here works in the chart (s, z, t) with s = x^2 + y^2 and the
3-space Laplacian written as 4 d_s(s d_s) + d_z^2.  Cartesian evaluations
only ever serve as oracles in the tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .chart import (
    ChartFunction,
    ChartJet,
    MissingDerivativeError,
    axis_exclusion,
    chart_laplacian,
    lift,
    uk_function,
)
from .fieldcore import NORMALIZED, PhysicalConstants, VectorField, as_points
from .solutions import EMSolution

__all__ = [
    "S_MIN",
    "AxiPoint",
    "OneVarFunction",
    "FGHU",
    "linear",
    "eq_star_residual",
    "eq_doublestar_residual",
    "uk_identity_residual",
    "ansatz4a_solution",
    "ansatz4b_solution",
    "system4b_residual",
    "stationary4b_residual",
    "stationary_g",
    "reconstruct_phi",
    "MissingDerivativeError",
]

S_MIN = 1e-6


class AxiPoint(NamedTuple):
    s: float
    z: float
    t: float = 0.0

    def checked(self):
        s = np.asarray(self.s, dtype=float)
        if np.any(s < 0):
            raise ValueError("s = x^2 + y^2 cannot be negative")
        return s, np.asarray(self.z, dtype=float), np.asarray(self.t, dtype=float)


@dataclass(frozen=True)
class OneVarFunction:
    """A function of one variable with callables for its value and derivatives."""

    f: Callable
    d1: Callable | None = None
    d2: Callable | None = None

    def derivs(self, lam, order: int):
        out = [self.f(lam)]
        for n, d in enumerate((self.d1, self.d2)[:order], start=1):
            if d is None:
                raise MissingDerivativeError(f"derivative of order {n} is not available")
            out.append(d(lam))
        return out


def linear(coef: float) -> OneVarFunction:
    return OneVarFunction(lambda x: coef * x, lambda x: coef * np.ones_like(x), lambda x: np.zeros_like(x))


@dataclass(frozen=True)
class FGHU:
    f: OneVarFunction
    g: OneVarFunction
    h: OneVarFunction
    u: ChartFunction


def _axis_warning(s):
    if np.any(np.asarray(s) < S_MIN):
        warnings.warn(f"evaluating within s < {S_MIN:g} of the symmetry axis", RuntimeWarning)


def eq_star_residual(fghu: FGHU, p: AxiPoint, constants: PhysicalConstants = NORMALIZED):
    """(s/c^2) Lap f(u) f'(u) - [4 s g'(u) d_s^2 g(u) + g'(u) d_z^2 g(u) + h(u) h'(u)]."""
    s, z, t = AxiPoint(*p).checked()
    j = fghu.u.jet(s, z, t)
    u, u_s, u_z, u_ss, u_zz = j.need("v", "s", "z", "ss", "zz")
    _, f1, f2 = fghu.f.derivs(u, 2)
    _, g1, g2 = fghu.g.derivs(u, 2)
    h0, h1 = fghu.h.derivs(u, 1)
    grad_u_sq = 4.0 * s * u_s**2 + u_z**2
    lap_f = f2 * grad_u_sq + f1 * chart_laplacian(j, s)
    g_ss = g2 * u_s**2 + g1 * u_ss
    g_zz = g2 * u_z**2 + g1 * u_zz
    return (s / constants.c**2) * lap_f * f1 - (4.0 * s * g1 * g_ss + g1 * g_zz + h0 * h1)


def eq_doublestar_residual(u: ChartFunction, a0: float, a: float, b: float, p: AxiPoint,
                           constants: PhysicalConstants = NORMALIZED):
    """(a0^2/c^2) s Lap u - [4 a^2 s u_ss + a^2 u_zz + b^2 u]."""
    s, z, t = AxiPoint(*p).checked()
    j = u.jet(s, z, t)
    u0, u_ss, u_zz = j.need("v", "ss", "zz")
    return (a0**2 / constants.c**2) * s * chart_laplacian(j, s) - (4 * a * a * s * u_ss + a * a * u_zz + b * b * u0)


def uk_identity_residual(k: float, p: AxiPoint):
    """s Lap u_k - 4 k^2 u_k."""
    s, z, _ = AxiPoint(*p).checked()
    if np.any(s <= 0) or np.any((s == 0) & (z == 0)):
        raise ValueError("u_k identity is only defined for s > 0")
    # the two terms grow like |u_k| near the origin while their difference is
    # zero, so the partials are evaluated in extended precision
    sl, zl = s.astype(np.longdouble), z.astype(np.longdouble)
    j = uk_function(k).jet_fn(sl, zl, np.zeros_like(sl))
    kl = np.longdouble(k)
    return (sl * chart_laplacian(j, sl) - 4 * kl * kl * j.v).astype(float)


def ansatz4a_solution(u: ChartFunction, a0: float, a: float, b: float,
                      constants: PhysicalConstants = NORMALIZED,
                      origin_radius: float = 0.0, axis_radius: float = 1e-3) -> EMSolution:
    """E = a0 grad u,
    B = (a x/s u_z + b y/s u, a y/s u_z - b x/s u, -2 a u_s).

    With a = 0, b = 2k/c and a0 = 1 this reproduces the u_k family.
    """
    singular = axis_exclusion(origin_radius, axis_radius if (a != 0 or b != 0) else 0.0)
    scalar = lift(u, singular)
    E = VectorField(scalar.gradient, scalar.hessian, singular=singular).scaled(a0)

    def parts(p):
        p = as_points(p)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        s = x * x + y * y
        if np.any(s < S_MIN) and (a != 0 or b != 0):
            warnings.warn("ansatz field evaluated next to the symmetry axis", RuntimeWarning)
        j = u.jet(s, z)
        u0, u_s, u_z, u_ss, u_sz, u_zz = j.need("v", "s", "z", "ss", "sz", "zz")
        m, m_s, m_z = u_z / s, u_sz / s - u_z / s**2, u_zz / s
        w, w_s, w_z = u0 / s, u_s / s - u0 / s**2, u_z / s
        return x, y, u_s, u_ss, u_sz, m, m_s, m_z, w, w_s, w_z

    def value(p):
        x, y, u_s, _, _, m, _, _, w, _, _ = parts(p)
        return np.stack([a * x * m + b * y * w, a * y * m - b * x * w, -2 * a * u_s], axis=-1)

    def jacobian(p):
        x, y, u_s, u_ss, u_sz, m, m_s, m_z, w, w_s, w_z = parts(p)
        J = np.empty(np.shape(x) + (3, 3))
        # poloidal part a * (x m, y m, -2 u_s)
        J[..., 0, 0] = a * (m + 2 * x * x * m_s) + b * 2 * x * y * w_s
        J[..., 0, 1] = a * 2 * x * y * m_s + b * (w + 2 * y * y * w_s)
        J[..., 0, 2] = a * x * m_z + b * y * w_z
        J[..., 1, 0] = a * 2 * x * y * m_s - b * (w + 2 * x * x * w_s)
        J[..., 1, 1] = a * (m + 2 * y * y * m_s) - b * 2 * x * y * w_s
        J[..., 1, 2] = a * y * m_z - b * x * w_z
        J[..., 2, 0] = -2 * a * 2 * x * u_ss
        J[..., 2, 1] = -2 * a * 2 * y * u_ss
        J[..., 2, 2] = -2 * a * u_sz
        return J

    B = VectorField(value, jacobian, singular=singular)
    return EMSolution(E, B, constants, singular, f"ansatz4a[{u.label}]")


def ansatz4b_solution(psi: ChartFunction, phi: ChartFunction,
                      constants: PhysicalConstants = NORMALIZED) -> EMSolution:
    """E = (Psi_x, Psi_y, Psi_z + dPhi/dt), B = (-Phi_y, Phi_x, 0)."""
    P = lift(psi)

    def chart(p):
        p = as_points(p)
        x, y, z, t = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
        return x, y, x * x + y * y, z, t

    def e_value(p):
        x, y, s, z, t = chart(p)
        out = P.gradient(p)
        out[..., 2] += phi.jet(s, z, t).need("t")[0]
        return out

    def e_jacobian(p):
        x, y, s, z, t = chart(p)
        st, zt = phi.jet(s, z, t).need("st", "zt")
        J = P.hessian(p)
        J[..., 2, 0] += 2 * x * st
        J[..., 2, 1] += 2 * y * st
        J[..., 2, 2] += zt
        return J

    def e_dot(p):
        x, y, s, z, t = chart(p)
        pj, fj = psi.jet(s, z, t), phi.jet(s, z, t)
        ps_t, pz_t = pj.need("st", "zt")
        (f_tt,) = fj.need("tt")
        return np.stack([2 * x * ps_t, 2 * y * ps_t, pz_t + f_tt], axis=-1)

    def b_value(p):
        x, y, s, z, t = chart(p)
        (f_s,) = phi.jet(s, z, t).need("s")
        return np.stack([-2 * y * f_s, 2 * x * f_s, np.zeros_like(f_s)], axis=-1)

    def b_jacobian(p):
        x, y, s, z, t = chart(p)
        f_s, f_ss, f_sz = phi.jet(s, z, t).need("s", "ss", "sz")
        J = np.zeros(np.shape(x) + (3, 3))
        J[..., 0, 0] = -4 * x * y * f_ss
        J[..., 0, 1] = -2 * f_s - 4 * y * y * f_ss
        J[..., 0, 2] = -2 * y * f_sz
        J[..., 1, 0] = 2 * f_s + 4 * x * x * f_ss
        J[..., 1, 1] = 4 * x * y * f_ss
        J[..., 1, 2] = 2 * x * f_sz
        return J

    def b_dot(p):
        x, y, s, z, t = chart(p)
        (f_st,) = phi.jet(s, z, t).need("st")
        return np.stack([-2 * y * f_st, 2 * x * f_st, np.zeros_like(f_st)], axis=-1)

    E = VectorField(e_value, e_jacobian, e_dot)
    B = VectorField(b_value, b_jacobian, b_dot)
    return EMSolution(E, B, constants, label=f"ansatz4b[{psi.label},{phi.label}]")


def system4b_residual(psi: ChartFunction, phi: ChartFunction, p: AxiPoint,
                      constants: PhysicalConstants = NORMALIZED):
    """The two residuals of the time-dependent Psi/Phi system::

        Phi_s [4c^2 d_s(s Phi_s) - Phi_tt - Psi_zt] - Psi_s [Lap Psi + Phi_zt]
        Phi_s [4c^2 d_z(s Phi_s) + 4 s Psi_st]   - (Phi_t + Psi_z) [Lap Psi + Phi_zt]
    """
    s, z, t = AxiPoint(*p).checked()
    c2 = constants.c**2
    P, F = psi.jet(s, z, t), phi.jet(s, z, t)
    p_s, p_z, p_zt, p_st = P.need("s", "z", "zt", "st")
    f_s, f_t, f_ss, f_sz, f_tt, f_zt = F.need("s", "t", "ss", "sz", "tt", "zt")
    lap = chart_laplacian(P, s)
    src = lap + f_zt
    r1 = f_s * (4 * c2 * (f_s + s * f_ss) - f_tt - p_zt) - p_s * src
    r2 = f_s * (4 * c2 * s * f_sz + 4 * s * p_st) - (f_t + p_z) * src
    return r1, r2


def stationary4b_residual(psi: ChartFunction, g: ChartFunction, p: AxiPoint,
                          constants: PhysicalConstants = NORMALIZED):
    """4c^2 g g_s - s Lap(Psi) Psi_s  and  4c^2 g g_z - s Lap(Psi) Psi_z."""
    s, z, t = AxiPoint(*p).checked()
    c2 = constants.c**2
    P, G = psi.jet(s, z, t), g.jet(s, z, t)
    p_s, p_z = P.need("s", "z")
    g0, g_s, g_z = G.need("v", "s", "z")
    slap = s * chart_laplacian(P, s)
    return 4 * c2 * g0 * g_s - slap * p_s, 4 * c2 * g0 * g_z - slap * p_z


def stationary_g(psi: ChartFunction, constants: PhysicalConstants = NORMALIZED) -> ChartFunction:
    """g = s Psi_s / c, the partner of a z-independent Psi."""
    extra = set(psi.depends_on) - {"s"}
    if extra:
        raise ValueError(f"psi must depend on s only, but depends on {sorted(extra)}")
    c = constants.c

    def jet_fn(s, z, t):
        P = psi.jet_fn(s, z, t)
        p_s, p_ss = P.need("s", "ss")
        zero = np.zeros_like(p_s)
        return ChartJet(s * p_s / c, (p_s + s * p_ss) / c, zero, zero, None, zero, zero, zero, zero, zero)

    return ChartFunction(jet_fn, frozenset({"s"}), f"g[{psi.label}]")


def reconstruct_phi(g: ChartFunction, s_min: float = S_MIN) -> ChartFunction:
    """Stationary Phi with s Phi_s = g and Phi(s_min) = 0, for g = g(s).

    The value is integrated numerically; the derivatives, which are all the
    fields depend on, are exact.
    """
    extra = set(g.depends_on) - {"s"}
    if extra:
        raise ValueError("only z- and t-independent g can be integrated")

    def integral(sv):
        return quad(lambda q: float(g.jet(q).v) / q, s_min, sv, epsabs=1e-13, epsrel=1e-12)[0]

    def jet_fn(s, z, t):
        G = g.jet_fn(s, z, t)
        g0, g_s = G.need("v", "s")
        value = np.vectorize(integral, otypes=[float])(s)
        zero = np.zeros_like(g0)
        return ChartJet(value, g0 / s, zero, zero, (g_s - g0 / s) / s, zero, zero, zero, zero, zero)

    return ChartFunction(jet_fn, frozenset({"s"}), f"phi[{g.label}]")
