"""Axisymmetric functions u(s, z, t) with s = x^2 + y^2, stored as jets of
closed-form partial derivatives, and their lift to Cartesian fields.

Cartesian derivatives follow from d/dx = 2x d/ds, d/dy = 2y d/ds, so no
division by s is needed to lift a chart function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .fieldcore import Ball, Cylinder, ScalarField, SingularSet, as_points

__all__ = [
    "MissingDerivativeError",
    "ChartJet",
    "ChartFunction",
    "chart_laplacian",
    "uk_function",
    "gaussian_function",
    "wave_packet_function",
    "lift",
    "axis_exclusion",
]


class MissingDerivativeError(ValueError):
    pass


class ChartJet(NamedTuple):
    """Partial derivatives of a chart function at a set of points.

    Entries a function does not supply are ``None``.
    """

    v: np.ndarray
    s: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    ss: Optional[np.ndarray] = None
    sz: Optional[np.ndarray] = None
    zz: Optional[np.ndarray] = None
    st: Optional[np.ndarray] = None
    zt: Optional[np.ndarray] = None
    tt: Optional[np.ndarray] = None

    def need(self, *names: str) -> tuple:
        out = []
        for name in names:
            val = getattr(self, name)
            if val is None:
                raise MissingDerivativeError(f"partial derivative '{name}' is not available")
            out.append(val)
        return tuple(out)


def _add(a, b):
    return None if a is None or b is None else a + b


@dataclass(frozen=True)
class ChartFunction:
    """``jet(s, z, t)`` returns a :class:`ChartJet`; ``depends_on`` declares
    which of the variables ``'s', 'z', 't'`` the function actually uses."""

    jet_fn: Callable
    depends_on: frozenset = frozenset({"s", "z", "t"})
    label: str = ""

    def jet(self, s, z=0.0, t=0.0) -> ChartJet:
        s, z, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, z, t)))
        return self.jet_fn(s, z, t)

    def __call__(self, s, z=0.0, t=0.0):
        return self.jet(s, z, t).v

    def __add__(self, other: "ChartFunction") -> "ChartFunction":
        def jet_fn(s, z, t):
            a, b = self.jet_fn(s, z, t), other.jet_fn(s, z, t)
            return ChartJet(*(_add(x, y) for x, y in zip(a, b)))

        return ChartFunction(jet_fn, self.depends_on | other.depends_on, f"{self.label}+{other.label}")

    def scaled(self, alpha: float) -> "ChartFunction":
        def jet_fn(s, z, t):
            return ChartJet(*(None if x is None else alpha * x for x in self.jet_fn(s, z, t)))

        return ChartFunction(jet_fn, self.depends_on, f"{alpha:g}*{self.label}")

    def shifted_z(self, lam: float) -> "ChartFunction":
        """The function (s, z) -> u(s, z + lam)."""
        return ChartFunction(lambda s, z, t: self.jet_fn(s, z + lam, t), self.depends_on, self.label)

    @classmethod
    def of_s(cls, f, f1, f2, label: str = "") -> "ChartFunction":
        """A function of s alone from callables for f, f' and f''."""

        def jet_fn(s, z, t):
            zero = np.zeros_like(s)
            return ChartJet(f(s), f1(s), zero, zero, f2(s), zero, zero, zero, zero, zero)

        return cls(jet_fn, frozenset({"s"}), label)


def chart_laplacian(j: ChartJet, s) -> np.ndarray:
    """3-space Laplacian in the chart, 4 d_s(s d_s) + d_z^2."""
    u_s, u_ss, u_zz = j.need("s", "ss", "zz")
    return 4.0 * (u_s + np.asarray(s) * u_ss) + u_zz


# -- concrete functions -------------------------------------------------------


def uk_function(k: float) -> ChartFunction:
    """u_k = s^k (s + z^2)^(-2k - 1/2)."""
    m = -2.0 * k - 0.5

    def jet_fn(s, z, t):
        R = s + z * z
        with np.errstate(divide="ignore", invalid="ignore"):
            u = s**k * R**m
            # for k = 0 the s^k factor is absent, so nothing may divide by s
            k_s = k / s if k != 0 else 0.0
            A = k_s + m / R
            C = 2.0 * m * z / R
            u_s = u * A
            u_z = u * C
            u_ss = u * (A * A - k_s / s - m / R**2) if k != 0 else u * (A * A - m / R**2)
            u_sz = u * (A * C - 2.0 * m * z / R**2)
            u_zz = u * (C * C + 2.0 * m / R - 4.0 * m * z * z / R**2)
        zero = np.zeros_like(u)
        return ChartJet(u, u_s, u_z, zero, u_ss, u_sz, u_zz, zero, zero, zero)

    return ChartFunction(jet_fn, frozenset({"s", "z"}), f"u_{k:g}")


def gaussian_function(amplitude=1.0, alpha=1.0, beta=1.0, z0=0.0) -> ChartFunction:
    """amplitude * exp(-alpha s - beta (z - z0)^2); a smooth generic test function."""

    def jet_fn(s, z, t):
        w = z - z0
        u = amplitude * np.exp(-alpha * s - beta * w * w)
        gz = -2.0 * beta * w
        zero = np.zeros_like(u)
        return ChartJet(
            u,
            -alpha * u,
            gz * u,
            zero,
            alpha * alpha * u,
            -alpha * gz * u,
            (gz * gz - 2.0 * beta) * u,
            zero,
            zero,
            zero,
        )

    return ChartFunction(jet_fn, frozenset({"s", "z"}), "gaussian")


def wave_packet_function(amplitude=1.0, alpha=1.0, kz=1.0, omega=1.0, phase=0.0) -> ChartFunction:
    """amplitude * exp(-alpha s) * cos(kz z - omega t + phase)."""

    def jet_fn(s, z, t):
        env = amplitude * np.exp(-alpha * s)
        th = kz * z - omega * t + phase
        C, S = env * np.cos(th), env * np.sin(th)
        u_t = omega * S
        return ChartJet(
            C,
            -alpha * C,
            -kz * S,
            u_t,
            alpha * alpha * C,
            alpha * kz * S,
            -kz * kz * C,
            -alpha * u_t,
            kz * omega * C,
            -omega * omega * C,
        )

    return ChartFunction(jet_fn, frozenset({"s", "z", "t"}), "wave_packet")


# -- lifting to Cartesian -----------------------------------------------------


def _chart_coords(p):
    p = as_points(p)
    x, y, z, t = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    return x, y, z, t, x * x + y * y


def lift(u: ChartFunction, singular: SingularSet = SingularSet()) -> ScalarField:
    """The Cartesian scalar field (x, y, z, t) -> u(x^2 + y^2, z, t)."""

    def value(p):
        x, y, z, t, s = _chart_coords(p)
        return u.jet(s, z, t).v

    def gradient(p):
        x, y, z, t, s = _chart_coords(p)
        u_s, u_z = u.jet(s, z, t).need("s", "z")
        return np.stack([2 * x * u_s, 2 * y * u_s, u_z], axis=-1)

    def hessian(p):
        x, y, z, t, s = _chart_coords(p)
        u_s, u_ss, u_sz, u_zz = u.jet(s, z, t).need("s", "ss", "sz", "zz")
        H = np.empty(np.shape(x) + (3, 3))
        H[..., 0, 0] = 2 * u_s + 4 * x * x * u_ss
        H[..., 1, 1] = 2 * u_s + 4 * y * y * u_ss
        H[..., 2, 2] = u_zz
        H[..., 0, 1] = H[..., 1, 0] = 4 * x * y * u_ss
        H[..., 0, 2] = H[..., 2, 0] = 2 * x * u_sz
        H[..., 1, 2] = H[..., 2, 1] = 2 * y * u_sz
        return H

    def time_derivative(p):
        x, y, z, t, s = _chart_coords(p)
        return u.jet(s, z, t).need("t")[0]

    return ScalarField(value, gradient, hessian, time_derivative, singular)


def axis_exclusion(origin_radius: float = 0.0, axis_radius: float = 0.0) -> SingularSet:
    regions = []
    if origin_radius > 0:
        regions.append(Ball((0.0, 0.0, 0.0), origin_radius))
    if axis_radius > 0:
        regions.append(Cylinder((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), axis_radius))
    return SingularSet(tuple(regions))
