"""Box quadrature of charge, energy and momentum.

Energy density is eps0 |E|^2 / 2 + |B|^2 / (2 mu0); momentum density is
eps0 E x B.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .diagnostics import derived_state
from .fieldcore import GridSpec, as_points
from .solutions import EMSolution

__all__ = [
    "SupportError",
    "QuadratureResult",
    "ConservedReport",
    "integrate_box",
    "energy_density",
    "momentum_density",
    "total_charge",
    "energy_momentum",
]

SUPPORT_TOLERANCE = 1e-12


class SupportError(ValueError):
    """The integrand does not vanish on the faces of the integration box."""


@dataclass(frozen=True)
class QuadratureResult:
    """``value`` and ``error`` share the integrand's trailing shape;
    ``abs_value`` integrates the pointwise magnitude."""

    value: np.ndarray
    error: np.ndarray
    abs_value: float
    cells: int


def _rule_sum(f, grid: GridSpec, rule: str):
    if rule == "midpoint":
        pts = grid.cell_centers()
        w = grid.cell_volume()
        vals = f(pts)
        return vals, w * vals.sum(axis=(0, 1, 2))
    if rule == "simpson":
        if any(n % 2 == 0 for n in grid.points):
            raise ValueError("Simpson's rule needs an odd number of nodes per axis")
        weights = []
        for lo, u, n in zip(grid.lower, grid.upper, grid.points):
            h = (u - lo) / (n - 1)
            wk = np.ones(n)
            wk[1:-1:2] = 4.0
            wk[2:-1:2] = 2.0
            weights.append(wk * h / 3.0)
        W = weights[0][:, None, None] * weights[1][None, :, None] * weights[2][None, None, :]
        vals = f(grid.nodes())
        return vals, np.tensordot(W, vals, axes=([0, 1, 2], [0, 1, 2]))
    raise ValueError(f"unknown quadrature rule {rule!r}")


def _coarse(grid: GridSpec, rule: str) -> GridSpec:
    if rule == "simpson":
        pts = tuple((n - 1) // 2 + 1 if ((n - 1) // 2) % 2 == 0 else (n - 1) // 2 + 2 for n in grid.points)
        pts = tuple(max(3, p) for p in pts)
    else:
        pts = tuple(max(3, math.ceil(n / 2)) for n in grid.points)
    return grid.with_points(pts)


def _magnitude(vals):
    return np.abs(vals) if vals.ndim == 3 else np.linalg.norm(vals.reshape(vals.shape[:3] + (-1,)), axis=-1)


def integrate_box(
    f: Callable,
    grid: GridSpec,
    rule: str = "midpoint",
    check_support: bool = True,
) -> QuadratureResult:
    """Integrate ``f`` over the box of ``grid``.

    ``f`` maps points of shape (..., 4) to values of shape (...) or (..., k).
    The midpoint rule uses ``grid.points`` equal cells per axis; Simpson's rule
    uses the grid nodes.  The error estimate is the Richardson difference to a
    run at roughly half the resolution, assuming second-order convergence.
    """
    vals, total = _rule_sum(f, grid, rule)
    if check_support:
        scale = float(np.max(_magnitude(vals), initial=0.0))
        face = f(grid.face_nodes())
        face_max = float(np.max(np.abs(face), initial=0.0))
        if face_max > SUPPORT_TOLERANCE * scale:
            raise SupportError(
                f"integrand reaches {face_max:.3e} on the box faces (interior scale {scale:.3e})"
            )
    coarse = _coarse(grid, rule)
    _, total_c = _rule_sum(f, coarse, rule)
    ratio = (grid.points[0] - (rule == "simpson")) / (coarse.points[0] - (rule == "simpson"))
    error = np.abs(total - total_c) / (ratio**2 - 1.0)
    if rule == "midpoint":
        abs_value = float(grid.cell_volume() * _magnitude(vals).sum())
    else:
        abs_value = float(_rule_sum(lambda p: _magnitude(f(p)), grid, rule)[1])
    return QuadratureResult(total, error, abs_value, int(np.prod(grid.points)))


def energy_density(sol: EMSolution, p) -> np.ndarray:
    k = sol.constants
    E, B = sol.E.value(as_points(p)), sol.B.value(as_points(p))
    return 0.5 * k.eps0 * np.einsum("...i,...i->...", E, E) + np.einsum("...i,...i->...", B, B) / (2.0 * k.mu0)


def momentum_density(sol: EMSolution, p) -> np.ndarray:
    p = as_points(p)
    return sol.constants.eps0 * np.cross(sol.E.value(p), sol.B.value(p))


@dataclass(frozen=True)
class ConservedReport:
    total_charge: float
    total_energy: float
    momentum: tuple
    dispersion_gap: float
    cells: int
    charge_error: float
    energy_error: float
    momentum_error: tuple
    abs_charge: float

    def to_dict(self) -> dict:
        return asdict(self)


def total_charge(sol: EMSolution, grid: GridSpec, rule: str = "midpoint") -> QuadratureResult:
    """Integral of rho = eps0 div E over the box."""
    return integrate_box(lambda p: derived_state(sol, p).rho, grid, rule)


def energy_momentum(sol: EMSolution, grid: GridSpec, rule: str = "midpoint") -> ConservedReport:
    def densities(p):
        return np.concatenate(
            [
                derived_state(sol, p).rho[..., None],
                energy_density(sol, p)[..., None],
                momentum_density(sol, p),
            ],
            axis=-1,
        )

    rho = integrate_box(lambda p: derived_state(sol, p).rho, grid, rule)
    res = integrate_box(densities, grid, rule)
    energy = float(res.value[1])
    momentum = res.value[2:]
    return ConservedReport(
        total_charge=float(rho.value),
        total_energy=energy,
        momentum=tuple(float(v) for v in momentum),
        dispersion_gap=energy - sol.constants.c * float(np.linalg.norm(momentum)),
        cells=res.cells,
        charge_error=float(rho.error),
        energy_error=float(res.error[1]),
        momentum_error=tuple(float(v) for v in res.error[2:]),
        abs_charge=rho.abs_value,
    )
