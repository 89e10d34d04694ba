"""Derived vacuum-state characteristics and residuals of the nonlinear
vacuum system and of the classical source-free Maxwell system.

System 1 (nonlinear)::

    dB/dt + curl E = 0,  div B = 0,  rho E + j x B = 0,  E . j = 0

with rho = eps0 div E and j = (curl B - dE/dt / c^2) / mu0 always derived.

System 2 (classical)::

    dB/dt + curl E = 0,  div B = 0,  div E = 0,  dE/dt - c^2 curl B = 0

Every residual is reported raw and normalized by the magnitude of the terms
that cancel in it; the normalized value falls back to the raw one where that
magnitude is below ``NORMALIZATION_FLOOR``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fieldcore import GridSpec, as_points, curl_from_jacobian
from .solutions import EMSolution

__all__ = [
    "DerivedState",
    "ResidualReport",
    "NORMALIZATION_FLOOR",
    "derived_state",
    "residual_system1",
    "residual_system2",
    "sup_residuals",
    "SYSTEM1_KEYS",
    "SYSTEM2_KEYS",
]

NORMALIZATION_FLOOR = 1e-8

SYSTEM1_KEYS = ("faraday", "div_b", "force", "power")
SYSTEM2_KEYS = ("faraday", "div_b", "div_e", "ampere_vacuum")


@dataclass(frozen=True)
class DerivedState:
    rho: np.ndarray
    j: np.ndarray
    force: np.ndarray
    power: np.ndarray


@dataclass
class ResidualReport:
    """Pointwise residuals (arrays over the sampled points) plus, for grid
    sweeps, sup norms keyed by residual name.

    ``normalized`` holds the dimensionless magnitude of each residual.
    ``sup`` and ``sup_normalized`` are maxima of the pointwise magnitudes
    actually sampled; ``skipped`` counts grid points inside the singular set.
    """

    system: int
    faraday: np.ndarray
    div_b: np.ndarray
    force: np.ndarray | None = None
    power: np.ndarray | None = None
    div_e: np.ndarray | None = None
    ampere_vacuum: np.ndarray | None = None
    normalized: dict = field(default_factory=dict)
    sup: dict = field(default_factory=dict)
    sup_normalized: dict = field(default_factory=dict)
    samples: int = 0
    skipped: int = 0

    def keys(self):
        return SYSTEM1_KEYS if self.system == 1 else SYSTEM2_KEYS

    def magnitude(self, key: str) -> np.ndarray:
        v = getattr(self, key)
        return np.linalg.norm(v, axis=-1) if key in _VECTOR_KEYS else np.abs(v)

    def to_dict(self) -> dict:
        """JSON-ready document with fixed keys; pointwise entries are null
        for grid reports, whose content lives under ``sup``."""
        pointwise = not self.sup
        out = {"system": self.system}
        for key in _ALL_KEYS:
            v = getattr(self, key)
            out[key] = np.asarray(v).tolist() if pointwise and v is not None else None
        out["sup"] = {k: float(v) for k, v in self.sup.items()}
        out["sup_normalized"] = {k: float(v) for k, v in self.sup_normalized.items()}
        out["samples"] = int(self.samples)
        out["skipped"] = int(self.skipped)
        return out


_VECTOR_KEYS = {"faraday", "force", "ampere_vacuum"}
_ALL_KEYS = ("faraday", "div_b", "force", "power", "div_e", "ampere_vacuum")


def _norm(v):
    return np.linalg.norm(v, axis=-1)


def _normalize(raw_mag, scale):
    big = scale > NORMALIZATION_FLOOR
    return np.where(big, raw_mag / np.where(big, scale, 1.0), raw_mag)


class _Eval:
    """Field values and derivatives of a solution at a batch of points."""

    def __init__(self, sol: EMSolution, p):
        p = as_points(p)
        sol.singular.check(p)
        self.E = sol.E.value(p)
        self.B = sol.B.value(p)
        self.JE = sol.E.jacobian(p)
        self.JB = sol.B.jacobian(p)
        self.dE = sol.E.time_derivative(p)
        self.dB = sol.B.time_derivative(p)
        self.curlE = curl_from_jacobian(self.JE)
        self.curlB = curl_from_jacobian(self.JB)
        self.divE = np.trace(self.JE, axis1=-2, axis2=-1)
        self.divB = np.trace(self.JB, axis1=-2, axis2=-1)
        k = sol.constants
        self.rho = k.eps0 * self.divE
        self.j = (self.curlB - self.dE / k.c**2) / k.mu0
        self.c = k.c


def derived_state(sol: EMSolution, p) -> DerivedState:
    """rho, j, force density rho E + j x B and power density E . j at ``p``."""
    ev = _Eval(sol, p)
    force = ev.rho[..., None] * ev.E + np.cross(ev.j, ev.B)
    power = np.einsum("...i,...i->...", ev.E, ev.j)
    return DerivedState(ev.rho, ev.j, force, power)


def _diag_abs_sum(J):
    return np.abs(J[..., 0, 0]) + np.abs(J[..., 1, 1]) + np.abs(J[..., 2, 2])


def _common(ev: _Eval, system: int) -> ResidualReport:
    faraday = ev.dB + ev.curlE
    rep = ResidualReport(system, faraday, ev.divB)
    rep.normalized["faraday"] = _normalize(_norm(faraday), _norm(ev.dB) + _norm(ev.curlE))
    # div B = 0 is linear in B; scale by the diagonal Jacobian terms that cancel
    rep.normalized["div_b"] = _normalize(np.abs(ev.divB), _diag_abs_sum(ev.JB))
    return rep


def _system1(ev: _Eval) -> ResidualReport:
    rep = _common(ev, 1)
    rep.force = ev.rho[..., None] * ev.E + np.cross(ev.j, ev.B)
    rep.power = np.einsum("...i,...i->...", ev.E, ev.j)
    scale_f = np.abs(ev.rho) * _norm(ev.E) + _norm(ev.j) * _norm(ev.B)
    rep.normalized["force"] = _normalize(_norm(rep.force), scale_f)
    rep.normalized["power"] = _normalize(np.abs(rep.power), _norm(ev.E) * _norm(ev.j))
    return rep


def _system2(ev: _Eval) -> ResidualReport:
    rep = _common(ev, 2)
    rep.div_e = ev.divE
    rep.ampere_vacuum = ev.dE - ev.c**2 * ev.curlB
    rep.normalized["div_e"] = _normalize(np.abs(ev.divE), _diag_abs_sum(ev.JE))
    rep.normalized["ampere_vacuum"] = _normalize(
        _norm(rep.ampere_vacuum), _norm(ev.dE) + ev.c**2 * _norm(ev.curlB)
    )
    return rep


def residual_system1(sol: EMSolution, p) -> ResidualReport:
    """Pointwise residuals of the nonlinear system at ``p``."""
    return _system1(_Eval(sol, p))


def residual_system2(sol: EMSolution, p) -> ResidualReport:
    """Pointwise residuals of the classical source-free system at ``p``."""
    return _system2(_Eval(sol, p))


def _chunk_sups(sol, pts, system):
    rep = residual_system1(sol, pts) if system == 1 else residual_system2(sol, pts)
    raw = {k: float(np.max(rep.magnitude(k), initial=0.0)) for k in rep.keys()}
    nrm = {k: float(np.max(rep.normalized[k], initial=0.0)) for k in rep.keys()}
    return raw, nrm


def sup_residuals(
    sol: EMSolution,
    grid: GridSpec,
    system: int = 1,
    chunk_size: int = 65536,
    workers: int = 1,
) -> ResidualReport:
    """Sup norms of the residuals over the nodes of ``grid``.

    Nodes inside the solution's singular set are skipped and counted.  The
    grid is split into chunks (optionally evaluated by a thread pool) and
    reduced by max, so the result does not depend on the partitioning.
    """
    if system not in (1, 2):
        raise ValueError("system must be 1 or 2")
    pts = grid.nodes().reshape(-1, 4)
    keep = ~sol.singular.contains(pts) if sol.singular else np.ones(len(pts), dtype=bool)
    pts = pts[keep]
    skipped = int((~keep).sum())
    if len(pts) == 0:
        raise ValueError("no grid points outside the singular set")
    chunks = [pts[i : i + chunk_size] for i in range(0, len(pts), chunk_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_sups(sol, c, system), chunks))
    else:
        parts = [_chunk_sups(sol, c, system) for c in chunks]
    keys = SYSTEM1_KEYS if system == 1 else SYSTEM2_KEYS
    zero = np.zeros((0,))
    rep = ResidualReport(system, zero, zero, samples=len(pts), skipped=skipped)
    rep.sup = {k: max(part[0][k] for part in parts) for k in keys}
    rep.sup_normalized = {k: max(part[1][k] for part in parts) for k in keys}
    return rep
