"""Scenario configuration: a YAML document validated by a strict schema.

Unknown keys anywhere in the document are errors.  A minimal scenario::

    solution:
      family: photon_wave
      profile: {kind: polarized, A: 1.0, B: 0.5, omega: 3.0,
                inner_radius: 0.6, outer_radius: 1.0}
    grid: {lower: [-1.2, -1.2, -1.2], upper: [1.2, 1.2, 1.2], points: 33}
    checks: [system1, system2]
    seed: 7

Solution families and their parameters are the models below; the
``family`` key selects one.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from .axisym import ansatz4a_solution
from .chart import gaussian_function, uk_function
from .fieldcore import NORMALIZED, SI, GridSpec, PhysicalConstants
from .solutions import (
    EMSolution,
    constant_background,
    mollifier,
    photon_wave,
    polarized_profile,
    stationary_pair_solution,
    superpose,
    uk_solution,
    zero_profile,
    zero_solution,
)

__all__ = [
    "ConfigParseError",
    "Scenario",
    "load_document",
    "parse_scenario",
    "build_solution",
    "build_grid",
    "DEFAULT_TOLERANCES",
]

CHECKS = ("system1", "system2", "conserved", "axisym", "media")
DEFAULT_TOLERANCES = {
    "system1": 1e-10,
    "system2": 1e-10,
    "conserved": 1e-8,
    "axisym": 1e-10,
    "media": 1e-11,
}


class ConfigParseError(ValueError):
    """The configuration text is not a well-formed YAML mapping."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Vec3 = tuple[float, float, float]


class MollifierSpec(_Strict):
    kind: Literal["mollifier"]
    radius: PositiveFloat = 1.0
    amplitude: float = 1.0
    center: Vec3 = (0.0, 0.0, 0.0)


class PolarizedSpec(_Strict):
    kind: Literal["polarized"]
    A: float = 1.0
    B: float = 0.5
    omega: PositiveFloat = 3.0
    inner_radius: PositiveFloat = 0.6
    outer_radius: PositiveFloat = 1.0
    center: Vec3 = (0.0, 0.0, 0.0)

    @model_validator(mode="after")
    def _radii(self):
        if self.outer_radius <= self.inner_radius:
            raise ValueError("outer_radius must exceed inner_radius")
        return self


class ZeroProfileSpec(_Strict):
    kind: Literal["zero"]


ProfileSpec = Annotated[Union[MollifierSpec, PolarizedSpec, ZeroProfileSpec], Field(discriminator="kind")]


class PhotonWaveSpec(_Strict):
    family: Literal["photon_wave"]
    profile: ProfileSpec
    direction: Literal["x", "y", "z"] = "x"


class UkSpec(_Strict):
    family: Literal["uk"]
    k: float
    origin_radius: PositiveFloat = 1e-3
    axis_radius: PositiveFloat = 1e-3


class StationaryPairSpec(_Strict):
    """psi(s) = amplitude * exp(-alpha s)."""

    family: Literal["stationary_pair"]
    amplitude: float = 1.0
    alpha: PositiveFloat = 1.0


class BackgroundSpec(_Strict):
    family: Literal["constant_background"]
    h1: float = 0.0
    h2: float = 0.0
    h3: float = 0.0


class ZeroSpec(_Strict):
    family: Literal["zero"]


class Ansatz4aSpec(_Strict):
    family: Literal["ansatz4a"]
    k: float
    a0: float = 1.0
    a: float = 0.0
    b: float = 0.0
    axis_radius: PositiveFloat = 1e-3


class SuperpositionSpec(_Strict):
    family: Literal["superposition"]
    members: list["SolutionSpec"] = Field(min_length=1)


SolutionSpec = Annotated[
    Union[PhotonWaveSpec, UkSpec, StationaryPairSpec, BackgroundSpec, ZeroSpec, Ansatz4aSpec, SuperpositionSpec],
    Field(discriminator="family"),
]
SuperpositionSpec.model_rebuild()


class GridModel(_Strict):
    lower: Vec3 = (-1.2, -1.2, -1.2)
    upper: Vec3 = (1.2, 1.2, 1.2)
    points: int = Field(33, ge=3)
    time: float = 0.0

    @model_validator(mode="after")
    def _box(self):
        if any(u <= lo for lo, u in zip(self.lower, self.upper)):
            raise ValueError("grid upper corner must exceed lower corner")
        return self


class AxisymModel(_Strict):
    samples: int = Field(200, ge=1)
    s_range: tuple[PositiveFloat, PositiveFloat] = (0.01, 2.0)
    z_range: tuple[float, float] = (-2.0, 2.0)


class MediaModel(_Strict):
    cases: int = Field(1000, ge=1)
    v_cap: float = Field(0.99, gt=0.0, lt=1.0)


class SweepModel(_Strict):
    kind: Literal["fd", "quadrature"] = "quadrature"
    quantity: Literal["total_charge", "total_energy", "jacobian_error"] = "total_charge"
    resolutions: list[float] = Field(default_factory=lambda: [17, 33, 65], min_length=3)
    point: tuple[float, float, float, float] = (0.3, 0.2, -0.1, 0.0)
    rule: Literal["midpoint", "simpson"] = "midpoint"
    check_support: bool = True

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "fd" and self.quantity != "jacobian_error":
            raise ValueError("fd sweeps measure quantity 'jacobian_error'")
        if self.kind == "quadrature" and self.quantity == "jacobian_error":
            raise ValueError("quadrature sweeps measure total_charge or total_energy")
        if any(r <= 0 for r in self.resolutions):
            raise ValueError("resolutions must be positive")
        if self.kind == "quadrature" and any(r != int(r) or r < 3 for r in self.resolutions):
            raise ValueError("quadrature resolutions are integer point counts >= 3")
        return self


class PlotModel(_Strict):
    quantity: Literal["rho", "energy_density", "E_norm", "B_norm", "force_norm", "power"] = "rho"
    axis: Literal["x", "y", "z"] = "x"
    start: float = -1.5
    stop: float = 1.5
    samples: int = Field(201, ge=2)
    offset: Vec3 = (0.0, 0.0, 0.0)
    time: float = 0.0


class Scenario(_Strict):
    solution: SolutionSpec
    constants: Literal["normalized", "si"] = "normalized"
    grid: GridModel = GridModel()
    checks: list[Literal["system1", "system2", "conserved", "axisym", "media"]] = Field(
        default_factory=lambda: ["system1"]
    )
    tolerances: dict[str, PositiveFloat] = Field(default_factory=dict)
    seed: int = Field(0, ge=0, lt=2**64)
    axisym: AxisymModel = AxisymModel()
    media: MediaModel = MediaModel()
    sweep: SweepModel | None = None
    plot: PlotModel | None = None

    @field_validator("checks")
    @classmethod
    def _checks(cls, v):
        if not v:
            raise ValueError("at least one check is required")
        if len(set(v)) != len(v):
            raise ValueError("checks must not repeat")
        return v

    @field_validator("tolerances")
    @classmethod
    def _tolerances(cls, v):
        unknown = set(v) - set(CHECKS)
        if unknown:
            raise ValueError(f"tolerances for unknown checks: {sorted(unknown)}")
        return v

    def tolerance(self, check: str) -> float:
        return self.tolerances.get(check, DEFAULT_TOLERANCES[check])

    def physical_constants(self) -> PhysicalConstants:
        return SI if self.constants == "si" else NORMALIZED


def load_document(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise ConfigParseError("configuration must be a mapping at top level")
    return doc


def parse_scenario(doc: dict) -> Scenario:
    """Validate a parsed document; raises ``pydantic.ValidationError``."""
    return Scenario.model_validate(doc)


def _profile(spec):
    if spec.kind == "mollifier":
        return mollifier(spec.center, spec.radius, spec.amplitude)
    if spec.kind == "polarized":
        return polarized_profile(spec.A, spec.B, spec.omega, spec.inner_radius, spec.outer_radius, spec.center)
    return zero_profile()


def _exp_psi(amplitude: float, alpha: float):
    g = gaussian_function(amplitude, alpha, 0.0)
    # beta = 0 removes the z dependence; declare it so the stationary-pair guard accepts it
    return type(g)(g.jet_fn, frozenset({"s"}), f"{amplitude:g}*exp(-{alpha:g}s)")


def build_solution(spec, constants: PhysicalConstants = NORMALIZED) -> EMSolution:
    family = spec.family
    if family == "photon_wave":
        return photon_wave(_profile(spec.profile), constants, spec.direction)
    if family == "uk":
        return uk_solution(spec.k, constants, spec.origin_radius, spec.axis_radius)
    if family == "stationary_pair":
        return stationary_pair_solution(_exp_psi(spec.amplitude, spec.alpha), constants)
    if family == "constant_background":
        return constant_background(spec.h1, spec.h2, spec.h3, constants)
    if family == "zero":
        return zero_solution(constants)
    if family == "ansatz4a":
        return ansatz4a_solution(uk_function(spec.k), spec.a0, spec.a, spec.b, constants,
                                 axis_radius=spec.axis_radius)
    parts = [build_solution(m, constants) for m in spec.members]
    out = parts[0]
    for p in parts[1:]:
        out = superpose(out, p)
    return out


def build_grid(model: GridModel, points: int | None = None) -> GridSpec:
    return GridSpec(model.lower, model.upper, points or model.points, model.time)


def psi_for(spec):
    """The chart function behind an axisymmetric family, used by the axisym check."""
    if spec.family == "stationary_pair":
        return _exp_psi(spec.amplitude, spec.alpha)
    if spec.family in ("uk", "ansatz4a"):
        return uk_function(spec.k)
    return None


def sample_chart_points(model: AxisymModel, rng: np.random.Generator):
    s = rng.uniform(*model.s_range, size=model.samples)
    z = rng.uniform(*model.z_range, size=model.samples)
    return s, z
