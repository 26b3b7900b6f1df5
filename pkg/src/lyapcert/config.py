"""Experiment configuration schema.

Pydantic models double as the JSON config format of the CLI and the
request bodies of the service.  Parameters are validated against the
chosen analysis before any computation runs, and a seed is always
present so every run is reproducible.
"""

import math
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from . import dynamics
from .errors import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class DoublingSpec(_Strict):
    kind: Literal["doubling"] = "doubling"


class PerturbedDoublingSpec(_Strict):
    kind: Literal["perturbed_doubling"] = "perturbed_doubling"
    epsilon: float = 0.05

    @field_validator("epsilon")
    @classmethod
    def _check_eps(cls, v):
        if v < 0 or v >= 1.0 / (2.0 * math.pi):
            raise ValueError("epsilon must lie in [0, 1/(2 pi))")
        return v


class ToralEndomorphismSpec(_Strict):
    kind: Literal["toral_endomorphism"] = "toral_endomorphism"
    matrix: List[List[int]]


class PolynomialSpec(_Strict):
    kind: Literal["custom_polynomial"] = "custom_polynomial"
    coefficients: List[float]
    domain: Union[Literal["torus"], List[float]] = "torus"

    @field_validator("domain")
    @classmethod
    def _check_domain(cls, v):
        if isinstance(v, list):
            if len(v) != 2 or not v[1] > v[0]:
                raise ValueError("interval domain must be [low, high] with high > low")
        return v


OneDimSpec = Union[DoublingSpec, PerturbedDoublingSpec, ToralEndomorphismSpec, PolynomialSpec]


class ProductSpec(_Strict):
    kind: Literal["product_map"] = "product_map"
    factors: List[OneDimSpec]

    @field_validator("factors")
    @classmethod
    def _check_two(cls, v):
        if len(v) != 2:
            raise ValueError("product_map needs exactly two factors")
        return v


MapSpec = Union[
    DoublingSpec, PerturbedDoublingSpec, ToralEndomorphismSpec, PolynomialSpec, ProductSpec
]


def build_system(spec) -> dynamics.MapSystem:
    """Instantiate a system from its validated spec model."""
    try:
        return dynamics.make_system(spec.model_dump())
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


class OrbitAnalysis(_Strict):
    kind: Literal["orbit"] = "orbit"
    start: List[float]
    direction: List[float]
    steps: int = Field(default=100, ge=1)


class SpectrumAnalysis(_Strict):
    kind: Literal["spectrum"] = "spectrum"
    start: List[float]
    steps: int = Field(default=1000, ge=1)


class ExtremalAnalysis(_Strict):
    kind: Literal["extremal"] = "extremal"
    base_resolution: int = Field(default=64, ge=1)
    direction_resolution: Optional[int] = Field(default=None, ge=2)
    samples_per_cell: int = Field(default=4, ge=1)
    refinements: int = Field(default=1, ge=1, le=6)
    max_period: Optional[int] = Field(default=None, ge=1, le=16)
    dump_graph: bool = False


class CertifyAnalysis(_Strict):
    kind: Literal["certify"] = "certify"
    lam: float = Field(alias="lambda", gt=0)
    big_n: int = Field(default=1, ge=1)
    n_max: Optional[int] = Field(default=None, ge=1)
    base_samples: int = Field(default=128, ge=1)
    direction_samples: int = Field(default=16, ge=1)
    retain_margins: bool = False


class FibredAnalysis(_Strict):
    kind: Literal["fibred_certify"] = "fibred_certify"
    lam: float = Field(alias="lambda", gt=0)
    big_n: int = Field(default=1, ge=1)
    n_max: Optional[int] = Field(default=None, ge=1)
    base_samples: int = Field(default=128, ge=1)
    direction_samples: int = Field(default=16, ge=1)
    retain_margins: bool = False
    subbundle: Union[str, List[List[float]]] = "unstable"
    restricted_resolution: int = Field(default=32, ge=1)
    check_samples: int = Field(default=64, ge=1)
    tol_angle: float = Field(default=1e-8, gt=0)

    @field_validator("subbundle")
    @classmethod
    def _check_subbundle(cls, v):
        if isinstance(v, str) and v not in ("unstable", "stable", "axis0", "axis1"):
            raise ValueError(
                "subbundle must be unstable, stable, axis0, axis1, or a pair of basis vectors"
            )
        if isinstance(v, list) and len(v) != 2:
            raise ValueError("explicit subbundle needs [basis1, basis2]")
        return v


AnalysisSpec = Union[
    OrbitAnalysis, SpectrumAnalysis, ExtremalAnalysis, CertifyAnalysis, FibredAnalysis
]


class ExperimentConfig(_Strict):
    """A full experiment: map, analysis, seed, optional output directory."""

    map: MapSpec = Field(discriminator="kind")
    analysis: AnalysisSpec = Field(discriminator="kind")
    seed: int = Field(default=0, ge=0)
    out: Optional[str] = None

    def canonical_dict(self) -> dict:
        return self.model_dump(by_alias=True)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw config dict, raising ConfigError on any problem."""
    try:
        return ExperimentConfig.model_validate(data)
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
