"""Request/response models for the HTTP service.

Analysis endpoints accept flat requests (map plus the analysis
parameters); they are assembled into a full ExperimentConfig before
dispatch so the validation rules stay in one place.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    CertifyAnalysis,
    ExperimentConfig,
    ExtremalAnalysis,
    FibredAnalysis,
    MapSpec,
    OrbitAnalysis,
    SpectrumAnalysis,
)


class _WithMap(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    map: MapSpec = Field(discriminator="kind")
    seed: int = Field(default=0, ge=0)


class OrbitRequest(_WithMap, OrbitAnalysis):
    pass


class SpectrumRequest(_WithMap, SpectrumAnalysis):
    pass


class ExtremalRequest(_WithMap, ExtremalAnalysis):
    pass


class CertifyRequest(_WithMap, CertifyAnalysis):
    pass


class FibredRequest(_WithMap, FibredAnalysis):
    pass


_ANALYSIS_BASE = {
    OrbitRequest: OrbitAnalysis,
    SpectrumRequest: SpectrumAnalysis,
    ExtremalRequest: ExtremalAnalysis,
    CertifyRequest: CertifyAnalysis,
    FibredRequest: FibredAnalysis,
}


def to_config(request) -> ExperimentConfig:
    analysis_cls = _ANALYSIS_BASE[type(request)]
    fields = {
        name: getattr(request, name)
        for name in analysis_cls.model_fields
    }
    return ExperimentConfig(
        map=request.map,
        analysis=analysis_cls.model_construct(**fields),
        seed=request.seed,
    )


class ReportEnvelope(BaseModel):
    """Shape of every analysis response."""

    model_config = ConfigDict(extra="allow")

    status: str
    config: dict
    results: dict
    provenance: dict
    error: Optional[dict] = None


class Health(BaseModel):
    status: str
    version: str
