"""HTTP front end wrapping the analysis runner.

POST /run takes a full experiment config; the per-analysis endpoints
take flat requests.  Domain outcomes (counterexample found, critical
point hit) are ordinary 200 responses distinguished by the report's
``status`` field; only malformed configs produce 4xx.
"""

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import ExperimentConfig
from ..errors import ConfigError
from ..experiments import run
from .schemas import (
    CertifyRequest,
    ExtremalRequest,
    FibredRequest,
    Health,
    OrbitRequest,
    ReportEnvelope,
    SpectrumRequest,
    to_config,
)


def create_app() -> FastAPI:
    app = FastAPI(title="lyapcert", version=__version__)

    @app.get("/healthz", response_model=Health)
    def healthz():
        return Health(status="ok", version=__version__)

    def _run(config: ExperimentConfig):
        try:
            report = run(config)
        except ConfigError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return JSONResponse(status_code=200, content=report)

    @app.post("/run", response_model=ReportEnvelope)
    def run_experiment(config: ExperimentConfig):
        return _run(config)

    @app.post("/orbit", response_model=ReportEnvelope)
    def run_orbit(request: OrbitRequest):
        return _run(to_config(request))

    @app.post("/spectrum", response_model=ReportEnvelope)
    def run_spectrum(request: SpectrumRequest):
        return _run(to_config(request))

    @app.post("/extremal", response_model=ReportEnvelope)
    def run_extremal(request: ExtremalRequest):
        return _run(to_config(request))

    @app.post("/certify", response_model=ReportEnvelope)
    def run_certify(request: CertifyRequest):
        return _run(to_config(request))

    @app.post("/fibred", response_model=ReportEnvelope)
    def run_fibred(request: FibredRequest):
        return _run(to_config(request))

    return app


app = create_app()
