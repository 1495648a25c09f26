"""FastAPI service wrapping the batch commands.

The service runs jobs on the host filesystem: requests name manifests and
output paths, responses summarize what was written (score responses carry
the full report). Domain errors map to HTTP 400 with the error kind.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import SegkitError
from . import handlers
from .schemas import (
    AlignRequest,
    AlignResponse,
    AugmentRequest,
    AugmentResponse,
    ScoreRequest,
    ScoreResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="segkit", version=__version__)

    @app.exception_handler(SegkitError)
    async def segkit_error_handler(request: Request, exc: SegkitError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "kind": exc.kind},
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/align", response_model=AlignResponse)
    def align(req: AlignRequest) -> AlignResponse:
        return handlers.do_align(req)

    @app.post("/v1/augment", response_model=AugmentResponse)
    def augment(req: AugmentRequest) -> AugmentResponse:
        return handlers.do_augment(req)

    @app.post("/v1/score", response_model=ScoreResponse, response_model_exclude_none=True)
    def score(req: ScoreRequest) -> ScoreResponse:
        return handlers.do_score(req)

    return app
