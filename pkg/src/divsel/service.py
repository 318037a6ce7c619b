"""JSON-over-HTTP facade for the selection pipeline.

The embedding store and default candidate set load once at boot and are
immutable afterwards; every request computes independently against them,
so concurrent identical requests return identical bodies. Responses carry
exactly the numbers the CLI report would for the same inputs.
"""

from __future__ import annotations

import argparse
import os
import uuid

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__, reports
from .errors import DivselError, UnknownTermError
from .pipeline import run_selection
from .scoring import CandidateItem, HistoricalProfile, load_candidates_csv
from .spectral import DEFAULT_INFO
from .termspace import EmbeddingStore, load_store
from .utility import (
    DEFAULT_BETA,
    DEFAULT_MIDPOINT,
    DEFAULT_STEEPNESS,
    UtilityParams,
)

ENV_EMBEDDINGS = "DIVSEL_EMBEDDINGS"
ENV_CANDIDATES = "DIVSEL_CANDIDATES"
ENV_LISTEN = "DIVSEL_LISTEN"


class ProfileEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    term: str
    weight: float | None = None


class CandidateSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    item_id: str
    terms: list[str]
    category: str | None = None


class ParamSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    info: float | None = None
    k: float | None = None
    x0: float | None = None
    beta: float | None = None
    alpha: float | None = None
    select_n: int | None = None


class SelectRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    profile: list[ProfileEntry]
    candidates: list[CandidateSpec] | None = None
    params: ParamSpec | None = None


def _validate_params(p: ParamSpec) -> tuple[UtilityParams, float, float, int | None]:
    """Range-check request parameters; violations are 422."""
    info = DEFAULT_INFO if p.info is None else p.info
    if not (0.0 < info <= 1.0):
        raise HTTPException(status_code=422, detail=f"info must lie in (0, 1], got {info}")
    alpha = 0.9 if p.alpha is None else p.alpha
    if not (0.0 < alpha <= 1.0):
        raise HTTPException(status_code=422, detail=f"alpha must lie in (0, 1], got {alpha}")
    k = DEFAULT_STEEPNESS if p.k is None else p.k
    x0 = DEFAULT_MIDPOINT if p.x0 is None else p.x0
    beta = DEFAULT_BETA if p.beta is None else p.beta
    if k <= 0:
        raise HTTPException(status_code=422, detail=f"k must be positive, got {k}")
    if beta < 0:
        raise HTTPException(status_code=422, detail=f"beta must be nonnegative, got {beta}")
    if p.select_n is not None and p.select_n < 1:
        raise HTTPException(status_code=422, detail=f"select_n must be >= 1, got {p.select_n}")
    return UtilityParams(k=k, x0=x0, beta=beta), info, alpha, p.select_n


def create_app(
    store: EmbeddingStore | None = None,
    candidates: list[CandidateItem] | None = None,
    version: str = __version__,
) -> FastAPI:
    app = FastAPI(title="divsel", version=version)
    app.state.store = store
    app.state.candidates = candidates
    app.state.version = version

    @app.exception_handler(RequestValidationError)
    async def _bad_body(request: Request, exc: RequestValidationError):
        # Malformed JSON, unknown fields, missing required fields: all 400.
        detail = [
            {"loc": [str(p) for p in err.get("loc", ())], "msg": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "malformed request", "detail": detail})

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        # Never leak internals; the id is the only correlation handle.
        return JSONResponse(
            status_code=500,
            content={"error": "internal error", "request_id": uuid.uuid4().hex},
        )

    @app.get("/v1/health")
    def health():
        store = app.state.store
        if store is None or app.state.candidates is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {
            "status": "ok",
            "dimension": store.dimension,
            "vocabulary_size": len(store),
            "candidate_count": len(app.state.candidates),
            "version": app.state.version,
        }

    @app.post("/v1/select")
    def select_endpoint(request: SelectRequest):
        store = app.state.store
        default_candidates = app.state.candidates
        if store is None or default_candidates is None:
            raise HTTPException(status_code=503, detail="store not loaded")
        if not request.profile:
            raise HTTPException(status_code=400, detail="profile must be non-empty")
        params, info, alpha, select_n = _validate_params(request.params or ParamSpec())

        try:
            if request.candidates is not None:
                items = [
                    CandidateItem(
                        item_id=c.item_id,
                        mapped_terms=tuple(c.terms),
                        category=c.category,
                    )
                    for c in request.candidates
                ]
            else:
                items = list(default_candidates)
            profile = HistoricalProfile.from_pairs(
                (entry.term, entry.weight) for entry in request.profile
            )
            if select_n is not None and select_n > len(items):
                raise HTTPException(
                    status_code=422,
                    detail=f"select_n {select_n} exceeds candidate count {len(items)}",
                )
            result = run_selection(
                store,
                items,
                profile,
                params=params,
                info=info,
                alpha=alpha,
                select_n=select_n,
            )
        except UnknownTermError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "unresolvable terms", "terms": exc.terms},
            )
        except HTTPException:
            raise
        except DivselError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return reports.selection_to_payload(result)

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="divsel-service", description="Serve the selection pipeline over HTTP."
    )
    parser.add_argument("--listen", default=os.environ.get(ENV_LISTEN, "127.0.0.1:8000"),
                        help="host:port to bind (default: 127.0.0.1:8000)")
    parser.add_argument("--embeddings", default=os.environ.get(ENV_EMBEDDINGS),
                        help=f"embedding file; or ${ENV_EMBEDDINGS}")
    parser.add_argument("--candidates", default=os.environ.get(ENV_CANDIDATES),
                        help=f"candidate CSV; or ${ENV_CANDIDATES}")
    args = parser.parse_args(argv)
    if not args.embeddings or not args.candidates:
        parser.error("--embeddings and --candidates are required (flags or environment)")
    store = load_store(args.embeddings)
    candidates = load_candidates_csv(args.candidates)
    host, _, port = args.listen.rpartition(":")
    app = create_app(store=store, candidates=candidates)

    import uvicorn

    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
