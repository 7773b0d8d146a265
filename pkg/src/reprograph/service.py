"""HTTP front end for review sessions.

The app wraps a :class:`~reprograph.session.SessionService` and speaks the
canonical text formats: study graphs go over the wire as their ``.study``
document bodies, the summary report as the tab-separated error table.

Routes:

- ``POST /sessions`` — body is a canonical study document; opens a session.
- ``GET /sessions/{id}`` — full session view (graphs, corrections, ratings).
- ``POST /sessions/{id}/events`` — body ``{"kind", "payload"}``; appends one
  event and returns the acknowledgment with live metrics.
- ``POST /sessions/{id}/finalize`` — closes the session, writes the dataset
  files, returns the corrected graph, corrections, and ratings.
- ``GET /studies`` — dataset store listing.
- ``GET /reports/summary`` — error report over finalized studies, as TSV.

Failures map to stable error codes: ``parse_failure`` 400,
``unknown_session`` 404, ``session_finalized`` and ``incomplete_review``
409, ``invalid_event``, ``invalid_graph`` and ``validation_rejected`` 422.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .canonical import ParseFailure, graph_doc, parse_graph
from .metrics import (
    EmptyPopulationError,
    LikertRating,
    aggregate_reports,
    compare_graphs,
    correction_set_doc,
    populations_for,
)
from .session import (
    IncompleteReviewError,
    InvalidEventError,
    InvalidGraphError,
    ReviewSession,
    SessionError,
    SessionFinalizedError,
    SessionService,
    UnknownSessionError,
    ValidationRejectedError,
    default_required_ratings,
)

DATA_DIR_ENV = "REPRO_DATA_DIR"
DEFAULT_DATA_DIR = "review-data"

_ERROR_CODES: tuple[tuple[type, str, int], ...] = (
    (UnknownSessionError, "unknown_session", 404),
    (SessionFinalizedError, "session_finalized", 409),
    (IncompleteReviewError, "incomplete_review", 409),
    (ValidationRejectedError, "validation_rejected", 422),
    (InvalidEventError, "invalid_event", 422),
    (InvalidGraphError, "invalid_graph", 422),
)


def resolve_data_dir(explicit: Optional[str] = None) -> Path:
    """The dataset directory: explicit argument, else the environment, else
    a directory under the working directory."""
    return Path(explicit or os.environ.get(DATA_DIR_ENV) or DEFAULT_DATA_DIR)


def _rating_doc(rating: LikertRating) -> dict:
    return {
        "element_id": rating.element_id,
        "category": rating.category,
        "scale": rating.scale,
        "value": rating.value,
    }


def _session_summary(session: ReviewSession) -> dict:
    return {
        "session_id": session.session_id,
        "study_id": session.study_id,
        "state": session.state.value,
        "event_count": len(session.events),
    }


def _session_view(session: ReviewSession) -> dict:
    view = _session_summary(session)
    view.update({
        "extracted": graph_doc(session.extracted),
        "working_copy": graph_doc(session.working_copy),
        "corrections": correction_set_doc(session.corrections),
        "ratings": [_rating_doc(r) for r in session.ratings],
        "required_ratings": list(
            default_required_ratings(session.working_copy)),
    })
    return view


def create_app(data_dir: Optional[str | Path] = None,
               required_ratings: Optional[Sequence[str]] = None,
               static_dir: Optional[str | Path] = None) -> FastAPI:
    """Build the review service app over the given dataset directory.

    ``static_dir``, when it exists, is served at ``/ui`` so the browser
    review interface can ride along with the API.
    """
    service = SessionService(resolve_data_dir(
        str(data_dir) if data_dir is not None else None), required_ratings)
    app = FastAPI(title="study review service")
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        for cls, code, status in _ERROR_CODES:
            if isinstance(exc, cls):
                return JSONResponse({"error": str(exc), "code": code},
                                    status_code=status)
        return JSONResponse({"error": str(exc), "code": "session_error"},
                            status_code=500)

    @app.exception_handler(ParseFailure)
    async def _parse_failure(request: Request, exc: ParseFailure):
        body = {"error": str(exc), "code": "parse_failure"}
        if exc.offset is not None:
            body["offset"] = exc.offset
        if exc.location is not None:
            body["location"] = exc.location
        return JSONResponse(body, status_code=400)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        text = (await request.body()).decode("utf-8")
        session = service.create_session(parse_graph(text))
        return _session_summary(session)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return _session_view(service.get_session(session_id))

    @app.post("/sessions/{session_id}/events")
    async def post_event(session_id: str, request: Request):
        try:
            body = json.loads((await request.body()).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidEventError(f"event body is not JSON: {exc}")
        if not isinstance(body, dict) or "kind" not in body:
            raise InvalidEventError("event body needs a 'kind'")
        return service.apply_event(session_id, body["kind"],
                                   body.get("payload") or {})

    @app.post("/sessions/{session_id}/finalize")
    async def finalize(session_id: str):
        outcome = service.finalize_session(session_id)
        return {
            "study_id": outcome.corrected.study_id,
            "directory": outcome.study_dir.name,
            "corrected": graph_doc(outcome.corrected),
            "corrections": correction_set_doc(outcome.corrections),
            "ratings": [_rating_doc(r) for r in outcome.ratings],
        }

    @app.get("/studies")
    async def studies():
        return {"studies": service.list_studies()}

    @app.get("/reports/summary", response_class=PlainTextResponse)
    async def summary_report():
        pairs = service.finalized_pairs()
        if not pairs:
            return JSONResponse(
                {"error": "no finalized studies", "code": "no_data"},
                status_code=404)
        try:
            populations = populations_for([c for _, c in pairs])
        except EmptyPopulationError as exc:
            return JSONResponse(
                {"error": str(exc), "code": "empty_population"},
                status_code=409)
        corrections = [compare_graphs(e, c) for e, c in pairs]
        report = aggregate_reports(corrections, populations)
        return PlainTextResponse(report.to_table(),
                                 media_type="text/tab-separated-values")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app
