"""HTTP service exposing lexical-learning sessions.

Thin layer over the core engine: knowledge graphs are loaded once and
shared immutably, each session is guarded by its own lock, and every state
transition is appended to the session log before the response goes out.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import logstore, session as sess
from .design import select_bundle
from .inference import Feedback, NoiseConfig
from .logstore import SessionLogStore
from .session import SessionConfig, SessionTrace
from .taxonomy import KGError, KnowledgeGraph, kg_to_dict, load_kg

__all__ = ["create_app", "ServiceError"]


class ServiceError(Exception):
    def __init__(self, status_code: int, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message
        self.detail = detail


class CreateSessionRequest(BaseModel):
    kg: str
    query: str = Field(min_length=1)
    bundle_size: int = 2
    epsilon: float = 0.05
    threshold: float = 0.95
    max_steps: int = 20
    policy: str = "eig"
    seed: int = 0


class CreateSessionResponse(BaseModel):
    session_id: str
    status: str
    bundle: list[str] | None
    belief: dict[str, float]


class FeedbackRequest(BaseModel):
    clicked: str | None


class LexiconEntry(BaseModel):
    node: str
    confidence: float


class FeedbackResponse(BaseModel):
    status: str
    belief: dict[str, float]
    bundle: list[str] | None = None
    lexicon_entry: LexiconEntry | None = None


class EigRow(BaseModel):
    bundle: list[str]
    eig: float
    predictive: dict[str, float]


def _load_kgs(kg_dir: Path) -> dict[str, KnowledgeGraph]:
    kgs: dict[str, KnowledgeGraph] = {}
    for path in sorted(kg_dir.glob("*.json")):
        kg = load_kg(path.read_bytes())
        if kg.id in kgs:
            raise KGError(f"duplicate KG id {kg.id!r} in {path}")
        kgs[kg.id] = kg
    return kgs


def create_app(kg_dir: Path | str, log_dir: Path | str) -> FastAPI:
    kg_dir = Path(kg_dir)
    if not kg_dir.is_dir():
        raise FileNotFoundError(f"KG directory not found: {kg_dir}")
    kgs = _load_kgs(kg_dir)
    store = SessionLogStore(log_dir)

    recovered = logstore.recover(store.log_dir, kgs)
    sessions: dict[str, SessionTrace] = {}
    for sid, trace in recovered.traces.items():
        sessions[sid] = sess.ensure_pending(kgs[trace.kg_id], trace)
    quarantined = dict(recovered.quarantined)

    locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)
    registry_lock = threading.Lock()

    app = FastAPI(title="lexlearn", version="0.1.0")
    # the workbench is served from its own origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.sessions = sessions
    app.state.quarantined = quarantined
    app.state.kgs = kgs

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": "request body failed validation",
                "detail": exc.errors(),
            },
        )

    def get_kg(kg_id: str) -> KnowledgeGraph:
        if kg_id not in kgs:
            raise ServiceError(404, "unknown_kg", f"no KG with id {kg_id!r}")
        return kgs[kg_id]

    def get_trace(session_id: str) -> SessionTrace:
        if session_id in quarantined:
            raise ServiceError(
                409,
                "quarantined",
                f"session {session_id} has a corrupt log",
                quarantined[session_id],
            )
        if session_id not in sessions:
            raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
        return sessions[session_id]

    def _bundle_of(trace: SessionTrace) -> list[str] | None:
        pending = trace.pending_step
        return list(pending.bundle.products) if pending is not None else None

    @app.post("/api/v1/sessions", status_code=201, response_model=CreateSessionResponse)
    def create_session(req: CreateSessionRequest) -> CreateSessionResponse:
        kg = get_kg(req.kg)
        try:
            config = SessionConfig(
                bundle_size=req.bundle_size,
                noise=NoiseConfig(epsilon=req.epsilon),
                convergence_threshold=req.threshold,
                max_steps=req.max_steps,
                policy=req.policy,  # type: ignore[arg-type]
                seed=req.seed,
            )
            trace = sess.start_session(kg, req.query, config)
        except (sess.SessionError, ValueError) as exc:
            raise ServiceError(422, "invalid_session", str(exc)) from exc
        store.append(logstore.records_for_start(trace))
        with registry_lock:
            sessions[trace.session_id] = trace
        return CreateSessionResponse(
            session_id=trace.session_id,
            status=trace.status,
            bundle=_bundle_of(trace),
            belief=trace.belief.to_dict(),
        )

    @app.post("/api/v1/sessions/{session_id}/feedback", response_model=FeedbackResponse)
    def post_feedback(session_id: str, req: FeedbackRequest) -> FeedbackResponse:
        with locks[session_id]:
            trace = get_trace(session_id)
            kg = get_kg(trace.kg_id)
            y = Feedback(req.clicked)
            try:
                new_trace = sess.submit_feedback(kg, trace, y)
            except sess.SessionError as exc:
                raise ServiceError(422, "invalid_feedback", str(exc)) from exc
            store.append(logstore.records_for_feedback(new_trace, y))
            sessions[session_id] = new_trace
        entry = sess.lexicon_entry(new_trace)
        return FeedbackResponse(
            status=new_trace.status,
            belief=new_trace.belief.to_dict(),
            bundle=_bundle_of(new_trace),
            lexicon_entry=(
                LexiconEntry(node=entry[0], confidence=entry[1]) if entry else None
            ),
        )

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        return get_trace(session_id).to_dict()

    @app.get("/api/v1/sessions/{session_id}/eig", response_model=list[EigRow])
    def get_eig(session_id: str) -> list[EigRow]:
        trace = get_trace(session_id)
        kg = get_kg(trace.kg_id)
        _, reports = select_bundle(
            trace.belief, kg, trace.config.bundle_size, trace.config.noise
        )
        return [EigRow(**r.to_dict()) for r in reports]

    @app.get("/api/v1/kgs")
    def list_kgs() -> list[str]:
        return sorted(kgs)

    @app.get("/api/v1/kgs/{kg_id}")
    def get_kg_doc(kg_id: str) -> dict[str, Any]:
        return kg_to_dict(get_kg(kg_id))

    return app
