"""HTTP API over sessions.

Thin layer: every mutation is delegated to the Session object under a
per-session lock and persisted to the store before the response goes
out, so a process restart never loses an acknowledged choice. Bodies
and responses are plain JSON documents; parameter values travel as
decimal strings.
"""

from __future__ import annotations

import json
import threading

from fastapi import Body, FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import engine as eng
from .session import (
    InvalidConfig,
    PhaseError,
    Session,
    SessionConfig,
    SessionStore,
    StalePair,
    UnknownSession,
)
from .sim import (
    NO_FAILURES,
    FailureConfig,
    HumanModel,
    SimConfig,
    execute_handover,
    sample_trajectory,
)
from .values import HandoverParams, InvalidRange, NotRepresentable, ParameterSpec

__all__ = ["create_app", "config_from_partial_doc"]


def config_from_partial_doc(doc) -> SessionConfig:
    """Build a config from a document that may omit any section."""
    doc = doc or {}
    kwargs = {}
    if "specs" in doc:
        kwargs["specs"] = [ParameterSpec.from_doc(d) for d in doc["specs"]]
    if "human" in doc:
        kwargs["human"] = HumanModel.from_doc(doc["human"])
    if "failure" in doc:
        kwargs["failure"] = FailureConfig.from_doc(doc["failure"])
    if "sim" in doc:
        kwargs["sim"] = SimConfig.from_doc(doc["sim"])
    if "criteria" in doc:
        kwargs["criteria"] = eng.StopCriteria(**doc["criteria"])
    if "seed" in doc:
        kwargs["seed"] = int(doc["seed"])
    if "n_practice" in doc:
        kwargs["n_practice"] = int(doc["n_practice"])
    if "eval_schedule" in doc:
        kwargs["eval_schedule"] = tuple(doc["eval_schedule"])
    return SessionConfig(**kwargs)


def create_app(data_dir="sessions", store: SessionStore = None) -> FastAPI:
    app = FastAPI(title="oatuner", docs_url=None, redoc_url=None)
    # the browser page may be served by any static file server
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store if store is not None else SessionStore(data_dir)
    app.state.sessions = {}
    app.state.locks = {}
    app.state.registry_lock = threading.Lock()

    def _lock_for(session_id):
        with app.state.registry_lock:
            lock = app.state.locks.get(session_id)
            if lock is None:
                lock = threading.Lock()
                app.state.locks[session_id] = lock
            return lock

    def _get_session(session_id) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            session = app.state.store.load(session_id)  # raises UnknownSession
            app.state.sessions[session_id] = session
        return session

    def _persist(session):
        app.state.store.save(session)

    # error mapping: domain exception -> status + stable error code
    def _handler(status, code):
        def handle(_request, exc):
            return JSONResponse(
                status_code=status,
                content={"error": code, "detail": str(exc)},
            )

        return handle

    app.add_exception_handler(UnknownSession, _handler(404, "unknown_session"))
    app.add_exception_handler(StalePair, _handler(409, "stale_pair"))
    app.add_exception_handler(PhaseError, _handler(409, "phase_error"))
    app.add_exception_handler(eng.AlreadyConverged, _handler(409, "already_converged"))
    app.add_exception_handler(eng.InvalidChoice, _handler(400, "invalid_choice"))
    app.add_exception_handler(InvalidConfig, _handler(422, "invalid_config"))
    app.add_exception_handler(NotRepresentable, _handler(422, "not_representable"))
    app.add_exception_handler(InvalidRange, _handler(422, "invalid_range"))

    @app.post("/api/sessions")
    def create(body: dict = Body(default=None)):
        body = body or {}
        try:
            config = config_from_partial_doc(body.get("config") or body)
        except (TypeError, KeyError, ValueError) as exc:
            if isinstance(exc, (InvalidConfig, NotRepresentable, InvalidRange)):
                raise
            raise InvalidConfig(str(exc))
        session = Session(config)
        with _lock_for(session.session_id):
            app.state.sessions[session.session_id] = session
            _persist(session)
        return {"session_id": session.session_id}

    @app.get("/api/sessions")
    def list_sessions():
        with app.state.registry_lock:
            in_memory = set(app.state.sessions)
        return {"sessions": sorted(in_memory | set(app.state.store.list_ids()))}

    @app.get("/api/sessions/{session_id}")
    def state(session_id: str):
        with _lock_for(session_id):
            return _get_session(session_id).state_doc()

    @app.get("/api/sessions/{session_id}/action")
    def action(session_id: str):
        with _lock_for(session_id):
            return _get_session(session_id).next_action()

    @app.post("/api/sessions/{session_id}/choice")
    def choice(session_id: str, body: dict = Body(...)):
        with _lock_for(session_id):
            session = _get_session(session_id)
            result = session.post_choice(body.get("pair_id"), body.get("side"))
            _persist(session)
            return {"state": session.state_doc(), "next_action": result}

    @app.post("/api/sessions/{session_id}/failure")
    def failure(session_id: str, body: dict = Body(...)):
        with _lock_for(session_id):
            session = _get_session(session_id)
            result = session.post_failure(body.get("pair_id"))
            _persist(session)
            return {"state": session.state_doc(), "next_action": result}

    @app.post("/api/sessions/{session_id}/practice-done")
    def practice_done(session_id: str, body: dict = Body(default=None)):
        # body may carry an operator-observed outcome; the simulator is
        # the only executor shipped, so its record stays authoritative
        with _lock_for(session_id):
            session = _get_session(session_id)
            result = session.post_practice_done()
            _persist(session)
            return {"state": session.state_doc(), "next_action": result}

    @app.post("/api/sessions/{session_id}/eval-guess")
    def eval_guess(session_id: str, body: dict = Body(...)):
        with _lock_for(session_id):
            session = _get_session(session_id)
            result = session.post_eval_guess(body.get("trial_id"), body.get("side"))
            _persist(session)
            return {"state": session.state_doc(), "next_action": result}

    @app.get("/api/sessions/{session_id}/report")
    def report(session_id: str):
        with _lock_for(session_id):
            return _get_session(session_id).report()

    @app.get("/api/sessions/{session_id}/config")
    def config(session_id: str):
        # parameter ranges and units, so a display can draw gauges
        # without baking in the default table
        with _lock_for(session_id):
            return _get_session(session_id).config.as_doc()

    @app.get("/api/preview")
    def preview(params: str = Query(...), seed: int = Query(default=0)):
        try:
            doc = json.loads(params)
        except json.JSONDecodeError as exc:
            raise eng.InvalidChoice(f"params must be a JSON document: {exc}")
        hp = HandoverParams.from_doc(doc)
        hp.validate()
        record = execute_handover(hp, failure=NO_FAILURES, seed=seed)
        return {
            "record": record.as_doc(),
            "trajectory": sample_trajectory(hp),
        }

    return app
