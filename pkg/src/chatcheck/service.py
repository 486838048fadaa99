"""HTTP service around the verification pipeline.

Chat sessions live in memory (optionally mirrored to a JSON file) and
every response payload is self-contained: the answer, anchored findings,
validated sources, score breakdown, and degradation flags ride along so a
UI never needs a second call to render a turn.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid
from typing import Optional, Sequence

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from chatcheck.pipeline import Pipeline
from chatcheck.providers import ChatMessage, ProviderError


class ChatBody(BaseModel):
    session_id: Optional[str] = None
    message: str = ""


class RegenerateBody(BaseModel):
    session_id: str


class SessionStore:
    """Sessions keyed by opaque id; turns are append-only dicts.

    With a persist path every mutation rewrites the JSON file atomically,
    so a restarted process serves pre-restart turns byte-identically.
    """

    def __init__(self, persist_path: Optional[str] = None):
        self.persist_path = persist_path
        self._sessions: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()
        if persist_path and os.path.exists(persist_path):
            with open(persist_path, "r", encoding="utf-8") as fp:
                self._sessions = json.load(fp)

    def create(self) -> dict:
        with self._guard:
            session_id = uuid.uuid4().hex
            session = {"id": session_id, "created_at": time.time(), "turns": []}
            self._sessions[session_id] = session
            self._save_locked()
            return session

    def get(self, session_id: str) -> Optional[dict]:
        with self._guard:
            return self._sessions.get(session_id)

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def append_turn(self, session_id: str, query: str, response: dict) -> int:
        with self._guard:
            turns = self._sessions[session_id]["turns"]
            turns.append({"query": query, "response": response, "archived": []})
            self._save_locked()
            return len(turns) - 1

    def replace_last(self, session_id: str, response: dict) -> None:
        with self._guard:
            turn = self._sessions[session_id]["turns"][-1]
            turn["archived"].append(turn["response"])
            turn["response"] = response
            self._save_locked()

    def _save_locked(self) -> None:
        if not self.persist_path:
            return
        directory = os.path.dirname(os.path.abspath(self.persist_path)) or "."
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            # Key order is preserved, not sorted, so a reload serves turns
            # byte-identically to the process that wrote them.
            json.dump(self._sessions, fp, indent=2, ensure_ascii=False)
        os.replace(tmp, self.persist_path)


def _error(status: int, category: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"category": category, "message": message}})


def _history(session: dict) -> Sequence[ChatMessage]:
    messages = []
    for turn in session["turns"]:
        messages.append(ChatMessage("user", turn["query"]))
        messages.append(ChatMessage("assistant", turn["response"]["answer"]))
    return tuple(messages)


def create_app(
    pipeline: Pipeline,
    store: Optional[SessionStore] = None,
    cors_origins: Sequence[str] = ("*",),
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="chatcheck", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = store if store is not None else SessionStore()
    app.state.store = sessions
    app.state.pipeline = pipeline

    @app.post("/api/chat")
    def chat(body: ChatBody):
        if not body.message or not body.message.strip():
            return _error(400, "request", "message must be non-empty")
        if body.session_id is None:
            session = sessions.create()
        else:
            session = sessions.get(body.session_id)
            if session is None:
                return _error(404, "session", f"unknown session {body.session_id}")
        session_id = session["id"]
        with sessions.lock(session_id):
            history = _history(sessions.get(session_id))
            try:
                response = pipeline.verify(history, body.message)
            except ProviderError as exc:
                return _error(502, "provider", str(exc))
            turn_index = sessions.append_turn(session_id, body.message, response.to_dict())
        return {"session_id": session_id, "turn_index": turn_index, "response": response.to_dict()}

    @app.post("/api/regenerate")
    def regenerate(body: RegenerateBody):
        session = sessions.get(body.session_id)
        if session is None:
            return _error(404, "session", f"unknown session {body.session_id}")
        with sessions.lock(body.session_id):
            session = sessions.get(body.session_id)
            if not session["turns"]:
                return _error(409, "session", "session has no turn to regenerate")
            last_query = session["turns"][-1]["query"]
            history = _history(session)[:-2]  # everything before the last exchange
            try:
                response = pipeline.verify(history, last_query)
            except ProviderError as exc:
                return _error(502, "provider", str(exc))
            sessions.replace_last(body.session_id, response.to_dict())
        return {
            "session_id": body.session_id,
            "turn_index": len(session["turns"]) - 1,
            "response": response.to_dict(),
        }

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, "session", f"unknown session {session_id}")
        return session

    @app.get("/api/health")
    def health():
        try:
            reachable = bool(pipeline.provider.ping(timeout=0.9))
        except Exception:
            reachable = False
        return {"status": "ok", "provider_reachable": reachable}

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
