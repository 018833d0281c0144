"""HTTP service: ask questions, keep per-session chat history, record feedback.

Indexes are read-only after startup; the only mutable state is the session
map (guarded by a lock, TTL-evicted) and the append-only feedback log.
Feedback for the same message updates the stored verdict rather than
duplicating it.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import DeskQaError
from .fusion import MODES
from .pipeline import AnswerPipeline


@dataclass
class SessionMessage:
    message_id: str
    question: str
    answer: str
    sources: list[dict]
    feedback: str | None = None


@dataclass
class Session:
    session_id: str
    created_at: float
    last_active: float
    messages: list[SessionMessage] = field(default_factory=list)


class SessionStore:
    def __init__(self, history_depth: int = 4, ttl_seconds: float = 3600.0):
        self.history_depth = history_depth
        self.ttl_seconds = ttl_seconds
        self._sessions: dict[str, Session] = {}
        self._message_index: dict[str, tuple[str, int]] = {}
        self._lock = threading.Lock()

    def _evict(self, now: float) -> None:
        expired = [
            sid
            for sid, session in self._sessions.items()
            if now - session.last_active > self.ttl_seconds
        ]
        for sid in expired:
            for message in self._sessions[sid].messages:
                self._message_index.pop(message.message_id, None)
            del self._sessions[sid]

    def touch(self, session_id: str) -> Session:
        now = time.time()
        with self._lock:
            self._evict(now)
            session = self._sessions.get(session_id)
            if session is None:
                session = Session(session_id=session_id, created_at=now, last_active=now)
                self._sessions[session_id] = session
            session.last_active = now
            return session

    def history_pairs(self, session_id: str) -> list[tuple[str, str]]:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return []
            pairs = [(m.question, m.answer) for m in session.messages]
        return pairs[-self.history_depth :]

    def append(self, session_id: str, message: SessionMessage) -> None:
        session = self.touch(session_id)
        with self._lock:
            session.messages.append(message)
            # history is bounded by the configured depth; oldest pairs fall off
            while len(session.messages) > self.history_depth:
                evicted = session.messages.pop(0)
                self._message_index.pop(evicted.message_id, None)
            for idx, kept in enumerate(session.messages):
                self._message_index[kept.message_id] = (session_id, idx)

    def set_feedback(self, session_id: str, message_id: str, verdict: str) -> bool:
        with self._lock:
            location = self._message_index.get(message_id)
            if location is None or location[0] != session_id:
                return False
            sid, idx = location
            self._sessions[sid].messages[idx].feedback = verdict
            return True

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)


class JsonlLog:
    """Append-only JSON Lines file with a single serialized writer."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False, sort_keys=True)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8", newline="\n") as handle:
                handle.write(line + "\n")
                handle.flush()


class FeedbackLog(JsonlLog):
    def latest_by_message(self) -> dict[str, dict]:
        """Collapse the event log to the latest record per message_id."""
        out: dict[str, dict] = {}
        if not self.path.exists():
            return out
        with self._lock:
            text = self.path.read_text(encoding="utf-8")
        for line in text.splitlines():
            if line.strip():
                record = json.loads(line)
                out[record["message_id"]] = record
        return out


class AskRequest(BaseModel):
    question: str = Field(min_length=1)
    session_id: str | None = None
    mode: str | None = None
    adh: bool | None = None


class FeedbackRequest(BaseModel):
    session_id: str
    message_id: str
    verdict: Literal["up", "down"]
    comment: str | None = None


def create_app(
    pipeline: AnswerPipeline,
    feedback_path: str | Path = "var/feedback.jsonl",
    history_depth: int = 4,
    session_ttl_seconds: float = 3600.0,
    default_mode: str = "hybrid",
    ui_dir: str | Path | None = None,
    transcript_path: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="deskqa")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionStore(history_depth=history_depth, ttl_seconds=session_ttl_seconds)
    feedback = FeedbackLog(feedback_path)
    transcript = JsonlLog(transcript_path) if transcript_path else None
    app.state.sessions = sessions
    app.state.feedback = feedback
    app.state.pipeline = pipeline

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "chunks": pipeline.chunk_count}

    @app.post("/ask")
    def ask(request: AskRequest) -> dict:
        if not request.question.strip():
            raise HTTPException(status_code=400, detail="question must be non-empty")
        mode = request.mode or default_mode
        if mode not in MODES:
            raise HTTPException(status_code=400, detail=f"unknown mode {mode!r}")
        session_id = request.session_id or uuid.uuid4().hex
        history = sessions.history_pairs(session_id)
        try:
            result = pipeline.ask(
                request.question, history=history, mode=mode, adh=request.adh
            )
        except DeskQaError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

        message_id = uuid.uuid4().hex
        sources = [
            {
                "chunk_id": chunk.chunk_id,
                "doc_id": chunk.doc_id,
                "uri": pipeline.doc_uri(chunk.doc_id),
            }
            for chunk in result.sources
        ]
        sessions.append(
            session_id,
            SessionMessage(
                message_id=message_id,
                question=request.question,
                answer=result.answer,
                sources=sources,
            ),
        )
        if transcript is not None:
            transcript.append(
                {
                    "session_id": session_id,
                    "message_id": message_id,
                    "question": request.question,
                    "answer": result.answer,
                    "sources": sources,
                    "timestamp": time.time(),
                }
            )
        return {
            "message_id": message_id,
            "answer": result.answer,
            "sources": sources,
            "usage": result.usage,
        }

    @app.post("/feedback")
    def give_feedback(request: FeedbackRequest) -> dict:
        known = sessions.set_feedback(
            request.session_id, request.message_id, request.verdict
        )
        if not known:
            raise HTTPException(
                status_code=404,
                detail=f"unknown message_id {request.message_id!r} for this session",
            )
        feedback.append(
            {
                "session_id": request.session_id,
                "message_id": request.message_id,
                "verdict": request.verdict,
                "comment": request.comment,
                "timestamp": time.time(),
            }
        )
        return {"ok": True}

    @app.get("/sessions/{session_id}/history")
    def session_history(session_id: str) -> dict:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return {
            "session_id": session_id,
            "history": [
                {
                    "message_id": m.message_id,
                    "question": m.question,
                    "answer": m.answer,
                    "sources": m.sources,
                    "feedback": m.feedback,
                }
                for m in session.messages
            ],
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
