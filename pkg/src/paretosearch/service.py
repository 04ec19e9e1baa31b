"""HTTP service running the click-to-query search game.

Players see a blank unit-square field, click to query, and get back the
score; the service maps unit coordinates onto the hidden problem's bounds
and never reveals the surface or the problem's identity during play (tasks
are numbered 1..10, resolved to problem ids only on export). Every accepted
event is appended to a JSONL log and fsynced before the response goes out,
so a restart replays the store to the exact acknowledged state.
"""

import json
import os
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    OutOfBounds,
    ParetoSearchError,
    SessionFinished,
    UnknownProblem,
    UnknownSession,
)
from .pipeline import Click, GameSessionRecord, session_to_dict
from .testbed import PROBLEM_IDS, get_problem, score

SHOTS_MAX = 20
TASK_COUNT = len(PROBLEM_IDS)
SCORE_TOL = 1e-9

ACTIVE = "active"
FINISHED = "finished"


@dataclass
class _UnitClick:
    u: float
    v: float
    y: float
    t: float


@dataclass
class LiveSession:
    """In-memory state of one running game."""

    session_id: str
    user_id: str
    task_index: int
    problem_id: str
    clicks: list[_UnitClick] = field(default_factory=list)
    closed: bool = False

    @property
    def shots_used(self) -> int:
        return len(self.clicks)

    @property
    def state(self) -> str:
        return FINISHED if self.closed or self.shots_used >= SHOTS_MAX else ACTIVE

    @property
    def best_score(self) -> float | None:
        return max((c.y for c in self.clicks), default=None)


def _to_domain(problem, u: float, v: float) -> tuple[float, float]:
    (lo1, hi1), (lo2, hi2) = problem.bounds
    return (lo1 + u * (hi1 - lo1), lo2 + v * (hi2 - lo2))


class GameStore:
    """Durable session store over an append-only event log.

    Events are flushed and fsynced before any response is acknowledged;
    operations on one session are serialized by a per-session lock.
    """

    def __init__(self, data_dir, shuffle_seed: int | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.events_path = self.data_dir / "events.jsonl"
        self._file_lock = threading.Lock()
        self._registry_lock = threading.Lock()
        self._sessions: dict[str, LiveSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._mapping: list[str] = []
        if self.events_path.exists():
            self._replay()
        self._fh = self.events_path.open("a", encoding="utf-8")
        if not self._mapping:
            order = list(PROBLEM_IDS)
            if shuffle_seed is not None:
                perm = np.random.default_rng(shuffle_seed).permutation(TASK_COUNT)
                order = [PROBLEM_IDS[i] for i in perm]
            self._mapping = order
            self._append({"event": "meta", "mapping": order, "t": time.time()})

    def close(self) -> None:
        with self._file_lock:
            if not self._fh.closed:
                self._fh.close()

    def _append(self, obj: dict) -> None:
        with self._file_lock:
            self._fh.write(json.dumps(obj) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def _replay(self) -> None:
        with self.events_path.open(encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    self._apply(json.loads(line))
                except (ValueError, KeyError) as exc:
                    raise ValueError(
                        f"corrupt event log {self.events_path} line {lineno}: {exc}"
                    ) from exc

    def _apply(self, obj: dict) -> None:
        kind = obj["event"]
        if kind == "meta":
            mapping = list(obj["mapping"])
            if sorted(mapping) != sorted(PROBLEM_IDS):
                raise ValueError("task mapping does not cover the problem set")
            self._mapping = mapping
        elif kind == "create":
            sid = obj["sid"]
            session = LiveSession(
                session_id=sid,
                user_id=obj["user_id"],
                task_index=int(obj["task_index"]),
                problem_id=self._mapping[int(obj["task_index"]) - 1],
            )
            self._sessions[sid] = session
            self._locks[sid] = threading.Lock()
        elif kind == "click":
            session = self._sessions[obj["sid"]]
            if session.state != ACTIVE:
                raise ValueError("click recorded on a finished session")
            u, v = float(obj["u"]), float(obj["v"])
            problem = get_problem(session.problem_id)
            expected = score(problem, _to_domain(problem, u, v))
            if abs(expected - float(obj["y"])) > SCORE_TOL:
                raise ValueError("stored score disagrees with recomputation")
            session.clicks.append(_UnitClick(u=u, v=v, y=float(obj["y"]), t=float(obj["t"])))
        elif kind == "close":
            self._sessions[obj["sid"]].closed = True
        else:
            raise ValueError(f"unknown event type {kind!r}")

    def _session_and_lock(self, sid: str) -> tuple[LiveSession, threading.Lock]:
        with self._registry_lock:
            if sid not in self._sessions:
                raise UnknownSession(f"no session {sid!r}")
            return self._sessions[sid], self._locks[sid]

    def create_session(self, user_id: str, task_index: int) -> dict:
        if not 1 <= task_index <= TASK_COUNT:
            raise UnknownProblem(
                f"task index must be in [1, {TASK_COUNT}], got {task_index}"
            )
        if not user_id:
            raise ValueError("user_id must be nonempty")
        sid = uuid.uuid4().hex
        session = LiveSession(
            session_id=sid,
            user_id=user_id,
            task_index=task_index,
            problem_id=self._mapping[task_index - 1],
        )
        self._append(
            {
                "event": "create",
                "sid": sid,
                "user_id": user_id,
                "task_index": task_index,
                "t": time.time(),
            }
        )
        with self._registry_lock:
            self._sessions[sid] = session
            self._locks[sid] = threading.Lock()
        return self.session_view(sid)

    def submit_click(self, sid: str, u: float, v: float) -> dict:
        session, lock = self._session_and_lock(sid)
        with lock:
            if session.state != ACTIVE:
                raise SessionFinished(f"session {sid!r} is finished")
            if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
                raise OutOfBounds(f"unit coordinates out of [0, 1]: ({u}, {v})")
            problem = get_problem(session.problem_id)
            y = score(problem, _to_domain(problem, u, v))
            t = time.time()
            self._append(
                {"event": "click", "sid": sid, "u": u, "v": v, "y": y, "t": t}
            )
            session.clicks.append(_UnitClick(u=u, v=v, y=y, t=t))
            return {
                "score": y,
                "shots_remaining": SHOTS_MAX - session.shots_used,
                "best_score": session.best_score,
                "state": session.state,
            }

    def close_session(self, sid: str) -> dict:
        session, lock = self._session_and_lock(sid)
        with lock:
            if session.state == ACTIVE:
                self._append({"event": "close", "sid": sid, "t": time.time()})
                session.closed = True
        return self.session_view(sid)

    def session_view(self, sid: str) -> dict:
        session, lock = self._session_and_lock(sid)
        with lock:
            return {
                "session_id": session.session_id,
                "user_id": session.user_id,
                "task_index": session.task_index,
                "shots_used": session.shots_used,
                "shots_max": SHOTS_MAX,
                "best_score": session.best_score,
                "state": session.state,
                "clicks": [
                    {"x": [c.u, c.v], "score": c.y, "t": c.t} for c in session.clicks
                ],
            }

    def export_sessions(self, only_finished: bool = True) -> list[GameSessionRecord]:
        with self._registry_lock:
            sessions = list(self._sessions.values())
        out = []
        for s in sessions:
            if only_finished and s.state != FINISHED:
                continue
            if not s.clicks:
                continue
            problem = get_problem(s.problem_id)
            clicks = tuple(
                Click(x=_to_domain(problem, c.u, c.v), y=c.y, t=c.t) for c in s.clicks
            )
            out.append(
                GameSessionRecord(
                    user_id=s.user_id,
                    problem_id=s.problem_id,
                    clicks=clicks,
                    complete=len(clicks) == SHOTS_MAX,
                )
            )
        return out


def create_app(data_dir, shuffle_seed: int | None = None, static_dir=None):
    """FastAPI app over a GameStore; UI bundle optionally hosted at /."""
    from fastapi import FastAPI
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse, PlainTextResponse
    from pydantic import BaseModel

    store = GameStore(data_dir, shuffle_seed=shuffle_seed)

    @asynccontextmanager
    async def lifespan(app):
        yield
        store.close()

    app = FastAPI(title="search game service", lifespan=lifespan)
    app.state.store = store

    status_by_error = {
        UnknownProblem: 404,
        UnknownSession: 404,
        SessionFinished: 409,
        OutOfBounds: 422,
    }

    @app.exception_handler(ParetoSearchError)
    async def on_domain_error(request, exc):
        return JSONResponse(
            status_code=status_by_error.get(type(exc), 400),
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        return JSONResponse(
            status_code=422,
            content={"code": "ValidationError", "message": str(exc)},
        )

    class CreateSessionBody(BaseModel):
        user_id: str
        task_index: int

    class ClickBody(BaseModel):
        x: tuple[float, float]

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        return store.create_session(body.user_id, body.task_index)

    @app.post("/api/sessions/{sid}/clicks")
    def submit_click(sid: str, body: ClickBody):
        return store.submit_click(sid, body.x[0], body.x[1])

    @app.post("/api/sessions/{sid}/close")
    def close_session(sid: str):
        return store.close_session(sid)

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        return store.session_view(sid)

    @app.get("/api/tasks")
    def get_tasks():
        return {
            "count": TASK_COUNT,
            "shots_max": SHOTS_MAX,
            "task_indices": list(range(1, TASK_COUNT + 1)),
        }

    @app.get("/api/export")
    def export_sessions():
        lines = [
            json.dumps(session_to_dict(s)) for s in store.export_sessions()
        ]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
