"""Rating-collection HTTP service.

Hands display items to assessor sessions, appends ratings durably to the
assessment store before acknowledging them, and exposes operator endpoints
for progress and export. Hidden item roles are never serialized to
workers. State other than the store itself is in memory; on restart the
store is replayed so answered items stay answered.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .analytics import SKIP_SENTINEL, AssessmentRecord, load_store, store_line
from .hitplan import Hit, HitPlan

SESSION_ACTIVE = "active"
SESSION_COMPLETED = "completed"
SESSION_ABANDONED = "abandoned"


class SessionRequest(BaseModel):
    worker_id: str


class RatingRequest(BaseModel):
    item_id: str
    score: int | None = None
    skip: bool = False


@dataclass
class Session:
    session_id: str
    worker_id: str
    hit_id: str
    state: str = SESSION_ACTIVE
    last_active: float = field(default_factory=time.time)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


class CollectionState:
    """All mutable service state behind one lock (single-writer store)."""

    def __init__(self, plan: HitPlan, store_path: str, redundancy: int = 1,
                 session_timeout_minutes: float = 60.0):
        self.plan = plan
        self.store_path = store_path
        self.redundancy = redundancy
        self.timeout = session_timeout_minutes * 60.0
        self.lock = threading.Lock()
        self.sessions: dict[str, Session] = {}
        # (worker_id, item_id) -> score; includes skip sentinels
        self.answered: dict[tuple[str, str], float] = {}
        self.ratings_collected = 0
        self.skips = 0
        self._replay_store()
        # line-buffered append handle; fsync after each rating
        os.makedirs(os.path.dirname(os.path.abspath(store_path)), exist_ok=True)
        self._store = open(store_path, "a", encoding="utf-8")

    def _replay_store(self) -> None:
        if not os.path.exists(self.store_path):
            return
        records, _ = load_store(self.store_path)
        for record in records:
            self.answered[(record.worker_id, record.item_id)] = record.raw_score
            self.ratings_collected += 1
        # sentinel lines are not returned by load_store; re-scan for them
        with open(self.store_path, encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                if len(parts) == 4 and float(parts[2]) == SKIP_SENTINEL:
                    self.answered[(parts[0], parts[1])] = SKIP_SENTINEL
                    self.skips += 1

    # -- plan helpers ------------------------------------------------------

    def hit(self, hit_id: str) -> Hit:
        for hit in self.plan.hits:
            if hit.hit_id == hit_id:
                return hit
        raise KeyError(hit_id)

    def worker_completed(self, worker_id: str, hit: Hit) -> bool:
        return all((worker_id, item.item_id) in self.answered
                   for item in hit.items)

    def completed_passes(self, hit: Hit) -> int:
        workers = {w for (w, item_id) in self.answered
                   if self.plan.hit_of(item_id) == hit.hit_id}
        return sum(self.worker_completed(w, hit) for w in workers)

    def live_reservations(self, hit_id: str) -> int:
        return sum(1 for s in self.sessions.values()
                   if s.state == SESSION_ACTIVE and s.hit_id == hit_id)

    def sweep_expired(self) -> None:
        now = time.time()
        for session in self.sessions.values():
            if session.state == SESSION_ACTIVE and now - session.last_active > self.timeout:
                session.state = SESSION_ABANDONED  # partial ratings retained

    def assign_hit(self, worker_id: str) -> Hit | None:
        """Lowest-indexed HIT with remaining capacity, skipping HITs this
        worker already completed."""
        for hit in self.plan.hits:
            if self.worker_completed(worker_id, hit):
                continue
            used = self.completed_passes(hit) + self.live_reservations(hit.hit_id)
            if used < self.redundancy:
                return hit
        return None

    def next_unanswered(self, session: Session) -> tuple[int, object] | None:
        hit = self.hit(session.hit_id)
        for index, item in enumerate(hit.items):
            if (session.worker_id, item.item_id) not in self.answered:
                return index, item
        return None

    def append_rating(self, worker_id: str, item_id: str, score: float) -> None:
        record = AssessmentRecord(worker_id, item_id, score, time.time())
        self._store.write(store_line(record) + "\n")
        self._store.flush()
        os.fsync(self._store.fileno())
        self.answered[(worker_id, item_id)] = score
        if score == SKIP_SENTINEL:
            self.skips += 1
        else:
            self.ratings_collected += 1

    def item_payload(self, session: Session) -> dict:
        pending = self.next_unanswered(session)
        hit = self.hit(session.hit_id)
        if pending is None:
            session.state = SESSION_COMPLETED
            return {
                "done": True,
                "summary": {
                    "hit_id": hit.hit_id,
                    "count": len(hit.items),
                    "worker_id": session.worker_id,
                },
            }
        index, item = pending
        view = item.worker_view(index + 1, len(hit.items),
                                self.plan.video_urls.get(item.video_id, ""))
        return {"done": False, "item": view}

    def status(self) -> dict:
        per_worker: dict[str, int] = {}
        for (worker_id, _item), score in self.answered.items():
            if score != SKIP_SENTINEL:
                per_worker[worker_id] = per_worker.get(worker_id, 0) + 1
        hits_completed = sum(
            1 for hit in self.plan.hits if self.completed_passes(hit) > 0
        )
        return {
            "hits_total": len(self.plan.hits),
            "hits_completed": hits_completed,
            "ratings_collected": self.ratings_collected,
            "skips": self.skips,
            "active_sessions": sum(1 for s in self.sessions.values()
                                   if s.state == SESSION_ACTIVE),
            "per_worker": dict(sorted(per_worker.items())),
        }


def create_app(plan: HitPlan, store_path: str, redundancy: int = 1,
               session_timeout_minutes: float = 60.0,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="caption assessment service")
    state = CollectionState(plan, store_path, redundancy,
                            session_timeout_minutes)
    app.state.collection = state

    @app.post("/api/session")
    def start_session(body: SessionRequest):
        if not body.worker_id.strip():
            return _error(400, "bad-worker-id", "worker_id must be nonempty")
        with state.lock:
            state.sweep_expired()
            hit = state.assign_hit(body.worker_id)
            if hit is None:
                return _error(409, "collection-complete",
                              "no assessment batches remaining")
            session = Session(
                session_id=uuid.uuid4().hex,
                worker_id=body.worker_id,
                hit_id=hit.hit_id,
            )
            state.sessions[session.session_id] = session
            payload = state.item_payload(session)
            return {
                "session_id": session.session_id,
                "worker_id": session.worker_id,
                "hit_id": session.hit_id,
                "total": len(hit.items),
                **payload,
            }

    @app.get("/api/session/{session_id}/next")
    def next_item(session_id: str):
        with state.lock:
            state.sweep_expired()
            session = state.sessions.get(session_id)
            if session is None:
                return _error(404, "unknown-session", "no such session")
            if session.state == SESSION_ABANDONED:
                return _error(410, "session-expired", "session timed out")
            session.last_active = time.time()
            return state.item_payload(session)

    @app.post("/api/session/{session_id}/rating")
    def submit_rating(session_id: str, body: RatingRequest):
        with state.lock:
            state.sweep_expired()
            session = state.sessions.get(session_id)
            if session is None:
                return _error(404, "unknown-session", "no such session")
            if session.state == SESSION_ABANDONED:
                return _error(410, "session-expired", "session timed out")
            if session.state == SESSION_COMPLETED:
                return _error(409, "session-complete", "session already finished")

            hit = state.hit(session.hit_id)
            item = next((i for i in hit.items if i.item_id == body.item_id), None)
            if item is None:
                return _error(400, "invalid-item",
                              "item does not belong to this session's batch")

            if body.skip:
                score = float(SKIP_SENTINEL)
            else:
                if body.score is None or not 0 <= body.score <= 100:
                    return _error(400, "score-out-of-range",
                                  "score must be an integer in [0, 100]")
                score = float(body.score)

            key = (session.worker_id, body.item_id)
            if key in state.answered:
                if state.answered[key] == score:
                    # idempotent replay of an acknowledged rating
                    session.last_active = time.time()
                    return {"accepted": True, "replay": True,
                            **state.item_payload(session)}
                return _error(409, "duplicate-rating",
                              "item already rated with a different score")

            state.append_rating(session.worker_id, body.item_id, score)
            session.last_active = time.time()
            return {"accepted": True, "replay": False,
                    **state.item_payload(session)}

    @app.get("/api/admin/status")
    def admin_status():
        with state.lock:
            state.sweep_expired()
            return state.status()

    @app.get("/api/admin/export")
    def admin_export():
        with state.lock:
            state._store.flush()
        if not os.path.exists(store_path):
            return PlainTextResponse("")
        with open(store_path, encoding="utf-8") as fh:
            return PlainTextResponse(fh.read())

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app
