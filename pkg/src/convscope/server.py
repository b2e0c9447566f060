"""HTTP service wrapping the layout engine.

State on disk is one file per ingested snapshot plus an append-only JSONL
log per session; everything else is rebuilt on demand, so a restart only
loses in-memory caches. Sessions serialize their commands behind a lock and
guard against concurrent editors with a client-supplied expected version.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import ConvscopeError
from .layout import (
    EDGE_FACETS,
    FACETS,
    FacetState,
    LayoutParams,
    SessionState,
    apply_interaction,
    assemble,
    debug_series,
    serialize_document,
)
from .snapshot import NetworkSnapshot, parse_snapshot, serialize_snapshot

DATA_ENV = "CONVSCOPE_DATA"
DEFAULT_DATA_DIR = "convscope-data"


def canonical(payload) -> Response:
    return Response(
        content=json.dumps(payload, sort_keys=True, separators=(",", ":")),
        media_type="application/json",
    )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


class Session:
    def __init__(self, sid: str, snapshot_id: str, snapshot: NetworkSnapshot):
        self.id = sid
        self.snapshot_id = snapshot_id
        self.snapshot = snapshot
        self.version = 0
        self.effective: list[dict] = []
        self.state = SessionState.create(snapshot)
        self.lock = threading.Lock()

    def replay(self, events: list[dict]) -> None:
        for event in events:
            if event.get("event") == "command":
                self.effective.append(event["command"])
            elif event.get("event") == "undo":
                if self.effective:
                    self.effective.pop()
            self.version += 1
        self._rebuild()

    def _rebuild(self) -> None:
        self.state = SessionState.create(self.snapshot)
        for command in self.effective:
            apply_interaction(self.state, command)

    def apply(self, command: dict) -> dict:
        doc = apply_interaction(self.state, command)
        self.effective.append(command)
        self.version += 1
        return doc

    def undo(self) -> dict:
        self.effective.pop()
        self.version += 1
        self._rebuild()
        return self.state.document()


class Store:
    """Snapshot files and session logs under one data directory."""

    def __init__(self, data_dir: str | os.PathLike | None = None):
        root = Path(data_dir or os.environ.get(DATA_ENV, DEFAULT_DATA_DIR))
        self.snapshot_dir = root / "snapshots"
        self.session_dir = root / "sessions"
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        self.session_dir.mkdir(parents=True, exist_ok=True)
        self._snapshots: dict[str, NetworkSnapshot] = {}
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def ingest(self, raw: bytes) -> NetworkSnapshot:
        snapshot = parse_snapshot(raw)
        path = self.snapshot_dir / f"{snapshot.id}.json"
        path.write_text(serialize_snapshot(snapshot))
        with self._lock:
            self._snapshots[snapshot.id] = snapshot
        return snapshot

    def snapshot(self, snapshot_id: str) -> NetworkSnapshot | None:
        with self._lock:
            hit = self._snapshots.get(snapshot_id)
        if hit is not None:
            return hit
        path = self.snapshot_dir / f"{snapshot_id}.json"
        if not path.is_file():
            return None
        snapshot = parse_snapshot(path.read_text())
        with self._lock:
            self._snapshots[snapshot_id] = snapshot
        return snapshot

    def create_session(self, snapshot_id: str) -> Session | None:
        snapshot = self.snapshot(snapshot_id)
        if snapshot is None:
            return None
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, snapshot_id, snapshot)
        with (self.session_dir / f"{sid}.jsonl").open("w") as fh:
            fh.write(json.dumps({"event": "create", "snapshotId": snapshot_id}) + "\n")
        with self._lock:
            self._sessions[sid] = session
        return session

    def session(self, sid: str) -> Session | None:
        with self._lock:
            hit = self._sessions.get(sid)
        if hit is not None:
            return hit
        path = self.session_dir / f"{sid}.jsonl"
        if not path.is_file():
            return None
        events = [json.loads(line) for line in path.read_text().splitlines() if line]
        if not events or events[0].get("event") != "create":
            return None
        snapshot_id = events[0]["snapshotId"]
        snapshot = self.snapshot(snapshot_id)
        if snapshot is None:
            return None
        session = Session(sid, snapshot_id, snapshot)
        session.replay(events[1:])
        with self._lock:
            self._sessions[sid] = session
        return session

    def log(self, sid: str, event: dict) -> None:
        with (self.session_dir / f"{sid}.jsonl").open("a") as fh:
            fh.write(json.dumps(event) + "\n")


def _parse_classes(raw: str | None) -> tuple[int, ...] | None:
    if raw is None or raw == "" or raw == "all":
        return None
    return tuple(int(part) for part in raw.split(","))


def create_app(data_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(title="convscope", version="1")
    # the browser client is served from its own origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = Store(data_dir)
    app.state.store = store

    @app.exception_handler(ConvscopeError)
    async def _convscope_error(request: Request, exc: ConvscopeError):
        return _error(422, str(exc))

    @app.post("/v1/snapshots")
    async def ingest_snapshot(request: Request):
        raw = await request.body()
        snapshot = store.ingest(raw)
        return canonical({"id": snapshot.id})

    @app.get("/v1/snapshots/{snapshot_id}/layout")
    def get_layout(
        snapshot_id: str,
        facet: str = "features",
        classes: str | None = None,
        quantile: float = 1.0,
        tau: float | None = None,
        stop: float | None = None,
        edgeFacet: str = "weight",
        method: str = "meanshift",
        k: int | None = None,
        bandwidth: float | None = None,
        seed: int = 0,
    ):
        snapshot = store.snapshot(snapshot_id)
        if snapshot is None:
            return _error(404, f"unknown snapshot {snapshot_id!r}")
        if facet not in FACETS:
            return _error(422, f"unknown facet {facet!r}")
        if edgeFacet not in EDGE_FACETS:
            return _error(422, f"unknown edge facet {edgeFacet!r}")
        try:
            selection = _parse_classes(classes)
        except ValueError:
            return _error(422, f"malformed class list {classes!r}")
        params = LayoutParams(
            method=method, k=k, bandwidth=bandwidth, seed=seed,
            tau=tau, stop=stop, edge_facet=edgeFacet,
        )
        state = FacetState(facet=facet, classes=selection, quantile=quantile)
        try:
            doc = assemble(snapshot, params, state)
        except ValueError as exc:
            return _error(422, str(exc))
        return Response(content=serialize_document(doc), media_type="application/json")

    @app.post("/v1/sessions")
    def create_session(body: dict):
        snapshot_id = body.get("snapshotId")
        if not isinstance(snapshot_id, str):
            return _error(422, "body must carry snapshotId")
        session = store.create_session(snapshot_id)
        if session is None:
            return _error(404, f"unknown snapshot {snapshot_id!r}")
        return canonical(
            {"id": session.id, "version": session.version, "document": session.state.document()}
        )

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        # clients that lose a version race refetch the authoritative state here
        session = store.session(sid)
        if session is None:
            return _error(404, f"unknown session {sid!r}")
        with session.lock:
            return canonical(
                {"id": session.id, "version": session.version, "document": session.state.document()}
            )

    @app.post("/v1/sessions/{sid}/commands")
    def post_command(sid: str, body: dict):
        session = store.session(sid)
        if session is None:
            return _error(404, f"unknown session {sid!r}")
        command = body.get("command")
        expected = body.get("expectedVersion")
        if not isinstance(command, dict) or not isinstance(expected, int):
            return _error(422, "body must carry command and expectedVersion")
        with session.lock:
            if expected != session.version:
                return _error(
                    409, f"version conflict: expected {expected}, at {session.version}"
                )
            try:
                doc = session.apply(command)
            except ValueError as exc:
                return _error(422, str(exc))
            store.log(sid, {"event": "command", "command": command})
            return canonical({"version": session.version, "document": doc})

    @app.get("/v1/sessions/{sid}/undo")
    def undo(sid: str):
        session = store.session(sid)
        if session is None:
            return _error(404, f"unknown session {sid!r}")
        with session.lock:
            if not session.effective:
                return _error(409, "nothing to undo")
            doc = session.undo()
            store.log(sid, {"event": "undo"})
            return canonical({"version": session.version, "document": doc})

    @app.get("/v1/snapshots/{snapshot_id}/debug/{kind}")
    def get_debug(snapshot_id: str, kind: str):
        snapshot = store.snapshot(snapshot_id)
        if snapshot is None:
            return _error(404, f"unknown snapshot {snapshot_id!r}")
        try:
            series = debug_series(snapshot, kind)
        except ValueError as exc:
            return _error(422, str(exc))
        return canonical({"kind": kind, "series": series})

    @app.get("/v1/snapshots/{snapshot_id}/neurons/{neuron_id}/patches")
    def get_patches(snapshot_id: str, neuron_id: str):
        snapshot = store.snapshot(snapshot_id)
        if snapshot is None:
            return _error(404, f"unknown snapshot {snapshot_id!r}")
        if neuron_id not in snapshot.layer_of:
            return _error(404, f"unknown neuron {neuron_id!r}")
        refs = (snapshot.patches or {}).get(neuron_id, ())
        top = sorted(refs, key=lambda r: (-r.activation_score, r.image_id))[:5]
        return canonical(
            {
                "neuron": neuron_id,
                "patches": [
                    {
                        "imageId": r.image_id,
                        "activationScore": r.activation_score,
                        **({"pixels": r.pixels} if r.pixels is not None else {}),
                    }
                    for r in top
                ],
            }
        )

    return app
