"""HTTP session API: stepwise phase execution and phase-tree branching.

Sessions are in-memory, expire after an idle timeout, and each runs at most
one phase at a time. Phase failure is a domain outcome (HTTP 200 with a
failed report); protocol misuse (unknown session/phase, busy session) maps to
4xx. Phases that outlive the patience window return 202 and are polled via
the session summary.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from io import StringIO

from .graph import CoverageStats, DeBruijnGraph
from .phases import AssemblySettings, Contig, build_registry, write_contig_file
from .pipeline import (
    DataObject,
    PhaseReport,
    PipelineSpec,
    UnknownPhase,
    parse_settings,
    run_phase,
    run_pipeline,
)
from .seq import BadK, check_k

DEFAULT_SESSION_TTL = 3600.0
DEFAULT_PATIENCE = 2.0
DEFAULT_SEQ_CAP = 1_000_000


class Session:
    def __init__(self, sid: str, data: DataObject, parent: Optional[str] = None):
        self.id = sid
        self.data = data
        self.parent = parent
        self.children: list[str] = []
        self.created_at = time.time()
        self.last_used = self.created_at
        self.running_phase: Optional[str] = None
        self.lock = threading.Lock()

    @property
    def state(self) -> str:
        return f"running({self.running_phase})" if self.running_phase else "idle"


def _value_summary(key: str, value: Any) -> dict:
    if isinstance(value, AssemblySettings):
        return {
            "kind": "settings",
            "input": value.input_path,
            "k": value.k,
            "cut": value.cut,
            "maxTipLen": value.effective_max_tip_len(),
        }
    if isinstance(value, DeBruijnGraph):
        return {"kind": "graph", "nodes": value.node_count, "edges": value.adjacency_count}
    if isinstance(value, CoverageStats):
        return {"kind": "coverage", "mean": value.mean}
    if isinstance(value, tuple) and value and isinstance(value[0], Contig):
        return {"kind": "contigs", "count": len(value)}
    if isinstance(value, (tuple, frozenset, set, list)):
        return {"kind": "collection", "count": len(value)}
    return {"kind": type(value).__name__, "value": str(value)[:200]}


def create_app(
    settings_path: Optional[str] = None,
    settings_xml: Optional[str] = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
    patience: float = DEFAULT_PATIENCE,
    seq_cap: int = DEFAULT_SEQ_CAP,
) -> FastAPI:
    """Build the service application.

    Pipelines come from ``settings_xml`` or the file at ``settings_path``;
    a missing file simply means no named pipelines are available.
    """
    if settings_xml is None and settings_path and os.path.exists(settings_path):
        with open(settings_path, "r", encoding="utf-8") as fh:
            settings_xml = fh.read()
    pipelines: list[PipelineSpec] = parse_settings(settings_xml) if settings_xml else []
    pipelines_by_name = {p.name: p for p in pipelines}
    registry = build_registry()

    app = FastAPI(title="miniasm session API", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=8)

    def _expire_locked(now: float) -> None:
        stale = [
            sid
            for sid, s in sessions.items()
            if s.running_phase is None and now - s.last_used > session_ttl
        ]
        for sid in stale:
            del sessions[sid]

    def _get_session(sid: str) -> Optional[Session]:
        with sessions_lock:
            _expire_locked(time.time())
            session = sessions.get(sid)
            if session:
                session.last_used = time.time()
            return session

    def _not_found(sid: str) -> JSONResponse:
        return JSONResponse({"error": "UnknownSession", "id": sid}, status_code=404)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        if not body.get("input"):
            return JSONResponse({"error": "MissingInput"}, status_code=400)
        k = body.get("k", 31)
        try:
            check_k(k)
        except BadK as exc:
            return JSONResponse({"error": "BadK", "detail": str(exc)}, status_code=400)
        cut = int(body.get("cut", 0))
        if cut < 0:
            return JSONResponse({"error": "BadParam", "detail": "cut must be >= 0"}, status_code=400)
        settings = AssemblySettings(
            input_path=body["input"],
            k=k,
            cut=cut,
            max_tip_len=body.get("maxTipLen"),
            pipeline_name=body.get("pipeline", "default"),
        )
        data = DataObject()
        data.put("settings", settings)
        sid = uuid.uuid4().hex
        with sessions_lock:
            sessions[sid] = Session(sid, data)
        return {"id": sid}

    @app.post("/sessions/{sid}/run")
    def run_session_phase(sid: str, body: dict):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        phase_name = body.get("phase", "")
        try:
            phase = registry.resolve(phase_name)
        except UnknownPhase:
            return JSONResponse({"error": "UnknownPhase", "phase": phase_name}, status_code=422)
        params = body.get("params") or {}
        if not session.lock.acquire(blocking=False):
            return JSONResponse(
                {"error": "PhaseRunning", "phase": session.running_phase}, status_code=409
            )
        session.running_phase = phase.name
        done = threading.Event()
        result: dict[str, PhaseReport] = {}

        def work():
            try:
                result["report"] = run_phase(phase, session.data, params)
            finally:
                session.running_phase = None
                session.last_used = time.time()
                session.lock.release()
                done.set()

        executor.submit(work)
        if done.wait(timeout=patience):
            return result["report"].to_dict()
        return JSONResponse({"state": session.state, "phase": phase.name}, status_code=202)

    @app.post("/sessions/{sid}/runPipeline")
    def run_session_pipeline(sid: str, body: dict):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        name = body.get("name", "")
        spec = pipelines_by_name.get(name)
        if spec is None:
            return JSONResponse({"error": "UnknownPipeline", "name": name}, status_code=422)
        if not session.lock.acquire(blocking=False):
            return JSONResponse(
                {"error": "PhaseRunning", "phase": session.running_phase}, status_code=409
            )
        try:
            session.running_phase = f"pipeline:{name}"
            reports = run_pipeline(spec, session.data, registry)
        finally:
            session.running_phase = None
            session.lock.release()
        return {"reports": [r.to_dict() for r in reports]}

    @app.post("/sessions/{sid}/branch", status_code=201)
    def branch_session(sid: str):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        snap = session.data.snapshot()
        child = DataObject.branch(snap)
        child_id = uuid.uuid4().hex
        with sessions_lock:
            sessions[child_id] = Session(child_id, child, parent=sid)
            session.children.append(child_id)
        return {"id": child_id, "parent": sid}

    @app.get("/sessions/{sid}")
    def inspect(sid: str):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        items = session.data.items()
        return {
            "id": session.id,
            "parent": session.parent,
            "children": list(session.children),
            "state": session.state,
            "createdAt": session.created_at,
            "keys": {k: _value_summary(k, v) for k, v in items.items()},
            "lineage": [r.to_dict() for r in session.data.lineage],
        }

    @app.get("/sessions/{sid}/contigs")
    def get_contigs(
        sid: str,
        sort: str = Query("id", pattern="^(id|size)$"),
        limit: int = Query(100, ge=0),
        offset: int = Query(0, ge=0),
        includeSeq: bool = False,
    ):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        if not session.data.has("contigs"):
            return JSONResponse({"error": "ContigsNotAvailable"}, status_code=409)
        contigs = list(session.data.get("contigs"))
        if sort == "size":
            contigs.sort(key=lambda c: (-c.size, c.id))
        else:
            contigs.sort(key=lambda c: c.id)
        page = contigs[offset : offset + limit]
        out = []
        for c in page:
            row: dict[str, Any] = {"id": c.id, "size": c.size, "avgCoverage": c.avg_coverage}
            if includeSeq:
                s = str(c.seq)
                if len(s) > seq_cap:
                    row["sequence"] = s[:seq_cap]
                    row["truncated"] = True
                else:
                    row["sequence"] = s
            out.append(row)
        return {"total": len(contigs), "offset": offset, "contigs": out}

    @app.get("/sessions/{sid}/contigs.fa")
    def get_contig_file(sid: str):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        if not session.data.has("contigs"):
            return JSONResponse({"error": "ContigsNotAvailable"}, status_code=409)
        buf = StringIO()
        write_contig_file(session.data.get("contigs"), buf)
        return PlainTextResponse(buf.getvalue())

    @app.get("/sessions/{sid}/repeats")
    def get_repeats(sid: str):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        if not session.data.has("repeats"):
            return JSONResponse({"error": "RepeatsNotAvailable"}, status_code=409)
        return {
            "repeats": [
                {
                    "contigId": h.contig_id,
                    "start": h.start,
                    "spanLength": h.span_length,
                    "motif": h.motif,
                    "displayPattern": h.display_pattern,
                }
                for h in session.data.get("repeats")
            ]
        }

    @app.get("/sessions/{sid}/coverage")
    def get_coverage(sid: str):
        session = _get_session(sid)
        if session is None:
            return _not_found(sid)
        if not session.data.has("coverage"):
            return JSONResponse({"error": "CoverageNotAvailable"}, status_code=409)
        return session.data.get("coverage").to_dict()

    @app.get("/pipelines")
    def list_pipelines():
        return [
            {"name": p.name, "phases": [ps.name for ps in p.phases]}
            for p in pipelines
        ]

    return app
