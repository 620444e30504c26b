"""HTTP service over one graph session: ingestion, querying (with an SSE
trace stream), graph and memory inspection, metering stats.

Single-tenant by design: one active graph per process. Mutations (ingest,
memorize commits) serialize through the store's writer lock; an ingest
builds into a fresh store and swaps it in atomically, so the old graph
stays queryable until the new one is ready.
"""

import json
import logging
import queue
import threading
import uuid
from dataclasses import replace

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse, StreamingResponse

import numpy as np

from ..builder import BuildAborted, Document, build
from ..config import EngineConfig
from ..embedding import Embedder, build_embedder
from ..errors import EmptySeedError, InvalidArgument, KgmemoError
from ..graph import GraphStore, save_snapshot, to_dot
from ..llm import ChatBackend, LlmGateway, UsageLedger, build_backend
from ..mockstack import OfflineStack
from ..traversal import TraversalParams, run_query
from .schemas import (
    BuildReportOut,
    EdgeDiagnostic,
    GraphNodeOut,
    GraphOut,
    HealthOut,
    IngestRequest,
    QueryRequest,
    QueryResponse,
    ResetOut,
    StatsOut,
    TokenUsage,
)

logger = logging.getLogger(__name__)


class ApiSession:
    """Holds the live graph, the provider stack and all trace records."""

    def __init__(self, config: EngineConfig, embedder: Embedder | None = None,
                 backend: ChatBackend | None = None, stack: OfflineStack | None = None):
        config.validate()
        self.config = config
        if stack is None and config.llm.provider == "scripted" and config.llm.answer_key_path:
            stack = OfflineStack.from_key_file(config.llm.answer_key_path,
                                               dim=config.embedding.dim)
        self.stack = stack
        self.embedder = embedder or (stack.embedder if stack else build_embedder(config.embedding))
        self.backend = backend or (stack.backend if stack else build_backend(config.llm))
        self.ledger = UsageLedger()
        self.gateway = LlmGateway(self.backend, self.ledger)
        self.store: GraphStore | None = None
        self.traces: dict[str, dict] = {}
        self.query_count = 0
        self._build_busy = threading.Lock()
        self._version = 0

    def params(self, overrides: QueryRequest | None = None) -> TraversalParams:
        params = TraversalParams.from_config(self.config)
        if overrides is not None:
            if overrides.max_hops is not None:
                params.max_hops = overrides.max_hops
            if overrides.seeds is not None:
                params.seed_count = overrides.seeds
            if overrides.lam is not None:
                params.lam = overrides.lam
            if overrides.alpha is not None:
                params.alpha = overrides.alpha
            params.memorize = overrides.memorize
        return params

    def ingest(self, request: IngestRequest) -> BuildReportOut:
        if not self._build_busy.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a build is already in flight")
        try:
            config = replace(self.config)
            if request.chunk_tokens is not None:
                config.chunk_tokens = request.chunk_tokens
            if request.synonym_threshold is not None:
                config.synonym_threshold = request.synonym_threshold
            if request.skeleton is not None:
                config.skeleton = request.skeleton
            config.validate()
            docs = [Document(doc_id=d.doc_id, title=d.title, text=d.text)
                    for d in request.documents]
            try:
                store, report = build(docs, config, self.embedder, self.gateway,
                                      version=self._version + 1)
            except BuildAborted as exc:
                raise HTTPException(status_code=502, detail={
                    "message": str(exc), "partial_report": exc.report.to_dict(),
                })
            self._version += 1
            self.store = store  # old graph stays live until this swap
            if self.stack is not None:
                self.stack.bind(store)
            if self.config.snapshot_dir:
                path = f"{self.config.snapshot_dir}/graph-v{self._version}.json"
                save_snapshot(store, path)
                logger.info("snapshot persisted to %s", path)
            return BuildReportOut(**report.to_dict(), graph_version=self._version)
        finally:
            self._build_busy.release()

    def require_store(self) -> GraphStore:
        if self.store is None:
            raise HTTPException(status_code=409, detail="no graph loaded; ingest a corpus first")
        return self.store

    def execute_query(self, request: QueryRequest, on_step=None) -> QueryResponse:
        store = self.require_store()
        qid = uuid.uuid4().hex[:12]
        try:
            record = run_query(store, self.embedder, self.gateway, request.q,
                               self.params(request), qid=qid, on_step=on_step)
        except EmptySeedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        self.query_count += 1
        trace_payload = {
            "trace": record.trace.to_dict(),
            "answer": record.answer,
            "question": record.question,
            "subgraph_edges": record.subgraph_edges,
            "edge_provenance": {str(k): v for k, v in record.edge_provenance.items()},
            "tokens": {"prompt": record.prompt_tokens, "completion": record.completion_tokens,
                       "total": record.total_tokens},
        }
        self.traces[qid] = trace_payload
        return QueryResponse(
            answer=record.answer,
            trace_id=qid,
            tokens=TokenUsage(prompt=record.prompt_tokens, completion=record.completion_tokens,
                              total=record.total_tokens),
            replay_fraction=record.replay_fraction,
            hops=record.trace.hops,
            select_calls=record.trace.select_calls,
            replay_edges=record.trace.replay_edges,
            memorized=record.memorized,
            no_context=record.no_context,
            replay_sufficient=record.trace.replay_sufficient,
        )

    def reset(self) -> None:
        self.store = None
        self.traces.clear()
        self.ledger = UsageLedger()
        self.gateway = LlmGateway(self.backend, self.ledger)
        self.query_count = 0


def _edge_diagnostics(store: GraphStore, probe_vec, raw: bool) -> list[EdgeDiagnostic]:
    out = []
    for edge in store.edges.values():
        projection = None
        if probe_vec is not None:
            projection = float(np.dot(probe_vec, edge.memory.v))
        out.append(EdgeDiagnostic(
            id=edge.id, a=edge.a, b=edge.b, kind=edge.kind.value, label=edge.label,
            norm=edge.memory.norm(), update_count=edge.memory.update_count,
            projection=projection,
            memory=edge.memory.v.tolist() if raw else None,
        ))
    return out


def create_app(config: EngineConfig | None = None, *, stack: OfflineStack | None = None,
               embedder: Embedder | None = None, backend: ChatBackend | None = None) -> FastAPI:
    config = config or EngineConfig()
    session = ApiSession(config, embedder=embedder, backend=backend, stack=stack)
    app = FastAPI(title="kgmemo", version="0.1.0")
    app.state.session = session

    def check_token(request: Request) -> None:
        expected = session.config.api_token
        if expected and request.headers.get("x-api-token") != expected:
            raise HTTPException(status_code=401, detail="missing or invalid api token")

    guarded = [Depends(check_token)]

    @app.get("/healthz", response_model=HealthOut)
    def healthz():
        return HealthOut(status="ok", graph_loaded=session.store is not None)

    @app.post("/corpus", response_model=BuildReportOut, dependencies=guarded)
    def ingest(request: IngestRequest):
        try:
            return session.ingest(request)
        except InvalidArgument as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/query", response_model=QueryResponse, dependencies=guarded)
    def query(request: QueryRequest):
        try:
            return session.execute_query(request)
        except KgmemoError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.get("/query/stream", dependencies=guarded)
    def query_stream(q: str = Query(min_length=1), max_hops: int | None = None,
                     seeds: int | None = None, memorize: bool = True):
        session.require_store()
        request = QueryRequest(q=q, max_hops=max_hops, seeds=seeds, memorize=memorize)
        events: queue.Queue = queue.Queue()

        def worker():
            try:
                response = session.execute_query(request, on_step=lambda e: events.put(e))
                events.put({"type": "result", **json.loads(response.model_dump_json())})
            except HTTPException as exc:
                events.put({"type": "error", "detail": exc.detail})
            except KgmemoError as exc:
                events.put({"type": "error", "detail": str(exc)})
            finally:
                events.put(None)

        threading.Thread(target=worker, daemon=True).start()

        def stream():
            while True:
                event = events.get()
                if event is None:
                    break
                kind = event.get("type", "step")
                yield f"event: {kind}\ndata: {json.dumps(event)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/trace/{trace_id}", dependencies=guarded)
    def get_trace(trace_id: str):
        payload = session.traces.get(trace_id)
        if payload is None:
            raise HTTPException(status_code=404, detail=f"unknown trace: {trace_id}")
        return payload

    @app.get("/graph", dependencies=guarded)
    def graph(format: str = "json"):
        store = session.require_store()
        if format == "dot":
            return PlainTextResponse(to_dot(store), media_type="text/vnd.graphviz")
        if format != "json":
            raise HTTPException(status_code=422, detail=f"unknown format: {format}")
        nodes = [GraphNodeOut(id=n.id, kind="entity", label=n.name)
                 for n in store.entities.values()]
        nodes += [GraphNodeOut(id=n.id, kind="anchor", label=n.title)
                  for n in store.anchors.values()]
        nodes += [GraphNodeOut(id=n.id, kind="chunk", label=f"chunk {n.ordinal}")
                  for n in store.chunks.values()]
        return GraphOut(version=store.version, stats=store.stats(), nodes=nodes,
                        edges=_edge_diagnostics(store, None, raw=False))

    @app.get("/graph/edges", response_model=list[EdgeDiagnostic], dependencies=guarded)
    def graph_edges(probe: str | None = None, raw: bool = False):
        store = session.require_store()
        probe_vec = session.embedder.embed(probe) if probe else None
        return _edge_diagnostics(store, probe_vec, raw)

    @app.post("/reset", response_model=ResetOut, dependencies=guarded)
    def reset():
        session.reset()
        return ResetOut(cleared=True)

    @app.get("/stats", response_model=StatsOut, dependencies=guarded)
    def stats():
        return StatsOut(
            graph=session.store.stats() if session.store else None,
            graph_version=session.store.version if session.store else None,
            usage=session.ledger.grand_totals(),
            queries=session.query_count,
        )

    return app
