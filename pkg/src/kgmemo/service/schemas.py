"""Request/response models for the HTTP service."""

from pydantic import BaseModel, Field


class DocumentIn(BaseModel):
    doc_id: str
    title: str = ""
    text: str


class IngestRequest(BaseModel):
    documents: list[DocumentIn] = Field(min_length=1)
    chunk_tokens: int | None = None
    synonym_threshold: float | None = None
    skeleton: bool | None = None


class BuildReportOut(BaseModel):
    chunk_count: int
    entities_pre_merge: int
    entities_post_merge: int
    edge_counts: dict[str, int]
    build_tokens: int
    source_tokens: int
    token_ratio: float
    dropped_triples: int
    wall_time_s: float
    completed: bool
    error: str = ""
    graph_version: int


class TokenUsage(BaseModel):
    prompt: int
    completion: int
    total: int


class QueryRequest(BaseModel):
    q: str = Field(min_length=1)
    max_hops: int | None = None
    seeds: int | None = None
    lam: float | None = Field(default=None, alias="lambda")
    alpha: float | None = None
    memorize: bool = True

    model_config = {"populate_by_name": True}


class QueryResponse(BaseModel):
    answer: str
    trace_id: str
    tokens: TokenUsage
    replay_fraction: float
    hops: int
    select_calls: int
    replay_edges: int
    memorized: bool
    no_context: bool
    replay_sufficient: bool | None


class EdgeDiagnostic(BaseModel):
    id: int
    a: str
    b: str
    kind: str
    label: str
    norm: float
    update_count: int
    projection: float | None = None
    memory: list[float] | None = None  # raw vector, behind the raw flag


class GraphNodeOut(BaseModel):
    id: str
    kind: str
    label: str


class GraphOut(BaseModel):
    version: int
    stats: dict[str, int]
    nodes: list[GraphNodeOut]
    edges: list[EdgeDiagnostic]


class StatsOut(BaseModel):
    graph: dict[str, int] | None
    graph_version: int | None
    usage: dict[str, int]
    queries: int


class ResetOut(BaseModel):
    cleared: bool


class HealthOut(BaseModel):
    status: str
    graph_loaded: bool
