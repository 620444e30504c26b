"""kgmemo: knowledge-graph retrieval that memorizes traversal experience in
edge embeddings and replays it for cheap answers to repeat, similar and
related queries."""

from .builder import BuildReport, Document, build, chunk_text, load_corpus
from .config import EmbeddingConfig, EngineConfig, LlmConfig, load_config
from .embedding import Embedder, MockEmbedder, StaticEmbedder, build_embedder, cosine, truncate
from .graph import (
    AnchorNode,
    Chunk,
    Edge,
    EdgeKind,
    EdgeMemory,
    EntityNode,
    GraphStore,
    load_snapshot,
    save_snapshot,
)
from .llm import LlmExchange, LlmGateway, ParsedSelection, ScriptedLlm, UsageLedger
from .memory import (
    MarkedElements,
    ReplayParams,
    capacity_bound,
    capacity_check,
    classify_paths,
    delta,
    enhance,
    memorize,
    penalize,
    replay_expand,
)
from .mockstack import AnswerKey, OfflineStack
from .prompts import PromptKind
from .subgraph import Subgraph
from .traversal import (
    QARecord,
    QueryPlan,
    TraversalParams,
    TraversalTrace,
    answer,
    plan_query,
    run_query,
    select_seeds,
    traverse,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorNode", "AnswerKey", "BuildReport", "Chunk", "Document", "Edge",
    "EdgeKind", "EdgeMemory", "Embedder", "EmbeddingConfig", "EngineConfig",
    "EntityNode", "GraphStore", "LlmConfig", "LlmExchange", "LlmGateway",
    "MarkedElements", "MockEmbedder", "OfflineStack", "ParsedSelection",
    "PromptKind", "QARecord", "QueryPlan", "ReplayParams", "ScriptedLlm",
    "StaticEmbedder", "Subgraph", "TraversalParams", "TraversalTrace",
    "UsageLedger", "answer", "build", "build_embedder", "capacity_bound",
    "capacity_check", "chunk_text", "classify_paths", "cosine", "delta",
    "enhance", "load_config", "load_corpus", "load_snapshot", "memorize",
    "penalize", "plan_query", "replay_expand", "run_query", "save_snapshot",
    "select_seeds", "traverse", "truncate",
]
