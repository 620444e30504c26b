"""Corpus-to-graph pipeline: token-count chunking, entity/relation extraction,
chunk summarization for anchor titles, synonym-merging assembly.

Per chunk the build creates one chunk node, one anchor titled by an LLM
summary, and their structural edge; anchors of consecutive chunks in a
document are chained (the contextual skeleton, removable via the ablation
flag); each extracted entity links to the anchors of the chunks whose
extraction output named it; each extracted triple becomes a labeled
entity-entity edge. Entities merge incrementally at upsert time, so the
result is deterministic for a fixed document order.
"""

import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import EngineConfig
from .embedding import Embedder
from .errors import InvalidArgument, ParseError, ProviderError, TransportError
from .graph import Chunk, EdgeKind, GraphStore
from .llm import LlmGateway
from .prompts import PromptKind
from .tokenizer import count_tokens, token_spans

logger = logging.getLogger(__name__)

BUILD_SCOPE = "build"

_CONJUNCTION_RE = re.compile(r"\b(?:or|and)\b", re.IGNORECASE)


@dataclass
class Document:
    doc_id: str
    title: str
    text: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise InvalidArgument(f"document {self.doc_id!r} has an empty body")


@dataclass
class BuildReport:
    chunk_count: int = 0
    entities_pre_merge: int = 0
    entities_post_merge: int = 0
    edge_counts: dict[str, int] = field(default_factory=dict)
    build_prompt_tokens: int = 0
    build_completion_tokens: int = 0
    source_tokens: int = 0
    dropped_triples: int = 0
    wall_time_s: float = 0.0
    completed: bool = True
    error: str = ""

    @property
    def build_tokens(self) -> int:
        return self.build_prompt_tokens + self.build_completion_tokens

    @property
    def token_ratio(self) -> float:
        """Build-phase LLM tokens per source token."""
        return self.build_tokens / self.source_tokens if self.source_tokens else 0.0

    def to_dict(self) -> dict:
        return {
            "chunk_count": self.chunk_count,
            "entities_pre_merge": self.entities_pre_merge,
            "entities_post_merge": self.entities_post_merge,
            "edge_counts": self.edge_counts,
            "build_prompt_tokens": self.build_prompt_tokens,
            "build_completion_tokens": self.build_completion_tokens,
            "build_tokens": self.build_tokens,
            "source_tokens": self.source_tokens,
            "token_ratio": self.token_ratio,
            "dropped_triples": self.dropped_triples,
            "wall_time_s": self.wall_time_s,
            "completed": self.completed,
            "error": self.error,
        }


def chunk_text(doc: Document, chunk_tokens: int) -> list[Chunk]:
    """Split a document on token boundaries into runs of at most chunk_tokens.

    Chunk texts concatenate back to the exact body: each cut lands at the end
    of a token, and trailing characters ride with the final chunk.
    """
    if chunk_tokens < 1:
        raise InvalidArgument("chunk_tokens must be >= 1")
    spans = token_spans(doc.text)
    chunks: list[Chunk] = []
    start = 0
    for group_start in range(0, len(spans), chunk_tokens):
        group = spans[group_start:group_start + chunk_tokens]
        last = group[-1][1]
        end = len(doc.text) if group_start + chunk_tokens >= len(spans) else last
        piece = doc.text[start:end]
        chunks.append(Chunk(
            id="", text=piece, summary="", token_count=len(group),
            doc_id=doc.doc_id, ordinal=len(chunks),
        ))
        start = end
    if not chunks:  # body is pure whitespace; pre-rejected by Document, kept defensive
        chunks = [Chunk(id="", text=doc.text, summary="", token_count=0,
                        doc_id=doc.doc_id, ordinal=0)]
    return chunks


def extract_entities(gateway: LlmGateway, chunk: Chunk, scope: str = BUILD_SCOPE) -> list[str]:
    """Deduplicated, order-preserving entity list; names carrying standalone
    conjunctions are rejected per the extraction prompt's own rule."""
    exchange = gateway.complete(PromptKind.EXTRACT_ENTITIES, {"text": chunk.text}, scope=scope)
    seen: set[str] = set()
    out: list[str] = []
    for name in exchange.parsed:
        name = name.strip()
        if not name or name.lower() in seen:
            continue
        if _CONJUNCTION_RE.search(name):
            logger.warning("rejected conjunction entity: %r", name)
            continue
        seen.add(name.lower())
        out.append(name)
    return out


def extract_relations(gateway: LlmGateway, chunk: Chunk, entities: list[str],
                      scope: str = BUILD_SCOPE) -> tuple[list[tuple[str, str, str]], int]:
    """Triples among the given entities; ones naming unknown entities are
    dropped, returned alongside the drop count."""
    if not entities:
        raise InvalidArgument("extract_relations requires a nonempty entity list")
    exchange = gateway.complete(
        PromptKind.EXTRACT_RELATIONS,
        {"entity_list": json.dumps(entities, ensure_ascii=False), "text": chunk.text},
        scope=scope,
    )
    known = {e.lower() for e in entities}
    kept: list[tuple[str, str, str]] = []
    dropped = 0
    for subject, sentence, obj in exchange.parsed:
        if subject.lower() not in known or obj.lower() not in known or not sentence.strip():
            dropped += 1
            logger.warning("dropped triple with unknown endpoint: %r", (subject, sentence, obj))
            continue
        kept.append((subject, sentence, obj))
    return kept, dropped


def summarize_chunk(gateway: LlmGateway, chunk: Chunk, scope: str = BUILD_SCOPE) -> str:
    exchange = gateway.complete(PromptKind.SUMMARIZE_CHUNK, {"text": chunk.text}, scope=scope)
    return str(exchange.parsed).strip()


def build(docs: list[Document], config: EngineConfig, embedder: Embedder,
          gateway: LlmGateway, version: int = 1) -> tuple[GraphStore, BuildReport]:
    """Assemble the full graph for a corpus. Provider failures abort with a
    partial-progress report attached to the raised error."""
    if not docs:
        raise InvalidArgument("corpus is empty")
    started = time.monotonic()
    store = GraphStore(
        dim=embedder.dim,
        synonym_threshold=config.synonym_threshold,
        version=version,
        embedding_model=config.embedding.model,
    )
    report = BuildReport(source_tokens=sum(count_tokens(d.text) for d in docs))
    try:
        for doc in docs:
            _build_document(doc, store, config, embedder, gateway, report)
    except (ProviderError, TransportError, ParseError) as exc:
        report.completed = False
        report.error = str(exc)
        report.edge_counts = store.edge_counts()
        report.entities_post_merge = len(store.entities)
        report.wall_time_s = time.monotonic() - started
        _fill_usage(gateway, report)
        raise BuildAborted(report) from exc
    if not config.skeleton:
        store.remove_edges(EdgeKind.ANCHOR_ANCHOR)
    report.edge_counts = store.edge_counts()
    report.entities_post_merge = len(store.entities)
    report.wall_time_s = time.monotonic() - started
    _fill_usage(gateway, report)
    store.check_integrity()
    return store, report


class BuildAborted(ProviderError):
    """Raised when a provider fails mid-build; carries the partial report."""

    def __init__(self, report: BuildReport):
        super().__init__(f"build aborted: {report.error}")
        self.report = report


def _fill_usage(gateway: LlmGateway, report: BuildReport) -> None:
    try:
        p, c, _ = gateway.usage_report(BUILD_SCOPE)
    except Exception:
        p = c = 0
    report.build_prompt_tokens = p
    report.build_completion_tokens = c


def _build_document(doc: Document, store: GraphStore, config: EngineConfig,
                    embedder: Embedder, gateway: LlmGateway, report: BuildReport) -> None:
    chunks = chunk_text(doc, config.chunk_tokens)
    prev_anchor: str | None = None
    for chunk in chunks:
        summary = summarize_chunk(gateway, chunk)
        chunk.summary = summary
        anchor_id = store.add_anchor(summary, embedder.embed(summary), chunk)
        if prev_anchor is not None:
            store.chain_anchors(prev_anchor, anchor_id)
        prev_anchor = anchor_id
        report.chunk_count += 1

        entities = extract_entities(gateway, chunk)
        report.entities_pre_merge += len(entities)
        name_to_id: dict[str, str] = {}
        for name in entities:
            name_to_id[name.lower()] = store.upsert_entity(name, embedder.embed(name))
        for node_id in dict.fromkeys(name_to_id.values()):  # occurrence = extraction output
            store.add_edge(node_id, anchor_id, EdgeKind.ENTITY_ANCHOR)
        if entities:
            triples, dropped = extract_relations(gateway, chunk, entities)
            report.dropped_triples += dropped
            for subject, sentence, obj in triples:
                a = name_to_id.get(subject.lower())
                b = name_to_id.get(obj.lower())
                if a is None or b is None or a == b:
                    report.dropped_triples += 1
                    continue
                store.add_edge(a, b, EdgeKind.ENTITY_ENTITY, label=sentence)


def load_corpus(path: str | Path) -> list[Document]:
    """Plain-text file -> one document; .jsonl -> {doc_id, title, text} per line."""
    path = Path(path)
    if path.suffix == ".jsonl":
        docs = []
        for i, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            data = json.loads(line)
            docs.append(Document(
                doc_id=str(data.get("doc_id", f"doc-{i}")),
                title=data.get("title", ""),
                text=data["text"],
            ))
        if not docs:
            raise InvalidArgument(f"no documents in {path}")
        return docs
    return [Document(doc_id=path.stem, title=path.stem, text=path.read_text(encoding="utf-8"))]
