"""Typed heterogeneous knowledge-graph store with per-edge memory vectors.

Three node kinds (entities, anchors, chunks) and four undirected edge kinds.
Each anchor is bijectively paired with one chunk; anchors of consecutive
chunks in a document form a chain that preserves reading order. Every edge
carries a memory vector, zero until the first memorization touches it.

Edges are undirected and keyed by (min endpoint, max endpoint, kind), so
re-adding a pair is idempotent. Mutations are serialized behind a single
writer lock; readers may run concurrently.
"""

import json
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .embedding import cosine, normalize
from .errors import ConfigConflict, InvalidArgument, NotFound, SchemaViolation

logger = logging.getLogger(__name__)

NodeId = str


class EdgeKind(str, Enum):
    ENTITY_ENTITY = "EntityEntity"
    ENTITY_ANCHOR = "EntityAnchor"
    ANCHOR_ANCHOR = "AnchorAnchor"
    ANCHOR_CHUNK = "AnchorChunk"


@dataclass
class EntityNode:
    id: NodeId
    name: str
    embedding: np.ndarray
    aliases: list[str] = field(default_factory=list)


@dataclass
class AnchorNode:
    id: NodeId
    title: str
    embedding: np.ndarray
    chunk_id: NodeId
    prev: NodeId | None = None
    next: NodeId | None = None


@dataclass
class Chunk:
    id: NodeId
    text: str
    summary: str
    token_count: int
    doc_id: str
    ordinal: int


@dataclass
class EdgeMemory:
    v: np.ndarray
    update_count: int = 0

    @classmethod
    def zero(cls, dim: int) -> "EdgeMemory":
        return cls(v=np.zeros(dim), update_count=0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass
class Edge:
    id: int
    a: NodeId  # canonical: a < b
    b: NodeId
    kind: EdgeKind
    label: str = ""
    memory: EdgeMemory = None  # type: ignore[assignment]

    def other(self, n: NodeId) -> NodeId:
        return self.b if n == self.a else self.a


def _expected_kind(ta: str, tb: str) -> EdgeKind | None:
    pair = frozenset((ta, tb))
    if pair == frozenset({"entity"}):
        return EdgeKind.ENTITY_ENTITY
    if pair == frozenset({"entity", "anchor"}):
        return EdgeKind.ENTITY_ANCHOR
    if pair == frozenset({"anchor"}):
        return EdgeKind.ANCHOR_ANCHOR
    if pair == frozenset({"anchor", "chunk"}):
        return EdgeKind.ANCHOR_CHUNK
    return None


class GraphStore:
    """In-memory graph with single-writer / multi-reader locking."""

    def __init__(self, dim: int, synonym_threshold: float = 0.7, version: int = 1,
                 embedding_model: str = ""):
        self.dim = dim
        self.synonym_threshold = synonym_threshold
        self.version = version
        self.embedding_model = embedding_model
        self.entities: dict[NodeId, EntityNode] = {}
        self.anchors: dict[NodeId, AnchorNode] = {}
        self.chunks: dict[NodeId, Chunk] = {}
        self.edges: dict[int, Edge] = {}
        self._edge_key: dict[tuple[NodeId, NodeId, EdgeKind], int] = {}
        self._adjacency: dict[NodeId, list[int]] = {}
        self._counters = {"e": 0, "a": 0, "c": 0, "edge": 0}
        self._write_lock = threading.RLock()

    # -- node lookups -------------------------------------------------------

    def node_type(self, n: NodeId) -> str:
        if n in self.entities:
            return "entity"
        if n in self.anchors:
            return "anchor"
        if n in self.chunks:
            return "chunk"
        raise NotFound(f"unknown node: {n}")

    def has_node(self, n: NodeId) -> bool:
        return n in self.entities or n in self.anchors or n in self.chunks

    def node_embedding(self, n: NodeId) -> np.ndarray:
        if n in self.entities:
            return self.entities[n].embedding
        if n in self.anchors:
            return self.anchors[n].embedding
        raise NotFound(f"node {n} has no embedding (chunks are proxied by anchors)")

    def node_display(self, n: NodeId) -> str:
        if n in self.entities:
            return self.entities[n].name
        if n in self.anchors:
            return self.anchors[n].title
        if n in self.chunks:
            return self.chunks[n].summary
        raise NotFound(f"unknown node: {n}")

    # -- mutations ----------------------------------------------------------

    def upsert_entity(self, name: str, embedding: np.ndarray,
                      synonym_threshold: float | None = None) -> NodeId:
        """Create an entity node, or merge into an existing synonym.

        Merges when some existing entity exceeds the cosine threshold; ties
        break toward the highest similarity, then the oldest node.
        """
        if not name or not name.strip():
            raise InvalidArgument("entity name must be nonempty")
        threshold = self.synonym_threshold if synonym_threshold is None else synonym_threshold
        if not 0.0 < threshold <= 1.0:
            raise InvalidArgument("synonym_threshold must be in (0, 1]")
        embedding = np.asarray(embedding, dtype=np.float64)
        if embedding.shape[0] != self.dim:
            raise InvalidArgument(f"embedding dim {embedding.shape[0]} != graph dim {self.dim}")
        if abs(float(np.linalg.norm(embedding)) - 1.0) > 1e-6:
            embedding = normalize(embedding)

        with self._write_lock:
            best_id: NodeId | None = None
            best_sim = threshold
            for node in self.entities.values():  # insertion order == oldest first
                sim = cosine(embedding, node.embedding)
                if sim > best_sim:
                    best_sim = sim
                    best_id = node.id
            if best_id is not None:
                node = self.entities[best_id]
                if name != node.name and name not in node.aliases:
                    node.aliases.append(name)
                return best_id
            self._counters["e"] += 1
            nid = f"e{self._counters['e']}"
            self.entities[nid] = EntityNode(id=nid, name=name, embedding=embedding)
            self._adjacency[nid] = []
            return nid

    def add_anchor(self, title: str, embedding: np.ndarray, chunk: Chunk) -> NodeId:
        """Create the anchor/chunk pair; the two always enter together."""
        with self._write_lock:
            if chunk.id and chunk.id in self.chunks:
                raise SchemaViolation(f"chunk {chunk.id} already exists")
            self._counters["a"] += 1
            self._counters["c"] += 1
            aid = f"a{self._counters['a']}"
            cid = f"c{self._counters['c']}"
            chunk.id = cid
            self.chunks[cid] = chunk
            self.anchors[aid] = AnchorNode(
                id=aid, title=title, embedding=normalize(np.asarray(embedding, dtype=np.float64)),
                chunk_id=cid,
            )
            self._adjacency[aid] = []
            self._adjacency[cid] = []
            self.add_edge(aid, cid, EdgeKind.ANCHOR_CHUNK)
            return aid

    def chain_anchors(self, prev_id: NodeId, next_id: NodeId) -> int:
        """Link consecutive anchors of one document (mutual prev/next)."""
        with self._write_lock:
            prev_node = self.anchors.get(prev_id)
            next_node = self.anchors.get(next_id)
            if prev_node is None or next_node is None:
                raise NotFound("chain endpoints must be anchors")
            prev_node.next = next_id
            next_node.prev = prev_id
            return self.add_edge(prev_id, next_id, EdgeKind.ANCHOR_ANCHOR)

    def add_edge(self, a: NodeId, b: NodeId, kind: EdgeKind, label: str = "") -> int:
        """Idempotent: re-adding the same (pair, kind) returns the existing edge."""
        if not self.has_node(a):
            raise NotFound(f"unknown node: {a}")
        if not self.has_node(b):
            raise NotFound(f"unknown node: {b}")
        if a == b:
            raise SchemaViolation("self-edges are not allowed")
        expected = _expected_kind(self.node_type(a), self.node_type(b))
        if expected is None or expected != kind:
            raise SchemaViolation(
                f"edge kind {kind.value} does not match endpoint types "
                f"({self.node_type(a)}, {self.node_type(b)})"
            )
        if kind == EdgeKind.ENTITY_ENTITY and not label:
            raise SchemaViolation("entity-entity edges require a relation sentence label")
        lo, hi = (a, b) if a < b else (b, a)
        key = (lo, hi, kind)
        with self._write_lock:
            existing = self._edge_key.get(key)
            if existing is not None:
                return existing
            self._counters["edge"] += 1
            eid = self._counters["edge"]
            edge = Edge(id=eid, a=lo, b=hi, kind=kind, label=label,
                        memory=EdgeMemory.zero(self.dim))
            self.edges[eid] = edge
            self._edge_key[key] = eid
            self._adjacency[lo].append(eid)
            self._adjacency[hi].append(eid)
            return eid

    def remove_edges(self, kind: EdgeKind) -> int:
        """Drop every edge of one kind (skeleton ablation)."""
        with self._write_lock:
            doomed = [e for e in self.edges.values() if e.kind == kind]
            for edge in doomed:
                del self.edges[edge.id]
                del self._edge_key[(edge.a, edge.b, edge.kind)]
                self._adjacency[edge.a].remove(edge.id)
                self._adjacency[edge.b].remove(edge.id)
                if kind == EdgeKind.ANCHOR_ANCHOR:
                    self.anchors[edge.a].next = None
                    self.anchors[edge.b].prev = None
            return len(doomed)

    # -- queries ------------------------------------------------------------

    def neighbors(self, n: NodeId) -> list[tuple[Edge, NodeId]]:
        """All incident edges in deterministic (edge id) order."""
        if not self.has_node(n):
            raise NotFound(f"unknown node: {n}")
        out = []
        for eid in sorted(self._adjacency.get(n, ())):
            edge = self.edges[eid]
            out.append((edge, edge.other(n)))
        return out

    def edge_between(self, a: NodeId, b: NodeId) -> Edge | None:
        lo, hi = (a, b) if a < b else (b, a)
        for kind in EdgeKind:
            eid = self._edge_key.get((lo, hi, kind))
            if eid is not None:
                return self.edges[eid]
        return None

    def anchor_for_chunk(self, chunk_id: NodeId) -> AnchorNode:
        for anchor in self.anchors.values():
            if anchor.chunk_id == chunk_id:
                return anchor
        raise NotFound(f"no anchor for chunk {chunk_id}")

    def edge_counts(self) -> dict[str, int]:
        counts = {k.value: 0 for k in EdgeKind}
        for edge in self.edges.values():
            counts[edge.kind.value] += 1
        return counts

    def stats(self) -> dict[str, int]:
        return {
            "entities": len(self.entities),
            "anchors": len(self.anchors),
            "chunks": len(self.chunks),
            "edges": len(self.edges),
        }

    def check_integrity(self) -> None:
        """Raise if referential integrity or the anchor-chunk bijection is broken."""
        for edge in self.edges.values():
            if not self.has_node(edge.a) or not self.has_node(edge.b):
                raise SchemaViolation(f"edge {edge.id} has a dangling endpoint")
        paired = {a.chunk_id for a in self.anchors.values()}
        if len(paired) != len(self.anchors):
            raise SchemaViolation("two anchors share a chunk")
        for anchor in self.anchors.values():
            if anchor.chunk_id not in self.chunks:
                raise SchemaViolation(f"anchor {anchor.id} references missing chunk")
            if anchor.next is not None and self.anchors[anchor.next].prev != anchor.id:
                raise SchemaViolation(f"chain link {anchor.id}->{anchor.next} is not mutual")
            if anchor.prev is not None and self.anchors[anchor.prev].next != anchor.id:
                raise SchemaViolation(f"chain link {anchor.prev}->{anchor.id} is not mutual")

    @property
    def write_lock(self) -> threading.RLock:
        return self._write_lock


# -- persistence -------------------------------------------------------------
# One self-describing JSON document. json round-trips Python floats through
# repr, which is exact for IEEE doubles, so memory vectors reload bit-stable.

SNAPSHOT_FORMAT = "kgmemo-graph/1"


def snapshot_to_dict(g: GraphStore) -> dict:
    return {
        "meta": {
            "format": SNAPSHOT_FORMAT,
            "version": g.version,
            "embedding_dim": g.dim,
            "embedding_model": g.embedding_model,
            "synonym_threshold": g.synonym_threshold,
            "counters": dict(g._counters),
        },
        "nodes": {
            "entities": [
                {"id": n.id, "name": n.name, "aliases": n.aliases,
                 "embedding": n.embedding.tolist()}
                for n in g.entities.values()
            ],
            "anchors": [
                {"id": n.id, "title": n.title, "chunk_id": n.chunk_id,
                 "prev": n.prev, "next": n.next, "embedding": n.embedding.tolist()}
                for n in g.anchors.values()
            ],
            "chunks": [
                {"id": n.id, "text": n.text, "summary": n.summary,
                 "token_count": n.token_count, "doc_id": n.doc_id, "ordinal": n.ordinal}
                for n in g.chunks.values()
            ],
        },
        "edges": [
            {"id": e.id, "a": e.a, "b": e.b, "kind": e.kind.value, "label": e.label,
             "memory": e.memory.v.tolist(), "update_count": e.memory.update_count}
            for e in g.edges.values()
        ],
    }


def snapshot_from_dict(data: dict, expected_dim: int | None = None) -> GraphStore:
    meta = data["meta"]
    if meta.get("format") != SNAPSHOT_FORMAT:
        raise ConfigConflict(f"unsupported snapshot format: {meta.get('format')}")
    dim = int(meta["embedding_dim"])
    if expected_dim is not None and dim != expected_dim:
        raise ConfigConflict(
            f"snapshot embedding dim {dim} conflicts with configured dim {expected_dim}"
        )
    g = GraphStore(dim=dim, synonym_threshold=meta["synonym_threshold"],
                   version=meta.get("version", 1), embedding_model=meta.get("embedding_model", ""))
    for n in data["nodes"]["entities"]:
        g.entities[n["id"]] = EntityNode(
            id=n["id"], name=n["name"], aliases=list(n["aliases"]),
            embedding=np.asarray(n["embedding"], dtype=np.float64),
        )
        g._adjacency[n["id"]] = []
    for n in data["nodes"]["chunks"]:
        g.chunks[n["id"]] = Chunk(
            id=n["id"], text=n["text"], summary=n["summary"],
            token_count=n["token_count"], doc_id=n["doc_id"], ordinal=n["ordinal"],
        )
        g._adjacency[n["id"]] = []
    for n in data["nodes"]["anchors"]:
        g.anchors[n["id"]] = AnchorNode(
            id=n["id"], title=n["title"], chunk_id=n["chunk_id"],
            prev=n.get("prev"), next=n.get("next"),
            embedding=np.asarray(n["embedding"], dtype=np.float64),
        )
        g._adjacency[n["id"]] = []
    for e in data["edges"]:
        mem = np.asarray(e["memory"], dtype=np.float64)
        if mem.shape[0] != dim:
            raise ConfigConflict(f"edge {e['id']} memory dim {mem.shape[0]} != {dim}")
        edge = Edge(id=e["id"], a=e["a"], b=e["b"], kind=EdgeKind(e["kind"]), label=e["label"],
                    memory=EdgeMemory(v=mem, update_count=e["update_count"]))
        if not g.has_node(edge.a) or not g.has_node(edge.b):
            raise ConfigConflict(f"edge {edge.id} references a missing node")
        g.edges[edge.id] = edge
        g._edge_key[(edge.a, edge.b, edge.kind)] = edge.id
        g._adjacency[edge.a].append(edge.id)
        g._adjacency[edge.b].append(edge.id)
    g._counters = dict(meta.get("counters") or _recover_counters(g))
    g.check_integrity()
    return g


def _recover_counters(g: GraphStore) -> dict[str, int]:
    def max_suffix(ids, prefix):
        nums = [int(i[len(prefix):]) for i in ids if i.startswith(prefix)]
        return max(nums, default=0)

    return {
        "e": max_suffix(g.entities, "e"),
        "a": max_suffix(g.anchors, "a"),
        "c": max_suffix(g.chunks, "c"),
        "edge": max(g.edges, default=0),
    }


def save_snapshot(g: GraphStore, path: str | Path) -> None:
    Path(path).write_text(json.dumps(snapshot_to_dict(g)), encoding="utf-8")


def load_snapshot(path: str | Path, expected_dim: int | None = None) -> GraphStore:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return snapshot_from_dict(data, expected_dim=expected_dim)


def to_dot(g: GraphStore) -> str:
    """Graph description in DOT text format (for external viewers)."""
    lines = ["graph kgmemo {"]
    for n in g.entities.values():
        lines.append(f'  "{n.id}" [label="{n.name}", shape=ellipse];')
    for n in g.anchors.values():
        lines.append(f'  "{n.id}" [label="{n.title}", shape=box];')
    for n in g.chunks.values():
        lines.append(f'  "{n.id}" [label="chunk {n.ordinal}", shape=note];')
    for e in g.edges.values():
        attrs = f'  "{e.a}" -- "{e.b}" [kind="{e.kind.value}"'
        if e.memory.update_count:
            attrs += f', norm="{e.memory.norm():.4f}"'
        lines.append(attrs + "];")
    lines.append("}")
    return "\n".join(lines)
