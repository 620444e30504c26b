"""Working set of a single query: nodes, edges, accessed chunk summaries.

Every element records how it entered (seed, replay, or the LLM hop index),
which downstream reporting turns into replay-vs-LLM provenance.
"""

from dataclasses import dataclass, field

from .graph import EdgeKind, GraphStore, NodeId

PROV_SEED = "seed"
PROV_REPLAY = "replay"


def prov_hop(i: int) -> str:
    return f"hop:{i}"


@dataclass
class Subgraph:
    seeds: list[NodeId] = field(default_factory=list)
    node_provenance: dict[NodeId, str] = field(default_factory=dict)
    edge_provenance: dict[int, str] = field(default_factory=dict)
    cs: dict[NodeId, str] = field(default_factory=dict)  # chunk id -> summary

    @property
    def nodes(self) -> set[NodeId]:
        return set(self.node_provenance)

    @property
    def edges(self) -> set[int]:
        return set(self.edge_provenance)

    def add_node(self, n: NodeId, provenance: str) -> bool:
        if n in self.node_provenance:
            return False
        self.node_provenance[n] = provenance
        return True

    def add_edge(self, edge_id: int, provenance: str) -> bool:
        if edge_id in self.edge_provenance:
            return False
        self.edge_provenance[edge_id] = provenance
        return True

    def access_chunk(self, store: GraphStore, anchor_id: NodeId, provenance: str) -> None:
        """Reaching an anchor grants access to its chunk: summary enters Cs
        (at most once) and the structural anchor-chunk edge joins the set.
        The edge gets an access: prefix so it is not counted as a chosen hop."""
        anchor = store.anchors[anchor_id]
        chunk = store.chunks[anchor.chunk_id]
        self.add_node(chunk.id, provenance)
        if chunk.id not in self.cs:
            self.cs[chunk.id] = chunk.summary
        edge = store.edge_between(anchor_id, chunk.id)
        if edge is not None:
            self.add_edge(edge.id, f"access:{provenance}")

    def replay_edge_count(self) -> int:
        return sum(1 for p in self.edge_provenance.values()
                   if p == PROV_REPLAY or p == f"access:{PROV_REPLAY}")

    def llm_edge_count(self) -> int:
        return sum(1 for p in self.edge_provenance.values() if p.startswith("hop:"))

    def replay_fraction(self) -> float:
        total = len(self.edge_provenance)
        return self.replay_edge_count() / total if total else 0.0

    def triples(self, store: GraphStore) -> list[tuple[int, str]]:
        """Edges with their display sentence, ordered by edge id."""
        out = []
        for eid in sorted(self.edge_provenance):
            edge = store.edges[eid]
            if edge.kind == EdgeKind.ENTITY_ENTITY:
                desc = edge.label
            elif edge.kind == EdgeKind.ANCHOR_ANCHOR:
                desc = (f"{store.node_display(edge.a)} and {store.node_display(edge.b)} "
                        "are consecutive passages.")
            elif edge.kind == EdgeKind.ENTITY_ANCHOR:
                ent, anc = (edge.a, edge.b) if edge.a in store.entities else (edge.b, edge.a)
                desc = (f"{store.entities[ent].name} appears in the passage "
                        f"'{store.anchors[anc].title}'.")
            else:
                desc = f"passage '{store.node_display(edge.a)}' carries its source text."
            out.append((eid, desc))
        return out
