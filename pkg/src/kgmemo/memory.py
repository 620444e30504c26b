"""Edge-memory math: the norm-gated weight function, enhance/penalize updates,
path classification, memorization, thresholded replay expansion, and the
memory-capacity bound with its numerical verifier.

The update weight is delta(x) = (2/pi) * cos((pi/2) * ||x||): large for
empty memories (one update from zero reaches projection 2/pi, already above
the default replay threshold 0.55) and vanishing as the norm approaches 1,
so consolidated memories resist overwriting. Above norm 1 the weight turns
negative, which is the self-correcting pullback; it is deliberately not
clamped.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import cosine, normalize
from .errors import InvalidArgument
from .graph import EdgeKind, EdgeMemory, GraphStore, NodeId
from .subgraph import PROV_REPLAY, PROV_SEED, Subgraph

logger = logging.getLogger(__name__)

TWO_OVER_PI = 2.0 / math.pi


def delta_norm(n: float) -> float:
    """Update weight as a function of the memory norm."""
    return TWO_OVER_PI * math.cos((math.pi / 2.0) * n)


def delta(x: np.ndarray) -> float:
    """delta of a vector argument: (2/pi) * cos((pi/2) * ||x||_2)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidArgument("delta requires a finite vector")
    return delta_norm(float(np.linalg.norm(x)))


def _check_pair(v: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if v.shape != q.shape:
        raise InvalidArgument(f"dimension mismatch: {v.shape} vs {q.shape}")
    return v, normalize(q)


def enhance_vector(v: np.ndarray, q: np.ndarray) -> np.ndarray:
    """v + delta(v) * q_hat."""
    v, q_hat = _check_pair(v, q)
    return v + delta(v) * q_hat


def penalize_vector(v: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Shrink only the component of v along q: with p = (v . q_hat) q_hat,
    returns v - delta(p) * p. The orthogonal component is untouched."""
    v, q_hat = _check_pair(v, q)
    c = float(np.dot(v, q_hat))
    p = c * q_hat
    return v - delta_norm(abs(c)) * p


def enhance(mem: EdgeMemory, q: np.ndarray) -> EdgeMemory:
    return EdgeMemory(v=enhance_vector(mem.v, q), update_count=mem.update_count + 1)


def penalize(mem: EdgeMemory, q: np.ndarray) -> EdgeMemory:
    return EdgeMemory(v=penalize_vector(mem.v, q), update_count=mem.update_count + 1)


def edge_weight(store: GraphStore, q_hat: np.ndarray, edge_id: int,
                n_from: NodeId, n_to: NodeId, alpha: float) -> float:
    """Replay relevance of stepping across an edge:
    alpha * sim(nodes) + (1 - alpha) * (q . memory)."""
    edge = store.edges[edge_id]
    sim = cosine(store.node_embedding(n_from), store.node_embedding(n_to))
    mem_term = float(np.dot(q_hat, edge.memory.v))
    return alpha * sim + (1.0 - alpha) * mem_term


# -- path classification and memorization ------------------------------------

@dataclass
class MarkedElements:
    """Useful edges/chunks named by the post-answer filtering call."""
    edge_ids: set[int] = field(default_factory=set)
    chunk_ids: set[NodeId] = field(default_factory=set)


@dataclass
class PathClassification:
    useful_edges: set[int]
    useful_chunks: set[NodeId]
    effective_edges: set[int]
    ineffective_edges: set[int]
    dropped_marks: int = 0


_MAX_ROUTE_STEPS = 200_000


def classify_paths(store: GraphStore, s: Subgraph, marks: MarkedElements) -> PathClassification:
    """Split the edges of S into effective and ineffective sets.

    Effective edges are the marked ones plus every edge lying on some simple
    route (within S) from a seed to a marked edge's endpoint or to the anchor
    of a marked chunk. Marks that point outside S are dropped with a warning;
    the filtering model can hallucinate ids.
    """
    s_edges = s.edges
    useful_edges = marks.edge_ids & s_edges
    useful_chunks = marks.chunk_ids & set(s.cs)
    dropped = (len(marks.edge_ids) - len(useful_edges)) + (len(marks.chunk_ids) - len(useful_chunks))
    if dropped:
        logger.warning("dropped %d marks outside the working subgraph", dropped)

    targets: set[NodeId] = set()
    effective: set[int] = set(useful_edges)
    for eid in useful_edges:
        edge = store.edges[eid]
        targets.update((edge.a, edge.b))
    for cid in useful_chunks:
        anchor = store.anchor_for_chunk(cid)
        if anchor.id in s.nodes:
            targets.add(anchor.id)
        edge = store.edge_between(anchor.id, cid)
        if edge is not None and edge.id in s_edges:
            effective.add(edge.id)

    # adjacency restricted to S, chunk nodes excluded (routes never pass
    # through a chunk; its anchor stands in)
    adjacency: dict[NodeId, list[tuple[int, NodeId]]] = {}
    for eid in sorted(s_edges):
        edge = store.edges[eid]
        if store.node_type(edge.a) == "chunk" or store.node_type(edge.b) == "chunk":
            continue
        adjacency.setdefault(edge.a, []).append((eid, edge.b))
        adjacency.setdefault(edge.b, []).append((eid, edge.a))

    steps = 0

    def explore(node: NodeId, on_path: set[NodeId], stack: list[int]) -> None:
        nonlocal steps
        if node in targets and stack:
            effective.update(stack)
        for eid, other in adjacency.get(node, ()):
            if other in on_path:
                continue
            steps += 1
            if steps > _MAX_ROUTE_STEPS:
                logger.warning("route enumeration capped at %d steps", _MAX_ROUTE_STEPS)
                return
            on_path.add(other)
            stack.append(eid)
            explore(other, on_path, stack)
            stack.pop()
            on_path.remove(other)

    if targets:
        for seed in s.seeds:
            explore(seed, {seed}, [])

    return PathClassification(
        useful_edges=useful_edges,
        useful_chunks=useful_chunks,
        effective_edges=effective,
        ineffective_edges=s_edges - effective,
        dropped_marks=dropped,
    )


@dataclass
class MemoryUpdate:
    edge_id: int
    action: str  # "enhance" | "penalize"
    norm_before: float
    norm_after: float


@dataclass
class MemoryUpdateReport:
    updates: list[MemoryUpdate]
    enhanced: int
    penalized: int
    dropped_marks: int

    def by_edge(self) -> dict[int, MemoryUpdate]:
        return {u.edge_id: u for u in self.updates}


def memorize(store: GraphStore, s: Subgraph, q: np.ndarray,
             marks: MarkedElements) -> MemoryUpdateReport:
    """Enhance every effective edge of S and penalize every ineffective one,
    exactly once each, under the graph's writer lock."""
    q_hat = normalize(np.asarray(q, dtype=np.float64))
    classification = classify_paths(store, s, marks)
    updates: list[MemoryUpdate] = []
    with store.write_lock:
        for eid in sorted(s.edges):
            edge = store.edges[eid]
            before = edge.memory.norm()
            if eid in classification.effective_edges:
                edge.memory = enhance(edge.memory, q_hat)
                action = "enhance"
            else:
                edge.memory = penalize(edge.memory, q_hat)
                action = "penalize"
            updates.append(MemoryUpdate(eid, action, before, edge.memory.norm()))
    return MemoryUpdateReport(
        updates=updates,
        enhanced=len(classification.effective_edges),
        penalized=len(classification.ineffective_edges),
        dropped_marks=classification.dropped_marks,
    )


# -- memory replay ------------------------------------------------------------

@dataclass
class ReplayParams:
    alpha: float = 0.1
    lam: float = 0.55
    seed_count: int = 2
    visit_budget: int = 10  # nodes added per seed's expansion

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgument("alpha must be in [0, 1]")
        if not 0.0 < self.lam < 1.0:
            raise InvalidArgument("lambda must be in (0, 1)")


def replay_expand(store: GraphStore, q: np.ndarray, seeds: list[NodeId],
                  params: ReplayParams) -> Subgraph:
    """Thresholded depth-first expansion from the seeds.

    Steps across an edge only when the blended relevance exceeds lambda;
    each node joins at most once per query, and every anchor reached pulls
    its chunk summary into Cs. Empty expansion is a valid outcome.
    """
    q_hat = normalize(np.asarray(q, dtype=np.float64))
    s = Subgraph(seeds=list(seeds))
    for seed in seeds:
        if not store.has_node(seed):
            raise InvalidArgument(f"seed {seed} does not exist")
        s.add_node(seed, PROV_SEED)
        if seed in store.anchors:
            s.access_chunk(store, seed, PROV_SEED)
    visited: set[NodeId] = set(seeds)

    def dfs(node: NodeId, budget: list[int]) -> None:
        for edge, nb in store.neighbors(node):
            if nb in visited or budget[0] <= 0:
                continue
            if store.node_type(nb) == "chunk":
                continue  # anchors proxy their chunks
            w = edge_weight(store, q_hat, edge.id, node, nb, params.alpha)
            if w > params.lam:
                visited.add(nb)
                budget[0] -= 1
                s.add_node(nb, PROV_REPLAY)
                s.add_edge(edge.id, PROV_REPLAY)
                if nb in store.anchors:
                    s.access_chunk(store, nb, PROV_REPLAY)
                dfs(nb, budget)

    for seed in seeds:
        dfs(seed, [params.visit_budget])
    return s


# -- capacity bound and verifier ----------------------------------------------

def capacity_bound(lam: float, dim: int | None = None) -> float:
    """Largest pairwise angle (radians) a query set may span while one edge
    memory can still satisfy all of them: 2*arcsin(sqrt(c)*sin(arccos(lam)))
    with c = 1/2 in the limit of large dimension, or (dim+1)/(2*dim) for the
    finite-dimension verifier.
    """
    if not 0.0 < lam <= 1.0:
        raise InvalidArgument(f"lambda must be in (0, 1], got {lam}")
    c = 0.5 if dim is None else (dim + 1) / (2.0 * dim)
    if dim is not None and dim < 1:
        raise InvalidArgument("dim must be >= 1")
    return 2.0 * math.asin(math.sqrt(c) * math.sin(math.acos(lam)))


@dataclass
class CapacityResult:
    success: bool
    final_v: np.ndarray
    rounds_used: int
    witness: np.ndarray          # normalized mean query direction
    witness_min_dot: float       # min over queries of witness . q
    history: list[tuple[int, float, float]]  # (round, min dot, max dot)


def capacity_check(queries: list[np.ndarray], lam: float,
                   update_budget: int = 50) -> CapacityResult:
    """Round-robin enhancement from the zero vector; success when the memory
    simultaneously clears lambda against every query. Also reports the
    analytic witness: the normalized mean direction and its worst-case dot.
    """
    if not queries:
        raise InvalidArgument("queries must be nonempty")
    mat = np.stack([normalize(np.asarray(q, dtype=np.float64)) for q in queries])
    mean_dir = mat.mean(axis=0)
    if np.linalg.norm(mean_dir) == 0.0:
        witness = np.zeros(mat.shape[1])
        witness_min = 0.0
    else:
        witness = normalize(mean_dir)
        witness_min = float((mat @ witness).min())
    v = np.zeros(mat.shape[1])
    history: list[tuple[int, float, float]] = []
    success = False
    rounds = update_budget
    for r in range(1, update_budget + 1):
        for q in mat:
            v = v + delta(v) * q
        dots = mat @ v
        history.append((r, float(dots.min()), float(dots.max())))
        if float(dots.min()) > lam:
            success = True
            rounds = r
            break
    return CapacityResult(
        success=success, final_v=v, rounds_used=rounds,
        witness=witness, witness_min_dot=float(witness_min), history=history,
    )
