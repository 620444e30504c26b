"""Query pipeline: split check, seed selection, replay-first subgraph
initialization, the model-guided forward/backward expansion loop, answer
generation, and post-answer memorization.

Replay runs before any selection call. When it expands anything, the engine
attempts an answer straight from the replayed subgraph; a reply opening with
the insufficiency marker sends the query back into the expansion loop, which
verifies and corrects the memory. A query answered purely from replay makes
zero node-selection calls and skips memorization (there was no new traversal
experience to store).

Hop accounting: one forward expansion costs one hop; backward moves are
free; replay consumes no hops. The loop additionally caps total selection
exchanges at (hop budget + replay visit budget) so backward-only loops
terminate.
"""

import itertools
import logging
import uuid
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import EngineConfig
from .embedding import Embedder, cosine
from .errors import EmptySeedError, InvalidArgument, ParseError
from .graph import EdgeKind, GraphStore, NodeId
from .llm import LlmGateway, SelectionContext
from .memory import MarkedElements, ReplayParams, edge_weight, memorize, replay_expand
from .prompts import INSUFFICIENT_MARKER, PromptKind
from .subgraph import Subgraph, prov_hop

logger = logging.getLogger(__name__)

StepCallback = Callable[[dict], None]


@dataclass
class TraversalParams:
    alpha: float = 0.1
    lam: float = 0.55
    seed_count: int = 2
    max_hops: int = 10
    visit_budget: int | None = None  # replay nodes per seed; None -> max_hops
    memorize: bool = True
    decomposition_limit: int = 1

    @classmethod
    def from_config(cls, cfg: EngineConfig) -> "TraversalParams":
        return cls(
            alpha=cfg.alpha, lam=cfg.lam, seed_count=cfg.seed_count,
            max_hops=cfg.max_hops, visit_budget=cfg.replay_visit_budget,
            decomposition_limit=cfg.decomposition_limit,
        )

    def replay_params(self) -> ReplayParams:
        budget = self.visit_budget if self.visit_budget is not None else self.max_hops
        return ReplayParams(alpha=self.alpha, lam=self.lam,
                            seed_count=self.seed_count, visit_budget=budget)


@dataclass
class QueryPlan:
    original: str
    subqueries: list[str]
    retrieval_needed: bool


@dataclass
class TraceStep:
    index: int
    current: NodeId
    offered_forward: list[str]
    offered_backward: list[str]
    decision: str  # forward | backward | sufficient | fallback-backward
    target: NodeId | None
    hop: int  # hops consumed so far (after this step)
    exchange_index: int | None

    def to_dict(self) -> dict:
        return {
            "index": self.index, "current": self.current,
            "offered_forward": self.offered_forward,
            "offered_backward": self.offered_backward,
            "decision": self.decision, "target": self.target,
            "hop": self.hop, "exchange_index": self.exchange_index,
        }


@dataclass
class TraversalTrace:
    query: str
    seeds: list[NodeId] = field(default_factory=list)
    steps: list[TraceStep] = field(default_factory=list)
    hops: int = 0
    select_calls: int = 0
    replay_nodes: int = 0
    replay_edges: int = 0
    replay_sufficient: bool | None = None  # None: replay added nothing to check
    trial_answer: str | None = None
    loop_ran: bool = False
    forced_stop: bool = False

    def edge_ids(self, s: Subgraph) -> set[int]:
        return s.edges

    def to_dict(self) -> dict:
        return {
            "query": self.query, "seeds": self.seeds,
            "steps": [st.to_dict() for st in self.steps],
            "hops": self.hops, "select_calls": self.select_calls,
            "replay_nodes": self.replay_nodes, "replay_edges": self.replay_edges,
            "replay_sufficient": self.replay_sufficient,
            "trial_answer": self.trial_answer,
            "loop_ran": self.loop_ran, "forced_stop": self.forced_stop,
        }


@dataclass
class QARecord:
    id: str
    question: str
    answer: str
    trace: TraversalTrace
    prompt_tokens: int = 0
    completion_tokens: int = 0
    memorized: bool = False
    no_context: bool = False
    replay_fraction: float = 0.0
    subgraph_edges: list[int] = field(default_factory=list)
    edge_provenance: dict[int, str] = field(default_factory=dict)
    gold_answer: str | None = None
    options: list[str] | None = None
    verdict: str | None = None

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


# -- plan ----------------------------------------------------------------------

def plan_query(gateway: LlmGateway, text: str, limit: int = 1,
               scope: str = "default") -> QueryPlan:
    if not text or not text.strip():
        raise InvalidArgument("query must be nonempty")
    exchange = gateway.complete(PromptKind.SPLIT_QUERY, {"query": text, "limit": limit},
                                scope=scope)
    retrieval = exchange.parsed["retrieval"]
    if not retrieval:
        return QueryPlan(original=text, subqueries=[], retrieval_needed=False)
    if limit <= 1:
        subqueries = [text]  # decomposition disabled: the original question stands
    else:
        subqueries = exchange.parsed["subqueries"][:limit] or [text]
    return QueryPlan(original=text, subqueries=subqueries, retrieval_needed=True)


# -- seeds ----------------------------------------------------------------------

def select_seeds(store: GraphStore, q_vec: np.ndarray, k: int) -> list[NodeId]:
    """Top-k entity nodes by query similarity; ties break toward older nodes."""
    if k < 1:
        raise InvalidArgument("seed count must be >= 1")
    if not store.entities:
        raise EmptySeedError("graph has no entity nodes to seed from")
    scored = [
        (-cosine(q_vec, ent.embedding), order, ent.id)
        for order, ent in enumerate(store.entities.values())
    ]
    scored.sort()
    return [nid for _, _, nid in scored[:k]]


# -- prompt rendering -------------------------------------------------------------

def _num(node_id: NodeId) -> int:
    return int(node_id[1:])


def _entity_label(store: GraphStore, nid: NodeId) -> str:
    return f"entity {_num(nid)} ({store.entities[nid].name})"


def _anchor_label(store: GraphStore, aid: NodeId) -> str:
    return f"chunk {_num(aid)} ({store.anchors[aid].title})"


def _node_label(store: GraphStore, nid: NodeId) -> str:
    return _entity_label(store, nid) if nid in store.entities else _anchor_label(store, nid)


def render_edge_list(store: GraphStore, s: Subgraph) -> str:
    lines = [f"edge {eid}: {desc}" for eid, desc in s.triples(store)]
    return "\n".join(lines) if lines else "(none)"


def render_chunk_summaries(store: GraphStore, s: Subgraph) -> str:
    lines = [f"chunk {_num(cid)}: {summary}" for cid, summary in sorted(s.cs.items())]
    return "\n".join(lines) if lines else "(none)"


def render_chunk_texts(store: GraphStore, s: Subgraph) -> str:
    lines = [f"chunk {_num(cid)} text: {store.chunks[cid].text}" for cid in sorted(s.cs)]
    return "\n".join(lines) if lines else "(none)"


def _selection_material(store: GraphStore, s: Subgraph, current: NodeId,
                        q_hat: np.ndarray, alpha: float,
                        history: list[NodeId]) -> tuple[dict, SelectionContext]:
    context = SelectionContext()
    relation_lines: list[str] = []
    connection_lines: list[str] = []
    for edge, nb in store.neighbors(current):
        if nb in s.nodes or store.node_type(nb) == "chunk":
            continue
        w = edge_weight(store, q_hat, edge.id, current, nb, alpha)
        if nb in store.entities:
            context.forward_entities[_num(nb)] = nb
            via = f" via '{edge.label}'" if edge.label else ""
            relation_lines.append(
                f"entity {_num(nb)} ({store.entities[nb].name}){via} "
                f"[edge {edge.id}, weight {w:.3f}]"
            )
        else:
            context.forward_chunks[_num(nb)] = nb
            connection_lines.append(
                f"chunk {_num(nb)} ({store.anchors[nb].title}) "
                f"[edge {edge.id}, weight {w:.3f}]"
            )
    entity_members = [n for n in s.nodes if n in store.entities]
    anchor_members = [n for n in s.nodes if n in store.anchors]
    for nid in entity_members:
        context.backward_entities[_num(nid)] = nid
    for aid in anchor_members:
        context.backward_chunks[_num(aid)] = aid

    titles = {store.anchors[a].title for a in anchor_members}
    titles.update(store.anchors[a].title for a in context.forward_chunks.values())

    slots = {
        "c_node": _node_label(store, current),
        "entity_list": ", ".join(sorted(_entity_label(store, n) for n in entity_members)) or "(none)",
        "chunk_list": ", ".join(sorted(_anchor_label(store, a) for a in anchor_members)) or "(none)",
        "edge_list": render_edge_list(store, s),
        "relation_cnode": "; ".join(relation_lines) or "(none)",
        "connection_cnode": "; ".join(connection_lines) or "(none)",
        "c_node_list": ", ".join(_node_label(store, n) for n in history),
        "anchor_chunk_titles": "; ".join(sorted(titles)) or "(none)",
        "chunk_summary": render_chunk_summaries(store, s),
    }
    return slots, context


# -- answer -------------------------------------------------------------------------

def answer(gateway: LlmGateway, store: GraphStore, s: Subgraph, query: str,
           scope: str = "default") -> str:
    """One answer-generation exchange over the working set; the reply comes
    back verbatim (abstentions included), minus the insufficiency marker."""
    text = _generate(gateway, store, s, query, scope)
    return strip_marker(text)


def _generate(gateway: LlmGateway, store: GraphStore, s: Subgraph, query: str,
              scope: str) -> str:
    exchange = gateway.complete(PromptKind.GENERATE_ANSWER, {
        "query": query,
        "edge_list": render_edge_list(store, s),
        "chunk_summary": render_chunk_summaries(store, s),
        "chunk_texts": render_chunk_texts(store, s),
    }, scope=scope)
    return str(exchange.parsed)


def strip_marker(text: str) -> str:
    if text.startswith(INSUFFICIENT_MARKER):
        return text[len(INSUFFICIENT_MARKER):].strip()
    return text


# -- traversal loop -----------------------------------------------------------------

def traverse(store: GraphStore, embedder: Embedder, gateway: LlmGateway, query: str,
             params: TraversalParams, scope: str = "default",
             initial: Subgraph | None = None,
             on_step: StepCallback | None = None) -> tuple[Subgraph, TraversalTrace]:
    q_hat = embedder.embed(query)
    seeds = select_seeds(store, q_hat, params.seed_count)
    trace = TraversalTrace(query=query, seeds=list(seeds))

    s = replay_expand(store, q_hat, seeds, params.replay_params())
    if initial is not None:
        for nid, prov in initial.node_provenance.items():
            s.add_node(nid, prov)
        for eid, prov in initial.edge_provenance.items():
            s.add_edge(eid, prov)
        s.cs.update(initial.cs)
    trace.replay_nodes = sum(1 for p in s.node_provenance.values() if p == "replay")
    trace.replay_edges = s.replay_edge_count()
    _emit(on_step, {"type": "replay", "nodes": trace.replay_nodes,
                    "edges": trace.replay_edges, "seeds": seeds})

    current = seeds[0]  # highest-similarity seed starts the walk
    history = [current]

    if s.edges:
        # replay produced candidate experience: try answering from it before
        # spending any selection calls
        trial = _generate(gateway, store, s, query, scope)
        sufficient = not trial.startswith(INSUFFICIENT_MARKER)
        trace.replay_sufficient = sufficient
        trace.trial_answer = trial
        _emit(on_step, {"type": "trial", "sufficient": sufficient})
        if sufficient:
            return s, trace

    exchange_cap = params.max_hops + params.replay_params().visit_budget * max(1, len(seeds))
    while trace.hops < params.max_hops and trace.select_calls < exchange_cap:
        slots, context = _selection_material(store, s, current, q_hat, params.alpha, history)
        slots["query"] = query
        exchange_index: int | None = None
        try:
            exchange = gateway.complete(PromptKind.SELECT_NODE, slots, scope=scope,
                                        context=context)
            selection = exchange.parsed
            exchange_index = exchange.index
            decision = selection.decision
            target = selection.target_id
        except ParseError:
            # the model kept naming non-offered nodes: fall back to the best seed
            decision = "fallback-backward"
            target = seeds[0]
        trace.select_calls += 1
        trace.loop_ran = True

        if decision == "sufficient":
            step = _step(trace, current, context, "sufficient", None, exchange_index)
            _emit(on_step, {"type": "select", **step.to_dict()})
            return s, trace

        if decision == "forward":
            edge = store.edge_between(current, target)
            if edge is None:  # offered candidates are always adjacent; defensive
                decision, target = "fallback-backward", seeds[0]
            else:
                trace.hops += 1
                s.add_node(target, prov_hop(trace.hops))
                s.add_edge(edge.id, prov_hop(trace.hops))
                if target in store.anchors:
                    s.access_chunk(store, target, prov_hop(trace.hops))
                current = target
                history.append(current)
                step = _step(trace, history[-2], context, "forward", target, exchange_index)
                _emit(on_step, {"type": "select", **step.to_dict()})
                continue

        # backward: re-target within the working set, nothing is removed
        if target not in s.nodes:
            target = seeds[0]
        previous = current
        current = target
        history.append(current)
        step = _step(trace, previous, context, decision, target, exchange_index)
        _emit(on_step, {"type": "select", **step.to_dict()})

    trace.forced_stop = True
    _emit(on_step, {"type": "stop", "hops": trace.hops})
    return s, trace


def _step(trace: TraversalTrace, current: NodeId, context: SelectionContext,
          decision: str, target: NodeId | None, exchange_index: int | None) -> TraceStep:
    step = TraceStep(
        index=len(trace.steps),
        current=current,
        offered_forward=sorted(itertools.chain(context.forward_entities.values(),
                                               context.forward_chunks.values())),
        offered_backward=sorted(itertools.chain(context.backward_entities.values(),
                                                context.backward_chunks.values())),
        decision=decision,
        target=target,
        hop=trace.hops,
        exchange_index=exchange_index,
    )
    trace.steps.append(step)
    return step


def _emit(on_step: StepCallback | None, event: dict) -> None:
    if on_step is not None:
        on_step(event)


# -- full pipeline ---------------------------------------------------------------------

def run_query(store: GraphStore, embedder: Embedder, gateway: LlmGateway, text: str,
              params: TraversalParams, qid: str | None = None,
              on_step: StepCallback | None = None) -> QARecord:
    """plan -> seeds -> replay -> (loop) -> answer -> filter -> memorize.

    Memorization runs only when the expansion loop actually ran; a query
    answered purely by replay leaves the memory untouched.
    """
    qid = qid or uuid.uuid4().hex[:12]
    scope = f"query:{qid}"
    plan = plan_query(gateway, text, params.decomposition_limit, scope)

    if not plan.retrieval_needed:
        reply = _generate(gateway, store, Subgraph(), text, scope)
        trace = TraversalTrace(query=text)
        p, c, _ = gateway.usage_report(scope)
        return QARecord(id=qid, question=text, answer=strip_marker(reply), trace=trace,
                        prompt_tokens=p, completion_tokens=c, no_context=True)

    s: Subgraph | None = None
    traces: list[TraversalTrace] = []
    for subquery in plan.subqueries:
        s, trace = traverse(store, embedder, gateway, subquery, params, scope,
                            initial=s, on_step=on_step)
        traces.append(trace)
    trace = traces[0] if len(traces) == 1 else _merge_traces(text, traces)

    loop_ran = any(t.loop_ran for t in traces)
    if not loop_ran and trace.trial_answer is not None:
        final_answer = strip_marker(trace.trial_answer)  # the replay trial already answered
    else:
        final_answer = answer(gateway, store, s, text, scope)
    _emit(on_step, {"type": "answer", "text": final_answer})

    memorized = False
    if params.memorize and loop_ran:
        for subquery in plan.subqueries:
            marks = _filter_marks(gateway, store, s, subquery, scope)
            memorize(store, s, embedder.embed(subquery), marks)
        memorized = True
        _emit(on_step, {"type": "memorize", "edges": len(s.edges)})

    p, c, _ = gateway.usage_report(scope)
    return QARecord(
        id=qid, question=text, answer=final_answer, trace=trace,
        prompt_tokens=p, completion_tokens=c, memorized=memorized,
        replay_fraction=s.replay_fraction(),
        subgraph_edges=sorted(s.edges),
        edge_provenance=dict(s.edge_provenance),
    )


def _filter_marks(gateway: LlmGateway, store: GraphStore, s: Subgraph, query: str,
                  scope: str) -> MarkedElements:
    exchange = gateway.complete(PromptKind.FILTER_KG, {
        "query": query,
        "edge_list": render_edge_list(store, s),
        "chunk_summary": render_chunk_summaries(store, s),
    }, scope=scope)
    edge_ids, chunk_nums = exchange.parsed
    return MarkedElements(
        edge_ids=set(edge_ids),
        chunk_ids={f"c{num}" for num in chunk_nums},
    )


def _merge_traces(text: str, traces: list[TraversalTrace]) -> TraversalTrace:
    merged = TraversalTrace(query=text)
    for t in traces:
        merged.seeds.extend(n for n in t.seeds if n not in merged.seeds)
        merged.steps.extend(t.steps)
        merged.hops += t.hops
        merged.select_calls += t.select_calls
        merged.replay_nodes += t.replay_nodes
        merged.replay_edges += t.replay_edges
        merged.loop_ran = merged.loop_ran or t.loop_ran
        merged.forced_stop = merged.forced_stop or t.forced_stop
    merged.trial_answer = traces[-1].trial_answer
    merged.replay_sufficient = traces[-1].replay_sufficient
    for i, step in enumerate(merged.steps):
        step.index = i
    return merged
