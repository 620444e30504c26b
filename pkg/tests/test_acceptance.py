"""Acceptance criteria, one test per criterion.

Each test prints one PASS line when its assertions hold (run with -s to see
them); tolerances and runtime budgets are asserted, not just observed.
Expected constants come from independent closed-form evaluation (math module
/ scalar recurrence), never from the code under test.
"""

import math
import time

import numpy as np
import pytest

from kgmemo.builder import Document, build
from kgmemo.config import EngineConfig
from kgmemo.embedding import StaticEmbedder, cosine, normalize
from kgmemo.evalharness import ProtocolSpec, path_similarity, run_protocol
from kgmemo.graph import Chunk, EdgeKind, GraphStore
from kgmemo.llm import LlmGateway
from kgmemo.memory import (
    capacity_bound,
    capacity_check,
    delta_norm,
    enhance_vector,
    penalize_vector,
)
from kgmemo.mockstack import AnswerKey, OfflineStack
from kgmemo.traversal import TraversalParams, run_query

from conftest import build_offline, unit

TWO_OVER_PI = 2.0 / math.pi
LAMBDA_DEFAULT = 0.55
SWEEP_DIMS = (12, 24, 48, 96, 192, 384, 768)


def ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


# 1 ---------------------------------------------------------------------------

def test_weight_function_exactness():
    started = time.monotonic()
    assert delta_norm(0.0) == TWO_OVER_PI
    assert abs(delta_norm(1.0)) < 1e-15
    # oracle: (2/pi) * cos(pi/4) = sqrt(2)/pi
    assert delta_norm(0.5) == pytest.approx(math.sqrt(2.0) / math.pi, abs=1e-12)
    assert delta_norm(0.5) == pytest.approx(0.450158, abs=1e-6)
    xs = np.linspace(0.0, 1.0, 1000)
    ys = [delta_norm(float(x)) for x in xs]
    assert all(a > b for a, b in zip(ys, ys[1:]))
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    ok(f"weight-function exactness ({elapsed:.3f}s)")


# 2 ---------------------------------------------------------------------------

def test_fast_wakeup_crosses_replay_threshold():
    q = unit(32, 3)
    v = enhance_vector(np.zeros(32), q)
    projection = float(np.dot(v, q))
    assert projection == TWO_OVER_PI  # exact: delta(0) * 1
    assert projection > LAMBDA_DEFAULT
    ok("fast-wakeup threshold crossing (2/pi > 0.55)")


# 3 ---------------------------------------------------------------------------

def scalar_recurrence(steps: int) -> list[float]:
    norms = [0.0]
    for _ in range(steps):
        n = norms[-1]
        norms.append(n + (2.0 / math.pi) * math.cos(math.pi / 2.0 * n))
    return norms


def test_enhancement_fixed_point_against_scalar_oracle():
    oracle = scalar_recurrence(6)
    assert oracle[1] == pytest.approx(0.636620, abs=1e-6)
    assert oracle[2] == pytest.approx(0.98059, abs=1e-5)  # spec display, 5 decimals
    assert abs(oracle[4] - 1.0) < 1e-4
    v = np.zeros(48)
    q = normalize(np.arange(1.0, 49.0))
    for k in range(1, 7):
        v = enhance_vector(v, q)
        assert float(np.linalg.norm(v)) == pytest.approx(oracle[k], abs=1e-9)
    ok("enhancement fixed point (recurrence oracle, 1e-9/step)")


# 4 ---------------------------------------------------------------------------

def test_penalize_orthogonality_ten_thousand_pairs():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(10_000):
        v = rng.normal(size=64) * rng.uniform(0.0, 1.1)
        q = normalize(rng.normal(size=64))
        out = penalize_vector(v, q)
        orth_before = v - np.dot(v, q) * q
        orth_after = out - np.dot(out, q) * q
        worst = max(worst, float(np.max(np.abs(orth_after - orth_before))))
    assert worst <= 1e-12
    ok(f"penalize orthogonality (worst drift {worst:.2e})")


# 5 ---------------------------------------------------------------------------

def test_norm_self_regulation_hundred_thousand_steps():
    started = time.monotonic()
    rng = np.random.default_rng(7)
    v = np.zeros(64)
    worst = 0.0
    for i in range(100_000):
        q = normalize(rng.normal(size=64))
        if rng.random() < 0.5:
            v = enhance_vector(v, q)
        else:
            v = penalize_vector(v, q)
        worst = max(worst, float(np.linalg.norm(v)))
    elapsed = time.monotonic() - started
    assert worst <= 1.0 + 1e-6
    assert elapsed < 10.0
    ok(f"norm self-regulation over 1e5 steps (max {worst:.9f}, {elapsed:.1f}s)")


# 6 ---------------------------------------------------------------------------

def sample_cap_queries(rng, dim, count, lam, frac):
    radius = frac * capacity_bound(lam) / 2.0
    center = normalize(rng.normal(size=dim))
    out = []
    for _ in range(count):
        direction = rng.normal(size=dim)
        direction -= np.dot(direction, center) * center
        angle = rng.uniform(0.0, radius)
        out.append(math.cos(angle) * center + math.sin(angle) * normalize(direction))
    return out


def test_capacity_bound_and_verifier():
    started = time.monotonic()
    assert capacity_bound(0.775) == pytest.approx(math.acos(0.6), abs=2e-3)
    successes = 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        queries = sample_cap_queries(rng, 128, 16, LAMBDA_DEFAULT, 0.95)
        result = capacity_check(queries, LAMBDA_DEFAULT, update_budget=60)
        if result.success:
            successes += 1
            # the analytic mean-direction witness must validate every success
            assert result.witness_min_dot > LAMBDA_DEFAULT
    elapsed = time.monotonic() - started
    assert successes == 50
    assert elapsed < 30.0
    ok(f"capacity bound + verifier 50/50 ({elapsed:.1f}s)")


# 7 ---------------------------------------------------------------------------

def test_replay_cost_collapse_on_fixture_corpus():
    started = time.monotonic()
    store, stack, gateway, qa, params = build_offline("multihop")
    origins = [q for q in qa if q.is_origin]
    metrics = run_protocol(store, stack.embedder, gateway, origins,
                           ProtocolSpec(mode="same", turns=1), params)
    cold, warm = metrics.turns
    for record in cold.records:
        assert record.trace.select_calls >= 3
    for record in warm.records:
        assert record.trace.select_calls == 0
    assert warm.avg_tokens <= 0.5 * cold.avg_tokens
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    ok(f"replay cost collapse ({cold.avg_tokens:.0f} -> {warm.avg_tokens:.0f} tokens, "
       f"{cold.select_calls} -> {warm.select_calls} selects, {elapsed:.1f}s)")


# 8 ---------------------------------------------------------------------------

def nine_node_fixture():
    """Two branches off a hub: a wrong one (two hops to a passage) carrying
    pre-seeded memory, and a correct one (one hop to the answer passage)."""
    dim = 16
    question = "which branch holds the real answer?"
    table = {question: unit(dim, 0)}
    store = GraphStore(dim=dim)
    names = ["hub", "wrong one", "wrong two", "right one", "dangler"]
    ids = {}
    for i, name in enumerate(names):
        table[name] = unit(dim, i) if name != "hub" else unit(dim, 0)
        ids[name] = store.upsert_entity(name, table[name], synonym_threshold=1.0)
    table["wrong passage"] = unit(dim, 8)
    table["right passage"] = unit(dim, 9)
    wrong_anchor = store.add_anchor("wrong passage", table["wrong passage"], Chunk(
        id="", text="The decoy ledger sits here.", summary="wrong passage",
        token_count=6, doc_id="w", ordinal=0))
    right_anchor = store.add_anchor("right passage", table["right passage"], Chunk(
        id="", text="The true ledger rests in the vault.", summary="right passage",
        token_count=8, doc_id="r", ordinal=0))
    e_hub_w1 = store.add_edge(ids["hub"], ids["wrong one"], EdgeKind.ENTITY_ENTITY, "hub-w1.")
    e_w1_w2 = store.add_edge(ids["wrong one"], ids["wrong two"], EdgeKind.ENTITY_ENTITY, "w1-w2.")
    e_w2_aw = store.add_edge(ids["wrong two"], wrong_anchor, EdgeKind.ENTITY_ANCHOR)
    e_hub_r1 = store.add_edge(ids["hub"], ids["right one"], EdgeKind.ENTITY_ENTITY, "hub-r1.")
    e_r1_ar = store.add_edge(ids["right one"], right_anchor, EdgeKind.ENTITY_ANCHOR)
    e_hub_d = store.add_edge(ids["hub"], ids["dangler"], EdgeKind.ENTITY_ENTITY, "hub-d.")
    wrong_chunk_edge = store.edge_between(wrong_anchor, store.anchors[wrong_anchor].chunk_id).id
    right_chunk_edge = store.edge_between(right_anchor, store.anchors[right_anchor].chunk_id).id
    assert len(store.entities) + len(store.anchors) + len(store.chunks) == 9

    key = AnswerKey(
        question=question,
        path=["hub", "right one", "chunk:true ledger"],
        answer="In the vault.",
        evidence=["true ledger rests in the vault"],
        useful_chunks=["true ledger"],
    )
    stack = OfflineStack(lexicon=[], keys=[key], embedder=StaticEmbedder(table, dim=dim))
    stack.bind(store)
    wrong_edges = [e_hub_w1, e_w1_w2, e_w2_aw, wrong_chunk_edge]
    right_edges = [e_hub_r1, e_r1_ar, right_chunk_edge]
    return store, stack, question, wrong_edges, right_edges, e_hub_d


def test_self_correction_scenario():
    store, stack, question, wrong_edges, right_edges, dangler_edge = nine_node_fixture()
    q_vec = stack.embedder.embed(question)
    # a prior traversal memorized the wrong branch
    for eid in wrong_edges:
        store.edges[eid].memory.v = enhance_vector(store.edges[eid].memory.v, q_vec)
    gateway = LlmGateway(stack.backend)
    params = TraversalParams(seed_count=1)

    first = run_query(store, stack.embedder, gateway, question, params, qid="fix1")
    assert first.trace.replay_sufficient is False  # wrong branch replayed, then rejected
    assert first.answer == "In the vault."
    assert first.memorized

    # penalized: projection dropped by exactly delta(2/pi) * 2/pi (closed form)
    expected_penalized = TWO_OVER_PI * (1.0 - (2.0 / math.pi) * math.cos(1.0))
    for eid in wrong_edges:
        proj = float(np.dot(q_vec, store.edges[eid].memory.v))
        assert proj == pytest.approx(expected_penalized, abs=1e-12)
        assert proj < TWO_OVER_PI
    for eid in right_edges:
        proj = float(np.dot(q_vec, store.edges[eid].memory.v))
        assert proj == pytest.approx(TWO_OVER_PI, abs=1e-12)
    assert store.edges[dangler_edge].memory.norm() == 0.0

    second = run_query(store, stack.embedder, gateway, question, params, qid="fix2")
    assert second.trace.select_calls == 0
    assert second.trace.replay_sufficient is True
    replayed = set(second.subgraph_edges)
    assert set(right_edges) <= replayed
    assert not (set(wrong_edges) & replayed)  # the penalized branch stays out
    ok("self-correction: wrong branch penalized and excluded from replay")


# 9 ---------------------------------------------------------------------------

def test_different_query_resumption():
    # cold baseline for the subtly different question
    store_cold, stack_cold, gateway_cold, qa, params = build_offline("multihop")
    diff = next(q for q in qa if q.id == "mh1d")
    cold = run_query(store_cold, stack_cold.embedder, gateway_cold, diff.question,
                     TraversalParams(), qid="cold")
    assert cold.answer == diff.answer

    store, stack, gateway, qa, params = build_offline("multihop")
    for origin_id in ("mh1", "mh2"):
        origin = next(q for q in qa if q.id == origin_id)
        record = run_query(store, stack.embedder, gateway, origin.question,
                           TraversalParams(), qid=origin_id)
        assert record.memorized
    warm = run_query(store, stack.embedder, gateway, diff.question,
                     TraversalParams(), qid="warm")
    assert warm.trace.replay_sufficient is False  # replay alone could not answer
    assert warm.trace.replay_edges > 0
    assert warm.trace.loop_ran
    assert warm.answer == diff.answer
    assert warm.trace.select_calls < cold.trace.select_calls
    ok(f"different-query resumption (selects {cold.trace.select_calls} cold -> "
       f"{warm.trace.select_calls} resumed)")


# 10 --------------------------------------------------------------------------

def math_properties_at_dim(dim: int) -> None:
    rng = np.random.default_rng(dim)
    q = normalize(rng.normal(size=dim))
    # fast wakeup
    v = enhance_vector(np.zeros(dim), q)
    assert float(np.dot(v, q)) == pytest.approx(TWO_OVER_PI, abs=1e-12)
    # recurrence tracking
    oracle = scalar_recurrence(4)
    v = np.zeros(dim)
    for k in range(1, 5):
        v = enhance_vector(v, q)
        assert float(np.linalg.norm(v)) == pytest.approx(oracle[k], abs=1e-9)
    # penalize orthogonality
    for _ in range(200):
        w = rng.normal(size=dim) * rng.uniform(0, 1.1)
        p = normalize(rng.normal(size=dim))
        out = penalize_vector(w, p)
        drift = np.max(np.abs((out - np.dot(out, p) * p) - (w - np.dot(w, p) * p)))
        assert float(drift) <= 1e-12
    # norm self-regulation
    v = np.zeros(dim)
    for _ in range(2000):
        p = normalize(rng.normal(size=dim))
        v = enhance_vector(v, p) if rng.random() < 0.5 else penalize_vector(v, p)
        assert np.linalg.norm(v) <= 1.0 + 1e-6


def capacity_success_rate(dim: int, trials: int = 20) -> float:
    successes = 0
    for seed in range(trials):
        rng = np.random.default_rng(5000 + seed)  # matched seeds across dims
        queries = sample_cap_queries(rng, dim, 16, LAMBDA_DEFAULT, 0.95)
        if capacity_check(queries, LAMBDA_DEFAULT, update_budget=60).success:
            successes += 1
    return successes / trials


def test_dimension_truncation_robustness():
    for dim in SWEEP_DIMS:
        math_properties_at_dim(dim)
    rate96 = capacity_success_rate(96)
    rate768 = capacity_success_rate(768)
    assert abs(rate96 - rate768) <= 0.10 + 1e-9
    ok(f"dimension sweep {SWEEP_DIMS} (capacity rate d=96 {rate96:.2f} "
       f"vs d=768 {rate768:.2f})")


# 11 --------------------------------------------------------------------------

def structural_corpus():
    body = " ".join(f"tok{i}" for i in range(120))  # 120 tokens -> 3 chunks of 40
    return [Document(doc_id="da", title="a", text=body),
            Document(doc_id="db", title="b", text=body)]


def test_structural_build_checks():
    for skeleton, chain_edges in ((True, 4), (False, 0)):
        stack = OfflineStack(lexicon=[], keys=[])
        config = EngineConfig(chunk_tokens=40, skeleton=skeleton)
        config.embedding.dim = stack.embedder.dim
        store, report = build(structural_corpus(), config, stack.embedder,
                              LlmGateway(stack.backend))
        counts = store.edge_counts()
        assert len(store.anchors) == 6
        assert counts["AnchorChunk"] == 6
        assert counts["AnchorAnchor"] == chain_edges
        assert counts["EntityEntity"] == 0 and counts["EntityAnchor"] == 0
    ok("structural build checks (6 anchors, 4 chain edges, ablation exact)")


# 12 --------------------------------------------------------------------------

def test_path_consistency_metric():
    assert path_similarity({1, 2, 3}, {1, 2, 3}) == 1.0
    assert path_similarity({1, 2}, {3, 4}) == 0.0
    assert path_similarity({1, 2, 3}, {2, 3, 4}) == 0.5
    store, stack, gateway, qa, params = build_offline("multihop")
    metrics = run_protocol(store, stack.embedder, gateway, qa,
                           ProtocolSpec(mode="similar", turns=1), params)
    final = metrics.turns[-1]
    assert final.label == "similar"
    assert final.s_avg is not None and 0.0 <= final.s_avg <= 1.0
    assert "s_avg" in metrics.to_csv().splitlines()[0]
    ok(f"path-consistency metric (S_avg={final.s_avg:.3f} on the similar run)")
