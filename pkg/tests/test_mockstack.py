"""Offline stack behaviors: key files, path resolution, handler rules."""

import json

import pytest

from kgmemo.errors import ProviderError
from kgmemo.graph import EdgeKind, GraphStore
from kgmemo.llm import LlmGateway, SelectionContext
from kgmemo.mockstack import AnswerKey, OfflineStack
from kgmemo.prompts import PromptKind

from conftest import add_anchor_with_chunk, build_offline, unit


def test_from_key_file_loads_everything(tmp_path):
    path = tmp_path / "keys.json"
    path.write_text(json.dumps({
        "lexicon": ["Alpha Site"],
        "no_retrieval": ["hello"],
        "direct_answers": {"hello": "Hi there."},
        "questions": [{"question": "Where is it?", "path": ["Alpha Site"],
                       "answer": "Here.", "evidence": ["somewhere"]}],
    }))
    stack = OfflineStack.from_key_file(path, dim=16)
    assert stack.embedder.dim == 16
    assert stack.key_for("where is it?").answer == "Here."

    gw = LlmGateway(stack.backend)
    split = gw.complete(PromptKind.SPLIT_QUERY, {"query": "hello", "limit": 1})
    assert split.parsed == {"retrieval": False, "subqueries": []}
    answer = gw.complete(PromptKind.GENERATE_ANSWER, {
        "query": "hello", "edge_list": "-", "chunk_summary": "-", "chunk_texts": "-"})
    assert answer.parsed == "Hi there."


def test_extraction_handlers_follow_lexicon_order():
    stack = OfflineStack(lexicon=["Mira Senn", "Lantern Archive"], keys=[])
    gw = LlmGateway(stack.backend)
    ents = gw.complete(PromptKind.EXTRACT_ENTITIES,
                       {"text": "The Lantern Archive was built. Mira Senn runs it."})
    assert ents.parsed == ["Lantern Archive", "Mira Senn"]  # order of appearance
    rels = gw.complete(PromptKind.EXTRACT_RELATIONS, {
        "entity_list": json.dumps(["Lantern Archive", "Mira Senn"]),
        "text": "Mira Senn runs the Lantern Archive. The rain kept falling.",
    })
    assert rels.parsed == [("Mira Senn", "Mira Senn runs the Lantern Archive.",
                            "Lantern Archive")]


def test_resolve_path_node_chunk_markers():
    _, stack, _, _, _ = build_offline("multihop")
    anchor_id = stack.resolve_path_node("chunk:born in Quarry Hollow")
    assert anchor_id is not None
    assert anchor_id in stack.store.anchors
    assert stack.resolve_path_node("Aldous Vane") in stack.store.entities
    assert stack.resolve_path_node("chunk:no such marker anywhere") is None
    assert stack.resolve_path_node("Nobody Here") is None


def test_select_handler_requires_key_and_context():
    stack = OfflineStack(lexicon=[], keys=[])
    store = GraphStore(dim=16)
    store.upsert_entity("x", unit(16, 0))
    stack.bind(store)
    with pytest.raises(ProviderError):
        stack.backend.complete(PromptKind.SELECT_NODE, "p", {"query": "unknown"}, None)


def test_answer_handler_demands_all_evidence():
    stack = OfflineStack(lexicon=[], keys=[AnswerKey(
        question="Q?", answer="A.", evidence=["first clue", "second clue"])])
    gw = LlmGateway(stack.backend)
    partial = gw.complete(PromptKind.GENERATE_ANSWER, {
        "query": "Q?", "edge_list": "-", "chunk_summary": "has first clue only",
        "chunk_texts": "-"})
    assert str(partial.parsed).startswith("[INSUFFICIENT]")
    full = gw.complete(PromptKind.GENERATE_ANSWER, {
        "query": "Q?", "edge_list": "-", "chunk_summary": "has first clue",
        "chunk_texts": "and the second clue too"})
    assert full.parsed == "A."


def test_filter_handler_marks_matching_edges_and_chunks():
    stack = OfflineStack(lexicon=[], keys=[AnswerKey(
        question="Q?", answer="A.", useful_edges=["guards the ledger"],
        useful_chunks=["hidden vault"])])
    store = GraphStore(dim=16)
    a = store.upsert_entity("keeper", unit(16, 0))
    b = store.upsert_entity("ledger", unit(16, 1))
    eid = store.add_edge(a, b, EdgeKind.ENTITY_ENTITY, "keeper guards the ledger.")
    anchor = add_anchor_with_chunk(store, "vault passage", unit(16, 2),
                                   text="within the hidden vault it lies")
    stack.bind(store)
    gw = LlmGateway(stack.backend)
    chunk_num = store.anchors[anchor].chunk_id[1:]
    marks = gw.complete(PromptKind.FILTER_KG, {
        "query": "Q?",
        "edge_list": f"edge {eid}: keeper guards the ledger.",
        "chunk_summary": f"chunk {chunk_num}: vault passage",
    })
    edge_ids, chunk_ids = marks.parsed
    assert edge_ids == [eid]
    assert chunk_ids == [int(chunk_num)]


def test_judge_handler_normalizes():
    stack = OfflineStack(lexicon=[], keys=[])
    gw = LlmGateway(stack.backend)
    same = gw.complete(PromptKind.JUDGE_ANSWER, {
        "question": "q", "reference_answer": "The  North Mole",
        "generated_output": "the north mole"})
    assert same.parsed is True
