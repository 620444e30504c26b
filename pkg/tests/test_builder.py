"""Corpus build pipeline: chunking exactness, extraction contracts, assembly
structure, ablation, determinism."""

import json

import pytest

from kgmemo.builder import (
    BuildAborted,
    Document,
    build,
    chunk_text,
    extract_entities,
    extract_relations,
    load_corpus,
)
from kgmemo.config import EngineConfig
from kgmemo.errors import InvalidArgument, ProviderError
from kgmemo.graph import EdgeKind
from kgmemo.llm import LlmGateway, ScriptedLlm
from kgmemo.mockstack import OfflineStack
from kgmemo.prompts import PromptKind
from kgmemo.tokenizer import count_tokens


def words(n: int, prefix: str = "w") -> str:
    return " ".join(f"{prefix}{i}" for i in range(n))


# -- chunk_text -----------------------------------------------------------------

def test_chunk_split_arithmetic():
    doc = Document(doc_id="d", title="", text=words(1500))
    chunks = chunk_text(doc, 750)
    assert len(chunks) == 2
    assert [c.token_count for c in chunks] == [750, 750]
    assert [c.ordinal for c in chunks] == [0, 1]


def test_chunk_concatenation_recovers_body_exactly():
    text = "One two, three!  Four\n\nfive six. Seven eight nine ten eleven."
    doc = Document(doc_id="d", title="", text=text)
    chunks = chunk_text(doc, 4)
    assert "".join(c.text for c in chunks) == text
    for c in chunks:
        assert count_tokens(c.text) <= 4


def test_chunk_short_doc_is_single_chunk():
    doc = Document(doc_id="d", title="", text="tiny body.")
    chunks = chunk_text(doc, 750)
    assert len(chunks) == 1
    assert chunks[0].text == "tiny body."


def test_chunk_rejects_bad_size():
    doc = Document(doc_id="d", title="", text="text")
    with pytest.raises(InvalidArgument):
        chunk_text(doc, 0)


def test_empty_document_rejected_upfront():
    with pytest.raises(InvalidArgument):
        Document(doc_id="d", title="", text="   ")


# -- extraction contracts ----------------------------------------------------------

def fake_chunk(text: str):
    from kgmemo.graph import Chunk

    return Chunk(id="c0", text=text, summary="", token_count=count_tokens(text),
                 doc_id="d", ordinal=0)


def test_extract_entities_dedup_and_conjunction_filter():
    backend = ScriptedLlm().enqueue(
        PromptKind.EXTRACT_ENTITIES, '["a", "a", "salt and pepper", "b", "A"]')
    got = extract_entities(LlmGateway(backend), fake_chunk("text"))
    assert got == ["a", "b"]  # dupes (case-insensitive) and conjunctions gone


def test_extract_entities_keeps_android():
    # the conjunction rule rejects standalone words, not substrings
    backend = ScriptedLlm().enqueue(PromptKind.EXTRACT_ENTITIES, '["android", "brand"]')
    got = extract_entities(LlmGateway(backend), fake_chunk("text"))
    assert got == ["android", "brand"]


def test_extract_relations_drops_unknown_endpoints():
    backend = ScriptedLlm().enqueue(
        PromptKind.EXTRACT_RELATIONS,
        '[["a", "a links b.", "b"], ["ghost", "ghost links b.", "b"]]')
    kept, dropped = extract_relations(LlmGateway(backend), fake_chunk("text"), ["a", "b"])
    assert kept == [("a", "a links b.", "b")]
    assert dropped == 1


# -- full build ---------------------------------------------------------------------

STORY = (
    "Aldous Vane founded the Ember Foundry. The Ember Foundry sits in Veldt Harbor. "
    "Sailors trust the Ember Foundry."
)
BIO = (
    "Aldous Vane was born in Quarry Hollow. Aldous Vane studied under Mira Senn."
)
LEXICON = ["Aldous Vane", "Ember Foundry", "Veldt Harbor", "Quarry Hollow", "Mira Senn"]


def build_fixture(skeleton=True, chunk_tokens=18):
    stack = OfflineStack(lexicon=LEXICON, keys=[])
    config = EngineConfig(chunk_tokens=chunk_tokens, skeleton=skeleton)
    config.embedding.dim = stack.embedder.dim
    docs = [Document(doc_id="d1", title="foundry", text=STORY),
            Document(doc_id="d2", title="bio", text=BIO)]
    gateway = LlmGateway(stack.backend)
    store, report = build(docs, config, stack.embedder, gateway)
    stack.bind(store)
    return store, report, stack


def test_build_structure_counts():
    store, report, _ = build_fixture()
    # d1 is 21 tokens -> 2 chunks at 18; d2 is 15 tokens -> 1 chunk
    assert report.chunk_count == 3
    assert len(store.anchors) == 3
    assert len(store.chunks) == 3
    counts = store.edge_counts()
    assert counts["AnchorChunk"] == 3
    assert counts["AnchorAnchor"] == 1  # chain within d1 only
    store.check_integrity()


def test_build_merges_same_entity_across_chunks():
    store, report, _ = build_fixture()
    vane = [e for e in store.entities.values() if e.name == "Aldous Vane"]
    assert len(vane) == 1
    # one occurrence edge per chunk whose extraction named the entity
    anchors_of_vane = [
        edge for edge, _ in store.neighbors(vane[0].id)
        if edge.kind == EdgeKind.ENTITY_ANCHOR
    ]
    assert len(anchors_of_vane) >= 2
    assert report.entities_post_merge <= report.entities_pre_merge


def test_build_entity_entity_edges_only_from_cooccurrence():
    store, _, _ = build_fixture()
    for edge in store.edges.values():
        if edge.kind != EdgeKind.ENTITY_ENTITY:
            continue
        a_name = store.entities[edge.a].name.lower()
        b_name = store.entities[edge.b].name.lower()
        assert a_name in edge.label.lower() or b_name in edge.label.lower()
        # both endpoints appear in some chunk together
        assert any(
            a_name in chunk.text.lower() and b_name in chunk.text.lower()
            for chunk in store.chunks.values()
        )


def test_build_no_skeleton_removes_only_chain_edges():
    with_sk, _, _ = build_fixture(skeleton=True)
    without, _, _ = build_fixture(skeleton=False)
    c_with = with_sk.edge_counts()
    c_without = without.edge_counts()
    assert c_without["AnchorAnchor"] == 0
    assert c_with["AnchorAnchor"] == 1
    for kind in ("EntityEntity", "EntityAnchor", "AnchorChunk"):
        assert c_with[kind] == c_without[kind]


def test_build_deterministic_rebuild():
    from kgmemo.graph import snapshot_to_dict

    a, _, _ = build_fixture()
    b, _, _ = build_fixture()
    assert json.dumps(snapshot_to_dict(a)) == json.dumps(snapshot_to_dict(b))


def test_build_report_token_ratio_and_memories_zeroed():
    store, report, _ = build_fixture()
    assert report.source_tokens == count_tokens(STORY) + count_tokens(BIO)
    assert report.build_tokens > 0
    assert report.token_ratio == report.build_tokens / report.source_tokens
    assert all(e.memory.norm() == 0.0 for e in store.edges.values())
    assert report.completed


def test_build_provider_failure_carries_partial_report():
    backend = ScriptedLlm()  # no handlers: first summarize call explodes
    config = EngineConfig()
    from kgmemo.embedding import MockEmbedder

    embedder = MockEmbedder(dim=16)
    config.embedding.dim = 16
    with pytest.raises(BuildAborted) as err:
        build([Document(doc_id="d", title="", text="some text here")],
              config, embedder, LlmGateway(backend))
    assert err.value.report.completed is False
    assert err.value.report.error


def test_load_corpus_jsonl_and_plain(tmp_path):
    jsonl = tmp_path / "c.jsonl"
    jsonl.write_text('{"doc_id": "a", "title": "t", "text": "body one"}\n'
                     '{"doc_id": "b", "text": "body two"}\n', encoding="utf-8")
    docs = load_corpus(jsonl)
    assert [d.doc_id for d in docs] == ["a", "b"]
    plain = tmp_path / "story.txt"
    plain.write_text("plain body", encoding="utf-8")
    docs = load_corpus(plain)
    assert docs[0].doc_id == "story"
    assert docs[0].text == "plain body"
