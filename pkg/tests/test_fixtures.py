"""Regression guards for the committed fixture corpora: the margins the
acceptance suite leans on must survive any regeneration."""

import itertools

import pytest

from kgmemo.embedding import cosine
from kgmemo.fixtures import load_key_config, offline_bundle
from kgmemo.mockstack import AnswerKey

from conftest import build_offline


@pytest.mark.parametrize("corpus,expected_chunks", [("multihop", 6), ("story", 12)])
def test_chunk_counts(corpus, expected_chunks):
    store, stack, gateway, qa, params = build_offline(corpus)
    assert len(store.chunks) == expected_chunks
    store.check_integrity()


def test_story_skeleton_is_a_simple_chain():
    store, _, _, _, _ = build_offline("story")
    # n chunks -> n-1 chain edges forming one simple path
    assert store.edge_counts()["AnchorAnchor"] == len(store.chunks) - 1
    heads = [a for a in store.anchors.values() if a.prev is None]
    assert len(heads) == 1
    seen = []
    cursor = heads[0]
    while cursor is not None:
        seen.append(cursor.id)
        cursor = store.anchors[cursor.next] if cursor.next else None
    assert len(seen) == len(store.anchors) == len(set(seen))


@pytest.mark.parametrize("corpus", ["multihop", "story"])
def test_lexicon_stays_below_synonym_threshold(corpus):
    _, stack, _, _, _ = build_offline(corpus)
    lexicon = load_key_config(f"{corpus}_keys.json")["lexicon"]
    for a, b in itertools.combinations(lexicon, 2):
        sim = cosine(stack.embedder.embed(a), stack.embedder.embed(b))
        assert sim < 0.65, f"{a!r} ~ {b!r} = {sim:.3f}"


@pytest.mark.parametrize("corpus", ["multihop", "story"])
def test_golden_paths_resolve_and_connect(corpus):
    store, stack, gateway, qa, params = build_offline(corpus)
    keys = load_key_config(f"{corpus}_keys.json")["questions"]
    for key_data in keys:
        key = AnswerKey.from_dict(key_data)
        path_ids = [stack.resolve_path_node(entry) for entry in key.path]
        assert None not in path_ids, key.path
        for a, b in zip(path_ids, path_ids[1:]):
            assert store.edge_between(a, b) is not None, (key.question, a, b)


def test_multihop_variant_links_are_consistent():
    docs, qa, stack, chunk_tokens = offline_bundle("multihop")
    ids = {q.id for q in qa}
    for item in qa:
        if item.similar_of:
            assert item.similar_of in ids
        if item.different_of:
            assert item.different_of in ids
    assert any(q.similar_of for q in qa)
    assert any(q.different_of for q in qa)
