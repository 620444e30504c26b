"""Committed desk-scale fixtures: a 12-chunk story and a 6-document multi-hop
corpus, each with QA files and the answer keys that drive the offline stack."""

import json
from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(name)))


def load_key_config(name: str) -> dict:
    return json.loads(fixture_path(name).read_text(encoding="utf-8"))


def offline_bundle(corpus: str = "multihop", dim: int = 64):
    """(documents, qa items, offline stack, chunk_tokens) for a fixture corpus."""
    from ..builder import load_corpus
    from ..evalharness import load_qa
    from ..mockstack import OfflineStack

    docs = load_corpus(fixture_path(f"{corpus}_corpus.jsonl"))
    qa = load_qa(fixture_path(f"{corpus}_qa.jsonl"))
    keys = load_key_config(f"{corpus}_keys.json")
    stack = OfflineStack.from_key_file(fixture_path(f"{corpus}_keys.json"), dim=dim)
    return docs, qa, stack, int(keys.get("chunk_tokens", 750))
