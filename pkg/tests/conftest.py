import numpy as np
import pytest

from kgmemo.graph import EdgeKind, GraphStore, Chunk


def build_offline(corpus: str = "multihop"):
    """Build a fixture corpus with the offline stack; returns
    (store, stack, gateway, qa_items, params)."""
    from kgmemo.builder import build
    from kgmemo.config import EngineConfig
    from kgmemo.fixtures import offline_bundle
    from kgmemo.llm import LlmGateway
    from kgmemo.traversal import TraversalParams

    docs, qa, stack, chunk_tokens = offline_bundle(corpus)
    config = EngineConfig(chunk_tokens=chunk_tokens)
    config.embedding.dim = stack.embedder.dim
    gateway = LlmGateway(stack.backend)
    store, report = build(docs, config, stack.embedder, gateway)
    stack.bind(store)
    return store, stack, gateway, qa, TraversalParams()


def unit(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim)
    v[i] = 1.0
    return v


def make_entity_graph(dim: int, names_and_vecs: list[tuple[str, np.ndarray]],
                      synonym_threshold: float = 0.7) -> tuple[GraphStore, dict[str, str]]:
    """Graph of entity nodes only; returns the store and name -> node id map."""
    g = GraphStore(dim=dim, synonym_threshold=synonym_threshold)
    ids = {}
    for name, vec in names_and_vecs:
        ids[name] = g.upsert_entity(name, vec, synonym_threshold=1.0)
    return g, ids


def add_anchor_with_chunk(g: GraphStore, title: str, vec: np.ndarray,
                          text: str = "", doc_id: str = "doc", ordinal: int = 0) -> str:
    chunk = Chunk(id="", text=text or title, summary=title, token_count=len(text.split()),
                  doc_id=doc_id, ordinal=ordinal)
    return g.add_anchor(title, vec, chunk)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
