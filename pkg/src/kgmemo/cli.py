"""Command-line interface: build a graph, query it (locally or against a
running service), run evaluation protocols, verify the memory-capacity bound,
and launch the HTTP service.

Offline runs wire the scripted provider stack from an answer-key file; the
committed fixture corpora are available by name for quick demos:

    kgmemo build --fixture multihop --out graph.json
    kgmemo query --graph graph.json --keys fixtures:multihop --q "..."
"""

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import fixtures as fixture_pkg
from .builder import Document, build, load_corpus
from .config import EngineConfig, load_config
from .embedding import TruncatingEmbedder, build_embedder, normalize, truncate
from .evalharness import ProtocolSpec, load_qa, run_protocol
from .graph import GraphStore, load_snapshot, save_snapshot
from .llm import LlmGateway, build_backend
from .memory import capacity_bound, capacity_check
from .mockstack import OfflineStack
from .traversal import TraversalParams, run_query


def _resolve_keys(keys: str) -> Path:
    """Accept a path or a fixtures:<name> reference."""
    if keys.startswith("fixtures:"):
        return fixture_pkg.fixture_path(f"{keys.split(':', 1)[1]}_keys.json")
    return Path(keys)


def _offline_stack(keys: str | None, dim: int) -> OfflineStack | None:
    if keys is None:
        return None
    return OfflineStack.from_key_file(_resolve_keys(keys), dim=dim)


def _providers(config: EngineConfig, keys: str | None):
    """(embedder, gateway, stack) for the configured providers."""
    stack = _offline_stack(keys, config.embedding.dim)
    if stack is None and config.llm.provider == "scripted" and config.llm.answer_key_path:
        stack = OfflineStack.from_key_file(config.llm.answer_key_path,
                                           dim=config.embedding.dim)
    if stack is not None:
        return stack.embedder, LlmGateway(stack.backend), stack
    return build_embedder(config.embedding), LlmGateway(build_backend(config.llm)), None


def _load_graph(path: str, config: EngineConfig, stack: OfflineStack | None) -> GraphStore:
    store = load_snapshot(path, expected_dim=config.embedding.effective_dim)
    if stack is not None:
        stack.bind(store)
    return store


@click.group()
def main():
    """Knowledge-graph retrieval with edge-memory replay."""


@main.command("build")
@click.option("--corpus", type=click.Path(exists=True), help="plain text or JSONL corpus")
@click.option("--fixture", type=click.Choice(["multihop", "story"]),
              help="use a committed fixture corpus instead of --corpus")
@click.option("--keys", help="answer-key file (or fixtures:<name>) for the scripted stack")
@click.option("--chunk-tokens", default=None, type=int, show_default="750")
@click.option("--synonym-threshold", default=None, type=float, show_default="0.7")
@click.option("--no-skeleton", is_flag=True, help="drop the anchor chain (ablation)")
@click.option("--dim", default=None, type=int, help="embedding dimension (mock providers)")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="snapshot output path")
def build_cmd(corpus, fixture, keys, chunk_tokens, synonym_threshold, no_skeleton,
              dim, config_path, out):
    """Build a graph snapshot from a corpus."""
    config = load_config(config_path)
    if dim:
        config.embedding.dim = dim
    if chunk_tokens is not None:
        config.chunk_tokens = chunk_tokens
    if synonym_threshold is not None:
        config.synonym_threshold = synonym_threshold
    if no_skeleton:
        config.skeleton = False
    if fixture:
        docs = load_corpus(fixture_pkg.fixture_path(f"{fixture}_corpus.jsonl"))
        keys = keys or f"fixtures:{fixture}"
        key_cfg = fixture_pkg.load_key_config(f"{fixture}_keys.json")
        if chunk_tokens is None:
            config.chunk_tokens = int(key_cfg.get("chunk_tokens", config.chunk_tokens))
    elif corpus:
        docs = load_corpus(corpus)
    else:
        raise click.UsageError("provide --corpus or --fixture")
    embedder, gateway, _ = _providers(config, keys)
    store, report = build(docs, config, embedder, gateway)
    save_snapshot(store, out)
    click.echo(json.dumps(report.to_dict(), indent=2))
    click.echo(f"snapshot written to {out}", err=True)


@main.command("query")
@click.option("--graph", "graph_path", type=click.Path(exists=True))
@click.option("--q", "question", required=True)
@click.option("--keys", help="answer-key file (or fixtures:<name>) for the scripted stack")
@click.option("--max-hops", default=None, type=int, show_default="10")
@click.option("--seeds", default=None, type=int, show_default="2")
@click.option("--lambda", "lam", default=None, type=float, show_default="0.55")
@click.option("--alpha", default=None, type=float, show_default="0.1")
@click.option("--no-memorize", is_flag=True)
@click.option("--trace", "trace_path", type=click.Path(), help="write the trace as JSON")
@click.option("--no-save", is_flag=True, help="do not write memory updates back to --graph")
@click.option("--server", help="send the query to a running service instead")
@click.option("--config", "config_path", type=click.Path(exists=True))
def query_cmd(graph_path, question, keys, max_hops, seeds, lam, alpha, no_memorize,
              trace_path, no_save, server, config_path):
    """Answer one question against a snapshot (or a running service)."""
    if server:
        import httpx

        payload = {"q": question, "memorize": not no_memorize}
        if max_hops is not None:
            payload["max_hops"] = max_hops
        if seeds is not None:
            payload["seeds"] = seeds
        resp = httpx.post(f"{server.rstrip('/')}/query", json=payload, timeout=300)
        resp.raise_for_status()
        click.echo(json.dumps(resp.json(), indent=2))
        return
    if not graph_path:
        raise click.UsageError("provide --graph or --server")
    config = load_config(config_path)
    embedder, gateway, stack = _providers(config, keys)
    config.embedding.dim = embedder.dim
    store = _load_graph(graph_path, config, stack)
    params = TraversalParams.from_config(config)
    if max_hops is not None:
        params.max_hops = max_hops
    if seeds is not None:
        params.seed_count = seeds
    if lam is not None:
        params.lam = lam
    if alpha is not None:
        params.alpha = alpha
    params.memorize = not no_memorize
    record = run_query(store, embedder, gateway, question, params)
    if trace_path:
        Path(trace_path).write_text(json.dumps(record.trace.to_dict(), indent=2),
                                    encoding="utf-8")
    if record.memorized and not no_save:
        save_snapshot(store, graph_path)
    click.echo(json.dumps({
        "answer": record.answer,
        "tokens": record.total_tokens,
        "select_calls": record.trace.select_calls,
        "hops": record.trace.hops,
        "replay_edges": record.trace.replay_edges,
        "replay_fraction": record.replay_fraction,
        "memorized": record.memorized,
    }, indent=2))


@main.command("capacity")
@click.option("--lambda", "lam", default=0.55, show_default=True)
@click.option("--dim", default=128, show_default=True)
@click.option("--queries", "n_queries", default=16, show_default=True)
@click.option("--angle-frac", default=0.95, show_default=True,
              help="cap size as a fraction of the capacity bound")
@click.option("--budget", default=60, show_default=True, help="update rounds")
@click.option("--seed", default=7, show_default=True)
@click.option("--finite-dim", is_flag=True, help="use the finite-dimension bound")
@click.option("--out", type=click.Path(), help="CSV output path (default stdout)")
def capacity_cmd(lam, dim, n_queries, angle_frac, budget, seed, finite_dim, out):
    """Numerically verify the memory-capacity bound on a sampled query cap."""
    bound = capacity_bound(lam, dim=dim if finite_dim else None)
    rng = np.random.default_rng(seed)
    radius = angle_frac * bound / 2.0
    center = normalize(rng.normal(size=dim))
    queries = []
    for _ in range(n_queries):
        direction = rng.normal(size=dim)
        direction -= np.dot(direction, center) * center
        angle = rng.uniform(0, radius)
        queries.append(math.cos(angle) * center + math.sin(angle) * normalize(direction))
    result = capacity_check(queries, lam, update_budget=budget)
    lines = ["round,min_dot,max_dot"]
    lines += [f"{r},{lo:.9f},{hi:.9f}" for r, lo, hi in result.history]
    csv_text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(csv_text, encoding="utf-8")
    else:
        click.echo(csv_text, nl=False)
    click.echo(
        f"bound={bound:.6f} rad, success={result.success} in {result.rounds_used} rounds, "
        f"witness_min_dot={result.witness_min_dot:.6f}",
        err=True,
    )
    sys.exit(0 if result.success else 1)


@main.command("eval")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--qa", "qa_path", required=True,
              help="QA JSONL file, or fixtures:<name> for a committed set")
@click.option("--keys", help="answer-key file (or fixtures:<name>) for the scripted stack")
@click.option("--mode", type=click.Choice(["same", "similar", "different", "alternating"]),
              default="same", show_default=True)
@click.option("--turns", default=1, show_default=True)
@click.option("--shuffle-seed", default=None, type=int)
@click.option("--dim-truncate", default=None, type=int,
              help="truncate every embedding to the first k dimensions")
@click.option("--max-hops", default=None, type=int)
@click.option("--no-skeleton", is_flag=True, help="drop anchor-chain edges before the run")
@click.option("--csv", "csv_path", type=click.Path())
@click.option("--report", "report_path", type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
def eval_cmd(graph_path, qa_path, keys, mode, turns, shuffle_seed, dim_truncate,
             max_hops, no_skeleton, csv_path, report_path, config_path):
    """Run a memorization protocol over a QA set and emit per-turn metrics."""
    config = load_config(config_path)
    embedder, gateway, stack = _providers(config, keys)
    config.embedding.dim = embedder.dim
    store = _load_graph(graph_path, config, stack)
    if no_skeleton:
        from .graph import EdgeKind

        store.remove_edges(EdgeKind.ANCHOR_ANCHOR)
    if dim_truncate:
        store = _truncate_store(store, dim_truncate)
        embedder = TruncatingEmbedder(embedder, dim_truncate)
        if stack is not None:
            stack.bind(store)
            stack.embedder = embedder
    if qa_path.startswith("fixtures:"):
        qa_items = load_qa(fixture_pkg.fixture_path(
            f"{qa_path.split(':', 1)[1]}_qa.jsonl"))
    else:
        qa_items = load_qa(qa_path)
    params = TraversalParams.from_config(config)
    if max_hops is not None:
        params.max_hops = max_hops
    spec = ProtocolSpec(mode=mode, turns=turns, shuffle_seed=shuffle_seed)
    metrics = run_protocol(store, embedder, gateway, qa_items, spec, params)
    csv_text = metrics.to_csv()
    if csv_path:
        Path(csv_path).write_text(csv_text, encoding="utf-8")
    click.echo(csv_text, nl=False)
    if report_path:
        Path(report_path).write_text(json.dumps(metrics.to_dict(), indent=2),
                                     encoding="utf-8")


def _truncate_store(store: GraphStore, k: int) -> GraphStore:
    """Copy a graph into a truncated embedding space with memories zeroed."""
    out = GraphStore(dim=k, synonym_threshold=store.synonym_threshold,
                     version=store.version, embedding_model=store.embedding_model)
    out.entities = {
        nid: type(n)(id=n.id, name=n.name, embedding=truncate(n.embedding, k),
                     aliases=list(n.aliases))
        for nid, n in store.entities.items()
    }
    out.anchors = {
        nid: type(n)(id=n.id, title=n.title, embedding=truncate(n.embedding, k),
                     chunk_id=n.chunk_id, prev=n.prev, next=n.next)
        for nid, n in store.anchors.items()
    }
    out.chunks = dict(store.chunks)
    from .graph import Edge, EdgeMemory

    for e in store.edges.values():
        out.edges[e.id] = Edge(id=e.id, a=e.a, b=e.b, kind=e.kind, label=e.label,
                               memory=EdgeMemory.zero(k))
        out._edge_key[(e.a, e.b, e.kind)] = e.id
    out._adjacency = {n: list(eids) for n, eids in store._adjacency.items()}
    out._counters = dict(store._counters)
    return out


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--keys", help="answer-key file (or fixtures:<name>) for the scripted stack")
@click.option("--dim", default=None, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8011, show_default=True)
def serve_cmd(config_path, keys, dim, host, port):
    """Launch the HTTP service."""
    import uvicorn

    from .service import create_app

    config = load_config(config_path)
    if dim:
        config.embedding.dim = dim
    stack = _offline_stack(keys, config.embedding.dim)
    app = create_app(config, stack=stack)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("fixtures")
@click.option("--name", type=click.Choice(["multihop", "story"]), required=True)
@click.option("--dest", type=click.Path(), default=".", show_default=True)
def fixtures_cmd(name, dest):
    """Copy a committed fixture corpus, QA set and answer keys to a directory."""
    dest_dir = Path(dest)
    dest_dir.mkdir(parents=True, exist_ok=True)
    for suffix in ("corpus.jsonl", "qa.jsonl", "keys.json"):
        src = fixture_pkg.fixture_path(f"{name}_{suffix}")
        target = dest_dir / src.name
        target.write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
        click.echo(f"wrote {target}")


if __name__ == "__main__":
    main()
