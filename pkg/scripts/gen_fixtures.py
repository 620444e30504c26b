#!/usr/bin/env python3
"""Regenerate the committed fixture corpora and answer keys.

Run from the repo root:  python3 scripts/gen_fixtures.py

Authors two corpora (a 12-chunk single-document story and a 6-document
multi-hop set), builds each with the offline stack, and verifies every
property the tests lean on before writing files:

  * no two distinct lexicon entities embed above the synonym threshold
  * every golden path starts at the rank-1 seed and is edge-connected
  * a full 2-turn same-query simulation replays every question with zero
    node-selection calls on the warm turn
  * the different-query scenario resumes from a partial replay with
    strictly fewer selection calls than its cold run

Exits nonzero with a diagnostic when any margin fails, so wording can be
tuned before freezing.
"""

import itertools
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from kgmemo.builder import Document, build
from kgmemo.config import EngineConfig
from kgmemo.embedding import cosine
from kgmemo.evalharness import ProtocolSpec, QAItem, run_protocol, save_qa
from kgmemo.llm import LlmGateway
from kgmemo.mockstack import AnswerKey, OfflineStack
from kgmemo.tokenizer import count_tokens
from kgmemo.traversal import TraversalParams, run_query

FIXTURES = ROOT / "src" / "kgmemo" / "fixtures"
DIM = 64

# ---------------------------------------------------------------- multi-hop corpus

MULTIHOP_DOCS = [
    ("foundry-ember", "The Ember Foundry",
     "The Ember Foundry is a bronze workshop in Veldt Harbor. "
     "Aldous Vane founded the Ember Foundry. "
     "The Ember Foundry casts harbor bells for the fleet."),
    ("vane-bio", "Aldous Vane",
     "Aldous Vane was born in Quarry Hollow. "
     "Aldous Vane studied under Mira Senn for nine years. "
     "As an apprentice, Aldous Vane repaired cracked bells with scrap bronze."),
    ("senn-bio", "Mira Senn",
     "Mira Senn curated the Lantern Archive in Gull Point. "
     "Mira Senn catalogued tide charts for the Lantern Archive. "
     "Scholars praise the Lantern Archive for its glass negatives."),
    ("foundry-gale", "The Gale Foundry",
     "The Gale Foundry is a rival workshop in Veldt Harbor. "
     "Petra Holt founded the Gale Foundry. "
     "The Gale Foundry forges ship anchors for deep water."),
    ("holt-bio", "Petra Holt",
     "Petra Holt was born in Bram Fen. "
     "Petra Holt studied under Casso Reed at the old slipway. "
     "Petra Holt hammered anchor chains as an apprentice."),
    ("reed-bio", "Casso Reed",
     "Casso Reed curated the Beacon Archive in Gull Point. "
     "Casso Reed collected storm logs for the Beacon Archive. "
     "Sailors consult the Beacon Archive before every crossing."),
]

MULTIHOP_LEXICON = [
    "Ember Foundry", "Veldt Harbor", "Aldous Vane", "harbor bells",
    "Quarry Hollow", "Mira Senn", "Lantern Archive", "Gull Point",
    "Gale Foundry", "Petra Holt", "ship anchors", "Bram Fen",
    "Casso Reed", "Beacon Archive",
]

MULTIHOP_QA = [
    # origins: every golden path needs two forward hops, so a cold run costs
    # three selection calls (two forwards plus the sufficiency call)
    QAItem(id="mh1", answer="Quarry Hollow",
           question="Tell me which town the founder of the Ember Foundry was born in."),
    QAItem(id="mh2", answer="Mira Senn",
           question="Tell me who mentored the founder of the Ember Foundry."),
    QAItem(id="mh3", answer="Lantern Archive",
           question="Which archive did the mentor of Aldous Vane curate?"),
    QAItem(id="mh4", answer="Bram Fen",
           question="Tell me which town the founder of the Gale Foundry was born in."),
    QAItem(id="mh5", answer="Casso Reed",
           question="Tell me who mentored the founder of the Gale Foundry."),
    QAItem(id="mh6", answer="Beacon Archive",
           question="Which archive did the mentor of Petra Holt curate?"),
    # similar paraphrases
    QAItem(id="mh1s", similar_of="mh1", answer="Quarry Hollow",
           question="Tell me which town the Ember Foundry founder was born in."),
    QAItem(id="mh2s", similar_of="mh2", answer="Mira Senn",
           question="Tell me who was the mentor of the founder of the Ember Foundry."),
    QAItem(id="mh3s", similar_of="mh3", answer="Lantern Archive",
           question="Which archive was curated by the mentor of Aldous Vane?"),
    # subtle variants with different answers
    QAItem(id="mh1d", different_of="mh1", answer="Lantern Archive",
           question="Tell me which archive the mentor of the founder of the Ember Foundry curated."),
    QAItem(id="mh2d", different_of="mh2", answer="Casso Reed",
           question="Tell me who mentored the founder of the rival Gale Foundry."),
    QAItem(id="mh3d", different_of="mh3", answer="Gull Point",
           question="Which town hosts the archive that the mentor of Aldous Vane curated?"),
]

MULTIHOP_KEYS = [
    {"question": MULTIHOP_QA[0].question, "answer": "Quarry Hollow",
     "path": ["Ember Foundry", "Aldous Vane", "chunk:born in Quarry Hollow"],
     "evidence": ["born in Quarry Hollow"],
     "useful_edges": ["founded the Ember Foundry"],
     "useful_chunks": ["born in Quarry Hollow"]},
    {"question": MULTIHOP_QA[1].question, "answer": "Mira Senn",
     "path": ["Ember Foundry", "Aldous Vane", "chunk:studied under Mira Senn"],
     "evidence": ["studied under Mira Senn"],
     "useful_edges": ["founded the Ember Foundry"],
     "useful_chunks": ["studied under Mira Senn"]},
    {"question": MULTIHOP_QA[2].question, "answer": "Lantern Archive",
     "path": ["Aldous Vane", "Mira Senn", "chunk:curated the Lantern Archive"],
     "evidence": ["curated the Lantern Archive"],
     "useful_edges": ["studied under Mira Senn"],
     "useful_chunks": ["curated the Lantern Archive"]},
    {"question": MULTIHOP_QA[3].question, "answer": "Bram Fen",
     "path": ["Gale Foundry", "Petra Holt", "chunk:born in Bram Fen"],
     "evidence": ["born in Bram Fen"],
     "useful_edges": ["founded the Gale Foundry"],
     "useful_chunks": ["born in Bram Fen"]},
    {"question": MULTIHOP_QA[4].question, "answer": "Casso Reed",
     "path": ["Gale Foundry", "Petra Holt", "chunk:studied under Casso Reed"],
     "evidence": ["studied under Casso Reed"],
     "useful_edges": ["founded the Gale Foundry"],
     "useful_chunks": ["studied under Casso Reed"]},
    {"question": MULTIHOP_QA[5].question, "answer": "Beacon Archive",
     "path": ["Petra Holt", "Casso Reed", "chunk:curated the Beacon Archive"],
     "evidence": ["curated the Beacon Archive"],
     "useful_edges": ["studied under Casso Reed"],
     "useful_chunks": ["curated the Beacon Archive"]},
    # similar variants walk the same routes
    {"question": MULTIHOP_QA[6].question, "answer": "Quarry Hollow",
     "path": ["Ember Foundry", "Aldous Vane", "chunk:born in Quarry Hollow"],
     "evidence": ["born in Quarry Hollow"],
     "useful_edges": ["founded the Ember Foundry"],
     "useful_chunks": ["born in Quarry Hollow"]},
    {"question": MULTIHOP_QA[7].question, "answer": "Mira Senn",
     "path": ["Ember Foundry", "Aldous Vane", "chunk:studied under Mira Senn"],
     "evidence": ["studied under Mira Senn"],
     "useful_edges": ["founded the Ember Foundry"],
     "useful_chunks": ["studied under Mira Senn"]},
    {"question": MULTIHOP_QA[8].question, "answer": "Lantern Archive",
     "path": ["Aldous Vane", "Mira Senn", "chunk:curated the Lantern Archive"],
     "evidence": ["curated the Lantern Archive"],
     "useful_edges": ["studied under Mira Senn"],
     "useful_chunks": ["curated the Lantern Archive"]},
    # different variants
    {"question": MULTIHOP_QA[9].question, "answer": "Lantern Archive",
     "path": ["Ember Foundry", "Aldous Vane", "chunk:studied under Mira Senn",
              "Mira Senn", "chunk:curated the Lantern Archive"],
     "evidence": ["curated the Lantern Archive"],
     "useful_edges": ["studied under Mira Senn"],
     "useful_chunks": ["studied under Mira Senn", "curated the Lantern Archive"]},
    {"question": MULTIHOP_QA[10].question, "answer": "Casso Reed",
     "path": ["Gale Foundry", "Petra Holt", "chunk:studied under Casso Reed"],
     "evidence": ["studied under Casso Reed"],
     "useful_edges": ["founded the Gale Foundry"],
     "useful_chunks": ["studied under Casso Reed"]},
    {"question": MULTIHOP_QA[11].question, "answer": "Gull Point",
     "path": ["Aldous Vane", "Mira Senn", "chunk:curated the Lantern Archive"],
     "evidence": ["Lantern Archive in Gull Point"],
     "useful_edges": ["studied under Mira Senn"],
     "useful_chunks": ["curated the Lantern Archive"]},
]

# ---------------------------------------------------------------- story corpus

STORY_PARAS = [
    "Glass Harbor keeps one book above all others, the Tide Ledger. "
    "The Tide Ledger records every cargo that crosses the quay.",
    "Keeper Odo guards the Tide Ledger day and night. "
    "Keeper Odo lives beside the Customs House.",
    "The Customs House stamps every manifest in Glass Harbor. "
    "Clerks hurry through the Customs House before dawn.",
    "Ferryman Brice rows the night crossing for a copper fare. "
    "Ferryman Brice owes a heavy debt to the Oyster Market.",
    "One storm night the Tide Ledger vanished from its iron desk. "
    "Keeper Odo searched every shelf until morning.",
    "The Salt Chapel rings its bell for lost sailors. "
    "Warden Imke sweeps the Salt Chapel at dusk.",
    "A wet mooring rope was found inside the Customs House. "
    "Ferryman Brice had moored at the North Mole that night.",
    "The North Mole shelters small boats from the swell. "
    "Smugglers favor the North Mole on moonless nights.",
    "Warden Imke saw Ferryman Brice carry a heavy satchel into the Salt Chapel. "
    "The satchel held the missing Tide Ledger.",
    "The Bell Tower counts the hours for Glass Harbor. "
    "Its sleepy keeper naps between the chimes.",
    "Keeper Odo reclaimed the Tide Ledger at the Salt Chapel altar. "
    "Ferryman Brice confessed his debt before the whole town.",
    "Glass Harbor breathed easier once the Tide Ledger returned. "
    "The Oyster Market forgave what remained of the debt.",
]

FILLER = [
    "Gulls wheeled over the quay all evening.",           # 8 tokens
    "Salt wind rattled the shutters.",                    # 6 tokens
    "The lamps burned low.",                              # 5 tokens
    "Fog settled in.",                                    # 4 tokens
    "Tide after tide.",                                   # 4 tokens
    "So it went.",                                        # 4 tokens
    "Quiet followed.",                                    # 3 tokens
    "Nothing stirred.",                                   # 3 tokens
    "Morning came.",                                      # 3 tokens
    "Rain fell.",                                         # 3 tokens
    "Hush.",                                              # 2 tokens
    "Stillness",                                          # 1 token
]

STORY_TOKENS_PER_CHUNK = 60

STORY_LEXICON = [
    "Glass Harbor", "Tide Ledger", "Keeper Odo", "Customs House",
    "Ferryman Brice", "Salt Chapel", "Warden Imke", "North Mole",
    "Bell Tower", "Oyster Market",
]

STORY_QA = [
    QAItem(id="st1", answer="Ferryman Brice",
           question="Who carried the missing Tide Ledger into the Salt Chapel?"),
    QAItem(id="st2", answer="Beside the Customs House",
           question="Where does the keeper of the Tide Ledger live?"),
    QAItem(id="st3", answer="The North Mole",
           question="Where had Ferryman Brice moored on the stormy night?"),
    QAItem(id="st4", answer="Warden Imke",
           question="Who saw Ferryman Brice at the Salt Chapel?"),
    QAItem(id="st1s", similar_of="st1", answer="Ferryman Brice",
           question="Who brought the missing Tide Ledger into the Salt Chapel?"),
    QAItem(id="st2s", similar_of="st2", answer="Beside the Customs House",
           question="Where does the Tide Ledger keeper live?"),
]

STORY_KEYS = [
    {"question": STORY_QA[0].question, "answer": "Ferryman Brice",
     "path": ["Tide Ledger", "chunk:held the missing Tide Ledger"],
     "evidence": ["heavy satchel into the Salt Chapel"],
     "useful_edges": [], "useful_chunks": ["held the missing Tide Ledger"]},
    {"question": STORY_QA[1].question, "answer": "Beside the Customs House",
     "path": ["Tide Ledger", "Keeper Odo", "chunk:lives beside the Customs House"],
     "evidence": ["lives beside the Customs House"],
     "useful_edges": ["guards the Tide Ledger"],
     "useful_chunks": ["lives beside the Customs House"]},
    {"question": STORY_QA[2].question, "answer": "The North Mole",
     "path": ["Ferryman Brice", "chunk:moored at the North Mole"],
     "evidence": ["moored at the North Mole"],
     "useful_edges": [], "useful_chunks": ["moored at the North Mole"]},
    {"question": STORY_QA[3].question, "answer": "Warden Imke",
     "path": ["Ferryman Brice", "chunk:saw Ferryman Brice carry"],
     "evidence": ["saw Ferryman Brice carry"],
     "useful_edges": [], "useful_chunks": ["saw Ferryman Brice carry"]},
    {"question": STORY_QA[4].question, "answer": "Ferryman Brice",
     "path": ["Tide Ledger", "chunk:held the missing Tide Ledger"],
     "evidence": ["heavy satchel into the Salt Chapel"],
     "useful_edges": [], "useful_chunks": ["held the missing Tide Ledger"]},
    {"question": STORY_QA[5].question, "answer": "Beside the Customs House",
     "path": ["Tide Ledger", "Keeper Odo", "chunk:lives beside the Customs House"],
     "evidence": ["lives beside the Customs House"],
     "useful_edges": ["guards the Tide Ledger"],
     "useful_chunks": ["lives beside the Customs House"]},
]


def pad_paragraph(text: str, target: int) -> str:
    """Append filler sentences until the paragraph hits the target token count."""
    deficit = target - count_tokens(text)
    if deficit < 0:
        raise SystemExit(f"paragraph already exceeds {target} tokens: {text[:50]}...")
    parts = [text]
    fillers = sorted(FILLER, key=count_tokens, reverse=True)
    while deficit > 0:
        for filler in fillers:
            n = count_tokens(filler)
            if n <= deficit:
                parts.append(filler)
                deficit -= n
                break
        else:
            raise SystemExit(f"cannot pad a deficit of {deficit} tokens")
    out = " ".join(parts)
    assert count_tokens(out) == target
    return out


def build_story_text() -> str:
    return "\n".join(pad_paragraph(p, STORY_TOKENS_PER_CHUNK) for p in STORY_PARAS)


# ---------------------------------------------------------------- verification

def fresh_stack(lexicon, keys) -> OfflineStack:
    return OfflineStack(lexicon=lexicon, keys=[AnswerKey.from_dict(k) for k in keys], dim=DIM)


def build_corpus(docs, lexicon, keys, chunk_tokens):
    stack = fresh_stack(lexicon, keys)
    config = EngineConfig(chunk_tokens=chunk_tokens)
    config.embedding.dim = DIM
    store, report = build(docs, config, stack.embedder, LlmGateway(stack.backend))
    stack.bind(store)
    return store, report, stack


def check_lexicon_separation(stack, lexicon, threshold=0.65):
    worst = 0.0
    for a, b in itertools.combinations(lexicon, 2):
        sim = cosine(stack.embedder.embed(a), stack.embedder.embed(b))
        worst = max(worst, sim)
        if sim > threshold:
            raise SystemExit(f"lexicon pair too close: {a!r} ~ {b!r} = {sim:.3f}")
    print(f"  lexicon separation ok (max pairwise cosine {worst:.3f})")


def check_paths(store, stack, keys):
    for key_data in keys:
        key = stack.key_for(key_data["question"])
        path_ids = [stack.resolve_path_node(p) for p in key.path]
        if any(p is None for p in path_ids):
            raise SystemExit(f"unresolvable path for {key.question!r}: {key.path}")
        for a, b in zip(path_ids, path_ids[1:]):
            if store.edge_between(a, b) is None:
                raise SystemExit(f"path break {a} -/- {b} for {key.question!r}")
        # the path must start inside the default seed set (top 2)
        q_vec = stack.embedder.embed(key.question)
        ranked = sorted(store.entities.values(),
                        key=lambda e: -cosine(q_vec, e.embedding))
        top2 = {ranked[0].id, ranked[1].id}
        if path_ids[0] not in top2:
            raise SystemExit(
                f"{key.question!r}: path starts at {path_ids[0]} but seeds are "
                f"{[(e.id, e.name) for e in ranked[:2]]}"
            )
    print(f"  all {len(keys)} golden paths resolvable, connected, seed-aligned")


def simulate_same_mode(docs, lexicon, keys, qa_items, chunk_tokens):
    """Multi-hop requirements: every cold question costs >= 3 selection calls,
    the warm turn replays everything with zero calls and under half the tokens."""
    store, _, stack = build_corpus(docs, lexicon, keys, chunk_tokens)
    gateway = LlmGateway(stack.backend)
    params = TraversalParams()
    origins = [q for q in qa_items if q.is_origin]
    metrics = run_protocol(store, stack.embedder, gateway, origins,
                           ProtocolSpec(mode="same", turns=1), params)
    cold, warm = metrics.turns
    print(f"  same-mode: turn0 acc={cold.accuracy:.2f} tokens={cold.avg_tokens:.0f} "
          f"select={cold.select_calls}; turn1 acc={warm.accuracy:.2f} "
          f"tokens={warm.avg_tokens:.0f} select={warm.select_calls}")
    if cold.accuracy != 1.0 or warm.accuracy != 1.0:
        raise SystemExit("fixture questions must be fully answerable")
    per_q_cold = [r.trace.select_calls for r in cold.records]
    if min(per_q_cold) < 3:
        raise SystemExit(f"cold runs need >= 3 selection calls each, got {per_q_cold}")
    if warm.select_calls != 0:
        bad = [(r.id, r.trace.select_calls, r.trace.replay_sufficient)
               for r in warm.records if r.trace.select_calls]
        raise SystemExit(f"warm turn must replay fully, got {bad}")
    if warm.avg_tokens > 0.5 * cold.avg_tokens:
        raise SystemExit(f"token drop below 50%: {cold.avg_tokens} -> {warm.avg_tokens}")
    return store, stack, gateway


def simulate_story_trend(docs, lexicon, keys, qa_items, chunk_tokens):
    """Story requirements: full accuracy every turn, and a strictly decreasing
    token trend over the first three turns (st2's first path edge carries a
    negative node similarity, so it only replays after a second memorization)."""
    store, _, stack = build_corpus(docs, lexicon, keys, chunk_tokens)
    gateway = LlmGateway(stack.backend)
    origins = [q for q in qa_items if q.is_origin]
    metrics = run_protocol(store, stack.embedder, gateway, origins,
                           ProtocolSpec(mode="same", turns=3), TraversalParams())
    tokens = [tm.avg_tokens for tm in metrics.turns]
    selects = [tm.select_calls for tm in metrics.turns]
    print(f"  story same-mode trend: tokens={[round(t) for t in tokens]} "
          f"selects={selects}")
    if any(tm.accuracy != 1.0 for tm in metrics.turns):
        raise SystemExit("story questions must stay fully answerable")
    if not (tokens[0] > tokens[1] > tokens[2]):
        raise SystemExit(f"need a strictly decreasing token trend, got {tokens}")
    if selects[2] != 0 or selects[3] != 0:
        raise SystemExit(f"turns 2+ must be pure replay, got {selects}")


def simulate_different_resumption(docs, lexicon, keys, qa_items, chunk_tokens,
                                  origin_ids=("mh1", "mh2"), diff_id="mh1d"):
    """Two origin questions sharing a path prefix each contribute one
    enhancement; the subtly different question must then replay the prefix,
    fail the trial answer, and finish with fewer selection calls than cold."""
    origins = [next(q for q in qa_items if q.id == oid) for oid in origin_ids]
    diff = next(q for q in qa_items if q.id == diff_id)

    # cold baseline for the different question
    store_cold, _, stack_cold = build_corpus(docs, lexicon, keys, chunk_tokens)
    gw_cold = LlmGateway(stack_cold.backend)
    cold = run_query(store_cold, stack_cold.embedder, gw_cold, diff.question,
                     TraversalParams(), qid="cold")
    if cold.answer != diff.answer:
        raise SystemExit(f"cold different run failed: {cold.answer!r}")

    store, _, stack = build_corpus(docs, lexicon, keys, chunk_tokens)
    gw = LlmGateway(stack.backend)
    for origin in origins:
        rec = run_query(store, stack.embedder, gw, origin.question, TraversalParams(),
                        qid=f"o-{origin.id}")
        if rec.answer != origin.answer:
            raise SystemExit(f"origin {origin.id} answered {rec.answer!r}")
        if not rec.memorized:
            raise SystemExit(f"origin {origin.id} replayed instead of memorizing; "
                             "the prefix needs two distinct enhancements")
    warm = run_query(store, stack.embedder, gw, diff.question, TraversalParams(),
                     qid="warm")
    if warm.answer != diff.answer:
        raise SystemExit(f"warm different run answered {warm.answer!r}")
    if warm.trace.replay_sufficient is not False:
        raise SystemExit(f"expected insufficient replay, got "
                         f"{warm.trace.replay_sufficient} (replay_edges="
                         f"{warm.trace.replay_edges})")
    if warm.trace.select_calls >= cold.trace.select_calls:
        raise SystemExit(f"no resumption saving: warm {warm.trace.select_calls} "
                         f">= cold {cold.trace.select_calls}")
    print(f"  different-query resumption: cold selects={cold.trace.select_calls}, "
          f"warm selects={warm.trace.select_calls}, replay_edges={warm.trace.replay_edges}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    print("multi-hop corpus:")
    mh_docs = [Document(doc_id=d, title=t, text=x) for d, t, x in MULTIHOP_DOCS]
    store, report, stack = build_corpus(mh_docs, MULTIHOP_LEXICON, MULTIHOP_KEYS, 120)
    print(f"  built: {store.stats()} report chunks={report.chunk_count}")
    if report.chunk_count != 6:
        raise SystemExit(f"expected 6 chunks, got {report.chunk_count}")
    check_lexicon_separation(stack, MULTIHOP_LEXICON)
    check_paths(store, stack, MULTIHOP_KEYS)
    simulate_same_mode(mh_docs, MULTIHOP_LEXICON, MULTIHOP_KEYS, MULTIHOP_QA, 120)
    simulate_different_resumption(mh_docs, MULTIHOP_LEXICON, MULTIHOP_KEYS,
                                  MULTIHOP_QA, 120)

    print("story corpus:")
    story_text = build_story_text()
    story_doc = Document(doc_id="glass-harbor", title="The Tide Ledger of Glass Harbor",
                         text=story_text)
    st_store, st_report, st_stack = build_corpus([story_doc], STORY_LEXICON,
                                                 STORY_KEYS, STORY_TOKENS_PER_CHUNK)
    print(f"  built: {st_store.stats()} report chunks={st_report.chunk_count}")
    if st_report.chunk_count != 12:
        raise SystemExit(f"expected 12 chunks, got {st_report.chunk_count}")
    check_lexicon_separation(st_stack, STORY_LEXICON)
    check_paths(st_store, st_stack, STORY_KEYS)
    simulate_story_trend([story_doc], STORY_LEXICON, STORY_KEYS, STORY_QA,
                         STORY_TOKENS_PER_CHUNK)

    # freeze
    (FIXTURES / "multihop_corpus.jsonl").write_text(
        "\n".join(json.dumps({"doc_id": d, "title": t, "text": x}, ensure_ascii=False)
                  for d, t, x in MULTIHOP_DOCS) + "\n", encoding="utf-8")
    save_qa(MULTIHOP_QA, FIXTURES / "multihop_qa.jsonl")
    (FIXTURES / "multihop_keys.json").write_text(json.dumps({
        "lexicon": MULTIHOP_LEXICON,
        "chunk_tokens": 120,
        "questions": MULTIHOP_KEYS,
    }, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    (FIXTURES / "story_corpus.jsonl").write_text(
        json.dumps({"doc_id": "glass-harbor",
                    "title": "The Tide Ledger of Glass Harbor",
                    "text": story_text}, ensure_ascii=False) + "\n", encoding="utf-8")
    save_qa(STORY_QA, FIXTURES / "story_qa.jsonl")
    (FIXTURES / "story_keys.json").write_text(json.dumps({
        "lexicon": STORY_LEXICON,
        "chunk_tokens": STORY_TOKENS_PER_CHUNK,
        "questions": STORY_KEYS,
    }, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
