"""Desk-scale evaluation protocols: QA-file loading, Same/Similar/Different and
alternating memorization runs, judging, token accounting, path-consistency
scoring, and dataset rewriting.

A protocol run always starts from empty edge memories (turn 0 is the cold
baseline), then re-runs the scheduled question set against the evolving
graph once per turn. With memorization on, questions run sequentially in
dataset order so the memory evolution is deterministic; an optional seeded
reshuffle permutes the order anew each turn.
"""

import csv
import io
import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .embedding import Embedder
from .errors import InvalidArgument, ParseError
from .graph import GraphStore
from .llm import LlmGateway
from .prompts import PromptKind
from .traversal import QARecord, TraversalParams, run_query

logger = logging.getLogger(__name__)

MODES = ("same", "similar", "different", "alternating")


@dataclass
class QAItem:
    id: str
    question: str
    answer: str
    options: list[str] | None = None
    mcq: str | None = None  # full multiple-choice question text
    similar_of: str | None = None
    different_of: str | None = None
    context: str | None = None

    @property
    def is_origin(self) -> bool:
        return self.similar_of is None and self.different_of is None

    def to_dict(self) -> dict:
        out = {"id": self.id, "question": self.question, "answer": self.answer}
        for key in ("options", "mcq", "similar_of", "different_of", "context"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


def load_qa(path: str | Path) -> list[QAItem]:
    items = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        items.append(QAItem(
            id=str(data["id"]), question=data["question"], answer=data["answer"],
            options=data.get("options"), mcq=data.get("mcq"),
            similar_of=data.get("similar_of"), different_of=data.get("different_of"),
            context=data.get("context"),
        ))
    if not items:
        raise InvalidArgument(f"no QA records in {path}")
    return items


def save_qa(items: Iterable[QAItem], path: str | Path) -> None:
    lines = [json.dumps(item.to_dict(), ensure_ascii=False) for item in items]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- judging -------------------------------------------------------------------

def _norm_answer(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower())


def mock_judge(question: str, gold: str, predicted: str,
               gateway: LlmGateway | None = None) -> str:
    """Case/whitespace-insensitive exact match."""
    return "true" if _norm_answer(gold) == _norm_answer(predicted) else "false"


def llm_judge(question: str, gold: str, predicted: str, gateway: LlmGateway,
              scope: str = "judge") -> str:
    exchange = gateway.complete(PromptKind.JUDGE_ANSWER, {
        "question": question, "reference_answer": gold, "generated_output": predicted,
    }, scope=scope)
    if exchange.parsed is True:
        return "true"
    if exchange.parsed is False:
        return "false"
    logger.warning("judge produced a non-verdict: %r", exchange.completion)
    return "abstain"


JudgeFn = Callable[[str, str, str], str]


# -- path consistency --------------------------------------------------------------

def path_similarity(trace_a, trace_b) -> float:
    """Jaccard overlap of the edge-id sets of two traversal paths."""
    set_a = _edge_set(trace_a)
    set_b = _edge_set(trace_b)
    union = set_a | set_b
    if not union:
        return 1.0  # two empty paths are identical
    return len(set_a & set_b) / len(union)


def _edge_set(trace) -> set[int]:
    if isinstance(trace, QARecord):
        return set(trace.subgraph_edges)
    return set(trace)


# -- protocol runs -------------------------------------------------------------------

@dataclass
class ProtocolSpec:
    mode: str = "same"
    turns: int = 1  # memorization turns beyond the cold turn 0
    shuffle_seed: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgument(f"mode must be one of {MODES}")
        if self.turns < 0:
            raise InvalidArgument("turns must be >= 0")


@dataclass
class TurnMetrics:
    turn: int
    label: str  # which question set ran
    accuracy: float
    avg_tokens: float
    select_calls: int
    s_avg: float | None
    records: list[QARecord] = field(default_factory=list)

    def row(self) -> dict:
        return {
            "turn": self.turn, "label": self.label,
            "accuracy": round(self.accuracy, 6),
            "avg_tokens": round(self.avg_tokens, 2),
            "select_calls": self.select_calls,
            "s_avg": None if self.s_avg is None else round(self.s_avg, 6),
        }


@dataclass
class RunMetrics:
    spec: ProtocolSpec
    turns: list[TurnMetrics]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["turn", "label", "accuracy",
                                                 "avg_tokens", "select_calls", "s_avg"])
        writer.writeheader()
        for tm in self.turns:
            writer.writerow(tm.row())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "mode": self.spec.mode,
            "turns": [
                {**tm.row(), "records": [
                    {"id": r.id, "question": r.question, "answer": r.answer,
                     "gold": r.gold_answer, "verdict": r.verdict,
                     "tokens": r.total_tokens,
                     "select_calls": _select_calls(r),
                     "replay_fraction": r.replay_fraction}
                    for r in tm.records
                ]}
                for tm in self.turns
            ],
        }


def _select_calls(record: QARecord) -> int:
    return record.trace.select_calls


def reset_memories(store: GraphStore) -> None:
    with store.write_lock:
        for edge in store.edges.values():
            edge.memory.v = np.zeros(store.dim)
            edge.memory.update_count = 0


def _schedule(items: list[QAItem], spec: ProtocolSpec, turn: int) -> tuple[str, list[QAItem]]:
    origin = [q for q in items if q.is_origin]
    similar = [q for q in items if q.similar_of is not None]
    different = [q for q in items if q.different_of is not None]
    if spec.mode == "same":
        return "origin", origin
    if spec.mode == "similar":
        if not similar:
            raise InvalidArgument("similar mode requires items with similar_of links")
        return ("similar", similar) if turn == spec.turns else ("origin", origin)
    if spec.mode == "different":
        if not different:
            raise InvalidArgument("different mode requires items with different_of links")
        return ("different", different) if turn == spec.turns else ("origin", origin)
    # alternating: origin on even turns, different on odd ones
    if not different:
        raise InvalidArgument("alternating mode requires items with different_of links")
    return ("origin", origin) if turn % 2 == 0 else ("different", different)


def run_protocol(store: GraphStore, embedder: Embedder, gateway: LlmGateway,
                 items: list[QAItem], spec: ProtocolSpec, params: TraversalParams,
                 judge: JudgeFn = mock_judge) -> RunMetrics:
    reset_memories(store)  # turn 0 is always the cold baseline
    turn_metrics: list[TurnMetrics] = []
    last_origin: dict[str, QARecord] = {}
    for turn in range(spec.turns + 1):
        label, scheduled = _schedule(items, spec, turn)
        scheduled = list(scheduled)
        if spec.shuffle_seed is not None:
            random.Random(spec.shuffle_seed * 1_000_003 + turn).shuffle(scheduled)
        records: list[QARecord] = []
        similarities: list[float] = []
        for item in scheduled:
            record = run_query(store, embedder, gateway, item.question, params,
                               qid=f"{item.id}-t{turn}")
            record.gold_answer = item.answer
            record.options = item.options
            predicted = record.answer
            if item.options and item.mcq:
                predicted = option_select(gateway, item.mcq, predicted,
                                          scope=f"query:{item.id}-t{turn}")
            record.verdict = judge(item.question, item.answer, predicted)
            records.append(record)
            link = item.similar_of or item.different_of
            if link is not None and link in last_origin:
                similarities.append(path_similarity(last_origin[link], record))
            if label == "origin":
                last_origin[item.id] = record
        turn_metrics.append(TurnMetrics(
            turn=turn,
            label=label,
            accuracy=(sum(r.verdict == "true" for r in records) / len(records)
                      if records else 0.0),
            avg_tokens=(sum(r.total_tokens for r in records) / len(records)
                        if records else 0.0),
            select_calls=sum(_select_calls(r) for r in records),
            s_avg=(sum(similarities) / len(similarities)) if similarities else None,
            records=records,
        ))
    return RunMetrics(spec=spec, turns=turn_metrics)


def option_select(gateway: LlmGateway, mcq_text: str, generated: str,
                  scope: str = "default") -> str:
    """Rewrite a free-form answer against the multiple-choice option list
    before judging."""
    exchange = gateway.complete(PromptKind.OPTION_SELECT, {
        "question": mcq_text, "generated-answer": generated,
    }, scope=scope)
    return str(exchange.parsed)


# -- dataset rewriting -----------------------------------------------------------------

_OPTION_RE = re.compile(r"^([A-D])\.\s*(.+)$", re.MULTILINE)


def rewrite_dataset(items: list[QAItem], mode: str, gateway: LlmGateway,
                    scope: str = "rewrite") -> list[QAItem]:
    """Return the originals plus one rewritten variant per item (mcq mode
    attaches options in place). Records whose rewrite fails to parse are
    skipped with a log entry."""
    if mode not in ("mcq", "similar", "different"):
        raise InvalidArgument("mode must be mcq, similar or different")
    out = list(items)
    for item in items:
        try:
            if mode == "mcq":
                _rewrite_mcq(item, gateway, scope)
            elif mode == "similar":
                exchange = gateway.complete(PromptKind.REWRITE_SIMILAR,
                                            {"query": item.question}, scope=scope)
                out.append(QAItem(id=f"{item.id}-sim", question=str(exchange.parsed).strip(),
                                  answer=item.answer, similar_of=item.id,
                                  context=item.context))
            else:
                if not item.context:
                    raise InvalidArgument(f"{item.id}: different mode requires context")
                q_ex = gateway.complete(PromptKind.REWRITE_DIFFERENT,
                                        {"query": item.question, "context": item.context},
                                        scope=scope)
                new_q = str(q_ex.parsed).strip()
                a_ex = gateway.complete(PromptKind.REWRITE_ANSWER,
                                        {"query": new_q, "context": item.context},
                                        scope=scope)
                out.append(QAItem(id=f"{item.id}-diff", question=new_q,
                                  answer=str(a_ex.parsed).strip(), different_of=item.id,
                                  context=item.context))
        except (ParseError, InvalidArgument) as exc:
            logger.warning("rewrite skipped %s: %s", item.id, exc)
    return out


def _rewrite_mcq(item: QAItem, gateway: LlmGateway, scope: str) -> None:
    exchange = gateway.complete(PromptKind.TRANSFORM_MCQ, {
        "new-ans": item.answer, "query": item.question, "ans": item.answer,
        "evidence": item.context or "",
    }, scope=scope)
    text = str(exchange.parsed).strip()
    options = [f"{letter}. {body.strip()}" for letter, body in _OPTION_RE.findall(text)]
    if len(options) != 4:
        raise ParseError(f"expected 4 options A-D, found {len(options)}", raw=text)
    item.mcq = text
    item.options = options
