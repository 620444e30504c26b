"""Deterministic offline provider stack driven by fixture answer keys.

The scripted chat backend gets rule-based handlers for every pipeline
exchange: extraction walks a fixed entity lexicon, summaries are first
sentences, node selection follows a per-question golden path (backtracking
through already-collected nodes when the next path node is not adjacent),
answers require the key's evidence markers to be present in the offered
context, and filtering marks the edges/chunks matching the key's useful
phrases. Everything is a pure function of the fixture files, so token
counts and traces are reproducible."""

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import MockEmbedder
from .errors import InvalidArgument, ProviderError
from .graph import GraphStore, NodeId
from .llm import ScriptedLlm, SelectionContext
from .prompts import INSUFFICIENT_MARKER, PromptKind

logger = logging.getLogger(__name__)

NO_ANSWER_TEXT = "More information is needed."


@dataclass
class AnswerKey:
    """Golden traversal knowledge for one question."""
    question: str
    path: list[str] = field(default_factory=list)  # entity names or "chunk:<marker>"
    answer: str = ""
    evidence: list[str] = field(default_factory=list)       # must appear in answer context
    useful_edges: list[str] = field(default_factory=list)   # substrings of useful edge text
    useful_chunks: list[str] = field(default_factory=list)  # substrings of useful chunk text

    @classmethod
    def from_dict(cls, data: dict) -> "AnswerKey":
        return cls(
            question=data["question"],
            path=list(data.get("path", [])),
            answer=data.get("answer", ""),
            evidence=list(data.get("evidence", [])),
            useful_edges=list(data.get("useful_edges", [])),
            useful_chunks=list(data.get("useful_chunks", [])),
        )


def _sentences(text: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", text.strip())
    return [p.strip() for p in parts if p.strip()]


def _norm(s: str) -> str:
    return re.sub(r"\s+", " ", s.strip().lower())


class OfflineStack:
    """Embedder + scripted LLM wired with fixture-driven handlers.

    Call bind(store) once the graph is built; the selection, answering and
    filtering handlers resolve names against it.
    """

    def __init__(self, lexicon: list[str], keys: list[AnswerKey],
                 dim: int = 64, synonyms: dict[str, str] | None = None,
                 no_retrieval: list[str] | None = None,
                 direct_answers: dict[str, str] | None = None,
                 embedder=None):
        self.lexicon = lexicon
        self.keys = {_norm(k.question): k for k in keys}
        self.no_retrieval = {_norm(q) for q in (no_retrieval or [])}
        self.direct_answers = {_norm(k): v for k, v in (direct_answers or {}).items()}
        self.embedder = embedder or MockEmbedder(dim=dim, synonyms=synonyms)
        self.backend = ScriptedLlm()
        self.store: GraphStore | None = None
        self._register_handlers()

    @classmethod
    def from_key_file(cls, path: str | Path, dim: int = 64) -> "OfflineStack":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            lexicon=data.get("lexicon", []),
            keys=[AnswerKey.from_dict(q) for q in data.get("questions", [])],
            dim=dim,
            synonyms=data.get("synonyms"),
            no_retrieval=data.get("no_retrieval"),
            direct_answers=data.get("direct_answers"),
        )

    def bind(self, store: GraphStore) -> None:
        self.store = store

    def key_for(self, query: str) -> AnswerKey | None:
        return self.keys.get(_norm(query))

    def add_key(self, key: AnswerKey) -> None:
        self.keys[_norm(key.question)] = key

    # -- resolution helpers ---------------------------------------------------

    def _require_store(self) -> GraphStore:
        if self.store is None:
            raise ProviderError("offline stack is not bound to a graph yet")
        return self.store

    def resolve_path_node(self, entry: str) -> NodeId | None:
        """Path entries are entity names, or 'chunk:<marker>' selecting the
        anchor whose chunk text contains the marker."""
        store = self._require_store()
        if entry.startswith("chunk:"):
            marker = entry[len("chunk:"):].strip().lower()
            for anchor in store.anchors.values():
                chunk = store.chunks[anchor.chunk_id]
                if marker in chunk.text.lower() or marker in anchor.title.lower():
                    return anchor.id
            return None
        wanted = _norm(entry)
        for ent in store.entities.values():
            if _norm(ent.name) == wanted or any(_norm(a) == wanted for a in ent.aliases):
                return ent.id
        return None

    # -- handlers ---------------------------------------------------------------

    def _register_handlers(self) -> None:
        b = self.backend
        b.on(PromptKind.EXTRACT_ENTITIES, self._h_extract_entities)
        b.on(PromptKind.EXTRACT_RELATIONS, self._h_extract_relations)
        b.on(PromptKind.SUMMARIZE_CHUNK, self._h_summarize)
        b.on(PromptKind.SPLIT_QUERY, self._h_split)
        b.on(PromptKind.SELECT_NODE, self._h_select)
        b.on(PromptKind.GENERATE_ANSWER, self._h_answer)
        b.on(PromptKind.FILTER_KG, self._h_filter)
        b.on(PromptKind.JUDGE_ANSWER, self._h_judge)

    def _lexicon_hits(self, text: str) -> list[str]:
        lowered = text.lower()
        hits = []
        for name in self.lexicon:
            pos = lowered.find(name.lower())
            if pos >= 0:
                hits.append((pos, name))
        hits.sort()
        seen = set()
        out = []
        for _, name in hits:
            if name.lower() not in seen:
                seen.add(name.lower())
                out.append(name)
        return out

    def _h_extract_entities(self, slots: dict, context) -> str:
        return json.dumps(self._lexicon_hits(str(slots["text"])), ensure_ascii=False)

    def _h_extract_relations(self, slots: dict, context) -> str:
        entities = [e.lower() for e in json.loads(str(slots["entity_list"]))]
        triples = []
        for sentence in _sentences(str(slots["text"])):
            present = [n for n in self._lexicon_hits(sentence) if n.lower() in entities]
            if len(present) >= 2:
                triples.append([present[0], sentence, present[1]])
        return json.dumps(triples, ensure_ascii=False)

    def _h_summarize(self, slots: dict, context) -> str:
        sentences = _sentences(str(slots["text"]))
        return sentences[0] if sentences else str(slots["text"])[:60]

    def _h_split(self, slots: dict, context) -> str:
        query = str(slots["query"])
        if _norm(query) in self.no_retrieval:
            return json.dumps({"retrieval": False, "subqueries": []})
        return json.dumps({"retrieval": True, "subqueries": [query]})

    def _h_select(self, slots: dict, context: SelectionContext | None) -> str:
        key = self.key_for(str(slots["query"]))
        if key is None:
            raise ProviderError(f"no answer key for query: {slots['query']!r}")
        if context is None:
            raise ProviderError("selection handler needs the candidate context")
        in_working_set = (set(context.backward_entities.values())
                          | set(context.backward_chunks.values()))
        path_ids = [self.resolve_path_node(entry) for entry in key.path]
        # first golden node we have not collected yet
        pending_idx = None
        for i, nid in enumerate(path_ids):
            if nid is None:
                raise ProviderError(f"key path entry {key.path[i]!r} not found in graph")
            if nid not in in_working_set:
                pending_idx = i
                break
        if pending_idx is None:
            return "All required nodes are collected.\nsufficient"
        target = path_ids[pending_idx]
        line = self._format_choice(target, context.forward_entities, context.forward_chunks)
        if line is not None:
            return f"Moving along the known route.\n{line}"
        # target not adjacent: hop back to the latest collected path node
        for nid in reversed(path_ids[:pending_idx]):
            line = self._format_choice(nid, context.backward_entities, context.backward_chunks)
            if line is not None:
                return f"Retracing to a collected node first.\n{line}"
        # fall back to any collected entity (best seed comes first)
        if context.backward_entities:
            num = sorted(context.backward_entities)[0]
            return f"Returning to the start.\nentity {num}"
        raise ProviderError("selection handler found no way to move")

    @staticmethod
    def _format_choice(node_id: NodeId, entities: dict[int, NodeId],
                       chunks: dict[int, NodeId]) -> str | None:
        for num, nid in entities.items():
            if nid == node_id:
                return f"entity {num}"
        for num, nid in chunks.items():
            if nid == node_id:
                return f"chunk {num}"
        return None

    def _h_answer(self, slots: dict, context) -> str:
        query = str(slots["query"])
        direct = self.direct_answers.get(_norm(query))
        if direct is not None:
            return direct
        key = self.key_for(query)
        if key is None:
            return NO_ANSWER_TEXT
        haystack = " ".join(
            str(slots.get(name, "")) for name in ("chunk_texts", "chunk_summary", "edge_list")
        ).lower()
        if all(marker.lower() in haystack for marker in key.evidence):
            return key.answer
        return f"{INSUFFICIENT_MARKER} {NO_ANSWER_TEXT}"

    def _h_filter(self, slots: dict, context) -> str:
        store = self._require_store()
        key = self.key_for(str(slots["query"]))
        useful_edges: list[int] = []
        useful_chunks: list[int] = []
        if key is not None:
            for match in re.finditer(r"edge (\d+):([^\n]*)", str(slots["edge_list"])):
                eid = int(match.group(1))
                edge = store.edges.get(eid)
                text = (match.group(2) + " " + (edge.label if edge else "")).lower()
                if any(phrase.lower() in text for phrase in key.useful_edges):
                    useful_edges.append(eid)
            for match in re.finditer(r"chunk (\d+):", str(slots["chunk_summary"])):
                num = match.group(1)
                chunk = store.chunks.get(f"c{num}")
                if chunk is None:
                    continue
                blob = (chunk.text + " " + chunk.summary).lower()
                if any(marker.lower() in blob for marker in key.useful_chunks):
                    useful_chunks.append(int(num))
        payload = json.dumps({"edges": useful_edges, "chunks": useful_chunks})
        return f"Marked the elements that carried the answer.\n```cot-ans\n{payload}\n```"

    def _h_judge(self, slots: dict, context) -> str:
        same = _norm(str(slots["reference_answer"])) == _norm(str(slots["generated_output"]))
        return "True" if same else "False"
