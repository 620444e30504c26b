"""Chat-completion gateway: template rendering, per-kind output grammars,
one bounded re-ask on malformed output, and per-scope token metering.

Backends are pluggable: ScriptedLlm replays fixture completions offline
(token counts come from the whitespace-plus-punctuation tokenizer, so cost
metrics are deterministic); HttpChatLlm speaks an OpenAI-style
chat-completions endpoint and uses provider-reported usage.
"""

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .config import LlmConfig
from .errors import InvalidArgument, NotFound, ParseError, ProviderError, TransportError
from .prompts import PromptKind, render
from .tokenizer import count_tokens

logger = logging.getLogger(__name__)


@dataclass
class LlmExchange:
    kind: PromptKind
    prompt: str
    completion: str
    parsed: Any
    prompt_tokens: int
    completion_tokens: int
    scope: str
    index: int  # position within the ledger

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass
class ParsedSelection:
    decision: str  # "sufficient" | "forward" | "backward"
    target_kind: str | None = None  # "entity" | "chunk"
    target_id: str | None = None    # graph node id
    rationale: str = ""


@dataclass
class SelectionContext:
    """Candidates offered in a node-selection prompt, keyed by displayed id.

    forward: unvisited neighbors of the current node; backward: nodes already
    in the working set. The parser only accepts ids offered here.
    """
    forward_entities: dict[int, str] = field(default_factory=dict)  # display id -> node id
    forward_chunks: dict[int, str] = field(default_factory=dict)
    backward_entities: dict[int, str] = field(default_factory=dict)
    backward_chunks: dict[int, str] = field(default_factory=dict)


@dataclass
class _ScopeTotals:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    calls: int = 0
    calls_by_kind: dict[str, int] = field(default_factory=dict)


class UsageLedger:
    """Thread-safe record of every exchange, grouped by metering scope."""

    def __init__(self):
        self._lock = threading.Lock()
        self._exchanges: list[LlmExchange] = []
        self._scopes: dict[str, _ScopeTotals] = {}

    def record(self, exchange: LlmExchange) -> None:
        with self._lock:
            exchange.index = len(self._exchanges)
            self._exchanges.append(exchange)
            totals = self._scopes.setdefault(exchange.scope, _ScopeTotals())
            totals.prompt_tokens += exchange.prompt_tokens
            totals.completion_tokens += exchange.completion_tokens
            totals.calls += 1
            kind = exchange.kind.value
            totals.calls_by_kind[kind] = totals.calls_by_kind.get(kind, 0) + 1

    def report(self, scope: str) -> tuple[int, int, int]:
        with self._lock:
            totals = self._scopes.get(scope)
            if totals is None:
                raise NotFound(f"unknown metering scope: {scope}")
            return totals.prompt_tokens, totals.completion_tokens, totals.calls

    def calls_by_kind(self, scope: str, kind: PromptKind) -> int:
        with self._lock:
            totals = self._scopes.get(scope)
            if totals is None:
                raise NotFound(f"unknown metering scope: {scope}")
            return totals.calls_by_kind.get(kind.value, 0)

    def scopes(self) -> list[str]:
        with self._lock:
            return list(self._scopes)

    def exchanges(self, scope: str | None = None) -> list[LlmExchange]:
        with self._lock:
            if scope is None:
                return list(self._exchanges)
            return [e for e in self._exchanges if e.scope == scope]

    def grand_totals(self) -> dict[str, int]:
        with self._lock:
            return {
                "prompt_tokens": sum(t.prompt_tokens for t in self._scopes.values()),
                "completion_tokens": sum(t.completion_tokens for t in self._scopes.values()),
                "calls": sum(t.calls for t in self._scopes.values()),
            }


# -- output grammars ------------------------------------------------------------

_JSON_BLOCK_RE = re.compile(r"\[.*\]|\{.*\}", re.DOTALL)
_COT_ANS_RE = re.compile(r"```cot-ans\s*(.*?)```", re.DOTALL)
_FINAL_LINE_RE = re.compile(r"(entity|chunk)\s*[:#]?\s*(\d+)\s*$", re.IGNORECASE)


def _extract_json(text: str) -> Any:
    match = _JSON_BLOCK_RE.search(text)
    if not match:
        raise ParseError("no JSON payload found", raw=text)
    try:
        return json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}", raw=text)


def parse_entities(text: str) -> list[str]:
    data = _extract_json(text)
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise ParseError("expected a JSON list of strings", raw=text)
    return data


def parse_relations(text: str) -> list[tuple[str, str, str]]:
    data = _extract_json(text)
    if not isinstance(data, list):
        raise ParseError("expected a JSON list of triples", raw=text)
    out = []
    for item in data:
        if not (isinstance(item, list) and len(item) == 3
                and all(isinstance(x, str) for x in item)):
            raise ParseError(f"malformed triple: {item!r}", raw=text)
        out.append((item[0], item[1], item[2]))
    return out


def parse_selection(text: str, context: SelectionContext | None) -> ParsedSelection:
    """Final line 'entity <id>' / 'chunk <id>', or the word 'sufficient'."""
    lines = [ln.strip().strip("*` ") for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty selection reply", raw=text)
    final = lines[-1]
    rationale = "\n".join(lines[:-1])
    if re.fullmatch(r"sufficient\.?", final, re.IGNORECASE):
        return ParsedSelection(decision="sufficient", rationale=rationale)
    match = _FINAL_LINE_RE.search(final)
    if not match:
        raise ParseError(f"unrecognized selection line: {final!r}", raw=text)
    target_kind = match.group(1).lower()
    display_id = int(match.group(2))
    if context is None:
        return ParsedSelection(decision="forward", target_kind=target_kind,
                               target_id=str(display_id), rationale=rationale)
    forward = (context.forward_entities if target_kind == "entity"
               else context.forward_chunks)
    backward = (context.backward_entities if target_kind == "entity"
                else context.backward_chunks)
    if display_id in forward:
        return ParsedSelection("forward", target_kind, forward[display_id], rationale)
    if display_id in backward:
        return ParsedSelection("backward", target_kind, backward[display_id], rationale)
    raise ParseError(f"{target_kind} {display_id} was not offered", raw=text)


def parse_filter_marks(text: str) -> tuple[list[int], list[int]]:
    match = _COT_ANS_RE.search(text)
    if not match:
        raise ParseError("missing cot-ans block", raw=text)
    try:
        data = json.loads(match.group(1))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed cot-ans JSON: {exc}", raw=text)
    if not isinstance(data, dict) or "edges" not in data or "chunks" not in data:
        raise ParseError("cot-ans must contain edges and chunks", raw=text)

    def as_ids(values, label):
        out = []
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, str)):
                raise ParseError(f"bad {label} id: {v!r}", raw=text)
            if isinstance(v, str):
                if not v.strip().isdigit():
                    raise ParseError(f"{label} id must be a single positive integer: {v!r}",
                                     raw=text)
                v = int(v.strip())
            out.append(v)
        return out

    return as_ids(data["edges"], "edge"), as_ids(data["chunks"], "chunk")


def parse_judgement(text: str) -> bool | None:
    word = text.strip().strip(".").lower()
    if word == "true":
        return True
    if word == "false":
        return False
    return None


def parse_split(text: str) -> dict:
    data = _extract_json(text)
    if not isinstance(data, dict) or "retrieval" not in data:
        raise ParseError("expected {retrieval, subqueries}", raw=text)
    subqueries = data.get("subqueries") or []
    if not isinstance(subqueries, list) or not all(isinstance(s, str) for s in subqueries):
        raise ParseError("subqueries must be a list of strings", raw=text)
    return {"retrieval": bool(data["retrieval"]), "subqueries": subqueries}


_REMINDERS = {
    PromptKind.EXTRACT_ENTITIES: 'Reply with a JSON list of strings only, e.g. ["a", "b"].',
    PromptKind.EXTRACT_RELATIONS: "Reply with a JSON list of [subject, sentence, object] triples only.",
    PromptKind.SELECT_NODE: "End your reply with one line containing only 'entity <id>', "
                            "'chunk <id>' (an offered id), or the word 'sufficient'.",
    PromptKind.FILTER_KG: 'End with a ```cot-ans``` block holding {"edges": [...], "chunks": [...]}.',
    PromptKind.SPLIT_QUERY: 'Reply with JSON only: {"retrieval": true/false, "subqueries": [...]}.',
    PromptKind.JUDGE_ANSWER: "Reply with exactly one word: True or False.",
}


def parse_completion(kind: PromptKind, text: str, context: SelectionContext | None) -> Any:
    if kind == PromptKind.EXTRACT_ENTITIES:
        return parse_entities(text)
    if kind == PromptKind.EXTRACT_RELATIONS:
        return parse_relations(text)
    if kind == PromptKind.SELECT_NODE:
        return parse_selection(text, context)
    if kind == PromptKind.FILTER_KG:
        return parse_filter_marks(text)
    if kind == PromptKind.JUDGE_ANSWER:
        return parse_judgement(text)
    if kind == PromptKind.SPLIT_QUERY:
        return parse_split(text)
    return text.strip()


# -- backends ---------------------------------------------------------------------

@dataclass
class BackendReply:
    text: str
    prompt_tokens: int | None = None      # None -> meter with the offline tokenizer
    completion_tokens: int | None = None


class ChatBackend:
    def complete(self, kind: PromptKind, prompt: str, slots: dict,
                 context: SelectionContext | None) -> BackendReply:
        raise NotImplementedError


def slot_digest(slots: dict) -> str:
    canonical = json.dumps({k: str(v) for k, v in sorted(slots.items())},
                           sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


Handler = Callable[[dict, SelectionContext | None], str]


class ScriptedLlm(ChatBackend):
    """Deterministic offline backend.

    Resolution order per call: queued completions for the kind, then the
    (kind, slot digest) fixture table (a '*' digest is a kind-wide default),
    then a registered handler. Unscripted calls raise, so tests fail loudly.
    """

    def __init__(self):
        self._queues: dict[PromptKind, list[str]] = {}
        self._table: dict[tuple[str, str], str] = {}
        self._handlers: dict[PromptKind, Handler] = {}
        self.calls: list[tuple[PromptKind, dict]] = []

    def enqueue(self, kind: PromptKind, *completions: str) -> "ScriptedLlm":
        self._queues.setdefault(kind, []).extend(completions)
        return self

    def set_entry(self, kind: PromptKind, digest: str, completion: str) -> "ScriptedLlm":
        self._table[(kind.value, digest)] = completion
        return self

    def on(self, kind: PromptKind, handler: Handler) -> "ScriptedLlm":
        self._handlers[kind] = handler
        return self

    def load_script(self, path: str | Path) -> "ScriptedLlm":
        """Plain-text fixture: '=== <Kind> <digest>' header lines delimit entries."""
        current: tuple[str, str] | None = None
        buf: list[str] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.startswith("=== "):
                if current is not None:
                    self._table[current] = "\n".join(buf).strip("\n")
                parts = line[4:].split()
                if len(parts) != 2:
                    raise InvalidArgument(f"bad script header: {line!r}")
                current = (parts[0], parts[1])
                buf = []
            else:
                buf.append(line)
        if current is not None:
            self._table[current] = "\n".join(buf).strip("\n")
        return self

    def complete(self, kind, prompt, slots, context):
        self.calls.append((kind, dict(slots)))
        queue = self._queues.get(kind)
        if queue:
            return BackendReply(queue.pop(0))
        digest = slot_digest(slots)
        hit = self._table.get((kind.value, digest)) or self._table.get((kind.value, "*"))
        if hit is not None:
            return BackendReply(hit)
        handler = self._handlers.get(kind)
        if handler is not None:
            return BackendReply(handler(slots, context))
        raise ProviderError(f"no scripted completion for {kind.value} (digest {digest})")


class HttpChatLlm(ChatBackend):
    """OpenAI-style chat-completions client. Temperature 0 and a fixed seed
    are the defaults; auth comes from the environment variable in the config."""

    def __init__(self, config: LlmConfig, timeout: float = 60.0, transport=None):
        import httpx

        if not config.base_url:
            raise InvalidArgument("http llm requires base_url")
        self.config = config
        headers = {}
        key = os.environ.get(config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(base_url=config.base_url, headers=headers,
                                    timeout=timeout, transport=transport)

    def complete(self, kind, prompt, slots, context):
        import httpx

        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "seed": self.config.seed,
        }
        last_exc: Exception | None = None
        for attempt in range(1, self.config.max_transport_retries + 2):
            try:
                resp = self._client.post("/chat/completions", json=payload)
                resp.raise_for_status()
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
                usage = body.get("usage", {})
                return BackendReply(
                    text=text,
                    prompt_tokens=usage.get("prompt_tokens"),
                    completion_tokens=usage.get("completion_tokens"),
                )
            except (httpx.HTTPError, KeyError, IndexError) as exc:
                last_exc = exc
                logger.warning("llm attempt %d failed: %s", attempt, exc)
                time.sleep(min(0.2 * attempt, 1.0))
        raise TransportError(f"llm provider failed: {last_exc}",
                             self.config.max_transport_retries + 1)


def build_backend(config: LlmConfig) -> ChatBackend:
    if config.provider == "scripted":
        backend = ScriptedLlm()
        if config.script_path:
            backend.load_script(config.script_path)
        return backend
    if config.provider == "http":
        return HttpChatLlm(config)
    raise InvalidArgument(f"unknown llm provider: {config.provider}")


# -- gateway ------------------------------------------------------------------------

class LlmGateway:
    """Render, call, parse, meter. One bounded re-ask with a format reminder
    when the completion fails its grammar; after that, ParseError carries the
    raw text up."""

    def __init__(self, backend: ChatBackend, ledger: UsageLedger | None = None):
        self.backend = backend
        self.ledger = ledger or UsageLedger()

    def complete(self, kind: PromptKind, slots: dict, scope: str = "default",
                 context: SelectionContext | None = None) -> LlmExchange:
        prompt = render(kind, slots)
        reply = self.backend.complete(kind, prompt, slots, context)
        try:
            parsed = parse_completion(kind, reply.text, context)
        except ParseError as first_error:
            self._record(kind, prompt, reply, None, scope)  # the failed call still costs
            reminder = _REMINDERS.get(kind, "Follow the requested output format exactly.")
            prompt = (f"{prompt}\n\nYour previous reply could not be parsed "
                      f"({first_error}). {reminder}")
            logger.info("re-asking %s after parse failure", kind.value)
            reply = self.backend.complete(kind, prompt, slots, context)
            try:
                parsed = parse_completion(kind, reply.text, context)
            except ParseError:
                self._record(kind, prompt, reply, None, scope)
                raise
        return self._record(kind, prompt, reply, parsed, scope)

    def _record(self, kind, prompt, reply: BackendReply, parsed, scope) -> LlmExchange:
        exchange = LlmExchange(
            kind=kind,
            prompt=prompt,
            completion=reply.text,
            parsed=parsed,
            prompt_tokens=(reply.prompt_tokens if reply.prompt_tokens is not None
                           else count_tokens(prompt)),
            completion_tokens=(reply.completion_tokens if reply.completion_tokens is not None
                               else count_tokens(reply.text)),
            scope=scope,
            index=-1,
        )
        self.ledger.record(exchange)
        return exchange

    def usage_report(self, scope: str) -> tuple[int, int, int]:
        return self.ledger.report(scope)
