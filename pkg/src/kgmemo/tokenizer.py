"""Whitespace-plus-punctuation tokenizer used for chunking and offline token metering.

A token is a maximal run of word characters or a single punctuation
character; whitespace only separates. The same rule is used everywhere
offline so chunk sizes and token-cost metrics are deterministic.
"""

import re

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> list[tuple[int, int]]:
    """(start, end) character span of every token, in order."""
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def count_tokens(text: str) -> int:
    return len(_TOKEN_RE.findall(text))
