"""Text-embedding providers plus the vector helpers used everywhere.

Every provider returns unit-length float64 vectors. The mock provider is a
seeded random projection over token hashes: fully offline, deterministic
across platforms, and able to stage controlled similarities through a
synonym table (a synonym embeds as a blend of its own hash vector and its
canonical form's, so the pair lands at a high, predictable cosine).
"""

import hashlib
import logging
import os
import time

import numpy as np

from .config import EmbeddingConfig
from .errors import InvalidArgument, TransportError
from .tokenizer import tokenize

logger = logging.getLogger(__name__)


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return v.copy()
    return v / n


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector is zero.

    Zero-memory edges are probed constantly, and "no memory" must read as a
    zero contribution rather than an error.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def truncate(v: np.ndarray, k: int) -> np.ndarray:
    """Keep the first k coordinates and renormalize."""
    v = np.asarray(v, dtype=np.float64)
    if not 1 <= k <= v.shape[0]:
        raise InvalidArgument(f"truncation dim {k} out of range [1, {v.shape[0]}]")
    return normalize(v[:k].copy())


class Embedder:
    """Provider interface: embed() must be deterministic and unit-norm."""

    dim: int

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError


def _token_vector(token: str, dim: int, salt: str) -> np.ndarray:
    digest = hashlib.sha256(f"{salt}\x00{token}".encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal(dim)


class MockEmbedder(Embedder):
    """Deterministic offline embedder: sum of per-token hash projections."""

    def __init__(
        self,
        dim: int = 64,
        salt: str = "kgmemo",
        synonyms: dict[str, str] | None = None,
        synonym_blend: float = 0.9,
    ):
        if dim < 1:
            raise InvalidArgument("dim must be >= 1")
        self.dim = dim
        self.salt = salt
        self.synonyms = {k.strip().lower(): v for k, v in (synonyms or {}).items()}
        self.synonym_blend = synonym_blend
        self._cache: dict[str, np.ndarray] = {}

    def _raw(self, text: str) -> np.ndarray:
        tokens = tokenize(text.lower())
        if not tokens:
            tokens = [text or "<empty>"]
        acc = np.zeros(self.dim)
        for tok in tokens:
            acc += _token_vector(tok, self.dim, self.salt)
        return acc

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise InvalidArgument("cannot embed empty text")
        cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        key = text.strip().lower()
        canonical = self.synonyms.get(key)
        if canonical is not None:
            w = self.synonym_blend
            vec = w * normalize(self._raw(canonical)) + (1 - w) * normalize(self._raw(text))
        else:
            vec = self._raw(text)
        out = normalize(vec)
        self._cache[text] = out
        return out.copy()


class StaticEmbedder(Embedder):
    """Explicit text->vector table, with optional fallback for unlisted text.

    Test fixtures use this to pin exact geometries (orthogonal entities,
    engineered negative similarities).
    """

    def __init__(self, table: dict[str, np.ndarray], dim: int, fallback: Embedder | None = None):
        self.dim = dim
        self.table = {k: normalize(np.asarray(v, dtype=np.float64)) for k, v in table.items()}
        for k, v in self.table.items():
            if v.shape[0] != dim:
                raise InvalidArgument(f"table entry {k!r} has dim {v.shape[0]}, expected {dim}")
        self.fallback = fallback

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise InvalidArgument("cannot embed empty text")
        hit = self.table.get(text)
        if hit is not None:
            return hit.copy()
        if self.fallback is not None:
            return self.fallback.embed(text)
        raise InvalidArgument(f"no static embedding for {text!r}")


class HttpEmbedder(Embedder):
    """Client for an HTTP embeddings endpoint (OpenAI-style wire format).

    POST {base_url}/embeddings with {"model": ..., "input": [text]};
    expects {"data": [{"embedding": [...]}]}. Auth comes from the
    environment variable named in the config.
    """

    def __init__(self, config: EmbeddingConfig, max_retries: int = 2, timeout: float = 30.0,
                 transport=None):
        import httpx

        if not config.base_url:
            raise InvalidArgument("http embedder requires base_url")
        self.dim = config.dim
        self.model = config.model
        self.max_retries = max_retries
        headers = {}
        key = os.environ.get(config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(base_url=config.base_url, headers=headers,
                                    timeout=timeout, transport=transport)

    def embed(self, text: str) -> np.ndarray:
        import httpx

        if not text:
            raise InvalidArgument("cannot embed empty text")
        last_exc: Exception | None = None
        for attempt in range(1, self.max_retries + 2):
            try:
                resp = self._client.post("/embeddings", json={"model": self.model, "input": [text]})
                resp.raise_for_status()
                vec = np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
                if vec.shape[0] != self.dim:
                    raise TransportError(
                        f"provider returned dim {vec.shape[0]}, expected {self.dim}", attempt
                    )
                return normalize(vec)
            except (httpx.HTTPError, KeyError, IndexError) as exc:
                last_exc = exc
                logger.warning("embedding attempt %d failed: %s", attempt, exc)
                time.sleep(min(0.2 * attempt, 1.0))
        raise TransportError(f"embedding provider failed: {last_exc}", self.max_retries + 1)


class TruncatingEmbedder(Embedder):
    """Wrap a provider, keeping only the first k coordinates of its output."""

    def __init__(self, inner: Embedder, k: int):
        if not 1 <= k <= inner.dim:
            raise InvalidArgument(f"truncation dim {k} out of range [1, {inner.dim}]")
        self.inner = inner
        self.dim = k

    def embed(self, text: str) -> np.ndarray:
        return truncate(self.inner.embed(text), self.dim)


def build_embedder(config: EmbeddingConfig) -> Embedder:
    if config.provider == "mock":
        base: Embedder = MockEmbedder(
            dim=config.dim, synonyms=config.synonyms, synonym_blend=config.synonym_blend
        )
    elif config.provider == "http":
        base = HttpEmbedder(config)
    else:
        raise InvalidArgument(f"unknown embedding provider: {config.provider}")
    if config.truncate_dim:
        return TruncatingEmbedder(base, config.truncate_dim)
    return base
