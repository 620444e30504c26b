"""Engine configuration: defaults, config-file loading, environment overrides.

Defaults follow the reference parameter ledger: memory blend alpha 0.1,
strong-connection threshold lambda 0.55, 2 seed nodes, 10-hop budget,
750-token chunks, 0.7 synonym-merge threshold, decomposition limit 1,
temperature 0 with a fixed sampling seed.
"""

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import InvalidArgument

ENV_PREFIX = "KGMEMO_"


@dataclass
class EmbeddingConfig:
    provider: str = "mock"  # mock | static | http
    model: str = "mock-hash-projection"
    dim: int = 64
    truncate_dim: int | None = None
    base_url: str = ""
    api_key_env: str = "KGMEMO_EMBED_API_KEY"
    # mock-only: surface form -> canonical form, embedded as a blend so the
    # pair lands at a controlled high cosine
    synonyms: dict[str, str] = field(default_factory=dict)
    synonym_blend: float = 0.9

    @property
    def effective_dim(self) -> int:
        return self.truncate_dim if self.truncate_dim else self.dim


@dataclass
class LlmConfig:
    provider: str = "scripted"  # scripted | http
    model: str = "scripted-mock"
    base_url: str = ""
    api_key_env: str = "KGMEMO_LLM_API_KEY"
    temperature: float = 0.0
    seed: int = 123
    # scripted-only: fixture files
    script_path: str = ""       # (kind, slot digest) -> completion table
    answer_key_path: str = ""   # per-question golden paths and answers
    max_transport_retries: int = 2


@dataclass
class EngineConfig:
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    alpha: float = 0.1
    lam: float = 0.55
    seed_count: int = 2
    max_hops: int = 10
    chunk_tokens: int = 750
    synonym_threshold: float = 0.7
    skeleton: bool = True
    decomposition_limit: int = 1
    replay_visit_budget: int | None = None  # None -> max_hops per seed
    api_token: str = ""
    snapshot_dir: str = ""  # empty: snapshots stay in memory

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgument(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.lam < 1.0:
            raise InvalidArgument(f"lambda must be in (0, 1), got {self.lam}")
        if self.seed_count < 1:
            raise InvalidArgument("seed_count must be >= 1")
        if self.max_hops < 0:
            raise InvalidArgument("max_hops must be >= 0")
        if self.chunk_tokens < 1:
            raise InvalidArgument("chunk_tokens must be >= 1")
        if not 0.0 < self.synonym_threshold <= 1.0:
            raise InvalidArgument("synonym_threshold must be in (0, 1]")
        if self.embedding.truncate_dim is not None and not (
            1 <= self.embedding.truncate_dim <= self.embedding.dim
        ):
            raise InvalidArgument("truncate_dim must be in [1, dim]")

    def fingerprint(self) -> dict[str, Any]:
        """The persisted-snapshot compatibility surface."""
        return {
            "embedding_dim": self.embedding.effective_dim,
            "embedding_model": self.embedding.model,
            "synonym_threshold": self.synonym_threshold,
        }


def _apply_overrides(cfg: EngineConfig, data: dict[str, Any]) -> None:
    for key, value in data.items():
        if key == "embedding":
            for k, v in value.items():
                if not hasattr(cfg.embedding, k):
                    raise InvalidArgument(f"unknown embedding config key: {k}")
                setattr(cfg.embedding, k, v)
        elif key == "llm":
            for k, v in value.items():
                if not hasattr(cfg.llm, k):
                    raise InvalidArgument(f"unknown llm config key: {k}")
                setattr(cfg.llm, k, v)
        elif key == "lambda":  # accepted alias: "lam" shadows the keyword
            cfg.lam = value
        elif hasattr(cfg, key):
            setattr(cfg, key, value)
        else:
            raise InvalidArgument(f"unknown config key: {key}")


_ENV_FIELDS = {
    "ALPHA": ("alpha", float),
    "LAMBDA": ("lam", float),
    "SEED_COUNT": ("seed_count", int),
    "MAX_HOPS": ("max_hops", int),
    "CHUNK_TOKENS": ("chunk_tokens", int),
    "SYNONYM_THRESHOLD": ("synonym_threshold", float),
    "SKELETON": ("skeleton", lambda s: s.lower() not in ("0", "false", "no")),
    "API_TOKEN": ("api_token", str),
}


def load_config(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    env: dict[str, str] | None = None,
) -> EngineConfig:
    """Build an EngineConfig from file, then environment, then explicit overrides."""
    cfg = EngineConfig()
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        _apply_overrides(cfg, data)

    env = os.environ if env is None else env
    for suffix, (attr, conv) in _ENV_FIELDS.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is not None:
            setattr(cfg, attr, conv(raw))
    if env.get(ENV_PREFIX + "EMBED_BASE_URL"):
        cfg.embedding.base_url = env[ENV_PREFIX + "EMBED_BASE_URL"]
    if env.get(ENV_PREFIX + "LLM_BASE_URL"):
        cfg.llm.base_url = env[ENV_PREFIX + "LLM_BASE_URL"]

    if overrides:
        _apply_overrides(cfg, overrides)
    cfg.validate()
    return cfg


def config_to_dict(cfg: EngineConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)
