"""Live-provider wire formats and retry behavior, via httpx mock transports."""

import json

import httpx
import numpy as np
import pytest

from kgmemo.config import EmbeddingConfig, LlmConfig
from kgmemo.embedding import HttpEmbedder
from kgmemo.errors import TransportError
from kgmemo.llm import HttpChatLlm, LlmGateway
from kgmemo.prompts import PromptKind


def embed_transport(dim=8, fail_first=0):
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        if calls["n"] <= fail_first:
            return httpx.Response(503, text="busy")
        body = json.loads(request.content)
        assert body["model"] == "embed-model"
        assert isinstance(body["input"], list)
        return httpx.Response(200, json={"data": [{"embedding": [1.0] + [0.0] * (dim - 1)}]})

    return httpx.MockTransport(handler), calls


def test_http_embedder_round_trip_and_normalization():
    transport, calls = embed_transport()
    emb = HttpEmbedder(EmbeddingConfig(provider="http", model="embed-model", dim=8,
                                       base_url="http://embed.test"),
                       transport=transport)
    vec = emb.embed("hello")
    assert vec.shape == (8,)
    assert np.linalg.norm(vec) == pytest.approx(1.0)
    assert calls["n"] == 1


def test_http_embedder_retries_then_succeeds():
    transport, calls = embed_transport(fail_first=2)
    emb = HttpEmbedder(EmbeddingConfig(provider="http", model="embed-model", dim=8,
                                       base_url="http://embed.test"),
                       max_retries=2, transport=transport)
    emb.embed("hello")
    assert calls["n"] == 3


def test_http_embedder_exhausted_retries_raise_transport_error():
    transport, _ = embed_transport(fail_first=10)
    emb = HttpEmbedder(EmbeddingConfig(provider="http", model="embed-model", dim=8,
                                       base_url="http://embed.test"),
                       max_retries=1, transport=transport)
    with pytest.raises(TransportError) as err:
        emb.embed("hello")
    assert err.value.attempts == 2


def chat_transport():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        seen.update(body)
        return httpx.Response(200, json={
            "choices": [{"message": {"content": "A fine summary."}}],
            "usage": {"prompt_tokens": 321, "completion_tokens": 17},
        })

    return httpx.MockTransport(handler), seen


def test_http_chat_uses_provider_usage_and_fixed_sampling():
    transport, seen = chat_transport()
    backend = HttpChatLlm(LlmConfig(provider="http", model="chat-model",
                                    base_url="http://llm.test"),
                          transport=transport)
    gw = LlmGateway(backend)
    exchange = gw.complete(PromptKind.SUMMARIZE_CHUNK, {"text": "body"}, scope="s")
    assert exchange.parsed == "A fine summary."
    assert exchange.prompt_tokens == 321  # provider-reported, not re-tokenized
    assert exchange.completion_tokens == 17
    assert seen["temperature"] == 0.0
    assert seen["seed"] == 123
    assert seen["messages"][0]["role"] == "user"
