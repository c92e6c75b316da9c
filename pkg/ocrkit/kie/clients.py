"""Language-model, vision-language-model and embedding clients.

Each client kind has a deterministic mock used in tests and offline runs,
and an adapter for OpenAI-compatible HTTP APIs. `make_llm`, `make_mllm`
and `make_embedder` pick one from a `ClientConfig`.
"""

import base64
import logging
import re
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np
import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ocrkit.errors import ClientFailure, ConfigError, EmbedderFailure
from ocrkit.io import encode_png

logger = logging.getLogger(__name__)

API_TYPES = ("mock", "openai")

CONTEXT_HEADER = "Context:"
QUESTIONS_HEADER = "Questions:"
EMPTY_VALUE = "N/A"
"""Written by the model for a key the context does not answer."""

IMAGE_QUESTION = (
    'What is the value of "{key}" in this document image? '
    "Reply with the value only, or " + EMPTY_VALUE + " if it is not present."
)
_QUESTION_KEY = re.compile(r'"(.*?)"')


@dataclass(frozen=True)
class ClientConfig:
    module_name: str
    """Role of the client: chat_bot, retriever or mllm_chat_bot."""
    model_name: str = ""
    base_url: str = ""
    api_type: str = "mock"
    api_key: Optional[str] = None

    def __post_init__(self):
        if self.api_type not in API_TYPES:
            raise ConfigError(
                f"Unknown api_type {self.api_type!r}, expected one of {', '.join(API_TYPES)}",
                field=f"kie.{self.module_name}.api_type",
            )


class LlmClient(ABC):
    @abstractmethod
    def complete(self, prompt: str) -> str:
        ...


class MllmClient(ABC):
    @abstractmethod
    def ask(self, image: np.ndarray, question: str) -> str:
        ...


class Embedder(ABC):
    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        ...


class HashingEmbedder(Embedder):
    """Hashes character n-grams into a fixed number of buckets.

    Equal texts get equal vectors; vectors are L2-normalised and the empty
    text maps to the zero vector.
    """

    def __init__(self, dim: int = 256, n: int = 3):
        if dim < 1 or n < 1:
            raise ValueError("HashingEmbedder needs dim >= 1 and n >= 1")
        self.dim = dim
        self.n = n

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        text = " ".join(text.casefold().split())
        if not text:
            return vec
        padded = f" {text} "
        for i in range(max(len(padded) - self.n + 1, 1)):
            gram = padded[i : i + self.n]
            vec[zlib.crc32(gram.encode("utf-8")) % self.dim] += 1.0
        return vec / np.linalg.norm(vec)


class EchoLlm(LlmClient):
    """Answers every question with the text following "key:" in the prompt's
    context, or the empty marker when the context has no such line."""

    def complete(self, prompt: str) -> str:
        context, _, questions = prompt.partition(QUESTIONS_HEADER)
        context = context.partition(CONTEXT_HEADER)[2]
        keys = [l[2:].strip() for l in questions.splitlines() if l.startswith("- ")]

        answers = []
        for key in keys:
            found = re.search(rf"{re.escape(key)}\s*[:：]\s*([^\n]+)", context)
            value = found.group(1).strip() if found else EMPTY_VALUE
            answers.append(f"{key}: {value}")
        return "\n".join(answers)


class ScriptedMllm(MllmClient):
    """Looks the quoted key of each question up in a fixed answer table."""

    def __init__(self, answers: Optional[Mapping[str, str]] = None):
        self.answers = dict(answers or {})

    def ask(self, image: np.ndarray, question: str) -> str:
        found = _QUESTION_KEY.search(question)
        key = found.group(1) if found else question
        return self.answers.get(key, EMPTY_VALUE)


def _http_session(retries: int = 3) -> requests.Session:
    session = requests.Session()
    retry = Retry(
        total=retries,
        read=retries,
        connect=retries,
        backoff_factor=0.5,
        status_forcelist=(429, 500, 502, 503, 504),
        allowed_methods=None,
        raise_on_status=False,
    )
    adapter = HTTPAdapter(max_retries=retry)
    session.mount("http://", adapter)
    session.mount("https://", adapter)
    return session


class _OpenAiClient:
    path = "text"

    def __init__(self, cfg: ClientConfig, timeout: float = 60.0):
        if not cfg.base_url:
            raise ClientFailure(f"Client {cfg.module_name} has no base_url", path=self.path)
        if not cfg.api_key:
            raise ClientFailure(f"Client {cfg.module_name} has no api_key", path=self.path)
        self.cfg = cfg
        self.timeout = timeout
        self.session = _http_session()

    def _post(self, endpoint: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        url = f"{self.cfg.base_url.rstrip('/')}/{endpoint}"
        headers = {"Authorization": f"Bearer {self.cfg.api_key}"}
        logger.debug("POST %s model=%s", url, self.cfg.model_name)
        try:
            response = self.session.post(url, headers=headers, json=payload, timeout=self.timeout)
        except requests.RequestException as e:
            raise self._failure(f"Request to {url} failed: {e}") from e
        if response.status_code != 200:
            raise self._failure(f"{url} returned {response.status_code}: {response.text[:200]}")
        try:
            return response.json()
        except ValueError as e:
            raise self._failure(f"{url} returned a body that is not JSON") from e

    def _failure(self, message: str) -> Exception:
        return ClientFailure(message, path=self.path)

    def _chat(self, content: Any) -> str:
        body = self._post(
            "chat/completions",
            {
                "model": self.cfg.model_name,
                "messages": [{"role": "user", "content": content}],
                "temperature": 0,
            },
        )
        try:
            return body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as e:
            raise self._failure(f"Unexpected chat completion body: {body!r:.200}") from e


class OpenAiLlm(_OpenAiClient, LlmClient):
    def complete(self, prompt: str) -> str:
        return self._chat(prompt)


class OpenAiMllm(_OpenAiClient, MllmClient):
    path = "image"

    def ask(self, image: np.ndarray, question: str) -> str:
        url = "data:image/png;base64," + base64.b64encode(encode_png(image)).decode("ascii")
        return self._chat(
            [
                {"type": "text", "text": question},
                {"type": "image_url", "image_url": {"url": url}},
            ]
        )


class OpenAiEmbedder(_OpenAiClient, Embedder):
    def _failure(self, message: str) -> Exception:
        return EmbedderFailure(message)

    def embed(self, text: str) -> np.ndarray:
        body = self._post("embeddings", {"model": self.cfg.model_name, "input": text})
        try:
            return np.asarray(body["data"][0]["embedding"], dtype=np.float64)
        except (KeyError, IndexError, TypeError) as e:
            raise EmbedderFailure(f"Unexpected embeddings body: {body!r:.200}") from e


def make_llm(cfg: ClientConfig) -> LlmClient:
    if cfg.api_type == "mock":
        return EchoLlm()
    return OpenAiLlm(cfg)


def make_mllm(cfg: ClientConfig, answers: Optional[Mapping[str, str]] = None) -> MllmClient:
    if cfg.api_type == "mock":
        return ScriptedMllm(answers)
    return OpenAiMllm(cfg)


def make_embedder(cfg: ClientConfig) -> Embedder:
    if cfg.api_type == "mock":
        return HashingEmbedder()
    return OpenAiEmbedder(cfg)
