"""Key information extraction over a parsed document.

Two paths answer the same keys. The text path retrieves chunks of the
parsed document, asks a language model with a prompt built from them and
parses "key: value" lines out of the completion. The image path asks a
vision-language model about the page images one key at a time. The two
answer sets are then fused.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ocrkit.core.document import Document
from ocrkit.errors import ClientFailure, EmbedderFailure, KeyMismatch, OcrkitError
from ocrkit.kie.clients import (
    CONTEXT_HEADER,
    EMPTY_VALUE,
    IMAGE_QUESTION,
    QUESTIONS_HEADER,
    Embedder,
    LlmClient,
    MllmClient,
)
from ocrkit.kie.retrieval import (
    DEFAULT_MAX_CHARS,
    DEFAULT_OVERLAP,
    Chunk,
    build_index,
    chunk_document,
    retrieve,
)

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 5

DEFAULT_TEMPLATE = (
    "Extract key information from the document excerpts below.\n\n"
    "{context_header}\n{context}\n\n"
    "{questions_header}\n{questions}\n\n"
    'Answer with exactly one line per key, in the form "key: value". '
    'Write "key: {empty}" for a key the excerpts do not answer.'
)


class AnswerSource(Enum):
    TextPath = "text"
    ImagePath = "image"
    Fused = "fused"


@dataclass(frozen=True)
class KieAnswer:
    key: str
    value: str = ""
    source: AnswerSource = AnswerSource.TextPath
    chunks: Tuple[int, ...] = ()
    """Indices of the retrieved chunks containing the value."""
    alternate: Optional[str] = None
    """The image path's value when it disagreed with the text path."""


@dataclass
class KieClients:
    llm: LlmClient
    embedder: Embedder
    mllm: Optional[MllmClient] = None


@dataclass(frozen=True)
class KieParams:
    top_k: int = DEFAULT_TOP_K
    max_chars: int = DEFAULT_MAX_CHARS
    overlap: int = DEFAULT_OVERLAP
    mllm_parallelism: int = 1
    template: str = field(default=DEFAULT_TEMPLATE, repr=False)


def build_prompt(keys: Sequence[str], chunks: Sequence[Chunk], template: str = DEFAULT_TEMPLATE) -> str:
    """Fills the template with the chunks, in rank order, then the keys."""
    if not keys:
        raise ValueError("At least one key is required")
    context = "\n\n".join(f"[{i + 1}] {c.text.strip()}" for i, c in enumerate(chunks))
    questions = "\n".join(f"- {k}" for k in keys)
    return template.format(
        context_header=CONTEXT_HEADER,
        context=context,
        questions_header=QUESTIONS_HEADER,
        questions=questions,
        empty=EMPTY_VALUE,
    )


def _clean(value: str) -> str:
    value = value.strip()
    return "" if value.casefold() == EMPTY_VALUE.casefold() else value


def parse_answers(completion: str, keys: Sequence[str]) -> Dict[str, str]:
    """Reads "key: value" lines; keys without a line get an empty value."""
    by_fold = {k.strip().casefold(): k for k in keys}
    found: Dict[str, str] = {}
    for line in completion.splitlines():
        name, sep, value = line.partition(":")
        if not sep:
            continue
        key = by_fold.get(name.strip().lstrip("-* ").casefold())
        if key is not None and key not in found:
            found[key] = _clean(value)

    missing = [k for k in keys if k not in found]
    if missing:
        logger.warning("Language model gave no parseable answer for %s", ", ".join(missing))
    return {k: found.get(k, "") for k in keys}


def _supporting(value: str, ranked: Sequence[Tuple[Chunk, float]], chunks: Sequence[Chunk]) -> Tuple[int, ...]:
    if not value:
        return ()
    position = {c: i for i, c in enumerate(chunks)}
    folded = value.casefold()
    return tuple(position[c] for c, _ in ranked if folded in c.text.casefold())


def extract_text_path(
    doc: Document, keys: Sequence[str], clients: KieClients, params: KieParams = KieParams()
) -> List[KieAnswer]:
    chunks = chunk_document(doc, params.max_chars, params.overlap)
    index = build_index(chunks, clients.embedder)
    ranked = retrieve(index, " ".join(keys), params.top_k)
    prompt = build_prompt(keys, [c for c, _ in ranked], params.template)
    try:
        completion = clients.llm.complete(prompt)
    except OcrkitError:
        raise
    except Exception as e:
        raise ClientFailure(f"Language model failed: {e}", path="text") from e
    values = parse_answers(completion, keys)
    return [
        KieAnswer(k, values[k], AnswerSource.TextPath, _supporting(values[k], ranked, chunks))
        for k in keys
    ]


def extract_image_path(
    pages: Sequence[np.ndarray], keys: Sequence[str], mllm: MllmClient, parallelism: int = 1
) -> List[KieAnswer]:
    """Asks about every page in order; the first non-empty answer wins."""

    def ask(key: str) -> KieAnswer:
        for image in pages:
            try:
                value = _clean(mllm.ask(image, IMAGE_QUESTION.format(key=key)))
            except OcrkitError:
                raise
            except Exception as e:
                raise ClientFailure(f"Vision-language model failed: {e}", path="image") from e
            if value:
                return KieAnswer(key, value, AnswerSource.ImagePath)
        return KieAnswer(key, "", AnswerSource.ImagePath)

    if parallelism <= 1 or len(keys) <= 1:
        return [ask(k) for k in keys]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(ask, keys))


def _normalize(value: str) -> str:
    return " ".join(value.split()).casefold()


def fuse_results(text: Sequence[KieAnswer], image: Sequence[KieAnswer]) -> List[KieAnswer]:
    """Merges the two paths' answers key by key, in the text path's order.

    Agreeing values become one fused answer, a value found by only one
    path is taken from it, and on conflict the text value wins with the
    image value kept as `alternate`. Identical answers pass through as they
    are, so fusing a result with itself changes nothing.
    """
    by_key = {a.key: a for a in image}
    if len(by_key) != len(image) or set(by_key) != {a.key for a in text} or len(text) != len(image):
        raise KeyMismatch("Text and image answers cover different keys")

    fused = []
    for t in text:
        i = by_key[t.key]
        if t == i:
            fused.append(t)
        elif _normalize(t.value) == _normalize(i.value):
            fused.append(KieAnswer(t.key, t.value, AnswerSource.Fused, t.chunks))
        elif not i.value:
            fused.append(t)
        elif not t.value:
            fused.append(i)
        else:
            fused.append(KieAnswer(t.key, t.value, AnswerSource.TextPath, t.chunks, i.value))
    return fused


def extract(
    doc: Document,
    pages: Sequence[np.ndarray],
    keys: Sequence[str],
    clients: KieClients,
    use_mllm: bool = False,
    params: KieParams = KieParams(),
) -> List[KieAnswer]:
    """Answers `keys` from a parsed document and its page images.

    Args:
        doc: The parsed document the text path retrieves from.
        pages: Page images for the image path, in page order.
        keys: Names of the fields to extract.
        clients: Language model, embedder and, for the image path, the
            vision-language model.
        use_mllm: Run the image path and fuse its answers.
        params: Retrieval depth, chunking and image path parallelism.

    Raises:
        ClientFailure: Every enabled path failed. `path` names the text
            path when both did.
    """
    keys = list(keys)
    if not keys:
        raise ValueError("At least one key is required")
    if use_mllm and clients.mllm is None:
        raise ClientFailure("The image path needs a vision-language model client", path="image")

    text_answers: Optional[List[KieAnswer]] = None
    text_error: Optional[ClientFailure] = None
    try:
        text_answers = extract_text_path(doc, keys, clients, params)
    except ClientFailure as e:
        text_error = e
    except EmbedderFailure as e:
        text_error = ClientFailure(f"Retrieval failed: {e}", path="text")
        text_error.__cause__ = e
    if not use_mllm:
        if text_error is not None:
            raise text_error
        return text_answers

    try:
        image_answers = extract_image_path(pages, keys, clients.mllm, params.mllm_parallelism)
    except ClientFailure as e:
        if text_error is not None:
            raise text_error
        logger.warning("Image path failed, answering from the text path only: %s", e)
        return text_answers

    if text_error is not None:
        logger.warning("Text path failed, answering from the image path only: %s", text_error)
        return image_answers
    return fuse_results(text_answers, image_answers)


def _correct(pred: Sequence[KieAnswer], gt: Mapping[str, str]) -> int:
    values = {a.key: a.value for a in pred}
    if len(values) != len(pred) or set(values) != set(gt):
        raise KeyMismatch("Predicted keys differ from ground truth keys")
    return sum(1 for k, v in gt.items() if _normalize(values[k]) == _normalize(v))


def recall_at_1(pred: Sequence[KieAnswer], gt: Mapping[str, str]) -> float:
    """Percentage of keys whose predicted value matches the ground truth
    after trimming, case folding and whitespace collapsing. No keys
    scores 0."""
    correct = _correct(pred, gt)
    return 100.0 * correct / len(gt) if gt else 0.0


def format_recall(value: float) -> str:
    return f"{value:.2f}%"


def evaluate_kie(cases: Sequence[Tuple[Sequence[KieAnswer], Mapping[str, str]]]) -> float:
    """recall@1 pooled over every key of every document."""
    correct = total = 0
    for pred, gt in cases:
        correct += _correct(pred, gt)
        total += len(gt)
    return 100.0 * correct / total if total else 0.0
