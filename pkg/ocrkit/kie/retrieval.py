"""Chunking parsed documents and exact vector search over the chunks."""

import bisect
import html
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ocrkit.core.document import Document, DocumentItem, ImageItem, TableItem
from ocrkit.errors import EmbedderFailure, OcrkitError
from ocrkit.kie.clients import Embedder

DEFAULT_MAX_CHARS = 512
DEFAULT_OVERLAP = 64

_CELL_RE = re.compile(r"<td[^>]*>(.*?)</td>", re.DOTALL)


@dataclass(frozen=True)
class Chunk:
    """A slice of the document text.

    `span` is the [start, end) character range in the concatenated
    document text; `page_index` and `item_index` locate the item the
    chunk starts in.
    """

    text: str
    page_index: int
    item_index: int
    span: Tuple[int, int]


def item_text(item: DocumentItem) -> str:
    """Text an item contributes to retrieval; tables give their cell texts."""
    if isinstance(item, ImageItem):
        return ""
    if isinstance(item, TableItem):
        cells = (html.unescape(c).strip() for c in _CELL_RE.findall(item.html))
        return " ".join(c for c in cells if c)
    return item.content


def _split_end(text: str, start: int, max_chars: int) -> int:
    end = min(start + max_chars, len(text))
    if end == len(text):
        return end
    for i in range(end, start, -1):
        if text[i].isspace():
            return i
    return end


def chunk_document(
    doc: Document, max_chars: int = DEFAULT_MAX_CHARS, overlap: int = DEFAULT_OVERLAP
) -> List[Chunk]:
    """Splits the document text into overlapping chunks.

    Items are joined in reading order with newlines. A chunk ends at the
    last whitespace before `max_chars` (or hard at `max_chars` when there
    is none) and the next one starts `overlap` characters before that end.
    """
    if not 0 <= overlap < max_chars:
        raise ValueError(f"Need 0 <= overlap < max_chars, got {overlap} and {max_chars}")

    parts: List[str] = []
    starts: List[int] = []
    owners: List[Tuple[int, int]] = []
    offset = 0
    for page in doc.pages:
        for item in page.items:
            text = item_text(item)
            if not text:
                continue
            if parts:
                offset += 1
            starts.append(offset)
            owners.append((page.index, item.order_index))
            parts.append(text)
            offset += len(text)
    full = "\n".join(parts)

    chunks = []
    start = 0
    while start < len(full):
        end = _split_end(full, start, max_chars)
        piece = full[start:end]
        if piece.strip():
            page_index, item_index = owners[bisect.bisect_right(starts, start) - 1]
            chunks.append(Chunk(piece, page_index, item_index, (start, end)))
        if end >= len(full):
            break
        start = max(end - overlap, start + 1)
    return chunks


def _embed(embedder: Embedder, text: str) -> np.ndarray:
    try:
        vec = np.asarray(embedder.embed(text), dtype=np.float64).reshape(-1)
    except OcrkitError:
        raise
    except Exception as e:
        raise EmbedderFailure(f"Embedder failed: {e}") from e
    if vec.size == 0 or not np.all(np.isfinite(vec)):
        raise EmbedderFailure("Embedder returned an empty or non-finite vector")
    return vec


class VectorIndex:
    """Chunks and their embeddings, searched exhaustively by cosine similarity."""

    def __init__(self, embedder: Embedder, chunks: Sequence[Chunk], vectors: np.ndarray):
        self.embedder = embedder
        self.chunks = list(chunks)
        self.vectors = vectors

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def dim(self) -> Optional[int]:
        return self.vectors.shape[1] if len(self.chunks) else None


def build_index(chunks: Sequence[Chunk], embedder: Embedder) -> VectorIndex:
    vectors = [_embed(embedder, c.text) for c in chunks]
    dims = {v.size for v in vectors}
    if len(dims) > 1:
        raise EmbedderFailure(f"Embedder returned vectors of different sizes: {sorted(dims)}")
    matrix = np.stack(vectors) if vectors else np.zeros((0, 0))
    return VectorIndex(embedder, chunks, matrix)


def cosine_scores(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine of every row with `query`; zero-norm vectors score 0."""
    norms = np.linalg.norm(vectors, axis=1) * np.linalg.norm(query)
    dots = vectors @ query
    return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)


def retrieve(index: VectorIndex, query: str, k: int) -> List[Tuple[Chunk, float]]:
    """Top `k` chunks by cosine similarity, best first; ties keep chunk order."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if not len(index):
        return []
    q = _embed(index.embedder, query)
    if q.size != index.dim:
        raise EmbedderFailure(f"Query vector has size {q.size}, index holds size {index.dim}")
    scores = cosine_scores(index.vectors, q)
    ranked = sorted(range(len(index)), key=lambda i: (-scores[i], i))[:k]
    return [(index.chunks[i], float(scores[i])) for i in ranked]
