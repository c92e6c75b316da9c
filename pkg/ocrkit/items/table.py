"""Table routing and HTML assembly.

The structure model emits ids into `STRUCTURE_VOCAB`; the cell model
emits one box per `<td>` slot. OCR lines are matched to cells by
overlap and the cell texts are spliced into the token stream.
"""

import html
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Union

import numpy as np

from ocrkit.core.document import TextLine
from ocrkit.core.geometry import BBox
from ocrkit.errors import StructureMismatch

logger = logging.getLogger(__name__)

MAX_SPAN = 20
CELL_OVERLAP = 0.5

STRUCTURE_VOCAB = (
    ("<table>", "</table>", "<tr>", "</tr>", "<td>", "</td>")
    + tuple(f"<td colspan={k}>" for k in range(2, MAX_SPAN + 1))
    + tuple(f"<td rowspan={k}>" for k in range(2, MAX_SPAN + 1))
)
_VOCAB_SET = frozenset(STRUCTURE_VOCAB)
_TOKEN_RE = re.compile(r"<[^<>]+>")

ROTATIONS = (0, 90, 180, 270)


class Frame(Enum):
    Wired = "wired"
    Wireless = "wireless"


@dataclass(frozen=True)
class TableRoute:
    orientation: int = 0
    frame: Frame = Frame.Wired


def route_table(orientation_scores: Sequence[float], frame_scores: Sequence[float]) -> TableRoute:
    """Argmax of both classifiers; ties go to 0 degrees and Wired."""
    orientation = ROTATIONS[int(np.argmax(np.asarray(orientation_scores).reshape(-1)[:4]))]
    frame = (Frame.Wired, Frame.Wireless)[int(np.argmax(np.asarray(frame_scores).reshape(-1)[:2]))]
    return TableRoute(orientation, frame)


@dataclass(frozen=True)
class TableCell:
    bbox: BBox
    text: str = ""


def decode_structure(ids: Sequence[int]) -> List[str]:
    tokens = []
    for i in ids:
        i = int(i)
        if not 0 <= i < len(STRUCTURE_VOCAB):
            raise StructureMismatch(f"Structure token id {i} is outside the vocabulary")
        tokens.append(STRUCTURE_VOCAB[i])
    return tokens


def tokenize_structure(markup: str) -> List[str]:
    """Splits a tag string such as "<table><tr>...</table>" into tokens."""
    if _TOKEN_RE.sub("", markup).strip():
        raise StructureMismatch(f"Structure markup has text outside tags: {markup!r}")
    return _TOKEN_RE.findall(markup)


def check_structure(tokens: Sequence[str]) -> int:
    """Validates nesting and returns the number of `<td>` slots."""
    stack = []
    slots = 0
    for tok in tokens:
        if tok not in _VOCAB_SET:
            raise StructureMismatch(f"Unknown structure token {tok!r}")
        if tok.startswith("</"):
            name = tok[2:-1]
            if not stack or stack[-1] != name:
                raise StructureMismatch(f"Unbalanced structure token {tok}")
            stack.pop()
            continue
        name = tok[1:-1].split(" ")[0]
        expected_parent = {"table": None, "tr": "table", "td": "tr"}[name]
        parent = stack[-1] if stack else None
        if parent != expected_parent:
            raise StructureMismatch(f"{tok} cannot appear inside {parent or 'nothing'}")
        if name == "td":
            slots += 1
        stack.append(name)
    if stack:
        raise StructureMismatch(f"Unclosed structure tokens: {stack}")
    return slots


def match_lines(cells: Sequence[BBox], lines: Sequence[TextLine]) -> List[List[TextLine]]:
    """Assigns each line to the cell covering most of it, if that cell
    covers at least half of the line."""
    assigned: List[List[TextLine]] = [[] for _ in cells]
    for line in lines:
        box = line.bbox
        best: Optional[int] = None
        best_overlap = 0.0
        if box.area > 0:
            for k, cell in enumerate(cells):
                overlap = box.intersection_area(cell) / box.area
                if overlap > best_overlap:
                    best, best_overlap = k, overlap
        if best is None or best_overlap < CELL_OVERLAP:
            logger.warning("Table line %r matches no cell, dropping it", line.text)
            continue
        assigned[best].append(line)
    return assigned


def cell_text(lines: Sequence[TextLine]) -> str:
    ordered = sorted(lines, key=lambda l: (l.bbox.y0, l.bbox.x0))
    return " ".join(l.text for l in ordered if l.text)


def assemble_table_html(
    tokens: Union[str, Sequence[str]],
    cells: Sequence[BBox],
    ocr_lines: Sequence[TextLine],
) -> str:
    """Fills every `<td>` slot with the text of its cell.

    Args:
        tokens: Structure tokens, or the same tags as one string.
        cells: One box per `<td>` slot, in token order.
        ocr_lines: Recognized lines in the same coordinates as `cells`.

    Raises:
        StructureMismatch: The tokens are malformed or their slot count
            differs from the number of cells.
    """
    if isinstance(tokens, str):
        tokens = tokenize_structure(tokens)
    slots = check_structure(tokens)
    if slots != len(cells):
        raise StructureMismatch(f"Structure has {slots} cells but {len(cells)} were detected")

    texts = [html.escape(cell_text(ls), quote=False) for ls in match_lines(cells, ocr_lines)]
    out = []
    k = 0
    for tok in tokens:
        out.append(tok)
        if tok.startswith("<td"):
            out.append(texts[k])
            k += 1
    return "".join(out)


def order_cells(boxes: Sequence[BBox]) -> List[BBox]:
    """Row-major order for detected cells: top to bottom, then left to right."""
    return sorted(boxes, key=lambda b: (b.y0, b.x0))
