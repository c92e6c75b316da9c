"""Synthetic pages and an engine that answers every model task from them.

A page is drawn as white paper with one solid rectangle per text line.
Line k is painted in the colour (k, 64, 128), so the recognizer can tell
which line a crop shows and answer with that line's text. Layout, table,
formula, chart, seal and region models answer from the page description.
"""

import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest

from ocrkit.backends.descriptor import EngineKind, ModelDescriptor, Task, load_registry
from ocrkit.backends.engine import Engine, EngineConfig
from ocrkit.backends.registry import EngineRegistry, Session
from ocrkit.backends.tensor import DType, Tensor, TensorMap
from ocrkit.io import save_png
from ocrkit.items.table import STRUCTURE_VOCAB, tokenize_structure

CHARSET = string.ascii_letters + string.digits + " :.,-"

LAYOUT_LABELS = (
    "text",
    "doc_title",
    "paragraph_title",
    "table",
    "formula",
    "chart",
    "image",
    "seal",
    "figure_title",
    "table_title",
    "header",
    "footer",
)

LINE_G, LINE_B = 64, 128

Box = Tuple[float, float, float, float]


@dataclass
class PageSpec:
    width: int
    height: int
    lines: List[Tuple[Box, str]] = field(default_factory=list)
    blocks: List[Tuple[Box, str]] = field(default_factory=list)
    """Layout boxes and their labels; every block scores 0.95."""
    regions: List[Box] = field(default_factory=list)
    tables: Dict[int, Tuple[str, List[Box]]] = field(default_factory=dict)
    """Block index -> (structure markup, cell boxes in page coordinates)."""
    formulas: Dict[int, str] = field(default_factory=dict)
    charts: Dict[int, str] = field(default_factory=dict)
    seals: Dict[int, List[List[Tuple[float, float]]]] = field(default_factory=dict)
    """Block index -> polygons in crop coordinates."""


def render(spec: PageSpec) -> np.ndarray:
    image = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)
    for k, ((x0, y0, x1, y1), _) in enumerate(spec.lines):
        image[int(y0) : int(y1), int(x0) : int(x1)] = (k, LINE_G, LINE_B)
    return image


def crop_origin_and_shape(box: Box) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    x0, y0, x1, y1 = box
    ox, oy = int(np.floor(x0)), int(np.floor(y0))
    return (ox, oy), (int(np.ceil(y1)) - oy, int(np.ceil(x1)) - ox)


def _logits(text: str) -> np.ndarray:
    classes = len(CHARSET) + 1
    steps = np.zeros((2 * len(text), classes), dtype=np.float32)
    for t, ch in enumerate(text):
        steps[2 * t, CHARSET.index(ch) + 1] = 1.0
        steps[2 * t + 1, 0] = 1.0
    return steps[None]


def _boxes(boxes: Sequence[Box], classes: Optional[Sequence[int]] = None) -> Tensor:
    rows = [
        [*box, 0.95, classes[k] if classes is not None else 0] for k, box in enumerate(boxes)
    ]
    return Tensor.from_array(np.asarray(rows, dtype=np.float32).reshape(-1, 6), DType.F32)


class ScriptedEngine(Engine):
    """Deterministic stand-in for every model task, driven by a PageSpec."""

    kind = EngineKind.PortableGraph

    def __init__(self, cfg: EngineConfig, spec: PageSpec):
        super().__init__(cfg)
        self.spec = spec
        self.calls: Counter = Counter()

    def _block_for(self, crop: np.ndarray, indices) -> Optional[int]:
        for k in indices:
            _, shape = crop_origin_and_shape(self.spec.blocks[k][0])
            if shape == crop.shape[:2]:
                return k
        return None

    def _line_id(self, crop: np.ndarray) -> Optional[int]:
        mask = (crop[:, :, 1] == LINE_G) & (crop[:, :, 2] == LINE_B)
        if not mask.any():
            return None
        values, counts = np.unique(crop[:, :, 0][mask], return_counts=True)
        return int(values[np.argmax(counts)])

    def infer(self, model: ModelDescriptor, inputs: TensorMap) -> TensorMap:
        self.calls[model.task] += 1
        image = inputs["image"].array()[0]
        task = model.task

        if task is Task.TextDet:
            prob = (image.min(axis=2) < 250).astype(np.float32)
            return {"prob_map": Tensor.from_array(prob[None], DType.F32)}
        if task is Task.TextRec:
            k = self._line_id(image)
            text = self.spec.lines[k][1] if k is not None and k < len(self.spec.lines) else ""
            return {"logits": Tensor.from_array(_logits(text), DType.F32)}
        if task is Task.DocOrientation:
            return {"scores": Tensor.from_array([[1.0, 0.0, 0.0, 0.0]], DType.F32)}
        if task is Task.LineOrientation:
            return {"scores": Tensor.from_array([[1.0, 0.0]], DType.F32)}
        if task is Task.Unwarp:
            return {"image": Tensor.from_image(image)}
        if task is Task.Layout:
            boxes = [b for b, _ in self.spec.blocks]
            classes = [LAYOUT_LABELS.index(label) for _, label in self.spec.blocks]
            return {"boxes": _boxes(boxes, classes)}
        if task is Task.RegionDet:
            return {"boxes": _boxes(self.spec.regions)}
        if task is Task.TableCls:
            return {
                "orientation": Tensor.from_array([[1.0, 0.0, 0.0, 0.0]], DType.F32),
                "frame": Tensor.from_array([[1.0, 0.0]], DType.F32),
            }
        if task is Task.TableCell:
            k = self._block_for(image, self.spec.tables)
            cells: List[Box] = []
            if k is not None:
                (ox, oy), _ = crop_origin_and_shape(self.spec.blocks[k][0])
                cells = [(x0 - ox, y0 - oy, x1 - ox, y1 - oy) for x0, y0, x1, y1 in self.spec.tables[k][1]]
            return {"boxes": _boxes(cells)}
        if task is Task.TableStruct:
            k = self._block_for(image, self.spec.tables)
            markup = self.spec.tables[k][0] if k is not None else "<table></table>"
            ids = [STRUCTURE_VOCAB.index(t) for t in tokenize_structure(markup)]
            return {"tokens": Tensor.from_array(np.asarray([ids], dtype=np.int64), DType.I64)}
        if task is Task.Formula:
            k = self._block_for(image, self.spec.formulas)
            return {"text": Tensor.from_text(self.spec.formulas.get(k, ""))}
        if task is Task.Chart:
            k = self._block_for(image, self.spec.charts)
            return {"text": Tensor.from_text(self.spec.charts.get(k, ""))}
        if task is Task.Seal:
            k = self._block_for(image, self.spec.seals)
            polys = self.spec.seals.get(k, [])
            arr = np.asarray(polys, dtype=np.float32).reshape(len(polys), -1, 2) if polys else np.zeros((0, 0, 2), np.float32)
            return {"polygons": Tensor.from_array(arr, DType.F32)}
        raise AssertionError(f"Unhandled task {task}")


def model_entries(charset_path: Path) -> List[dict]:
    """Registry entries for one model per task, named after the task."""
    entries = []
    for task in Task:
        entry = {"name": task.value, "task": task.value, "artifact_path": f"models/{task.value}.onnx"}
        if task is Task.TextRec:
            entry["charset_path"] = str(charset_path)
        if task is Task.Layout:
            entry["labels"] = list(LAYOUT_LABELS)
        entries.append(entry)
    return entries


def write_charset(path: Path) -> Path:
    path.write_text("".join(f"{ch}\n" for ch in CHARSET), encoding="utf-8")
    return path


def scripted_session(spec: PageSpec, charset_path: Path, cfg: EngineConfig = EngineConfig()) -> Session:
    registry = EngineRegistry()
    registry.register_engine(EngineKind.PortableGraph, lambda c: ScriptedEngine(c, spec))
    return Session(registry, load_registry(model_entries(charset_path)), cfg)


def engine_of(session: Session) -> ScriptedEngine:
    (engine,) = session.engines()
    return engine


def paragraph_page() -> PageSpec:
    """One text block holding two lines."""
    return PageSpec(
        width=400,
        height=300,
        lines=[((40, 60, 360, 90), "Hello world"), ((40, 120, 300, 150), "second line")],
        blocks=[((20, 40, 380, 170), "text")],
    )


TABLE_MARKUP = "<table><tr><td></td><td></td></tr><tr><td></td><td></td></tr></table>"


def report_page() -> PageSpec:
    """A title over two columns.

    Left column: text, figure, figure caption, formula. Right column:
    text, a 2x2 table and its caption.
    """
    return PageSpec(
        width=800,
        height=900,
        lines=[
            ((60, 40, 500, 70), "Annual Report"),
            ((50, 130, 370, 160), "Left column first line"),
            ((50, 180, 370, 210), "left column second line"),
            ((50, 575, 300, 600), "Figure 1: Sales"),
            ((430, 130, 750, 160), "Right column text"),
            ((440, 660, 570, 700), "A"),
            ((610, 660, 740, 700), "B"),
            ((440, 745, 570, 785), "1"),
            ((610, 745, 740, 785), "2"),
            ((430, 825, 700, 850), "Table 1: Totals"),
        ],
        blocks=[
            ((40, 30, 760, 80), "doc_title"),
            ((40, 120, 380, 300), "text"),
            ((40, 330, 380, 560), "image"),
            ((40, 570, 380, 615), "figure_title"),
            ((40, 650, 380, 720), "formula"),
            ((420, 120, 760, 600), "text"),
            ((420, 640, 760, 810), "table"),
            ((420, 820, 760, 865), "table_title"),
        ],
        tables={
            6: (
                TABLE_MARKUP,
                [(420, 640, 590, 725), (590, 640, 760, 725), (420, 725, 590, 810), (590, 725, 760, 810)],
            )
        },
        formulas={4: "E = mc^2"},
    )


REPORT_MARKDOWN = (
    "# Annual Report\n\n"
    "Left column first line left column second line\n\n"
    '![](page0_item2.png "Figure 1: Sales")\n\n'
    "$$\nE = mc^2\n$$\n\n"
    "Right column text\n\n"
    "<table><tr><td>A</td><td>B</td></tr><tr><td>1</td><td>2</td></tr></table>\n\n"
    "Table 1: Totals\n"
)


@pytest.fixture
def charset_file(tmp_path) -> Path:
    return write_charset(tmp_path / "charset.txt")


@pytest.fixture
def paragraph(tmp_path, charset_file):
    """(spec, page image, image path, session) for the paragraph page."""
    spec = paragraph_page()
    image = render(spec)
    path = tmp_path / "paragraph.png"
    save_png(path, image)
    return spec, image, path, scripted_session(spec, charset_file)


@pytest.fixture
def report(tmp_path, charset_file):
    """(spec, page image, image path, session) for the two-column report page."""
    spec = report_page()
    image = render(spec)
    path = tmp_path / "report.png"
    save_png(path, image)
    return spec, image, path, scripted_session(spec, charset_file)
