"""Layout detection postprocessing: thresholding, NMS, containment."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ocrkit.core.document import Category, LayoutBlock
from ocrkit.core.geometry import BBox, iou

logger = logging.getLogger(__name__)

LABEL_CATEGORIES: Dict[str, Category] = {
    "text": Category.Text,
    "abstract": Category.Text,
    "content": Category.Text,
    "reference": Category.Text,
    "list": Category.Text,
    "title": Category.Title,
    "doc_title": Category.Title,
    "paragraph_title": Category.Title,
    "table": Category.Table,
    "formula": Category.Formula,
    "display_formula": Category.Formula,
    "chart": Category.Chart,
    "image": Category.Image,
    "figure": Category.Image,
    "seal": Category.SealText,
    "caption": Category.Caption,
    "figure_title": Category.Caption,
    "table_title": Category.Caption,
    "chart_title": Category.Caption,
    "header": Category.Header,
    "header_image": Category.Header,
    "footer": Category.Footer,
    "footer_image": Category.Footer,
    "number": Category.Footer,
    "footnote": Category.Footer,
}


def category_of(label: str) -> Category:
    return LABEL_CATEGORIES.get(label.lower(), Category.Other)


@dataclass(frozen=True)
class RawDetection:
    bbox: BBox
    category: Category
    score: float
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"Detection score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class LayoutParams:
    score_thresh: float = 0.5
    nms_iou: float = 0.5
    containment_ratio: float = 0.9

    def __post_init__(self):
        for name in ("score_thresh", "nms_iou", "containment_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def detections_from_boxes(boxes: np.ndarray, labels: Sequence[str]) -> List[RawDetection]:
    """Reads an [N, 6] detector output (x0, y0, x1, y1, score, class id).

    Class ids index `labels`; models without labels yield `Other` blocks.
    """
    dets = []
    for x0, y0, x1, y1, score, cls in np.asarray(boxes, dtype=np.float64).reshape(-1, 6):
        cls = int(cls)
        label = labels[cls] if 0 <= cls < len(labels) else ""
        box = BBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
        dets.append(RawDetection(box, category_of(label), float(np.clip(score, 0, 1)), label))
    return dets


def postprocess_layout(dets: Sequence[RawDetection], p: LayoutParams = LayoutParams()) -> List[LayoutBlock]:
    """Filters raw detections into layout blocks.

    Drops detections under `score_thresh`, runs class-aware NMS (higher
    score wins, then larger area, then earlier input), then drops blocks
    lying at least `containment_ratio` inside a larger block of the same
    category. Survivors keep the NMS order.
    """
    candidates = [d for d in dets if d.score >= p.score_thresh]
    ranked = sorted(
        range(len(candidates)),
        key=lambda i: (-candidates[i].score, -candidates[i].bbox.area, i),
    )

    kept: List[RawDetection] = []
    for i in ranked:
        d = candidates[i]
        if any(k.category is d.category and iou(k.bbox, d.bbox) >= p.nms_iou for k in kept):
            continue
        kept.append(d)

    by_area = sorted(range(len(kept)), key=lambda i: (-kept[i].bbox.area, i))
    dropped = set()
    for pos, i in enumerate(by_area):
        inner = kept[i]
        if inner.bbox.area <= 0:
            continue
        for j in by_area[:pos]:
            if j in dropped:
                continue
            outer = kept[j]
            if outer.category is not inner.category:
                continue
            if outer.bbox.intersection_area(inner.bbox) / inner.bbox.area >= p.containment_ratio:
                dropped.add(i)
                break

    if dropped:
        logger.debug("Dropped %d contained layout blocks", len(dropped))
    return [
        LayoutBlock(d.bbox, d.category, d.score, label=d.label)
        for i, d in enumerate(kept)
        if i not in dropped
    ]
