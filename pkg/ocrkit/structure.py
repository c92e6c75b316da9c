"""Document structure parsing: a page image in, typed items in reading order out.

Stages, in the order they run on each page:

    preprocessing (orientation, unwarping) -> OCR -> layout detection
    -> region detection -> reading order -> item recognition
    -> caption linking

Every stage works on the preprocessed page; geometry is mapped back to
the input page before the result is returned. A recognizer that is
switched off or fails on a block leaves the block as an image item, so one
bad table never costs the rest of the page.
"""

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm.auto import tqdm

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor
from ocrkit.compose.captions import apply_caption_links, link_captions
from ocrkit.compose.output import image_name
from ocrkit.core.document import (
    CaptionItem,
    Category,
    ChartItem,
    Document,
    DocumentItem,
    FormulaItem,
    ImageItem,
    LayoutBlock,
    Page,
    SealItem,
    TableItem,
    TextItem,
    TextLine,
    TitleItem,
)
from ocrkit.core.geometry import BBox, Polygon
from ocrkit.errors import (
    ChartInvalid,
    ConfigError,
    DegenerateGeometry,
    EngineFailure,
    FormulaInvalid,
    ShapeMismatch,
    StructureMismatch,
)
from ocrkit.io import encode_png, load_pages
from ocrkit.items.chart import chart_to_table
from ocrkit.items.formula import recognize_formula
from ocrkit.items.seal import rectify_seal_text
from ocrkit.items.table import assemble_table_html, decode_structure, order_cells, route_table
from ocrkit.layout.order import (
    CutParams,
    OrderMode,
    assign_regions,
    detect_order_mode,
    recover_reading_order,
)
from ocrkit.layout.postprocess import (
    LayoutParams,
    RawDetection,
    detections_from_boxes,
    postprocess_layout,
)
from ocrkit.ocr.pipeline import OcrConfig, OcrPipeline, map_line
from ocrkit.ocr.preprocess import PointMap, identity, rotate_upright

logger = logging.getLogger(__name__)

LINE_OVERLAP = 0.5
"""Share of a text line's area a block must cover to own the line."""

SUBTITLE_LABEL = "paragraph_title"

# failures that turn a block into an image item instead of failing the page
_DEGRADABLE = (
    EngineFailure,
    ShapeMismatch,
    StructureMismatch,
    FormulaInvalid,
    ChartInvalid,
    DegenerateGeometry,
)


@dataclass(frozen=True)
class StructureModels:
    layout: str = "layout"
    region_det: str = "region_det"
    table_cls: str = "table_cls"
    table_cell: str = "table_cell"
    table_struct: str = "table_struct"
    formula: str = "formula"
    chart: str = "chart"
    seal: str = "seal"


@dataclass(frozen=True)
class StructureConfig:
    ocr: OcrConfig = OcrConfig()
    use_region_detection: bool = False
    use_table_recognition: bool = True
    use_formula_recognition: bool = True
    use_chart_recognition: bool = False
    use_seal_recognition: bool = True
    order_mode: Optional[OrderMode] = OrderMode.Horizontal
    """None picks the mode per page from the shape of its text lines."""
    layout: LayoutParams = LayoutParams()
    cut: CutParams = CutParams()
    include_header_footer: bool = False
    models: StructureModels = StructureModels()

    def bound_models(self) -> List[Tuple[str, str]]:
        m = self.models
        bound = [("layout", m.layout)]
        if self.use_region_detection:
            bound.append(("use_region_detection", m.region_det))
        if self.use_table_recognition:
            bound += [
                ("use_table_recognition", m.table_cls),
                ("use_table_recognition", m.table_cell),
                ("use_table_recognition", m.table_struct),
            ]
        if self.use_formula_recognition:
            bound.append(("use_formula_recognition", m.formula))
        if self.use_chart_recognition:
            bound.append(("use_chart_recognition", m.chart))
        if self.use_seal_recognition:
            bound.append(("use_seal_recognition", m.seal))
        return bound


def _crop_box(image: np.ndarray, box: BBox) -> Optional[Tuple[int, int, np.ndarray]]:
    """Whole-pixel crop covering `box`; None when nothing is left after clipping."""
    h, w = image.shape[:2]
    x0, y0 = max(int(math.floor(box.x0)), 0), max(int(math.floor(box.y0)), 0)
    x1, y1 = min(int(math.ceil(box.x1)), w), min(int(math.ceil(box.y1)), h)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, np.ascontiguousarray(image[y0:y1, x0:x1])


def _line_key(mode: OrderMode):
    if mode is OrderMode.Vertical:
        return lambda l: (-l.bbox.x1, l.bbox.y0)
    return lambda l: (l.bbox.y0, l.bbox.x0)


def assign_lines(blocks: Sequence[LayoutBlock], lines: Sequence[TextLine]) -> List[List[TextLine]]:
    """Gives each line to the block covering most of its area, if that
    block covers at least half of it. Ties go to the earlier block."""
    owned: List[List[TextLine]] = [[] for _ in blocks]
    for line in lines:
        area = line.bbox.area
        if area <= 0:
            continue
        best, best_overlap = None, 0.0
        for k, block in enumerate(blocks):
            overlap = line.bbox.intersection_area(block.bbox) / area
            if overlap > best_overlap:
                best, best_overlap = k, overlap
        if best is not None and best_overlap >= LINE_OVERLAP:
            owned[best].append(line)
    return owned


def _map_bbox(box: BBox, to_input: PointMap, width: float, height: float) -> BBox:
    if to_input is identity:
        return box
    corners = np.array(
        [[box.x0, box.y0], [box.x1, box.y0], [box.x1, box.y1], [box.x0, box.y1]]
    )
    pts = to_input(corners)
    mapped = BBox(pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
    return mapped.clip(width, height)


class StructurePipeline:
    def __init__(self, session: Session, cfg: StructureConfig = StructureConfig()):
        self.session = session
        self.cfg = cfg
        for toggle, name in cfg.bound_models():
            if name not in session.models:
                raise ConfigError(
                    f"Stage {toggle} needs model {name}, which is not in the model registry",
                    field="structure.models",
                )
        self.ocr = OcrPipeline(session, cfg.ocr)
        self.labels = session.model(cfg.models.layout).labels

    def detect_blocks(self, image: np.ndarray) -> List[LayoutBlock]:
        boxes = self.session.infer(self.cfg.models.layout, {"image": Tensor.from_image(image)})
        dets = detections_from_boxes(boxes["boxes"].array(), self.labels)
        return postprocess_layout(dets, self.cfg.layout)

    def detect_regions(self, image: np.ndarray) -> List[RawDetection]:
        boxes = self.session.infer(self.cfg.models.region_det, {"image": Tensor.from_image(image)})
        dets = detections_from_boxes(boxes["boxes"].array(), ())
        return [d for d in dets if d.score >= self.cfg.layout.score_thresh]

    def recognize_table(self, crop: np.ndarray, lines: Sequence[TextLine]) -> str:
        """HTML for a table crop; `lines` are in crop coordinates."""
        m = self.cfg.models
        cls = self.session.infer(m.table_cls, {"image": Tensor.from_image(crop)})
        route = route_table(cls["orientation"].array(), cls["frame"].array())
        if route.orientation:
            crop, _ = rotate_upright(crop, route.orientation)
            lines, _ = self.ocr.read(crop)
        logger.debug("Table routed as %s, rotated %d degrees", route.frame.value, route.orientation)

        cell_out = self.session.infer(m.table_cell, {"image": Tensor.from_image(crop)})
        cells = order_cells([d.bbox for d in detections_from_boxes(cell_out["boxes"].array(), ())])
        struct = self.session.infer(m.table_struct, {"image": Tensor.from_image(crop)})
        tokens = decode_structure(struct["tokens"].array().reshape(-1))
        return assemble_table_html(tokens, cells, lines)

    def recognize_seal(self, crop: np.ndarray) -> str:
        polygons = self.session.infer(self.cfg.models.seal, {"image": Tensor.from_image(crop)})
        texts = []
        for pts in polygons["polygons"].array():
            if len(pts) < 3:
                logger.warning("Skipping seal polygon with %d points", len(pts))
                continue
            try:
                line = rectify_seal_text(Polygon.from_array(pts), crop)
            except DegenerateGeometry as e:
                logger.warning("Skipping seal polygon: %s", e)
                continue
            text, _ = self.ocr.recognize_crop(line)
            if text:
                texts.append(text)
        return " ".join(texts)

    def _item(
        self,
        block: LayoutBlock,
        image: np.ndarray,
        lines: List[TextLine],
        mode: OrderMode,
        page_index: int,
        order_index: int,
        trace: List[str],
    ) -> DocumentItem:
        common = dict(
            bbox=block.bbox,
            page_index=page_index,
            order_index=order_index,
            region_id=block.region_id,
        )
        category = block.category
        text = " ".join(l.text for l in sorted(lines, key=_line_key(mode)) if l.text)
        if category is Category.Title:
            return TitleItem(text=text, level=2 if block.label == SUBTITLE_LABEL else 1, **common)
        if category is Category.Caption:
            return CaptionItem(text=text, **common)
        if category in (Category.Text, Category.Header, Category.Footer, Category.Other):
            return TextItem(text=text, kind=category, **common)

        cropped = _crop_box(image, block.bbox)
        image_item = ImageItem(
            path=image_name(page_index, order_index),
            data=encode_png(cropped[2]) if cropped is not None else None,
            **common,
        )
        if category is Category.Image or cropped is None:
            return image_item

        x0, y0, crop = cropped
        enabled = {
            Category.Table: self.cfg.use_table_recognition,
            Category.Formula: self.cfg.use_formula_recognition,
            Category.Chart: self.cfg.use_chart_recognition,
            Category.SealText: self.cfg.use_seal_recognition,
        }[category]
        if not enabled:
            logger.warning(
                "%s recognition is off, keeping block %d as an image",
                category.value, order_index,
            )
            return image_item

        stage = category.value
        if stage not in trace:
            trace.append(stage)
        try:
            if category is Category.Table:
                local = [replace(l, geometry=l.geometry.translate(-x0, -y0)) for l in lines]
                return TableItem(html=self.recognize_table(crop, local), **common)
            if category is Category.Formula:
                latex = recognize_formula(self.session, self.cfg.models.formula, crop)
                return FormulaItem(latex=latex, **common)
            if category is Category.Chart:
                table = chart_to_table(self.session, self.cfg.models.chart, crop)
                return ChartItem(markdown_table=table, **common)
            return SealItem(text=self.recognize_seal(crop), **common)
        except _DEGRADABLE as e:
            logger.warning(
                "%s recognition failed on block %d, keeping it as an image: %s",
                category.value, order_index, e,
            )
            return image_item

    def __call__(self, image: np.ndarray, page_index: int = 0) -> Page:
        prepared = self.ocr.preprocess(image)
        img = prepared.image
        lines, ocr_trace = self.ocr.read(img)
        trace = prepared.trace + ocr_trace

        blocks = self.detect_blocks(img)
        trace.append("layout")

        mode = self.cfg.order_mode or detect_order_mode(lines)
        if self.cfg.use_region_detection:
            blocks = assign_regions(blocks, self.detect_regions(img), mode, self.cfg.cut)
            trace.append("region_det")
        else:
            # without region detection the page is a single article
            blocks = [replace(b, region_id=0) for b in blocks]

        order = recover_reading_order(blocks, mode, self.cfg.cut)
        blocks = [replace(blocks[i], order_index=k) for k, i in enumerate(order)]
        trace.append("reading_order")

        owned = assign_lines(blocks, lines)
        items = [
            self._item(block, img, owned[k], mode, page_index, k, trace)
            for k, block in enumerate(blocks)
        ]
        items = apply_caption_links(items, link_captions(items))
        trace.append("caption_link")

        h, w = image.shape[:2]
        if prepared.to_input is not identity:
            items = [replace(it, bbox=_map_bbox(it.bbox, prepared.to_input, w, h)) for it in items]
            lines = [map_line(l, prepared.to_input) for l in lines]

        return Page(
            index=page_index,
            width=w,
            height=h,
            items=tuple(items),
            text_lines=tuple(lines),
            trace=tuple(trace),
        )


def run_structure(
    image: np.ndarray, cfg: StructureConfig, session: Session, page_index: int = 0
) -> Page:
    return StructurePipeline(session, cfg)(image, page_index)


def predict_structure(
    source: Union[str, Path, List[np.ndarray]],
    cfg: StructureConfig,
    session: Session,
    progress: bool = False,
) -> Document:
    """Parses an image file, a PDF or a list of page images."""
    if isinstance(source, (str, Path)):
        pages = load_pages(source, cfg.ocr.pdf_dpi)
        meta = {"input": str(source)}
    else:
        pages = list(source)
        meta = {}
    pipeline = StructurePipeline(session, cfg)
    results = [
        pipeline(image, i)
        for i, image in enumerate(tqdm(pages, desc="Parsing", unit="page", disable=not progress))
    ]
    return Document(pages=tuple(results), source=meta)
