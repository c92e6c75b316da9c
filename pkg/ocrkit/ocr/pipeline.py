"""Full-page OCR: preprocessing, detection, then per-line recognition."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Tuple, Union

import cv2
import numpy as np
from tqdm.auto import tqdm

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor
from ocrkit.core.document import Document, Orientation, Page, TextLine
from ocrkit.core.geometry import Quad, order_clockwise
from ocrkit.errors import ConfigError
from ocrkit.io import DEFAULT_PDF_DPI, load_pages
from ocrkit.ocr.charset import Charset
from ocrkit.ocr.detection import DetectionParams, extract_text_regions
from ocrkit.ocr.preprocess import (
    PointMap,
    classify_doc_orientation,
    compose,
    identity,
    rotate_upright,
    unwarp,
)
from ocrkit.ocr.recognition import (
    classify_line_orientation,
    crop_line,
    ctc_greedy_decode,
    upright,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OcrModels:
    """Registry names of the models each stage runs."""

    doc_orientation: str = "doc_orientation"
    unwarp: str = "unwarp"
    text_det: str = "text_det"
    line_orientation: str = "line_orientation"
    text_rec: str = "text_rec"


@dataclass(frozen=True)
class OcrConfig:
    use_doc_orientation_classify: bool = False
    use_doc_unwarping: bool = False
    use_textline_orientation: bool = False
    detection: DetectionParams = DetectionParams()
    models: OcrModels = OcrModels()
    rec_score_thresh: float = 0.0
    """Lines recognized with a lower score are dropped."""
    pdf_dpi: int = DEFAULT_PDF_DPI
    max_workers: int = 1
    """Lines recognized concurrently."""

    def __post_init__(self):
        if not 0.0 <= self.rec_score_thresh <= 1.0:
            raise ValueError(f"rec_score_thresh must be in [0, 1], got {self.rec_score_thresh}")
        if self.max_workers < 1:
            raise ValueError(f"max_workers must be at least 1, got {self.max_workers}")

    def bound_models(self) -> List[Tuple[str, str]]:
        """(toggle, model name) for every stage that will run."""
        bound = [("text_det", self.models.text_det), ("text_rec", self.models.text_rec)]
        if self.use_doc_orientation_classify:
            bound.append(("use_doc_orientation_classify", self.models.doc_orientation))
        if self.use_doc_unwarping:
            bound.append(("use_doc_unwarping", self.models.unwarp))
        if self.use_textline_orientation:
            bound.append(("use_textline_orientation", self.models.line_orientation))
        return bound


@dataclass
class PreparedPage:
    """A page after preprocessing, with the map back to input coordinates."""

    image: np.ndarray
    to_input: PointMap
    trace: List[str] = field(default_factory=list)


class OcrPipeline:
    def __init__(self, session: Session, cfg: OcrConfig = OcrConfig()):
        self.session = session
        self.cfg = cfg
        for toggle, name in cfg.bound_models():
            if name not in session.models:
                raise ConfigError(
                    f"Stage {toggle} needs model {name}, which is not in the model registry",
                    field="ocr.models",
                )
        rec = session.model(cfg.models.text_rec)
        self.charset = Charset.load(rec.charset_path)

    def preprocess(self, image: np.ndarray) -> PreparedPage:
        prepared = PreparedPage(image, identity)
        if self.cfg.use_doc_orientation_classify:
            angle = classify_doc_orientation(self.session, self.cfg.models.doc_orientation, image)
            prepared.image, back = rotate_upright(prepared.image, angle)
            prepared.to_input = compose(prepared.to_input, back)
            prepared.trace.append("doc_orientation")
            logger.debug("Page content rotated by %d degrees", angle)
        if self.cfg.use_doc_unwarping:
            prepared.image, back = unwarp(self.session, self.cfg.models.unwarp, prepared.image)
            prepared.to_input = compose(prepared.to_input, back)
            prepared.trace.append("unwarp")
        return prepared

    def detect(self, image: np.ndarray) -> List[Quad]:
        outputs = self.session.infer(self.cfg.models.text_det, {"image": Tensor.from_image(image)})
        prob_map = outputs["prob_map"].array()[0]
        return extract_text_regions(prob_map, self.cfg.detection)

    def recognize(self, image: np.ndarray, quad: Quad) -> Tuple[str, float, Orientation]:
        crop = crop_line(image, quad)
        orientation = Orientation.Deg0
        if self.cfg.use_textline_orientation:
            orientation = classify_line_orientation(
                self.session, self.cfg.models.line_orientation, crop
            )
            crop = upright(crop, orientation)
        text, score = self.recognize_crop(crop)
        return text, score, orientation

    def recognize_crop(self, crop: np.ndarray) -> Tuple[str, float]:
        """Runs the recognizer on an already rectified line image."""
        outputs = self.session.infer(self.cfg.models.text_rec, {"image": Tensor.from_image(crop)})
        text, score = ctc_greedy_decode(outputs["logits"].array(), self.charset)
        return text, (score if text else 0.0)

    def recognize_lines(self, image: np.ndarray, quads: List[Quad]) -> List[Tuple[str, float, Orientation]]:
        """Recognizes every quad; results keep the order of `quads`."""
        if self.cfg.max_workers == 1 or len(quads) <= 1:
            return [self.recognize(image, q) for q in quads]
        with ThreadPoolExecutor(max_workers=self.cfg.max_workers) as pool:
            return list(pool.map(lambda q: self.recognize(image, q), quads))

    def read(self, image: np.ndarray) -> Tuple[List[TextLine], List[str]]:
        """Detects and recognizes the lines of an already prepared image.

        Returns the lines, in the coordinates of `image`, and the stages run.
        """
        quads = self.detect(image)
        trace = ["text_det"]
        if not quads:
            return [], trace
        if self.cfg.use_textline_orientation:
            trace.append("line_orientation")
        trace.append("text_rec")

        lines = []
        for quad, (text, score, orientation) in zip(quads, self.recognize_lines(image, quads)):
            if score < self.cfg.rec_score_thresh:
                continue
            lines.append(TextLine(quad, text, score, orientation))
        return lines, trace

    def __call__(self, image: np.ndarray, page_index: int = 0) -> Page:
        prepared = self.preprocess(image)
        lines, trace = self.read(prepared.image)
        lines = [map_line(line, prepared.to_input) for line in lines]
        h, w = image.shape[:2]
        return Page(
            index=page_index,
            width=w,
            height=h,
            text_lines=tuple(lines),
            trace=tuple(prepared.trace + trace),
        )


def map_line(line: TextLine, to_input: PointMap) -> TextLine:
    if to_input is identity:
        return line
    quad = Quad.from_array(order_clockwise(to_input(line.geometry.to_array())))
    return replace(line, geometry=quad)


def run_ocr(image: np.ndarray, cfg: OcrConfig, session: Session, page_index: int = 0) -> Page:
    """Runs OCR over one page image.

    Args:
        image: HxWx3 uint8 RGB page.
        cfg: Stage toggles, detection parameters and model bindings.
        session: Engines resolving the bound model names.
        page_index: Index recorded on the returned page.

    Returns:
        A page whose text lines are in the coordinates of `image`, with
        the executed stages recorded in `Page.trace`.
    """
    return OcrPipeline(session, cfg)(image, page_index)


def predict_pages(
    source: Union[str, Path, List[np.ndarray]],
    cfg: OcrConfig,
    session: Session,
    progress: bool = False,
) -> Document:
    """Runs OCR over an image file, a PDF or a list of page images."""
    if isinstance(source, (str, Path)):
        pages = load_pages(source, cfg.pdf_dpi)
        meta = {"input": str(source)}
    else:
        pages = list(source)
        meta = {}
    pipeline = OcrPipeline(session, cfg)
    results = [
        pipeline(image, i)
        for i, image in enumerate(tqdm(pages, desc="OCR", unit="page", disable=not progress))
    ]
    return Document(pages=tuple(results), source=meta)


def render_ocr_result(image: np.ndarray, page: Page) -> np.ndarray:
    """Draws every text line's quad over a copy of the page."""
    canvas = np.ascontiguousarray(image.copy())
    for line in page.text_lines:
        pts = np.round(line.geometry.to_array()).astype(np.int32).reshape(-1, 1, 2)
        cv2.polylines(canvas, [pts], isClosed=True, color=(0, 200, 0), thickness=2)
    return canvas
