"""Service to run text detection and recognition over an image or PDF."""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ocrkit.backends.registry import Session
from ocrkit.compose.output import save_json
from ocrkit.core.document import Document
from ocrkit.io import load_pages, save_png
from ocrkit.ocr.pipeline import predict_pages, render_ocr_result
from ocrkit_cli import utils
from ocrkit_cli.config.schema import PipelineConfig

logger = logging.getLogger(__name__)


def ocr(
    input_path: Union[str, Path],
    output_dir: Union[str, Path],
    cfg: PipelineConfig,
    visualize: bool = False,
    session: Optional[Session] = None,
) -> Tuple[Document, List[Path]]:
    """Runs OCR and writes `{stem}_res.json` into `output_dir`.

    With `visualize`, every page is also drawn with its line quads as
    `{stem}_page{p}_ocr.png`.

    Returns:
        The parsed document and the paths written.
    """
    input_path = utils.check_input(input_path)
    session = session or utils.build_session(cfg)
    ocr_cfg = cfg.ocr_config()

    pages = load_pages(input_path, ocr_cfg.pdf_dpi)
    doc = predict_pages(pages, ocr_cfg, session, progress=utils.interactive())

    stem = input_path.stem
    written = save_json(doc, output_dir, stem, per_page=False)
    if visualize:
        for image, page in zip(pages, doc.pages):
            path = Path(output_dir) / f"{stem}_page{page.index}_ocr.png"
            save_png(path, render_ocr_result(image, page))
            written.append(path)
    for warning in session.warnings():
        logger.warning(warning)
    return doc, written
