"""Writing results beside each other in an output directory.

For an input named `scan.pdf` the directory receives `scan_res.json` and
`scan.md` for the whole document, `scan_page{p}_res.json` and
`scan_page{p}.md` for each page, and every extracted image as
`page{p}_item{i}.png`.
"""

import logging
from pathlib import Path
from typing import List, Union

from ocrkit.compose.markdown import emit_markdown
from ocrkit.compose.serialize import emit_json, emit_page_json
from ocrkit.core.document import Document, ImageItem

logger = logging.getLogger(__name__)


def image_name(page_index: int, order_index: int) -> str:
    return f"page{page_index}_item{order_index}.png"


def write_images(doc: Document, out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    written = []
    for page in doc.pages:
        for item in page.items:
            if isinstance(item, ImageItem) and item.data is not None:
                path = out_dir / item.path
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(item.data)
                written.append(path)
    return written


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def save_json(doc: Document, out_dir: Union[str, Path], stem: str, per_page: bool = True) -> List[Path]:
    out_dir = Path(out_dir)
    written = [_write(out_dir / f"{stem}_res.json", emit_json(doc))]
    if per_page:
        for page in doc.pages:
            written.append(_write(out_dir / f"{stem}_page{page.index}_res.json", emit_page_json(page)))
    return written


def save_markdown(
    doc: Document,
    out_dir: Union[str, Path],
    stem: str,
    include_header_footer: bool = False,
    per_page: bool = True,
) -> List[Path]:
    out_dir = Path(out_dir)
    written = [_write(out_dir / f"{stem}.md", emit_markdown(doc, include_header_footer))]
    if per_page:
        for page in doc.pages:
            single = Document(pages=(page,))
            written.append(
                _write(out_dir / f"{stem}_page{page.index}.md", emit_markdown(single, include_header_footer))
            )
    written.extend(write_images(doc, out_dir))
    return written
