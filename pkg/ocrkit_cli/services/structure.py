"""Service to parse a document into ordered items, Markdown and JSON."""

from pathlib import Path
from typing import List, Optional, Tuple, Union

from ocrkit.backends.registry import Session
from ocrkit.compose.output import save_json, save_markdown
from ocrkit.core.document import Document
from ocrkit.structure import predict_structure
from ocrkit_cli import utils
from ocrkit_cli.config.schema import PipelineConfig


def structure(
    input_path: Union[str, Path],
    output_dir: Union[str, Path],
    cfg: PipelineConfig,
    session: Optional[Session] = None,
) -> Tuple[Document, List[Path]]:
    """Parses the input and writes combined and per-page JSON and Markdown,
    plus every extracted image, into `output_dir`."""
    input_path = utils.check_input(input_path)
    session = session or utils.build_session(cfg)
    structure_cfg = cfg.structure_config()

    doc = predict_structure(input_path, structure_cfg, session, progress=utils.interactive())
    stem = input_path.stem
    written = save_json(doc, output_dir, stem)
    written += save_markdown(doc, output_dir, stem, structure_cfg.include_header_footer)
    return doc, written
