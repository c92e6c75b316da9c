"""Service to extract key information from a document."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ocrkit.backends.registry import Session
from ocrkit.compose.serialize import dumps
from ocrkit.io import load_pages
from ocrkit.kie import KieAnswer, KieClients, extract, make_embedder, make_llm, make_mllm
from ocrkit.structure import predict_structure
from ocrkit_cli import utils
from ocrkit_cli.config.schema import KieSettings, PipelineConfig

logger = logging.getLogger(__name__)

ANSWERS_VERSION = "1"


def make_clients(settings: KieSettings) -> KieClients:
    """Builds the configured clients; remote ones fail here without credentials."""
    mllm = None
    if settings.use_mllm:
        mllm = make_mllm(settings.mllm_chat_bot.build("mllm_chat_bot"), settings.mllm_answers)
    return KieClients(
        llm=make_llm(settings.chat_bot.build("chat_bot")),
        embedder=make_embedder(settings.retriever.build("retriever")),
        mllm=mllm,
    )


def answers_to_dict(answers: Sequence[KieAnswer]) -> Dict[str, Any]:
    return {
        "version": ANSWERS_VERSION,
        "answers": [
            {
                "key": a.key,
                "value": a.value,
                "source": a.source.value,
                "chunks": list(a.chunks),
                "alternate": a.alternate,
            }
            for a in answers
        ],
    }


def kie(
    input_path: Union[str, Path],
    keys: Sequence[str],
    output_dir: Union[str, Path],
    cfg: PipelineConfig,
    session: Optional[Session] = None,
) -> Tuple[List[KieAnswer], Path]:
    """Parses the input, answers `keys` and writes `{stem}_kie.json`.

    Returns:
        The answers, in key order, and the path written.
    """
    if not keys:
        raise ValueError("At least one key is required")
    input_path = utils.check_input(input_path)
    clients = make_clients(cfg.kie)
    session = session or utils.build_session(cfg)
    structure_cfg = cfg.structure_config()

    pages = load_pages(input_path, structure_cfg.ocr.pdf_dpi)
    doc = predict_structure(pages, structure_cfg, session, progress=utils.interactive())
    answers = extract(doc, pages, keys, clients, cfg.kie.use_mllm, cfg.kie.params())

    path = Path(output_dir) / f"{input_path.stem}_kie.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(answers_to_dict(answers)), encoding="utf-8")
    logger.debug("Wrote %s", path)
    return answers, path
