"""Service to run a pipeline behind an HTTP API.

    GET  /health         {"status": "ok", "pipeline", "instances", "queue_depth"}
    POST /v1/ocr         {"image": <base64>} or {"pdf": <base64>}, optional "options"
    POST /v1/structure   same body; the response adds "markdown"

Responses carry the canonical result JSON. Errors are
`{"error": {"code", "message"}}` with status 400 (malformed body), 413 (body
too large), 422 (undecodable image), 500 (pipeline failure) or 503 (every
instance busy and the queue full, with Retry-After).
"""

import base64
import binascii
import json
import logging
import queue
import threading
from contextlib import contextmanager
from dataclasses import fields, replace
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import Response
from starlette.concurrency import run_in_threadpool

from ocrkit.backends.registry import Session
from ocrkit.compose.markdown import emit_markdown
from ocrkit.compose.serialize import document_to_dict, dumps
from ocrkit.core.document import Document
from ocrkit.errors import ConfigError, InputError, OcrkitError
from ocrkit.io import decode_image, rasterize_pdf
from ocrkit.ocr.pipeline import OcrConfig, OcrPipeline
from ocrkit.structure import StructureConfig, StructurePipeline
from ocrkit_cli import utils
from ocrkit_cli.config.schema import PipelineConfig, ServiceConfig

logger = logging.getLogger(__name__)

PIPELINES = ("ocr", "structure")

Pipeline = Union[OcrPipeline, StructurePipeline]

OCR_OPTIONS = frozenset(
    {"use_doc_orientation_classify", "use_doc_unwarping", "use_textline_orientation", "rec_score_thresh"}
)
STRUCTURE_OPTIONS = OCR_OPTIONS | {
    "use_region_detection",
    "use_table_recognition",
    "use_formula_recognition",
    "use_chart_recognition",
    "use_seal_recognition",
    "include_header_footer",
}


class RequestError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class Saturated(RequestError):
    def __init__(self, message: str = "Every pipeline instance is busy"):
        super().__init__(503, message)


def apply_options(cfg: Union[OcrConfig, StructureConfig], options: Mapping[str, Any]):
    """A copy of `cfg` with per-request toggles applied."""
    allowed = STRUCTURE_OPTIONS if isinstance(cfg, StructureConfig) else OCR_OPTIONS
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise ConfigError(f"Unknown option {', '.join(unknown)}", field="options")
    for name, value in options.items():
        expected = float if name == "rec_score_thresh" else bool
        if expected is float:
            valid = isinstance(value, (int, float)) and not isinstance(value, bool)
        else:
            valid = isinstance(value, bool)
        if not valid:
            raise ConfigError(f"Option {name} must be a {expected.__name__}", field=f"options.{name}")

    if isinstance(cfg, StructureConfig):
        ocr_names = {f.name for f in fields(OcrConfig)}
        ocr = replace(cfg.ocr, **{k: v for k, v in options.items() if k in ocr_names})
        rest = {k: v for k, v in options.items() if k not in ocr_names}
        return replace(cfg, ocr=ocr, **rest)
    return replace(cfg, **options)


def make_pipeline(name: str, cfg: PipelineConfig, session: Session) -> Pipeline:
    if name == "ocr":
        return OcrPipeline(session, cfg.ocr_config())
    if name == "structure":
        return StructurePipeline(session, cfg.structure_config())
    raise ConfigError(f"Unknown pipeline {name!r}, expected one of {', '.join(PIPELINES)}", field="pipeline")


def with_options(pipeline: Pipeline, options: Optional[Mapping[str, Any]]) -> Pipeline:
    if not options:
        return pipeline
    return type(pipeline)(pipeline.session, apply_options(pipeline.cfg, options))


def run_pages(pipeline: Pipeline, pages: List[np.ndarray]) -> Document:
    return Document(pages=tuple(pipeline(image, i) for i, image in enumerate(pages)))


def result_body(pipeline: Pipeline, doc: Document) -> str:
    """The canonical JSON response for a parsed document."""
    body = document_to_dict(doc)
    if isinstance(pipeline, StructurePipeline):
        body["markdown"] = emit_markdown(doc, pipeline.cfg.include_header_footer)
    return dumps(body)


def decode_request(body: Any, dpi: int) -> List[np.ndarray]:
    """Page images from a {"image": ...} or {"pdf": ...} body."""
    if not isinstance(body, dict):
        raise RequestError(400, "Request body must be a JSON object")
    sources = [k for k in ("image", "pdf") if k in body]
    if len(sources) != 1:
        raise RequestError(400, 'Request body needs exactly one of "image" or "pdf"')
    encoded = body[sources[0]]
    if not isinstance(encoded, str):
        raise RequestError(400, f'"{sources[0]}" must be a base64 string')
    try:
        data = base64.b64decode(encoded, validate=True)
    except (binascii.Error, ValueError):
        raise RequestError(400, f'"{sources[0]}" is not valid base64')
    try:
        return rasterize_pdf(data, dpi) if sources[0] == "pdf" else [decode_image(data)]
    except InputError as e:
        raise RequestError(422, str(e))


class WorkerPool:
    """`size` pipeline instances behind a bounded wait queue.

    A request holds one instance for its whole duration. At most
    `queue_size` requests wait for an instance; any more are rejected.
    """

    def __init__(self, factory: Callable[[], Pipeline], size: int, queue_size: int):
        if size < 1:
            raise ConfigError(f"parallelism must be at least 1, got {size}", field="serving.parallelism")
        self.size = size
        self.queue_size = queue_size
        self.instances = [factory() for _ in range(size)]
        self._idle: "queue.Queue[Pipeline]" = queue.Queue()
        for instance in self.instances:
            self._idle.put(instance)
        self._lock = threading.Lock()
        self._active = 0

    @property
    def queue_depth(self) -> int:
        with self._lock:
            return max(self._active - self.size, 0)

    @contextmanager
    def acquire(self, timeout: float) -> Iterator[Pipeline]:
        with self._lock:
            if self._active >= self.size + self.queue_size:
                raise Saturated()
            self._active += 1
        try:
            try:
                instance = self._idle.get(timeout=timeout)
            except queue.Empty:
                raise Saturated(f"No pipeline instance became free within {timeout}s")
            try:
                yield instance
            finally:
                self._idle.put(instance)
        finally:
            with self._lock:
                self._active -= 1


def _error(status: int, message: str, headers: Optional[Dict[str, str]] = None) -> Response:
    body = dumps({"error": {"code": status, "message": message}})
    return Response(body, status_code=status, media_type="application/json", headers=headers)


def create_app(
    cfg: PipelineConfig,
    session_factory: Optional[Callable[[], Session]] = None,
) -> FastAPI:
    """Builds the app and its worker pool.

    Every instance gets its own session from `session_factory`, which
    defaults to the engines described by `cfg`.
    """
    service: ServiceConfig = cfg.serving
    session_factory = session_factory or (lambda: utils.build_session(cfg))
    pool = WorkerPool(
        lambda: make_pipeline(service.pipeline, cfg, session_factory()),
        service.parallelism,
        service.queue_size,
    )
    dpi = cfg.ocr.pdf_dpi

    app = FastAPI(title="ocrkit", version="1")
    app.state.pool = pool

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "pipeline": service.pipeline,
            "instances": pool.size,
            "queue_depth": pool.queue_depth,
        }

    def handle(body: Any) -> str:
        options = body.get("options") if isinstance(body, dict) else None
        if options is not None and not isinstance(options, dict):
            raise RequestError(400, '"options" must be an object')
        pages = decode_request(body, dpi)
        with pool.acquire(service.timeout) as instance:
            try:
                pipeline = with_options(instance, options)
            except (ConfigError, ValueError) as e:
                raise RequestError(400, str(e))
            return result_body(pipeline, run_pages(pipeline, pages))

    async def predict(request: Request) -> Response:
        declared = request.headers.get("content-length")
        if declared is not None and declared.isdigit() and int(declared) > service.max_body_bytes:
            return _error(413, f"Body exceeds {service.max_body_bytes} bytes")
        raw = await request.body()
        if len(raw) > service.max_body_bytes:
            return _error(413, f"Body exceeds {service.max_body_bytes} bytes")
        try:
            body = json.loads(raw)
        except (ValueError, UnicodeDecodeError):
            return _error(400, "Request body is not valid JSON")

        try:
            text = await run_in_threadpool(handle, body)
        except Saturated as e:
            return _error(e.status, e.message, {"Retry-After": str(service.retry_after)})
        except RequestError as e:
            return _error(e.status, e.message)
        except OcrkitError as e:
            logger.error("Pipeline failed: %s", e)
            return _error(500, str(e))
        except Exception as e:
            logger.exception("Unexpected pipeline failure")
            return _error(500, f"{type(e).__name__}: {e}")
        return Response(text, media_type="application/json")

    app.add_api_route(f"/v1/{service.pipeline}", predict, methods=["POST"])
    return app


def serve(cfg: PipelineConfig):
    """Runs the service until interrupted."""
    import uvicorn

    app = create_app(cfg)
    logger.info(
        "Serving %s on %s:%d with %d instance(s)",
        cfg.serving.pipeline,
        cfg.serving.host,
        cfg.serving.port,
        cfg.serving.parallelism,
    )
    uvicorn.run(app, host=cfg.serving.host, port=cfg.serving.port, log_level="warning")
