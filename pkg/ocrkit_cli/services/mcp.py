"""Service exposing the OCR and structure pipelines as MCP tools.

Both tools take `input`, a file path or base64 image/PDF data, and an
optional `options` object of pipeline toggles, and return the canonical
result JSON (the structure tool adds "markdown").

Where the work happens depends on the source mode:

    local          pipelines run in this process
    self_hosted    requests go to an `ocrkit serve` instance at server_url
    hosted_cloud   requests go to server_url with a bearer access token
"""

import base64
import binascii
import logging
import threading
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import requests
from fastmcp import FastMCP
from fastmcp.exceptions import ToolError
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ocrkit.backends.registry import Session
from ocrkit.errors import ConfigError, InputError, OcrkitError
from ocrkit.io import PDF_MAGIC, decode_pages
from ocrkit_cli import utils
from ocrkit_cli.config.schema import McpConfig, PipelineConfig
from ocrkit_cli.services.serve import PIPELINES, make_pipeline, result_body, run_pages, with_options

logger = logging.getLogger(__name__)

SERVER_NAME = "ocrkit"

TOOL_DESCRIPTIONS = {
    "ocr": "Detects and recognizes text lines in an image or PDF.",
    "structure": (
        "Parses an image or PDF into ordered layout items (text, titles, tables, "
        "formulas, charts, seals, images) and renders them as Markdown."
    ),
}


def check_mcp_config(cfg: McpConfig):
    """Raises ConfigError when the source mode lacks what it needs."""
    if cfg.source in ("self_hosted", "hosted_cloud") and not cfg.server_url:
        raise ConfigError(f"MCP source {cfg.source} requires server_url", field="mcp.server_url")
    if cfg.source == "hosted_cloud" and not cfg.access_token:
        raise ConfigError("MCP source hosted_cloud requires access_token", field="mcp.access_token")


def read_input(value: str) -> bytes:
    """Bytes of a file path, or of base64 data when no such file exists."""
    if not value:
        raise ToolError("input must be a file path or base64 data")
    if len(value) < 4096:
        path = Path(value).expanduser()
        if path.is_file():
            return path.read_bytes()
    try:
        return base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError):
        raise ToolError(f"input is neither an existing file nor base64 data: {value[:64]!r}")


class LocalRunner:
    """Runs the pipelines in process, one call at a time per pipeline."""

    def __init__(self, cfg: PipelineConfig, session_factory: Callable[[], Session]):
        self.cfg = cfg
        self.session = session_factory()
        self._pipelines: Dict[str, Any] = {}
        self._locks = {name: threading.Lock() for name in PIPELINES}

    def pipeline(self, name: str):
        if name not in self._pipelines:
            self._pipelines[name] = make_pipeline(name, self.cfg, self.session)
        return self._pipelines[name]

    def __call__(self, name: str, data: bytes, options: Dict[str, Any]) -> str:
        try:
            pages = decode_pages(data, self.cfg.ocr.pdf_dpi)
        except InputError as e:
            raise ToolError(str(e))
        with self._locks[name]:
            try:
                pipeline = with_options(self.pipeline(name), options)
                return result_body(pipeline, run_pages(pipeline, pages))
            except (OcrkitError, ValueError) as e:
                raise ToolError(f"{name} failed: {e}")


def _http_session(retries: int = 3) -> requests.Session:
    session = requests.Session()
    retry = Retry(
        total=retries,
        read=retries,
        connect=retries,
        backoff_factor=0.5,
        status_forcelist=(502, 504),
        allowed_methods=None,
        raise_on_status=False,
    )
    adapter = HTTPAdapter(max_retries=retry)
    session.mount("http://", adapter)
    session.mount("https://", adapter)
    return session


class RemoteRunner:
    """Forwards tool calls to the HTTP API at `server_url`."""

    def __init__(self, cfg: McpConfig):
        self.base_url = cfg.server_url.rstrip("/")
        self.timeout = cfg.timeout
        self.headers = {}
        if cfg.source == "hosted_cloud":
            self.headers["Authorization"] = f"Bearer {cfg.access_token}"
        self.session = _http_session()

    def __call__(self, name: str, data: bytes, options: Dict[str, Any]) -> str:
        field = "pdf" if data[:4] == PDF_MAGIC else "image"
        payload: Dict[str, Any] = {field: base64.b64encode(data).decode("ascii")}
        if options:
            payload["options"] = options
        url = f"{self.base_url}/v1/{name}"
        try:
            response = self.session.post(url, json=payload, headers=self.headers, timeout=self.timeout)
        except requests.RequestException as e:
            raise ToolError(f"Request to {url} failed: {e}")
        if response.status_code != 200:
            try:
                message = response.json()["error"]["message"]
            except (ValueError, KeyError, TypeError):
                message = response.text[:200]
            raise ToolError(f"{url} returned {response.status_code}: {message}")
        return response.text


def create_server(
    cfg: PipelineConfig,
    session_factory: Optional[Callable[[], Session]] = None,
) -> FastMCP:
    """Builds the MCP server for `cfg.mcp`.

    In local mode the configured pipeline is constructed up front so model
    binding errors surface at startup.

    Raises:
        ConfigError: The source mode's requirements are not met.
    """
    check_mcp_config(cfg.mcp)
    if cfg.mcp.source == "local":
        if cfg.mcp.device != cfg.backend.device:
            backend = cfg.backend.model_copy(update={"device": cfg.mcp.device})
            cfg = cfg.model_copy(update={"backend": backend})
        runner = LocalRunner(cfg, session_factory or (lambda: utils.build_session(cfg)))
        runner.pipeline(cfg.mcp.pipeline)
    else:
        runner = RemoteRunner(cfg.mcp)

    mcp = FastMCP(SERVER_NAME)

    def call(name: str, input: str, options: Optional[Dict[str, Any]]) -> str:
        logger.info("Tool call %s", name)
        return runner(name, read_input(input), options or {})

    @mcp.tool(name="ocr", description=TOOL_DESCRIPTIONS["ocr"])
    def ocr(input: str, options: Optional[Dict[str, Any]] = None) -> str:
        return call("ocr", input, options)

    @mcp.tool(name="structure", description=TOOL_DESCRIPTIONS["structure"])
    def structure(input: str, options: Optional[Dict[str, Any]] = None) -> str:
        return call("structure", input, options)

    return mcp


def run_mcp(cfg: PipelineConfig):
    """Serves MCP over the configured transport until interrupted."""
    mcp = create_server(cfg)
    if cfg.mcp.transport == "stdio":
        mcp.run(transport="stdio")
    else:
        mcp.run(transport="streamable-http", host=cfg.mcp.host, port=cfg.mcp.port)
