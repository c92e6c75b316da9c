import asyncio
import base64
import json

import pytest
from fastapi.testclient import TestClient
from fastmcp import Client
from fastmcp.exceptions import ToolError

from ocrkit.errors import ConfigError
from ocrkit.io import encode_png
from ocrkit_cli.config import PipelineConfig
from ocrkit_cli.services import mcp as mcp_service
from ocrkit_cli.services.mcp import check_mcp_config, create_server, read_input
from ocrkit_cli.services.serve import create_app

from .fixtures import REPORT_MARKDOWN, charset_file, report


def _config(**mcp):
    cfg = PipelineConfig()
    return cfg.model_copy(update={"mcp": cfg.mcp.model_copy(update=mcp)})


def _call(server, tool, arguments):
    async def go():
        async with Client(server) as client:
            return await client.call_tool_mcp(tool, arguments)

    return asyncio.run(go())


def _tools(server):
    async def go():
        async with Client(server) as client:
            return await client.list_tools()

    return asyncio.run(go())


@pytest.fixture
def encoded(report):
    return base64.b64encode(encode_png(report[1])).decode("ascii")


def test_lists_both_tools(report):
    server = create_server(_config(), lambda: report[3])
    tools = {t.name: t for t in _tools(server)}
    assert sorted(tools) == ["ocr", "structure"]
    assert tools["ocr"].inputSchema["required"] == ["input"]
    assert "options" in tools["structure"].inputSchema["properties"]


def test_local_ocr_from_base64(report, encoded):
    server = create_server(_config(), lambda: report[3])
    result = _call(server, "ocr", {"input": encoded})
    assert not result.isError
    body = json.loads(result.content[0].text)
    assert body["pages"][0]["text_lines"][0]["text"] == "Annual Report"


def test_local_structure_from_path(report):
    _, _, path, session = report
    server = create_server(_config(pipeline="structure"), lambda: session)
    result = _call(server, "structure", {"input": str(path)})
    assert json.loads(result.content[0].text)["markdown"] == REPORT_MARKDOWN


def test_local_options(report, encoded):
    server = create_server(_config(), lambda: report[3])
    result = _call(server, "structure", {"input": encoded, "options": {"use_table_recognition": False}})
    assert "<table>" not in json.loads(result.content[0].text)["markdown"]

    result = _call(server, "ocr", {"input": encoded, "options": {"use_tables": True}})
    assert result.isError


@pytest.mark.parametrize("value", ["", "no such file and not base64!", base64.b64encode(b"not an image").decode()])
def test_bad_input_is_a_tool_error(report, value):
    server = create_server(_config(), lambda: report[3])
    assert _call(server, "ocr", {"input": value}).isError


def test_read_input(tmp_path):
    path = tmp_path / "page.png"
    path.write_bytes(b"\x89PNG")
    assert read_input(str(path)) == b"\x89PNG"
    assert read_input(base64.b64encode(b"data").decode()) == b"data"
    with pytest.raises(ToolError):
        read_input(str(tmp_path / "missing.png"))


def test_remote_modes_need_settings():
    with pytest.raises(ConfigError) as e:
        check_mcp_config(_config(source="self_hosted").mcp)
    assert e.value.field == "mcp.server_url"
    with pytest.raises(ConfigError) as e:
        check_mcp_config(_config(source="hosted_cloud", server_url="https://ocr.example").mcp)
    assert e.value.field == "mcp.access_token"
    with pytest.raises(ConfigError):
        create_server(_config(source="self_hosted"))


def test_self_hosted_matches_local(report, encoded, monkeypatch):
    session = report[3]
    cfg = PipelineConfig()
    app_cfg = cfg.model_copy(update={"serving": cfg.serving.model_copy(update={"pipeline": "structure"})})
    http = TestClient(create_app(app_cfg, lambda: session))
    monkeypatch.setattr(mcp_service, "_http_session", lambda: http)

    remote = create_server(_config(source="self_hosted", server_url="http://testserver/"))
    local = create_server(_config(pipeline="structure"), lambda: session)

    remote_result = _call(remote, "structure", {"input": encoded})
    local_result = _call(local, "structure", {"input": encoded})
    assert not remote_result.isError
    assert remote_result.content[0].text == local_result.content[0].text


def test_remote_errors_become_tool_errors(report, encoded, monkeypatch):
    http = TestClient(create_app(PipelineConfig(), lambda: report[3]))
    monkeypatch.setattr(mcp_service, "_http_session", lambda: http)
    server = create_server(_config(source="self_hosted", server_url="http://testserver"))
    # the HTTP service only routes its own pipeline
    assert _call(server, "structure", {"input": encoded}).isError


class _Recorder:
    def __init__(self):
        self.calls = []

    def post(self, url, json, headers, timeout):
        self.calls.append((url, json, headers))
        raise mcp_service.requests.ConnectionError("offline")


def test_hosted_cloud_sends_token(monkeypatch, encoded):
    recorder = _Recorder()
    monkeypatch.setattr(mcp_service, "_http_session", lambda: recorder)
    server = create_server(
        _config(source="hosted_cloud", server_url="https://ocr.example", access_token="t0k")
    )
    assert _call(server, "ocr", {"input": encoded}).isError
    ((url, payload, headers),) = recorder.calls
    assert url == "https://ocr.example/v1/ocr"
    assert headers == {"Authorization": "Bearer t0k"}
    assert payload == {"image": encoded}
