import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ocrkit.backends.descriptor import Task, load_registry
from ocrkit.backends.engine import EngineConfig
from ocrkit.backends.registry import EngineRegistry, Session
from ocrkit.errors import ConfigError
from ocrkit_cli import utils
from ocrkit_cli.config import PipelineConfig
from ocrkit_cli.main import main

from .fixtures import (
    REPORT_MARKDOWN,
    ScriptedEngine,
    charset_file,
    model_entries,
    report,
)


@pytest.fixture
def cli(report, tmp_path, monkeypatch):
    """(invoke, input path, output dir) with the scripted report session installed."""
    _, _, path, session = report
    monkeypatch.setattr(utils, "build_session", lambda cfg, fixtures=None: session)
    monkeypatch.setenv("OCRKIT_HOME", str(tmp_path / "home"))
    monkeypatch.delenv("OCRKIT_CONFIG", raising=False)
    out = tmp_path / "out"

    def invoke(*args, env=None):
        return CliRunner().invoke(main, [str(a) for a in args], env=env)

    return invoke, path, out


def test_build_session_loads_the_configured_models(tmp_path, charset_file):
    session = utils.build_session(PipelineConfig(models=model_entries(charset_file)), fixtures=tmp_path)
    assert sorted(session.models) == sorted(t.value for t in Task)
    with pytest.raises(ConfigError):
        utils.build_session(PipelineConfig(models=str(tmp_path / "missing.yaml")), fixtures=tmp_path)


def test_ocr_prints_lines_and_writes_json(cli):
    invoke, path, out = cli
    result = invoke("ocr", "-i", path, "--output", out)
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "Annual Report"
    assert "Figure 1: Sales" in lines
    assert (out / "report_res.json").is_file()
    assert "Wrote 1 file(s)" in result.stderr


def test_ocr_visualization(cli):
    invoke, path, out = cli
    result = invoke("ocr", "-i", path, "--output", out, "--save_visualization", "True")
    assert result.exit_code == 0, result.output
    assert (out / "report_page0_ocr.png").is_file()


def test_trace_follows_toggles(cli):
    invoke, path, out = cli
    result = invoke("ocr", "-i", path, "--output", out, "--trace")
    assert "page 0: text_det > text_rec" in result.stderr

    result = invoke("ocr", "-i", path, "--output", out, "--trace", "--use_doc_unwarping", "True")
    assert "page 0: unwarp > text_det > text_rec" in result.stderr


def test_environment_variables_and_flags(cli):
    invoke, path, out = cli
    env = {"OCRKIT_USE_DOC_UNWARPING": "true"}
    result = invoke("ocr", "-i", path, "--output", out, "--trace", env=env)
    assert "unwarp" in result.stderr

    result = invoke("ocr", "-i", path, "--output", out, "--trace", "--use_doc_unwarping", "False", env=env)
    assert result.exit_code == 0
    assert "unwarp" not in result.stderr


def test_config_file_is_layered_under_flags(cli, tmp_path):
    invoke, path, out = cli
    config = tmp_path / "config.yaml"
    config.write_text("ocr:\n  use_doc_unwarping: true\n", encoding="utf-8")
    result = invoke("ocr", "-i", path, "--output", out, "--config", config, "--trace")
    assert "unwarp" in result.stderr
    result = invoke("ocr", "-i", path, "--output", out, "--config", config, "--trace", "--use_doc_unwarping", "false")
    assert "unwarp" not in result.stderr


@pytest.mark.parametrize("value", ["yes", "1", "TRUE"])
def test_booleans_are_literal(cli, value):
    invoke, path, out = cli
    result = invoke("ocr", "-i", path, "--output", out, "--use_doc_unwarping", value)
    assert result.exit_code == 2


def test_missing_input(cli, tmp_path):
    invoke, _, out = cli
    result = invoke("ocr", "-i", tmp_path / "absent.png", "--output", out)
    assert result.exit_code == 3
    assert "Unable to run OCR" in result.stderr


def test_bad_config_is_a_usage_error(cli, tmp_path):
    invoke, path, out = cli
    config = tmp_path / "config.yaml"
    config.write_text("ocr:\n  colour: red\n", encoding="utf-8")
    result = invoke("ocr", "-i", path, "--output", out, "--config", config)
    assert result.exit_code == 2
    assert "ocr.colour" in result.stderr


def test_out_of_range_flag(cli):
    invoke, path, out = cli
    result = invoke("ocr", "-i", path, "--output", out, "--text_det_thresh", "1.5")
    assert result.exit_code == 2


def test_engine_failure_is_a_pipeline_error(cli, charset_file, monkeypatch, report):
    invoke, path, out = cli

    class Exploding(ScriptedEngine):
        def infer(self, model, inputs):
            raise RuntimeError("device lost")

    spec = report[0]
    registry = EngineRegistry()
    registry.register_engine(Exploding.kind, lambda c: Exploding(c, spec))
    session = Session(registry, load_registry(model_entries(charset_file)), EngineConfig())
    monkeypatch.setattr(utils, "build_session", lambda cfg, fixtures=None: session)

    result = invoke("ocr", "-i", path, "--output", out)
    assert result.exit_code == 4


@pytest.mark.parametrize("command", ["structure", "pp_structurev3"])
def test_structure_writes_markdown_json_and_images(cli, command):
    invoke, path, out = cli
    result = invoke(command, "-i", path, "--output", out, "--trace")
    assert result.exit_code == 0, result.output
    assert (out / "report.md").read_text(encoding="utf-8") == REPORT_MARKDOWN
    assert (out / "report_page0.md").read_text(encoding="utf-8") == REPORT_MARKDOWN
    assert json.loads((out / "report_res.json").read_text())["version"] == "1"
    assert (out / "report_page0_res.json").is_file()
    assert (out / "page0_item2.png").is_file()
    assert "layout > reading_order" in result.stderr


def test_structure_toggle_flags(cli):
    invoke, path, out = cli
    result = invoke("structure", "-i", path, "--output", out, "--use_table_recognition", "False")
    assert result.exit_code == 0, result.output
    markdown = (out / "report.md").read_text(encoding="utf-8")
    assert "<table>" not in markdown
    assert '![](page0_item6.png "Table 1: Totals")' in markdown


@pytest.mark.parametrize("command", ["kie", "pp_chatocrv4_doc"])
def test_kie_prints_answers(cli, command):
    invoke, path, out = cli
    result = invoke(command, "-i", path, "--output", out, "-k", "Figure 1", "-k", "Author")
    assert result.exit_code == 0, result.output
    assert result.stdout == "Figure 1: Sales\nAuthor: \n"
    answers = json.loads((out / "report_kie.json").read_text())
    assert answers["version"] == "1"
    assert [a["key"] for a in answers["answers"]] == ["Figure 1", "Author"]


def test_kie_needs_keys(cli):
    invoke, path, out = cli
    result = invoke("kie", "-i", path, "--output", out)
    assert result.exit_code == 2


def test_kie_remote_client_without_credentials(cli):
    invoke, path, out = cli
    result = invoke("kie", "-i", path, "--output", out, "-k", "Total", "--api_type", "openai")
    assert result.exit_code == 5


def test_eval(cli, tmp_path):
    invoke, _, _ = cli
    bench = tmp_path / "bench.jsonl"
    bench.write_text(
        '{"id": "1", "scenario": "report", "gt": "kitten", "prediction": "sitting"}\n',
        encoding="utf-8",
    )
    report_path = tmp_path / "report.json"
    result = invoke("eval", bench, "--report", report_path)
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[-1] == "overall       1  0.5714"
    assert json.loads(report_path.read_text())["overall"] == 0.5714

    assert invoke("eval", tmp_path / "absent.jsonl").exit_code == 3


def test_serve_rejects_invalid_settings(cli):
    invoke, _, _ = cli
    assert invoke("serve", "--port", "0").exit_code == 2


def test_mcp_remote_mode_needs_a_server(cli):
    invoke, _, _ = cli
    result = invoke("mcp", "--mcp_source", "SELF_HOSTED")
    assert result.exit_code == 2
    assert "server_url" in result.stderr


def test_unknown_command(cli):
    invoke, _, _ = cli
    assert invoke("translate").exit_code == 2


def test_help_matches_golden_file(cli):
    invoke, _, _ = cli
    result = invoke("--help")
    assert result.exit_code == 0
    assert result.stdout == (Path(__file__).parent / "data" / "help.txt").read_text()
