"""Entrypoints to service functions through the ocrkit CLI."""

import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import click

from ocrkit_cli.constants import COMMAND_ALIASES, CONFIG_ENV, DEFAULT_OUTPUT, envvar


class LiteralBool(click.ParamType):
    """Accepts True/False as well as true/false, nothing else."""

    name = "True|False"

    def convert(self, value, param, ctx):
        if isinstance(value, bool):
            return value
        if value in ("True", "true"):
            return True
        if value in ("False", "false"):
            return False
        self.fail(f"{value!r} is not one of True, False", param, ctx)


BOOL = LiteralBool()


class AliasedGroup(click.Group):
    """Also resolves the long pipeline names to their subcommands."""

    def get_command(self, ctx, cmd_name):
        return super().get_command(ctx, COMMAND_ALIASES.get(cmd_name, cmd_name))

    def resolve_command(self, ctx, args):
        _, cmd, args = super().resolve_command(ctx, args)
        return cmd.name, cmd, args


def _fail(action: str, e: BaseException):
    from ocrkit_cli.utils import exit_code_for

    click.secho(f"Unable to {action}: {str(e)}", fg="red", err=True)
    sys.exit(exit_code_for(e))


def _option(name: str, dotted: Optional[str], **kwargs):
    """A `--name` flag backed by OCRKIT_NAME and, when `dotted` is set,
    overriding that config field."""
    kwargs.setdefault("default", None)
    decorator = click.option(f"--{name}", envvar=envvar(name), show_envvar=True, **kwargs)

    def wrap(f):
        f = decorator(f)
        if dotted is not None:
            f.__dict__.setdefault("_overrides", {})[name] = dotted
        return f

    return wrap


_CONFIG_OPTION = click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    envvar=CONFIG_ENV,
    show_envvar=True,
    default=None,
    help="Pipeline config file. Defaults to config.yaml in the ocrkit home directory.",
)

_OCR_FLAGS: List[Tuple[str, Optional[str], Dict[str, Any]]] = [
    ("output", None, dict(type=click.Path(file_okay=False), default=DEFAULT_OUTPUT, help="Directory receiving the results.")),
    ("use_doc_orientation_classify", "ocr.use_doc_orientation_classify", dict(type=BOOL, help="Correct whole-page rotation.")),
    ("use_doc_unwarping", "ocr.use_doc_unwarping", dict(type=BOOL, help="Flatten curved or skewed pages.")),
    ("use_textline_orientation", "ocr.use_textline_orientation", dict(type=BOOL, help="Correct upside-down text lines.")),
    ("text_det_thresh", "ocr.detection.bin_thresh", dict(type=float, help="Pixel threshold of the text probability map.")),
    ("text_det_box_thresh", "ocr.detection.box_score_thresh", dict(type=float, help="Minimum mean probability of a text region.")),
    ("text_det_unclip_ratio", "ocr.detection.unclip_ratio", dict(type=float, help="Expansion applied to detected text regions.")),
    ("text_rec_score_thresh", "ocr.rec_score_thresh", dict(type=float, help="Drop recognized lines scoring below this.")),
    ("device", "backend.device", dict(type=str, help="cpu, gpu or gpu:N.")),
    ("profile", "profile", dict(type=click.Choice(["default", "low_memory"]), help="Resource profile.")),
]

_STRUCTURE_FLAGS: List[Tuple[str, Optional[str], Dict[str, Any]]] = [
    ("use_region_detection", "structure.use_region_detection", dict(type=BOOL, help="Group blocks into articles first.")),
    ("use_table_recognition", "structure.use_table_recognition", dict(type=BOOL, help="Rebuild tables as HTML.")),
    ("use_formula_recognition", "structure.use_formula_recognition", dict(type=BOOL, help="Recognize formulas as LaTeX.")),
    ("use_chart_recognition", "structure.use_chart_recognition", dict(type=BOOL, help="Convert charts to tables.")),
    ("use_seal_recognition", "structure.use_seal_recognition", dict(type=BOOL, help="Read curved seal text.")),
    ("order_mode", "structure.order_mode", dict(type=click.Choice(["horizontal", "vertical", "auto"]), help="Reading direction of the page.")),
]


def _flags(spec: List[Tuple[str, Optional[str], Dict[str, Any]]]) -> Callable:
    def wrap(f):
        for name, dotted, kwargs in reversed(spec):
            f = _option(name, dotted, **kwargs)(f)
        return f

    return wrap


def _load(
    f: Callable,
    config_path: Optional[str],
    values: Dict[str, Any],
    extra: Optional[Dict[str, Any]] = None,
):
    """Loads the config with the command's flag values layered on top.

    `extra` maps further dotted fields to values.
    """
    from ocrkit_cli.config.loader import load_config

    mapping = getattr(f, "_overrides", {})
    overrides = {mapping[k]: v for k, v in values.items() if k in mapping}
    overrides.update(extra or {})
    return load_config(config_path, overrides)


def _print_trace(doc):
    for page in doc.pages:
        click.echo(f"page {page.index}: {' > '.join(page.trace)}", err=True)


@click.group("ocrkit", cls=AliasedGroup)
@click.version_option(package_name="ocrkit")
@click.option("-v", "--verbose", count=True, help="Log INFO with -v, DEBUG with -vv.")
def main(verbose: int):
    """Document parsing: OCR, layout structure, key information extraction.

    Flags override OCRKIT_* environment variables and the config file.
    """
    from ocrkit_cli.utils import configure_logging

    configure_logging(verbose)


@click.command("ocr")
@click.option("-i", "--input", "input_path", required=True, help="Image or PDF to read.")
@_CONFIG_OPTION
@_flags(_OCR_FLAGS)
@_option("save_visualization", None, type=BOOL, default=False, help="Also write each page with its text lines drawn.")
@click.option("--trace", is_flag=True, default=False, help="Print the stages each page went through.")
def ocr(input_path: str, config_path: Optional[str], output: str, save_visualization: bool, trace: bool, **flags):
    """Detect and recognize text lines.

    Prints the text of every line and writes {stem}_res.json to the output
    directory.
    """
    from ocrkit_cli.services.ocr import ocr as run

    try:
        cfg = _load(ocr.callback, config_path, flags)
        doc, written = run(input_path, output, cfg, visualize=save_visualization)
    except Exception as e:
        _fail(f"run OCR on {input_path}", e)

    for page in doc.pages:
        for line in page.text_lines:
            click.echo(line.text)
    if trace:
        _print_trace(doc)
    click.secho(f"Wrote {len(written)} file(s) to {output}.", fg="green", err=True)


@click.command("structure")
@click.option("-i", "--input", "input_path", required=True, help="Image or PDF to parse.")
@_CONFIG_OPTION
@_flags(_OCR_FLAGS)
@_flags(_STRUCTURE_FLAGS)
@click.option("--trace", is_flag=True, default=False, help="Print the stages each page went through.")
def structure(input_path: str, config_path: Optional[str], output: str, trace: bool, **flags):
    """Parse a document into ordered items, Markdown and JSON.

    Writes {stem}_res.json and {stem}.md for the whole document, one pair
    per page, and every extracted image.
    """
    from ocrkit_cli.services.structure import structure as run

    try:
        cfg = _load(structure.callback, config_path, flags)
        doc, written = run(input_path, output, cfg)
    except Exception as e:
        _fail(f"parse {input_path}", e)

    if trace:
        _print_trace(doc)
    click.secho(f"Wrote {len(written)} file(s) to {output}.", fg="green", err=True)


@click.command("kie")
@click.option("-i", "--input", "input_path", required=True, help="Image or PDF to extract from.")
@click.option("-k", "--key", "keys", multiple=True, help="Field to extract. Repeat for several.")
@_CONFIG_OPTION
@_flags(_OCR_FLAGS)
@_option("api_type", None, type=click.Choice(["mock", "openai"]), help="Client kind for every model.")
@_option("base_url", None, type=str, help="Base URL of an OpenAI-compatible API.")
@_option("api_key", None, type=str, help="Key for the OpenAI-compatible API.")
@_option("llm_model", "kie.chat_bot.model_name", type=str, help="Language model name.")
@_option("embedding_model", "kie.retriever.model_name", type=str, help="Embedding model name.")
@_option("mllm_model", "kie.mllm_chat_bot.model_name", type=str, help="Vision-language model name.")
@_option("use_mllm", "kie.use_mllm", type=BOOL, help="Also ask a vision-language model and fuse the answers.")
def kie(
    input_path: str,
    keys: Tuple[str, ...],
    config_path: Optional[str],
    output: str,
    api_type: Optional[str],
    base_url: Optional[str],
    api_key: Optional[str],
    **flags,
):
    """Extract the values of the given keys.

    Prints one "key: value" line per key and writes {stem}_kie.json to the
    output directory.
    """
    if not keys:
        raise click.UsageError("At least one -k/--key is required.")

    from ocrkit_cli.services.kie import kie as run

    clients = {}
    for name, value in (("api_type", api_type), ("base_url", base_url), ("api_key", api_key)):
        for client in ("chat_bot", "retriever", "mllm_chat_bot"):
            clients[f"kie.{client}.{name}"] = value

    try:
        cfg = _load(kie.callback, config_path, flags, clients)
        answers, path = run(input_path, keys, output, cfg)
    except Exception as e:
        _fail(f"extract from {input_path}", e)

    for answer in answers:
        click.echo(f"{answer.key}: {answer.value}")
    click.secho(f"Wrote {path}.", fg="green", err=True)


@click.command("eval")
@click.argument("benchmark", nargs=1)
@_option("whitespace", None, type=click.Choice(["keep", "collapse"]), default="keep", help="Whitespace handling before scoring.")
@_option("report", None, type=click.Path(dir_okay=False), help="Write the JSON report here.")
def evaluate(benchmark: str, whitespace: str, report: Optional[str]):
    """Score predictions in a JSONL benchmark by 1 - edit distance."""
    from ocrkit.eval import Whitespace, format_report
    from ocrkit_cli.services.evaluate import evaluate as run

    try:
        result = run(benchmark, Whitespace(whitespace), report)
    except Exception as e:
        _fail(f"evaluate {benchmark}", e)
    click.echo(format_report(result))


@click.command("serve")
@_CONFIG_OPTION
@_option("pipeline", "serving.pipeline", type=click.Choice(["ocr", "structure"]), help="Pipeline to serve.")
@_option("host", "serving.host", type=str, help="Bind address.")
@_option("port", "serving.port", type=int, help="Bind port.")
@_option("parallelism", "serving.parallelism", type=int, help="Pipeline instances.")
@_option("queue_size", "serving.queue_size", type=int, help="Requests allowed to wait for an instance.")
@_option("timeout", "serving.timeout", type=float, help="Seconds a request may wait for an instance.")
@_option("max_body_bytes", "serving.max_body_bytes", type=int, help="Largest accepted request body.")
@_option("device", "backend.device", type=str, help="cpu, gpu or gpu:N.")
@_option("profile", "profile", type=click.Choice(["default", "low_memory"]), help="Resource profile.")
def serve(config_path: Optional[str], **flags):
    """Serve a pipeline over HTTP."""
    from ocrkit_cli.services.serve import serve as run

    try:
        cfg = _load(serve.callback, config_path, flags)
        run(cfg)
    except Exception as e:
        _fail("serve", e)


@click.command("mcp")
@_CONFIG_OPTION
@_option("mcp_pipeline", "mcp.pipeline", type=click.Choice(["ocr", "structure"], case_sensitive=False), help="Pipeline built at startup in local mode.")
@_option("mcp_source", "mcp.source", type=click.Choice(["local", "self_hosted", "hosted_cloud"], case_sensitive=False), help="Where tool calls run.")
@_option("mcp_server_url", "mcp.server_url", type=str, help="Base URL for self_hosted and hosted_cloud.")
@_option("mcp_access_token", "mcp.access_token", type=str, help="Bearer token for hosted_cloud.")
@_option("mcp_transport", "mcp.transport", type=click.Choice(["stdio", "streamable_http"]), help="MCP transport.")
@_option("mcp_host", "mcp.host", type=str, help="Bind address for streamable_http.")
@_option("mcp_port", "mcp.port", type=int, help="Bind port for streamable_http.")
@_option("mcp_device", "mcp.device", type=str, help="cpu, gpu or gpu:N, for local mode.")
@_option("mcp_timeout", "mcp.timeout", type=float, help="Seconds to wait for a remote server.")
def mcp(config_path: Optional[str], **flags):
    """Serve the ocr and structure pipelines as MCP tools."""
    from ocrkit_cli.services.mcp import run_mcp

    for name in ("mcp_pipeline", "mcp_source"):
        if flags.get(name) is not None:
            flags[name] = flags[name].lower()
    try:
        cfg = _load(mcp.callback, config_path, flags)
        run_mcp(cfg)
    except Exception as e:
        _fail("start the MCP server", e)


main.add_command(ocr)
main.add_command(structure)
main.add_command(kie)
main.add_command(evaluate)
main.add_command(serve)
main.add_command(mcp)


def mcp_entry():
    """The `ocrkit-mcp` executable."""
    from ocrkit_cli.utils import configure_logging

    configure_logging(0)
    mcp(prog_name="ocrkit-mcp")
