"""
config.loader
~~~~~~~~~~~~~
Reads a pipeline config file and layers command-line values over it.

Precedence, lowest first: built-in defaults, the config file, OCRKIT_*
environment variables and command-line flags. The last two arrive here
already merged by click as `overrides`.
"""

import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml
from pydantic import ValidationError

from ocrkit.errors import ConfigError
from ocrkit_cli.config.home import OcrkitHome
from ocrkit_cli.config.schema import PipelineConfig
from ocrkit_cli.constants import CONFIG_ENV, LOW_MEMORY_MAX_CANDIDATES


def _line_map(node: yaml.Node, prefix: str = "", lines: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    """Dotted key path -> 1-based line of every mapping key in the document."""
    if lines is None:
        lines = {}
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            lines[path] = key.start_mark.line + 1
            _line_map(value, path, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            path = f"{prefix}.{i}"
            lines[path] = value.start_mark.line + 1
            _line_map(value, path, lines)
    return lines


def _nearest_line(loc: str, lines: Mapping[str, int]) -> Optional[int]:
    parts = loc.split(".")
    while parts:
        line = lines.get(".".join(parts))
        if line is not None:
            return line
        parts.pop()
    return None


def set_dotted(raw: Dict[str, Any], dotted: str, value: Any):
    """Sets `raw["a"]["b"] = value` for "a.b", creating sections on the way."""
    *sections, leaf = dotted.split(".")
    node = raw
    for name in sections:
        child = node.get(name)
        if not isinstance(child, dict):
            child = {}
            node[name] = child
        node = child
    node[leaf] = value


def apply_profile(cfg: PipelineConfig) -> PipelineConfig:
    """Applies the named resource profile over every other layer."""
    if cfg.profile != "low_memory":
        return cfg
    detection = cfg.ocr.detection.model_copy(update={"max_candidates": LOW_MEMORY_MAX_CANDIDATES})
    return cfg.model_copy(
        update={
            "ocr": cfg.ocr.model_copy(update={"use_doc_unwarping": False, "detection": detection}),
            "structure": cfg.structure.model_copy(update={"use_chart_recognition": False}),
            "backend": cfg.backend.model_copy(update={"fp16": True, "intra_op_threads": 1}),
            "serving": cfg.serving.model_copy(update={"parallelism": 1}),
        }
    )


def find_config(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """The explicit path, else OCRKIT_CONFIG, else the home config file."""
    if path:
        return Path(path)
    env = os.environ.get(CONFIG_ENV)
    if env:
        return Path(env)
    return OcrkitHome().config_path


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """Loads and validates a pipeline config.

    Args:
        path: A YAML config file. When None the file is looked up with
            `find_config`; with no file at all the defaults apply.
        overrides: Dotted field paths to values, e.g.
            `{"ocr.detection.bin_thresh": 0.5}`. None values are skipped.

    Raises:
        ConfigError: The file is missing or not YAML, or a value fails
            validation. `field` holds the dotted path and `line` the line
            of the offending key when it came from the file.
    """
    path = find_config(path)
    raw: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError as e:
            raise ConfigError(f"Config file {path} does not exist", field="config") from e
        try:
            node = yaml.compose(text)
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(
                f"Config file {path} is not valid YAML: {getattr(e, 'problem', e)}",
                field="config",
                line=mark.line + 1 if mark is not None else None,
            ) from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"Config file {path} must hold a mapping", field="config")
        raw = loaded or {}
        if node is not None:
            lines = _line_map(node)

    for dotted, value in (overrides or {}).items():
        if value is not None:
            set_dotted(raw, dotted, value)
            lines.pop(dotted, None)

    try:
        cfg = PipelineConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        kind = "Unknown key" if first["type"] == "extra_forbidden" else "Invalid value for"
        raise ConfigError(
            f"{kind} {field}: {first['msg']}",
            field=field,
            line=_nearest_line(field, lines),
        ) from e

    if isinstance(cfg.models, str) and path is not None:
        models = Path(cfg.models)
        if not models.is_absolute():
            cfg = cfg.model_copy(update={"models": str(Path(path).parent / models)})
    return apply_profile(cfg)
