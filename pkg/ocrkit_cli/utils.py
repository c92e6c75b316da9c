"""Utility functions for services."""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

import click

from ocrkit.backends.descriptor import load_registry
from ocrkit.backends.registry import Session, default_registry
from ocrkit.errors import ClientFailure, ConfigError, EmbedderFailure, InputError
from ocrkit_cli.config.home import OcrkitHome
from ocrkit_cli.config.schema import PipelineConfig
from ocrkit_cli.constants import EXIT_CLIENT, EXIT_INPUT, EXIT_PIPELINE, EXIT_USAGE

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int = 0):
    """Routes the `ocrkit` loggers to stderr.

    WARNING by default, INFO with one -v and DEBUG with two or more.
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    for name in ("ocrkit", "ocrkit_cli"):
        logger = logging.getLogger(name)
        logger.setLevel(level)
        for h in [h for h in logger.handlers if getattr(h, "_ocrkit", False)]:
            logger.removeHandler(h)
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._ocrkit = True
        logger.addHandler(handler)


def exit_code_for(e: BaseException) -> int:
    """Process exit code for an error that escaped a command."""
    if isinstance(e, InputError):
        return EXIT_INPUT
    if isinstance(e, (ClientFailure, EmbedderFailure)):
        return EXIT_CLIENT
    if isinstance(e, (ConfigError, click.UsageError)):
        return EXIT_USAGE
    return EXIT_PIPELINE


def fixtures_root(cfg: PipelineConfig) -> Path:
    if cfg.backend.stub_fixtures:
        return Path(cfg.backend.stub_fixtures)
    return OcrkitHome().fixtures_dir


def build_session(cfg: PipelineConfig, fixtures: Optional[Union[str, Path]] = None) -> Session:
    """Engines and model registry described by the config.

    The only engine installed by default is the stub engine, answering
    from the recorded outputs under `fixtures` (or the configured
    fixtures directory).
    """
    registry = default_registry(fixtures or fixtures_root(cfg))
    return Session(registry, load_registry(cfg.models), cfg.backend.build())


def interactive() -> bool:
    """Whether progress bars should be drawn."""
    return sys.stderr.isatty()


def check_input(path: Union[str, Path]) -> Path:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"Input {path} does not exist")
    return path
