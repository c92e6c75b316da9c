"""Package-wide constants."""

ENV_PREFIX = "OCRKIT"

HOME_ENV = "OCRKIT_HOME"
CONFIG_ENV = "OCRKIT_CONFIG"
CONFIG_FILE_NAME = "config.yaml"

DEFAULT_OUTPUT = "output"

EXIT_OK = 0
EXIT_USAGE = 2
"""Invalid arguments or configuration."""
EXIT_INPUT = 3
"""The input file is missing or cannot be decoded."""
EXIT_PIPELINE = 4
EXIT_CLIENT = 5
"""A language-model client failed or lacks credentials."""

COMMAND_ALIASES = {
    "pp_structurev3": "structure",
    "pp_chatocrv4_doc": "kie",
}

LOW_MEMORY_MAX_CANDIDATES = 200


def envvar(name: str) -> str:
    """Environment variable backing the flag `--name`."""
    return f"{ENV_PREFIX}_{name.upper()}"
