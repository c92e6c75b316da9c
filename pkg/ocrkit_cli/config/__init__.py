from ocrkit_cli.config.home import OcrkitHome
from ocrkit_cli.config.loader import apply_profile, find_config, load_config
from ocrkit_cli.config.schema import (
    BackendSettings,
    KieSettings,
    McpConfig,
    PipelineConfig,
    ServiceConfig,
)
