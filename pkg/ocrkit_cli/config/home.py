"""
config.home
~~~~~~~~~~~
The per-user ocrkit directory, `~/.ocrkit/` unless OCRKIT_HOME says otherwise.
"""

import os
from pathlib import Path
from typing import Optional

from ocrkit_cli.constants import CONFIG_FILE_NAME, HOME_ENV


class OcrkitHome:
    """User specific files: the default config file and engine fixtures."""

    _root = None

    def __init__(self, root: Optional[Path] = None):
        if root is None:
            env = os.environ.get(HOME_ENV)
            root = Path(env) if env else Path.home().joinpath(".ocrkit")
        self._root = root.expanduser().resolve()

    @property
    def root_dir(self) -> Path:
        if self._root.exists() is False:
            self._root.mkdir(parents=True)
        return self._root

    @property
    def config_path(self) -> Optional[Path]:
        """The home config file, if one has been written."""
        path = self._root.joinpath(CONFIG_FILE_NAME)
        return path if path.is_file() else None

    @property
    def fixtures_dir(self) -> Path:
        return self.root_dir.joinpath("fixtures")
