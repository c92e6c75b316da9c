from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

from ocrkit.errors import ConfigError

BLANK = ""


@dataclass(frozen=True)
class Charset:
    """Recognition classes. Index 0 is the CTC blank; grapheme i sits at
    index i + 1."""

    graphemes: Tuple[str, ...]

    def __post_init__(self):
        seen = set()
        for g in self.graphemes:
            if not g:
                raise ConfigError("Charset contains an empty grapheme", field="charset_path")
            if g in seen:
                raise ConfigError(f"Charset repeats grapheme {g!r}", field="charset_path")
            seen.add(g)

    def __len__(self) -> int:
        return len(self.graphemes) + 1

    def __getitem__(self, index: int) -> str:
        if index == 0:
            return BLANK
        return self.graphemes[index - 1]

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Charset":
        """Reads a UTF-8 file with one grapheme per line."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError as e:
            raise ConfigError(f"Charset file {path} does not exist", field="charset_path") from e
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(tuple(line.rstrip("\r") for line in lines))
