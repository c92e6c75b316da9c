import re
from typing import List

import numpy as np

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor
from ocrkit.errors import ChartInvalid

_SEPARATOR_CELL = re.compile(r"^:?-+:?$")


def _cells(row: str) -> List[str]:
    row = row.strip()
    if row.startswith("|"):
        row = row[1:]
    if row.endswith("|"):
        row = row[:-1]
    return [c.strip() for c in row.split("|")]


def validate_pipe_table(text: str) -> str:
    """Checks `text` is a markdown pipe table: a header row, a separator
    row of dashes, and every row with the header's column count."""
    rows = [r for r in text.strip().splitlines() if r.strip()]
    if len(rows) < 2:
        raise ChartInvalid("Chart output needs a header and a separator row", raw=text)
    if any("|" not in r for r in rows):
        raise ChartInvalid("Chart output has a row without column separators", raw=text)

    header = _cells(rows[0])
    separator = _cells(rows[1])
    if not all(_SEPARATOR_CELL.match(c) for c in separator):
        raise ChartInvalid("Second chart row is not a separator row", raw=text)
    for r in rows[1:]:
        if len(_cells(r)) != len(header):
            raise ChartInvalid(
                f"Chart row has {len(_cells(r))} columns, header has {len(header)}", raw=text
            )
    return text


def chart_to_table(session: Session, model: str, crop: np.ndarray) -> str:
    text = session.infer(model, {"image": Tensor.from_image(crop)})["text"].as_text()
    return validate_pipe_table(text)
