"""Edit-distance text accuracy."""

from enum import Enum


class Whitespace(Enum):
    Keep = "keep"
    Collapse = "collapse"


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert, delete and substitute distance over code points."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalize(text: str, whitespace: Whitespace = Whitespace.Keep) -> str:
    if whitespace is Whitespace.Collapse:
        return " ".join(text.split())
    return text


def one_minus_edit(pred: str, gt: str, whitespace: Whitespace = Whitespace.Keep) -> float:
    """1 - levenshtein / max length, in [0, 1]; two empty strings score 1."""
    pred, gt = normalize(pred, whitespace), normalize(gt, whitespace)
    longest = max(len(pred), len(gt))
    if longest == 0:
        return 1.0
    return min(max(1.0 - levenshtein(pred, gt) / longest, 0.0), 1.0)
