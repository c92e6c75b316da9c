import numpy as np

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor
from ocrkit.errors import FormulaInvalid

MAX_TOKENS = 2560


def _braces_balanced(latex: str) -> bool:
    depth = 0
    escaped = False
    for ch in latex:
        if escaped:
            escaped = False
            continue
        if ch == "\\":
            escaped = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def validate_latex(latex: str) -> str:
    """Accepts LaTeX of at most 2560 whitespace-separated tokens whose
    unescaped braces balance."""
    count = len(latex.split())
    if count > MAX_TOKENS:
        raise FormulaInvalid(f"Formula has {count} tokens, more than {MAX_TOKENS}", raw=latex)
    if not _braces_balanced(latex):
        raise FormulaInvalid("Formula braces are unbalanced", raw=latex)
    return latex


def recognize_formula(session: Session, model: str, crop: np.ndarray) -> str:
    text = session.infer(model, {"image": Tensor.from_image(crop)})["text"].as_text()
    return validate_latex(text)
