"""Page preprocessing: orientation correction and unwarping.

Both steps return the corrected image together with a `PointMap` that
takes coordinates in the corrected image back to the image they were
given, so detected geometry can be reported in input coordinates.
"""

import logging
from typing import Callable, Tuple

import numpy as np

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor

logger = logging.getLogger(__name__)

ROTATIONS = (0, 90, 180, 270)

PointMap = Callable[[np.ndarray], np.ndarray]


def identity(pts: np.ndarray) -> np.ndarray:
    return np.asarray(pts, dtype=np.float64)


def compose(outer: PointMap, inner: PointMap) -> PointMap:
    """Applies `inner` first, then `outer`."""
    return lambda pts: outer(inner(pts))


def classify_doc_orientation(session: Session, model: str, image: np.ndarray) -> int:
    """Returns how far the page content is rotated counter-clockwise, in
    degrees. Ties go to the smallest rotation."""
    scores = session.infer(model, {"image": Tensor.from_image(image)})["scores"].array()
    return ROTATIONS[int(np.argmax(scores.reshape(-1)[:4]))]


def rotate_upright(image: np.ndarray, angle: int) -> Tuple[np.ndarray, PointMap]:
    """Rotates the page clockwise by `angle` degrees, undoing a
    counter-clockwise rotation of its content."""
    if angle not in ROTATIONS:
        raise ValueError(f"Rotation must be one of {ROTATIONS}, got {angle}")
    h, w = image.shape[:2]
    k = angle // 90
    rotated = np.ascontiguousarray(np.rot90(image, k=-k))

    def back(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        if k == 0:
            out = (x, y)
        elif k == 1:
            out = (y, h - x)
        elif k == 2:
            out = (w - x, h - y)
        else:
            out = (w - y, x)
        return np.stack(out, axis=1)

    return rotated, back


def unwarp(session: Session, model: str, image: np.ndarray) -> Tuple[np.ndarray, PointMap]:
    """Replaces the page with the unwarping model's output.

    The model's displacement field is not exposed, so geometry is mapped
    back by rescaling when the output size differs from the input.
    """
    out = session.infer(model, {"image": Tensor.from_image(image)})["image"].array()
    out = np.ascontiguousarray(out[0])
    h, w = image.shape[:2]
    oh, ow = out.shape[:2]
    if (oh, ow) != (h, w):
        logger.debug("Unwarping resized the page from %dx%d to %dx%d", w, h, ow, oh)
    sx, sy = w / ow, h / oh

    def back(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
        return pts * np.array([sx, sy])

    return out, back
