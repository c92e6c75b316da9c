"""Line cropping, line orientation and CTC decoding."""

from typing import Tuple

import cv2
import numpy as np

from ocrkit.backends.registry import Session
from ocrkit.backends.tensor import Tensor
from ocrkit.core.document import Orientation
from ocrkit.core.geometry import Polygon, Quad, perspective_homography, polygon_area
from ocrkit.errors import DegenerateGeometry, ShapeMismatch
from ocrkit.ocr.charset import Charset

VERTICAL_ASPECT = 1.5


def _is_axis_aligned(arr: np.ndarray) -> bool:
    if not np.array_equal(arr, np.round(arr)):
        return False
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = arr
    return ax == dx and bx == cx and ay == by and dy == cy and bx > ax and cy > ay


def crop_line(image: np.ndarray, q: Quad) -> np.ndarray:
    """Cuts the text line under `q` out of `image` as an upright rectangle.

    The crop is as wide as the longer of the quad's top and bottom edges
    and as tall as the longer of its left and right edges. Crops more than
    1.5 times taller than wide are treated as vertical text and rotated
    90 degrees clockwise.
    """
    h_img, w_img = image.shape[:2]
    arr = q.to_array()
    arr[:, 0] = np.clip(arr[:, 0], 0, w_img)
    arr[:, 1] = np.clip(arr[:, 1], 0, h_img)
    if polygon_area(Polygon.from_array(arr)) <= 1e-9:
        raise DegenerateGeometry("Cannot crop a zero-area quad")

    if _is_axis_aligned(arr):
        x0, y0 = int(arr[0, 0]), int(arr[0, 1])
        x1, y1 = int(arr[2, 0]), int(arr[2, 1])
        crop = image[y0:y1, x0:x1].copy()
    else:
        p0, p1, p2, p3 = arr
        width = max(np.linalg.norm(p1 - p0), np.linalg.norm(p2 - p3))
        height = max(np.linalg.norm(p3 - p0), np.linalg.norm(p2 - p1))
        w, h = max(int(round(width)), 1), max(int(round(height)), 1)
        m = perspective_homography(Quad.from_array(arr), w, h)
        crop = cv2.warpPerspective(
            image, m, (w, h), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE
        )

    if crop.shape[0] > VERTICAL_ASPECT * crop.shape[1]:
        crop = cv2.rotate(crop, cv2.ROTATE_90_CLOCKWISE)
    return crop


def classify_line_orientation(session: Session, model: str, crop: np.ndarray) -> Orientation:
    """Ties go to Deg0."""
    scores = session.infer(model, {"image": Tensor.from_image(crop)})["scores"].array()
    return Orientation.Deg180 if int(np.argmax(scores.reshape(-1)[:2])) == 1 else Orientation.Deg0


def upright(crop: np.ndarray, orientation: Orientation) -> np.ndarray:
    if orientation is Orientation.Deg180:
        return cv2.rotate(crop, cv2.ROTATE_180)
    return crop


def _probabilities(logits: np.ndarray) -> np.ndarray:
    rows = logits.sum(axis=1)
    if logits.min() >= 0.0 and np.allclose(rows, 1.0, atol=1e-3):
        return logits
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def ctc_greedy_decode(logits: np.ndarray, cs: Charset) -> Tuple[str, float]:
    """Greedy CTC decoding of a [T, C] (or [1, T, C]) score matrix.

    Repeated class ids collapse, blanks are dropped. The score is the mean
    probability of the kept steps, 1.0 when nothing is kept. Raw logits
    are softmax-normalized first; rows that already sum to one are used
    as they are.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 3 and logits.shape[0] == 1:
        logits = logits[0]
    if logits.ndim != 2:
        raise ShapeMismatch(f"Logits must be [T, C], got shape {logits.shape}")
    if logits.shape[1] != len(cs):
        raise ShapeMismatch(
            f"Logits have {logits.shape[1]} classes but the charset has {len(cs)}"
        )
    if logits.shape[0] == 0:
        return "", 1.0

    probs = _probabilities(logits)
    ids = probs.argmax(axis=1)

    text = []
    kept = []
    previous = 0
    for t, i in enumerate(ids):
        if i != 0 and i != previous:
            text.append(cs[int(i)])
            kept.append(probs[t, i])
        previous = i

    if not kept:
        return "", 1.0
    return "".join(text), float(min(max(np.mean(kept), 0.0), 1.0))
