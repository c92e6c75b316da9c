"""Text detection postprocessing.

Turns the detection model's probability map into text quads: binarize,
take 4-connected components, fit each component's minimum-area
rectangle, filter by mean probability, unclip, filter small boxes.
"""

from dataclasses import dataclass
from typing import List

import cv2
import numpy as np

from ocrkit.core.geometry import Quad, expand_quad, order_clockwise

# corners of a unit pixel, used to fit rectangles around whole pixels
_PIXEL_CORNERS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.float32)


@dataclass(frozen=True)
class DetectionParams:
    bin_thresh: float = 0.3
    box_score_thresh: float = 0.6
    unclip_ratio: float = 1.5
    min_box_side: float = 3
    max_candidates: int = 1000

    def __post_init__(self):
        for name in ("bin_thresh", "box_score_thresh"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.unclip_ratio < 0:
            raise ValueError(f"unclip_ratio must be non-negative, got {self.unclip_ratio}")
        if self.max_candidates < 0:
            raise ValueError(f"max_candidates must be non-negative, got {self.max_candidates}")


def _min_side(q: Quad) -> float:
    arr = q.to_array()
    edges = np.linalg.norm(np.roll(arr, -1, axis=0) - arr, axis=1)
    return float(min(edges))


def _component_rect(mask: np.ndarray) -> np.ndarray:
    contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_SIMPLE)
    centres = np.concatenate([c.reshape(-1, 2) for c in contours]).astype(np.float32)
    corners = (centres[:, None, :] + _PIXEL_CORNERS[None, :, :]).reshape(-1, 2)
    return cv2.boxPoints(cv2.minAreaRect(corners))


def extract_text_regions(prob_map: np.ndarray, params: DetectionParams = DetectionParams()) -> List[Quad]:
    """Extracts text quads from an HxW probability map.

    Quads come back clockwise from their top-left corner, sorted top to
    bottom and then left to right by that corner.
    """
    prob_map = np.asarray(prob_map, dtype=np.float32)
    if prob_map.ndim != 2:
        raise ValueError(f"Probability map must be 2-D, got shape {prob_map.shape}")
    if prob_map.size and (prob_map.min() < 0.0 or prob_map.max() > 1.0):
        raise ValueError("Probability map values must lie in [0, 1]")

    binary = (prob_map > params.bin_thresh).astype(np.uint8)
    count, labels, stats, _ = cv2.connectedComponentsWithStats(binary, connectivity=4)

    quads = []
    for label in range(1, count):
        x, y, w, h = (int(v) for v in stats[label, :4])
        window = labels[y : y + h, x : x + w] == label
        score = float(prob_map[y : y + h, x : x + w][window].mean())
        if score < params.box_score_thresh:
            continue

        rect = _component_rect(window.astype(np.uint8))
        rect[:, 0] += x
        rect[:, 1] += y
        quad = Quad.from_array(order_clockwise(rect))
        quad = expand_quad(quad, params.unclip_ratio)
        if _min_side(quad) < params.min_box_side:
            continue
        quads.append(quad)

    quads.sort(key=lambda q: (q.points[0].y, q.points[0].x))
    return quads[: params.max_candidates]
