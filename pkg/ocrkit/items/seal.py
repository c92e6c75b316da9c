"""Straightening curved seal text.

A seal text polygon lists its top edge left to right, then its bottom
edge right to left. Both edges are resampled at matching arc-length
fractions and every slice between neighbouring samples is warped onto a
strip of a common height; the strips side by side form the line image.
"""

from typing import List

import cv2
import numpy as np

from ocrkit.core.geometry import Polygon, Quad, order_clockwise, perspective_homography
from ocrkit.errors import DegenerateGeometry
from ocrkit.ocr.recognition import crop_line

SAMPLES = 32


def _arc_lengths(line: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(line, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _resample(line: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    cum = _arc_lengths(line)
    total = cum[-1]
    if total <= 0:
        raise DegenerateGeometry("Seal polygon edge has zero length")
    targets = fractions * total
    xs = np.interp(targets, cum, line[:, 0])
    ys = np.interp(targets, cum, line[:, 1])
    out = np.stack([xs, ys], axis=1)
    snapped = np.round(out)
    return np.where(np.abs(out - snapped) < 1e-9, snapped, out)


def _slice(image: np.ndarray, quad: np.ndarray, w: int, h: int) -> np.ndarray:
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = quad
    if (
        np.array_equal(quad, np.round(quad))
        and ax == dx and bx == cx and ay == by and dy == cy
        and bx - ax == w and cy - ay == h
        and ax >= 0 and ay >= 0 and cx <= image.shape[1] and cy <= image.shape[0]
    ):
        return image[int(ay) : int(cy), int(ax) : int(bx)]
    m = perspective_homography(Quad.from_array(quad), w, h)
    return cv2.warpPerspective(
        image, m, (w, h), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE
    )


def rectify_seal_text(poly: Polygon, image: np.ndarray, samples: int = SAMPLES) -> np.ndarray:
    """Returns the text band under `poly` as a straight line image.

    Four-point polygons are plain quads and go through `crop_line`.
    """
    n = len(poly.points)
    if n == 4:
        return crop_line(image, Quad.from_array(order_clockwise(poly.to_array())))
    if n < 6 or n % 2:
        raise DegenerateGeometry(
            f"A curved text polygon needs an even number of at least 6 points, got {n}"
        )

    pts = poly.to_array()
    top = pts[: n // 2]
    bottom = pts[n // 2 :][::-1]

    top_len = _arc_lengths(top)[-1]
    bottom_len = _arc_lengths(bottom)[-1]
    width = int(round((top_len + bottom_len) / 2))
    if width < 1:
        raise DegenerateGeometry("Seal polygon has no length")

    # sample where strip boundaries fall on whole output pixels
    columns = np.unique(np.round(np.linspace(0, width, samples)).astype(int))
    fractions = columns / width
    top_r = _resample(top, fractions)
    bottom_r = _resample(bottom, fractions)

    height = int(round(float(np.mean(np.linalg.norm(bottom_r - top_r, axis=1)))))
    if height < 1:
        raise DegenerateGeometry("Seal polygon has no thickness")

    strips: List[np.ndarray] = []
    for i in range(len(columns) - 1):
        w = int(columns[i + 1] - columns[i])
        quad = np.array([top_r[i], top_r[i + 1], bottom_r[i + 1], bottom_r[i]])
        strips.append(_slice(image, quad, w, height))
    return np.ascontiguousarray(np.concatenate(strips, axis=1))
