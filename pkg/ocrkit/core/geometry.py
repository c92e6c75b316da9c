"""Geometric primitives shared by every pipeline stage.

Coordinates follow raster convention: origin top-left, y grows downward,
units are pixels. Quads are stored clockwise starting at the top-left
corner.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ocrkit.errors import DegenerateGeometry

_EPS = 1e-9


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point coordinates must be finite, got ({self.x}, {self.y})")

    def translate(self, dx: float, dy: float) -> "Point":
        return Point(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box given by its top-left and bottom-right corners."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(
                f"BBox corners out of order: ({self.x0}, {self.y0}, {self.x1}, {self.y1})"
            )

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def intersection_area(self, other: "BBox") -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def scale(self, factor: float) -> "BBox":
        return BBox(
            self.x0 * factor, self.y0 * factor, self.x1 * factor, self.y1 * factor
        )

    def shrink(self, d: float) -> "BBox":
        """Moves every edge inward by `d`, collapsing onto the centre line
        along an axis that is narrower than 2d."""
        cx, cy = (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2
        x0, x1 = min(self.x0 + d, cx), max(self.x1 - d, cx)
        y0, y1 = min(self.y0 + d, cy), max(self.y1 - d, cy)
        return BBox(x0, y0, x1, y1)

    def clip(self, width: float, height: float) -> "BBox":
        x0 = min(max(self.x0, 0.0), width)
        y0 = min(max(self.y0, 0.0), height)
        return BBox(x0, y0, min(max(self.x1, x0), width), min(max(self.y1, y0), height))

    def to_list(self) -> List[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @classmethod
    def enclosing(cls, points: Iterable[Point]) -> "BBox":
        pts = list(points)
        xs = [p.x for p in pts]
        ys = [p.y for p in pts]
        return cls(min(xs), min(ys), max(xs), max(ys))


@dataclass(frozen=True)
class Polygon:
    """Closed polygon; the last point connects back to the first."""

    points: Tuple[Point, ...]

    def __post_init__(self):
        if len(self.points) < 3:
            raise ValueError(f"A polygon needs at least 3 points, got {len(self.points)}")

    def to_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=np.float64)

    @property
    def bbox(self) -> BBox:
        return BBox.enclosing(self.points)

    @classmethod
    def from_array(cls, arr: Sequence[Sequence[float]]) -> "Polygon":
        return cls(tuple(Point(float(x), float(y)) for x, y in arr))


@dataclass(frozen=True)
class Quad:
    """Four corners clockwise from the top-left."""

    points: Tuple[Point, Point, Point, Point]

    def __post_init__(self):
        if len(self.points) != 4:
            raise ValueError(f"A quad has exactly 4 points, got {len(self.points)}")

    def to_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=np.float64)

    def to_list(self) -> List[List[float]]:
        return [[p.x, p.y] for p in self.points]

    @property
    def bbox(self) -> BBox:
        return BBox.enclosing(self.points)

    @property
    def area(self) -> float:
        return polygon_area(Polygon(self.points))

    def translate(self, dx: float, dy: float) -> "Quad":
        return Quad(tuple(p.translate(dx, dy) for p in self.points))

    @classmethod
    def from_array(cls, arr: Sequence[Sequence[float]]) -> "Quad":
        return cls(tuple(Point(float(x), float(y)) for x, y in arr))

    @classmethod
    def from_bbox(cls, box: BBox) -> "Quad":
        return cls(
            (
                Point(box.x0, box.y0),
                Point(box.x1, box.y0),
                Point(box.x1, box.y1),
                Point(box.x0, box.y1),
            )
        )


def order_clockwise(pts: np.ndarray) -> np.ndarray:
    """Orders four corners clockwise starting from the top-left one.

    The top-left corner is the one with the smallest x + y; ties go to
    the smaller y.
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(4, 2)
    centre = pts.mean(axis=0)
    # y grows downward, so ascending atan2 walks clockwise on screen
    angles = np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0])
    pts = pts[np.argsort(angles, kind="stable")]
    sums = pts[:, 0] + pts[:, 1]
    start = min(range(4), key=lambda i: (round(sums[i], 9), pts[i, 1]))
    return np.roll(pts, -start, axis=0)


def polygon_area(p: Polygon) -> float:
    """Absolute shoelace area; 0 for degenerate polygons."""
    arr = p.to_array()
    x, y = arr[:, 0], arr[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) / 2.0)


def _signed_area(arr: np.ndarray) -> float:
    x, y = arr[:, 0], arr[:, 1]
    return float((np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) / 2.0)


def iou(a: BBox, b: BBox) -> float:
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def expand_quad(q: Quad, unclip_ratio: float) -> Quad:
    """Offsets every edge of `q` outward by area * unclip_ratio / perimeter.

    New corners are the intersections of adjacent offset edges, so a
    rectangle stays a rectangle with each side grown by 2d.
    """
    if unclip_ratio < 0:
        raise ValueError(f"unclip_ratio must be non-negative, got {unclip_ratio}")

    arr = q.to_array()
    signed = _signed_area(arr)
    if abs(signed) <= _EPS:
        raise DegenerateGeometry("Cannot expand a quad with zero area")
    if unclip_ratio == 0:
        return q

    edges = np.roll(arr, -1, axis=0) - arr
    lengths = np.linalg.norm(edges, axis=1)
    if np.any(lengths <= _EPS):
        raise DegenerateGeometry("Cannot expand a quad with a zero-length edge")

    d = abs(signed) * unclip_ratio / float(lengths.sum())
    orientation = 1.0 if signed > 0 else -1.0
    normals = orientation * np.stack([edges[:, 1], -edges[:, 0]], axis=1) / lengths[:, None]
    starts = arr + d * normals

    out = np.empty_like(arr)
    for i in range(4):
        j = (i - 1) % 4
        # offset edge j ends where offset edge i begins
        a = np.array([edges[j], -edges[i]]).T
        rhs = starts[i] - starts[j]
        if abs(np.linalg.det(a)) <= _EPS:
            raise DegenerateGeometry("Adjacent quad edges are parallel")
        t = np.linalg.solve(a, rhs)
        out[i] = starts[j] + t[0] * edges[j]
    return Quad.from_array(out)


def _triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) / 2.0


def perspective_homography(src: Quad, dst_w: float, dst_h: float) -> np.ndarray:
    """Solves the 3x3 matrix mapping `src` corners onto the rectangle
    (0,0), (w,0), (w,h), (0,h)."""
    if dst_w <= 0 or dst_h <= 0:
        raise ValueError(f"Destination size must be positive, got {dst_w}x{dst_h}")

    s = src.to_array()
    for i in range(4):
        others = [s[(i + k) % 4] for k in range(3)]
        if _triangle_area(*others) <= _EPS:
            raise DegenerateGeometry("Three quad corners are collinear")

    d = np.array([[0, 0], [dst_w, 0], [dst_w, dst_h], [0, dst_h]], dtype=np.float64)
    a = np.zeros((8, 8), dtype=np.float64)
    b = np.zeros(8, dtype=np.float64)
    for i in range(4):
        x, y = s[i]
        u, v = d[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as e:
        raise DegenerateGeometry("Homography system is singular") from e
    return np.append(h, 1.0).reshape(3, 3)


def apply_homography(m: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    homogeneous = np.hstack([pts, np.ones((len(pts), 1))]) @ m.T
    return homogeneous[:, :2] / homogeneous[:, 2:3]
