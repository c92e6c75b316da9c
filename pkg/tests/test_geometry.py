import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrkit.core.geometry import (
    BBox,
    Point,
    Polygon,
    Quad,
    apply_homography,
    expand_quad,
    iou,
    order_clockwise,
    perspective_homography,
    polygon_area,
)
from ocrkit.errors import DegenerateGeometry

coords = st.floats(min_value=-1000, max_value=1000, allow_nan=False)
sizes = st.floats(min_value=1, max_value=500, allow_nan=False)


@st.composite
def boxes(draw):
    x0, y0 = draw(coords), draw(coords)
    return BBox(x0, y0, x0 + draw(sizes), y0 + draw(sizes))


def test_bbox_rejects_swapped_corners():
    with pytest.raises(ValueError):
        BBox(10, 0, 0, 10)


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point(float("nan"), 0)


@given(boxes(), boxes())
def test_iou_bounds_and_symmetry(a, b):
    v = iou(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(iou(b, a))


@given(boxes())
def test_iou_with_itself_is_one(a):
    assert iou(a, a) == pytest.approx(1.0)


def test_iou_of_disjoint_boxes_is_zero():
    assert iou(BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)) == 0.0


def test_iou_half_overlap():
    assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(50 / 150)


def test_order_clockwise_any_input_order():
    corners = np.array([[0, 0], [4, 0], [4, 2], [0, 2]], dtype=np.float64)
    for perm in itertools.permutations(range(4)):
        assert np.array_equal(order_clockwise(corners[list(perm)]), corners)


@given(boxes(), st.floats(min_value=0.1, max_value=3.0))
def test_expand_rectangle_grows_every_side_by_the_offset(box, ratio):
    q = Quad.from_bbox(box)
    d = box.area * ratio / (2 * (box.width + box.height))
    grown = expand_quad(q, ratio).bbox
    assert grown.x0 == pytest.approx(box.x0 - d, abs=1e-6)
    assert grown.y0 == pytest.approx(box.y0 - d, abs=1e-6)
    assert grown.x1 == pytest.approx(box.x1 + d, abs=1e-6)
    assert grown.y1 == pytest.approx(box.y1 + d, abs=1e-6)


@given(boxes(), st.floats(min_value=0.1, max_value=3.0))
def test_expand_never_shrinks(box, ratio):
    q = Quad.from_bbox(box)
    assert expand_quad(q, ratio).area >= q.area


def test_expand_with_zero_ratio_is_identity():
    q = Quad.from_bbox(BBox(0, 0, 10, 5))
    assert expand_quad(q, 0) == q


def test_expand_degenerate_quad():
    flat = Quad.from_array([[0, 0], [10, 0], [10, 0], [0, 0]])
    with pytest.raises(DegenerateGeometry):
        expand_quad(flat, 1.5)


def test_expand_rejects_negative_ratio():
    with pytest.raises(ValueError):
        expand_quad(Quad.from_bbox(BBox(0, 0, 10, 5)), -1)


def test_polygon_area_shoelace():
    tri = Polygon.from_array([[0, 0], [4, 0], [0, 3]])
    assert polygon_area(tri) == pytest.approx(6.0)


@given(
    st.lists(st.floats(min_value=-20, max_value=20, allow_nan=False), min_size=8, max_size=8),
    sizes,
    sizes,
)
def test_homography_maps_corners_onto_rectangle(jitter, w, h):
    base = np.array([[100, 100], [400, 100], [400, 250], [100, 250]], dtype=np.float64)
    src = Quad.from_array(base + np.asarray(jitter).reshape(4, 2))
    m = perspective_homography(src, w, h)
    mapped = apply_homography(m, src.to_array())
    expected = np.array([[0, 0], [w, 0], [w, h], [0, h]])
    assert np.allclose(mapped, expected, atol=1e-4)


def test_homography_collinear_corners():
    q = Quad.from_array([[0, 0], [5, 0], [10, 0], [0, 5]])
    with pytest.raises(DegenerateGeometry):
        perspective_homography(q, 10, 10)
