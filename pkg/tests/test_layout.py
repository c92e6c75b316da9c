import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocrkit.core.document import Category, LayoutBlock, TextLine
from ocrkit.core.geometry import BBox, Quad
from ocrkit.layout.order import (
    CutParams,
    OrderMode,
    assign_regions,
    detect_order_mode,
    recover_reading_order,
    xy_cut,
)
from ocrkit.layout.postprocess import (
    LayoutParams,
    RawDetection,
    category_of,
    detections_from_boxes,
    postprocess_layout,
)


def _det(box, category=Category.Text, score=0.9):
    return RawDetection(BBox(*box), category, score)


def _block(box, category=Category.Text, region_id=None):
    return LayoutBlock(BBox(*box), category, 0.9, region_id=region_id)


def _grid(columns, rows, width=100, height=40, gutter=30, gap=10):
    """Boxes of a `columns` x `rows` grid, listed column by column."""
    return [
        BBox(c * (width + gutter), r * (height + gap), c * (width + gutter) + width, r * (height + gap) + height)
        for c in range(columns)
        for r in range(rows)
    ]


def test_category_of_labels():
    assert category_of("doc_title") is Category.Title
    assert category_of("Figure_Title") is Category.Caption
    assert category_of("footnote") is Category.Footer
    assert category_of("mystery") is Category.Other


def test_detections_from_boxes():
    boxes = np.array([[50, 60, 10, 20, 0.8, 1], [0, 0, 5, 5, 1.4, 9]], np.float32)
    a, b = detections_from_boxes(boxes, ["text", "table"])
    assert a.bbox == BBox(10, 20, 50, 60)
    assert (a.category, a.label) == (Category.Table, "table")
    assert a.score == pytest.approx(0.8)
    assert (b.category, b.label, b.score) == (Category.Other, "", 1.0)


def test_postprocess_drops_low_scores():
    blocks = postprocess_layout([_det((0, 0, 10, 10), score=0.4), _det((20, 20, 30, 30), score=0.5)])
    assert [b.bbox for b in blocks] == [BBox(20, 20, 30, 30)]


def test_postprocess_nms_is_class_aware():
    dets = [
        _det((0, 0, 100, 100), score=0.8),
        _det((5, 0, 105, 100), score=0.9),
        _det((0, 0, 100, 100), Category.Table, score=0.7),
    ]
    blocks = postprocess_layout(dets)
    assert [(b.bbox, b.category) for b in blocks] == [
        (BBox(5, 0, 105, 100), Category.Text),
        (BBox(0, 0, 100, 100), Category.Table),
    ]


def test_postprocess_nms_tie_prefers_larger_then_earlier():
    dets = [_det((0, 0, 100, 100)), _det((0, 0, 100, 110)), _det((0, 0, 100, 110))]
    (block,) = postprocess_layout(dets)
    assert block.bbox == BBox(0, 0, 100, 110)


def test_postprocess_drops_contained_blocks():
    dets = [
        _det((0, 0, 200, 200), score=0.9),
        _det((10, 10, 50, 50), score=0.95),
        _det((10, 10, 50, 50), Category.Image, score=0.95),
    ]
    blocks = postprocess_layout(dets)
    assert [(b.bbox, b.category) for b in blocks] == [
        (BBox(10, 10, 50, 50), Category.Image),
        (BBox(0, 0, 200, 200), Category.Text),
    ]


def test_postprocess_keeps_partly_covered_blocks():
    dets = [_det((0, 0, 100, 100)), _det((80, 0, 180, 100))]
    assert len(postprocess_layout(dets, LayoutParams(nms_iou=0.9))) == 2


def test_xy_cut_reads_columns_left_to_right():
    boxes = _grid(3, 4)
    assert xy_cut(boxes) == list(range(12))


def test_xy_cut_vertical_reads_columns_right_to_left():
    boxes = _grid(3, 2)
    assert xy_cut(boxes, OrderMode.Vertical) == [4, 5, 2, 3, 0, 1]


def test_xy_cut_spanning_title_comes_first():
    boxes = [BBox(0, 60, 100, 200), BBox(130, 60, 230, 200), BBox(0, 0, 230, 40)]
    assert xy_cut(boxes) == [2, 0, 1]


def test_xy_cut_shrink_tolerates_slight_overlap():
    # columns overlap by one pixel; shrinking opens the gutter
    boxes = [BBox(0, 10, 101, 50), BBox(100, 0, 200, 20), BBox(100, 30, 200, 50)]
    assert xy_cut(boxes, p=CutParams(min_gap=0.5)) == [0, 1, 2]
    assert xy_cut(boxes, p=CutParams(min_gap=0.5, shrink=0)) == [1, 0, 2]


def test_xy_cut_empty_and_single():
    assert xy_cut([]) == []
    assert xy_cut([BBox(0, 0, 1, 1)]) == [0]


@given(
    st.integers(1, 4),
    st.integers(1, 5),
    st.sampled_from(list(OrderMode)),
    st.randoms(use_true_random=False),
)
def test_xy_cut_is_independent_of_input_order(columns, rows, mode, rnd):
    boxes = _grid(columns, rows)
    expected = [boxes[i] for i in xy_cut(boxes, mode)]
    shuffled = list(boxes)
    rnd.shuffle(shuffled)
    assert [shuffled[i] for i in xy_cut(shuffled, mode)] == expected


@given(st.integers(1, 4), st.integers(1, 5), st.sampled_from(list(OrderMode)))
def test_xy_cut_returns_a_permutation(columns, rows, mode):
    boxes = _grid(columns, rows)
    assert sorted(xy_cut(boxes, mode)) == list(range(len(boxes)))


def _free_runs(boxes, members, axis):
    """Uncovered unit runs (start, end) between the outermost boxes along `axis`."""
    covered = set()
    for i in members:
        covered.update(range(boxes[i][axis], boxes[i][axis + 2]))
    runs, start = [], None
    for c in range(min(boxes[i][axis] for i in members), max(boxes[i][axis + 2] for i in members)):
        if c in covered:
            if start is not None:
                runs.append((start, c))
            start = None
        elif start is None:
            start = c
    return runs


def _halves(boxes, members, axis, run, mode):
    first = [i for i in members if boxes[i][axis + 2] <= run[0]]
    second = [i for i in members if boxes[i][axis + 2] > run[0]]
    if axis == 0 and mode is OrderMode.Vertical:
        return second, first
    return first, second


def _fallback(boxes, members, mode):
    if mode is OrderMode.Vertical:
        return sorted(members, key=lambda i: (-boxes[i][2], boxes[i][1], i))
    return sorted(members, key=lambda i: (boxes[i][1], boxes[i][0], i))


def _widest_cut_order(boxes, members, mode, min_gap):
    if len(members) <= 1:
        return list(members)
    for axis in (0, 1):
        runs = [r for r in _free_runs(boxes, members, axis) if r[1] - r[0] >= min_gap]
        if runs:
            run = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
            first, second = _halves(boxes, members, axis, run, mode)
            return _widest_cut_order(boxes, first, mode, min_gap) + _widest_cut_order(boxes, second, mode, min_gap)
    return _fallback(boxes, members, mode)


def _every_cut_order(boxes, members, mode, min_gap):
    """All orders reachable by cutting at any admissible gap on either axis."""
    if len(members) <= 1:
        return {tuple(members)}
    orders = set()
    for axis in (0, 1):
        for run in _free_runs(boxes, members, axis):
            if run[1] - run[0] < min_gap:
                continue
            first, second = _halves(boxes, members, axis, run, mode)
            for a in _every_cut_order(boxes, first, mode, min_gap):
                for b in _every_cut_order(boxes, second, mode, min_gap):
                    orders.add(a + b)
    return orders or {tuple(_fallback(boxes, members, mode))}


@st.composite
def _separate_boxes(draw):
    """Up to six integer boxes with pairwise disjoint interiors."""
    boxes = []
    for _ in range(draw(st.integers(1, 6))):
        x0, y0 = draw(st.integers(0, 60)), draw(st.integers(0, 60))
        box = (x0, y0, x0 + draw(st.integers(1, 30)), y0 + draw(st.integers(1, 30)))
        if all(BBox(*box).intersection_area(BBox(*b)) == 0 for b in boxes):
            boxes.append(box)
    return boxes


@pytest.mark.parametrize("mode", list(OrderMode))
@settings(max_examples=1000, deadline=None)
@given(boxes=_separate_boxes(), min_gap=st.integers(1, 4))
def test_xy_cut_takes_the_widest_gap_at_every_step(mode, boxes, min_gap):
    members = list(range(len(boxes)))
    order = xy_cut([BBox(*b) for b in boxes], mode, CutParams(min_gap=min_gap, shrink=0))
    assert order == _widest_cut_order(boxes, members, mode, min_gap)
    assert tuple(order) in _every_cut_order(boxes, members, mode, min_gap)


_boxes = st.builds(
    lambda x0, y0, w, h: BBox(x0, y0, x0 + w, y0 + h),
    st.integers(0, 500),
    st.integers(0, 500),
    st.integers(0, 200),
    st.integers(0, 200),
)


@given(st.lists(_boxes, max_size=25), st.sampled_from(list(OrderMode)))
def test_xy_cut_on_arbitrary_boxes_returns_a_permutation(boxes, mode):
    assert sorted(xy_cut(boxes, mode)) == list(range(len(boxes)))


# the fallback sort breaks ties by input position, so its keys are kept distinct
@given(
    st.lists(_boxes, max_size=25, unique_by=(lambda b: (b.y0, b.x0), lambda b: (b.x1, b.y0))),
    st.sampled_from(list(OrderMode)),
    st.randoms(use_true_random=False),
)
def test_xy_cut_on_arbitrary_boxes_ignores_input_order(boxes, mode, rnd):
    order = xy_cut(boxes, mode)
    shuffled = list(boxes)
    rnd.shuffle(shuffled)
    assert [shuffled[i] for i in xy_cut(shuffled, mode)] == [boxes[i] for i in order]


def test_xy_cut_two_column_report():
    # a title over two columns of unequal length
    left = [BBox(40, 110 + 60 * r, 290, 150 + 60 * r) for r in range(4)]
    right = [BBox(330, 110 + 60 * r, 580, 150 + 60 * r) for r in range(3)]
    boxes = [BBox(40, 30, 580, 80)] + left + right
    assert xy_cut(boxes) == list(range(8))
    assert xy_cut(boxes, OrderMode.Vertical) == [0, 5, 6, 7, 1, 2, 3, 4]


def test_reading_order_headers_first_footers_last():
    blocks = [
        _block((0, 900, 100, 950), Category.Footer),
        _block((0, 100, 100, 200)),
        _block((0, 0, 100, 50), Category.Header),
        _block((0, 300, 100, 400)),
    ]
    assert recover_reading_order(blocks) == [2, 1, 3, 0]


def test_reading_order_finishes_one_region_before_the_next():
    # two articles side by side; region 1 starts higher but sits on the right
    blocks = [
        _block((300, 0, 500, 100), region_id=1),
        _block((0, 50, 200, 150), region_id=0),
        _block((300, 150, 500, 250), region_id=1),
        _block((0, 200, 200, 300), region_id=0),
    ]
    assert recover_reading_order(blocks) == [1, 3, 0, 2]


def test_reading_order_region_shapes_decide_region_order():
    # a wide region on top, then a narrower one below
    blocks = [
        _block((0, 200, 100, 300), region_id=5),
        _block((0, 0, 500, 100), region_id=9),
    ]
    assert recover_reading_order(blocks) == [1, 0]


def test_assign_regions():
    regions = [
        RawDetection(BBox(300, 0, 600, 400), Category.Other, 0.9),
        RawDetection(BBox(0, 0, 250, 400), Category.Other, 0.9),
    ]
    blocks = [
        _block((10, 10, 200, 100)),
        _block((310, 10, 590, 100)),
        _block((240, 10, 320, 100)),
        _block((0, 500, 100, 600)),
    ]
    assigned = assign_regions(blocks, regions)
    # left region, the block under it, the block straddling the gutter, right region
    assert [b.region_id for b in assigned] == [0, 3, 2, 1]
    order = recover_reading_order(assigned)
    assert order == [0, 3, 2, 1]
    assert [assigned[i].region_id for i in order] == [0, 1, 2, 3]


def test_assign_regions_without_regions():
    blocks = [_block((0, 0, 10, 10)), _block((20, 0, 30, 10))]
    assert [b.region_id for b in assign_regions(blocks, [])] == [0, 1]


def _line(w, h):
    return TextLine(Quad.from_bbox(BBox(0, 0, w, h)), "x", 1.0)


def test_detect_order_mode():
    assert detect_order_mode([]) is OrderMode.Horizontal
    assert detect_order_mode([_line(100, 20), _line(20, 100)]) is OrderMode.Horizontal
    assert detect_order_mode([_line(20, 100), _line(20, 100), _line(100, 20)]) is OrderMode.Vertical
