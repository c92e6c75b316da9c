"""Region assignment and reading order.

Reading order is a recursive X-Y cut with these refinements:

* regions are ordered first and blocks are only ordered inside their
  region, so articles are read one after another;
* every box is shrunk before projecting so slightly overlapping boxes
  still leave a gap;
* each step cuts only the widest gap, column gutters before row gaps;
  columns run left to right in horizontal mode and right to left in
  vertical mode;
* header blocks always come first and footer blocks last.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Hashable, List, NamedTuple, Optional, Sequence, Tuple

from ocrkit.core.document import Category, LayoutBlock, TextLine
from ocrkit.core.geometry import BBox
from ocrkit.layout.postprocess import RawDetection

REGION_OVERLAP = 0.5


class OrderMode(Enum):
    Horizontal = "horizontal"
    Vertical = "vertical"


@dataclass(frozen=True)
class CutParams:
    min_gap: float = 5
    shrink: float = 2

    def __post_init__(self):
        if self.min_gap < 0 or self.shrink < 0:
            raise ValueError("min_gap and shrink must be non-negative")


class _Item(NamedTuple):
    index: int
    box: BBox
    projected: BBox


def _extent(box: BBox, axis: int):
    return (box.x0, box.x1) if axis == 0 else (box.y0, box.y1)


def _widest_gap(items: List[_Item], axis: int, min_gap: float) -> Optional[Tuple[List[_Item], List[_Item]]]:
    """Splits items at the widest whitespace gap along `axis`, or returns
    None when no gap reaches `min_gap`. Equal gaps go to the lowest one."""
    ordered = sorted(items, key=lambda it: (*_extent(it.projected, axis), it.index))
    best, at = 0.0, None
    end = _extent(ordered[0].projected, axis)[1]
    for k, it in enumerate(ordered[1:], start=1):
        lo, hi = _extent(it.projected, axis)
        gap = lo - end
        if gap > 0 and gap >= min_gap and gap > best:
            best, at = gap, k
        end = max(end, hi)
    if at is None:
        return None
    return ordered[:at], ordered[at:]


def _cut(items: List[_Item], mode: OrderMode, min_gap: float) -> List[int]:
    if len(items) <= 1:
        return [it.index for it in items]

    split = _widest_gap(items, 0, min_gap)
    if split is not None:
        first, second = split
        if mode is OrderMode.Vertical:
            first, second = second, first
        return _cut(first, mode, min_gap) + _cut(second, mode, min_gap)

    split = _widest_gap(items, 1, min_gap)
    if split is not None:
        top, bottom = split
        return _cut(top, mode, min_gap) + _cut(bottom, mode, min_gap)

    if mode is OrderMode.Vertical:
        key = lambda it: (-it.box.x1, it.box.y0, it.index)
    else:
        key = lambda it: (it.box.y0, it.box.x0, it.index)
    return [it.index for it in sorted(items, key=key)]


def xy_cut(boxes: Sequence[BBox], mode: OrderMode = OrderMode.Horizontal, p: CutParams = CutParams()) -> List[int]:
    """Orders boxes by recursive X-Y cut; returns a permutation of indices.

    Each step cuts the single widest gap, trying column gutters before
    row gaps, and recurses into both sides.
    """
    items = [_Item(i, b, b.shrink(p.shrink)) for i, b in enumerate(boxes)]
    return _cut(items, mode, p.min_gap)


def _group(blocks: Sequence[LayoutBlock], keys: Sequence[Hashable]):
    """(headers, footers, regions) where regions maps each key to its
    body blocks in first-appearance order."""
    headers, footers = [], []
    regions: Dict[Hashable, List[int]] = {}
    for i, (block, key) in enumerate(zip(blocks, keys)):
        if block.category is Category.Header:
            headers.append(i)
        elif block.category is Category.Footer:
            footers.append(i)
        else:
            regions.setdefault(key, []).append(i)
    return headers, footers, regions


def _region_order(
    blocks: Sequence[LayoutBlock],
    regions: Dict[Hashable, List[int]],
    mode: OrderMode,
    p: CutParams,
) -> List[Hashable]:
    """Region keys ordered by X-Y cut of the union of each region's blocks."""
    keys = list(regions)
    boxes = []
    for key in keys:
        idx = regions[key]
        box = blocks[idx[0]].bbox
        for i in idx[1:]:
            box = box.union(blocks[i].bbox)
        boxes.append(box)
    return [keys[r] for r in xy_cut(boxes, mode, p)]


def recover_reading_order(
    blocks: Sequence[LayoutBlock],
    mode: OrderMode = OrderMode.Horizontal,
    p: CutParams = CutParams(),
) -> List[int]:
    """Returns block indices in reading order.

    Blocks without a region id are treated as regions of their own.
    """
    keys = [b.region_id if b.region_id is not None else ("block", i) for i, b in enumerate(blocks)]
    headers, footers, regions = _group(blocks, keys)

    def ordered(indices: List[int]) -> List[int]:
        return [indices[k] for k in xy_cut([blocks[i].bbox for i in indices], mode, p)]

    order = ordered(headers)
    for key in _region_order(blocks, regions, mode, p):
        order.extend(ordered(regions[key]))
    order.extend(ordered(footers))
    return order


def assign_regions(
    blocks: Sequence[LayoutBlock],
    regions: Sequence[RawDetection],
    mode: OrderMode = OrderMode.Horizontal,
    p: CutParams = CutParams(),
) -> List[LayoutBlock]:
    """Sets each block's region_id to the region covering most of it.

    A block with less than half of its area inside any region becomes a
    region of its own. Regions are numbered in the order
    `recover_reading_order` reads them, so ids ascend through the page.
    """
    keys: List[Hashable] = []
    for i, block in enumerate(blocks):
        best: Optional[int] = None
        best_overlap = 0.0
        area = block.bbox.area
        if area > 0:
            for r, region in enumerate(regions):
                overlap = block.bbox.intersection_area(region.bbox) / area
                if overlap > best_overlap:
                    best, best_overlap = r, overlap
        if best is None or best_overlap < REGION_OVERLAP:
            keys.append(("block", i))
        else:
            keys.append(("region", best))

    _, _, grouped = _group(blocks, keys)
    ids = {key: n for n, key in enumerate(_region_order(blocks, grouped, mode, p))}
    # regions holding only headers or footers are numbered last
    for key in keys:
        ids.setdefault(key, len(ids))
    return [replace(block, region_id=ids[key]) for block, key in zip(blocks, keys)]


def detect_order_mode(lines: Sequence[TextLine]) -> OrderMode:
    """Vertical when most text lines are taller than they are wide."""
    if not lines:
        return OrderMode.Horizontal
    tall = sum(1 for line in lines if line.bbox.height > line.bbox.width)
    return OrderMode.Vertical if tall * 2 > len(lines) else OrderMode.Horizontal
