from dataclasses import dataclass, replace
from typing import List, Sequence

from ocrkit.core.document import (
    CAPTION_TARGETS,
    CaptionItem,
    Category,
    DocumentItem,
    TextItem,
)


@dataclass(frozen=True)
class CaptionLink:
    caption_index: int
    target_index: int
    distance: float


def _vertical_gap(caption: DocumentItem, target: DocumentItem):
    """Edge-to-edge distance and whether the target sits above."""
    above = target.bbox.y1 <= caption.bbox.y0 or (
        target.bbox.y0 + target.bbox.y1 <= caption.bbox.y0 + caption.bbox.y1
    )
    if above:
        return max(caption.bbox.y0 - target.bbox.y1, 0.0), True
    return max(target.bbox.y0 - caption.bbox.y1, 0.0), False


def link_captions(items: Sequence[DocumentItem]) -> List[CaptionLink]:
    """Pairs captions with the nearest table, image or chart of their region.

    Candidate pairs are taken greedily by ascending vertical distance; at
    equal distance a target above the caption beats one below. Each
    caption and each target is used at most once. Indices are order
    indices.
    """
    captions = [it for it in items if it.category is Category.Caption]
    targets = [it for it in items if it.category in CAPTION_TARGETS]

    candidates = []
    for c in captions:
        for t in targets:
            if c.page_index != t.page_index or c.region_id != t.region_id:
                continue
            distance, above = _vertical_gap(c, t)
            candidates.append((distance, not above, c.order_index, t.order_index))
    candidates.sort()

    used_captions, used_targets = set(), set()
    links = []
    for distance, _, c, t in candidates:
        if c in used_captions or t in used_targets:
            continue
        used_captions.add(c)
        used_targets.add(t)
        links.append(CaptionLink(c, t, distance))
    return sorted(links, key=lambda l: l.caption_index)


def apply_caption_links(items: Sequence[DocumentItem], links: Sequence[CaptionLink]) -> List[DocumentItem]:
    """Records links on both ends; unlinked captions become text items."""
    caption_of = {l.target_index: l.caption_index for l in links}
    target_of = {l.caption_index: l.target_index for l in links}

    out = []
    for it in items:
        if isinstance(it, CaptionItem):
            if it.order_index in target_of:
                it = replace(it, target_index=target_of[it.order_index])
            else:
                it = TextItem(
                    bbox=it.bbox,
                    page_index=it.page_index,
                    order_index=it.order_index,
                    region_id=it.region_id,
                    text=it.text,
                )
        elif it.category in CAPTION_TARGETS and it.order_index in caption_of:
            it = replace(it, caption_index=caption_of[it.order_index])
        out.append(it)
    return out
