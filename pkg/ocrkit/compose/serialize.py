"""Canonical JSON for parse results.

Schema, version "1":

    {"version": "1",
     "pages": [{"index", "width", "height",
                "items": [{"category", "bbox", "order", "content", "links"}],
                "text_lines": [{"quad", "text", "score", "orientation"}]}]}

Title items below the top level append "level" after "links"; a missing
"level" reads as 1.

Keys appear in the order above. Pixel values are rounded to 2 decimals
and scores to 4, so equal documents serialize to identical bytes and
serialize(parse(s)) == s for any canonical s.
"""

import json
from typing import Any, Dict, List

from ocrkit.core.document import (
    CaptionItem,
    Category,
    ChartItem,
    Document,
    DocumentItem,
    FormulaItem,
    ImageItem,
    Orientation,
    Page,
    SealItem,
    TableItem,
    TextItem,
    TextLine,
    TitleItem,
    caption_of,
)
from ocrkit.core.geometry import BBox, Quad

SCHEMA_VERSION = "1"


def _px(v: float) -> float:
    return round(float(v), 2) + 0.0


def _score(v: float) -> float:
    return round(float(v), 4) + 0.0


def _links(item: DocumentItem) -> List[Dict[str, Any]]:
    if isinstance(item, CaptionItem) and item.target_index is not None:
        return [{"role": "target", "order": item.target_index}]
    caption = caption_of(item)
    if caption is not None:
        return [{"role": "caption", "order": caption}]
    return []


def item_to_dict(item: DocumentItem) -> Dict[str, Any]:
    d = {
        "category": item.category.value,
        "bbox": [_px(v) for v in item.bbox.to_list()],
        "order": item.order_index,
        "content": item.content,
        "links": _links(item),
    }
    if isinstance(item, TitleItem) and item.level != 1:
        d["level"] = item.level
    return d


def line_to_dict(line: TextLine) -> Dict[str, Any]:
    return {
        "quad": [[_px(x), _px(y)] for x, y in line.geometry.to_list()],
        "text": line.text,
        "score": _score(line.score),
        "orientation": line.orientation.value,
    }


def page_to_dict(page: Page) -> Dict[str, Any]:
    return {
        "index": page.index,
        "width": _px(page.width),
        "height": _px(page.height),
        "items": [item_to_dict(it) for it in page.items],
        "text_lines": [line_to_dict(l) for l in page.text_lines],
    }


def document_to_dict(doc: Document) -> Dict[str, Any]:
    return {"version": SCHEMA_VERSION, "pages": [page_to_dict(p) for p in doc.pages]}


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def emit_json(doc: Document) -> str:
    return dumps(document_to_dict(doc))


def emit_page_json(page: Page) -> str:
    return dumps({"version": SCHEMA_VERSION, "pages": [page_to_dict(page)]})


def _link(links: List[Dict[str, Any]], role: str):
    for link in links:
        if link.get("role") == role:
            return int(link["order"])
    return None


def item_from_dict(d: Dict[str, Any], page_index: int) -> DocumentItem:
    category = Category(d["category"])
    common = dict(bbox=BBox(*d["bbox"]), page_index=page_index, order_index=int(d["order"]))
    content = d.get("content", "")
    links = d.get("links", [])
    if category is Category.Title:
        return TitleItem(text=content, level=int(d.get("level", 1)), **common)
    if category is Category.Table:
        return TableItem(html=content, caption_index=_link(links, "caption"), **common)
    if category is Category.Formula:
        return FormulaItem(latex=content, **common)
    if category is Category.Chart:
        return ChartItem(markdown_table=content, caption_index=_link(links, "caption"), **common)
    if category is Category.Image:
        return ImageItem(path=content, caption_index=_link(links, "caption"), **common)
    if category is Category.SealText:
        return SealItem(text=content, **common)
    if category is Category.Caption:
        return CaptionItem(text=content, target_index=_link(links, "target"), **common)
    return TextItem(text=content, kind=category, **common)


def parse_json(text: str) -> Document:
    """Rebuilds a document from its canonical JSON."""
    data = json.loads(text)
    if data.get("version") != SCHEMA_VERSION:
        raise ValueError(f"Unsupported result schema version {data.get('version')!r}")
    pages = []
    for p in data["pages"]:
        lines = tuple(
            TextLine(
                Quad.from_array(l["quad"]),
                l["text"],
                l["score"],
                Orientation(l["orientation"]),
            )
            for l in p.get("text_lines", [])
        )
        items = tuple(item_from_dict(d, p["index"]) for d in p["items"])
        pages.append(Page(p["index"], p["width"], p["height"], items, lines))
    return Document(tuple(pages))
