from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional

from ocrkit.core.document import (
    CaptionItem,
    Category,
    ChartItem,
    Document,
    DocumentItem,
    FormulaItem,
    ImageItem,
    Page,
    SealItem,
    TableItem,
    TextItem,
    TitleItem,
)


@dataclass(frozen=True)
class _PageContext:
    captions: Dict[int, CaptionItem]
    images: FrozenSet[int]
    include_header_footer: bool


def _image_block(item: ImageItem, ctx: _PageContext) -> str:
    caption = ctx.captions.get(item.caption_index) if item.caption_index is not None else None
    if caption is None or not caption.text:
        return f"![]({item.path})"
    title = caption.text.replace("\\", "\\\\").replace('"', '\\"')
    return f'![]({item.path} "{title}")'


def _block(item: DocumentItem, ctx: _PageContext) -> Optional[str]:
    if isinstance(item, TitleItem):
        return f"{'#' * max(item.level, 1)} {item.text}" if item.text else None
    if isinstance(item, TextItem):
        if item.kind in (Category.Header, Category.Footer) and not ctx.include_header_footer:
            return None
        return item.text or None
    if isinstance(item, TableItem):
        return item.html or None
    if isinstance(item, FormulaItem):
        return f"$$\n{item.latex}\n$$"
    if isinstance(item, ChartItem):
        return item.markdown_table.strip() or None
    if isinstance(item, ImageItem):
        return _image_block(item, ctx)
    if isinstance(item, SealItem):
        return f"*{item.text}*" if item.text else None
    if isinstance(item, CaptionItem):
        # image captions are already the image's link title
        if item.target_index in ctx.images:
            return None
        return item.text or None
    return None


def page_blocks(page: Page, include_header_footer: bool = False) -> List[str]:
    ctx = _PageContext(
        captions={it.order_index: it for it in page.items if isinstance(it, CaptionItem)},
        images=frozenset(it.order_index for it in page.items if isinstance(it, ImageItem)),
        include_header_footer=include_header_footer,
    )
    blocks = (_block(it, ctx) for it in page.items)
    return [b for b in blocks if b]


def emit_markdown(doc: Document, include_header_footer: bool = False) -> str:
    """Renders the document as CommonMark, one block per item in reading
    order, blocks separated by a blank line.

    Header and footer text is left out unless `include_header_footer`.
    """
    blocks = [b for page in doc.pages for b in page_blocks(page, include_header_footer)]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"
