"""The shared document data model.

A `Document` holds `Page`s; every page carries the recognized `TextLine`s
and the typed `DocumentItem`s in reading order.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from ocrkit.core.geometry import BBox, Quad


class Orientation(Enum):
    Deg0 = 0
    Deg180 = 180


class Category(Enum):
    Text = "text"
    Title = "title"
    Table = "table"
    Formula = "formula"
    Chart = "chart"
    Image = "image"
    SealText = "seal"
    Caption = "caption"
    Header = "header"
    Footer = "footer"
    Other = "other"


CAPTION_TARGETS = (Category.Table, Category.Image, Category.Chart)
TEXT_LIKE = (Category.Text, Category.Header, Category.Footer, Category.Other)


@dataclass(frozen=True)
class TextLine:
    geometry: Quad
    text: str
    score: float
    orientation: Orientation = Orientation.Deg0

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"TextLine score must be in [0, 1], got {self.score}")

    @property
    def bbox(self) -> BBox:
        return self.geometry.bbox


@dataclass(frozen=True)
class LayoutBlock:
    bbox: BBox
    category: Category
    score: float
    region_id: Optional[int] = None
    order_index: Optional[int] = None
    label: str = ""
    """Raw label reported by the layout model, eg. 'paragraph_title'."""


@dataclass(frozen=True)
class DocumentItem:
    """Common fields of every page item.

    Links between captions and their targets are expressed with the
    order index of the other item on the same page.
    """

    bbox: BBox
    page_index: int = 0
    order_index: int = 0
    region_id: Optional[int] = None

    @property
    def category(self) -> Category:
        raise NotImplementedError

    @property
    def content(self) -> str:
        raise NotImplementedError

    def with_order(self, order_index: int) -> "DocumentItem":
        return replace(self, order_index=order_index)


@dataclass(frozen=True)
class TextItem(DocumentItem):
    text: str = ""
    kind: Category = Category.Text

    def __post_init__(self):
        if self.kind not in TEXT_LIKE:
            raise ValueError(f"TextItem cannot carry category {self.kind}")

    @property
    def category(self) -> Category:
        return self.kind

    @property
    def content(self) -> str:
        return self.text


@dataclass(frozen=True)
class TitleItem(DocumentItem):
    text: str = ""
    level: int = 1

    @property
    def category(self) -> Category:
        return Category.Title

    @property
    def content(self) -> str:
        return self.text


@dataclass(frozen=True)
class TableItem(DocumentItem):
    html: str = ""
    caption_index: Optional[int] = None

    @property
    def category(self) -> Category:
        return Category.Table

    @property
    def content(self) -> str:
        return self.html


@dataclass(frozen=True)
class FormulaItem(DocumentItem):
    latex: str = ""

    @property
    def category(self) -> Category:
        return Category.Formula

    @property
    def content(self) -> str:
        return self.latex


@dataclass(frozen=True)
class ChartItem(DocumentItem):
    markdown_table: str = ""
    caption_index: Optional[int] = None

    @property
    def category(self) -> Category:
        return Category.Chart

    @property
    def content(self) -> str:
        return self.markdown_table


@dataclass(frozen=True)
class ImageItem(DocumentItem):
    path: str = ""
    data: Optional[bytes] = field(default=None, compare=False, repr=False)
    """PNG-encoded crop, kept until the item is written beside the output."""
    caption_index: Optional[int] = None

    @property
    def category(self) -> Category:
        return Category.Image

    @property
    def content(self) -> str:
        return self.path


@dataclass(frozen=True)
class SealItem(DocumentItem):
    text: str = ""

    @property
    def category(self) -> Category:
        return Category.SealText

    @property
    def content(self) -> str:
        return self.text


@dataclass(frozen=True)
class CaptionItem(DocumentItem):
    text: str = ""
    target_index: Optional[int] = None

    @property
    def category(self) -> Category:
        return Category.Caption

    @property
    def content(self) -> str:
        return self.text


def caption_of(item: DocumentItem) -> Optional[int]:
    """Order index of the caption linked to a table, image or chart."""
    return getattr(item, "caption_index", None)


@dataclass(frozen=True)
class Page:
    index: int
    width: float
    height: float
    items: Tuple[DocumentItem, ...] = ()
    text_lines: Tuple[TextLine, ...] = ()
    trace: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"Page dimensions must be positive, got {self.width}x{self.height}"
            )
        orders = [item.order_index for item in self.items]
        if orders != sorted(orders):
            raise ValueError("Page items must be sorted by order_index")


@dataclass(frozen=True)
class Document:
    pages: Tuple[Page, ...] = ()
    source: Dict[str, Any] = field(default_factory=dict, compare=False)
