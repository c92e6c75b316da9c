from ocrkit.core.document import (
    CAPTION_TARGETS,
    CaptionItem,
    Category,
    ChartItem,
    Document,
    DocumentItem,
    FormulaItem,
    ImageItem,
    LayoutBlock,
    Orientation,
    Page,
    SealItem,
    TableItem,
    TextItem,
    TextLine,
    TitleItem,
    caption_of,
)
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
