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
