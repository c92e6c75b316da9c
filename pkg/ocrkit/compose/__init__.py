from ocrkit.compose.captions import CaptionLink, apply_caption_links, link_captions
from ocrkit.compose.markdown import emit_markdown
from ocrkit.compose.output import image_name, save_json, save_markdown, write_images
from ocrkit.compose.serialize import (
    SCHEMA_VERSION,
    document_to_dict,
    emit_json,
    emit_page_json,
    parse_json,
)
