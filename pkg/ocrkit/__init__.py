"""ocrkit

Document parsing with pluggable inference engines: text OCR, layout-aware
structure parsing into Markdown and JSON, and key information extraction.
"""

from ocrkit.compose import emit_json, emit_markdown, parse_json, save_json, save_markdown
from ocrkit.core.document import Category, Document, Page, TextLine
from ocrkit.ocr import OcrConfig, OcrPipeline, predict_pages, run_ocr
from ocrkit.structure import StructureConfig, StructurePipeline, predict_structure, run_structure

__version__ = "0.1.0"
