from ocrkit.ocr.charset import Charset
from ocrkit.ocr.detection import DetectionParams, extract_text_regions
from ocrkit.ocr.pipeline import (
    OcrConfig,
    OcrModels,
    OcrPipeline,
    predict_pages,
    render_ocr_result,
    run_ocr,
)
from ocrkit.ocr.preprocess import classify_doc_orientation, rotate_upright, unwarp
from ocrkit.ocr.recognition import classify_line_orientation, crop_line, ctc_greedy_decode
