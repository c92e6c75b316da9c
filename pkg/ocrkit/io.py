"""Reading page images and PDFs, writing PNGs.

Pages are handled as HxWx3 uint8 RGB arrays throughout.
"""

import io
from pathlib import Path
from typing import List, Union

import fitz
import numpy as np
from PIL import Image, UnidentifiedImageError

from ocrkit.errors import InputError

DEFAULT_PDF_DPI = 200
PDF_MAGIC = b"%PDF"


def decode_image(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise InputError(f"Cannot decode image: {e}") from e


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def rasterize_pdf(data: bytes, dpi: int = DEFAULT_PDF_DPI) -> List[np.ndarray]:
    """Renders every page of a PDF at `dpi`."""
    try:
        doc = fitz.open(stream=data, filetype="pdf")
    except Exception as e:
        raise InputError(f"Cannot open PDF: {e}") from e

    pages = []
    with doc:
        zoom = dpi / 72.0
        for page in doc:
            pix = page.get_pixmap(matrix=fitz.Matrix(zoom, zoom), alpha=False)
            arr = np.frombuffer(pix.samples, dtype=np.uint8).reshape(pix.height, pix.width, pix.n)
            pages.append(np.ascontiguousarray(arr[:, :, :3]))
    return pages


def decode_pages(data: bytes, dpi: int = DEFAULT_PDF_DPI) -> List[np.ndarray]:
    """Decodes an image or a PDF into page images."""
    if data[:4] == PDF_MAGIC:
        return rasterize_pdf(data, dpi)
    return [decode_image(data)]


def load_pages(path: Union[str, Path], dpi: int = DEFAULT_PDF_DPI) -> List[np.ndarray]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as e:
        raise InputError(f"Input {path} does not exist") from e
    except IsADirectoryError as e:
        raise InputError(f"Input {path} is a directory") from e
    return decode_pages(data, dpi)


def save_png(path: Union[str, Path], image: np.ndarray):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png(image))
