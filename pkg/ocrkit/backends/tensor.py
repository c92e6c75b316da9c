"""Tensors crossing the inference boundary, and their fixture file codec.

Fixture files are little-endian: a 16-byte header (8-byte magic, uint32
dtype code, uint32 rank), then `rank` int64 dimensions, then the data in
row-major order.
"""

import hashlib
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from ocrkit.errors import ShapeMismatch

MAGIC = b"OCRKTNS1"
_HEADER = struct.Struct("<8sII")


class DType(Enum):
    F32 = 1
    F16 = 2
    I64 = 3
    U8 = 4

    @property
    def numpy(self) -> np.dtype:
        return _NUMPY[self]

    @classmethod
    def of(cls, dtype: np.dtype) -> "DType":
        for kind, np_dtype in _NUMPY.items():
            if np.dtype(dtype) == np_dtype:
                return kind
        raise ShapeMismatch(f"Unsupported tensor dtype {dtype}")


_NUMPY = {
    DType.F32: np.dtype("<f4"),
    DType.F16: np.dtype("<f2"),
    DType.I64: np.dtype("<i8"),
    DType.U8: np.dtype("u1"),
}


@dataclass(frozen=True, eq=False)
class Tensor:
    """A dense tensor stored as a flat row-major buffer."""

    shape: Tuple[int, ...]
    dtype: DType
    data: np.ndarray

    def __post_init__(self):
        count = int(np.prod(self.shape)) if self.shape else 1
        if self.data.ndim != 1 or self.data.size != count:
            raise ShapeMismatch(
                f"Tensor of shape {self.shape} needs {count} elements, got {self.data.size}"
            )

    @classmethod
    def from_array(cls, arr: Union[np.ndarray, list], dtype: DType = None) -> "Tensor":
        arr = np.asarray(arr)
        if dtype is None:
            dtype = DType.of(arr.dtype)
        arr = np.ascontiguousarray(arr, dtype=dtype.numpy)
        return cls(tuple(int(d) for d in arr.shape), dtype, arr.reshape(-1))

    @classmethod
    def from_image(cls, image: np.ndarray) -> "Tensor":
        """Wraps an HxWx3 uint8 image as the NHWC model input."""
        if image.ndim != 3 or image.shape[2] != 3:
            raise ShapeMismatch(f"Expected an HxWx3 image, got shape {image.shape}")
        return cls.from_array(image[None], DType.U8)

    @classmethod
    def from_text(cls, text: str) -> "Tensor":
        return cls.from_array(np.frombuffer(text.encode("utf-8"), dtype=np.uint8), DType.U8)

    def array(self) -> np.ndarray:
        return self.data.reshape(self.shape)

    def as_text(self) -> str:
        if self.dtype is not DType.U8:
            raise ShapeMismatch(f"Text tensors are U8, got {self.dtype.name}")
        return self.data.tobytes().decode("utf-8")

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.dtype == other.dtype
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.shape, self.dtype, self.data.tobytes()))


@dataclass(frozen=True)
class TensorSpec:
    """Expected name, dtype and shape of a model input; -1 is a wildcard."""

    name: str
    shape: Tuple[int, ...]
    dtype: DType = DType.U8

    def check(self, tensor: Tensor):
        if len(tensor.shape) != len(self.shape):
            raise ShapeMismatch(
                f"Input '{self.name}' expects rank {len(self.shape)}, got shape {tensor.shape}"
            )
        for want, got in zip(self.shape, tensor.shape):
            if want != -1 and want != got:
                raise ShapeMismatch(
                    f"Input '{self.name}' expects shape {self.shape}, got {tensor.shape}"
                )
        if tensor.dtype is not self.dtype:
            raise ShapeMismatch(
                f"Input '{self.name}' expects {self.dtype.name}, got {tensor.dtype.name}"
            )


def encode_tensor(tensor: Tensor) -> bytes:
    header = _HEADER.pack(MAGIC, tensor.dtype.value, len(tensor.shape))
    dims = struct.pack(f"<{len(tensor.shape)}q", *tensor.shape)
    return header + dims + tensor.data.astype(tensor.dtype.numpy, copy=False).tobytes()


def decode_tensor(blob: bytes) -> Tensor:
    if len(blob) < _HEADER.size:
        raise ShapeMismatch("Tensor blob is shorter than its header")
    magic, code, rank = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ShapeMismatch(f"Bad tensor magic {magic!r}")
    try:
        dtype = DType(code)
    except ValueError as e:
        raise ShapeMismatch(f"Unknown tensor dtype code {code}") from e
    offset = _HEADER.size
    shape = struct.unpack_from(f"<{rank}q", blob, offset)
    offset += 8 * rank
    data = np.frombuffer(blob, dtype=dtype.numpy, offset=offset).copy()
    return Tensor(tuple(shape), dtype, data)


def write_tensor(path: Union[str, Path], tensor: Tensor):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(encode_tensor(tensor))


def read_tensor(path: Union[str, Path]) -> Tensor:
    with open(path, "rb") as f:
        return decode_tensor(f.read())


def input_digest(inputs: Mapping[str, Tensor]) -> str:
    """Content hash of a named tensor map, used as the fixture key."""
    m = hashlib.sha256()
    # for repeatability guarantees
    for name in sorted(inputs):
        tensor = inputs[name]
        m.update(name.encode("utf-8"))
        m.update(struct.pack("<I", tensor.dtype.value))
        m.update(struct.pack(f"<{len(tensor.shape)}q", *tensor.shape))
        m.update(tensor.data.tobytes())
    return m.hexdigest()[:16]


TensorMap = Dict[str, Tensor]
