"""Output contracts of each model task.

Every model takes a single NHWC uint8 tensor named "image" unless its
descriptor says otherwise. Outputs:

    DocOrientation   scores    [1, 4] F32   classes 0/90/180/270 degrees
    Unwarp           image     [1, H, W, 3] U8
    TextDet          prob_map  [1, H, W] F32, same H and W as the input
    LineOrientation  scores    [1, 2] F32   classes 0/180 degrees
    TextRec          logits    [1, T, C] F32, C == charset size
    Layout           boxes     [N, 6] F32   x0, y0, x1, y1, score, class id
    RegionDet        boxes     [N, 6] F32   class id ignored
    TableCls         orientation [1, 4] F32, frame [1, 2] F32 (wired, wireless)
    TableCell        boxes     [N, 6] F32   class id ignored
    TableStruct      tokens    [1, L] I64   ids into STRUCTURE_VOCAB
    Formula          text      [L] U8       UTF-8 LaTeX
    Chart            text      [L] U8       UTF-8 markdown table
    Seal             polygons  [N, P, 2] F32 curved text polygons
"""

from typing import Dict, Mapping, Tuple

from ocrkit.backends.descriptor import ModelDescriptor, Task
from ocrkit.backends.tensor import DType, Tensor
from ocrkit.errors import EngineFailure, ShapeMismatch

OUTPUT_CONTRACTS: Dict[Task, Dict[str, Tuple[int, DType]]] = {
    Task.DocOrientation: {"scores": (2, DType.F32)},
    Task.Unwarp: {"image": (4, DType.U8)},
    Task.TextDet: {"prob_map": (3, DType.F32)},
    Task.LineOrientation: {"scores": (2, DType.F32)},
    Task.TextRec: {"logits": (3, DType.F32)},
    Task.Layout: {"boxes": (2, DType.F32)},
    Task.RegionDet: {"boxes": (2, DType.F32)},
    Task.TableCls: {"orientation": (2, DType.F32), "frame": (2, DType.F32)},
    Task.TableCell: {"boxes": (2, DType.F32)},
    Task.TableStruct: {"tokens": (2, DType.I64)},
    Task.Formula: {"text": (1, DType.U8)},
    Task.Chart: {"text": (1, DType.U8)},
    Task.Seal: {"polygons": (3, DType.F32)},
}


def check_outputs(model: ModelDescriptor, outputs: Mapping[str, Tensor]):
    for name, (rank, dtype) in OUTPUT_CONTRACTS[model.task].items():
        if name not in outputs:
            raise EngineFailure(
                f"Model {model.name} did not produce output '{name}'", model=model.name
            )
        tensor = outputs[name]
        if len(tensor.shape) != rank or tensor.dtype is not dtype:
            raise ShapeMismatch(
                f"Model {model.name} output '{name}' must be rank {rank} {dtype.name},"
                f" got shape {tensor.shape} {tensor.dtype.name}"
            )
