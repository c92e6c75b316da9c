"""Inference engines.

Real engines (native graph runtimes, portable graph runtimes, vendor
accelerators) plug in by subclassing `Engine` and registering a factory
with an `EngineRegistry`. The only engine shipped here is `StubEngine`,
which answers from fixture files so that every pipeline can be exercised
without weights.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ocrkit.backends.descriptor import EngineKind, ModelDescriptor
from ocrkit.backends.tensor import TensorMap, input_digest, read_tensor, write_tensor
from ocrkit.errors import EngineFailure

logger = logging.getLogger(__name__)

ANY_INPUT_KEY = "any"
"""Fixture directory consulted when no fixture matches the input digest."""


@dataclass(frozen=True)
class Device:
    kind: str = "cpu"
    index: int = 0

    def __post_init__(self):
        if self.kind not in ("cpu", "gpu"):
            raise ValueError(f"Unknown device kind {self.kind!r}")
        if self.index < 0:
            raise ValueError(f"Device index must be non-negative, got {self.index}")

    @property
    def is_gpu(self) -> bool:
        return self.kind == "gpu"

    @classmethod
    def parse(cls, value: str) -> "Device":
        """Parses 'cpu', 'gpu' or 'gpu:N'."""
        kind, _, index = value.strip().lower().partition(":")
        return cls(kind, int(index) if index else 0)

    def __str__(self):
        return "cpu" if self.kind == "cpu" else f"gpu:{self.index}"


@dataclass(frozen=True)
class EngineConfig:
    fp16: bool = False
    intra_op_threads: int = 1
    device: Device = Device()
    preferred: Optional[EngineKind] = None
    """Kind chosen ahead of the priority table when it is registered."""

    def __post_init__(self):
        if self.intra_op_threads < 1:
            raise ValueError(
                f"intra_op_threads must be at least 1, got {self.intra_op_threads}"
            )


class Engine(ABC):
    """An inference engine executing opaque models.

    Engines are safe for concurrent `infer` calls unless `single_flight`
    is set, in which case callers serialize through `lock`.
    """

    kind: EngineKind
    supports_fp16: bool = False
    single_flight: bool = False

    def __init__(self, cfg: EngineConfig):
        self.cfg = cfg
        self.lock = threading.Lock()
        self.warnings = []
        self.fp16 = cfg.fp16 and self.supports_fp16
        if cfg.fp16 and not self.supports_fp16:
            message = f"{type(self).__name__} has no FP16 support, running in F32"
            logger.warning(message)
            self.warnings.append(message)

    @abstractmethod
    def infer(self, model: ModelDescriptor, inputs: TensorMap) -> TensorMap:
        ...

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "fp16": self.fp16,
            "threads": self.cfg.intra_op_threads,
            "device": str(self.cfg.device),
        }


class StubEngine(Engine):
    """Answers from fixture tensors stored as

        <root>/<model name>/<input digest>/<output name>.tensor

    falling back to `<root>/<model name>/any/`. With `record_from`, a miss
    is answered by the delegate engine and its outputs are written as the
    fixture for that digest.
    """

    kind = EngineKind.Stub

    def __init__(
        self,
        cfg: EngineConfig,
        fixtures_root: Union[str, Path],
        record_from: Optional[Engine] = None,
    ):
        super().__init__(cfg)
        self.fixtures_root = Path(fixtures_root)
        self.record_from = record_from
        self._record_lock = threading.Lock()

    def _load(self, model: ModelDescriptor, key: str) -> Optional[TensorMap]:
        fixture_dir = self.fixtures_root / model.name / key
        if not fixture_dir.is_dir():
            return None
        files = sorted(fixture_dir.glob("*.tensor"))
        if not files:
            return None
        return {f.stem: read_tensor(f) for f in files}

    def infer(self, model: ModelDescriptor, inputs: TensorMap) -> TensorMap:
        key = input_digest(inputs)
        outputs = self._load(model, key)
        if outputs is not None:
            return outputs

        if self.record_from is not None:
            with self._record_lock:
                outputs = self.record_from.infer(model, inputs)
                for name, tensor in outputs.items():
                    write_tensor(self.fixtures_root / model.name / key / f"{name}.tensor", tensor)
            logger.debug("Recorded fixture %s/%s", model.name, key)
            return outputs

        outputs = self._load(model, ANY_INPUT_KEY)
        if outputs is not None:
            return outputs

        raise EngineFailure(
            f"No fixture for model {model.name} and key {key}", model=model.name, key=key
        )

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info["fixtures"] = str(self.fixtures_root)
        return info
