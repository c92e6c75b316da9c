"""Model descriptors and the model registry file."""

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

import yaml

from ocrkit.backends.tensor import DType, TensorSpec
from ocrkit.errors import ConfigError


class Task(Enum):
    DocOrientation = "doc_orientation"
    Unwarp = "unwarp"
    TextDet = "text_det"
    LineOrientation = "line_orientation"
    TextRec = "text_rec"
    Layout = "layout"
    RegionDet = "region_det"
    TableCls = "table_cls"
    TableCell = "table_cell"
    TableStruct = "table_struct"
    Formula = "formula"
    Chart = "chart"
    Seal = "seal"


class EngineKind(Enum):
    NativeGraph = "native_graph"
    PortableGraph = "portable_graph"
    VendorAccelerated = "vendor_accelerated"
    Stub = "stub"


ARTIFACT_SUFFIXES = {
    EngineKind.NativeGraph: ".graph",
    EngineKind.PortableGraph: ".onnx",
    EngineKind.VendorAccelerated: ".engine",
}

_IMAGE_SPEC = (TensorSpec("image", (1, -1, -1, 3), DType.U8),)


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    task: Task
    input_specs: Tuple[TensorSpec, ...] = _IMAGE_SPEC
    artifact_path: Path = Path()
    charset_path: Optional[Path] = None
    backend_hints: FrozenSet[EngineKind] = frozenset()
    labels: Tuple[str, ...] = ()
    """Class names for detection tasks, indexed by class id."""

    def __post_init__(self):
        if self.task is Task.TextRec and self.charset_path is None:
            raise ConfigError(
                f"Recognition model {self.name} must declare a charset_path",
                field="charset_path",
            )

    @property
    def artifact_kind(self) -> Optional[EngineKind]:
        for kind, suffix in ARTIFACT_SUFFIXES.items():
            if self.artifact_path.suffix == suffix:
                return kind
        return None

    def with_artifact(self, path: Path) -> "ModelDescriptor":
        return replace(self, artifact_path=path)


def descriptor_from_dict(entry: Mapping[str, Any], base_dir: Path = Path(".")) -> ModelDescriptor:
    """Builds a descriptor from one registry document.

    Relative paths resolve against `base_dir`, the directory holding the
    registry file.
    """
    try:
        name = entry["name"]
        task = Task(entry["task"])
    except KeyError as e:
        raise ConfigError(f"Model entry lacks required key {e}", field=str(e)) from e
    except ValueError as e:
        raise ConfigError(f"Unknown model task {entry.get('task')!r}", field="task") from e

    def _path(key: str) -> Optional[Path]:
        value = entry.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base_dir / p

    try:
        hints = frozenset(EngineKind(h) for h in entry.get("backend_hints", []))
    except ValueError as e:
        raise ConfigError(f"Model {name}: {e}", field="backend_hints") from e

    specs = tuple(
        TensorSpec(s["name"], tuple(s["shape"]), DType[s.get("dtype", "U8")])
        for s in entry.get("input_specs", [])
    )
    return ModelDescriptor(
        name=name,
        task=task,
        input_specs=specs or _IMAGE_SPEC,
        artifact_path=_path("artifact_path") or Path(),
        charset_path=_path("charset_path"),
        backend_hints=hints,
        labels=tuple(entry.get("labels", ())),
    )


def load_registry(source: Union[str, Path, List[Mapping[str, Any]]]) -> Dict[str, ModelDescriptor]:
    """Loads model descriptors from a YAML registry file or a list of entries.

    A registry file is a YAML stream with one document per model.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with open(path, "r") as f:
                entries = [doc for doc in yaml.safe_load_all(f) if doc]
        except FileNotFoundError as e:
            raise ConfigError(f"Model registry {path} does not exist", field="models") from e
        base_dir = path.parent
    else:
        entries = list(source)
        base_dir = Path(".")

    registry = {}
    for entry in entries:
        descriptor = descriptor_from_dict(entry, base_dir)
        if descriptor.name in registry:
            raise ConfigError(f"Model {descriptor.name} is declared twice", field="models")
        registry[descriptor.name] = descriptor
    return registry
