"""Engine registry, backend selection and model execution."""

import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Union

from ocrkit.backends.contracts import check_outputs
from ocrkit.backends.descriptor import ARTIFACT_SUFFIXES, EngineKind, ModelDescriptor
from ocrkit.backends.engine import Device, Engine, EngineConfig, StubEngine
from ocrkit.backends.tensor import Tensor, TensorMap
from ocrkit.errors import (
    ConfigError,
    DuplicateEngine,
    EngineFailure,
    NoEngineAvailable,
    OcrkitError,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)

EngineFactory = Callable[[EngineConfig], Engine]

GPU_PRIORITY = (
    EngineKind.VendorAccelerated,
    EngineKind.NativeGraph,
    EngineKind.PortableGraph,
    EngineKind.Stub,
)
CPU_PRIORITY = (
    EngineKind.PortableGraph,
    EngineKind.NativeGraph,
    EngineKind.Stub,
)


@dataclass(frozen=True)
class RuntimeEnv:
    device: Device
    available: FrozenSet[EngineKind]


def select_backend(env: RuntimeEnv, model: ModelDescriptor, cfg: EngineConfig) -> EngineKind:
    """Picks the engine kind for `model`.

    Candidates are the device's priority table restricted to registered
    kinds and to the model's backend hints (no hints means any kind).
    When hints exclude every registered kind, the hints are dropped with a
    warning; kinds outside the priority table are the last resort.
    """
    if not env.available:
        raise NoEngineAvailable("No inference engine is registered")

    if cfg.preferred is not None and cfg.preferred in env.available:
        return cfg.preferred

    priority = GPU_PRIORITY if env.device.is_gpu else CPU_PRIORITY
    hints = model.backend_hints

    for kind in priority:
        if kind in env.available and (not hints or kind in hints):
            return kind

    fallback = [k for k in priority if k in env.available]
    if not fallback:
        fallback = sorted(env.available, key=lambda k: k.value)
    chosen = fallback[0]
    logger.warning(
        "No registered engine satisfies hints %s of model %s on %s, falling back to %s",
        sorted(h.value for h in hints),
        model.name,
        env.device,
        chosen.value,
    )
    return chosen


def convert_on_demand(model: ModelDescriptor, to: EngineKind) -> ModelDescriptor:
    """Points `model` at a pre-converted artifact for engine kind `to`.

    The converted artifact is a sibling of the current one with the
    suffix of the target kind. Models are returned unchanged when the
    artifact already has that kind or when no sibling exists.
    """
    if to is EngineKind.Stub or model.artifact_kind is to:
        return model

    current = model.artifact_path
    if current.name:
        sibling = current.with_suffix(ARTIFACT_SUFFIXES[to])
        if sibling.exists():
            logger.info("Using converted artifact %s for model %s", sibling, model.name)
            return model.with_artifact(sibling)

    logger.warning(
        "No %s artifact found beside %s for model %s, keeping the original",
        to.value,
        current,
        model.name,
    )
    return model


def run(engine: Engine, model: ModelDescriptor, inputs: Mapping[str, Tensor]) -> TensorMap:
    """Runs `model` on `engine`, checking inputs and outputs."""
    for spec in model.input_specs:
        if spec.name not in inputs:
            raise ShapeMismatch(f"Model {model.name} is missing input '{spec.name}'")
        spec.check(inputs[spec.name])

    try:
        if engine.single_flight:
            with engine.lock:
                outputs = engine.infer(model, dict(inputs))
        else:
            outputs = engine.infer(model, dict(inputs))
    except OcrkitError:
        raise
    except Exception as e:
        raise EngineFailure(
            f"{engine.kind.value} engine failed on model {model.name}: {e}", model=model.name
        ) from e

    check_outputs(model, outputs)
    return outputs


class EngineRegistry:
    """Engine factories by kind. Registration is serialized."""

    def __init__(self):
        self._factories: Dict[EngineKind, EngineFactory] = {}
        self._lock = threading.Lock()

    def register_engine(self, kind: EngineKind, factory: EngineFactory):
        with self._lock:
            if kind in self._factories:
                raise DuplicateEngine(f"Engine kind {kind.value} is already registered")
            self._factories[kind] = factory
        logger.debug("Registered engine %s", kind.value)

    def list_engines(self) -> List[EngineKind]:
        with self._lock:
            return sorted(self._factories, key=lambda k: k.value)

    def env(self, device: Device) -> RuntimeEnv:
        with self._lock:
            return RuntimeEnv(device, frozenset(self._factories))

    def create(self, kind: EngineKind, cfg: EngineConfig) -> Engine:
        with self._lock:
            factory = self._factories.get(kind)
        if factory is None:
            raise NoEngineAvailable(f"Engine kind {kind.value} is not registered")
        return factory(cfg)


def default_registry(
    fixtures_root: Union[str, Path], record_from: Optional[Engine] = None
) -> EngineRegistry:
    """A registry holding only the fixture-backed stub engine."""
    registry = EngineRegistry()
    registry.register_engine(
        EngineKind.Stub, lambda cfg: StubEngine(cfg, fixtures_root, record_from=record_from)
    )
    return registry


class Session:
    """Resolves model names to engines and runs them.

    One engine instance is created per selected kind and shared by every
    model that selects it.
    """

    def __init__(
        self,
        registry: EngineRegistry,
        models: Mapping[str, ModelDescriptor],
        cfg: EngineConfig = EngineConfig(),
    ):
        self.registry = registry
        self.models = dict(models)
        self.cfg = cfg
        self._engines: Dict[EngineKind, Engine] = {}
        self._resolved: Dict[str, ModelDescriptor] = {}
        self._kinds: Dict[str, EngineKind] = {}
        self._lock = threading.Lock()

    def model(self, name: str) -> ModelDescriptor:
        try:
            return self.models[name]
        except KeyError:
            raise ConfigError(f"Model {name} is not in the model registry", field="models")

    def _engine_for(self, name: str):
        with self._lock:
            if name in self._resolved:
                model = self._resolved[name]
                return self._engines[self._kinds[name]], model

            model = self.model(name)
            kind = select_backend(self.registry.env(self.cfg.device), model, self.cfg)
            if kind not in self._engines:
                self._engines[kind] = self.registry.create(kind, self.cfg)
            model = convert_on_demand(model, kind)
            self._resolved[name] = model
            self._kinds[name] = kind
            return self._engines[kind], model

    def infer(self, name: str, inputs: Mapping[str, Tensor]) -> TensorMap:
        engine, model = self._engine_for(name)
        return run(engine, model, inputs)

    def engines(self) -> List[Engine]:
        with self._lock:
            return list(self._engines.values())

    def warnings(self) -> List[str]:
        return [w for engine in self.engines() for w in engine.warnings]
