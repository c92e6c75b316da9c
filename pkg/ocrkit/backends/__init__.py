from ocrkit.backends.contracts import OUTPUT_CONTRACTS, check_outputs
from ocrkit.backends.descriptor import (
    EngineKind,
    ModelDescriptor,
    Task,
    descriptor_from_dict,
    load_registry,
)
from ocrkit.backends.engine import Device, Engine, EngineConfig, StubEngine
from ocrkit.backends.registry import (
    EngineRegistry,
    RuntimeEnv,
    Session,
    convert_on_demand,
    default_registry,
    run,
    select_backend,
)
from ocrkit.backends.tensor import (
    DType,
    Tensor,
    TensorMap,
    TensorSpec,
    decode_tensor,
    encode_tensor,
    input_digest,
    read_tensor,
    write_tensor,
)
