"""
config.schema
~~~~~~~~~~~~~
The pipeline configuration file, version "1".

Every section rejects unknown keys. Sections convert to the library's own
parameter objects with their `build` methods.
"""

from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field

from ocrkit.backends.descriptor import EngineKind
from ocrkit.backends.engine import Device, EngineConfig
from ocrkit.io import DEFAULT_PDF_DPI
from ocrkit.kie.clients import ClientConfig
from ocrkit.kie.extract import KieParams
from ocrkit.layout.order import CutParams, OrderMode
from ocrkit.layout.postprocess import LayoutParams
from ocrkit.ocr.detection import DetectionParams
from ocrkit.ocr.pipeline import OcrConfig, OcrModels
from ocrkit.structure import StructureConfig, StructureModels

MiB = 1024 * 1024


def _device_name(value: str) -> str:
    return str(Device.parse(value))


DeviceName = Annotated[str, AfterValidator(_device_name)]
"""cpu, gpu or gpu:N."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DetectionSettings(_Section):
    bin_thresh: float = Field(0.3, ge=0.0, le=1.0)
    box_score_thresh: float = Field(0.6, ge=0.0, le=1.0)
    unclip_ratio: float = Field(1.5, gt=0.0)
    min_box_side: float = Field(3.0, ge=0.0)
    max_candidates: int = Field(1000, ge=1)

    def build(self) -> DetectionParams:
        return DetectionParams(**self.model_dump())


class OcrModelSettings(_Section):
    doc_orientation: str = "doc_orientation"
    unwarp: str = "unwarp"
    text_det: str = "text_det"
    line_orientation: str = "line_orientation"
    text_rec: str = "text_rec"


class OcrSettings(_Section):
    use_doc_orientation_classify: bool = False
    use_doc_unwarping: bool = False
    use_textline_orientation: bool = False
    detection: DetectionSettings = DetectionSettings()
    rec_score_thresh: float = Field(0.0, ge=0.0, le=1.0)
    pdf_dpi: int = Field(DEFAULT_PDF_DPI, ge=36, le=1200)
    max_workers: int = Field(1, ge=1)
    models: OcrModelSettings = OcrModelSettings()

    def build(self) -> OcrConfig:
        return OcrConfig(
            use_doc_orientation_classify=self.use_doc_orientation_classify,
            use_doc_unwarping=self.use_doc_unwarping,
            use_textline_orientation=self.use_textline_orientation,
            detection=self.detection.build(),
            models=OcrModels(**self.models.model_dump()),
            rec_score_thresh=self.rec_score_thresh,
            pdf_dpi=self.pdf_dpi,
            max_workers=self.max_workers,
        )


class LayoutSettings(_Section):
    score_thresh: float = Field(0.5, ge=0.0, le=1.0)
    nms_iou: float = Field(0.5, ge=0.0, le=1.0)
    containment_ratio: float = Field(0.9, ge=0.0, le=1.0)


class CutSettings(_Section):
    min_gap: float = Field(5.0, ge=0.0)
    shrink: float = Field(2.0, ge=0.0)


class StructureModelSettings(_Section):
    layout: str = "layout"
    region_det: str = "region_det"
    table_cls: str = "table_cls"
    table_cell: str = "table_cell"
    table_struct: str = "table_struct"
    formula: str = "formula"
    chart: str = "chart"
    seal: str = "seal"


class StructureSettings(_Section):
    use_region_detection: bool = False
    use_table_recognition: bool = True
    use_formula_recognition: bool = True
    use_chart_recognition: bool = False
    use_seal_recognition: bool = True
    order_mode: Literal["horizontal", "vertical", "auto"] = "horizontal"
    layout: LayoutSettings = LayoutSettings()
    cut: CutSettings = CutSettings()
    include_header_footer: bool = False
    models: StructureModelSettings = StructureModelSettings()

    def build(self, ocr: OcrConfig) -> StructureConfig:
        return StructureConfig(
            ocr=ocr,
            use_region_detection=self.use_region_detection,
            use_table_recognition=self.use_table_recognition,
            use_formula_recognition=self.use_formula_recognition,
            use_chart_recognition=self.use_chart_recognition,
            use_seal_recognition=self.use_seal_recognition,
            order_mode=None if self.order_mode == "auto" else OrderMode(self.order_mode),
            layout=LayoutParams(**self.layout.model_dump()),
            cut=CutParams(**self.cut.model_dump()),
            include_header_footer=self.include_header_footer,
            models=StructureModels(**self.models.model_dump()),
        )


class BackendSettings(_Section):
    device: DeviceName = "cpu"
    fp16: bool = False
    intra_op_threads: int = Field(1, ge=1)
    preferred: Optional[Literal["native_graph", "portable_graph", "vendor_accelerated", "stub"]] = None
    stub_fixtures: Optional[str] = None
    """Directory of recorded engine outputs; defaults to fixtures/ in the home directory."""

    def build(self) -> EngineConfig:
        return EngineConfig(
            fp16=self.fp16,
            intra_op_threads=self.intra_op_threads,
            device=Device.parse(self.device),
            preferred=EngineKind(self.preferred) if self.preferred else None,
        )


class ServiceConfig(_Section):
    host: str = "127.0.0.1"
    port: int = Field(8080, ge=1, le=65535)
    pipeline: Literal["ocr", "structure"] = "ocr"
    max_body_bytes: int = Field(32 * MiB, ge=1)
    timeout: float = Field(60.0, gt=0.0)
    """Seconds a request may wait for a free pipeline instance."""
    parallelism: int = Field(1, ge=1)
    """Independent pipeline instances serving requests."""
    queue_size: int = Field(8, ge=0)
    """Requests allowed to wait once every instance is busy."""
    retry_after: int = Field(1, ge=0)


class McpConfig(_Section):
    pipeline: Literal["ocr", "structure"] = "ocr"
    source: Literal["local", "self_hosted", "hosted_cloud"] = "local"
    server_url: Optional[str] = None
    access_token: Optional[str] = None
    transport: Literal["stdio", "streamable_http"] = "stdio"
    host: str = "127.0.0.1"
    port: int = Field(8090, ge=1, le=65535)
    device: DeviceName = "cpu"
    timeout: float = Field(60.0, gt=0.0)


class ClientSettings(_Section):
    model_name: str = ""
    base_url: str = ""
    api_type: Literal["mock", "openai"] = "mock"
    api_key: Optional[str] = None

    def build(self, module_name: str) -> ClientConfig:
        return ClientConfig(module_name=module_name, **self.model_dump())


class KieSettings(_Section):
    chat_bot: ClientSettings = ClientSettings()
    retriever: ClientSettings = ClientSettings()
    mllm_chat_bot: ClientSettings = ClientSettings()
    use_mllm: bool = False
    top_k: int = Field(5, ge=1)
    max_chars: int = Field(512, ge=1)
    overlap: int = Field(64, ge=0)
    mllm_parallelism: int = Field(1, ge=1)
    mllm_answers: Dict[str, str] = {}
    """Fixed answers for the mock vision-language model."""

    def params(self) -> KieParams:
        return KieParams(
            top_k=self.top_k,
            max_chars=self.max_chars,
            overlap=self.overlap,
            mllm_parallelism=self.mllm_parallelism,
        )


class PipelineConfig(_Section):
    version: Literal["1"] = "1"
    profile: Literal["default", "low_memory"] = "default"
    ocr: OcrSettings = OcrSettings()
    structure: StructureSettings = StructureSettings()
    models: Union[str, List[Dict[str, Any]]] = []
    """Model registry entries, or the path of a registry file."""
    backend: BackendSettings = BackendSettings()
    serving: ServiceConfig = ServiceConfig()
    mcp: McpConfig = McpConfig()
    kie: KieSettings = KieSettings()

    def ocr_config(self) -> OcrConfig:
        return self.ocr.build()

    def structure_config(self) -> StructureConfig:
        return self.structure.build(self.ocr.build())
