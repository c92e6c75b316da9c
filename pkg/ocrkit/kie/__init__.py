from ocrkit.kie.clients import (
    ClientConfig,
    EchoLlm,
    Embedder,
    HashingEmbedder,
    LlmClient,
    MllmClient,
    ScriptedMllm,
    make_embedder,
    make_llm,
    make_mllm,
)
from ocrkit.kie.extract import (
    AnswerSource,
    KieAnswer,
    KieClients,
    KieParams,
    build_prompt,
    evaluate_kie,
    extract,
    format_recall,
    fuse_results,
    recall_at_1,
)
from ocrkit.kie.retrieval import Chunk, VectorIndex, build_index, chunk_document, retrieve
