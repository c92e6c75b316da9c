import base64
import json
import threading

import pytest
from fastapi.testclient import TestClient

from ocrkit.errors import ConfigError
from ocrkit.io import encode_png
from ocrkit.ocr.pipeline import OcrConfig
from ocrkit.structure import StructureConfig
from ocrkit_cli.config import PipelineConfig
from ocrkit_cli.services.serve import Saturated, WorkerPool, apply_options, create_app

from .fixtures import REPORT_MARKDOWN, charset_file, report


def _config(**serving):
    cfg = PipelineConfig()
    return cfg.model_copy(update={"serving": cfg.serving.model_copy(update=serving)})


@pytest.fixture
def image_body(report):
    _, image, _, _ = report
    return {"image": base64.b64encode(encode_png(image)).decode("ascii")}


@pytest.fixture
def client(report):
    session = report[3]
    return TestClient(create_app(_config(pipeline="structure"), lambda: session))


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "pipeline": "structure", "instances": 1, "queue_depth": 0}


def test_health_reports_instances(report):
    session = report[3]
    app = create_app(_config(parallelism=2), lambda: session)
    assert TestClient(app).get("/health").json()["instances"] == 2


def test_structure_request(client, image_body):
    response = client.post("/v1/structure", json=image_body)
    assert response.status_code == 200, response.text
    body = response.json()
    assert body["version"] == "1"
    assert body["markdown"] == REPORT_MARKDOWN
    assert [it["category"] for it in body["pages"][0]["items"]][:3] == ["title", "text", "image"]


def test_responses_are_byte_identical(client, image_body):
    first = client.post("/v1/structure", json=image_body)
    second = client.post("/v1/structure", json=image_body)
    assert first.content == second.content


def test_only_the_configured_pipeline_is_routed(client, image_body):
    assert client.post("/v1/ocr", json=image_body).status_code == 404


def test_ocr_request(report, image_body):
    session = report[3]
    client = TestClient(create_app(_config(), lambda: session))
    body = client.post("/v1/ocr", json=image_body).json()
    assert "markdown" not in body
    assert body["pages"][0]["text_lines"][0]["text"] == "Annual Report"


def test_request_options(client, image_body):
    body = dict(image_body, options={"use_table_recognition": False})
    markdown = client.post("/v1/structure", json=body).json()["markdown"]
    assert "<table>" not in markdown

    body = dict(image_body, options={"use_tables": False})
    response = client.post("/v1/structure", json=body)
    assert response.status_code == 400
    assert "use_tables" in response.json()["error"]["message"]

    body = dict(image_body, options={"rec_score_thresh": True})
    response = client.post("/v1/structure", json=body)
    assert response.status_code == 400
    assert "rec_score_thresh" in response.json()["error"]["message"]


@pytest.mark.parametrize(
    "content",
    [
        b"not json",
        b"[1, 2]",
        b"{}",
        b'{"image": "aGk=", "pdf": "aGk="}',
        b'{"image": 7}',
        b'{"image": "***"}',
        b'{"image": "aGk=", "options": []}',
    ],
)
def test_malformed_requests(client, content):
    response = client.post("/v1/structure", content=content, headers={"content-type": "application/json"})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == 400


def test_undecodable_image(client):
    body = {"image": base64.b64encode(b"definitely not a png").decode("ascii")}
    assert client.post("/v1/structure", json=body).status_code == 422


def test_body_too_large(report):
    session = report[3]
    client = TestClient(create_app(_config(max_body_bytes=64), lambda: session))
    response = client.post("/v1/ocr", content=json.dumps({"image": "A" * 100}))
    assert response.status_code == 413


def test_saturated_pool_returns_503(report, image_body):
    session = report[3]
    app = create_app(_config(queue_size=0, retry_after=7), lambda: session)
    pool = app.state.pool
    client = TestClient(app)

    with pool.acquire(timeout=1):
        response = client.post("/v1/ocr", json=image_body)
    assert response.status_code == 503
    assert response.headers["retry-after"] == "7"
    assert client.post("/v1/ocr", json=image_body).status_code == 200


def test_worker_pool_bounds():
    pool = WorkerPool(object, size=1, queue_size=1)
    with pool.acquire(timeout=1):
        with pytest.raises(Saturated):
            # one waiter is allowed; it times out because the instance stays busy
            with pool.acquire(timeout=0.05):
                pass
        assert pool.queue_depth == 0

    with pytest.raises(ConfigError):
        WorkerPool(object, size=0, queue_size=1)


def test_worker_pool_rejects_beyond_queue():
    pool = WorkerPool(object, size=1, queue_size=1)
    holding = threading.Event()
    release = threading.Event()
    waiting = threading.Event()

    def hold():
        with pool.acquire(timeout=1):
            holding.set()
            release.wait(5)

    def wait():
        waiting.set()
        with pool.acquire(timeout=5):
            pass

    holder = threading.Thread(target=hold)
    holder.start()
    holding.wait(5)
    waiter = threading.Thread(target=wait)
    waiter.start()
    waiting.wait(5)
    while pool.queue_depth < 1:
        pass

    with pytest.raises(Saturated):
        with pool.acquire(timeout=1):
            pass
    release.set()
    holder.join(5)
    waiter.join(5)
    assert pool.queue_depth == 0


def test_apply_options():
    cfg = apply_options(StructureConfig(), {"use_doc_unwarping": True, "use_seal_recognition": False})
    assert cfg.ocr.use_doc_unwarping is True
    assert cfg.use_seal_recognition is False
    assert apply_options(OcrConfig(), {"rec_score_thresh": 0.5}).rec_score_thresh == 0.5
    with pytest.raises(ConfigError):
        apply_options(OcrConfig(), {"use_table_recognition": True})
    with pytest.raises(ConfigError):
        apply_options(OcrConfig(), {"use_doc_unwarping": "yes"})
    with pytest.raises(ValueError):
        apply_options(OcrConfig(), {"rec_score_thresh": 2.0})


def test_apply_options_numbers_reject_booleans():
    assert apply_options(OcrConfig(), {"rec_score_thresh": 1}).rec_score_thresh == 1
    with pytest.raises(ConfigError) as e:
        apply_options(OcrConfig(), {"rec_score_thresh": True})
    assert e.value.field == "options.rec_score_thresh"
    with pytest.raises(ConfigError):
        apply_options(StructureConfig(), {"rec_score_thresh": False})
