import math

import pytest
from fastapi.testclient import TestClient

from capability_provider.service import ProviderConfig, create_app


@pytest.fixture()
def client():
    app = create_app(ProviderConfig(engine="deterministic"))
    with TestClient(app) as c:
        yield c


def _norm(vec):
    return math.sqrt(sum(v * v for v in vec))


def test_embed_shape_and_normalization(client):
    resp = client.post("/embed", json={"texts": ["a"]})
    assert resp.status_code == 200
    vectors = resp.json()["vectors"]
    assert len(vectors) == 1
    assert len(vectors[0]) == 384
    assert abs(_norm(vectors[0]) - 1.0) < 1e-6


def test_embed_identical_texts_identical_vectors(client):
    resp = client.post("/embed", json={"texts": ["lend money", "lend money"]})
    a, b = resp.json()["vectors"]
    assert a == b


def test_embed_order_preserved(client):
    texts = ["one", "two", "three"]
    forward = client.post("/embed", json={"texts": texts}).json()["vectors"]
    reverse = client.post("/embed", json={"texts": texts[::-1]}).json()["vectors"]
    assert forward == reverse[::-1]


def test_embed_empty_list_rejected(client):
    resp = client.post("/embed", json={"texts": []})
    assert resp.status_code == 400


def test_embed_blank_text_rejected(client):
    resp = client.post("/embed", json={"texts": ["ok", "   "]})
    assert resp.status_code == 400


def test_nli_shape_and_bounds(client):
    resp = client.post("/nli", json={
        "premise": "The bank approved the loan.",
        "hypotheses": ["h one", "h two", "h three"]})
    assert resp.status_code == 200
    probs = resp.json()["entail_probs"]
    assert len(probs) == 3
    assert all(0.0 <= p <= 1.0 for p in probs)


def test_nli_self_entailment_ceiling(client):
    text = "The previous sentence is about some aspects of banks."
    resp = client.post("/nli", json={"premise": text, "hypotheses": [text]})
    (prob,) = resp.json()["entail_probs"]
    assert 0.0 <= prob <= 1.0
    unrelated = client.post("/nli", json={
        "premise": text, "hypotheses": ["quarterly rainfall totals"]})
    assert prob > unrelated.json()["entail_probs"][0]


def test_nli_empty_hypotheses_rejected(client):
    resp = client.post("/nli", json={"premise": "p", "hypotheses": []})
    assert resp.status_code == 400


def test_healthz(client):
    assert client.get("/healthz").json() == {"engine": "deterministic"}


def test_unloadable_model_returns_503(tmp_path):
    # Replay with an empty recording behaves like an unloadable model.
    app = create_app(ProviderConfig(engine="replay",
                                    record_path=str(tmp_path / "rec.json")))
    with TestClient(app) as client:
        resp = client.post("/embed", json={"texts": ["never recorded"]})
        assert resp.status_code == 503
        assert "recording" in resp.json()["detail"]
