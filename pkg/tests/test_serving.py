"""REST service behavior and parity with offline inference."""

import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from kwsforge.audio import fit_to_length, read_wav, wav_bytes
from kwsforge.errors import BindFailureError
from kwsforge.features import mfcc
from kwsforge.models import load_checkpoint, predict
from kwsforge.serving import MAX_BODY_BYTES, create_app, resolve_checkpoint_path


@pytest.fixture(scope="module")
def checkpoint(toy_checkpoint):
    return load_checkpoint(toy_checkpoint)


@pytest.fixture(scope="module")
def client(checkpoint):
    return TestClient(create_app(checkpoint))


def encode_wav_file(path) -> str:
    with open(path, "rb") as fh:
        return base64.b64encode(fh.read()).decode("ascii")


class TestEndpoints:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}

    def test_model_info(self, client):
        resp = client.get("/model")
        assert resp.status_code == 200
        body = resp.json()
        assert body["name"] == "cnn-one-fstride4"
        assert body["n_labels"] == 12
        assert body["labels"][0] == "silence" and body["labels"][2] == "yes"
        assert len(body["labels"]) == 12

    def test_predict_happy_path(self, client, manifest):
        wav64 = encode_wav_file(manifest.records[0].path)
        resp = client.post("/predict", json={"wav_data": wav64, "method": "all_label"})
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == {"label", "scores"}
        assert len(body["scores"]) == 12
        assert sum(body["scores"].values()) == pytest.approx(1.0, abs=1e-6)
        assert body["label"] == max(body["scores"], key=body["scores"].get)

    def test_bad_base64(self, client):
        resp = client.post("/predict", json={"wav_data": "!!!not-base64!!!"})
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_base64"

    def test_bad_wav(self, client):
        garbage = base64.b64encode(b"RIFFgarbagebytesWAVEnope").decode()
        resp = client.post("/predict", json={"wav_data": garbage})
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_wav"

    def test_missing_field(self, client):
        resp = client.post("/predict", json={"method": "all_label"})
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_request"

    def test_non_json_body(self, client):
        resp = client.post("/predict", content=b"\x00\x01binary")
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_request"

    def test_payload_too_large(self, client):
        big = "A" * (MAX_BODY_BYTES + 100)
        resp = client.post("/predict", json={"wav_data": big})
        assert resp.status_code == 413
        assert resp.json()["error"] == "payload_too_large"

    def test_4xx_always_carry_error_field(self, client):
        for resp in (
            client.post("/predict", json={"wav_data": "****"}),
            client.post("/predict", content=b"junk"),
            client.post("/predict", json={"wav_data": "A" * (MAX_BODY_BYTES + 10)}),
        ):
            assert 400 <= resp.status_code < 500
            assert "error" in resp.json()


class TestParity:
    def test_service_matches_offline_on_ten_wavs(self, client, checkpoint, manifest):
        paths = [r.path for r in manifest.records][:10]
        for path in paths:
            offline_label, offline_scores = predict(
                checkpoint.model, mfcc(fit_to_length(read_wav(path)))
            )
            resp = client.post("/predict", json={"wav_data": encode_wav_file(path)})
            assert resp.status_code == 200
            body = resp.json()
            assert body["label"] == offline_label
            for name, score in zip(checkpoint.labels, offline_scores):
                assert body["scores"][name] == pytest.approx(float(score), abs=1e-12)

    def test_repeated_requests_identical(self, client, manifest):
        wav64 = encode_wav_file(manifest.records[3].path)
        first = client.post("/predict", json={"wav_data": wav64}).json()
        for _ in range(3):
            assert client.post("/predict", json={"wav_data": wav64}).json() == first

    def test_all_zero_wav_predicts_silence(self, client):
        # recorded behavior of the converged toy checkpoint: an all-zero clip
        # (every mel energy on the log floor) lands on the silence class
        from kwsforge.audio import AudioClip

        silent = AudioClip(np.zeros(16000, dtype=np.float32))
        resp = client.post(
            "/predict", json={"wav_data": base64.b64encode(wav_bytes(silent)).decode()}
        )
        assert resp.status_code == 200
        assert resp.json()["label"] == "silence"

    def test_short_clip_is_fit_before_inference(self, client, checkpoint):
        # service pipeline is predict(mfcc(fit_to_length(decode(...))))
        rng = np.random.default_rng(0)
        from kwsforge.audio import AudioClip

        short = AudioClip(rng.uniform(-0.3, 0.3, 8000).astype(np.float32))
        resp = client.post(
            "/predict", json={"wav_data": base64.b64encode(wav_bytes(short)).decode()}
        )
        assert resp.status_code == 200
        offline_label, _ = predict(checkpoint.model, mfcc(fit_to_length(short)))
        assert resp.json()["label"] == offline_label


class TestCors:
    def test_cors_headers_present_when_enabled(self, checkpoint):
        client = TestClient(create_app(checkpoint, cors=True))
        resp = client.get("/health", headers={"Origin": "http://example.com"})
        assert resp.headers.get("access-control-allow-origin") == "*"

    def test_cors_absent_by_default(self, client):
        resp = client.get("/health", headers={"Origin": "http://example.com"})
        assert "access-control-allow-origin" not in resp.headers


class TestServeSetup:
    def test_env_var_fallback(self, monkeypatch):
        monkeypatch.setenv("KWS_CHECKPOINT", "/tmp/some.ckpt")
        assert resolve_checkpoint_path(None) == "/tmp/some.ckpt"
        assert resolve_checkpoint_path("explicit.ckpt") == "explicit.ckpt"

    def test_no_checkpoint_anywhere(self, monkeypatch):
        from kwsforge.errors import KwsError

        monkeypatch.delenv("KWS_CHECKPOINT", raising=False)
        with pytest.raises(KwsError):
            resolve_checkpoint_path(None)

    def test_bind_failure(self, toy_checkpoint):
        import socket

        from kwsforge.serving import serve

        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            with pytest.raises(BindFailureError):
                serve(str(toy_checkpoint), "127.0.0.1", port)
        finally:
            blocker.close()
