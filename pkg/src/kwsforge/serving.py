"""REST inference service: base64 WAV in, predicted label and scores out.

Endpoints: POST /predict, GET /health, GET /model. The loaded model is
immutable and shared across requests; inference here is the exact same code
path as offline prediction, so responses match the CLI bit for bit.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import socket

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .audio import fit_to_length, read_wav_bytes
from .errors import BindFailureError, KwsError, MalformedWavError, UnsupportedFormatError
from .features import mfcc
from .models import Checkpoint, load_checkpoint, predict

MAX_BODY_BYTES = 1 << 20  # a one-second 16-bit 16 kHz WAV is ~32 KiB

CHECKPOINT_ENV_VAR = "KWS_CHECKPOINT"


def resolve_checkpoint_path(explicit: str | None) -> str:
    path = explicit or os.environ.get(CHECKPOINT_ENV_VAR)
    if not path:
        raise KwsError(
            f"no checkpoint given and {CHECKPOINT_ENV_VAR} is not set"
        )
    return path


def _error(status: int, code: str, detail: str = "") -> JSONResponse:
    body = {"error": code}
    if detail:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def create_app(checkpoint: Checkpoint, cors: bool = False) -> FastAPI:
    app = FastAPI(title="kwsforge", docs_url=None, redoc_url=None)
    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    model = checkpoint.model
    labels = list(checkpoint.labels)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/model")
    def model_info():
        return {
            "name": model.spec.name,
            "n_labels": model.spec.n_labels,
            "labels": labels,
        }

    @app.post("/predict")
    async def handle_predict(request: Request):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > MAX_BODY_BYTES:
            return _error(413, "payload_too_large")
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return _error(413, "payload_too_large")
        try:
            payload = json.loads(body)
        except ValueError:
            return _error(400, "bad_request", "body is not valid JSON")
        if not isinstance(payload, dict) or not isinstance(payload.get("wav_data"), str):
            return _error(400, "bad_request", "missing string field 'wav_data'")
        try:
            wav = base64.b64decode(payload["wav_data"], validate=True)
        except (binascii.Error, ValueError):
            return _error(400, "bad_base64", "wav_data is not valid base64")
        try:
            clip = fit_to_length(read_wav_bytes(wav))
        except (MalformedWavError, UnsupportedFormatError, ValueError) as e:
            return _error(400, "bad_wav", str(e))
        label, scores = predict(model, mfcc(clip))
        return {
            "label": label,
            "scores": {name: float(s) for name, s in zip(labels, scores)},
        }

    return app


def serve(
    checkpoint_path: str | None,
    bind_address: str = "127.0.0.1",
    port: int = 8000,
    cors: bool = False,
) -> None:
    """Load the checkpoint and block serving HTTP until interrupted."""
    import uvicorn

    ckpt = load_checkpoint(resolve_checkpoint_path(checkpoint_path))
    # fail fast with a clear error instead of uvicorn's late loop error
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((bind_address, port))
    except OSError as e:
        raise BindFailureError(f"cannot bind {bind_address}:{port}: {e}") from e
    finally:
        probe.close()

    app = create_app(ckpt, cors=cors)
    uvicorn.run(app, host=bind_address, port=port, log_level="warning")
