"""FastAPI app exposing the provider wire protocol.

POST /embed {"texts": [...]}              -> {"vectors": [[384 floats], ...]}
POST /nli   {"premise": ..., "hypotheses": [...]} -> {"entail_probs": [...]}

Vectors are unit-normalized server-side; entailment probabilities are the
entail share renormalized over {entail, contradict}.  Model load failures
surface as 503 with a diagnostic body.  When a record path is configured,
responses are recorded (or, with the replay engine, served back byte for
byte) so a fixed model version yields byte-identical responses across
restarts.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engines import (DeterministicEngine, EngineLoadError, Recorder,
                      ReplayEngine, TransformerEngine, request_key,
                      DEFAULT_ENCODER, DEFAULT_NLI_MODEL)


@dataclass
class ProviderConfig:
    engine: str = "deterministic"  # deterministic | transformers | replay
    encoder_name: str = DEFAULT_ENCODER
    nli_name: str = DEFAULT_NLI_MODEL
    record_path: str | None = None


class EmbedRequest(BaseModel):
    texts: list[str]


class NliRequest(BaseModel):
    premise: str
    hypotheses: list[str]


def build_engine(config: ProviderConfig):
    if config.engine == "deterministic":
        return DeterministicEngine()
    if config.engine == "transformers":
        return TransformerEngine(config.encoder_name, config.nli_name)
    if config.engine == "replay":
        if not config.record_path:
            raise ValueError("replay engine requires a record path")
        return ReplayEngine(Recorder(config.record_path))
    raise ValueError(f"unknown engine {config.engine!r}")


def create_app(config: ProviderConfig | None = None) -> FastAPI:
    config = config or ProviderConfig()
    engine = build_engine(config)
    recorder = None
    if config.record_path and config.engine != "replay":
        recorder = Recorder(config.record_path)
    elif isinstance(engine, ReplayEngine):
        recorder = engine.recorder

    app = FastAPI(title="capability-provider")

    def respond(endpoint: str, payload: dict, compute) -> Response:
        key = request_key(endpoint, payload)
        if recorder is not None:
            body = recorder.get(key)
            if body is not None:
                return Response(content=body, media_type="application/json")
        try:
            result = compute()
        except EngineLoadError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        response = JSONResponse(content=result)
        if recorder is not None:
            recorder.put(key, response.body.decode("utf-8"))
        return response

    @app.post("/embed")
    def embed(req: EmbedRequest) -> Response:
        if not req.texts:
            raise HTTPException(status_code=400, detail="empty text list")
        if any(not t.strip() for t in req.texts):
            raise HTTPException(status_code=400, detail="blank text in batch")
        payload = {"texts": req.texts}
        return respond("/embed", payload,
                       lambda: {"vectors": engine.embed(req.texts)})

    @app.post("/nli")
    def nli(req: NliRequest) -> Response:
        if not req.hypotheses:
            raise HTTPException(status_code=400, detail="empty hypothesis list")
        if not req.premise.strip():
            raise HTTPException(status_code=400, detail="blank premise")
        payload = {"premise": req.premise, "hypotheses": req.hypotheses}
        return respond("/nli", payload,
                       lambda: {"entail_probs": engine.entail(req.premise,
                                                              req.hypotheses)})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"engine": config.engine}

    return app
