"""Embedding and entailment engines behind the HTTP service.

Three engines share one interface:

- "deterministic": no model downloads; embeddings are hash-seeded random
  projections and entailment is a lexical-overlap heuristic.  Used in tests
  and air-gapped environments.
- "transformers": real pretrained checkpoints (sentence encoder + NLI
  cross-encoder), loaded lazily from configurable model identifiers.
- "replay": serves responses recorded from another engine, byte for byte.

Swapping engines never changes the wire contract.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from pathlib import Path

import numpy as np

EMBED_DIM = 384

DEFAULT_ENCODER = "sentence-transformers/all-MiniLM-L6-v2"
DEFAULT_NLI_MODEL = "valhalla/distilbart-mnli-12-3"

_TOKEN_RE = re.compile(r"[^\s]+")


class EngineLoadError(RuntimeError):
    """Raised when a configured model cannot be loaded."""


class DeterministicEngine:
    """Offline engine with stable outputs for any input text."""

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> list[float]:
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            raise ValueError("cannot embed empty text")
        acc = np.zeros(EMBED_DIM)
        for tok in tokens:
            seed = int.from_bytes(hashlib.sha256(tok.encode()).digest()[:8], "big")
            acc += np.random.default_rng(seed).standard_normal(EMBED_DIM)
        norm = np.linalg.norm(acc)
        if norm:
            acc /= norm
        return [float(v) for v in acc]

    def entail(self, premise: str, hypotheses: list[str]) -> list[float]:
        p_tokens = set(_TOKEN_RE.findall(premise.lower()))
        probs = []
        for hyp in hypotheses:
            h_tokens = set(_TOKEN_RE.findall(hyp.lower()))
            union = p_tokens | h_tokens
            overlap = len(p_tokens & h_tokens) / len(union) if union else 0.0
            probs.append(float(overlap))
        return probs


class TransformerEngine:
    """Pretrained checkpoints behind the same interface; loaded on first use."""

    def __init__(self, encoder_name: str = DEFAULT_ENCODER,
                 nli_name: str = DEFAULT_NLI_MODEL):
        self.encoder_name = encoder_name
        self.nli_name = nli_name
        self._encoder = None
        self._nli = None
        self._lock = threading.Lock()

    def _load_encoder(self):
        with self._lock:
            if self._encoder is None:
                try:
                    from sentence_transformers import SentenceTransformer
                    self._encoder = SentenceTransformer(self.encoder_name)
                except Exception as exc:
                    raise EngineLoadError(
                        f"failed to load encoder {self.encoder_name!r}: {exc}")
        return self._encoder

    def _load_nli(self):
        with self._lock:
            if self._nli is None:
                try:
                    from transformers import pipeline
                    self._nli = pipeline("text-classification",
                                         model=self.nli_name, top_k=None)
                except Exception as exc:
                    raise EngineLoadError(
                        f"failed to load NLI model {self.nli_name!r}: {exc}")
        return self._nli

    def embed(self, texts: list[str]) -> list[list[float]]:
        encoder = self._load_encoder()
        vectors = encoder.encode(texts, normalize_embeddings=True)
        return [[float(v) for v in vec] for vec in vectors]

    def entail(self, premise: str, hypotheses: list[str]) -> list[float]:
        nli = self._load_nli()
        probs = []
        for hyp in hypotheses:
            scores = nli({"text": premise, "text_pair": hyp})
            by_label = {s["label"].lower(): s["score"] for s in scores}
            entail = by_label.get("entailment", 0.0)
            contradict = by_label.get("contradiction", 0.0)
            denom = entail + contradict
            probs.append(float(entail / denom) if denom else 0.5)
        return probs


def request_key(endpoint: str, payload: dict) -> str:
    blob = endpoint + "\n" + json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


class Recorder:
    """Append-through store of response bodies keyed by request hash.

    The file is a JSON object mapping request key to the exact serialized
    response body, so replayed responses are byte-identical.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: dict[str, str] = {}
        if self.path.exists():
            self.records = json.loads(self.path.read_text("utf-8"))

    def get(self, key: str) -> str | None:
        return self.records.get(key)

    def put(self, key: str, body: str) -> None:
        with self._lock:
            self.records[key] = body
            self.path.write_text(
                json.dumps(self.records, sort_keys=True), "utf-8")


class ReplayEngine:
    """Marker engine: the service layer serves recorded bodies directly and
    treats a cache miss as an unloadable model."""

    def __init__(self, recorder: Recorder):
        self.recorder = recorder

    def embed(self, texts):
        raise EngineLoadError("replay engine has no recording for this request")

    def entail(self, premise, hypotheses):
        raise EngineLoadError("replay engine has no recording for this request")
