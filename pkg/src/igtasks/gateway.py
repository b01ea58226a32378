"""Access to text embeddings and entailment scores.

Three concerns live here: a thin HTTP client for the model provider, a
persistent append-only cache so repeated texts never hit the provider twice,
and a deterministic offline fallback used for tests and air-gapped runs.
All embeddings leave this module L2-normalized, so downstream cosine
similarity reduces to a dot product.
"""

from __future__ import annotations

import hashlib
import os
import re
import struct
import threading
from typing import Sequence

import numpy as np

EMBED_DIM = 384

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class ProviderError(RuntimeError):
    """Provider unreachable or returned a malformed response."""


class ContractViolation(RuntimeError):
    """Provider response violates the wire contract (shape or bounds)."""


def _token_seed(token: str) -> int:
    return int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")


def fallback_tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def fallback_embed(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Deterministic offline embedding.

    Each lowercased token is hashed to a seed and expanded to a pseudo-random
    gaussian vector; token vectors are summed and the result normalized.
    Texts sharing tokens share vector components, which gives the similarity
    structure the pipeline needs without any model.
    """
    tokens = fallback_tokens(text)
    if not tokens:
        raise ValueError(f"no tokens in text {text!r}")
    vec = np.zeros(dim)
    for token in tokens:
        rng = np.random.default_rng(_token_seed(token))
        vec += rng.standard_normal(dim)
    return normalize(vec)


def normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec
    return vec / norm


class RecordCache:
    """Append-only file of (sha256 key, length-prefixed payload) records.

    The whole file is loaded into memory on open; writes append under a lock.
    """

    _HEADER = struct.Struct(">32sI")

    def __init__(self, path: str | os.PathLike | None):
        self._path = os.fspath(path) if path is not None else None
        self._data: dict[bytes, bytes] = {}
        self._lock = threading.Lock()
        if self._path is not None and os.path.exists(self._path):
            self._load()

    def _load(self) -> None:
        with open(self._path, "rb") as fh:
            while True:
                header = fh.read(self._HEADER.size)
                if len(header) < self._HEADER.size:
                    break
                key, length = self._HEADER.unpack(header)
                payload = fh.read(length)
                if len(payload) < length:
                    break  # truncated trailing record, drop it
                self._data[key] = payload

    def get(self, key: bytes) -> bytes | None:
        return self._data.get(key)

    def put(self, key: bytes, payload: bytes) -> None:
        with self._lock:
            if key in self._data:
                return
            self._data[key] = payload
            if self._path is not None:
                with open(self._path, "ab") as fh:
                    fh.write(self._HEADER.pack(key, len(payload)))
                    fh.write(payload)

    def __len__(self) -> int:
        return len(self._data)


def _embed_key(text: str) -> bytes:
    return hashlib.sha256(b"embed\x00" + text.encode("utf-8")).digest()


def _nli_key(premise: str, hypothesis: str) -> bytes:
    raw = b"nli\x00" + premise.encode("utf-8") + b"\x00" + hypothesis.encode("utf-8")
    return hashlib.sha256(raw).digest()


class Gateway:
    """Uniform embedding/entailment access with caching.

    mode "fallback" never touches the network; mode "remote" talks to the
    provider at ``url`` using the /embed and /nli wire protocol.
    """

    def __init__(self, mode: str = "fallback", url: str | None = None,
                 cache_path=None, session=None):
        if mode not in ("fallback", "remote"):
            raise ValueError(f"unknown gateway mode {mode!r}")
        if mode == "remote" and not url:
            raise ValueError("remote mode needs a provider url")
        self.mode = mode
        self.url = url.rstrip("/") if url else None
        self.cache = RecordCache(cache_path)
        self._session = session
        self.provider_calls = {"embed": 0, "nli": 0}

    # -- provider transport -------------------------------------------------

    def _post(self, endpoint: str, payload: dict) -> dict:
        if self._session is None:
            import requests

            self._session = requests.Session()
        try:
            resp = self._session.post(self.url + endpoint, json=payload, timeout=120)
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:  # transport, HTTP or decode failure
            raise ProviderError(f"provider call {endpoint} failed: {exc}") from exc

    def _remote_embed(self, texts: list[str]) -> list[np.ndarray]:
        self.provider_calls["embed"] += 1
        body = self._post("/embed", {"texts": texts})
        vectors = body.get("vectors")
        if vectors is None or len(vectors) != len(texts):
            raise ContractViolation("embed response count mismatch")
        out = []
        for text, vec in zip(texts, vectors):
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (EMBED_DIM,):
                raise ContractViolation(
                    f"embedding for {text!r} has dimension {arr.shape}, expected {EMBED_DIM}"
                )
            if not np.all(np.isfinite(arr)):
                raise ContractViolation(f"non-finite embedding for {text!r}")
            out.append(normalize(arr))
        return out

    def _remote_nli(self, premise: str, hypotheses: list[str]) -> list[float]:
        self.provider_calls["nli"] += 1
        body = self._post("/nli", {"premise": premise, "hypotheses": hypotheses})
        probs = body.get("entail_probs")
        if probs is None or len(probs) != len(hypotheses):
            raise ContractViolation("nli response count mismatch")
        out = []
        for p in probs:
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise ContractViolation(f"entailment probability {p} out of [0, 1]")
            out.append(p)
        return out

    # -- public API ---------------------------------------------------------

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Embed texts in order; cached by exact text; unit-normalized."""
        if not texts:
            raise ValueError("empty text list")
        results: dict[int, np.ndarray] = {}
        missing: list[tuple[int, str]] = []
        for i, text in enumerate(texts):
            payload = self.cache.get(_embed_key(text))
            if payload is not None:
                results[i] = np.frombuffer(payload, dtype=np.float32).astype(np.float64)
            else:
                missing.append((i, text))
        if missing:
            unique = list(dict.fromkeys(text for _, text in missing))
            if self.mode == "fallback":
                fresh = {t: fallback_embed(t) for t in unique}
            else:
                fresh = dict(zip(unique, self._remote_embed(unique)))
            for text, vec in fresh.items():
                self.cache.put(_embed_key(text), vec.astype(np.float32).tobytes())
            for i, text in missing:
                results[i] = fresh[text]
        return [results[i] for i in range(len(texts))]

    def entailment(self, premise: str, hypotheses: Sequence[str]) -> list[float]:
        """Entailment probability of each hypothesis given the premise."""
        if not hypotheses:
            raise ValueError("empty hypothesis list")
        results: dict[int, float] = {}
        missing: list[tuple[int, str]] = []
        for i, hyp in enumerate(hypotheses):
            payload = self.cache.get(_nli_key(premise, hyp))
            if payload is not None:
                results[i] = struct.unpack(">d", payload)[0]
            else:
                missing.append((i, hyp))
        if missing:
            unique = list(dict.fromkeys(h for _, h in missing))
            if self.mode == "fallback":
                fresh = {h: self._fallback_entailment(premise, h) for h in unique}
            else:
                fresh = dict(zip(unique, self._remote_nli(premise, unique)))
            for hyp, prob in fresh.items():
                self.cache.put(_nli_key(premise, hyp), struct.pack(">d", prob))
            for i, hyp in missing:
                results[i] = fresh[hyp]
        return [results[i] for i in range(len(hypotheses))]

    @staticmethod
    def _fallback_entailment(premise: str, hypothesis: str) -> float:
        # Cosine of the fallback embeddings rescaled into [0, 1].
        cos = float(fallback_embed(premise) @ fallback_embed(hypothesis))
        return min(1.0, max(0.0, (cos + 1.0) / 2.0))
