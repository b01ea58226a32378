"""Task-IG classification: keyword lookup, cosine ranking, zero-shot NLI,
and the ensemble rule that combines them at task and sentence level."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .gateway import Gateway
from .model import OTHERS, TaskRecord
from .registry import IGRegistry

DEFAULT_CONF_THRESHOLD = 0.95

_WORD_RE = re.compile(r"[a-z0-9]+")


class Branch(Enum):
    KS_EQ_CS = "ks_eq_cs"
    ZS_CONF = "zs_conf"
    ZS_EQ_KS = "zs_eq_ks"
    OTHERS = "others"


@dataclass(frozen=True)
class CosineTop3:
    first: tuple[str, float]
    second: tuple[str, float]
    third: tuple[str, float]

    @property
    def names(self) -> tuple[str, str, str]:
        return (self.first[0], self.second[0], self.third[0])


@dataclass(frozen=True)
class EnsembleDecision:
    label: str
    g_ks: str | None
    top3: CosineTop3
    g_zs: str | None
    conf: float | None
    branch: Branch


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def _contains_seq(words: Sequence[str], needle: Sequence[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(words):
        return False
    needle = list(needle)
    return any(list(words[i:i + n]) == needle for i in range(len(words) - n + 1))


def keywords_lookup(text: str, registry: IGRegistry,
                    lemmas: Sequence[str] | None = None) -> str | None:
    """IG whose keywords occur most often in the text (surfaces or lemmas).

    Keywords match case-insensitively at word boundaries; multiword keywords
    match as contiguous word sequences.  Ties break by registry order; no
    keyword hit at all returns None.
    """
    surface_words = _words(text)
    lemma_words = _words(" ".join(lemmas)) if lemmas else []
    best: str | None = None
    best_hits = 0
    for profile in registry:
        hits = 0
        for kw in profile.keywords:
            kw_words = _words(kw)
            if _contains_seq(surface_words, kw_words) or _contains_seq(lemma_words, kw_words):
                hits += 1
        if hits > best_hits:
            best, best_hits = profile.name, hits
    return best


def cosine_top3(text: str, registry: IGRegistry, gateway: Gateway) -> CosineTop3:
    """Three IGs whose hypothesis embeddings are most similar to the text."""
    hypotheses = [p.hypothesis for p in registry]
    text_vec = gateway.embed([text])[0]
    hyp_vecs = gateway.embed(hypotheses)
    scored = [(float(text_vec @ hv), i, p.name)
              for i, (p, hv) in enumerate(zip(registry, hyp_vecs))]
    scored.sort(key=lambda s: (-s[0], s[1]))
    (s1, _, n1), (s2, _, n2), (s3, _, n3) = scored[:3]
    return CosineTop3(first=(n1, s1), second=(n2, s2), third=(n3, s3))


def zero_shot_tc(text: str, candidates: Sequence[str], registry: IGRegistry,
                 gateway: Gateway) -> tuple[str, float]:
    """Zero-shot pick among candidate IGs via entailment of their hypotheses."""
    if len(set(candidates)) != len(candidates):
        raise ValueError("candidates must be distinct")
    hypotheses = [registry.profile(name).hypothesis for name in candidates]
    probs = gateway.entailment(text, hypotheses)
    best_i = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best_i]:
            best_i = i
    return candidates[best_i], probs[best_i]


def classify_ensemble(text: str, registry: IGRegistry, gateway: Gateway,
                      lemmas: Sequence[str] | None = None,
                      conf_threshold: float = DEFAULT_CONF_THRESHOLD) -> EnsembleDecision:
    """Combine the three classifiers.

    Keyword and cosine agreement wins outright; otherwise zero-shot over the
    cosine top-3 decides, accepted on high confidence or on agreement with
    the keyword label, else the task is unassignable (Others).  A missing
    keyword label never equals any IG.
    """
    g_ks = keywords_lookup(text, registry, lemmas=lemmas)
    top3 = cosine_top3(text, registry, gateway)
    if g_ks is not None and g_ks == top3.first[0]:
        return EnsembleDecision(label=g_ks, g_ks=g_ks, top3=top3,
                                g_zs=None, conf=None, branch=Branch.KS_EQ_CS)
    g_zs, conf = zero_shot_tc(text, top3.names, registry, gateway)
    if conf > conf_threshold:
        branch = Branch.ZS_CONF
        label = g_zs
    elif g_ks is not None and g_zs == g_ks:
        branch = Branch.ZS_EQ_KS
        label = g_zs
    else:
        branch = Branch.OTHERS
        label = OTHERS
    return EnsembleDecision(label=label, g_ks=g_ks, top3=top3,
                            g_zs=g_zs, conf=conf, branch=branch)


def label_record(record: TaskRecord, registry: IGRegistry, gateway: Gateway,
                 conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                 ) -> tuple[EnsembleDecision, EnsembleDecision, tuple[str, ...]]:
    """Classify the task phrase and its whole sentence.

    Returns (task_level, sentence_level, excluded_igs) where excluded_igs are
    the task-level cosine top-3 names, later kept out of negative sampling.
    """
    task_lemmas = [t.lemma for t in record.task_tokens]
    sent_lemmas = [t.lemma for t in record.tokens]
    task_dec = classify_ensemble(record.task_text, registry, gateway,
                                 lemmas=task_lemmas, conf_threshold=conf_threshold)
    sent_dec = classify_ensemble(record.sentence_text, registry, gateway,
                                 lemmas=sent_lemmas, conf_threshold=conf_threshold)
    return task_dec, sent_dec, task_dec.top3.names


def decision_to_dict(dec: EnsembleDecision) -> dict:
    return {
        "label": dec.label,
        "g_ks": dec.g_ks,
        "top3": [list(dec.top3.first), list(dec.top3.second), list(dec.top3.third)],
        "g_zs": dec.g_zs,
        "conf": dec.conf,
        "branch": dec.branch.value,
    }
