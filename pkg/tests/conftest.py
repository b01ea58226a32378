import numpy as np
import pytest

from igtasks.model import TaskRecord, TokenAnnotation
from igtasks.registry import load_registry


def make_token(surface, pos="NOUN", dep="obj", head=0, entity="NONE", lemma=None):
    return TokenAnnotation(surface=surface, lemma=lemma or surface.lower(),
                           pos=pos, dep=dep, head_index=head, entity=entity)


def make_record(tokens, span=None, head=None, doc_id="d1", sentence_id="s1",
                agent_is_org=False, sentence_text=None):
    if span is None:
        span = (0, len(tokens))
    if head is None:
        head = span[0]
    if sentence_text is None:
        sentence_text = " ".join(t.surface for t in tokens)
    return TaskRecord(
        doc_id=doc_id, sentence_id=sentence_id, sentence_text=sentence_text,
        task_span=span, tokens=tuple(tokens), head_token=head,
        agent_is_org=agent_is_org)


def simple_record(text, **kwargs):
    """Record with trivial annotations: every word a NOUN headed by token 0."""
    tokens = [make_token(w) for w in text.split()]
    return make_record(tokens, **kwargs)


class StubGateway:
    """Gateway test double with scripted embeddings and entailment scores."""

    def __init__(self, vectors=None, entail=None, dim=24):
        self.vectors = dict(vectors or {})
        self.entail = dict(entail or {})  # (premise, hypothesis) -> prob
        self.dim = dim
        self.nli_calls = 0
        self.embed_calls = 0

    def set_basis(self, text, axis):
        vec = np.zeros(self.dim)
        vec[axis] = 1.0
        self.vectors[text] = vec

    def embed(self, texts):
        if not texts:
            raise ValueError("empty text list")
        self.embed_calls += 1
        out = []
        for t in texts:
            if t not in self.vectors:
                self.vectors[t] = np.zeros(self.dim)
            out.append(np.asarray(self.vectors[t], dtype=float))
        return out

    def entailment(self, premise, hypotheses):
        if not hypotheses:
            raise ValueError("empty hypothesis list")
        self.nli_calls += 1
        return [float(self.entail.get((premise, h), 0.0)) for h in hypotheses]


@pytest.fixture(scope="session")
def registry():
    return load_registry()
