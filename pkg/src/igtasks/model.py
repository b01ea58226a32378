"""Shared domain types for the task-IG pipeline, plus corpus validation.

The corpus file format is JSONL: one object per line with doc_id,
sentence_id, sentence_text, tokens and tasks.  Each entry in ``tasks``
yields one TaskRecord.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

OTHERS = "Others"
RELATION = "is capable of"

ENTITY_TAGS = ("NONE", "GPE", "MONEY", "DATE", "TIME", "ORG", "OTHER")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class TokenAnnotation:
    surface: str
    lemma: str
    pos: str
    dep: str
    head_index: int
    entity: str = "NONE"

    def validate(self, n_tokens: int) -> None:
        if not self.surface:
            raise CorpusError("empty surface")
        if not self.lemma:
            raise CorpusError("empty lemma")
        if not 0 <= self.head_index < n_tokens:
            raise CorpusError(f"head_index {self.head_index} out of bounds")
        if self.entity not in ENTITY_TAGS:
            raise CorpusError(f"unknown entity tag {self.entity!r}")


@dataclass(frozen=True)
class TaskRecord:
    doc_id: str
    sentence_id: str
    sentence_text: str
    task_span: tuple[int, int]  # half-open token index range
    tokens: tuple[TokenAnnotation, ...]
    head_token: int
    agent_is_org: bool = False

    def validate(self) -> None:
        start, end = self.task_span
        if not self.tokens:
            raise CorpusError("no tokens")
        for tok in self.tokens:
            tok.validate(len(self.tokens))
        if not (0 <= start < end <= len(self.tokens)):
            raise CorpusError("task span outside tokens")
        if not (start <= self.head_token < end):
            raise CorpusError("head outside span")

    @property
    def task_tokens(self) -> tuple[TokenAnnotation, ...]:
        start, end = self.task_span
        return self.tokens[start:end]

    @property
    def task_text(self) -> str:
        return " ".join(t.surface for t in self.task_tokens)

    @property
    def key(self) -> str:
        start, end = self.task_span
        return f"{self.doc_id}/{self.sentence_id}/{start}:{end}"


@dataclass(frozen=True)
class LabeledTask:
    record: TaskRecord
    task_level: str
    sentence_level: str
    canonical: str
    excluded_igs: tuple[str, ...] = ()


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: str
    ig: str
    affinity: float
    support_count: int

    def validate(self) -> None:
        if self.relation != RELATION:
            raise ValueError(f"relation must be {RELATION!r}")
        if not -1.0 - 1e-9 <= self.affinity <= 1.0 + 1e-9:
            raise ValueError("affinity out of [-1, 1]")
        if self.support_count < 1:
            raise ValueError("support_count must be >= 1")


@dataclass
class ValidationReport:
    accepted: int = 0
    rejected: int = 0
    rejections: list[tuple[str, str]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.accepted + self.rejected


def token_from_dict(d: dict) -> TokenAnnotation:
    return TokenAnnotation(
        surface=d["surface"],
        lemma=d["lemma"],
        pos=d["pos"],
        dep=d["dep"],
        head_index=int(d["head"]),
        entity=d.get("entity", "NONE"),
    )


def token_to_dict(t: TokenAnnotation) -> dict:
    return {
        "surface": t.surface,
        "lemma": t.lemma,
        "pos": t.pos,
        "dep": t.dep,
        "head": t.head_index,
        "entity": t.entity,
    }


def records_from_line(line: str) -> Iterator[TaskRecord]:
    """Expand one corpus JSONL line into its TaskRecords (one per task entry)."""
    obj = json.loads(line)
    tokens = tuple(token_from_dict(t) for t in obj["tokens"])
    for task in obj["tasks"]:
        span = task["span"]
        yield TaskRecord(
            doc_id=obj["doc_id"],
            sentence_id=obj["sentence_id"],
            sentence_text=obj["sentence_text"],
            task_span=(int(span[0]), int(span[1])),
            tokens=tokens,
            head_token=int(task["head"]),
            agent_is_org=bool(task.get("agent_is_org", False)),
        )


def record_to_line(record: TaskRecord) -> str:
    """Serialize a single TaskRecord as a one-task corpus line."""
    obj = {
        "doc_id": record.doc_id,
        "sentence_id": record.sentence_id,
        "sentence_text": record.sentence_text,
        "tokens": [token_to_dict(t) for t in record.tokens],
        "tasks": [
            {
                "span": list(record.task_span),
                "head": record.head_token,
                "agent_is_org": record.agent_is_org,
            }
        ],
    }
    return json.dumps(obj, sort_keys=True)


def read_corpus(path) -> Iterator[TaskRecord]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield from records_from_line(line)


def validate_corpus(records: Iterable[TaskRecord]) -> tuple[list[TaskRecord], ValidationReport]:
    """Split a record stream into valid records and a rejection report.

    Malformed records are reported with a reason; the stream is never aborted.
    """
    report = ValidationReport()
    accepted: list[TaskRecord] = []
    for record in records:
        try:
            record.validate()
        except CorpusError as exc:
            report.rejected += 1
            report.rejections.append((record.key, str(exc)))
        else:
            report.accepted += 1
            accepted.append(record)
    return accepted, report


def labeled_to_dict(lt: LabeledTask) -> dict:
    return {
        "record": json.loads(record_to_line(lt.record)),
        "task_level": lt.task_level,
        "sentence_level": lt.sentence_level,
        "canonical": lt.canonical,
        "excluded_igs": list(lt.excluded_igs),
    }


def labeled_from_dict(d: dict) -> LabeledTask:
    (record,) = list(records_from_line(json.dumps(d["record"])))
    return LabeledTask(
        record=record,
        task_level=d["task_level"],
        sentence_level=d["sentence_level"],
        canonical=d["canonical"],
        excluded_igs=tuple(d["excluded_igs"]),
    )


def triple_to_dict(t: Triple) -> dict:
    return {
        "head": t.head,
        "relation": t.relation,
        "tail": t.tail,
        "ig": t.ig,
        "affinity": t.affinity,
        "support_count": t.support_count,
    }


def triple_from_dict(d: dict) -> Triple:
    return Triple(
        head=d["head"],
        relation=d["relation"],
        tail=d["tail"],
        ig=d["ig"],
        affinity=float(d["affinity"]),
        support_count=int(d["support_count"]),
    )
