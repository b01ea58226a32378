"""Evaluation harness: annotation sheets, precision at k, Welch's t-test and
the ConceptNet organization-capability census."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

DEFAULT_SEED_CONCEPTS = ("organization", "company", "business", "institution", "firm")

SHEET_COLUMNS = ["method", "ig", "rank", "task", "verdict"]


class SheetError(ValueError):
    pass


def annotation_sheet(rankings: Mapping[str, Mapping[str, Sequence[tuple[str, float]]]],
                     k: int = 100) -> str:
    """CSV sheet for manual verification: one row per (method, ig, rank <= k).

    ``rankings`` maps method name -> ig -> ranked (task, score) list.  The
    verdict column is left blank for annotators; IGs without any ranked task
    are noted in a footer comment.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SHEET_COLUMNS)
    empty: list[tuple[str, str]] = []
    for method in rankings:
        per_ig = rankings[method]
        for ig in per_ig:
            entries = per_ig[ig][:k]
            if not entries:
                empty.append((method, ig))
                continue
            for rank, (task, _score) in enumerate(entries, start=1):
                writer.writerow([method, ig, rank, task, ""])
    for method, ig in empty:
        buf.write(f"# empty ranking: {method}/{ig}\n")
    return buf.getvalue()


@dataclass
class PrecisionResult:
    per_ig: dict[str, float] = field(default_factory=dict)
    micro: float = 0.0
    macro: float = 0.0


def precision_at_k(sheet_text: str, method: str | None = None) -> PrecisionResult:
    """Per-IG, micro and macro precision from a filled annotation sheet."""
    reader = csv.reader(io.StringIO(sheet_text))
    header = next(reader)
    if header != SHEET_COLUMNS:
        raise SheetError(f"unexpected sheet header {header}")
    counts: dict[str, list[int]] = {}
    bad_rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or row[0].startswith("#"):
            continue
        row_method, ig, _rank, _task, verdict = row
        if method is not None and row_method != method:
            continue
        if verdict not in ("correct", "incorrect"):
            bad_rows.append(lineno)
            continue
        correct, total = counts.setdefault(ig, [0, 0])
        counts[ig] = [correct + (verdict == "correct"), total + 1]
    if bad_rows:
        raise SheetError(f"blank or invalid verdicts on rows {bad_rows}")
    result = PrecisionResult()
    total_correct = total_rows = 0
    for ig, (correct, total) in counts.items():
        result.per_ig[ig] = correct / total
        total_correct += correct
        total_rows += total
    if total_rows:
        result.micro = total_correct / total_rows
        result.macro = sum(result.per_ig.values()) / len(result.per_ig)
    return result


def two_sample_ttest(samples_a: Sequence[float], samples_b: Sequence[float],
                     ) -> tuple[float, float, bool]:
    """Welch's unequal-variance two-sample t-test, two-tailed.

    Returns (t, p, degenerate); both samples constant and equal yields the
    degenerate (0, 1.0, True) result.
    """
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if len(a) != len(b) or len(a) < 2:
        raise ValueError("samples must have equal length >= 2")
    if a.var(ddof=1) == 0.0 and b.var(ddof=1) == 0.0:
        if a.mean() == b.mean():
            return 0.0, 1.0, True
        return (np.inf if a.mean() > b.mean() else -np.inf), 0.0, True
    t, p = stats.ttest_ind(a, b, equal_var=False)
    return float(t), float(p), False


@dataclass
class CensusResult:
    organizations: set[str]
    candidates: list[tuple[str, str]]  # (head, tail) of CapableOf rows
    skipped: int = 0
    per_ig_counts: dict[str, int] = field(default_factory=dict)


def conceptnet_capableof_census(rows: Iterable[Sequence[str]],
                                seed_concepts: Iterable[str] = DEFAULT_SEED_CONCEPTS,
                                ig_labels: Mapping[tuple[str, str], str] | None = None,
                                ) -> CensusResult:
    """Organization-headed CapableOf triples from a (relation, head, tail) dump.

    The organization set starts from IsA edges into the seed concepts and is
    closed under Synonym edges (treated as undirected).  An optional
    human-verified label map tallies per-IG counts.
    """
    seeds = set(seed_concepts)
    isa_heads: list[tuple[str, str]] = []
    synonyms: dict[str, set[str]] = {}
    capableof: list[tuple[str, str]] = []
    skipped = 0
    for row in rows:
        if len(row) < 3 or not all(row[:3]):
            skipped += 1
            continue
        relation, head, tail = row[0], row[1], row[2]
        if relation == "IsA":
            isa_heads.append((head, tail))
        elif relation == "Synonym":
            synonyms.setdefault(head, set()).add(tail)
            synonyms.setdefault(tail, set()).add(head)
        elif relation == "CapableOf":
            capableof.append((head, tail))
        # other relations are irrelevant to the census
    orgs = {head for head, tail in isa_heads if tail in seeds}
    frontier = list(orgs)
    while frontier:
        concept = frontier.pop()
        for other in synonyms.get(concept, ()):
            if other not in orgs:
                orgs.add(other)
                frontier.append(other)
    candidates = [(head, tail) for head, tail in capableof if head in orgs]
    result = CensusResult(organizations=orgs, candidates=candidates, skipped=skipped)
    if ig_labels is not None:
        for cand in candidates:
            ig = ig_labels.get(cand)
            if ig:
                result.per_ig_counts[ig] = result.per_ig_counts.get(ig, 0) + 1
    return result


def parse_conceptnet_dump(lines: Iterable[str]) -> Iterable[list[str]]:
    """Tab-separated (relation, head, tail) lines to row lists."""
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        yield line.split("\t")
