"""Clustering of scored tasks per IG, representative selection and triple
serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import RELATION, Triple, triple_to_dict

DEFAULT_THRESHOLD = 0.75
DEFAULT_TOP_K = 100


@dataclass(frozen=True)
class ScoredTask:
    text: str
    vector: np.ndarray  # learned representation
    affinity: float
    support: int = 1


def cluster_tasks(tasks: Sequence[ScoredTask], threshold: float = DEFAULT_THRESHOLD,
                  min_size: int = 1) -> list[list[int]]:
    """Greedy threshold clustering; returns index lists partitioning the input.

    Tasks are visited by affinity (descending, input order on ties); each
    visit opens a cluster around the task and absorbs every unassigned task
    whose cosine to the centroid clears the threshold.  Clusters under
    min_size dissolve into singletons.
    """
    if not -1.0 < threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside (-1, 1]")
    n = len(tasks)
    order = sorted(range(n), key=lambda i: (-tasks[i].affinity, i))
    norms = [float(np.linalg.norm(t.vector)) for t in tasks]
    assigned = [False] * n
    clusters: list[list[int]] = []
    for centroid in order:
        if assigned[centroid]:
            continue
        members = [centroid]
        assigned[centroid] = True
        for j in order:
            if assigned[j]:
                continue
            denom = norms[centroid] * norms[j]
            cos = float(tasks[centroid].vector @ tasks[j].vector) / denom if denom else 0.0
            if cos >= threshold:
                members.append(j)
                assigned[j] = True
        clusters.append(members)
    if min_size > 1:
        final = []
        for members in clusters:
            if len(members) >= min_size:
                final.append(members)
            else:
                final.extend([m] for m in members)
        clusters = final
    return clusters


def select_triples(clusters: Sequence[Sequence[int]], tasks: Sequence[ScoredTask],
                   ig: str, k: int = DEFAULT_TOP_K) -> list[Triple]:
    """One representative (max affinity) per cluster, ranked, truncated to k."""
    reps = []
    for members in clusters:
        rep = min(members, key=lambda i: (-tasks[i].affinity, i))
        support = sum(tasks[i].support for i in members)
        reps.append((rep, support))
    reps.sort(key=lambda rs: (-tasks[rs[0]].affinity, rs[0]))
    triples = []
    for rep, support in reps[:k]:
        task = tasks[rep]
        triples.append(Triple(
            head=f"{ig.lower()} company",
            relation=RELATION,
            tail=task.text,
            ig=ig,
            affinity=task.affinity,
            support_count=support,
        ))
    return triples


def serialize_triples(triples: Sequence[Triple], fmt: str = "jsonl") -> str:
    """Byte-stable JSONL or CSV rendering of a triple list."""
    if fmt == "jsonl":
        lines = [json.dumps(triple_to_dict(t), sort_keys=True) for t in triples]
        return "".join(line + "\n" for line in lines)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["head", "relation", "tail"])
        for t in triples:
            writer.writerow([t.head, t.relation, t.tail])
        return buf.getvalue()
    raise ValueError(f"unknown triple format {fmt!r}")
