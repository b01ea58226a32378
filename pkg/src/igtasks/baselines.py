"""Association-rule and TF-IDF affinity baselines.

Both consume canonical tasks with their IG labels.  ARM treats each task as a
transaction of its content words plus the IG item and mines IG-consequent
rules with classic levelwise apriori; TF-IDF scores words against per-IG
pseudo-documents.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from typing import Iterable, Sequence

_WORD_RE = re.compile(r"[a-z0-9]+")


def load_stopwords(path=None) -> frozenset[str]:
    if path is None:
        text = resources.files("igtasks.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def task_words(text: str, stopwords: frozenset[str]) -> list[str]:
    """Lowercased content words of a task, duplicates removed, order kept."""
    seen = []
    for w in _WORD_RE.findall(text.lower()):
        if w not in stopwords and w not in seen:
            seen.append(w)
    return seen


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset[str]
    consequent: str
    support: float
    confidence: float


@dataclass
class IGTermStats:
    tf: dict[tuple[str, str], int]
    df: dict[str, int]
    n_igs: int


def _frequent_itemsets(transactions: Sequence[frozenset[str]],
                       min_support: float) -> dict[frozenset[str], float]:
    """Levelwise apriori over the transaction list; returns itemset -> support."""
    n = len(transactions)
    counts: dict[frozenset[str], int] = {}
    for t in transactions:
        for item in t:
            key = frozenset([item])
            counts[key] = counts.get(key, 0) + 1
    frequent = {s: c / n for s, c in counts.items() if c / n >= min_support}
    result = dict(frequent)
    k = 2
    current = list(frequent)
    while current:
        # Join step: unions of two (k-1)-sets yielding k-sets, pruned by
        # anti-monotonicity before counting.
        candidates = set()
        for a, b in combinations(current, 2):
            union = a | b
            if len(union) != k:
                continue
            if all(frozenset(sub) in result for sub in combinations(union, k - 1)):
                candidates.add(union)
        if not candidates:
            break
        counts = {c: 0 for c in candidates}
        for t in transactions:
            for c in candidates:
                if c <= t:
                    counts[c] += 1
        level = {s: c / n for s, c in counts.items() if c / n >= min_support}
        if not level:
            break
        result.update(level)
        current = list(level)
        k += 1
    return result


def mine_rules(task_word_sets: Sequence[Sequence[str]], igs: Sequence[str],
               ig_names: Iterable[str], min_support: float = 0.0005,
               min_confidence: float = 0.2) -> list[AssociationRule]:
    """Mine IG-consequent association rules from (task words, IG) pairs."""
    if min_support <= 0:
        raise ValueError("min_support must be positive")
    ig_set = set(ig_names)
    transactions = [frozenset(words) | {ig} for words, ig in zip(task_word_sets, igs)]
    supports = _frequent_itemsets(transactions, min_support)
    rules = []
    for itemset, support in supports.items():
        for ig in itemset & ig_set:
            antecedent = itemset - {ig}
            if not antecedent or antecedent & ig_set:
                continue
            ant_support = supports.get(antecedent)
            if ant_support is None:
                continue
            confidence = support / ant_support
            if confidence >= min_confidence:
                rules.append(AssociationRule(
                    antecedent=antecedent, consequent=ig,
                    support=support, confidence=confidence))
    rules.sort(key=lambda r: (r.consequent, -r.confidence, -r.support,
                              sorted(r.antecedent)))
    return rules


def arm_rank(tasks: Sequence[str], igs: Sequence[str],
             rules: Sequence[AssociationRule], k: int = 100,
             stopwords: frozenset[str] | None = None,
             ) -> dict[str, list[tuple[str, float]]]:
    """Per-IG top-k tasks by summed confidence of matching rules."""
    if stopwords is None:
        stopwords = load_stopwords()
    by_ig: dict[str, list[AssociationRule]] = {}
    for rule in rules:
        by_ig.setdefault(rule.consequent, []).append(rule)
    scored: dict[str, list[tuple[str, float]]] = {}
    for task, ig in zip(tasks, igs):
        words = set(task_words(task, stopwords))
        score = sum(r.confidence for r in by_ig.get(ig, ()) if r.antecedent <= words)
        if score > 0:
            scored.setdefault(ig, []).append((task, score))
    ranked = {}
    for ig, entries in scored.items():
        order = sorted(range(len(entries)), key=lambda i: (-entries[i][1], i))
        ranked[ig] = [entries[i] for i in order[:k]]
    return ranked


def build_term_stats(tasks: Sequence[str], igs: Sequence[str],
                     stopwords: frozenset[str] | None = None,
                     n_igs: int = 24) -> IGTermStats:
    if stopwords is None:
        stopwords = load_stopwords()
    tf: dict[tuple[str, str], int] = {}
    pseudo_vocab: dict[str, set[str]] = {}
    for task, ig in zip(tasks, igs):
        for w in _WORD_RE.findall(task.lower()):
            if w in stopwords:
                continue
            tf[(ig, w)] = tf.get((ig, w), 0) + 1
            pseudo_vocab.setdefault(w, set()).add(ig)
    df = {w: len(igset) for w, igset in pseudo_vocab.items()}
    return IGTermStats(tf=tf, df=df, n_igs=n_igs)


def tfidf_word_score(stats: IGTermStats, ig: str, word: str) -> float:
    tf = stats.tf.get((ig, word), 0)
    df = stats.df.get(word)
    if tf == 0 or not df:
        return 0.0
    return tf * math.log(stats.n_igs / df)


def tfidf_rank(tasks: Sequence[str], igs: Sequence[str], k: int = 100,
               stopwords: frozenset[str] | None = None,
               n_igs: int = 24) -> dict[str, list[tuple[str, float]]]:
    """Per-IG top-k tasks by mean TF-IDF score of their content words."""
    if stopwords is None:
        stopwords = load_stopwords()
    stats = build_term_stats(tasks, igs, stopwords=stopwords, n_igs=n_igs)
    scored: dict[str, list[tuple[str, float]]] = {}
    for task, ig in zip(tasks, igs):
        words = [w for w in _WORD_RE.findall(task.lower()) if w not in stopwords]
        if not words:
            continue
        score = sum(tfidf_word_score(stats, ig, w) for w in words) / len(words)
        scored.setdefault(ig, []).append((task, score))
    ranked = {}
    for ig, entries in scored.items():
        order = sorted(range(len(entries)), key=lambda i: (-entries[i][1], i))
        ranked[ig] = [entries[i] for i in order[:k]]
    return ranked
