"""Rule-based corpus annotation: raw sentences plus task spans to the
pipeline's JSONL corpus format.

Input directory layout: for every ``<stem>.txt`` (one sentence per line)
a sibling ``<stem>.spans.tsv`` lists task spans as tab-separated
``line_index<TAB>start<TAB>end`` token offsets (half-open, over whitespace
tokens with punctuation split off).  Sentences whose spans do not parse are
skipped with a log line; annotation quality is heuristic by design, but the
emitted records always satisfy the corpus schema.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

log = logging.getLogger("capability_provider.annotate")

DETERMINERS = {"the", "a", "an", "this", "that", "these", "those"}
PREPOSITIONS = {"in", "on", "at", "for", "from", "by", "with", "of", "near",
                "into", "over", "under", "across", "through", "against", "to"}
CONJUNCTIONS = {"and", "or", "but"}
PRONOUNS = {"they", "it", "he", "she", "we", "i", "you", "them", "its"}
AUXILIARIES = {"is", "are", "was", "were", "be", "been", "being", "will",
               "would", "can", "could", "may", "might", "has", "have", "had",
               "does", "do", "did", "plans", "plan", "wants", "want",
               "intends", "intend", "agreed", "expects", "expect", "aims"}
ORG_SUFFIXES = {"inc", "corp", "co", "ltd", "llc", "plc", "bank", "group",
                "company", "airlines", "industries", "partners", "holdings",
                "systems", "energy", "motors", "labs", "foods", "stores"}

_PUNCT_RE = re.compile(r"^\W+$")


def _split_token(chunk: str) -> list[str]:
    out = [chunk]
    while len(out[-1]) > 1 and out[-1][-1] in ".,;:!?\"')":
        last = out.pop()
        out.extend([last[:-1], last[-1]])
    while len(out[0]) > 1 and out[0][0] in "\"'(":
        first = out.pop(0)
        out[0:0] = [first[0], first[1:]]
    return out


def tokenize_sentence(sentence: str) -> list[str]:
    tokens: list[str] = []
    for chunk in sentence.split():
        tokens.extend(_split_token(chunk))
    return tokens


def _verb_lemma(surface: str) -> str:
    w = surface.lower()
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("sses") or w.endswith("ches") or w.endswith("shes"):
        return w[:-2]
    if w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        return w[:-1]
    if w.endswith("ed") and len(w) > 4:
        base = w[:-2]
        return base + "e" if base[-1] in "cgsuv" else base
    return w


def _subject_run(tokens: list[str], root: int) -> list[int]:
    run = []
    for i in range(min(root, len(tokens))):
        if tokens[i][:1].isupper() and not _PUNCT_RE.match(tokens[i]):
            run.append(i)
        elif run:
            break
    return run


def _find_root(tokens: list[str], span_start: int) -> int:
    for i, tok in enumerate(tokens[:span_start]):
        if tok.lower() in AUXILIARIES:
            return i
    return max(span_start - 1, 0) if span_start else 0


def annotate_sentence(sentence: str, span: tuple[int, int],
                      doc_id: str, sentence_id: str) -> dict:
    tokens = tokenize_sentence(sentence)
    start, end = span
    if not tokens or not 0 <= start < end <= len(tokens):
        raise ValueError(f"span {span} outside sentence of {len(tokens)} tokens")
    root = _find_root(tokens, start)
    subject = _subject_run(tokens, root)
    org_subject = bool(subject) and (
        len(subject) >= 2
        or tokens[subject[-1]].lower().rstrip(".") in ORG_SUFFIXES)

    annotated = []
    for i, surface in enumerate(tokens):
        low = surface.lower()
        entity = "ORG" if (i in subject and org_subject) else "NONE"
        if _PUNCT_RE.match(surface):
            pos, dep, lemma, head = "PUNCT", "punct", low, root
        elif i == start or i == root:
            pos, dep, lemma = "VERB", "root", _verb_lemma(surface)
            head = i if i == root else start
            if i == start:
                dep, head = "root", start
        elif low == "to" and i + 1 == start:
            pos, dep, lemma, head = "PART", "aux", low, root
        elif low in DETERMINERS:
            pos, dep, lemma, head = "DET", "det", low, min(i + 1, len(tokens) - 1)
        elif low in PREPOSITIONS:
            pos, dep, lemma = "ADP", "prep", low
            head = start if i >= start else root
        elif low in CONJUNCTIONS:
            pos, dep, lemma = "CCONJ", "cc", low
            head = start if i >= start else root
        elif low in PRONOUNS:
            pos, dep, lemma, head = "PRON", "nsubj" if i < root else "obj", low, root
        elif i in subject:
            pos, dep, lemma, head = "PROPN", "nsubj", low, root
        elif surface[:1].isupper() and i > 0:
            pos, dep = "PROPN", "obj" if i >= start else "nmod"
            lemma, head = low, start if i >= start else root
        elif surface.replace(".", "").replace(",", "").isdigit():
            pos, dep, lemma = "NUM", "nummod", low
            head = min(i + 1, len(tokens) - 1)
        else:
            pos = "NOUN"
            dep = "obj" if i >= start else "nmod"
            lemma, head = low, start if i >= start else root
        annotated.append({"surface": surface, "lemma": lemma, "pos": pos,
                          "dep": dep, "head": head, "entity": entity})

    agent_is_org = org_subject and all(
        annotated[i]["entity"] == "ORG" for i in subject)
    return {
        "doc_id": doc_id,
        "sentence_id": sentence_id,
        "sentence_text": " ".join(tokens),
        "tokens": annotated,
        "tasks": [{"span": [start, end], "head": start,
                   "agent_is_org": agent_is_org}],
    }


def read_spans(path: Path) -> dict[int, list[tuple[int, int]]]:
    spans: dict[int, list[tuple[int, int]]] = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
        idx, start, end = (int(p) for p in parts)
        spans.setdefault(idx, []).append((start, end))
    return spans


def annotate_directory(input_dir, output_path) -> tuple[int, int]:
    """Annotate every .txt/.spans.tsv pair; returns (written, skipped)."""
    input_dir = Path(input_dir)
    written = skipped = 0
    with open(output_path, "w", encoding="utf-8") as out:
        for text_path in sorted(input_dir.glob("*.txt")):
            spans_path = text_path.parent / (text_path.stem + ".spans.tsv")
            if not spans_path.exists():
                log.warning("no span file for %s; skipping", text_path.name)
                continue
            spans = read_spans(spans_path)
            sentences = text_path.read_text("utf-8").splitlines()
            for idx, sentence in enumerate(sentences):
                for span in spans.get(idx, ()):
                    sid = f"{text_path.stem}-{idx}-{span[0]}"
                    try:
                        record = annotate_sentence(sentence, span,
                                                   doc_id=text_path.stem,
                                                   sentence_id=sid)
                    except ValueError as exc:
                        log.warning("skipping %s: %s", sid, exc)
                        skipped += 1
                        continue
                    out.write(json.dumps(record, sort_keys=True) + "\n")
                    written += 1
    return written, skipped
