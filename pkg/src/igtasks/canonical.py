"""Conversion of raw task phrases to generalized canonical forms.

The transformation works on the annotated tokens of the task span and applies
a fixed rule sequence: noise stripping, passive-to-active conversion, syntactic
pattern identification, head-verb lemmatization, noun-phrase cleanup, and named
entity generalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable

from .model import TaskRecord


class Pattern(Enum):
    V_NP = "V-NP"
    V_NP_P_NP = "V-NP-P-NP"
    V_P_NP = "V-P-NP"
    NP = "NP"
    NP_P_NP = "NP-P-NP"
    UNMATCHED = "UNMATCHED"


class EmptyAfterCanonicalization(ValueError):
    pass


@dataclass(frozen=True)
class AdjectiveLexicon:
    uninformative: frozenset[str]
    df_threshold: float = 0.002

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.uninformative


@dataclass(frozen=True)
class CanonicalTask:
    text: str
    pattern: Pattern
    source_key: str


@dataclass(frozen=True)
class GPETables:
    countries: frozenset[str]
    continents: frozenset[str]
    subdivisions: frozenset[str]

    def category(self, surface: str) -> str:
        name = surface.lower()
        if name in self.subdivisions:
            return "state"
        if name in self.countries:
            return "country"
        if name in self.continents:
            return "continent"
        return "places"


def load_gpe_tables(path=None) -> GPETables:
    if path is None:
        text = resources.files("igtasks.data").joinpath("gpe_tables.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    subdivisions = {s for subs in raw["subdivisions"].values() for s in subs}
    return GPETables(
        countries=frozenset(c.lower() for c in raw["countries"]),
        continents=frozenset(c.lower() for c in raw["continents"]),
        subdivisions=frozenset(s.lower() for s in subdivisions),
    )


def mine_uninformative_adjectives(records: Iterable[TaskRecord],
                                  df_threshold: float = 0.002) -> AdjectiveLexicon:
    """Adjective lemmas whose task-phrase document frequency clears the threshold."""
    n_tasks = 0
    doc_freq: dict[str, int] = {}
    for record in records:
        n_tasks += 1
        adjs = {t.lemma.lower() for t in record.task_tokens if t.pos == "ADJ"}
        for lemma in adjs:
            doc_freq[lemma] = doc_freq.get(lemma, 0) + 1
    if n_tasks == 0:
        return AdjectiveLexicon(uninformative=frozenset(), df_threshold=df_threshold)
    kept = {lemma for lemma, df in doc_freq.items() if df / n_tasks >= df_threshold}
    return AdjectiveLexicon(uninformative=frozenset(kept), df_threshold=df_threshold)


_QUOTE_CHARS = {'"', "'", "``", "''", "‘", "’", "“", "”", "`"}
_OPEN_BRACKETS = {"(": ")", "[": "]", "{": "}"}
_CLOSE_BRACKETS = set(_OPEN_BRACKETS.values())
_HYPHENS = {"-", "--", "–", "—"}
_GPE_JOINERS = {"/", "-", ",", "and", "&"}
_PLURAL = {"state": "states", "country": "countries",
           "continent": "continents", "places": "places"}

_PASSIVE_SUBJ_DEPS = {"nsubjpass", "nsubj:pass"}
_PASSIVE_AUX_DEPS = {"auxpass", "aux:pass"}
_DET_DEPS = {"det", "predet"}
_POSS_DEPS = {"poss", "nmod:poss", "det:poss"}
_PARTICLE_DEPS = {"prt", "compound:prt"}


@dataclass
class _Tok:
    """Mutable working copy of a task-span token; index is sentence-global."""
    index: int
    surface: str
    lemma: str
    pos: str
    dep: str
    head_index: int
    entity: str


def _working_tokens(record: TaskRecord) -> list[_Tok]:
    start, end = record.task_span
    return [
        _Tok(i, t.surface, t.lemma, t.pos, t.dep, t.head_index, t.entity)
        for i, t in enumerate(record.tokens)
        if start <= i < end
    ]


def _strip_noise(tokens: list[_Tok]) -> list[_Tok]:
    """Rule 1: drop hyphens, quote characters, and quoted/bracketed material."""
    out: list[_Tok] = []
    bracket_depth = 0
    in_quote = False
    for tok in tokens:
        s = tok.surface
        if s in _OPEN_BRACKETS:
            bracket_depth += 1
            continue
        if s in _CLOSE_BRACKETS:
            bracket_depth = max(0, bracket_depth - 1)
            continue
        if s in _QUOTE_CHARS:
            in_quote = not in_quote
            continue
        if bracket_depth > 0 or in_quote:
            continue
        if s in _HYPHENS:
            continue
        out.append(tok)
    return out


def _subtree(tokens: list[_Tok], root_index: int) -> list[_Tok]:
    present = {t.index for t in tokens}
    members = {root_index}
    changed = True
    while changed:
        changed = False
        for t in tokens:
            if t.index not in members and t.head_index in members and t.index in present:
                members.add(t.index)
                changed = True
    return [t for t in tokens if t.index in members]


def _to_active(tokens: list[_Tok]) -> list[_Tok]:
    """Rule 2: passive phrases become active.

    With a by-agent the agent is promoted to subject and the passive subject
    demoted to object; otherwise auxiliaries drop and the verb keeps its
    passive subject as object.
    """
    subj = next((t for t in tokens if t.dep in _PASSIVE_SUBJ_DEPS), None)
    has_aux = any(t.dep in _PASSIVE_AUX_DEPS for t in tokens)
    if subj is None and not has_aux:
        return tokens
    verb_index = subj.head_index if subj is not None else next(
        t.head_index for t in tokens if t.dep in _PASSIVE_AUX_DEPS)
    verb = next((t for t in tokens if t.index == verb_index), None)
    if verb is None:
        return tokens
    subj_phrase = _subtree(tokens, subj.index) if subj is not None else []
    agent_by = next((t for t in tokens
                     if t.surface.lower() == "by" and t.dep in ("agent", "case", "prep")), None)
    agent_phrase: list[_Tok] = []
    if agent_by is not None:
        if agent_by.dep == "case":
            agent_phrase = [t for t in _subtree(tokens, agent_by.head_index) if t is not agent_by]
        else:
            agent_phrase = [t for t in _subtree(tokens, agent_by.index) if t is not agent_by]
    consumed = {id(t) for t in subj_phrase + agent_phrase}
    consumed.add(id(verb))
    rest = [t for t in tokens
            if id(t) not in consumed
            and t.dep not in _PASSIVE_AUX_DEPS
            and t is not agent_by]
    return agent_phrase + [verb] + subj_phrase + rest


def _is_prep(tok: _Tok) -> bool:
    return tok.pos == "ADP" and tok.dep not in _PARTICLE_DEPS


def _identify_pattern(tokens: list[_Tok], head_index: int) -> tuple[list[_Tok], Pattern]:
    """Rule 3: assign a pattern from the fixed single-preposition inventory.

    A phrase carrying two or more prepositions does not fit any pattern in
    the inventory, so it truncates at the first preposition and the remainder
    is re-classified.
    """
    preps = [i for i, t in enumerate(tokens) if _is_prep(t)]
    if len(preps) >= 2:
        tokens = tokens[:preps[0]]
        preps = []
    head = next((t for t in tokens if t.index == head_index), None)
    is_verb_phrase = head is not None and head.pos == "VERB" and tokens and tokens[0] is head
    has_noun_before = lambda stop: any(
        t.pos in ("NOUN", "PROPN", "PRON") for t in tokens[1:stop])
    if is_verb_phrase:
        if not preps:
            if any(t.pos in ("NOUN", "PROPN", "PRON") for t in tokens[1:]):
                return tokens, Pattern.V_NP
            return tokens, Pattern.UNMATCHED
        p = preps[0]
        if has_noun_before(p):
            return tokens, Pattern.V_NP_P_NP
        return tokens, Pattern.V_P_NP
    if head is not None and head.pos in ("NOUN", "PROPN"):
        if not preps:
            return tokens, Pattern.NP
        return tokens, Pattern.NP_P_NP
    return tokens, Pattern.UNMATCHED


def _lemmatize_head_verb(tokens: list[_Tok], head_index: int) -> None:
    for tok in tokens:
        if tok.index == head_index and tok.pos == "VERB":
            tok.surface = tok.lemma
            return


def _cleanup_np(tokens: list[_Tok], lexicon: AdjectiveLexicon) -> list[_Tok]:
    """Rule 5: drop determiners, possessive pronouns, uninformative adjectives."""
    out = []
    for tok in tokens:
        if tok.dep in _DET_DEPS or tok.pos == "DET":
            continue
        if tok.dep in _POSS_DEPS and tok.pos in ("PRON", "DET"):
            continue
        if tok.pos == "ADJ" and tok.lemma.lower() in lexicon:
            continue
        out.append(tok)
    return out


def _generalize_entities(tokens: list[_Tok], tables: GPETables) -> list[_Tok]:
    """Rule 6: GPE mentions generalize via the tables; MONEY/DATE/TIME drop."""
    tokens = [t for t in tokens if t.entity not in ("MONEY", "DATE", "TIME")]
    out: list[_Tok] = []
    i = 0
    while i < len(tokens):
        if tokens[i].entity != "GPE":
            out.append(tokens[i])
            i += 1
            continue
        # Collect a maximal run of GPEs possibly joined by / , and &.
        run = [tokens[i]]
        j = i + 1
        while j < len(tokens):
            if tokens[j].entity == "GPE":
                run.append(tokens[j])
                j += 1
            elif (tokens[j].surface.lower() in _GPE_JOINERS
                  and j + 1 < len(tokens) and tokens[j + 1].entity == "GPE"):
                j += 1
            else:
                break
        gpes = [t for t in run]
        categories = {tables.category(t.surface) for t in gpes}
        word = categories.pop() if len(categories) == 1 else "places"
        if len(gpes) > 1:
            word = _PLURAL[word]
        # A head noun the GPEs modify (e.g. a border named by two states)
        # denotes the same place and is absorbed into the replacement.
        absorb = False
        if (j < len(tokens) and tokens[j].pos in ("NOUN", "PROPN")
                and all(t.head_index == tokens[j].index for t in gpes)):
            absorb = True
        anchor = gpes[0]
        out.append(_Tok(index=anchor.index, surface=word, lemma=word, pos="NOUN",
                        dep=anchor.dep, head_index=anchor.head_index, entity="NONE"))
        i = j + 1 if absorb else j
    return out


def _drop_empty_preps(tokens: list[_Tok]) -> list[_Tok]:
    """Drop prepositions whose object NP vanished during cleanup."""
    changed = True
    while changed:
        changed = False
        for i, tok in enumerate(tokens):
            if not _is_prep(tok):
                continue
            rest = tokens[i + 1:]
            obj = []
            for t in rest:
                if _is_prep(t):
                    break
                obj.append(t)
            if not any(t.pos in ("NOUN", "PROPN", "PRON", "NUM") for t in obj):
                del tokens[i]
                changed = True
                break
    return tokens


def _render(tokens: list[_Tok]) -> str:
    words = [t.surface.lower() for t in tokens if t.pos != "PUNCT"]
    return " ".join(w for w in words if w)


def canonicalize(record: TaskRecord, lexicon: AdjectiveLexicon,
                 gpe_tables: GPETables | None = None) -> CanonicalTask:
    """Apply the full rule sequence to one task record."""
    if gpe_tables is None:
        gpe_tables = load_gpe_tables()
    tokens = _working_tokens(record)
    tokens = _strip_noise(tokens)
    tokens = _to_active(tokens)
    tokens, pattern = _identify_pattern(tokens, record.head_token)
    _lemmatize_head_verb(tokens, record.head_token)
    tokens = _cleanup_np(tokens, lexicon)
    tokens = _generalize_entities(tokens, gpe_tables)
    tokens = _drop_empty_preps(tokens)
    text = _render(tokens)
    if not text:
        raise EmptyAfterCanonicalization(record.key)
    return CanonicalTask(text=text, pattern=pattern, source_key=record.key)
