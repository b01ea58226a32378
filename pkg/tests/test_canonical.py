import pytest

from igtasks.canonical import (AdjectiveLexicon, EmptyAfterCanonicalization,
                               Pattern, canonicalize, load_gpe_tables,
                               mine_uninformative_adjectives)
from tests.conftest import make_record, make_token, simple_record

EMPTY_LEXICON = AdjectiveLexicon(uninformative=frozenset())
TABLES = load_gpe_tables()


def T(surface, pos="NOUN", dep="obj", head=0, entity="NONE", lemma=None):
    return make_token(surface, pos=pos, dep=dep, head=head, entity=entity,
                      lemma=lemma)


# -- uninformative adjective mining ------------------------------------------


def _adj_record(i, with_some):
    words = [T("review", pos="VERB", dep="root", lemma="review")]
    if with_some:
        words.append(T("some", pos="ADJ", dep="amod", lemma="some"))
    words.append(T(f"item{i}"))
    return make_record(words)


def test_threshold_includes_frequent_adjective():
    records = [_adj_record(i, with_some=(i < 30)) for i in range(1000)]
    lexicon = mine_uninformative_adjectives(records)  # default 0.002
    assert "some" in lexicon


def test_threshold_excludes_rare_adjective():
    records = [_adj_record(i, with_some=(i < 1)) for i in range(1000)]
    lexicon = mine_uninformative_adjectives(records)
    assert "some" not in lexicon


def test_empty_adjective_inventory():
    records = [simple_record("plain words only") for _ in range(5)]
    lexicon = mine_uninformative_adjectives(records)
    assert not lexicon.uninformative


# -- fixtures from the rule trace --------------------------------------------


def movie_record():
    toks = [
        T("created", pos="VERB", dep="root", head=0, lemma="create"),
        T("virtual", pos="ADJ", dep="amod", head=2),
        T("creatures", dep="dobj", head=0),
        T("and", pos="CCONJ", dep="cc", head=2),
        T("characters", dep="conj", head=2),
        T("in", pos="ADP", dep="prep", head=0),
        T("movies", dep="pobj", head=5),
        T("like", pos="ADP", dep="prep", head=6),
        T('"', pos="PUNCT", dep="punct", head=10),
        T("The", pos="DET", dep="det", head=10),
        T("Lord", pos="PROPN", dep="pobj", head=7),
        T("of", pos="ADP", dep="prep", head=10),
        T("the", pos="DET", dep="det", head=13),
        T("Rings", pos="PROPN", dep="pobj", head=11),
        T('"', pos="PUNCT", dep="punct", head=10),
    ]
    return make_record(toks, head=0)


def test_movie_example():
    ct = canonicalize(movie_record(), EMPTY_LEXICON, TABLES)
    assert ct.text == "create virtual creatures and characters"
    assert ct.pattern == Pattern.V_NP


def test_head_verb_base_form():
    record = make_record([
        T("analyzed", pos="VERB", dep="root", head=0, lemma="analyze"),
        T("quarterly", pos="ADJ", dep="amod", head=2),
        T("results", dep="dobj", head=0),
    ], head=0)
    ct = canonicalize(record, EMPTY_LEXICON, TABLES)
    assert ct.text == "analyze quarterly results"


def test_profits_example():
    record = make_record([
        T("raised", pos="VERB", dep="root", head=0, lemma="raise"),
        T("retail", dep="compound", head=2),
        T("profits", dep="dobj", head=0),
        T("by", pos="ADP", dep="prep", head=0),
        T("46", pos="NUM", dep="nummod", head=5, entity="MONEY"),
        T("pct", dep="pobj", head=3, entity="MONEY"),
        T("to", pos="ADP", dep="prep", head=0),
        T("17.4", pos="NUM", dep="nummod", head=8, entity="MONEY"),
        T("mln", dep="pobj", head=6, entity="MONEY"),
        T("stg", dep="nmod", head=8, entity="MONEY"),
    ], head=0)
    ct = canonicalize(record, EMPTY_LEXICON, TABLES)
    assert ct.text == "raise retail profits"


def pipelines_record():
    toks = [
        T("shut", pos="VERB", dep="root", head=0, lemma="shut"),
        T("down", pos="PART", dep="prt", head=0),
        T("several", pos="ADJ", dep="amod", head=6, lemma="several"),
        T("small", pos="ADJ", dep="amod", head=6, lemma="small"),
        T("crude", pos="ADJ", dep="amod", head=6, lemma="crude"),
        T("oil", dep="compound", head=6),
        T("pipelines", dep="dobj", head=0),
        T("operating", pos="VERB", dep="acl", head=6, lemma="operate"),
        T("near", pos="ADP", dep="prep", head=7),
        T("the", pos="DET", dep="det", head=13),
        T("Texas", pos="PROPN", dep="compound", head=13, entity="GPE"),
        T("/", pos="PUNCT", dep="punct", head=13),
        T("Oklahoma", pos="PROPN", dep="compound", head=13, entity="GPE"),
        T("border", dep="pobj", head=8),
    ]
    return make_record(toks, head=0)


def test_pipelines_example():
    lexicon = AdjectiveLexicon(uninformative=frozenset({"several", "small"}))
    ct = canonicalize(pipelines_record(), lexicon, TABLES)
    assert ct.text == "shut down crude oil pipelines operating near states"
    assert ct.pattern == Pattern.V_NP_P_NP


# -- individual rules --------------------------------------------------------


def test_gpe_country_and_places():
    record = make_record([
        T("export", pos="VERB", dep="root", head=0, lemma="export"),
        T("grain", dep="dobj", head=0),
        T("to", pos="ADP", dep="prep", head=0),
        T("France", pos="PROPN", dep="pobj", head=2, entity="GPE"),
    ], head=0)
    assert canonicalize(record, EMPTY_LEXICON, TABLES).text == "export grain to country"

    record = make_record([
        T("export", pos="VERB", dep="root", head=0, lemma="export"),
        T("grain", dep="dobj", head=0),
        T("to", pos="ADP", dep="prep", head=0),
        T("Gotham", pos="PROPN", dep="pobj", head=2, entity="GPE"),
    ], head=0)
    assert canonicalize(record, EMPTY_LEXICON, TABLES).text == "export grain to places"


def test_money_removed_without_truncation():
    record = make_record([
        T("repay", pos="VERB", dep="root", head=0, lemma="repay"),
        T("the", pos="DET", dep="det", head=3),
        T("46", pos="NUM", dep="nummod", head=3, entity="MONEY"),
        T("mln", dep="compound", head=3, entity="MONEY"),
        T("debt", dep="dobj", head=0),
    ], head=0)
    assert canonicalize(record, EMPTY_LEXICON, TABLES).text == "repay debt"


def test_possessive_pronoun_removed():
    record = make_record([
        T("expand", pos="VERB", dep="root", head=0, lemma="expand"),
        T("its", pos="PRON", dep="poss", head=2),
        T("routes", dep="dobj", head=0),
    ], head=0)
    assert canonicalize(record, EMPTY_LEXICON, TABLES).text == "expand routes"


def test_passive_with_agent_promoted():
    record = make_record([
        T("was", pos="AUX", dep="auxpass", head=1),
        T("approved", pos="VERB", dep="root", head=1, lemma="approve"),
        T("by", pos="ADP", dep="agent", head=1),
        T("the", pos="DET", dep="det", head=4),
        T("board", dep="pobj", head=2),
    ], head=1)
    assert canonicalize(record, EMPTY_LEXICON, TABLES).text == "board approve"


def test_passive_without_agent_keeps_subject_as_object():
    record = make_record([
        T("the", pos="DET", dep="det", head=1),
        T("loans", dep="nsubjpass", head=3),
        T("were", pos="AUX", dep="auxpass", head=3),
        T("approved", pos="VERB", dep="root", head=3, lemma="approve"),
    ], head=3)
    ct = canonicalize(record, EMPTY_LEXICON, TABLES)
    assert ct.text == "approve loans"
    assert ct.pattern == Pattern.V_NP


def test_noun_phrase_patterns():
    record = make_record([
        T("construction", dep="root", head=0),
        T("of", pos="ADP", dep="prep", head=0),
        T("power", dep="compound", head=3),
        T("units", dep="pobj", head=1),
    ], head=0)
    ct = canonicalize(record, EMPTY_LEXICON, TABLES)
    assert ct.text == "construction of power units"
    assert ct.pattern == Pattern.NP_P_NP


def test_empty_after_cleanup_raises():
    record = make_record([
        T("(", pos="PUNCT", dep="punct"),
        T("TPN", pos="PROPN", dep="appos"),
        T(")", pos="PUNCT", dep="punct"),
    ])
    with pytest.raises(EmptyAfterCanonicalization):
        canonicalize(record, EMPTY_LEXICON, TABLES)


# -- invariants --------------------------------------------------------------

NOISY_CHARS = set('"()[]{}') | {"``", "''", "--", "“", "”"}


def _assert_guarantees(record, lexicon=EMPTY_LEXICON):
    ct = canonicalize(record, lexicon, TABLES)
    for ch in NOISY_CHARS:
        assert ch not in ct.text
    span = record.task_tokens
    for tok in span:
        if tok.entity in ("MONEY", "DATE", "TIME"):
            assert tok.surface.lower() not in ct.text.split()
        if tok.dep == "det":
            assert tok.surface.lower() not in ct.text.split()
    return ct


def test_guarantees_on_fixtures():
    _assert_guarantees(movie_record())
    _assert_guarantees(pipelines_record(),
                       AdjectiveLexicon(frozenset({"several", "small"})))


def test_idempotence_on_fixture_outputs():
    for record, lexicon in [
        (movie_record(), EMPTY_LEXICON),
        (pipelines_record(), AdjectiveLexicon(frozenset({"several", "small"}))),
    ]:
        first = canonicalize(record, lexicon, TABLES).text
        trivial = simple_record(first)
        second = canonicalize(trivial, lexicon, TABLES).text
        assert second == first


def test_gpe_table_categories():
    assert TABLES.category("Texas") == "state"
    assert TABLES.category("France") == "country"
    assert TABLES.category("Asia") == "continent"
    assert TABLES.category("Springfieldia") == "places"
