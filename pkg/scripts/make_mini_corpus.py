"""Regenerate the bundled mini corpus (data/mini_corpus.jsonl).

The corpus is synthetic: 50 sentences whose task phrases are keyword-dense
for a handful of IGs, so the offline fallback provider labels a useful
fraction of them.  Annotations are simple but satisfy the corpus invariants.
"""

import json
from pathlib import Path

POS_LEXICON = {
    "the": ("DET", "det"), "a": ("DET", "det"), "an": ("DET", "det"),
    "and": ("CCONJ", "cc"), "or": ("CCONJ", "cc"),
    "for": ("ADP", "prep"), "to": ("PART", "aux"), "of": ("ADP", "prep"),
    "in": ("ADP", "prep"), "with": ("ADP", "prep"), "across": ("ADP", "prep"),
    ".": ("PUNCT", "punct"),
}

VERB_LEMMAS = {
    "plans": "plan", "process": "process", "operate": "operate",
    "develop": "develop", "manage": "manage", "run": "run", "expand": "expand",
    "build": "build", "sell": "sell", "provide": "provide", "launch": "launch",
    "deliver": "deliver", "grow": "grow", "insure": "insure", "mine": "mine",
    "refine": "refine", "broadcast": "broadcast", "publish": "publish",
    "ship": "ship", "lend": "lend", "offer": "offer", "harvest": "harvest",
    "supply": "supply", "produce": "produce", "brew": "brew", "test": "test",
}

# (ig, agent org name, task phrases). Tasks lean on that IG's keywords so the
# keyword lookup and the fallback cosine ranking agree.
TASK_SETS = [
    ("Banks", "Amoskeag Bank", [
        "process loan and mortgage payment transfers",
        "offer mortgage loan accounts for customers",
        "lend money for mortgage and loan accounts",
        "manage payment accounts and money transfers",
        "provide loan payment and money services",
        "launch mortgage accounts with payment plans",
    ]),
    ("Energy", "Total Petroleum", [
        "operate coal and solar electricity plants",
        "build renewable solar and coal electricity capacity",
        "refine oil and produce coal electricity",
        "supply solar electricity and renewable oil products",
        "expand renewable coal and oil electricity output",
        "produce oil coal and solar electricity",
    ]),
    ("Pharmaceuticals", "Moderna", [
        "develop vaccine and medicine drug candidates",
        "test drug and vaccine medicine batches",
        "produce biotechnology vaccine and drug syrup",
        "launch medicine drug and vaccine programs",
        "supply vaccine syrup and biotechnology medicine",
        "expand drug medicine and biotechnology research",
    ]),
    ("Transportation", "Union Freight", [
        "manage airline shipping and logistics routes",
        "run railway highway and shipping logistics",
        "expand airline logistics and railway shipping",
        "ship highway railway and airline cargo",
        "provide shipping logistics for railway lines",
        "operate airline railway and highway logistics",
    ]),
    ("Retailing", "Shopify", [
        "run ecommerce supermarket and shop chains",
        "launch ecommerce merchandise distributor platforms",
        "sell merchandise for supermarket shop networks",
        "grow ecommerce shop and supermarket sales",
        "manage distributor merchandise and shop stock",
        "expand supermarket ecommerce and distributor reach",
    ]),
    ("Media & Entertainment", "Comet Media", [
        "expand film news and broadcasting advertising",
        "publish news film and advertising content",
        "broadcast film news and publishing programs",
        "produce advertising broadcasting and film news",
        "grow publishing advertising and broadcasting revenue",
        "launch news publishing and film channels",
    ]),
    ("Materials", "Global Mining", [
        "mine metal and produce fertilizer chemical cement",
        "supply cement metal and chemical fertilizer",
        "produce chemical cement and metal fertilizer",
        "expand mining metal and cement output",
        "refine chemical fertilizer and cement materials",
        "sell metal mining and fertilizer products",
    ]),
    ("Food & Staples Retailing", "Harvest Farms", [
        "harvest crop vegetable and fruit produce",
        "grow farm vegetable fruit and crop yields",
        "supply agriculture crop and vegetable produce",
        "deliver farm fruit vegetable and crop boxes",
        "expand agriculture farm and crop capacity",
        "sell fruit vegetable and farm produce",
    ]),
]

# Two noise sentences: tasks with no IG keywords at all.
NOISE = [
    ("Quiet Partners", "discuss quarterly planning meetings"),
    ("Quiet Partners", "arrange internal strategy reviews"),
]


def annotate(words, entities):
    tokens = []
    for i, w in enumerate(words):
        lw = w.lower()
        if lw in VERB_LEMMAS:
            pos, dep, lemma = "VERB", "root", VERB_LEMMAS[lw]
        elif lw in POS_LEXICON:
            pos, dep = POS_LEXICON[lw]
            lemma = lw
        elif w[0].isupper():
            pos, dep, lemma = "PROPN", "nsubj", lw
        else:
            pos, dep, lemma = "NOUN", "obj", lw
        tokens.append({
            "surface": w, "lemma": lemma, "pos": pos, "dep": dep,
            "head": 0, "entity": entities.get(i, "NONE"),
        })
    return tokens


def build_sentence(doc_id, sent_id, org, task_phrase, agent_is_org):
    org_words = org.split()
    words = org_words + ["plans", "to"] + task_phrase.split() + ["."]
    entities = {i: "ORG" for i in range(len(org_words))}
    tokens = annotate(words, entities)
    verb_i = len(org_words)  # "plans"
    task_start = verb_i + 2
    task_end = len(words) - 1  # exclude final period
    for i, tok in enumerate(tokens):
        if i == verb_i:
            tok["head"] = verb_i
        elif task_start <= i < task_end:
            tok["head"] = task_start
        else:
            tok["head"] = verb_i
    tokens[task_start]["head"] = verb_i
    return {
        "doc_id": doc_id,
        "sentence_id": sent_id,
        "sentence_text": " ".join(words),
        "tokens": tokens,
        "tasks": [{"span": [task_start, task_end], "head": task_start,
                   "agent_is_org": agent_is_org}],
    }


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "igtasks" / "data" / "mini_corpus.jsonl"
    lines = []
    n = 0
    for ig, org, phrases in TASK_SETS:
        for j, phrase in enumerate(phrases):
            n += 1
            lines.append(build_sentence(
                f"doc{n:03d}", f"s{n:03d}", org, phrase, agent_is_org=(j % 3 != 2)))
    for org, phrase in NOISE:
        n += 1
        lines.append(build_sentence(f"doc{n:03d}", f"s{n:03d}", org, phrase, False))
    with open(out, "w", encoding="utf-8") as fh:
        for obj in lines:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    print(f"wrote {len(lines)} sentences to {out}")


if __name__ == "__main__":
    main()
