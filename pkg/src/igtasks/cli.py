"""Pipeline orchestration: file-based stages over a workspace directory.

Each stage reads the previous stage's artifact and writes its own, so any
stage can be re-run independently.  A manifest records the config hash, seed
and provider mode; reruns with a different config are refused unless forced.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import click
import numpy as np

from . import affinity, baselines, canonical, ensemble, evaluation, model, postprocess
from .gateway import Gateway
from .registry import load_registry

STAGES = ["validate", "classify", "canonicalize", "instances", "train", "score",
          "cluster", "emit", "eval", "baseline-arm", "baseline-tfidf", "census"]

ARTIFACTS = {
    "validate": "accepted.jsonl",
    "classify": "labels.jsonl",
    "canonicalize": "labeled.jsonl",
    "instances": "instances.jsonl",
    "train": "params.json",
    "score": "scores.jsonl",
    "cluster": "clusters.json",
    "emit": "triples.jsonl",
}

UPSTREAM = {
    "classify": "validate",
    "canonicalize": "classify",
    "instances": "canonicalize",
    "train": "instances",
    "score": "train",
    "cluster": "score",
    "emit": "cluster",
    "eval": "emit",
    "baseline-arm": "canonicalize",
    "baseline-tfidf": "canonicalize",
}


class StageError(click.ClickException):
    pass


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _require(ws: Path, stage: str) -> Path:
    upstream = UPSTREAM.get(stage)
    if upstream is None:
        return ws
    path = ws / ARTIFACTS[upstream]
    if not path.exists():
        raise StageError(
            f"missing {path.name}: run stage {upstream!r} first")
    return path


def _write_manifest(ws: Path, config: dict, provider_mode: str, force: bool) -> None:
    manifest_path = ws / "manifest.json"
    digest = config_hash(config)
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        if manifest["config_hash"] != digest and not force:
            raise StageError(
                "config hash mismatch with workspace manifest; use --force to override")
    manifest = {
        "config_hash": digest,
        "seed": config.get("seed", 0),
        "provider_mode": provider_mode,
    }
    manifest_path.write_text(json.dumps(manifest, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _write_jsonl(path: Path, objs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def _labeled_tasks(ws: Path) -> list[model.LabeledTask]:
    return [model.labeled_from_dict(d) for d in _read_jsonl(ws / ARTIFACTS["canonicalize"])]


def _emission_pairs(labeled):
    """Deduplicated (ig, canonical) pairs with support counts, input order."""
    pairs: dict[tuple[str, str], int] = {}
    for lt in labeled:
        for ig in affinity.emission_targets(lt):
            key = (ig, lt.canonical)
            pairs[key] = pairs.get(key, 0) + 1
    return pairs


# -- stage implementations ---------------------------------------------------


def stage_validate(ws: Path, config: dict, gateway: Gateway) -> None:
    corpus = config.get("corpus")
    if not corpus:
        raise StageError("config must name a 'corpus' file for the validate stage")
    accepted, report = model.validate_corpus(model.read_corpus(corpus))
    _write_jsonl(ws / ARTIFACTS["validate"],
                 (json.loads(model.record_to_line(r)) for r in accepted))
    (ws / "validation_report.json").write_text(json.dumps({
        "accepted": report.accepted,
        "rejected": report.rejected,
        "rejections": report.rejections,
    }, sort_keys=True) + "\n")
    click.echo(f"validate: {report.accepted} accepted, {report.rejected} rejected")


def stage_classify(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "classify")
    registry = load_registry(config.get("ig_config"))
    threshold = config.get("conf_threshold", ensemble.DEFAULT_CONF_THRESHOLD)
    rows = []
    for obj in _read_jsonl(path):
        for record in model.records_from_line(json.dumps(obj)):
            task_dec, sent_dec, excluded = ensemble.label_record(
                record, registry, gateway, conf_threshold=threshold)
            rows.append({
                "record": json.loads(model.record_to_line(record)),
                "task_level": task_dec.label,
                "sentence_level": sent_dec.label,
                "excluded_igs": list(excluded),
                "task_decision": ensemble.decision_to_dict(task_dec),
                "sentence_decision": ensemble.decision_to_dict(sent_dec),
            })
    _write_jsonl(ws / ARTIFACTS["classify"], rows)
    click.echo(f"classify: {len(rows)} records labeled")


def stage_canonicalize(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "canonicalize")
    rows = _read_jsonl(path)
    records = []
    for obj in rows:
        (record,) = list(model.records_from_line(json.dumps(obj["record"])))
        records.append(record)
    lexicon = canonical.mine_uninformative_adjectives(
        records, df_threshold=config.get("adjective_df_threshold", 0.002))
    tables = canonical.load_gpe_tables(config.get("gpe_tables"))
    out = []
    dropped = 0
    for obj, record in zip(rows, records):
        try:
            ct = canonical.canonicalize(record, lexicon, tables)
        except canonical.EmptyAfterCanonicalization:
            dropped += 1
            continue
        out.append({
            "record": obj["record"],
            "task_level": obj["task_level"],
            "sentence_level": obj["sentence_level"],
            "canonical": ct.text,
            "pattern": ct.pattern.value,
            "excluded_igs": obj["excluded_igs"],
        })
    _write_jsonl(ws / ARTIFACTS["canonicalize"], out)
    click.echo(f"canonicalize: {len(out)} kept, {dropped} empty")


def stage_instances(ws: Path, config: dict, gateway: Gateway) -> None:
    _require(ws, "instances")
    registry = load_registry(config.get("ig_config"))
    labeled = _labeled_tasks(ws)
    usable = [lt for lt in labeled if affinity.emission_targets(lt)]
    instances = affinity.build_instances(usable, registry, gateway,
                                         seed=config.get("seed", 0))
    canon_by_key = {}
    for lt in usable:
        canon_by_key[lt.record.key] = lt.canonical
    _write_jsonl(ws / ARTIFACTS["instances"], (
        {
            "task": canon_by_key[inst.source_key],
            "pos_ig": inst.pos_ig,
            "neg_ig_1": inst.neg_ig_1,
            "neg_ig_2": inst.neg_ig_2,
            "weight": inst.weight,
            "source": inst.source_key,
        }
        for inst in instances
    ))
    click.echo(f"instances: {len(instances)} built")


def stage_train(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "train")
    registry = load_registry(config.get("ig_config"))
    rows = _read_jsonl(path)
    if not rows:
        raise StageError("instance file is empty; nothing to train on")
    embeddings = gateway.embed([r["task"] for r in rows])
    instances = [
        affinity.TrainingInstance(
            task_embedding=emb, pos_ig=r["pos_ig"], neg_ig_1=r["neg_ig_1"],
            neg_ig_2=r["neg_ig_2"], weight=r["weight"], source_key=r["source"])
        for r, emb in zip(rows, embeddings)
    ]
    cfg = affinity.TrainingConfig(
        seed=config.get("seed", 0),
        epochs=config.get("epochs", 5),
        batch_size=config.get("batch_size", 64),
        learning_rate=config.get("learning_rate", 0.0001),
        dropout_p=config.get("dropout_p", 0.25),
        margin=config.get("margin", 0.5),
    )
    result = affinity.train(instances, registry, gateway, cfg)
    affinity.save_params(result.params, cfg, ws / ARTIFACTS["train"])
    (ws / "losses.json").write_text(json.dumps(result.epoch_losses) + "\n")
    click.echo(f"train: epoch losses {[round(x, 4) for x in result.epoch_losses]}")


def stage_score(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "score")
    registry = load_registry(config.get("ig_config"))
    params = affinity.load_params(path)
    labeled = _labeled_tasks(ws)
    pairs = _emission_pairs(labeled)
    rows = []
    for (ig, text), support in pairs.items():
        score = affinity.score_affinity(params, text, ig, registry, gateway)
        vec = np.tanh(params.W_t @ gateway.embed([text])[0] + params.b_t)
        rows.append({
            "ig": ig,
            "task": text,
            "affinity": score,
            "support": support,
            "vector": [float(v) for v in vec],
        })
    _write_jsonl(ws / ARTIFACTS["score"], rows)
    click.echo(f"score: {len(rows)} task-IG pairs scored")


def stage_cluster(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "cluster")
    rows = _read_jsonl(path)
    threshold = config.get("cluster_threshold", postprocess.DEFAULT_THRESHOLD)
    min_size = config.get("cluster_min_size", 1)
    by_ig: dict[str, list[int]] = {}
    for i, row in enumerate(rows):
        by_ig.setdefault(row["ig"], []).append(i)
    clusters_out = {}
    for ig in sorted(by_ig):
        indices = by_ig[ig]
        tasks = [postprocess.ScoredTask(
            text=rows[i]["task"], vector=np.asarray(rows[i]["vector"]),
            affinity=rows[i]["affinity"], support=rows[i]["support"])
            for i in indices]
        clusters = postprocess.cluster_tasks(tasks, threshold=threshold,
                                             min_size=min_size)
        clusters_out[ig] = [[indices[m] for m in members] for members in clusters]
    (ws / ARTIFACTS["cluster"]).write_text(
        json.dumps(clusters_out, sort_keys=True) + "\n")
    click.echo(f"cluster: {sum(len(c) for c in clusters_out.values())} clusters")


def stage_emit(ws: Path, config: dict, gateway: Gateway) -> None:
    path = _require(ws, "emit")
    clusters_out = json.loads(path.read_text())
    rows = _read_jsonl(ws / ARTIFACTS["score"])
    k = config.get("top_k", postprocess.DEFAULT_TOP_K)
    all_triples = []
    for ig in sorted(clusters_out):
        clusters = clusters_out[ig]
        tasks = [postprocess.ScoredTask(
            text=r["task"], vector=np.asarray(r["vector"]),
            affinity=r["affinity"], support=r["support"]) for r in rows]
        triples = postprocess.select_triples(clusters, tasks, ig, k=k)
        all_triples.extend(triples)
    for t in all_triples:
        t.validate()
    (ws / ARTIFACTS["emit"]).write_text(
        postprocess.serialize_triples(all_triples, "jsonl"))
    (ws / "triples.csv").write_text(
        postprocess.serialize_triples(all_triples, "csv"))
    click.echo(f"emit: {len(all_triples)} triples")


def _affinity_ranking(ws: Path, k: int) -> dict[str, list[tuple[str, float]]]:
    rows = _read_jsonl(ws / ARTIFACTS["score"])
    by_ig: dict[str, list[tuple[str, float]]] = {}
    for r in rows:
        by_ig.setdefault(r["ig"], []).append((r["task"], r["affinity"]))
    out = {}
    for ig, entries in by_ig.items():
        order = sorted(range(len(entries)), key=lambda i: (-entries[i][1], i))
        out[ig] = [entries[i] for i in order[:k]]
    return out


def stage_eval(ws: Path, config: dict, gateway: Gateway) -> None:
    _require(ws, "eval")
    k = config.get("top_k", postprocess.DEFAULT_TOP_K)
    rankings = {"affinity": _affinity_ranking(ws, k)}
    for method in ("arm", "tfidf"):
        path = ws / f"ranking_{method}.jsonl"
        if path.exists():
            per_ig: dict[str, list[tuple[str, float]]] = {}
            for r in _read_jsonl(path):
                per_ig.setdefault(r["ig"], []).append((r["task"], r["score"]))
            rankings[method] = per_ig
    sheet = evaluation.annotation_sheet(rankings, k=k)
    (ws / "annotation_sheet.csv").write_text(sheet)
    verdicts = config.get("verdict_sheet")
    if verdicts:
        filled = Path(verdicts).read_text()
        result = evaluation.precision_at_k(filled)
        (ws / "precision.json").write_text(json.dumps({
            "per_ig": result.per_ig, "micro": result.micro, "macro": result.macro,
        }, sort_keys=True) + "\n")
        click.echo(f"eval: micro {result.micro:.3f} macro {result.macro:.3f}")
    else:
        click.echo("eval: annotation sheet written")


def _baseline_inputs(ws: Path) -> tuple[list[str], list[str]]:
    labeled = _labeled_tasks(ws)
    tasks, igs = [], []
    for lt in labeled:
        for ig in affinity.emission_targets(lt):
            tasks.append(lt.canonical)
            igs.append(ig)
    return tasks, igs


def stage_baseline_arm(ws: Path, config: dict, gateway: Gateway) -> None:
    _require(ws, "baseline-arm")
    registry = load_registry(config.get("ig_config"))
    tasks, igs = _baseline_inputs(ws)
    stopwords = baselines.load_stopwords(config.get("stopwords"))
    word_sets = [baselines.task_words(t, stopwords) for t in tasks]
    rules = baselines.mine_rules(
        word_sets, igs, registry.names,
        min_support=config.get("arm_min_support", 0.0005),
        min_confidence=config.get("arm_min_confidence", 0.2))
    ranked = baselines.arm_rank(tasks, igs, rules,
                                k=config.get("top_k", postprocess.DEFAULT_TOP_K),
                                stopwords=stopwords)
    _write_jsonl(ws / "ranking_arm.jsonl", (
        {"ig": ig, "rank": rank, "task": task, "score": score, "method": "arm"}
        for ig in sorted(ranked)
        for rank, (task, score) in enumerate(ranked[ig], start=1)
    ))
    click.echo(f"baseline-arm: {len(rules)} rules, {len(ranked)} IGs ranked")


def stage_baseline_tfidf(ws: Path, config: dict, gateway: Gateway) -> None:
    _require(ws, "baseline-tfidf")
    registry = load_registry(config.get("ig_config"))
    tasks, igs = _baseline_inputs(ws)
    ranked = baselines.tfidf_rank(
        tasks, igs, k=config.get("top_k", postprocess.DEFAULT_TOP_K),
        stopwords=baselines.load_stopwords(config.get("stopwords")),
        n_igs=len(registry))
    _write_jsonl(ws / "ranking_tfidf.jsonl", (
        {"ig": ig, "rank": rank, "task": task, "score": score, "method": "tfidf"}
        for ig in sorted(ranked)
        for rank, (task, score) in enumerate(ranked[ig], start=1)
    ))
    click.echo(f"baseline-tfidf: {len(ranked)} IGs ranked")


def stage_census(ws: Path, config: dict, gateway: Gateway) -> None:
    dump = config.get("conceptnet_dump")
    if not dump:
        raise StageError("config must name a 'conceptnet_dump' file for census")
    seeds = config.get("census_seed_concepts", list(evaluation.DEFAULT_SEED_CONCEPTS))
    with open(dump, encoding="utf-8") as fh:
        result = evaluation.conceptnet_capableof_census(
            evaluation.parse_conceptnet_dump(fh), seed_concepts=seeds)
    (ws / "census.json").write_text(json.dumps({
        "organizations": sorted(result.organizations),
        "candidates": result.candidates,
        "skipped": result.skipped,
    }, sort_keys=True) + "\n")
    click.echo(f"census: {len(result.candidates)} candidate triples")


STAGE_FUNCS = {
    "validate": stage_validate,
    "classify": stage_classify,
    "canonicalize": stage_canonicalize,
    "instances": stage_instances,
    "train": stage_train,
    "score": stage_score,
    "cluster": stage_cluster,
    "emit": stage_emit,
    "eval": stage_eval,
    "baseline-arm": stage_baseline_arm,
    "baseline-tfidf": stage_baseline_tfidf,
    "census": stage_census,
}


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file.")
@click.option("--stage", "stage_names", multiple=True, required=True,
              type=click.Choice(STAGES + ["all"]),
              help="Stage(s) to run, in order; 'all' runs the core pipeline.")
@click.option("--workspace", type=click.Path(), required=True)
@click.option("--provider-url", default=None,
              help="Model provider base URL; overrides config and enables remote mode.")
@click.option("--fallback", is_flag=True, help="Force the offline fallback provider.")
@click.option("--seed", type=int, default=None)
@click.option("--top-k", type=int, default=None)
@click.option("--threshold", type=float, default=None, help="Clustering threshold.")
@click.option("--force", is_flag=True, help="Ignore manifest config mismatch.")
def main(config_path, stage_names, workspace, provider_url, fallback, seed,
         top_k, threshold, force):
    """Run pipeline stages over a workspace."""
    config = load_config(config_path)
    if seed is not None:
        config["seed"] = seed
    if top_k is not None:
        config["top_k"] = top_k
    if threshold is not None:
        config["cluster_threshold"] = threshold
    env_url = os.environ.get("IGTASKS_PROVIDER_URL")
    url = provider_url or env_url or config.get("provider_url")
    mode = "fallback" if (fallback or not url) else "remote"
    ws = Path(workspace)
    ws.mkdir(parents=True, exist_ok=True)
    lock = ws / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StageError(f"workspace is locked by another run ({lock})")
    os.close(fd)
    try:
        _write_manifest(ws, config, mode, force)
        gateway = Gateway(mode=mode, url=url, cache_path=ws / "provider_cache.bin")
        names = list(stage_names)
        if "all" in names:
            names = ["validate", "classify", "canonicalize", "instances",
                     "train", "score", "cluster", "emit"]
        for name in names:
            STAGE_FUNCS[name](ws, config, gateway)
    finally:
        lock.unlink(missing_ok=True)


if __name__ == "__main__":
    main()
