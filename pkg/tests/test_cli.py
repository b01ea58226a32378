import json
from importlib import resources

import pytest
from click.testing import CliRunner

from igtasks.cli import main

MINI_CORPUS = resources.files("igtasks.data").joinpath("mini_corpus.jsonl")


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "mini.jsonl"
    path.write_text(MINI_CORPUS.read_text("utf-8"))
    return path


def _config(tmp_path, corpus_path, **extra):
    cfg = {"corpus": str(corpus_path), "seed": 0}
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def _run(args):
    result = CliRunner().invoke(main, args, catch_exceptions=False)
    return result


def run_pipeline(ws, cfg):
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "all"])
    assert result.exit_code == 0, result.output
    return result


def test_end_to_end_byte_determinism(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    ws1, ws2 = tmp_path / "ws1", tmp_path / "ws2"
    run_pipeline(ws1, cfg)
    run_pipeline(ws2, cfg)
    for name in ("accepted.jsonl", "labels.jsonl", "labeled.jsonl",
                 "instances.jsonl", "params.json", "scores.jsonl",
                 "clusters.json", "triples.jsonl", "triples.csv",
                 "manifest.json"):
        assert (ws1 / name).read_bytes() == (ws2 / name).read_bytes(), name


def test_emitted_triples_schema(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path, top_k=3)
    ws = tmp_path / "ws"
    run_pipeline(ws, cfg)
    per_ig = {}
    for line in (ws / "triples.jsonl").read_text().splitlines():
        row = json.loads(line)
        assert row["relation"] == "is capable of"
        assert row["head"] == f"{row['ig'].lower()} company"
        assert -1.0 <= row["affinity"] <= 1.0
        assert row["support_count"] >= 1
        assert row["tail"].strip()
        per_ig[row["ig"]] = per_ig.get(row["ig"], 0) + 1
    assert per_ig, "no triples emitted"
    assert all(count <= 3 for count in per_ig.values())


def test_missing_upstream_artifact(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    result = _run(["--config", str(cfg), "--workspace", str(tmp_path / "ws"),
                   "--fallback", "--stage", "train"])
    assert result.exit_code != 0
    assert "missing instances.jsonl" in result.output
    assert "run stage 'instances' first" in result.output


def test_manifest_mismatch_refused_until_forced(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    ws = tmp_path / "ws"
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "validate"])
    assert result.exit_code == 0, result.output
    cfg2 = _config(tmp_path, corpus_path, seed=99)
    result = _run(["--config", str(cfg2), "--workspace", str(ws),
                   "--fallback", "--stage", "validate"])
    assert result.exit_code != 0
    assert "config hash mismatch" in result.output
    result = _run(["--config", str(cfg2), "--workspace", str(ws),
                   "--fallback", "--stage", "validate", "--force"])
    assert result.exit_code == 0, result.output
    manifest = json.loads((ws / "manifest.json").read_text())
    assert manifest["seed"] == 99


def test_workspace_lock(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    ws = tmp_path / "ws"
    ws.mkdir()
    (ws / ".lock").touch()
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "validate"])
    assert result.exit_code != 0
    assert "locked" in result.output
    # A failed acquisition must not remove the other run's lock.
    assert (ws / ".lock").exists()


def test_lock_released_after_run(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    ws = tmp_path / "ws"
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "validate"])
    assert result.exit_code == 0
    assert not (ws / ".lock").exists()


def test_baselines_and_eval_stages(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path, top_k=5)
    ws = tmp_path / "ws"
    run_pipeline(ws, cfg)
    result = _run(["--config", str(cfg), "--workspace", str(ws), "--fallback",
                   "--stage", "baseline-arm", "--stage", "baseline-tfidf",
                   "--stage", "eval"])
    assert result.exit_code == 0, result.output
    sheet = (ws / "annotation_sheet.csv").read_text()
    lines = sheet.splitlines()
    assert lines[0] == "method,ig,rank,task,verdict"
    methods = {line.split(",")[0] for line in lines[1:]
               if line and not line.startswith("#")}
    assert methods == {"affinity", "arm", "tfidf"}
    arm_rows = [json.loads(l) for l in
                (ws / "ranking_arm.jsonl").read_text().splitlines()]
    assert arm_rows and all(r["method"] == "arm" for r in arm_rows)


def test_eval_with_verdict_sheet(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path, top_k=5)
    ws = tmp_path / "ws"
    run_pipeline(ws, cfg)
    result = _run(["--config", str(cfg), "--workspace", str(ws), "--fallback",
                   "--stage", "eval"])
    assert result.exit_code == 0
    filled = (ws / "annotation_sheet.csv").read_text().replace(",\n", ",correct\n")
    verdicts = tmp_path / "verdicts.csv"
    verdicts.write_text(filled)
    cfg2 = _config(tmp_path, corpus_path, top_k=5, verdict_sheet=str(verdicts))
    result = _run(["--config", str(cfg2), "--workspace", str(ws), "--fallback",
                   "--stage", "eval", "--force"])
    assert result.exit_code == 0, result.output
    precision = json.loads((ws / "precision.json").read_text())
    assert precision["micro"] == 1.0


def test_census_stage(tmp_path, corpus_path):
    dump = tmp_path / "dump.tsv"
    dump.write_text("IsA\tbank\tcompany\n"
                    "CapableOf\tbank\tlend money\n"
                    "CapableOf\tdog\tbark\n")
    cfg = _config(tmp_path, corpus_path, conceptnet_dump=str(dump))
    ws = tmp_path / "ws"
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "census"])
    assert result.exit_code == 0, result.output
    census = json.loads((ws / "census.json").read_text())
    assert census["organizations"] == ["bank"]
    assert census["candidates"] == [["bank", "lend money"]]


def test_validation_report_written(tmp_path, corpus_path):
    cfg = _config(tmp_path, corpus_path)
    ws = tmp_path / "ws"
    result = _run(["--config", str(cfg), "--workspace", str(ws),
                   "--fallback", "--stage", "validate"])
    assert result.exit_code == 0
    report = json.loads((ws / "validation_report.json").read_text())
    assert report["accepted"] > 0
    assert report["rejected"] == 0
