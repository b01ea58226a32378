import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from capability_provider.annotate import (annotate_directory,
                                          annotate_sentence, read_spans,
                                          tokenize_sentence)
from capability_provider.cli import main


def test_tokenize_splits_punctuation():
    assert tokenize_sentence("Acme Corp approved loans .") == \
        ["Acme", "Corp", "approved", "loans", "."]
    assert tokenize_sentence("They sold grain, fast.") == \
        ["They", "sold", "grain", ",", "fast", "."]


def test_org_subject_sets_agent_flag():
    record = annotate_sentence(
        "Acme Corp plans to lend money to farmers .", (4, 8),
        doc_id="d", sentence_id="s")
    assert record["tasks"][0]["agent_is_org"] is True
    assert record["tokens"][0]["entity"] == "ORG"
    assert record["tokens"][1]["entity"] == "ORG"
    assert record["tokens"][4]["pos"] == "VERB"
    assert record["tokens"][4]["dep"] == "root"


def test_pronoun_subject_not_org():
    record = annotate_sentence(
        "They plan to lend money to farmers .", (3, 7),
        doc_id="d", sentence_id="s")
    assert record["tasks"][0]["agent_is_org"] is False
    assert record["tokens"][0]["pos"] == "PRON"


def test_span_head_inside_span():
    record = annotate_sentence(
        "Acme Corp plans to lend money .", (4, 6), doc_id="d", sentence_id="s")
    (task,) = record["tasks"]
    assert task["span"][0] <= task["head"] < task["span"][1]


def test_entity_tags_closed_set():
    record = annotate_sentence(
        "Acme Corp agreed to ship 400 crates to Boston today .", (4, 10),
        doc_id="d", sentence_id="s")
    allowed = {"NONE", "GPE", "MONEY", "DATE", "TIME", "ORG", "OTHER"}
    assert all(t["entity"] in allowed for t in record["tokens"])


def test_bad_span_rejected():
    with pytest.raises(ValueError, match="span"):
        annotate_sentence("Short sentence .", (2, 9), doc_id="d", sentence_id="s")


def test_read_spans_format(tmp_path):
    path = tmp_path / "a.spans.tsv"
    path.write_text("# comment\n0\t4\t8\n0\t1\t3\n2\t0\t2\n")
    assert read_spans(path) == {0: [(4, 8), (1, 3)], 2: [(0, 2)]}


def _write_inputs(tmp_path):
    (tmp_path / "news.txt").write_text(
        "Acme Corp plans to lend money to farmers .\n"
        "They want to sell old trucks .\n"
        "Tiny line .\n")
    (tmp_path / "news.spans.tsv").write_text(
        "0\t4\t8\n1\t3\t6\n2\t5\t9\n")  # third span is out of range


def test_annotate_directory_counts_and_skips(tmp_path, caplog):
    _write_inputs(tmp_path)
    out = tmp_path / "corpus.jsonl"
    written, skipped = annotate_directory(tmp_path, out)
    assert (written, skipped) == (2, 1)
    records = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(records) == 2
    assert records[0]["tasks"][0]["agent_is_org"] is True
    assert records[1]["tasks"][0]["agent_is_org"] is False


def test_annotate_empty_input(tmp_path):
    out = tmp_path / "corpus.jsonl"
    written, skipped = annotate_directory(tmp_path, out)
    assert (written, skipped) == (0, 0)
    assert out.read_text() == ""


def test_annotate_cli(tmp_path):
    _write_inputs(tmp_path)
    out = tmp_path / "corpus.jsonl"
    result = CliRunner().invoke(main, ["annotate", str(tmp_path), str(out)],
                                catch_exceptions=False)
    assert result.exit_code == 0
    assert "2 records written, 1 skipped" in result.output


def test_output_passes_pipeline_validation(tmp_path):
    """The emitted corpus is accepted by the consumer's validate stage."""
    _write_inputs(tmp_path)
    corpus = tmp_path / "corpus.jsonl"
    annotate_directory(tmp_path, corpus)
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"corpus": str(corpus)}))
    proc = subprocess.run(
        [sys.executable, "-m", "igtasks.cli", "--config", str(cfg),
         "--workspace", str(tmp_path / "ws"), "--fallback",
         "--stage", "validate"],
        capture_output=True, text=True)
    if proc.returncode != 0 and "No module named" in proc.stderr:
        pytest.skip("consumer pipeline not installed")
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "ws" / "validation_report.json").read_text())
    assert report["accepted"] == 2
    assert report["rejected"] == 0
