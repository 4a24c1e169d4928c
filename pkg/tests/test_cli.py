"""CLI subcommands end to end, via main()."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from studykit.cli import main

from conftest import make_chapter_markdown


@pytest.fixture
def workspace(tmp_path, rng, monkeypatch):
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    for i in range(2):
        doc = make_chapter_markdown(rng, f"Chapter {i}", n_sections=2, paragraphs_per_section=3)
        (corpus_dir / f"chapter-{i}.md").write_text(doc, encoding="utf-8")
    (corpus_dir / "notes.txt").write_text("ignored", encoding="utf-8")
    monkeypatch.setenv("ENGINE_SECRET", "cli-secret")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv: str) -> int:
    return main(list(argv))


def test_ingest_creates_index_files(workspace, capsys):
    code = run("ingest", "corpus", "--data-dir", "data")
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 2
    for path in out:
        doc = json.loads(Path(path).read_text())
        assert doc["chapter_id"].startswith("chapter-")


def test_ingest_empty_dir_fails(workspace, capsys):
    (workspace / "empty").mkdir()
    assert run("ingest", "empty", "--data-dir", "data") == 1


def test_estimate_cost_prints_monthly_total(workspace, capsys):
    scenario = {
        "students": 20,
        "calls_per_day": 30,
        "days_per_week": 5,
        "weeks": 4,
        "price_in_per_call": 2.88 / 12000,
        "price_out_per_call": 2.88 / 12000,
    }
    (workspace / "scenario.json").write_text(json.dumps(scenario))
    assert run("estimate-cost", "scenario.json") == 0
    out = capsys.readouterr().out
    assert "total_calls 12000" in out
    assert "total 5.76" in out


def test_export_then_verify_round_trip(workspace, capsys):
    assert run("ingest", "corpus", "--data-dir", "data") == 0
    assert run("export-report", "amy", "--data-dir", "data", "--out", "out") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    report_path = next(p for p in lines if p.endswith(".txt"))
    assert run("verify-report", report_path, "--data-dir", "data") == 0
    assert "Verified" in capsys.readouterr().out


def test_verify_tampered_report_exits_nonzero(workspace, capsys):
    run("ingest", "corpus", "--data-dir", "data")
    run("export-report", "amy", "--data-dir", "data", "--out", "out")
    report_path = Path(
        next(p for p in capsys.readouterr().out.splitlines() if p.endswith(".txt"))
    )
    raw = bytearray(report_path.read_bytes())
    raw[len(raw) // 3] ^= 0x01
    tampered = report_path.with_name("tampered.txt")
    tampered.write_bytes(bytes(raw))
    code = run("verify-report", str(tampered), "--data-dir", "data")
    out = capsys.readouterr().out
    assert code == 1
    assert "NotVerified" in out


def test_export_writes_csv_and_figures(workspace, capsys):
    run("ingest", "corpus", "--data-dir", "data")
    capsys.readouterr()
    run("export-report", "zoe", "--data-dir", "data", "--out", "out")
    lines = capsys.readouterr().out.strip().splitlines()
    suffixes = sorted(Path(p).suffix for p in lines)
    assert suffixes == [".csv", ".png", ".png", ".txt"]
    csv_path = next(p for p in lines if p.endswith(".csv"))
    header = Path(csv_path).read_text().splitlines()[0]
    assert header == "metric,key,value"
    for png in (p for p in lines if p.endswith(".png")):
        assert Path(png).stat().st_size > 0


def test_serve_requires_index(workspace, capsys):
    code = run("verify-report", "nonexistent.txt", "--data-dir", "data")
    assert code == 1  # no indexes ingested yet -> structured failure
