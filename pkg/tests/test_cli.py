"""Command-line behavior: subcommands, exit codes, output determinism."""

import json
from pathlib import Path

import pytest

from cermute import corpus
from cermute.cli import main

CORPUS_DIR = Path(__file__).resolve().parent.parent / "src" / "cermute" / "corpus"
THEORY = str(CORPUS_DIR / "ui_theory.spthy")
GOALS = str(CORPUS_DIR / "ui_goals.spthy")
CEREMONY = str(CORPUS_DIR / "ui_ceremony.cer")


def test_validate_bundled_files_exit_zero(capsys):
    assert main(["validate", CEREMONY, THEORY, GOALS]) == 0
    out = capsys.readouterr().out
    assert "ok" in out


def test_validate_duplicate_start_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.cer"
    bad.write_text(
        "ceremony Bad\n"
        "agents { human A; human B; }\n"
        "types { A : 'x' = v; B : 'x' = v; }\n"
        "role A { start <'x', v>; snd sec -> B : <'x', v>; start <'x', v>; }\n"
        "role B { start <'x', v>; rcv sec <- A : <'x', v>; }\n",
        encoding="utf-8",
    )
    assert main(["validate", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "duplicate Start at index 2" in out


def test_validate_missing_file_exit_two():
    assert main(["validate", "no/such/file.cer"]) == 2


def test_compile_writes_rules(tmp_path, capsys):
    assert main(["compile", CEREMONY, "--out", str(tmp_path)]) == 0
    compiled = tmp_path / "UI_compiled.spthy"
    assert compiled.exists()
    text = compiled.read_text(encoding="utf-8")
    assert "rule G0:" in text and "rule RK4:" in text


def test_mutate_writes_catalog_and_theories(tmp_path, capsys):
    assert main(["mutate", THEORY, "--out", str(tmp_path)]) == 0
    catalog = json.loads((tmp_path / "catalog.json").read_text(encoding="utf-8"))
    assert len(catalog) == 12
    files = sorted(p.name for p in (tmp_path / "mutants").glob("*.spthy"))
    assert len(files) == 12
    assert "replace-M0.spthy" in files


def test_mutate_kind_filter(tmp_path):
    assert main(["mutate", THEORY, "--kinds", "replace", "--out", str(tmp_path)]) == 0
    files = sorted(p.name for p in (tmp_path / "mutants").glob("*.spthy"))
    assert files == ["replace-M0.spthy", "replace-M1.spthy"]


def test_mutate_warns_when_no_sites(tmp_path, capsys):
    sendless = tmp_path / "sendless.spthy"
    sendless.write_text(
        """
rule Boot:
  [] --> [ State($H, '1', <'x'>) ]

rule Look:
  [ State($H, '1', <'x'>), RcvS($A, $H, 'x', v) ] --[ H() ]-> [ State($H, '2', <'x', v>) ]
""",
        encoding="utf-8",
    )
    assert (
        main(
            [
                "mutate",
                str(sendless),
                "--kinds",
                "disorder",
                "--out",
                str(tmp_path / "out"),
            ]
        )
        == 0
    )
    err = capsys.readouterr().err
    assert "no mutation sites" in err


def test_check_small_bound_outputs_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["check", THEORY, GOALS, "--bound", "8", "--out", str(out1)]) == 0
    assert main(["check", THEORY, GOALS, "--bound", "8", "--out", str(out2)]) == 0
    for name in ("matrix.json", "matrix.md", "matrix.csv", "traces.jsonl"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    assert (out1 / "matrix.png").exists()
    assert (out1 / "run_meta.json").exists()
    matrix = json.loads((out1 / "matrix.json").read_text(encoding="utf-8"))
    assert matrix["bound"] == 8
    labels = [row["label"] for row in matrix["rows"]]
    assert labels[0] == "base"
    assert len(labels) == 13  # base plus the twelve mutants


def test_check_lemma_filter(tmp_path, capsys):
    out = tmp_path / "o"
    assert (
        main(
            [
                "check",
                THEORY,
                GOALS,
                "--bound",
                "6",
                "--lemma",
                "Complete_Verification",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    matrix = json.loads((out / "matrix.json").read_text(encoding="utf-8"))
    assert matrix["lemmas"] == ["Complete_Verification"]
    assert all(len(row["cells"]) == 1 for row in matrix["rows"])


def test_check_unknown_lemma_exit_two(tmp_path):
    assert (
        main(
            [
                "check",
                THEORY,
                GOALS,
                "--lemma",
                "NoSuchGoal",
                "--out",
                str(tmp_path / "x"),
            ]
        )
        == 2
    )


def test_check_low_bound_flags_unsettled_cells(tmp_path):
    out = tmp_path / "lo"
    assert (
        main(
            [
                "check",
                THEORY,
                GOALS,
                "--bound",
                "4",
                "--kinds",
                "replace",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    matrix = json.loads((out / "matrix.json").read_text(encoding="utf-8"))
    for row in matrix["rows"]:
        for cell in row["cells"]:
            assert cell["result"] != "violated"
            assert cell["truncated"] is True


def test_trace_rendering_and_unknown_id(tmp_path, capsys):
    out = tmp_path / "run"
    assert (
        main(
            [
                "check",
                THEORY,
                GOALS,
                "--bound",
                "18",
                "--kinds",
                "replace",
                "--lemma",
                "Complete_Verification",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    capsys.readouterr()
    assert main(["trace", "replace-M0.Complete_Verification", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    snd = text.index("Snd('Guest', sec, 'RK'")
    rcv = text.index("Rcv('RK', sec, 'Guest'")
    assert snd < rcv
    assert main(["trace", "", "--out", str(out)]) == 2
    assert main(["trace", "nope", "--out", str(out)]) == 2
