"""Report rendering: attack-matrix tables, figures, and trace listings.

The matrix is written as a markdown table mirroring the reference layout,
as JSON, as delimited CSV, and as a verdict heatmap figure. Witness
traces render as numbered message sequences (agent, channel, payload):
the wire facts an agent step sends and consumes, recovered by replaying
the trace, so elided bookkeeping never hides a message.
"""

from __future__ import annotations

import csv
import io
import json

from . import analysis, terms
from .engine.replay import replay_trace
from .engine.matching import instantiate_fact
from .rules import Trace, render_fact, trace_to_json

_WIRE_CHANNEL = {"S": "sec", "A": "auth", "C": "conf", "I": "insec"}

_MARKS = {
    analysis.ATTACK: "yes",
    analysis.NO_ATTACK: "no",
    analysis.VACUOUS: "vacuous",
    "inconclusive": "inconclusive",
}


def message_sequence(rules, trace: Trace) -> list:
    """Numbered send/receive lines for every agent step of a trace."""
    result = replay_trace(rules, trace)
    lines = []
    by_name = {r.name: r for r in rules}
    for step, binding in zip(trace.steps, result.bindings):
        rule = by_name[step.rule]
        if rule.name.startswith("Chan"):
            continue
        for f in rule.premise:
            if f[0].startswith("Rcv") and len(f[1]) == 4:
                inst = instantiate_fact(f, binding)
                ch = _WIRE_CHANNEL.get(f[0][-1], "sec")
                payload = terms.render(terms.tup(inst[1][2], inst[1][3]))
                lines.append(
                    f"{step.timestamp}. Rcv({terms.render(inst[1][1])}, {ch}, "
                    f"{terms.render(inst[1][0])}, {payload})"
                )
        for f in rule.conclusion:
            if f[0].startswith("Snd") and len(f[1]) == 4:
                inst = instantiate_fact(f, binding)
                ch = _WIRE_CHANNEL.get(f[0][-1], "sec")
                payload = terms.render(terms.tup(inst[1][2], inst[1][3]))
                lines.append(
                    f"{step.timestamp}. Snd({terms.render(inst[1][0])}, {ch}, "
                    f"{terms.render(inst[1][1])}, {payload})"
                )
    return lines


def render_trace_text(rules, trace: Trace, title: str) -> str:
    out = [title, "=" * len(title), "", "message sequence:"]
    out.extend("  " + line for line in message_sequence(rules, trace))
    out.append("")
    out.append("rule applications:")
    for s in trace.steps:
        acts = ", ".join(render_fact(f) for f in s.actions)
        out.append(f"  {s.timestamp:>3} {s.rule}  [{acts}]")
    out.append("")
    out.append(f"maximal: {trace.maximal}")
    return "\n".join(out) + "\n"


def cell_rationale(cell, mutant_description: str) -> str:
    v = cell.verdict
    if v.result == analysis.VIOLATED:
        n = len(v.witness.steps) if v.witness else 0
        return f"a {n}-step trace falsifies the goal ({mutant_description})"
    if v.result == analysis.VACUOUS:
        return (
            "no trace within the bound instantiates the goal's premise "
            f"({mutant_description} leaves the ceremony incomplete)"
        )
    if v.result == analysis.INCONCLUSIVE:
        return "the bound cut the search before a witness appeared"
    return "no falsifying trace within the bound; the goal's premise is reachable"


def matrix_to_json(matrix: analysis.AttackMatrix, witness_ids: dict) -> dict:
    rows = []
    for row in matrix.rows:
        cells = []
        for c in row.cells:
            cells.append(
                {
                    "lemma": c.lemma,
                    "result": c.verdict.result,
                    "outcome": c.outcome,
                    "witnessId": witness_ids.get((row.label, c.lemma)),
                    "truncated": c.verdict.truncated,
                    "rationale": cell_rationale(c, row.description),
                }
            )
        rows.append({"label": row.label, "description": row.description, "cells": cells})
    return {"rows": rows, "bound": matrix.bound, "lemmas": list(matrix.lemmas)}


def matrix_to_markdown(matrix: analysis.AttackMatrix, deviations=()) -> str:
    head = "| Mutation | Model | " + " | ".join(matrix.lemmas) + " |"
    sep = "|---" * (2 + len(matrix.lemmas)) + "|"
    lines = [head, sep]
    for row in matrix.rows:
        parts = row.label.rsplit("-", 1)
        kind = parts[0]
        model = parts[1] if len(parts) > 1 else "-"
        marks = []
        for c in row.cells:
            mark = {"attack-found": "attack", "no-attack": "none"}.get(
                c.outcome, c.outcome
            )
            marks.append(mark)
        lines.append(f"| {kind} | {model} | " + " | ".join(marks) + " |")
    out = "\n".join(lines) + "\n"
    out += "\nlegend: attack = goal violated within the bound; none = no violation"
    out += "\nfound; vacuous = the goal's premise never instantiates.\n"
    if deviations:
        out += "\ndeviations from the reference marks:\n"
        for d in deviations:
            out += f"- {d}\n"
    return out


def matrix_to_csv(matrix: analysis.AttackMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["label", "description"] + list(matrix.lemmas))
    for row in matrix.rows:
        writer.writerow(
            [row.label, row.description] + [c.verdict.result for c in row.cells]
        )
    return buf.getvalue()


def matrix_figure(matrix: analysis.AttackMatrix, path) -> None:
    """Verdict heatmap; written to path as a PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    levels = {
        analysis.VIOLATED: 0,
        analysis.HOLDS: 1,
        analysis.VACUOUS: 2,
        analysis.INCONCLUSIVE: 3,
    }
    colors = ["#c0392b", "#27ae60", "#f0e68c", "#95a5a6"]
    grid = [
        [levels.get(c.verdict.result, 3) for c in row.cells] for row in matrix.rows
    ]
    fig, ax = plt.subplots(
        figsize=(2 + 1.6 * len(matrix.lemmas), 1 + 0.38 * len(matrix.rows))
    )
    ax.imshow(grid, cmap=ListedColormap(colors), vmin=0, vmax=3, aspect="auto")
    ax.set_xticks(range(len(matrix.lemmas)), matrix.lemmas, fontsize=8)
    ax.set_yticks(range(len(matrix.rows)), [r.label for r in matrix.rows], fontsize=8)
    for y, row in enumerate(matrix.rows):
        for x, c in enumerate(row.cells):
            ax.text(
                x, y, c.verdict.result, ha="center", va="center", fontsize=7
            )
    ax.set_title(f"goal verdicts per mutant (bound {matrix.bound})", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def compare_to_reference(matrix: analysis.AttackMatrix, reference: dict):
    """(strict mismatches, notes) against the bundled reference marks.

    A reference 'attack' matched by a vacuous verdict on a skip-family
    row is a documented soft note (incomplete ceremonies leave the goals
    without an instantiated premise), not a strict mismatch; everything
    else inconsistent is strict.
    """
    strict, notes = [], []
    columns = reference["goal_columns"]
    for ref_row in reference["rows"]:
        label = ref_row["label"]
        skip_family = label.startswith("skip-")
        for lemma, mark in zip(columns, ref_row["marks"]):
            cell = matrix.cell(label, lemma)
            if cell is None:
                strict.append(f"{label}/{lemma}: missing from the computed matrix")
                continue
            violated = cell.verdict.result == analysis.VIOLATED
            vacuous = cell.verdict.result == analysis.VACUOUS
            if mark == "attack" and not violated:
                if vacuous:
                    notes.append(
                        f"{label}/{lemma}: reference reports an attack; here the "
                        "goal is vacuous (the mutation leaves its premise "
                        "uninstantiated), which this toolkit does not count as "
                        "a violation"
                    )
                    if not skip_family:
                        strict.append(
                            f"{label}/{lemma}: expected a violation, got vacuous"
                        )
                else:
                    strict.append(
                        f"{label}/{lemma}: expected a violation, got "
                        f"{cell.verdict.result}"
                    )
            elif mark == "none" and violated:
                strict.append(f"{label}/{lemma}: unexpected violation")
            elif mark == "none" and vacuous:
                notes.append(
                    f"{label}/{lemma}: reference reports no attack; here the goal "
                    "is vacuous rather than plainly satisfied"
                )
    return strict, notes


def witness_id(label: str, lemma: str) -> str:
    return f"{label}.{lemma}"


def write_check_outputs(outdir, matrix, catalog, base_rules, reference=None):
    """Write matrix.{md,json,csv,png}, witness traces, and report.md.

    Returns the deviations (strict, notes) pair when a reference was
    given, else ([], []).
    """
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    traces_dir = outdir / "traces"
    traces_dir.mkdir(exist_ok=True)

    rules_by_label = {str(m.label): m.rules for m in catalog}
    witness_ids = {}
    jsonl = []
    for row in matrix.rows:
        rules = rules_by_label.get(row.label, base_rules)
        for c in row.cells:
            w = c.verdict.witness
            if w is None:
                continue
            wid = witness_id(row.label, c.lemma)
            witness_ids[(row.label, c.lemma)] = wid
            jsonl.append(json.dumps(trace_to_json(w, wid), sort_keys=True))
            (traces_dir / f"{wid}.txt").write_text(
                render_trace_text(rules, w, f"witness {wid}"), encoding="utf-8"
            )
    (outdir / "traces.jsonl").write_text(
        "\n".join(jsonl) + ("\n" if jsonl else ""), encoding="utf-8"
    )

    strict, notes = ([], [])
    if reference is not None:
        strict, notes = compare_to_reference(matrix, reference)

    (outdir / "matrix.json").write_text(
        json.dumps(matrix_to_json(matrix, witness_ids), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    (outdir / "matrix.csv").write_text(matrix_to_csv(matrix), encoding="utf-8")
    (outdir / "matrix.md").write_text(
        matrix_to_markdown(matrix, deviations=strict + notes), encoding="utf-8"
    )
    try:
        matrix_figure(matrix, outdir / "matrix.png")
    except Exception as exc:  # figure rendering must never sink a run
        (outdir / "matrix.png.err").write_text(str(exc), encoding="utf-8")

    report = ["# analysis report", "", f"step bound: {matrix.bound}", ""]
    report.append("## verdicts and rationale")
    for row in matrix.rows:
        report.append(f"\n### {row.label}\n")
        report.append(f"{row.description}\n")
        for c in row.cells:
            wid = witness_ids.get((row.label, c.lemma))
            suffix = f" (witness: traces/{wid}.txt)" if wid else ""
            report.append(
                f"- {c.lemma}: **{c.verdict.result}** - "
                f"{cell_rationale(c, row.description)}{suffix}"
            )
    if strict or notes:
        report.append("\n## deviations from the reference marks\n")
        for d in strict:
            report.append(f"- strict: {d}")
        for d in notes:
            report.append(f"- note: {d}")
    (outdir / "report.md").write_text("\n".join(report) + "\n", encoding="utf-8")
    return strict, notes
