"""Command-line front end.

Subcommands: validate, compile, mutate, check, trace. Exit status is 0
when the requested run completed (finding attacks is a completed run),
1 on validation or parse failures, 2 on I/O or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import analysis, corpus, report
from .engine import channel_rules, compile_role_scripts
from .model import validate_ceremony
from .mutations import MutationConfig, catalog_json, enumerate_mutants
from .parser import ParseError, parse_ceremony, parse_theory, print_rule
from .parser.printer import print_theory

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2

ALL_KINDS = ("skip", "add", "replace", "disorder")


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemExit(_fail(f"cannot read {path}: {exc.strerror}", EXIT_USAGE))


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_theory(path: Path):
    return parse_theory(_read(path), str(path))


def _no_replay(rules):
    """Turn persistent delivery facts into linear ones."""
    out = []
    for r in rules:
        swap = lambda f: ("Sec", f[1]) if f[0] == "!Sec" else f
        out.append(
            type(r)(
                r.name,
                tuple(swap(f) for f in r.premise),
                r.actions,
                tuple(swap(f) for f in r.conclusion),
            )
        )
    return out


def cmd_validate(args) -> int:
    status = EXIT_OK
    for name in args.files:
        path = Path(name)
        if not path.exists():
            return _fail(f"no such file: {path}", EXIT_USAGE)
        try:
            if path.suffix == ".cer":
                ceremony = parse_ceremony(_read(path), str(path))
                findings = validate_ceremony(ceremony)
                if findings:
                    status = EXIT_INVALID
                    print(f"{path}: {len(findings)} violation(s)")
                    for v in findings:
                        print(f"  - {v}")
                else:
                    print(f"{path}: ok")
            else:
                doc = _load_theory(path)
                print(
                    f"{path}: ok ({len(doc.rules)} rules, "
                    f"{len(doc.restrictions)} restrictions, {len(doc.lemmas)} lemmas)"
                )
        except ParseError as exc:
            status = EXIT_INVALID
            print(f"{path}: parse error: {exc}")
    return status


def cmd_compile(args) -> int:
    path = Path(args.ceremony)
    if not path.exists():
        return _fail(f"no such file: {path}", EXIT_USAGE)
    try:
        ceremony = parse_ceremony(_read(path), str(path))
        findings = validate_ceremony(ceremony)
        if findings:
            for v in findings:
                print(f"  - {v}", file=sys.stderr)
            return EXIT_INVALID
        rules = compile_role_scripts(ceremony)
        policy = ceremony.channel_replay or None
        transport = channel_rules(policy, attacker=args.attacker, style="compiled")
    except ParseError as exc:
        return _fail(str(exc), EXIT_INVALID)
    text = "\n\n".join(print_rule(r) for r in rules + transport) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{ceremony.name}_compiled.spthy").write_text(text, encoding="utf-8")
        print(f"wrote {out / (ceremony.name + '_compiled.spthy')}")
    else:
        print(text, end="")
    return EXIT_OK


def _mutation_config(args) -> MutationConfig:
    kinds = tuple(args.kinds.split(",")) if args.kinds else ALL_KINDS
    for k in kinds:
        if k not in ALL_KINDS:
            raise SystemExit(_fail(f"unknown mutation kind {k!r}", EXIT_USAGE))
    return MutationConfig(kinds=kinds)


def cmd_mutate(args) -> int:
    path = Path(args.theory)
    if not path.exists():
        return _fail(f"no such file: {path}", EXIT_USAGE)
    try:
        doc = _load_theory(path)
        catalog = enumerate_mutants(doc, _mutation_config(args))
    except ParseError as exc:
        return _fail(str(exc), EXIT_INVALID)
    if not catalog:
        print("warning: no mutation sites for the requested kinds", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "catalog.json").write_text(
        json.dumps(catalog_json(doc.rules, catalog), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    mutants_dir = out / "mutants"
    mutants_dir.mkdir(exist_ok=True)
    for m in catalog:
        body = "\n\n".join(print_rule(r) for r in m.rules) + "\n"
        (mutants_dir / f"{m.label}.spthy").write_text(body, encoding="utf-8")
    print(f"wrote {len(catalog)} mutants to {mutants_dir}")
    return EXIT_OK


def cmd_check(args) -> int:
    theory_path = Path(args.theory)
    goals_path = Path(args.goals) if args.goals else None
    for p in [theory_path] + ([goals_path] if goals_path else []):
        if not p.exists():
            return _fail(f"no such file: {p}", EXIT_USAGE)
    try:
        doc = _load_theory(theory_path)
        goals_doc = _load_theory(goals_path) if goals_path else corpus.load_goals()
        lemmas = [l for l in goals_doc.lemmas if l.kind != "restriction"]
        if args.lemma:
            wanted = args.lemma.split(",")
            unknown = [n for n in wanted if all(l.name != n for l in lemmas)]
            if unknown:
                return _fail(f"unknown lemma name(s): {', '.join(unknown)}", EXIT_USAGE)
            lemmas = [l for l in lemmas if l.name in wanted]
        restrictions = doc.restrictions + goals_doc.restrictions
        if args.no_replay:
            from .mutations import with_rules

            doc = with_rules(doc, _no_replay(doc.rules))
        catalog = enumerate_mutants(doc, _mutation_config(args))
    except ParseError as exc:
        return _fail(str(exc), EXIT_INVALID)

    t0 = time.time()
    rows = []
    base_verdicts = analysis.check_model(doc.rules, restrictions, lemmas, args.bound)
    rows.append(
        analysis.MatrixRow(
            label="base",
            description="unmutated model",
            cells=[analysis.MatrixCell(l.name, base_verdicts[l.name]) for l in lemmas],
        )
    )
    matrix = analysis.build_matrix(catalog, lemmas, restrictions, args.bound)
    matrix.rows = rows + matrix.rows
    duration_ms = int((time.time() - t0) * 1000)

    reference = None
    if not args.lemma and theory_path.name == corpus.THEORY_FILE:
        reference = corpus.load_expected_matrix()

    out = Path(args.out)
    strict, notes = report.write_check_outputs(
        out, matrix, catalog, doc.rules, reference
    )
    (out / "run_meta.json").write_text(
        json.dumps({"durationMs": duration_ms, "bound": args.bound}) + "\n",
        encoding="utf-8",
    )
    if args.format == "json":
        print((out / "matrix.json").read_text(encoding="utf-8"), end="")
    elif args.format == "markdown":
        print((out / "matrix.md").read_text(encoding="utf-8"), end="")
    else:
        for row in matrix.rows:
            cells = ", ".join(f"{c.lemma}={c.verdict.result}" for c in row.cells)
            print(f"{row.label}: {cells}")
        if strict:
            print("strict deviations from the reference marks:")
            for d in strict:
                print(f"  - {d}")
    print(f"outputs in {out}", file=sys.stderr)
    return EXIT_OK


def cmd_trace(args) -> int:
    if not args.id:
        return _fail("empty witness id", EXIT_USAGE)
    out = Path(args.out)
    rendered = out / "traces" / f"{args.id}.txt"
    if rendered.exists():
        print(rendered.read_text(encoding="utf-8"), end="")
        return EXIT_OK
    jsonl = out / "traces.jsonl"
    if jsonl.exists():
        for line in jsonl.read_text(encoding="utf-8").splitlines():
            data = json.loads(line)
            if data["id"] == args.id:
                for s in data["steps"]:
                    acts = ", ".join(
                        f"{a['name']}({', '.join(a['args'])})" for a in s["actions"]
                    )
                    print(f"{s['t']:>3} {s['rule']}  [{acts}]")
                return EXIT_OK
    return _fail(f"unknown witness id {args.id!r} under {out}", EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cermute",
        description="model security ceremonies, mutate human behavior, "
        "and check trace goals over bounded executions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate ceremony or theory files")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile role-scripts to agent rules")
    p.add_argument("ceremony")
    p.add_argument("--out", default=None)
    p.add_argument("--attacker", action="store_true")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("mutate", help="generate the mutant catalog")
    p.add_argument("theory")
    p.add_argument("--kinds", default=None, help="comma-separated mutation kinds")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("check", help="build the attack matrix for a theory")
    p.add_argument("theory")
    p.add_argument("goals", nargs="?", default=None)
    p.add_argument("--bound", type=int, default=24)
    p.add_argument("--kinds", default=None)
    p.add_argument("--lemma", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--format", choices=("text", "json", "markdown"), default="text")
    p.add_argument("--attacker", action="store_true")
    p.add_argument("--no-replay", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trace", help="render a witness trace from a prior run")
    p.add_argument("id")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_trace)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "bound", 1) < 1:
        return _fail("--bound must be at least 1", EXIT_USAGE)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except ParseError as exc:
        return _fail(str(exc), EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
