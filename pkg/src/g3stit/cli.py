"""Command-line front end.

Exit codes: prove gives 0 Derivable, 1 Refuted, 2 Unknown; countermodel gives
0 when a countermodel is found, 1 when the input is derivable, 2 on Unknown;
check-model and check-proof give 0 on success and 1 on a violation. Usage
errors exit 64, unparsable input exits 65.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
import time

from . import axioms, formula as fm
from .calculus import rule_table
from .formula import FormulaError
from .generate import random_sequent
from .proof import check_proof, proof_from_json, proof_text
from .prover import Derivable, Refuted, SearchConfig, certificate, prove
from .semantics import RelationalModel, SemanticsError, falsification_trace, model_check, validate_frame
from .sequent import Labelled, SequentError, label_text, parse_sequent, singleton

EX_USAGE, EX_DATAERR = 64, 65
LOGICS = ("ldm", "tstit", "xstit")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _read(arg: str | None) -> str:
    if arg is None or arg == "-":
        return sys.stdin.read()
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _load_json(arg: str | None):
    try:
        return json.loads(_read(arg))
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def read_problem(text: str, logic: str, agents: int, refute: bool = False):
    """A formula is proved as {w0: formula}; anything with labels is read as a sequent."""
    text = text.strip()
    if not text:
        raise InputError("empty input")
    try:
        f = fm.parse(text, logic, agents)
    except FormulaError as first:
        if refute:
            raise InputError(str(first)) from first
        try:
            return parse_sequent(text, logic, agents)
        except (SequentError, FormulaError) as exc:
            raise InputError(f"not a formula ({first}) nor a sequent ({exc})") from exc
    if refute:
        f = fm.negate(f)
    return singleton(f, logic, agents)


def _config(args) -> SearchConfig:
    try:
        return SearchConfig(fuel=args.fuel, max_labels=args.max_labels, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _trace_lines(outcome: Refuted, root) -> list:
    ext = outcome.extraction
    lines = []
    for it in root.items:
        if isinstance(it, Labelled):
            lines += falsification_trace(ext.model, ext.interpretation[it.label], it.formula)
    return lines


def _print_outcome(outcome, root, fmt: str, out):
    if fmt == "json":
        data = certificate(outcome)
        data["root"] = root.text()
        json.dump(data, out, indent=1, sort_keys=True)
        out.write("\n")
        return
    if isinstance(outcome, Derivable):
        out.write(f"Derivable (height {outcome.proof.height()}, fuel used {outcome.stats['fuel_used']})\n")
        out.write(proof_text(outcome.proof) + "\n")
    elif isinstance(outcome, Refuted):
        ext = outcome.extraction
        out.write(f"Refuted (fuel used {outcome.stats['fuel_used']})\n")
        out.write("countermodel: " + json.dumps(ext.model.to_json(), sort_keys=True) + "\n")
        out.write("interpretation: " + ", ".join(f"{label_text(k)} -> {label_text(v)}"
                                                 for k, v in sorted(ext.interpretation.items())) + "\n")
        for c in ext.caveats:
            out.write(f"caveat: {c}\n")
        out.write("\n".join(_trace_lines(outcome, root)) + "\n")
    else:
        out.write(f"Unknown: {outcome.reason}\n")


def cmd_prove(args, out) -> int:
    root = read_problem(_read(args.input), args.logic, args.agents, args.refute)
    outcome = prove(root, _config(args))
    _print_outcome(outcome, root, args.format, out)
    return {"Derivable": 0, "Refuted": 1}.get(outcome.verdict, 2)


def cmd_countermodel(args, out) -> int:
    root = read_problem(_read(args.input), args.logic, args.agents, args.refute)
    outcome = prove(root, _config(args))
    if isinstance(outcome, Refuted):
        ext = outcome.extraction
        if args.format == "json":
            json.dump(ext.to_json(), out, indent=1, sort_keys=True)
            out.write("\n")
        else:
            out.write(json.dumps(ext.model.to_json(), indent=1, sort_keys=True) + "\n")
            for c in ext.caveats:
                out.write(f"caveat: {c}\n")
            out.write("\n".join(_trace_lines(outcome, root)) + "\n")
        return 0
    if isinstance(outcome, Derivable):
        out.write("no countermodel: the input is derivable\n")
        return 1
    out.write(f"Unknown: {outcome.reason}\n")
    return 2


def _model(args) -> RelationalModel:
    try:
        return RelationalModel.from_json(_load_json(args.model), args.logic)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad model: {exc}") from exc


def cmd_check_model(args, out) -> int:
    report = validate_frame(_model(args))
    if args.format == "json":
        json.dump(report.to_json(), out, indent=1)
        out.write("\n")
    else:
        out.write("\n".join(report.lines()) + "\n")
        out.write("frame valid\n" if report.valid else "frame invalid\n")
    return 0 if report.valid else 1


def cmd_model_check(args, out) -> int:
    m = _model(args)
    try:
        f = fm.parse(_read(args.formula), m.tier, m.agents)
        values = {str(w): model_check(m, w, f) for w in m.worlds}
    except (FormulaError, SemanticsError) as exc:
        raise InputError(str(exc)) from exc
    if args.format == "json":
        json.dump(values, out, indent=1)
        out.write("\n")
    else:
        out.writelines(f"{w}: {'true' if v else 'false'}\n" for w, v in values.items())
    return 0


def cmd_axioms(args, out) -> int:
    try:
        items = axioms.corpus(args.logic, args.agents, depth=args.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        out.write(axioms.to_jsonl(items))
    else:
        out.writelines(f"{i.schema}\t{i.sequent.text()}\n" for i in items)
    return 0


def cmd_check_proof(args, out) -> int:
    data = _load_json(args.proof)
    if isinstance(data, dict) and "verdict" in data:
        # the envelope written by prove --format json
        if data["verdict"] != "Derivable":
            raise InputError(f"certificate is {data['verdict']}, not a proof")
        data = data["proof"]
    try:
        tree = proof_from_json(data)
        table = rule_table(data["logic"], int(data["agents"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad proof certificate: {exc}") from exc
    res = check_proof(tree, table)
    if args.format == "json":
        json.dump({"valid": res.ok, "diagnostic": res.diagnostic,
                   "node": None if res.node is None else {"rule": res.node.rule, "sequent": res.node.sequent.text()}},
                  out, indent=1)
        out.write("\n")
    elif res.ok:
        out.write(f"valid proof of {tree.sequent.text()}\n")
    else:
        out.write(f"invalid: {res.diagnostic}\n  at ({res.node.rule}) |- {res.node.sequent.text()}\n")
    return 0 if res.ok else 1


# ------------------------------------------------------------------ report

REPORT_FIELDS = ["logic", "source", "index", "sequent", "verdict", "fuel_used", "height", "seconds"]


def report_rows(logics, agents: int, samples: int, seed: int, cfg: SearchConfig) -> list:
    """Prove each tier's axiom corpus and ``samples`` random sequents; one row per problem."""
    rows = []
    rng = random.Random(seed)
    for logic in logics:
        problems = [("axiom:" + i.schema, i.sequent) for i in axioms.corpus(logic, agents)]
        problems += [("random", random_sequent(rng, logic, agents, 2, 3)) for _ in range(samples)]
        for k, (source, s) in enumerate(problems):
            t0 = time.perf_counter()
            o = prove(s, cfg)
            rows.append({
                "logic": logic, "source": source, "index": k, "sequent": s.text(), "verdict": o.verdict,
                "fuel_used": o.stats.get("fuel_used", 0), "height": o.stats.get("height", ""),
                "seconds": round(time.perf_counter() - t0, 4),
            })
    return rows


def write_report(rows: list, out_dir: str) -> tuple:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        w.writeheader()
        w.writerows(rows)

    logics = list(dict.fromkeys(r["logic"] for r in rows))
    verdicts = ("Derivable", "Refuted", "Unknown")
    colors = {"Derivable": "#4c72b0", "Refuted": "#dd8452", "Unknown": "#8c8c8c"}
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    bottom = [0] * len(logics)
    for v in verdicts:
        counts = [sum(1 for r in rows if r["logic"] == lg and r["verdict"] == v) for lg in logics]
        ax1.bar(logics, counts, bottom=bottom, label=v, color=colors[v])
        bottom = [b + c for b, c in zip(bottom, counts)]
    ax1.set_ylabel("problems")
    ax1.set_title("verdicts per tier")
    ax1.legend(frameon=False)
    for k, lg in enumerate(logics):
        for v in verdicts:
            ys = [max(r["fuel_used"], 1) for r in rows if r["logic"] == lg and r["verdict"] == v]
            xs = [k + 0.25 * (verdicts.index(v) - 1)] * len(ys)
            ax2.scatter(xs, ys, s=8, alpha=0.6, color=colors[v], label=v if k == 0 else None)
    ax2.set_xticks(range(len(logics)), logics)
    ax2.set_yscale("log")
    ax2.set_ylabel("rule applications")
    ax2.set_title("search effort")
    fig.tight_layout()
    fig_path = os.path.join(out_dir, "report.png")
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path


def cmd_report(args, out) -> int:
    logics = LOGICS if args.logic is None else (args.logic,)
    rows = report_rows(logics, args.agents, args.samples, args.seed, _config(args))
    csv_path, fig_path = write_report(rows, args.out)
    for lg in logics:
        mine = [r for r in rows if r["logic"] == lg]
        counts = {v: sum(1 for r in mine if r["verdict"] == v) for v in ("Derivable", "Refuted", "Unknown")}
        out.write(f"{lg}: {len(mine)} problems, " + ", ".join(f"{v} {n}" for v, n in counts.items()) + "\n")
    out.write(f"wrote {csv_path} and {fig_path}\n")
    return 0


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="g3stit", description="Labelled sequent calculi for STIT logics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, logic_default="ldm"):
        sp.add_argument("--logic", choices=LOGICS, default=logic_default)
        sp.add_argument("--agents", type=int, default=2)
        sp.add_argument("--format", choices=("text", "json"), default="text")

    def search(sp, fuel=SearchConfig.fuel):
        sp.add_argument("--fuel", type=int, default=fuel)
        sp.add_argument("--max-labels", type=int, default=SearchConfig.max_labels)
        sp.add_argument("--seed", type=int, default=0)

    for name, fn, help_ in (("prove", cmd_prove, "search for a derivation"),
                            ("countermodel", cmd_countermodel, "search for a falsifying model")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", nargs="?", help="formula, sequent, or a file holding one (default: stdin)")
        sp.add_argument("--refute", action="store_true", help="negate the formula first")
        common(sp)
        search(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("check-model", help="check a JSON model against its frame conditions")
    sp.add_argument("model", nargs="?")
    common(sp, None)
    sp.set_defaults(func=cmd_check_model)

    sp = sub.add_parser("model-check", help="evaluate a formula at every world of a JSON model")
    sp.add_argument("model")
    sp.add_argument("formula", nargs="?")
    common(sp, None)
    sp.set_defaults(func=cmd_model_check)

    sp = sub.add_parser("axioms", help="emit the axiom instance corpus")
    sp.add_argument("--depth", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_axioms)

    sp = sub.add_parser("check-proof", help="check a JSON proof certificate")
    sp.add_argument("proof", nargs="?")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_check_proof)

    sp = sub.add_parser("report", help="prove corpora and random samples; write CSV and a figure")
    sp.add_argument("--out", default="report")
    sp.add_argument("--samples", type=int, default=50)
    common(sp, None)
    search(sp, fuel=5000)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "agents", 1) is not None and getattr(args, "agents", 1) < 1:
        print("g3stit: error: --agents must be positive", file=sys.stderr)
        return EX_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"g3stit: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (InputError, FormulaError, SequentError, SemanticsError) as exc:
        print(f"g3stit: input error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"g3stit: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
