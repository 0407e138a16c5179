"""Command-line surface: decide, check, transform, oracle, render, pipeline.

Exit codes: 0 success / proved / accepted / valid; 1 not proved / rejected /
countermodel; 2 usage or parse errors.  Checker failures are emitted as
stable machine-readable lines `CODE<TAB>address<TAB>message`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .checkers import (
    CheckReport,
    check_glcirc,
    check_proof,
    check_g3gl,
    end_active_report,
    normal_form_report,
)
from .formula import ParseError, parse_formula
from .proofio import (
    SequentSyntaxError,
    parse_proof,
    parse_labeled_sequent,
    print_proof,
)
from .render import (
    render_model_dot,
    render_proof_dot,
    render_proof_latex,
    render_proof_text,
    render_tree_sequent_dot,
    render_tree_sequent_text,
)
from .search import FuelExhausted, SearchConfig, prove_formula
from .semantics import ModelBound, oracle_validity, parse_model, print_model
from .sequents import CyclicDerivation, format_address
from .transform import TransformError, run_pass

PASSES = ("end-active", "linearize", "normalize", "to-glseq", "to-g3gl", "embed-g3gl")
PIPELINE = (
    ("csgl", None),
    ("end-active", "end-active"),
    ("lngl", "linearize"),
    ("normal", "normalize"),
    ("glseq", "to-glseq"),
    ("g3gl", "to-g3gl"),
)


def _read_formula(arg: str):
    if arg.startswith("@"):
        with open(arg[1:]) as fh:
            arg = fh.read().strip()
    return parse_formula(arg)


def _report_lines(report: CheckReport, out) -> None:
    for f in report.failures:
        print(str(f), file=out)


def _report_json(report: CheckReport) -> dict:
    return {
        "accepted": report.accepted,
        "failures": [
            {
                "code": f.code,
                "detail": f.detail,
                "address": format_address(f.address),
                "message": f.message,
            }
            for f in report.failures
        ],
    }


def run(argv, stdin=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    parser = argparse.ArgumentParser(prog="glproof", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_decide = sub.add_parser("decide", help="backward proof search")
    p_decide.add_argument("--calculus", choices=("glseq", "csgl"), default="glseq")
    p_decide.add_argument("--fuel", type=int, default=100000)
    p_decide.add_argument("--no-loop-check", action="store_true")
    p_decide.add_argument("--no-hint", action="store_true")
    p_decide.add_argument("--format", choices=("text", "json"), default="text")
    p_decide.add_argument("formula")

    p_check = sub.add_parser("check", help="validate a proof file")
    p_check.add_argument("--mode", choices=("strict", "extended"), default=None)
    p_check.add_argument("--end-active", action="store_true",
                         help="also require end-activity (CSGL)")
    p_check.add_argument("--normal-form", action="store_true",
                         help="also require the normal-form block shape (LNGL)")
    p_check.add_argument("--format", choices=("text", "json"), default="text")
    p_check.add_argument("file")

    p_tr = sub.add_parser("transform", help="run a proof transformation pass")
    p_tr.add_argument("--pass", dest="pass_name", choices=PASSES, required=True)
    p_tr.add_argument("-o", "--output")
    p_tr.add_argument("file")

    p_or = sub.add_parser("oracle", help="brute-force validity oracle")
    p_or.add_argument("--bound", type=int, default=None,
                      help="uniform bound on worlds/depth/branching")
    p_or.add_argument("--format", choices=("text", "json"), default="text")
    p_or.add_argument("formula")

    p_rd = sub.add_parser("render", help="render proofs, models, sequents")
    p_rd.add_argument("--format", choices=("dot", "latex", "text"), default="text")
    p_rd.add_argument("--sequent", action="store_true",
                      help="treat the argument as a tree-sequent string")
    p_rd.add_argument("-o", "--output")
    p_rd.add_argument("source")

    p_pl = sub.add_parser("pipeline", help="decide in CSGL, then run all passes")
    p_pl.add_argument("--emit-trace", metavar="DIR")
    p_pl.add_argument("--fuel", type=int, default=100000)
    p_pl.add_argument("formula")

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    try:
        return _dispatch(args, stdout, stderr)
    except (ParseError, SequentSyntaxError) as e:
        print(f"parse error: {e}", file=stderr)
        return 2
    except FileNotFoundError as e:
        print(f"no such file: {e.filename}", file=stderr)
        return 2
    except FuelExhausted:
        print("FuelExhausted\t.\tsearch ran out of fuel", file=stdout)
        return 1
    except TransformError as e:
        print(f"{type(e).__name__}\t.\t{e}", file=stdout)
        return 1


def _dispatch(args, stdout, stderr) -> int:
    if args.command == "decide":
        f = _read_formula(args.formula)
        cfg = SearchConfig(
            fuel=args.fuel,
            loop_check=not args.no_loop_check,
            oracle_hint=not args.no_hint,
        )
        result = prove_formula(f, args.calculus, cfg)
        if args.format == "json":
            doc = {"result": "proved" if result.proved else "not-proved"}
            if result.proved:
                doc["proof"] = print_proof(result.proof)
            else:
                doc["saturated"] = str(result.saturated) if result.saturated else None
                if result.hint is not None:
                    doc["hint"] = {
                        "verdict": result.hint.kind,
                        "model": print_model(result.hint.model) if result.hint.model else None,
                    }
            print(json.dumps(doc, indent=2), file=stdout)
        elif result.proved:
            stdout.write(print_proof(result.proof))
        else:
            print(f"NotProved\t.\tsaturated at: {result.saturated}", file=stdout)
            if result.hint is not None and not result.hint.valid:
                print(f"hint: countermodel at world {result.hint.world}", file=stdout)
                stdout.write(print_model(result.hint.model))
        return 0 if result.proved else 1

    if args.command == "check":
        with open(args.file) as fh:
            obj = parse_proof(fh.read())
        if isinstance(obj, CyclicDerivation):
            report = check_glcirc(obj)
        elif args.mode is not None and obj.calculus in ("g3gl", "g3glext"):
            report = check_g3gl(obj, args.mode)
        else:
            report = check_proof(obj)
        if report.accepted and args.end_active:
            report = end_active_report(obj)
        if report.accepted and args.normal_form:
            report = normal_form_report(obj)
        if args.format == "json":
            print(json.dumps(_report_json(report), indent=2), file=stdout)
        else:
            print("accepted" if report.accepted else "rejected", file=stdout)
            _report_lines(report, stdout)
        return 0 if report.accepted else 1

    if args.command == "transform":
        with open(args.file) as fh:
            proof = parse_proof(fh.read())
        out, report = run_pass(args.pass_name, proof)
        print(report.line(), file=stderr)
        text = print_proof(out)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 0

    if args.command == "oracle":
        f = _read_formula(args.formula)
        bound = ModelBound.uniform(args.bound) if args.bound is not None else None
        verdict = oracle_validity(f, bound)
        if args.format == "json":
            doc = {
                "verdict": verdict.kind,
                "bound_too_small": verdict.bound_too_small,
            }
            if verdict.model is not None:
                doc["model"] = print_model(verdict.model)
                doc["world"] = verdict.world
            print(json.dumps(doc, indent=2), file=stdout)
        elif verdict.valid:
            flag = " (bound too small for completeness)" if verdict.bound_too_small else ""
            print(f"Valid{flag}", file=stdout)
        else:
            print(f"Countermodel at world {verdict.world}", file=stdout)
            stdout.write(print_model(verdict.model))
        return 0 if verdict.valid else 1

    if args.command == "render":
        text = _render(args)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 0

    if args.command == "pipeline":
        return _pipeline(args, stdout, stderr)

    return 2


def _render(args) -> str:
    if args.sequent:
        t = parse_labeled_sequent(args.source)
        return render_tree_sequent_dot(t) if args.format == "dot" else render_tree_sequent_text(t)
    with open(args.source) as fh:
        text = fh.read()
    if args.source.endswith(".glm"):
        model = parse_model(text)
        if args.format == "dot":
            return render_model_dot(model)
        return print_model(model)
    obj = parse_proof(text)
    if args.format == "dot":
        return render_proof_dot(obj)
    if args.format == "latex":
        return render_proof_latex(obj)
    return render_proof_text(obj)


def _pipeline(args, stdout, stderr) -> int:
    f = _read_formula(args.formula)
    cfg = SearchConfig(fuel=args.fuel, oracle_hint=False)
    result = prove_formula(f, "csgl", cfg)
    if not result.proved:
        print(f"NotProved\t.\tsaturated at: {result.saturated}", file=stdout)
        return 1
    stages = []
    proof = result.proof
    stages.append(("csgl", proof, None))
    for stage_name, pass_name in PIPELINE[1:]:
        proof, report = run_pass(pass_name, proof)
        stages.append((stage_name, proof, report))
    for i, (stage_name, proof, report) in enumerate(stages, start=1):
        report_line = report.line() if report else f"decide: concludes {proof.conclusion}"
        print(f"stage {i} {stage_name}: {report_line}", file=stdout)
    if args.emit_trace:
        os.makedirs(args.emit_trace, exist_ok=True)
        for i, (stage_name, proof, _) in enumerate(stages, start=1):
            path = os.path.join(args.emit_trace, f"{i:02d}-{stage_name}.glp")
            with open(path, "w") as fh:
                fh.write(print_proof(proof))
        print(f"trace written to {args.emit_trace}", file=stdout)
    else:
        stdout.write(print_proof(stages[-1][1]))
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
