"""Command-line front end.

Commands: parse, check, analyze, compare, selftest. Exit codes are part of
the interface: 0 success, 1 parse/type errors, 2 file or model load errors,
3 engine divergence or self-test mismatch, 4 ECA-level runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction

from .ast_nodes import ast_to_json
from .checker import TypedProgram, check, collect_type_errors
from .errors import EcaError, LexError, ParseError
from .interp import (
    DEFAULT_RECURSION_LIMIT, EcaRuntimeError, RunResult, TimingTable,
    trace_to_jsonl,
)
from .model import ComponentModel, ModelError, StepError, load_model_file, validate
from .parser import parse_source
from .quantity import Quantity
from .transform import (
    ProgramOutcome, evaluate_program, print_symbolic, transform_program,
)
from .values import value_repr, value_to_json

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_LOAD = 2
EXIT_DIVERGENT = 3
EXIT_RUNTIME = 4


class CliLoadError(Exception):
    def __init__(self, message: str):
        super().__init__(message)


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except EcaRuntimeError as exc:
        print(f"runtime error: {exc.message}", file=sys.stderr)
        return EXIT_RUNTIME
    except StepError as exc:
        print(f"runtime error: {exc.message}", file=sys.stderr)
        return EXIT_RUNTIME


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eca",
        description="Parse, type-check and energy-analyze ECA programs "
                    "against finite-state hardware component models.")
    sub = parser.add_subparsers(required=True)

    p_parse = sub.add_parser("parse", help="parse a program and report diagnostics")
    p_parse.add_argument("path")
    p_parse.add_argument("--emit-ast", action="store_true",
                         help="dump the AST as JSON on success")
    p_parse.set_defaults(func=cmd_parse)

    p_check = sub.add_parser("check", help="type-check a program against models")
    p_check.add_argument("path")
    p_check.add_argument("--model", action="append", default=[], required=True)
    p_check.set_defaults(func=cmd_check)

    p_an = sub.add_parser("analyze", help="run the energy analysis")
    p_an.add_argument("path")
    p_an.add_argument("--model", action="append", default=[], required=True)
    p_an.add_argument("--timing", default=None)
    p_an.add_argument("--input", action="append", default=[],
                      metavar="NAME=VALUE")
    p_an.add_argument("--engine", choices=("interp", "transform", "both"),
                      default="both")
    p_an.add_argument("--json", action="store_true")
    p_an.add_argument("--emit-term", action="store_true",
                      help="print the symbolic transformation terms")
    p_an.add_argument("--trace", default=None, metavar="PATH",
                      help="write the energy trace as JSON lines")
    p_an.set_defaults(func=cmd_analyze)

    p_cmp = sub.add_parser("compare", help="rank scenario files by total energy")
    p_cmp.add_argument("scenarios", nargs="+",
                       help="scenario JSON files (program, models, timing, inputs)")
    p_cmp.add_argument("--engine", choices=("interp", "transform", "both"),
                       default="both")
    p_cmp.add_argument("--json", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_self = sub.add_parser("selftest",
                            help="oracle equivalence over a corpus directory")
    p_self.add_argument("corpus")
    p_self.add_argument("--json", action="store_true")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def recursion_limit() -> int:
    raw = os.environ.get("ECA_RECURSION_LIMIT")
    if raw is None:
        return DEFAULT_RECURSION_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise CliLoadError(f"ECA_RECURSION_LIMIT must be an integer, got {raw!r}")


def call_with_stack(fn, limit: int):
    """Deep ECA recursion needs a deep Python stack; run on a big-stack thread."""
    if limit <= 4000:
        return fn()
    box: dict = {}

    def target():
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    old = threading.stack_size(512 * 1024 * 1024)
    try:
        thread = threading.Thread(target=target)
        thread.start()
        thread.join()
    finally:
        threading.stack_size(old)
    if "error" in box:
        raise box["error"]
    return box["value"]


# -- loading helpers ---------------------------------------------------------

def read_source(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliLoadError(f"cannot read {path}: {exc.strerror}")


def load_models(paths: list[str]) -> dict[str, ComponentModel]:
    models: dict[str, ComponentModel] = {}
    for path in paths:
        if not os.path.exists(path):
            raise CliLoadError(f"model file not found: {path}")
        try:
            model = load_model_file(path)
        except ModelError as exc:
            errors = getattr(exc, "all_errors", [exc])
            raise CliLoadError("model errors:\n  " + "\n  ".join(str(e) for e in errors))
        if model.name in models:
            raise CliLoadError(f"duplicate component name {model.name!r}")
        models[model.name] = model
    return models


def load_timing(path: str | None) -> TimingTable:
    if path is None:
        return TimingTable()
    if not os.path.exists(path):
        raise CliLoadError(f"timing file not found: {path}")
    try:
        return TimingTable.load_file(path)
    except Exception as exc:
        raise CliLoadError(f"timing file {path}: {exc}")


_INT_RE = re.compile(r"-?[0-9]+$")
_FLOAT_RE = re.compile(r"-?[0-9]+\.[0-9]+$")


def parse_input_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    raise CliLoadError(f"cannot parse input value {text!r} "
                       f"(expected int, float or true/false)")


def parse_inputs(pairs: list[str]) -> dict[str, object]:
    inputs: dict[str, object] = {}
    for pair in pairs:
        if "=" not in pair:
            raise CliLoadError(f"--input expects NAME=VALUE, got {pair!r}")
        name, _, raw = pair.partition("=")
        inputs[name.strip()] = parse_input_value(raw.strip())
    return inputs


def load_checked(path: str, models: dict[str, ComponentModel]) -> TypedProgram | None:
    """Parse and type-check; prints diagnostics and returns None on failure."""
    source = read_source(path)
    try:
        program = parse_source(source)
    except (LexError, ParseError) as exc:
        print(exc.format(path), file=sys.stderr)
        return None
    signatures = [m.signature() for m in models.values()]
    errors = collect_type_errors(program, signatures)
    if errors:
        for err in errors:
            print(err.format(path), file=sys.stderr)
        return None
    return check(program, signatures)


# -- commands ----------------------------------------------------------------

def cmd_parse(args) -> int:
    source = read_source(args.path)
    try:
        program = parse_source(source)
    except (LexError, ParseError) as exc:
        print(exc.format(args.path), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    if args.emit_ast:
        print(json.dumps(ast_to_json(program), indent=2))
    else:
        print(f"{args.path}: ok ({len(program.structs)} struct(s), "
              f"{len(program.functions)} function(s), "
              f"{len(program.globals)} global(s))")
    return EXIT_OK


def cmd_check(args) -> int:
    models = load_models(args.model)
    for model in models.values():
        _, warnings = validate(model)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    typed = load_checked(args.path, models)
    if typed is None:
        return EXIT_DIAGNOSTICS
    print(f"{args.path}: ok")
    return EXIT_OK


@dataclass
class EngineOutcome:
    energy: Quantity
    value: object
    final_globals: dict
    final_components: dict[str, str]
    trace: list


def run_interp(typed, models, timing, inputs, limit) -> EngineOutcome:
    from .interp import run
    res: RunResult = call_with_stack(
        lambda: run(typed, models, timing, inputs, recursion_limit=limit), limit)
    return EngineOutcome(res.energy, res.value, res.final_globals,
                         res.final_components, res.trace)


def run_transform(typed, models, timing, inputs, limit) -> EngineOutcome:
    analysis = transform_program(typed, models, timing)
    out: ProgramOutcome = call_with_stack(
        lambda: evaluate_program(analysis, inputs, recursion_limit=limit,
                                 with_trace=True), limit)
    return EngineOutcome(out.energy, out.value, out.final_globals,
                         out.final_components, out.trace)


def outcome_mismatches(a: EngineOutcome, b: EngineOutcome) -> list[str]:
    problems = []
    if a.energy.value != b.energy.value:
        problems.append(f"energy: interp {a.energy.as_ratio()} J "
                        f"!= transform {b.energy.as_ratio()} J")
    if a.value != b.value:
        problems.append(f"value: {value_repr(a.value)} != {value_repr(b.value)}")
    if a.final_globals != b.final_globals:
        problems.append(f"final globals differ: {a.final_globals} != {b.final_globals}")
    if a.final_components != b.final_components:
        problems.append(f"final component states differ: "
                        f"{a.final_components} != {b.final_components}")
    return problems


def first_trace_divergence(a: list, b: list) -> int:
    """Length of the longest common trace prefix (a minimized diff aid)."""
    i = 0
    while i < len(a) and i < len(b) and a[i].to_json() == b[i].to_json():
        i += 1
    return i


def energy_split(trace) -> tuple[Fraction, Fraction, dict]:
    transition = Fraction(0)
    time_draw = Fraction(0)
    per_component: dict[str, dict[str, Fraction]] = {}
    for ev in trace:
        bucket = per_component.setdefault(
            ev.component, {"transition": Fraction(0), "time_draw": Fraction(0)})
        if ev.kind == "transition":
            transition += ev.energy.value
            bucket["transition"] += ev.energy.value
        else:
            time_draw += ev.energy.value
            bucket["time_draw"] += ev.energy.value
    return transition, time_draw, per_component


def _ratio(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def scenario_row(path, models, timing_id, inputs, engine, outcome,
                 engines_seen, divergent, problems) -> dict:
    transition, time_draw, per_component = energy_split(outcome.trace)
    return {
        "program": path,
        "models": "+".join(models),
        "timing": timing_id,
        "inputs": {k: value_to_json(v) for k, v in inputs.items()},
        "engine": engine,
        "energy": outcome.energy.as_ratio(),
        "energy_joules_approx": outcome.energy.approx(),
        "split": {"transition": _ratio(transition), "time_draw": _ratio(time_draw)},
        "per_component": {
            name: {"transition": _ratio(b["transition"]),
                   "time_draw": _ratio(b["time_draw"])}
            for name, b in sorted(per_component.items())
        },
        "value": value_to_json(outcome.value),
        "final_components": outcome.final_components,
        "engines": engines_seen,
        "divergent": divergent,
        "problems": problems,
    }


def cmd_analyze(args) -> int:
    models = load_models(args.model)
    timing = load_timing(args.timing)
    typed = load_checked(args.path, models)
    if typed is None:
        return EXIT_DIAGNOSTICS
    inputs = parse_inputs(args.input)
    limit = recursion_limit()

    if args.emit_term:
        analysis = transform_program(typed, models, timing)
        for name, ft in analysis.functions.items():
            print(f"V[{name}] = {print_symbolic(ft.value)}")
            print(f"Σ[{name}] = {print_symbolic(ft.sigma)}")
            print(f"E[{name}] = {print_symbolic(ft.energy)}")
        _, s_prog, e_prog = analysis.program_terms(inputs)
        print(f"Σ[program] = {print_symbolic(s_prog)}")
        print(f"E[program] = {print_symbolic(e_prog)}")

    engines_seen: dict[str, str] = {}
    divergent = False
    problems: list[str] = []
    if args.engine == "interp":
        outcome = run_interp(typed, models, timing, inputs, limit)
        engines_seen["interp"] = outcome.energy.as_ratio()
    elif args.engine == "transform":
        outcome = run_transform(typed, models, timing, inputs, limit)
        engines_seen["transform"] = outcome.energy.as_ratio()
    else:
        a = run_interp(typed, models, timing, inputs, limit)
        b = run_transform(typed, models, timing, inputs, limit)
        engines_seen = {"interp": a.energy.as_ratio(),
                        "transform": b.energy.as_ratio()}
        problems = outcome_mismatches(a, b)
        divergent = bool(problems)
        if divergent:
            problems.append(f"first trace divergence at event "
                            f"{first_trace_divergence(a.trace, b.trace)}")
        outcome = a

    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace_to_jsonl(outcome.trace))

    row = scenario_row(args.path, sorted(models), args.timing or "default(0)",
                       inputs, args.engine, outcome, engines_seen,
                       divergent, problems)
    if args.json:
        print(json.dumps(row, indent=2, ensure_ascii=False))
    else:
        print_row_table(row)
    if divergent:
        print("DIVERGENT: the two engines disagree (this is a bug)",
              file=sys.stderr)
        for p in problems:
            print(f"  {p}", file=sys.stderr)
        return EXIT_DIVERGENT
    return EXIT_OK


def print_row_table(row: dict) -> None:
    print(f"program:     {row['program']}")
    print(f"models:      {row['models']}   timing: {row['timing']}")
    if row["inputs"]:
        pretty = ", ".join(f"{k}={v}" for k, v in row["inputs"].items())
        print(f"inputs:      {pretty}")
    print(f"engine:      {row['engine']}"
          + (f"   ({', '.join(f'{k}={v}' for k, v in row['engines'].items())})"
             if row["engines"] else ""))
    print(f"energy:      {row['energy']} J  (~{row['energy_joules_approx']:g} J)")
    print(f"  transition: {row['split']['transition']} J")
    print(f"  time-draw:  {row['split']['time_draw']} J")
    for name, bucket in row["per_component"].items():
        print(f"  {name}: transition {bucket['transition']} J, "
              f"time-draw {bucket['time_draw']} J")
    print(f"value:       {row['value']}")
    print(f"final state: {row['final_components']}")


# -- scenarios (compare / selftest) ------------------------------------------

@dataclass
class Scenario:
    label: str
    program: str
    models: list[str]
    timing: str | None
    inputs: dict[str, object]
    expect: dict


def load_scenario_file(path: str) -> Scenario:
    if not os.path.exists(path):
        raise CliLoadError(f"scenario file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliLoadError(f"{path}: invalid JSON: {exc}")
    base = os.path.dirname(path)
    if "program" not in doc:
        raise CliLoadError(f"{path}: scenario needs a 'program' path")
    return Scenario(
        label=path,
        program=os.path.join(base, doc["program"]),
        models=[os.path.join(base, m) for m in doc.get("models", [])],
        timing=os.path.join(base, doc["timing"]) if doc.get("timing") else None,
        inputs={k: _json_input(v) for k, v in doc.get("inputs", {}).items()},
        expect=doc.get("expect", {}),
    )


def _json_input(v):
    if isinstance(v, (bool, int, float)):
        return v
    raise CliLoadError(f"scenario inputs must be bool/int/float, got {v!r}")


def run_scenario(scn: Scenario, engine: str, limit: int):
    """Returns (outcome, engines_seen, problems). Raises on load problems."""
    models = load_models(scn.models)
    timing = load_timing(scn.timing)
    typed = load_checked(scn.program, models)
    if typed is None:
        raise CliLoadError(f"{scn.program}: parse or type errors (see above)")
    problems: list[str] = []
    engines_seen: dict[str, str] = {}
    if engine in ("interp", "both"):
        a = run_interp(typed, models, timing, scn.inputs, limit)
        engines_seen["interp"] = a.energy.as_ratio()
        outcome = a
    if engine in ("transform", "both"):
        b = run_transform(typed, models, timing, scn.inputs, limit)
        engines_seen["transform"] = b.energy.as_ratio()
        outcome = b
    if engine == "both":
        problems = outcome_mismatches(a, b)
        if problems:
            problems.append(f"first trace divergence at event "
                            f"{first_trace_divergence(a.trace, b.trace)}")
        outcome = a
    problems.extend(check_expectations(scn.expect, outcome))
    return outcome, engines_seen, problems


def check_expectations(expect: dict, outcome: EngineOutcome) -> list[str]:
    problems = []
    if "energy" in expect:
        want = Fraction(expect["energy"])
        if outcome.energy.value != want:
            problems.append(f"expected energy {expect['energy']} J, "
                            f"got {outcome.energy.as_ratio()} J")
    if "value" in expect:
        if value_to_json(outcome.value) != expect["value"]:
            problems.append(f"expected value {expect['value']!r}, "
                            f"got {value_to_json(outcome.value)!r}")
    if "components" in expect:
        if outcome.final_components != expect["components"]:
            problems.append(f"expected final components {expect['components']}, "
                            f"got {outcome.final_components}")
    if "globals" in expect:
        got = {k: value_to_json(v) for k, v in outcome.final_globals.items()}
        want = expect["globals"]
        if got != want:
            problems.append(f"expected final globals {want}, got {got}")
    return problems


def cmd_compare(args) -> int:
    if len(args.scenarios) < 2:
        raise CliLoadError("compare needs at least two scenario files")
    limit = recursion_limit()
    rows = []
    any_failed = False
    for order, path in enumerate(args.scenarios):
        try:
            scn = load_scenario_file(path)
            outcome, engines_seen, problems = run_scenario(scn, args.engine, limit)
            if problems:
                any_failed = True
                rows.append({"scenario": path, "status": "FAILED",
                             "order": order, "problems": problems})
            else:
                rows.append({"scenario": path, "status": "ok", "order": order,
                             "energy": outcome.energy.as_ratio(),
                             "energy_value": outcome.energy.value,
                             "value": value_to_json(outcome.value)})
        except (CliLoadError, EcaRuntimeError, StepError) as exc:
            any_failed = True
            message = exc.message if isinstance(exc, EcaError) else str(exc)
            rows.append({"scenario": path, "status": "FAILED",
                         "order": order, "problems": [message]})

    ok_rows = [r for r in rows if r["status"] == "ok"]
    ok_rows.sort(key=lambda r: (r["energy_value"], r["order"]))
    for rank, row in enumerate(ok_rows):
        row["rank"] = rank + 1
        row["minimum"] = rank == 0
    failed_rows = [r for r in rows if r["status"] == "FAILED"]

    if args.json:
        for r in ok_rows:
            r.pop("energy_value", None)
            r.pop("order", None)
        print(json.dumps({"rows": ok_rows + failed_rows}, indent=2))
    else:
        for row in ok_rows:
            marker = " <-- minimum" if row["minimum"] else ""
            print(f"{row['rank']:>3}. {row['scenario']}: "
                  f"{row['energy']} J{marker}")
        for row in failed_rows:
            print(f"  X. {row['scenario']}: FAILED "
                  f"({'; '.join(row['problems'])})")
    return EXIT_RUNTIME if any_failed else EXIT_OK


def cmd_selftest(args) -> int:
    limit = recursion_limit()
    corpus = args.corpus
    if not os.path.isdir(corpus):
        raise CliLoadError(f"corpus directory not found: {corpus}")
    programs = sorted(f for f in os.listdir(corpus) if f.endswith(".eca"))
    if not programs:
        raise CliLoadError(f"corpus directory {corpus} contains no .eca programs")

    results = []
    mismatch = False
    load_trouble = False
    for name in programs:
        program_path = os.path.join(corpus, name)
        sidecar = os.path.join(corpus, name[:-4] + ".scenarios.json")
        if not os.path.exists(sidecar):
            load_trouble = True
            results.append((name, "-", "NO-SIDECAR", ["missing scenario sidecar"]))
            continue
        with open(sidecar, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                load_trouble = True
                results.append((name, "-", "BAD-SIDECAR", [str(exc)]))
                continue
        for idx, raw in enumerate(doc.get("scenarios", [])):
            scn = Scenario(
                label=f"{name}[{idx}]",
                program=program_path,
                models=[os.path.join(corpus, m) for m in raw.get("models", [])],
                timing=(os.path.join(corpus, raw["timing"])
                        if raw.get("timing") else None),
                inputs=raw.get("inputs", {}),
                expect=raw.get("expect", {}),
            )
            try:
                _, _, problems = run_scenario(scn, "both", limit)
            except (CliLoadError, EcaRuntimeError, StepError) as exc:
                load_trouble = True
                message = exc.message if isinstance(exc, EcaError) else str(exc)
                results.append((name, str(idx), "ERROR", [message]))
                continue
            if problems:
                mismatch = True
                results.append((name, str(idx), "FAIL", problems))
            else:
                results.append((name, str(idx), "pass", []))

    passed = sum(1 for r in results if r[2] == "pass")
    if args.json:
        print(json.dumps({"results": [
            {"program": n, "scenario": s, "status": st, "problems": p}
            for n, s, st, p in results], "passed": passed,
            "total": len(results)}, indent=2))
    else:
        width = max(len(r[0]) for r in results)
        for n, s, st, p in results:
            line = f"{n:<{width}}  #{s:<3} {st}"
            if p:
                line += "  " + "; ".join(p)
            print(line)
        print(f"{passed}/{len(results)} scenario(s) passed")
    if mismatch:
        return EXIT_DIVERGENT
    if load_trouble:
        return EXIT_LOAD
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
