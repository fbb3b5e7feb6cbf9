"""Batch command-line interface with stable JSON reports.

Every subcommand reads plain files (``-`` for stdin), prints one JSON
report object to stdout, and exits 0 on success, 1 on analysis-negative
verdicts when ``--fail-on-distinguished`` requests it, and 2 on input
errors.  Reports are deterministic for fixed seeds and inputs, up to the
wall-time field; floats are printed with 12 significant digits so that
documented tolerances stay auditable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from fractions import Fraction

from . import bisim, gadgets, logic, recurrence, simulate
from .model import Ctmdp, ModelError, as_ratio, dump_model, load_model, model_to_dict, validate
from .uniformize import uniformize, uniformization_rate

REPORT_VERSION = "1"


class InputError(Exception):
    pass


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load(path: str) -> tuple[Ctmdp, str]:
    text = _read_input(path)
    digest = "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
    try:
        model = load_model(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    except ModelError as exc:
        raise InputError(str(exc)) from exc
    return model, digest


def _round_floats(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return repr(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_round_floats(v) for v in obj)
    return obj


def _emit(command, digest, parameters, results, caught, started) -> None:
    report = {
        "report_version": REPORT_VERSION,
        "command": command,
        "input_digest": digest,
        "parameters": _round_floats(parameters),
        "results": _round_floats(results),
        "warnings": caught,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _write_model(model: Ctmdp, out: str | None, results: dict) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(dump_model(model) + "\n")
        results["output"] = out
    else:
        results["model"] = model_to_dict(model)


def _threads_cap() -> int:
    raw = os.environ.get("CTMDP_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"CTMDP_THREADS must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise InputError(f"CTMDP_THREADS must be a positive integer, got {raw!r}")
    return cap


def _require_valid(model: Ctmdp) -> None:
    problems = validate(model)
    if problems:
        raise InputError("invalid model: " + "; ".join(problems))


def _partition_blocks(part) -> list[list[int]]:
    return [sorted(b) for b in part.blocks]


# -- subcommand bodies (each returns (results, exit_code)) -------------------


def _cmd_validate(model, args):
    problems = validate(model)
    return {"valid": not problems, "violations": problems}, 0


def _cmd_uniformize(model, args):
    _require_valid(model)
    rate = as_ratio(args.rate) if args.rate else None
    out_model = uniformize(model, rate)
    results = {"uniformization_rate": str(rate or uniformization_rate(model))}
    _write_model(out_model, args.output, results)
    return results, 0


def _cmd_minimize(model, args):
    _require_valid(model)
    mode = args.mode
    rate = as_ratio(args.rate) if args.rate else None
    partition_report = {"mode": mode}
    if mode == "strong":
        part = bisim.strong_bisimilarity(model)
    elif mode == "weak":
        part = bisim.weak_bisimilarity(model, rate)
        partition_report["uniformization_rate"] = str(rate or uniformization_rate(model))
    elif mode == "ctmc-strong":
        part = bisim.ctmc_strong(model)
    elif mode == "ctmc-weak":
        part = bisim.ctmc_weak(model)
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown mode {mode}")
    partition_report["blocks"] = _partition_blocks(part)
    results = {"partition": partition_report}
    if mode in ("strong", "ctmc-strong"):
        quotient_model = bisim.quotient(model, part)
    else:
        base = uniformize(model, rate) if mode == "weak" else model
        quotient_model = bisim.quotient(base, bisim.strong_bisimilarity(base))
    _write_model(quotient_model, args.output, results)
    return results, 0


def _cmd_classify(model, args):
    _require_valid(model)
    verdict = recurrence.classify(model)
    results = {"status": verdict.status, "relation_used": verdict.relation_used}
    if verdict.witness is not None:
        state, tr = verdict.witness
        results["witness_state"] = state
        results["witness_rate"] = str(tr.rate)
    return results, 0


def _cmd_check(model, args):
    _require_valid(model)
    formula = logic.parse(args.formula, args.dialect)
    sat_set = logic.sat(model, formula)
    states = [args.state] if args.state is not None else sorted(model.state_ids)
    rows = []
    ground = (
        logic.resolve_path(model, formula.path) if isinstance(formula, logic.Prob) else None
    )
    for s in states:
        row = {"state": s, "verdict": s in sat_set}
        if ground is not None:
            bounds = logic.ground_bounds(model, s, ground)
            row.update(
                lower=bounds.lower,
                upper=bounds.upper,
                scheduler_class=bounds.scheduler_class,
            )
        rows.append(row)
    return {"formula": logic.format_state(formula), "dialect": args.dialect, "states": rows}, 0


def _cmd_equiv(model, args):
    _require_valid(model)
    if args.mode == "strong":
        part = bisim.strong_bisimilarity(model)
    else:
        part = bisim.weak_bisimilarity(model, as_ratio(args.rate) if args.rate else None)
    answer = part.same_block(args.s, args.r)
    code = 1 if (args.fail_on_distinguished and not answer) else 0
    return {"mode": args.mode, "s": args.s, "r": args.r, "bisimilar": answer}, code


def _cmd_distinguish(model, args):
    _require_valid(model)
    try:
        found = bisim.distinguish(model, args.s, args.r)
    except bisim.BisimilarStatesError as exc:
        raise InputError(str(exc)) from exc
    results = {
        "formula": logic.format_state(found.formula),
        "satisfied_by": found.satisfied_by,
        "refuted_by": found.refuted_by,
    }
    return results, 1 if args.fail_on_distinguished else 0


def _cmd_simulate(model, args):
    _require_valid(model)
    sched = simulate.SchedulerSpec.from_dict(json.loads(_read_input(args.scheduler)))
    formula = logic.parse_path(args.formula, args.dialect)
    ground = logic.resolve_path(model, formula)
    horizon = args.horizon if args.horizon else simulate.default_horizon(ground)
    start = args.state if args.state is not None else model.initial
    paths = simulate.sample_paths(model, start, sched, horizon, args.n, args.seed)
    result = simulate.estimate(paths, ground)
    return {
        "formula": logic.format_path(formula),
        "state": start,
        "n": result.n,
        "horizon": horizon,
        "estimate_pessimistic": result.value("pessimistic"),
        "estimate_optimistic": result.value("optimistic"),
        "std_error_pessimistic": result.std_error("pessimistic"),
        "std_error_optimistic": result.std_error("optimistic"),
        "unresolved": result.unresolved,
    }, 0


def _cmd_gadget(args):
    weights = None
    if args.weights:
        weights = tuple(as_ratio(w) for w in args.weights.split(","))
    rates = None
    if args.rates:
        rates = tuple(as_ratio(r) for r in args.rates.split(","))
    params = gadgets.GadgetParams(
        variant=args.variant,
        x=as_ratio(args.x) if args.x else None,
        weights=weights,
        rates=rates,
    )
    model = gadgets.build(params)
    results = {"variant": args.variant}
    _write_model(model, args.output, results)
    return results, 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctbisim",
        description="Bisimulation, logic checking, and simulation for CTMDPs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_model(p):
        p.add_argument("model", help="model JSON file, or - for stdin")
        return p

    with_model(sub.add_parser("validate", help="report model invariant violations"))

    p = with_model(sub.add_parser("uniformize", help="rewrite to a common exit rate"))
    p.add_argument("--rate", help="override uniformization rate (>= max model rate)")
    p.add_argument("-o", "--output", help="write the model here instead of the report")

    p = with_model(sub.add_parser("minimize", help="quotient by a bisimulation"))
    p.add_argument("--mode", required=True, choices=["strong", "weak", "ctmc-strong", "ctmc-weak"])
    p.add_argument("--rate", help="uniformization rate for weak mode")
    p.add_argument("-o", "--output")

    with_model(sub.add_parser("classify", help="2-step-recurrence classification"))

    p = with_model(sub.add_parser("check", help="evaluate a state formula"))
    p.add_argument("--formula", required=True)
    p.add_argument("--dialect", default="cslstar", choices=list(logic.DIALECTS))
    p.add_argument("--state", type=int)

    p = with_model(sub.add_parser("equiv", help="decide bisimilarity of two states"))
    p.add_argument("--mode", required=True, choices=["strong", "weak"])
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rate")
    p.add_argument("--fail-on-distinguished", action="store_true")

    p = with_model(sub.add_parser("distinguish", help="synthesize a separating formula"))
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--fail-on-distinguished", action="store_true")

    p = with_model(sub.add_parser("simulate", help="Monte Carlo estimate of a path formula"))
    p.add_argument("--scheduler", required=True, help="scheduler JSON file")
    p.add_argument("--formula", required=True, help="path formula")
    p.add_argument("--dialect", default="cslstar", choices=list(logic.DIALECTS))
    p.add_argument("--state", type=int)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=float)

    p = sub.add_parser("gadget", help="build a counterexample model")
    p.add_argument("--variant", required=True, choices=list(gadgets.VARIANTS))
    p.add_argument("--x", help="parameter for example3-x")
    p.add_argument("--weights", help="comma-separated rationals for subset-sum")
    p.add_argument("--rates", help="comma-separated rates for example2-rates")
    p.add_argument("-o", "--output")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    caught: list[str] = []
    digest = None
    parameters = {
        k: v for k, v in vars(args).items() if k not in ("command",) and v is not None
    }
    parameters["threads_cap"] = None
    try:
        parameters["threads_cap"] = _threads_cap()
        with warnings.catch_warnings(record=True) as captured:
            warnings.simplefilter("always")
            if args.command == "gadget":
                results, code = _cmd_gadget(args)
            else:
                model, digest = _load(args.model)
                handler = {
                    "validate": _cmd_validate,
                    "uniformize": _cmd_uniformize,
                    "minimize": _cmd_minimize,
                    "classify": _cmd_classify,
                    "check": _cmd_check,
                    "equiv": _cmd_equiv,
                    "distinguish": _cmd_distinguish,
                    "simulate": _cmd_simulate,
                }[args.command]
                results, code = handler(model, args)
        caught = [str(w.message) for w in captured]
        _emit(args.command, digest, parameters, results, caught, started)
        return code
    except (InputError, ModelError, logic.FormulaError, simulate.SchedulerError) as exc:
        _emit(args.command, digest, parameters, {"error": str(exc)}, caught, started)
        return 2
    except json.JSONDecodeError as exc:
        message = f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}"
        _emit(args.command, digest, parameters, {"error": message}, caught, started)
        return 2


if __name__ == "__main__":
    sys.exit(main())
