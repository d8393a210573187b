"""Command line front end: ``fibwalk {analyze,simulate,verify,tables}``.

Exit codes: 0 success, 1 verification breach, 2 the walk is not absorbed
almost surely, 3 invalid input, 4 the Fibonacci path was forced on a walk
that does not support it.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import analytics, oracle
from .errors import DegenerateSpecError, FibwalkError, SpecValidationError
from .fibcore import TauTable, fibonacci
from .specdoc import parse_spec
from .walkmodel import Method, WalkSpec, constant_walk_spec, validate

EXIT_OK, EXIT_BREACH, EXIT_DIVERGENT, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2, 3, 4
MAX_TABLE_ORDER = 12


class UsageError(SpecValidationError):
    pass


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------


@dataclass
class Report:
    columns: List[str]
    rows: List[list] = field(default_factory=list)
    summary: List[Tuple[str, object]] = field(default_factory=list)


def _machine(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return "" if v is None else str(v)


def _pretty(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".6g")
    return _machine(v)


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer, float, np.floating)):
        text = _machine(v)
        return "null" if text in ("nan", "inf", "-inf") else text
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def render(report: Report, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(report.columns)]
        lines += [",".join(_csv_field(_machine(v)) for v in row) for row in report.rows]
        if report.summary:
            lines += ["", "quantity,value"]
            lines += [f"{k},{_csv_field(_machine(v))}" for k, v in report.summary]
        return "\n".join(lines) + "\n"
    if fmt == "jsonlike":
        rows = ",\n".join(
            "    {" + ", ".join(f'"{c}": {_json_value(v)}' for c, v in zip(report.columns, row)) + "}"
            for row in report.rows
        )
        summary = ",\n".join(f'    "{k}": {_json_value(v)}' for k, v in report.summary)
        return "{\n  \"rows\": [\n" + rows + "\n  ],\n  \"summary\": {\n" + summary + "\n  }\n}\n"
    # pretty
    cells = [report.columns] + [[_pretty(v) for v in row] for row in report.rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(report.columns))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    if report.summary:
        key_width = max(len(k) for k, _ in report.summary)
        lines.append("")
        lines += [f"{k.ljust(key_width)}  {_pretty(v)}" for k, v in report.summary]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _load(args) -> WalkSpec:
    doc = parse_spec(args.spec)
    spec = doc.to_spec()
    if args.start is not None:
        spec = validate(spec.with_start(args.start))
    return spec


def cmd_analyze(args) -> Tuple[int, Report]:
    spec = _load(args)
    i0 = spec.start
    arrivals = analytics.expected_arrivals(spec, i0, args.method)
    f = analytics.visit_probabilities(spec, i0, args.method)
    absorption = analytics.absorption_report(spec, i0, args.method)
    times = analytics.expected_time(spec, i0, args.method)
    report = Report(["j", "x", "f", "g", "m"])
    for j in range(spec.n_states):
        report.rows.append([j, arrivals.x[j], f[j], absorption.g[j], times.m[j]])
    notes = [t.fallback for t in (arrivals.method, times.method) if t.fallback]
    report.summary = [
        ("start", i0),
        ("u", absorption.u),
        ("leak_left", absorption.leak_left),
        ("leak_right", absorption.leak_right),
        ("method", arrivals.method.method.value),
        ("time_method", times.method.method.value),
        ("fallback", "; ".join(dict.fromkeys(notes)) or None),
    ]
    return EXIT_OK, report


def _binomial_se(prob: float, trials: int) -> float:
    return math.sqrt(max(prob * (1.0 - prob), 0.0) / trials)


def cmd_simulate(args) -> Tuple[int, Report]:
    spec = _load(args)
    sim = oracle.simulate(spec, spec.start, args.trials, args.seed, args.max_steps, args.workers)
    report = Report(["j", "g", "g_stderr", "visits"])
    for j in range(spec.n_states):
        g = sim.absorb_fraction[j]
        report.rows.append([j, g, _binomial_se(g, sim.trials), sim.visit_means[j]])
    report.summary = [
        ("start", sim.start),
        ("trials", sim.trials),
        ("seed", sim.seed),
        ("u", sim.u),
        ("u_stderr", _binomial_se(sim.u, sim.trials)),
        ("exit_left", sim.exit_left),
        ("exit_right", sim.exit_right),
        ("truncated", sim.truncated),
        ("mean_steps", sim.mean_steps),
        ("stderr_steps", sim.stderr_steps),
    ]
    return EXIT_OK, report


def _relative(value: float, reference: float) -> float:
    if value == reference:
        return 0.0
    return abs(value - reference) / max(abs(reference), abs(value))


def _z(value: float, reference: float, se: float) -> float:
    if value == reference:
        return 0.0
    return abs(value - reference) / se if se > 0 else math.inf


def _constant_family(spec: WalkSpec) -> Optional[Tuple[float, float]]:
    """``(p, q)`` if ``spec`` is a constant walk with inward-only borders."""
    if spec.n < 1 or spec.start != 0:
        return None
    p, q = spec.p[0], spec.q[spec.n]
    model = constant_walk_spec(spec.n, p, q)
    if (model.p, model.q, model.r) == (spec.p, spec.q, spec.r) and np.allclose(model.s, spec.s, atol=1e-15, rtol=0):
        return p, q
    return None


def cmd_verify(args) -> Tuple[int, Report]:
    spec = _load(args)
    i0 = spec.start
    report = Report(["check", "quantity", "reference", "value", "deviation", "tolerance", "status"])
    breaches = []

    def check(kind, name, reference, value, deviation, tol):
        ok = deviation <= tol
        report.rows.append([kind, name, reference, value, deviation, tol, "ok" if ok else "FAIL"])
        if not ok:
            breaches.append(f"{name} ({kind} deviation {deviation:.3g} > {tol:g})")

    x_direct = analytics.expected_arrivals(spec, i0, "direct").x
    m_direct = analytics.expected_time(spec, i0, "direct").m

    try:
        x_fib = analytics.expected_arrivals(spec, i0, "fib").x
        m_fib = analytics.expected_time(spec, i0, "fib").m
    except DegenerateSpecError as exc:
        report.summary.append(("notice", f"fibonacci path skipped: {exc}"))
    else:
        for name, fib, ref in (("x", x_fib, x_direct), ("m", m_fib, m_direct)):
            devs = [_relative(a, b) for a, b in zip(fib, ref)]
            k = int(np.argmax(devs))
            check("fib-direct", f"{name}[{k}]", ref[k], fib[k], devs[k], args.tol_analytic)

    family = _constant_family(spec)
    if family is not None:
        closed = analytics.constant_walk_x0(spec.n, *family)
        check("continuant", "x[0]", closed, x_direct[0], _relative(x_direct[0], closed), 1e-12)
        if args.printed_binomials:
            printed = analytics.constant_walk_x0_printed(spec.n, *family)
            report.summary.append(("printed_binomial_x0", printed))
            report.summary.append(("printed_binomial_deviation", _relative(printed, closed)))

    sim = oracle.simulate(spec, i0, args.trials, args.seed, args.max_steps, args.workers)
    absorption = analytics.absorption_report(spec, i0, "direct")
    targets = [(f"g[{j}]", absorption.g[j], sim.absorb_fraction[j]) for j in range(spec.n_states)]
    targets += [("leak_left", absorption.leak_left, sim.exit_left / sim.trials),
                ("leak_right", absorption.leak_right, sim.exit_right / sim.trials)]
    for name, ref, emp in targets:
        check("sim-direct z", name, ref, emp, _z(emp, ref, _binomial_se(ref, sim.trials)), args.tol_sigma)
    visit_se = np.sqrt(analytics.occupancy_variance(spec, i0, "direct") / sim.trials)
    for j in range(spec.n_states):
        check("sim-direct z", f"visits[{j}]", x_direct[j], sim.visit_means[j],
              _z(sim.visit_means[j], x_direct[j], visit_se[j]), args.tol_sigma)
    check("sim-direct z", "mean_steps", m_direct[i0], sim.mean_steps,
          _z(sim.mean_steps, m_direct[i0], sim.stderr_steps), args.tol_sigma)

    report.summary += [("start", i0), ("trials", sim.trials), ("seed", sim.seed),
                       ("truncated", sim.truncated), ("breaches", len(breaches))]
    if breaches:
        raise _Breach("verification failed: " + "; ".join(breaches), report)
    return EXIT_OK, report


class _Breach(FibwalkError):
    exit_code = EXIT_BREACH

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def cmd_tables(args) -> Tuple[int, Report]:
    n = args.order
    if not 0 <= n <= MAX_TABLE_ORDER:
        raise UsageError(f"table order must be in 0..{MAX_TABLE_ORDER}, got {n}")
    table = TauTable.from_rule(n)
    report = Report(["row"] + [str(j) for j in range(1, table.n_columns + 1)])
    for i, row in enumerate(table.rows(), start=1):
        report.rows.append([i] + row)
    report.summary = [("order", n), ("columns", fibonacci(n))]
    return EXIT_OK, report


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fibwalk", description="Absorption analytics for nearest-neighbour walks on 0..N.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, with_method=False, with_sim=False):
        p.add_argument("spec", help="walk specification file (JSON)")
        p.add_argument("--start", type=int, help="start state (default: the file's start, else 0)")
        if with_method:
            p.add_argument("--method", default="auto", choices=["fib", "direct", "auto"])
        if with_sim:
            p.add_argument("--trials", type=_positive, default=100_000)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-steps", type=_positive, default=oracle.DEFAULT_MAX_STEPS)
            p.add_argument("--workers", type=_positive, default=1)
        p.add_argument("--format", default="pretty", choices=["csv", "jsonlike", "pretty"])

    common(sub.add_parser("analyze", help="expected arrivals, visit and absorption probabilities, times"),
           with_method=True)
    common(sub.add_parser("simulate", help="Monte Carlo estimates"), with_sim=True)
    verify = sub.add_parser("verify", help="cross-check Fibonacci, direct and simulated results")
    common(verify, with_sim=True)
    verify.add_argument("--tol-analytic", type=float, default=1e-8)
    verify.add_argument("--tol-sigma", type=float, default=4.0)
    verify.add_argument("--printed-binomials", action="store_true",
                        help="also report the binomial form with shifted limits")
    tables = sub.add_parser("tables", help="print the symbolic product table of a given order")
    tables.add_argument("--order", type=int, required=True)
    tables.add_argument("--format", default="pretty", choices=["csv", "jsonlike", "pretty"])
    return parser


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "verify": cmd_verify, "tables": cmd_tables}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "method", None):
            args.method = Method.parse(args.method)
        code, report = COMMANDS[args.command](args)
    except _Breach as exc:
        stdout.write(render(exc.report, args.format))
        stderr.write(f"fibwalk: {exc}\n")
        return exc.exit_code
    except FibwalkError as exc:
        stderr.write(f"fibwalk: {exc}\n")
        return exc.exit_code
    except ValueError as exc:
        stderr.write(f"fibwalk: {exc}\n")
        return EXIT_INVALID
    stdout.write(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
