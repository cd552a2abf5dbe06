"""Command-line front end.

Exit status: 0 on success, 1 for bad input (unreadable file, parse or
elaboration error, unknown gate, invalid parameters), 2 for failures while
running a valid circuit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .circuit import (
    CircuitParseError,
    ElaborationError,
    bundled_circuit_text,
    elaborate,
    parse_circuit,
    run_circuit,
)
from .gates import GATE_BUILDERS, get_gate, truth_table
from .sources import (
    AttenuatedLaser,
    HeraldedLoop,
    SPDCPair,
    analytic_delivery,
    analytic_mean_cycles,
    photon_number_distribution,
    request_windows,
    simulate_heralded_source,
)

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _num(x):
    """Round to 12 significant digits for output."""
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_num(v) for v in x]
    return x


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_circuit(path: str) -> str | None:
    """File contents, falling back to a bundled circuit of the same bare name."""
    p = Path(path)
    if p.is_file():
        return p.read_text(encoding="utf-8")
    if p.parent != Path("."):
        return None
    try:
        return bundled_circuit_text(p.name)
    except OSError:
        return None


def cmd_run(args) -> int:
    text = _read_circuit(args.path)
    if text is None:
        print(f"error: cannot read circuit file {args.path!r}: file not found", file=sys.stderr)
        return EXIT_INPUT
    try:
        program = elaborate(parse_circuit(text))
    except CircuitParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.path}:{d}", file=sys.stderr)
        return EXIT_INPUT
    except ElaborationError as exc:
        print(f"{args.path}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = run_circuit(program, seed=args.seed)
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit 2
        print(f"{args.path}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.format == "json":
        _emit(json.dumps(_num(report.to_dict()), indent=2) + "\n", args.out)
    else:
        rows = [(v, p, report.acceptance_probability) for v, p in report.outputs.items()]
        _emit(_csv(["value", "probability", "acceptance_probability"], rows), args.out)
    return EXIT_OK


def cmd_truth_table(args) -> int:
    if args.gate not in GATE_BUILDERS:
        print(f"error: unknown gate {args.gate!r}; choose from {', '.join(GATE_BUILDERS)}",
              file=sys.stderr)
        return EXIT_INPUT
    if not 0.0 <= args.overlap <= 1.0:
        print(f"error: overlap {args.overlap} outside [0, 1]", file=sys.stderr)
        return EXIT_INPUT
    report = truth_table(get_gate(args.gate), args.overlap)
    data = report.to_dict()
    if args.format == "json":
        _emit(json.dumps(_num(data), indent=2) + "\n", args.out)
    else:
        header = ["input", "output", "conditional_probability", "acceptance_probability"]
        rows = []
        for inp, row in report.truth_table.items():
            cells = [(o, p) for o, p in row.items() if p > 1e-12] or [("-", 0.0)]
            rows += [(inp, o, p, report.acceptance[inp]) for o, p in cells]
        _emit(_csv(header, rows), args.out)
    return EXIT_OK


def cmd_source_stats(args) -> int:
    try:
        if args.model == "poisson":
            model = AttenuatedLaser(args.mu)
        elif args.model == "spdc":
            model = SPDCPair(args.p, args.doubles)
        else:
            model = HeraldedLoop(args.p, args.eta_sw, args.eta_loop,
                                 args.pulse_period, args.max_cycles)
            schedule = [int(x) for x in args.requests.split(",")]
            windows = request_windows(model, schedule)
        if args.trials < 1 or args.n_max < 0:
            raise ValueError("trials must be >= 1 and n-max >= 0")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.model in ("poisson", "spdc"):
        pmf = [photon_number_distribution(model, n) for n in range(args.n_max + 1)]
        if args.format == "json":
            data = {"model": args.model,
                    "pmf": [{"n": n, "probability": p} for n, p in enumerate(pmf)],
                    "p_multi": 1.0 - pmf[0] - (pmf[1] if len(pmf) > 1 else 0.0)}
            _emit(json.dumps(_num(data), indent=2) + "\n", args.out)
        else:
            _emit(_csv(["n", "probability"], list(enumerate(pmf))), args.out)
        return EXIT_OK

    stats = simulate_heralded_source(model, schedule, args.seed, args.trials)
    rows = []
    for i, (r, w) in enumerate(zip(schedule, windows)):
        analytic = analytic_delivery(model, w)
        se = stats.stderr_one[i]
        rows.append({
            "request": r,
            "window": w,
            "analytic_one": analytic,
            "mc_one": stats.p_one[i],
            "mc_stderr": se,
            "mc_vacuum": stats.p_vacuum[i],
            "mc_multi": stats.p_multi[i],
            "mc_mean_cycles": stats.mean_cycles[i],
            "analytic_mean_cycles": analytic_mean_cycles(model, w),
            "z_score": (stats.p_one[i] - analytic) / se if se > 0 else 0.0,
        })
    if args.format == "json":
        data = {"model": "loop", "trials": args.trials, "seed": args.seed, "requests": rows}
        _emit(json.dumps(_num(data), indent=2) + "\n", args.out)
    else:
        _emit(_csv(list(rows[0]), [list(r.values()) for r in rows]), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loqc", description="Linear-optics quantum gate simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report to this file instead of stdout")

    run = sub.add_parser("run", help="parse, elaborate and run a circuit file")
    run.add_argument("path")
    run.add_argument("--seed", type=int, default=None)
    common(run)
    run.set_defaults(func=cmd_run)

    tt = sub.add_parser("truth-table", help="print a gate's logical truth table")
    tt.add_argument("gate")
    tt.add_argument("--overlap", type=float, default=1.0)
    common(tt)
    tt.set_defaults(func=cmd_truth_table)

    src = sub.add_parser("source-stats", help="photon statistics of a source model")
    src.add_argument("model", choices=("poisson", "spdc", "loop"))
    src.add_argument("--mu", type=float, default=1.0)
    src.add_argument("--n-max", type=int, default=5)
    src.add_argument("--p", type=float, default=0.05)
    src.add_argument("--doubles", action="store_true", help="include second-order double pairs")
    src.add_argument("--eta-sw", type=float, default=1.0)
    src.add_argument("--eta-loop", type=float, default=1.0)
    src.add_argument("--max-cycles", type=int, default=10)
    src.add_argument("--pulse-period", type=float, default=1e-8)
    src.add_argument("--requests", default="4,9,14,19,24",
                     help="comma-separated pulse indices of photon requests")
    src.add_argument("--trials", type=int, default=100_000)
    src.add_argument("--seed", type=int, default=0)
    common(src)
    src.set_defaults(func=cmd_source_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
