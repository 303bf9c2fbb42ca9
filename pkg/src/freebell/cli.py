"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Sequence, TextIO

from freebell import ARTIFACT_NAME, __version__, lhv_core, mermin, qkd, security

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2

CSV_HEADER = (*security.CURVE_FIELDS, "verdict")
MAX_STEPS = 1_000_000
Z_LIMIT = 4.0
SEED_ENV = "FREEBELL_SEED"

MODES = {"aggregate": "aggregate", "uniform-signed": "uniform_signed", "all-positive": "all_positive"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    """Nine significant digits, as used in every CSV/JSON number."""
    return f"{x:.9g}"


def _frac(x: Fraction) -> str:
    return str(x) if x.denominator == 1 else f"{x} ({fmt(float(x))})"


def cmd_chsh_freedom(args: argparse.Namespace, out: TextIO) -> int:
    mode = MODES[args.mode]
    value = lhv_core.minimal_delta(mode, lhv_core.QUANTUM_CHSH)
    measured, mixture = lhv_core.conspiracy_model_extremal()
    _, delta = lhv_core.delta_chsh(measured, lhv_core.CondProbTable.from_distribution(mixture))
    print(f"mode: {args.mode}", file=out)
    print(f"quantum CHSH value: {fmt(lhv_core.QUANTUM_CHSH)}", file=out)
    print(f"minimal delta: {fmt(value)}", file=out)
    print("setting-aware source, P(X=Y|kl):", file=out)
    for kl in lhv_core.SETTING_PAIRS:
        print(f"  {kl[0]}{kl[1]}: {fmt(measured[kl])}", file=out)
    print(f"  S_delta = {fmt(lhv_core.chsh_measured_value(measured))}", file=out)
    print(f"  S_CHSH of emitted mixture = {fmt(lhv_core.chsh_math_value(mixture))}", file=out)
    print(f"  Delta_CHSH = {fmt(delta)}", file=out)
    return EXIT_OK


def cmd_mermin(args: argparse.Namespace, out: TextIO) -> int:
    n = args.n
    if n < 2:
        raise UsageError(f"--n must be at least 2, got {n}")
    if args.verify and n > mermin.BRUTE_FORCE_MAX_N:
        raise UsageError(f"--verify is capped at n <= {mermin.BRUTE_FORCE_MAX_N}, got {n}")
    print(f"n: {n}", file=out)
    print(f"B(n): {_frac(mermin.lhv_bound(n))}", file=out)
    print(f"M_QM(n): {_frac(mermin.quantum_max(n))}", file=out)
    print(f"Delta_Merm: {_frac(mermin.min_delta_merm(n))}", file=out)
    print(f"Delta_N: {_frac(mermin.per_setting_delta(n))}", file=out)
    if not args.verify:
        return EXIT_OK
    lo, hi = mermin.brute_force_extrema(n, workers=args.workers)
    ok = hi == mermin.lhv_bound(n)
    print(f"brute force: max={hi} min={lo} over {4**n} assignments -> {'OK' if ok else 'MISMATCH'}", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def _sweep_rows(q_min: float, q_max: float, steps: int) -> list[dict[str, str]]:
    rows = []
    for q in security.q_grid(q_min, q_max, steps):
        curves = security.security_curves(float(q))
        row = {k: fmt(v) for k, v in curves.as_dict().items()}
        row["verdict"] = str(security.security_verdict(float(q)))
        rows.append(row)
    return rows


def cmd_qkd_analytic(args: argparse.Namespace, out: TextIO) -> int:
    for name in ("q_min", "q_max"):
        v = getattr(args, name)
        if not qkd.Q_MIN <= v <= qkd.Q_MAX:
            raise UsageError(f"--{name.replace('_', '-')} must lie in [0.125, 1], got {v}")
    if not args.q_min < args.q_max:
        raise UsageError("--q-min must be smaller than --q-max")
    if not 2 <= args.steps <= MAX_STEPS:
        raise UsageError(f"--steps must lie in [2, {MAX_STEPS}]")
    rows = _sweep_rows(args.q_min, args.q_max, args.steps)
    if args.format == "csv":
        writer = csv.DictWriter(out, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    else:
        doc = {
            "artifact": ARTIFACT_NAME,
            "version": __version__,
            "config": {"q_min": args.q_min, "q_max": args.q_max, "steps": args.steps},
            "columns": list(CSV_HEADER),
            "rows": rows,
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def cmd_qkd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    try:
        q = qkd.check_q(args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.runs < 1:
        raise UsageError("--runs must be positive")
    seed = _seed(args.seed)
    if seed < 0:
        raise UsageError("seed must be non-negative")
    ledger = qkd.run_simulation(q, args.runs, seed, workers=args.workers)
    if args.ledger:
        with open(args.ledger, "w", encoding="utf-8") as fh:
            fh.write(ledger.to_json() + "\n")
    try:
        stats = qkd.estimate_statistics(ledger)
    except ValueError as exc:
        raise UsageError(f"{exc}; increase --runs") from None
    rows = qkd.compare_with_analytic(stats, q)
    rows.append(qkd.Comparison("P(X=+1)", stats.alice_plus.value, 0.5, stats.alice_plus.std_error))

    print(f"q={fmt(q)} runs={args.runs} seed={seed} rng={qkd.RNG_NAME}", file=out)
    print(f"{'quantity':<12} {'estimate':>12} {'std_err':>12} {'analytic':>12} {'z':>8}", file=out)
    for c in rows:
        print(f"{c.name:<12} {c.estimate:>12.6f} {c.std_error:>12.6f} {c.expected:>12.6f} {c.z:>8.2f}", file=out)
    worst = max(abs(c.z) for c in rows)
    ok = worst <= Z_LIMIT
    print(f"max |z| = {worst:.2f} ({'OK' if ok else 'FAIL'}, limit {Z_LIMIT:g})", file=out)
    if q > security.thresholds().q_qm:
        print("note: S(q) exceeds 1+sqrt(2); a real eavesdropper would have to damp this attack", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


# Two-decimal values quoted in the literature for comparison.
_ROUNDED = {"q_cl": "0.44", "q_0": "0.63", "q_qm": "0.67", "d_0": "0.15"}


def cmd_thresholds(args: argparse.Namespace, out: TextIO) -> int:
    t = security.thresholds()
    for name in ("q_cl", "q_0", "q_qm", "d_0"):
        print(f"{name}: {getattr(t, name):.6f}  (rounded {_ROUNDED[name]})", file=out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    from freebell import verification

    results = verification.run_all()
    for r in results:
        print(r.line(), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freebell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("chsh-freedom", help="minimal lack of freedom for the quantum CHSH value")
    p.add_argument("--mode", choices=sorted(MODES), default="aggregate")
    p.set_defaults(func=cmd_chsh_freedom)

    p = sub.add_parser("mermin", help="N-party Mermin bounds and Delta_N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--verify", action="store_true", help="check B(n) by exhaustive enumeration")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mermin)

    p = sub.add_parser("qkd-analytic", help="closed-form security curves as a q sweep")
    p.add_argument("--q-min", type=float, default=qkd.Q_MIN)
    p.add_argument("--q-max", type=float, default=qkd.Q_MAX)
    p.add_argument("--steps", type=int, default=876)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_qkd_analytic)

    p = sub.add_parser("qkd-simulate", help="Monte Carlo run of the protocol under the attack")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--runs", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV}, else 0")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ledger", metavar="FILE", help="also write the run ledger as JSON")
    p.set_defaults(func=cmd_qkd_simulate)

    p = sub.add_parser("thresholds", help="critical knowledge values")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("verify", help="run the full verification battery")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        print(f"freebell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
