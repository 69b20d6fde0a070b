"""Command line interface.

Exit status: 0 success, 2 invalid input, 3 precision exhausted,
4 infeasible request.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import artifact as artifact_io
from . import bounds, precision
from .dynamics import BetaContext, parse_beta
from .errors import BetaFreqError, ValidationError
from .precision import CertifiedReal, isolate_root, parse_rational


def _rationals(text: str) -> list:
    try:
        return [parse_rational(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse rational list {text!r}") from exc


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse integer list {text!r}") from exc


def _context(args) -> BetaContext:
    beta = parse_beta(args.beta, args.n)
    return BetaContext.create(args.M, beta, args.n)


def _print_value(label: str, value: CertifiedReal, decimals: int, as_json: bool):
    text = value.format(decimals)
    if as_json:
        print(json.dumps({"quantity": label, "value": text, "radius": float(value.radius)}))
    else:
        print(f"{label} = {text}  (radius {float(value.radius):.1e})")


# --------------------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    if args.beta_n is not None:
        label, value = f"beta_{args.beta_n}", bounds.beta_n(args.beta_n)
    elif args.golden is not None:
        label, value = f"G({args.golden})", bounds.generalized_golden(args.golden)
    elif args.root is not None:
        lo, hi = _rationals(args.interval)
        label = f"root of [{args.root}] in [{lo}, {hi}]"
        value = CertifiedReal.from_root(isolate_root(_ints(args.root), (lo, hi)))
    elif args.lower is not None:
        label, value = f"lower envelope n={args.lower}", bounds.lower_envelope(args.lower)
    else:
        M, n = _ints(args.upper)
        label, value = f"upper envelope M={M} n={n}", bounds.upper_envelope(M, n)
    _print_value(label, value, args.decimals, args.json)
    return 0


def cmd_table(args) -> int:
    ns = _ints(args.ns)
    rows = bounds.beta_table(args.M, ns, args.decimals)
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["n", "beta_n", "upper_bound", "flag"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from .plotting import plot_table

        plot_table(rows, args.plot)
    return 0


def _finish_artifact(stream, args) -> int:
    art = artifact_io.from_stream(stream)
    art.write(args.output)
    if args.plot:
        from .plotting import plot_artifact

        plot_artifact(art, args.plot)
    last = stream.checkpoints[-1]
    summary = {
        "artifact": args.output,
        "N": last.N,
        "counts": list(last.counts),
        "frequencies": [f"{float(f):.6f}" for f in last.frequencies()],
        "targets": [t.as_strings() for t in stream.targets],
        "sup_error": [f"{float(last.sup_error(t)):.6g}" for t in stream.targets],
        "stats": art.stats,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_synth(args) -> int:
    from .synthesis import FreqVector, synthesize

    ctx = _context(args)
    target = FreqVector(tuple(_rationals(args.target)))
    stream = synthesize(ctx, parse_rational(args.x), target, args.digits, schedule_exponent=args.schedule_exponent)
    return _finish_artifact(stream, args)


def cmd_oscillate(args) -> int:
    from .synthesis import synthesize_nonconvergent

    ctx = _context(args)
    D = _ints(args.D)
    fixed = {}
    for item in filter(None, (args.fixed or "").split(",")):
        k, _, v = item.partition("=")
        if not v:
            raise ValidationError(f"fixed frequency {item!r} must look like k=p")
        fixed[int(k)] = parse_rational(v)
    stream = synthesize_nonconvergent(ctx, parse_rational(args.x), D, fixed, args.digits)
    return _finish_artifact(stream, args)


def cmd_analyze(args) -> int:
    from .plotting import frequency_series, sup_errors

    art = artifact_io.read(args.artifact)
    report = {"N": len(art.digits), "mode": art.mode, "targets": [[str(v) for v in t] for t in art.targets]}
    if art.checkpoints:
        last = max(art.checkpoints, key=lambda c: c["N"])
        N = last["N"]
        report["final_frequencies"] = [f"{c / N:.6f}" for c in last["counts"]]
        report["sup_error"] = [
            f"{float(max(abs(Fraction(c, N) - t) for c, t in zip(last['counts'], target))):.6g}" for target in art.targets
        ]
        rounds = [c for c in art.checkpoints if c.get("kind") in ("round", "switch")]
        if art.mode == "target" and rounds:
            _, errs = sup_errors(rounds, art.targets[0])
            report["round_sup_errors_last5"] = [f"{e:.6g}" for e in errs[-5:]]
        discs = [Fraction(c.get("max_abs_discrepancy", "0")) for c in art.checkpoints]
        report["max_block_discrepancy"] = str(max(discs, default=Fraction(0)))
    report["stats"] = art.stats
    if args.q:
        q = _rationals(args.q)
        beta = parse_beta(args.beta, args.bound_n) if args.beta else art.context().beta
        if len(q) == art.M + 1 and art.mode == "target":
            report["local_dim_bound"] = bounds.local_dim_bound(art.targets[0], q, beta).format(args.decimals)
        if args.bound_n:
            report["corollary_dim_bound"] = bounds.corollary_dim_bound(args.bound_n, q, beta).format(args.decimals)
    if args.csv:
        Ns, freqs = frequency_series(art.checkpoints, art.M)
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["N"] + [f"freq_{k}" for k in range(art.M + 1)])
            for i, N in enumerate(Ns):
                writer.writerow([N] + [f"{freqs[k][i]:.8f}" for k in range(art.M + 1)])
    if args.plot:
        from .plotting import plot_artifact

        plot_artifact(art, args.plot)
    print(json.dumps(report, indent=2))
    return 0


def cmd_oracle(args) -> int:
    from .oracle import branching_profile, validate_expansion

    if args.validate:
        art = artifact_io.read(args.validate)
        report = validate_expansion(art.context(), art).to_json()
        print(json.dumps(report, indent=2))
        return 0 if report["ok"] else ValidationError.exit_code
    ctx = _context(args)
    x = ctx.upper if args.x == "top" else parse_rational(args.x)
    counts = branching_profile(ctx, x, args.depth)
    print(json.dumps({"depth_counts": counts, "violations": []}))
    return 0


# --------------------------------------------------------------------------- parser


def _add_context_args(p, *, beta_default="auto"):
    p.add_argument("--M", type=int, default=1, help="largest digit")
    p.add_argument("--n", type=int, default=1, help="frequency granularity n")
    p.add_argument(
        "--beta",
        default=beta_default,
        help="'auto' (beta_n*(1-1/1000)), 'auto:MARGIN', 'golden', a rational, or 'root:c_d,...,c_0@lo,hi' (highest degree first)",
    )


def _add_output_args(p, default: str):
    p.add_argument("--digits", type=int, default=200_000, help="number of digits to generate")
    p.add_argument("--output", default=default, help="artifact path (JSON)")
    p.add_argument("--plot", help="write a PNG of the frequency trajectories")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betafreq", description=__doc__.splitlines()[0])
    parser.add_argument("--precision", type=int, help="default working precision in bits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="print a certified constant")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--beta-n", type=int, help="root in (1,2) of x^(n+1) - x^n - 1")
    g.add_argument("--golden", type=int, metavar="M", help="generalized golden ratio for M")
    g.add_argument("--root", help="integer coefficients, highest degree first")
    g.add_argument("--lower", type=int, metavar="N", help="lower envelope 1 + (log n - log log n)/n")
    g.add_argument("--upper", metavar="M,N", help="capped entropy upper envelope")
    p.add_argument("--interval", default="1,2", help="isolating interval for --root")
    p.add_argument("--decimals", type=int, default=6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="critical bases and upper bounds")
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--ns", default=",".join(map(str, bounds.DEFAULT_TABLE_NS)))
    p.add_argument("--decimals", type=int, default=3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.add_argument("--plot", help="write a PNG of the table")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("synth", help="expansion with prescribed digit frequencies")
    _add_context_args(p)
    p.add_argument("--x", required=True, help="exact rational point to expand")
    p.add_argument("--target", required=True, help="frequency vector, e.g. 1/2,1/2")
    p.add_argument("--schedule-exponent", type=int, default=2, help="round lengths i**e")
    _add_output_args(p, "expansion.json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("oscillate", help="expansion whose frequencies on a digit set do not exist")
    _add_context_args(p)
    p.add_argument("--x", required=True)
    p.add_argument("--D", required=True, help="oscillating digits, e.g. 0,1")
    p.add_argument("--fixed", default="", help="frequencies of the other digits, e.g. 2=1/2")
    _add_output_args(p, "oscillation.json")
    p.set_defaults(func=cmd_oscillate)

    p = sub.add_parser("analyze", help="summarize an expansion artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--q", help="Bernoulli weights for the local-dimension bound")
    p.add_argument("--beta", help="base for the bound (defaults to the artifact's)")
    p.add_argument("--bound-n", type=int, help="n for the corollary bound")
    p.add_argument("--decimals", type=int, default=6)
    p.add_argument("--csv", help="write the frequency trajectory as CSV")
    p.add_argument("--plot", help="write a PNG of the frequency trajectories")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle", help="enumerate expansions or validate an artifact")
    _add_context_args(p)
    p.add_argument("--x", default="0", help="rational point, or 'top' for M/(beta-1)")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--validate", metavar="ARTIFACT", help="replay and check an artifact instead")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision:
        if args.precision < 16:
            parser.error("--precision must be at least 16 bits")
        precision.DEFAULT_PRECISION = args.precision
    try:
        return args.func(args)
    except BetaFreqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
