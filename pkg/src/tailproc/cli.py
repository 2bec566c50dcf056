"""Command-line entry point ``tailproc``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
Runtime errors print one line ``error: <Type>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import asymvar, bench, estimators, models, rs, spectral
from .exceptions import TailProcError
from .validation import linear_grid

FIXTURES_ENV = "TAILPROC_FIXTURES"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: usage error: {message}\n")


def _float(text: str) -> float:
    # float() is locale independent
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (_float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return lo, hi, step


def _set(text: str) -> spectral.IntervalSet:
    try:
        return spectral.IntervalSet.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def resolve_fixture(path: str) -> Path:
    """``path`` itself if it exists, else its name under ``$TAILPROC_FIXTURES``."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    root = os.environ.get(FIXTURES_ENV)
    if root:
        for cand in (Path(root) / p, Path(root) / p.name):
            if cand.exists():
                return cand
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_series_values(path: str) -> np.ndarray:
    with open(resolve_fixture(path)) as fh:
        return np.array([float(line) for line in fh if line.strip() and not line.lstrip().startswith("#")])


def _series_from_args(args, padding: int) -> tuple[estimators.Series, str]:
    """Series with ``padding`` on each side of an ``n``-long core (model) or of the file."""
    if args.input is not None:
        values = _read_series_values(args.input)
        return estimators.Series.padded(values, padding), f"file:{args.input}"
    if args.seed is None:
        raise _UsageError("--seed is required when simulating from --model")
    if args.n is None:
        raise _UsageError("--n is required when simulating from --model")
    spec = models.ModelSpec(args.model, args.seed)
    return models.simulate(spec, args.n + 2 * padding, padding=padding), str(args.seed)


# -- subcommands --------------------------------------------------------------


def cmd_simulate(args) -> int:
    spec = models.ModelSpec(args.model, args.seed, args.burn_in)
    values = models.simulate_values(spec, args.n)
    _emit("".join(f"{v:.17g}\n" for v in values), args.out)
    return 0


def cmd_estimate(args) -> int:
    cfg = estimators.EstimatorConfig(estimators.Quantile(args.q), args.sn, args.lag, args.alpha)
    series, source = _series_from_args(args, cfg.padding)
    names = ["forward", "backward", "projection_hat"] + (["projection"] if args.alpha is not None else [])
    report = estimators.cdf_curve(series, cfg, linear_grid(*args.x_grid), names)
    report.meta = {"u_n": report.meta["u_n"], "alpha_hat": report.meta["alpha_hat"], "s_n": cfg.s_n,
                   "i": cfg.lag, "seed": source, "n": series.n}
    _emit(report.to_csv(names), args.out)
    return 0


def cmd_hill(args) -> int:
    series, _ = _series_from_args(args, 0)
    u = args.u if args.u is not None else estimators.threshold(series, estimators.Quantile(args.q))
    _emit(f"u_n,alpha_hat,exceedances\n{u:.17g},{estimators.hill(series, u):.17g},"
          f"{int(np.sum(np.abs(series.core) > u))}\n", args.out)
    return 0


def cmd_benchmark(args) -> int:
    cfg = bench.parse_bench_config(Path(args.config).read_text())
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    report = bench.run_bench(cfg, workers=threads)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "meta.json").write_text(report.meta_json())
    status = report.meta["status"]
    print(f"{status}: {report.meta['successful']}/{report.meta['replications']} replications; "
          f"wrote {out / 'report.csv'}", file=sys.stderr)
    return 0


def cmd_asymvar(args) -> int:
    if args.model != "example":
        raise _UsageError(f"--model {args.model}: only 'example' has a discrete spectral law")
    if (args.p is None) == (args.p_grid is None):
        raise _UsageError("give exactly one of --p and --p-grid")
    ps = [args.p] if args.p is not None else linear_grid(*args.p_grid).tolist()
    lines = ["p,var_proj_hat,var_backward,var_forward,var_proj_known"]
    for p in ps:
        row = asymvar.variance_table(asymvar.example_law(p, args.a, args.b), args.lag, args.set)
        lines.append(f"{p:.10g},{row['var_proj_hat']:.17g},{row['var_backward']:.17g},"
                     f"{row['var_forward']:.17g},{row['var_proj_known']:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _sci(v: float) -> str:
    mant, exp = f"{v:.1e}".split("e")
    return f"{mant}e{int(exp)}"


def cmd_verify(args) -> int:
    with open(resolve_fixture(args.law)) as fh:
        law = spectral.load_law(fh)
    ok, tv = rs.is_rs_invariant(law, args.tol)
    residual = rs.max_time_change_residual(law)
    sys.stdout.write(f"RS-invariant: {'yes' if ok else 'no'} (TV={_sci(tv)})\n"
                     f"time-change residual max: {_sci(residual)}\n")
    if not ok or residual > args.tol:
        print("error: VerificationFailed: law is not a spectral tail law at the given tolerance",
              file=sys.stderr)
        return 1
    return 0


# -- parser -------------------------------------------------------------------


def _add_source(p):
    p.add_argument("--input", help="one value per line (alternative to --model)")
    p.add_argument("--model", choices=sorted(models.DEFAULT_PARAMS), default="garcht")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="core length when simulating")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailproc", description="Spectral tail process estimation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a simulated series, one value per line")
    p.add_argument("--model", choices=sorted(models.DEFAULT_PARAMS), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="cdf of Theta_i on a grid of (-inf, x]")
    _add_source(p)
    p.add_argument("--q", type=_float, default=0.95)
    p.add_argument("--sn", type=int, default=30)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--alpha", type=_float, help="known tail index; adds the projection column")
    p.add_argument("--x-grid", type=_range, default=(-2.0, 2.0, 0.01), metavar="LO:HI:STEP")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("hill", help="Hill estimate of the tail index")
    _add_source(p)
    p.add_argument("--q", type=_float, default=0.95)
    p.add_argument("--u", type=_float, help="absolute threshold (overrides --q)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hill)

    p = sub.add_parser("benchmark", help="Monte Carlo comparison of the estimators")
    p.add_argument("--config", required=True, help="key=value or JSON config file")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output directory for report.csv and meta.json")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("asymvar", help="asymptotic variances for a discrete spectral law")
    p.add_argument("--model", default="example")
    p.add_argument("--p", type=_float)
    p.add_argument("--p-grid", type=_range, metavar="LO:HI:STEP")
    p.add_argument("--a", type=_float, default=10.0)
    p.add_argument("--b", type=_float, default=2.0)
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--set", type=_set, required=True, metavar="le:X|gt:X|all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymvar)

    p = sub.add_parser("verify", help="check RS-invariance and the time-change formula")
    p.add_argument("--law", required=True)
    p.add_argument("--tol", type=_float, default=1e-10)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tailproc: usage error: {exc}", file=sys.stderr)
        return 2
    except (TailProcError, ValueError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
