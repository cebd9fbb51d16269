"""``fwci`` command line: estimate | bench | sizes | cost.

Exit codes: 0 success, 2 usage, 3 guarantee void (budget hit), 4 I/O error.
Options may also come from ``--config FILE`` (``key=value`` lines, keys are
the long flag names); command-line flags override the file.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__, costmodel, samplesize
from .engine import DEFAULT_N_MAX, FloorPolicy, run_two_stage
from .errors import FWCIError
from .harness import (
    ExperimentConfig,
    Problem,
    build_problem,
    format_csv,
    run_bench,
    summarize,
)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4

FULL_REPLICATIONS = 500
DESK_REPLICATIONS = 100


def _int(text):
    # accept 1e9 and 2**13 style values for sizes
    text = str(text).strip()
    if "**" in text:
        base, exp = text.split("**")
        return int(base) ** int(exp)
    val = float(text)
    if val != int(val):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text}")
    return int(val)


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _add_engine_flags(p, eps_default=None):
    p.add_argument("--seed", type=_int, default=0, help="seed (64-bit)")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--eps", type=float, default=eps_default, help="interval half-width")
    p.add_argument("--n-sigma", type=_int, default=8192)
    p.add_argument("--inflation", type=float, default=1.1)
    p.add_argument("--n-max", type=_int, default=DEFAULT_N_MAX)
    p.add_argument("--floor", choices=["one", "nsigma"], default="nsigma")
    p.add_argument("--full-scale", action="store_true",
                   help="500 replications and the full 1e9 budget")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _add_problem_flags(p):
    p.add_argument("--problem", choices=[m.value for m in Problem], default="hump")
    p.add_argument("--d", dest="d_spec", default=None,
                   help="dimension: fixed (4), range (2-8) or list (1,2,4)")
    p.add_argument("--v", type=float, default=None, help="option volatility (default: drawn)")
    p.add_argument("--S0", type=float, default=100.0)
    p.add_argument("--K", type=float, default=100.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.03)
    p.add_argument("--constant", type=float, default=1.0, help="value of the constant problem")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwci", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fwci {__version__}")
    parser.add_argument("--config", default=None, help="key=value options file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="one two-stage estimate")
    _add_engine_flags(p)
    _add_problem_flags(p)

    p = sub.add_parser("bench", help="batch of seeded replications to CSV")
    _add_engine_flags(p)
    _add_problem_flags(p)
    p.add_argument("--replications", type=_int, default=DESK_REPLICATIONS)
    p.add_argument("--workers", type=_int, default=1)

    p = sub.add_parser("sizes", help="sample-size table")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--m3", type=float, default=None,
                   help="third-moment bound (default kappa_max**0.75 of --kappa-max)")
    p.add_argument("--kappa-max", type=float, default=2.0)
    p.add_argument("--floor", type=_int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("cost", help="cost-ratio curves as CSV")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--kappa-max", type=_floats, default=[2.0, 10.0, 100.0])
    p.add_argument("--n-sigma-rule", type=float, default=4000.0,
                   help="heuristic n_sigma = RULE * kappa_max")
    p.add_argument("--grid", type=_floats, default=None, help="sigma/eps values")
    p.add_argument("--n-clt-range", type=_floats, default=[1e2, 1e8],
                   help="lo,hi of the default log grid in N_CLT")
    p.add_argument("--points", type=_int, default=25)
    p.add_argument("--out", default=None)
    return parser


def _read_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"config line without '=': {line!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(parser, argv, path):
    values = _read_config(path)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    rename = {"d": "d_spec"}
    for sp in sub_action.choices.values():
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, value in values.items():
            dest = rename.get(key, key)
            act = known.get(dest)
            if act is None:
                continue
            if isinstance(act, argparse._StoreTrueAction):
                defaults[dest] = value.lower() in ("1", "true", "yes", "on")
            elif act.type is not None:
                defaults[dest] = act.type(value)
            else:
                defaults[dest] = value
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _experiment_config(args, replications=1) -> ExperimentConfig:
    n_max = args.n_max
    if getattr(args, "full_scale", False):
        replications = FULL_REPLICATIONS
        n_max = DEFAULT_N_MAX
    return ExperimentConfig(
        problem=args.problem,
        replications=replications,
        epsilon=args.eps,
        alpha=args.alpha,
        inflation=args.inflation,
        n_sigma=args.n_sigma,
        n_max=n_max,
        floor_policy=FloorPolicy(args.floor),
        d_spec=args.d_spec,
        master_seed=args.seed,
        v=args.v,
        S0=args.S0,
        K=args.K,
        T=args.T,
        r=args.r,
        constant=args.constant,
    )


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_estimate(args) -> int:
    cfg = _experiment_config(args)
    inst = build_problem(cfg, args.seed)
    rep = run_two_stage(inst.sampler, cfg.engine_config(), args.seed)
    line = (
        f"mu_hat={rep.mu_hat!r} mu_exact={inst.mu_exact!r} n_total={rep.n_total} "
        f"n_mu={rep.n_mu} selector={rep.selector} budget_truncated={int(rep.budget_truncated)} "
        f"kappa_max={rep.kappa_max_used:.6g} sigma_hat={math.sqrt(rep.sigma_hat_sq):.6g}\n"
    )
    _emit(line, args.out)
    return EXIT_BUDGET if rep.budget_truncated else EXIT_OK


def cmd_bench(args) -> int:
    cfg = _experiment_config(args, replications=args.replications)
    records = run_bench(cfg, workers=args.workers)
    summary = summarize(records)
    text = format_csv(cfg, records, summary)
    _emit(text, args.out)
    if args.out is not None:
        for k, v in summary.items():
            print(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return EXIT_OK


def cmd_sizes(args) -> int:
    m3 = args.m3 if args.m3 is not None else args.kappa_max**0.75
    row = {
        "N_CLT": samplesize.n_clt(args.eps, args.sigma, args.alpha),
        "N_Cheb": samplesize.n_cheb(args.eps, args.sigma, args.alpha),
        "N_BE": samplesize.n_be(args.eps, args.sigma, args.alpha, m3),
    }
    size, sel = samplesize.n_mu(args.eps, args.sigma, args.alpha, m3, floor=args.floor)
    row["N_mu"] = size
    row["selector"] = str(sel)
    header = " ".join(f"{k:>12}" for k in row)
    values = " ".join(f"{v!s:>12}" for v in row.values())
    _emit(header + "\n" + values + "\n", args.out)
    return EXIT_OK


def cmd_cost(args) -> int:
    if args.grid is not None:
        grid = args.grid
    else:
        lo, hi = args.n_clt_range
        grid = [costmodel.sigma_over_eps_for_n_clt(n, args.alpha)
                for n in np.geomspace(lo, hi, args.points)]
    rule = args.n_sigma_rule
    cols = ["sigma_over_eps", "n_clt", "n_up", "ratio", "regime", "n_sigma", "inflation",
            "kappa_max", "mode"]
    lines = [f"# fwci {__version__} cost alpha={args.alpha} beta={args.beta} n_sigma_rule={rule}\n"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for k in args.kappa_max:
        for mode, nrule in (("heuristic", lambda km: int(math.ceil(rule * km))), ("optimized", None)):
            for prof in costmodel.cost_curve(args.alpha, args.beta, k, nrule, grid):
                w.writerow([repr(prof.sigma_over_eps), prof.n_clt, prof.n_up, repr(prof.ratio),
                            str(prof.regime), prof.n_sigma, repr(prof.inflation), repr(k), mode])
    _emit("".join(lines) + buf.getvalue(), args.out)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "bench": cmd_bench, "sizes": cmd_sizes, "cost": cmd_cost}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.config:
        try:
            args = _apply_config(parser, argv, args.config)
        except OSError as exc:
            print(f"fwci: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        except (ValueError, argparse.ArgumentTypeError) as exc:
            print(f"fwci: bad config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except SystemExit as exc:
            return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (FWCIError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"fwci: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fwci: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
