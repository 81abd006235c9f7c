"""Command-line interface: ``spike-detect <command> ...``.

Exit status is 0 when the null hypothesis is kept (or the command simply
succeeded), 2 when ``detect`` rejects it, and 1 on any error. Numbers are
printed with 10 significant digits. Output depends only on the flags and
input files.
"""

import argparse
import csv
import io
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .detectors import (
    cond_decide,
    cond_pvalue,
    cond_threshold,
    glrt_decide,
    glrt_pvalue,
    glrt_threshold,
)
from .errors import DomainError, SpikeDetectError
from .io import RunReport, read_matrix_file
from .ldp import LdpContext, dominance_margins, ee_curve_T, ee_curve_U
from .simulate import (
    CHANNEL_MODES,
    SimConfig,
    empirical_pfa,
    roc_curves,
    tw_fluctuation_check,
)
from .tracy_widom import TABLE_HI, TABLE_LO, TABLE_STEP, format_rows, tabulate

EXIT_ACCEPT, EXIT_ERROR, EXIT_REJECT = 0, 1, 2

SIMULATE_EPILOG = """\
CSV columns by mode:
  pfa      trials,rejections,pfa,ci_low,ci_high,threshold
  roc      test,threshold,pfa,power,trials_h0,trials_h1
  twcheck  K,N,trials,ks_distance
"""


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def fmt(v):
    """Locale-independent 10-significant-digit rendering."""
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else ""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _csv(header_items, columns, rows):
    buf = io.StringIO()
    buf.write(f"# spike-detect {__version__}\n")
    for key, val in header_items:
        buf.write(f"# {key}={fmt(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _rho(args):
    if args.rho_db is not None:
        return 10.0 ** (args.rho_db / 10.0)
    if args.rho_linear is not None:
        return args.rho_linear
    return None


def _add_rho(p, required):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--rho-db", type=float, help="SNR in dB, converted as 10^(dB/10)")
    g.add_argument("--rho-linear", type=float, help="SNR as a linear power ratio")


def _emit(text, out):
    out.write(text)


def cmd_detect(args, out):
    y = read_matrix_file(args.file)
    if args.test == "glrt":
        d = glrt_decide(y, args.alpha)
    else:
        d = cond_decide(y, args.alpha, with_pvalue=args.pvalue)
    if args.format == "json":
        rep = RunReport(
            "detect",
            __version__,
            inputs={"file": args.file},
            config={"test": args.test, "alpha": args.alpha, "pvalue": args.pvalue},
            outputs=asdict(d),
        )
        _emit(rep.to_json(), out)
    else:
        cols = ["statistic", "threshold", "p_value", "reject_null", "test", "K", "N", "alpha"]
        row = [d.statistic_value, d.threshold, d.p_value, d.reject_null, d.test_kind, d.K, d.N, d.alpha]
        _emit(_csv([("file", args.file), ("test", args.test), ("alpha", args.alpha)], cols, [row]), out)
    return EXIT_REJECT if d.reject_null else EXIT_ACCEPT


def _scalar_report(name, args, config, key, value, out):
    if args.format == "json":
        _emit(RunReport(name, __version__, config=config, outputs={key: value}).to_json(), out)
    else:
        _emit(fmt(float(value)) + "\n", out)
    return EXIT_ACCEPT


def cmd_threshold(args, out):
    fn = glrt_threshold if args.test == "glrt" else cond_threshold
    value = fn(args.K, args.N, args.alpha)
    cfg = {"K": args.K, "N": args.N, "alpha": args.alpha, "test": args.test}
    return _scalar_report("threshold", args, cfg, "threshold", value, out)


def cmd_pvalue(args, out):
    fn = glrt_pvalue if args.test == "glrt" else cond_pvalue
    value = float(fn(args.value, args.K, args.N))
    cfg = {"K": args.K, "N": args.N, "value": args.value, "test": args.test}
    return _scalar_report("pvalue", args, cfg, "p_value", value, out)


def cmd_curves(args, out):
    rho = _rho(args)
    ctx = LdpContext(args.c, rho)
    header = [("c", args.c), ("rho", rho), ("points", args.points), ("which", args.which)]
    if args.points < 2:
        raise DomainError("--points must be at least 2")
    rows = []
    if not ctx.supercritical:
        header.append(("status", "empty: rho <= sqrt(c), no positive exponent pair is achievable"))
    else:
        if args.which in ("T", "both"):
            rows += [("T", p.a, p.b) + (("",) if args.dominance else ()) for p in ee_curve_T(ctx, args.points)]
        if args.which in ("U", "both"):
            cu = ee_curve_U(ctx, args.points)
            if args.dominance:
                m = dominance_margins(ctx, cu)
                rows += [("U", p.a, p.b, float(g)) for p, g in zip(cu, m)]
            else:
                rows += [("U", p.a, p.b) for p in cu]
    cols = ["curve", "a", "b"] + (["margin"] if args.dominance else [])
    _emit(_csv(header, cols, rows), out)
    return EXIT_ACCEPT


def _sim_config(args):
    rho = _rho(args)
    return SimConfig(
        K=args.K,
        N=args.N,
        sigma2=args.sigma2,
        rho=0.0 if rho is None else rho,
        channel_mode=args.channel,
        trials=args.trials,
        seed=args.seed,
        alpha=args.alpha,
    )


def cmd_simulate(args, out):
    cfg = _sim_config(args)
    if args.mode == "pfa":
        e = empirical_pfa(cfg)
        cols = ["trials", "rejections", "pfa", "ci_low", "ci_high", "threshold"]
        rows = [[e.trials, e.rejections, e.pfa, e.ci_low, e.ci_high, e.threshold]]
    elif args.mode == "roc":
        cols = ["test", "threshold", "pfa", "power", "trials_h0", "trials_h1"]
        rows = []
        for curve in roc_curves(cfg):
            for thr, pf, pw in zip(curve.thresholds, curve.pfa, curve.power):
                rows.append([curve.test_kind, float(thr), float(pf), float(pw), curve.trials_h0, curve.trials_h1])
    else:
        d = tw_fluctuation_check(cfg, args.hypothesis)
        cols = ["K", "N", "trials", "ks_distance"]
        rows = [[cfg.K, cfg.N, cfg.trials, d]]
    config = asdict(cfg)
    config["mode"] = args.mode
    if args.mode == "twcheck":
        config["hypothesis"] = args.hypothesis
    if args.format == "json":
        payload = [dict(zip(cols, r)) for r in rows]
        _emit(RunReport("simulate", __version__, config=config, outputs={"rows": payload}).to_json(), out)
    else:
        _emit(_csv(sorted(config.items()), cols, rows), out)
    return EXIT_ACCEPT


def cmd_tw_table(args, out):
    grid, logv, _ = tabulate(args.lo, args.hi, args.step)
    text = format_rows(grid, np.exp(logv))
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        _emit(text, out)
    return EXIT_ACCEPT


def _alpha(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def build_parser():
    p = _Parser(prog="spike-detect", description="Detect a single source with an uncalibrated sensor array.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="run a test on a matrix file")
    d.add_argument("file", help="matrix file: header 'K,N', then K rows of 2N re,im fields")
    d.add_argument("--test", choices=("glrt", "cond"), default="glrt")
    d.add_argument("--alpha", type=_alpha, default=0.05)
    d.add_argument("--pvalue", action="store_true", help="attach a p-value to the condition-number test")
    d.add_argument("--format", choices=("json", "csv"), default="json")
    d.set_defaults(usage=d.format_usage(), func=cmd_detect)

    t = sub.add_parser("threshold", help="asymptotic threshold for a level")
    t.add_argument("--K", type=int, required=True)
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--alpha", type=_alpha, required=True)
    t.add_argument("--test", choices=("glrt", "cond"), default="glrt")
    t.add_argument("--format", choices=("text", "json"), default="text")
    t.set_defaults(usage=t.format_usage(), func=cmd_threshold)

    v = sub.add_parser("pvalue", help="asymptotic p-value of a statistic value")
    v.add_argument("--K", type=int, required=True)
    v.add_argument("--N", type=int, required=True)
    v.add_argument("--value", "--t", type=float, required=True, dest="value")
    v.add_argument("--test", choices=("glrt", "cond"), default="glrt")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(usage=v.format_usage(), func=cmd_pvalue)

    c = sub.add_parser("curves", help="error-exponent curves as CSV rows")
    c.add_argument("--c", type=float, required=True)
    _add_rho(c, required=True)
    c.add_argument("--points", type=int, default=256)
    c.add_argument("--which", choices=("T", "U", "both"), default="both")
    c.add_argument("--dominance", action="store_true", help="add the GLRT margin over each U point")
    c.set_defaults(usage=c.format_usage(), func=cmd_curves)

    s = sub.add_parser(
        "simulate",
        help="Monte Carlo runs",
        epilog=SIMULATE_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--N", type=int, required=True)
    _add_rho(s, required=False)
    s.add_argument("--sigma2", type=float, default=1.0)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--mode", choices=("pfa", "roc", "twcheck"), default="pfa")
    s.add_argument("--channel", choices=CHANNEL_MODES, default="deterministic_axis")
    s.add_argument("--hypothesis", choices=("h0", "h1"), default="h0", help="twcheck only")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(usage=s.format_usage(), func=cmd_simulate)

    w = sub.add_parser("tw-table", help="tabulate the Tracy-Widom c.d.f. (cache format)")
    w.add_argument("--out", help="write here instead of standard output")
    w.add_argument("--lo", type=float, default=TABLE_LO)
    w.add_argument("--hi", type=float, default=TABLE_HI)
    w.add_argument("--step", type=float, default=TABLE_STEP)
    w.set_defaults(usage=w.format_usage(), func=cmd_tw_table)
    return p


def main(argv=None, out=None):
    """Run the CLI and return the exit status."""
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.func(args, out)
    except SpikeDetectError as exc:
        if isinstance(exc, DomainError):
            sys.stderr.write(args.usage)
        print(f"spike-detect {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"spike-detect {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
