"""Command-line front end: ``smallgaps <subcommand> [flags]``.

Exit codes: 0 success, 1 other failure, 2 hypothesis violation,
3 precision or ambiguity failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from dataclasses import asdict, fields
from fractions import Fraction

import numpy as np

from . import __version__
from .coverings import (
    MertensRow,
    OverlapRow,
    SmoothRoughSplit,
    chung_erdos_check,
    covering_family,
    mertens_lower_check,
    overlap_table,
    parse_psi,
    smooth_rough_split,
)
from .diffset import CARDINALITY_COLUMNS, CoverageError, build, cardinality_report
from .experiments import (
    CONFIG_KEYS,
    FORMULA_IDS,
    SLOPE_COLUMNS,
    VERDICT_COLUMNS,
    CampaignConfig,
    alpha_float,
    default_families,
    load_config,
    log_grid,
    parse_family_line,
    run_campaign,
    sample_alphas,
)
from .gaps import GAP_COLUMNS, VARIANTS, format_value, gap_curve, make_alpha
from .numeric import AmbiguityError, DomainError, HypothesisError
from .pairstats import PAIRSTAT_COLUMNS, gcd_sum_bound, gcd_sum_profile, mean_variance_experiment
from .sequences import SpecError, generate, parse_family
from .zeroone import evaluate_series, parse_threshold

SCHEMA_VERSION = 1
EXIT_OK, EXIT_OTHER, EXIT_HYPOTHESIS, EXIT_AMBIGUITY, EXIT_USAGE = 0, 1, 2, 3, 64

GRAMMAR = """\
family grammar:  name:param1,param2
  arithmetic:a,d   polynomial:theta   beatty:theta   lacunary:c   fibonacci
  explicit:v1,v2,...   smooth:f(params)@<family>  with f in exp, sinh, xlogx,
  xklog(k), affine(m,d), power(t)
constants: e, pi, phi, sqrt<k>; rationals as 3/7 or decimals
alpha:     0.305, 3/7, 0x0.4f (hex fraction), phi, frac:phi
grid:      '100' | '10,20,50' | '2:500' (inclusive range) | 'log:10:5000:60'
"""

SEQ_COLUMNS = ("n", "a_n")
SERIES_COLUMNS = ("k", "term", "partial_sum")
GCD_COLUMNS = ("H", "gcd_sum", "ratio", "bound")
MERTENS_COLUMNS = tuple(f.name for f in fields(MertensRow))
SPLIT_COLUMNS = tuple(f.name for f in fields(SmoothRoughSplit))
OVERLAP_COLUMNS = tuple(f.name for f in fields(OverlapRow))

SCHEMAS = {
    "seq": {"csv": SEQ_COLUMNS},
    "diffset": {"csv": CARDINALITY_COLUMNS},
    "gaps": {"csv": GAP_COLUMNS},
    "verify": {"verdicts.csv": VERDICT_COLUMNS, "slopes.csv": SLOPE_COLUMNS, "config_keys": tuple(CONFIG_KEYS)},
    "series": {"csv": SERIES_COLUMNS, "json": ("K_max", "B_max", "L_max", "partial_sum", "verdict", "growth_fit", "tail_majorant", "fast_path", "is_lower_bound")},
    "pairstats": {"csv": PAIRSTAT_COLUMNS, "gcd csv": GCD_COLUMNS},
    "cover": {"mertens csv": MERTENS_COLUMNS, "split csv": SPLIT_COLUMNS, "overlap json": OVERLAP_COLUMNS, "chung-erdos json": ("lhs", "rhs", "holds")},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{GRAMMAR}")
        raise SystemExit(EXIT_USAGE)


def parse_grid(text: str) -> list[int]:
    t = text.strip()
    if t.startswith("log:"):
        parts = t[4:].split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad grid {text!r}")
        return log_grid(int(parts[0]), int(parts[1]), int(parts[2]) if len(parts) == 3 else 60)
    if ":" in t:
        lo, hi = t.split(":")
        return list(range(int(lo), int(hi) + 1))
    return sorted({int(x) for x in t.split(",") if x.strip()})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, family: bool = True, n: bool = True) -> None:
    p.add_argument("--config", help="INI file; section [<subcommand>] supplies flag defaults")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (directory for verify); default stdout")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--precision-cap", type=int, help="precision cap in bits (default 2048)")
    p.add_argument("--schema", action="store_true", help="print the output column contract and exit")
    if family:
        p.add_argument("--family", help="sequence spec, e.g. polynomial:2")
    if n:
        p.add_argument("--n", type=int, help="window size N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="smallgaps",
        description="Minimal gaps of alpha-dilated difference sets modulo one.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"smallgaps {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("seq", help="emit the first N terms")
    _common(p)
    p.add_argument("--digits", type=int, default=30, help="digits for irrational terms")

    p = sub.add_parser("diffset", help="cardinality report C, D, H, T, B, B~")
    _common(p)
    p.add_argument("--all", action="store_true", help="one row for every N from 1 to --n")

    p = sub.add_parser("gaps", help="gap curves")
    _common(p)
    p.add_argument("--alpha", help="multiplier alpha")
    p.add_argument("--variant", choices=VARIANTS + ("all",), default="std")
    p.add_argument("--grid", help="N grid (default: just --n)")
    p.add_argument("--no-argmin", action="store_true", help="skip the argmin pair columns")

    p = sub.add_parser("verify", help="Monte Carlo bound campaigns")
    _common(p)
    p.add_argument("--seed", type=int, help="required: seed of the alpha sample")
    p.add_argument("--families", nargs="+", help="family specs, optionally 'spec|N'")
    p.add_argument("--formula", nargs="+", choices=FORMULA_IDS, help="formulas (default all)")
    p.add_argument("--alphas", type=int, default=200, help="alpha sample size")
    p.add_argument("--fit-alphas", type=int, default=50, help="slope-fit sample size")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--threshold", type=int, default=100, help="largest acceptable N0")
    p.add_argument("--min-hits", type=int, default=5, help="hits for infinitely-often bounds")

    p = sub.add_parser("series", help="zero-one series evaluator")
    _common(p)
    p.add_argument("--eta", help="threshold: power:p, over_HN:s, constant:c, explicit:v1,...")
    p.add_argument("--K", type=int, default=10**4, help="truncation in k")
    p.add_argument("--B", type=int, default=1000, help="truncation in b")
    p.add_argument("--L", type=int, default=10**6, help="truncation in l")

    p = sub.add_parser("pairstats", help="pair statistic D(N, M) and GCD sums")
    _common(p)
    p.add_argument("--M", type=float, help="bump scale (default H_N/N)")
    p.add_argument("--samples", type=int, default=1000, help="alpha sample size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gcd", type=int, metavar="H", help="emit the GCD-sum profile up to H instead")
    p.add_argument("--A", type=float, default=7.0, help="constant in the GCD-sum bound")

    p = sub.add_parser("cover", help="covering-set reports and Chung-Erdos checks")
    _common(p)
    p.add_argument("--k", type=int, help="even k >= 2")
    p.add_argument("--psi", default="quarter", help="thm1[:eps], coprime, quarter or half")
    p.add_argument("--report", choices=("mertens", "split", "overlap", "chung-erdos"), default="mertens")
    return parser


# ---------------------------------------------------------------------------
# config merge
# ---------------------------------------------------------------------------


def _apply_config(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None) or args.command == "verify":
        return args
    cp = configparser.ConfigParser(delimiters=("=",))
    if not cp.read(args.config):
        raise UsageError(f"cannot read config {args.config}")
    if args.command not in cp:
        return args
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in cp[args.command].items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        act = known[dest]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[dest] = cp[args.command].getboolean(key)
        else:
            defaults[dest] = act.type(raw) if act.type else raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _need(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + m for m in missing))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _rows_out(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=1, default=str) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def cmd_seq(args) -> str:
    _need(args, "family", "n")
    w = generate(parse_family(args.family), args.n)
    rows = []
    for n in range(1, w.N + 1):
        if w.ints is not None:
            rows.append((n, str(w.term_value(n))))
        else:
            rows.append((n, format_value(w.reals[n - 1], args.digits)))
    return _rows_out(SEQ_COLUMNS, rows, args.format)


def cmd_diffset(args) -> str:
    _need(args, "family", "n")
    fd = build(parse_family(args.family), args.n)
    Ns = range(1, args.n + 1) if args.all else [args.n]
    return _rows_out(CARDINALITY_COLUMNS, [cardinality_report(fd, N).as_tuple() for N in Ns], args.format)


def cmd_gaps(args) -> str:
    _need(args, "family", "alpha")
    grid = parse_grid(args.grid) if args.grid else None
    if grid is None:
        _need(args, "n")
        grid = [args.n]
    n = args.n or grid[-1]
    fd = build(parse_family(args.family), n)
    alpha = make_alpha(args.alpha)
    variants = VARIANTS if args.variant == "all" else (args.variant,)
    rows = []
    for v in variants:
        for e in gap_curve(fd.window, alpha, grid, v, argmin=not args.no_argmin, floored=fd):
            m, k = e.pair if e.pair is not None else ("", "")
            rows.append((e.N, args.alpha, v, format_value(e.value), m, k))
    return _rows_out(GAP_COLUMNS, rows, args.format)


def _campaign_config(args) -> CampaignConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = load_config(fh.read())
        if args.seed is not None:
            cfg.seed = args.seed
    else:
        if args.seed is None:
            raise UsageError("verify needs --seed (or a config file with a seed)")
        n_max = args.n or 2000
        given = list(args.families or []) + ([args.family] if args.family else [])
        fams = [parse_family_line(f, n_max) for f in given] if given else default_families(n_max)
        cfg = CampaignConfig(
            seed=args.seed,
            alphas=args.alphas,
            families=fams,
            formulas=list(args.formula or FORMULA_IDS),
            n_max=n_max,
            eps=args.epsilon,
            threshold=args.threshold,
            min_hits=args.min_hits,
            fit_alphas=args.fit_alphas,
        )
    cfg.threads = args.threads
    return cfg


def cmd_verify(args) -> str:
    cfg = _campaign_config(args)
    report = run_campaign(cfg)
    if args.formula:
        refused = [msg for fam in report.summary["families"].values() for msg in fam["refused"].values()]
        if refused:
            raise HypothesisError("; ".join(refused))
    if args.out:
        report.write(args.out)
        return report.summary_json()
    return report.summary_json() if args.format == "json" else report.verdicts_csv()


def cmd_series(args) -> str:
    _need(args, "family", "n", "eta")
    fd = build(parse_family(args.family), args.n)
    est, terms = evaluate_series(fd, parse_threshold(args.eta), args.K, args.B, args.L)
    if args.format == "json":
        return json.dumps(asdict(est), indent=1, sort_keys=True, default=str) + "\n"
    partial = np.cumsum(terms)
    rows = [(k, repr(float(t)), repr(float(s))) for k, t, s in zip(range(1, len(terms) + 1), terms, partial)]
    return _rows_out(SERIES_COLUMNS, rows, "csv")


def cmd_pairstats(args) -> str:
    _need(args, "family", "n")
    spec = parse_family(args.family)
    fd = build(spec, args.n)
    if args.gcd is not None:
        if args.gcd > len(fd):
            raise CoverageError(f"window N={args.n} has only {len(fd)} floored differences", None)
        S = gcd_sum_profile(fd, args.gcd)
        rows = [(h, repr(float(S[h - 1])), repr(float(S[h - 1] / h)), repr(gcd_sum_bound(h, args.A))) for h in range(1, args.gcd + 1)]
        return _rows_out(GCD_COLUMNS, rows, args.format)
    M = args.M if args.M is not None else fd.H(args.n) / args.n
    alphas = [alpha_float(a) for a in sample_alphas(args.seed, args.samples)]
    rep = mean_variance_experiment(fd, args.n, M, alphas)
    row = tuple(repr(x) if isinstance(x, float) else x for x in asdict(rep).values())
    return _rows_out(PAIRSTAT_COLUMNS, [row], args.format)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def cmd_cover(args) -> str:
    _need(args, "family", "n", "k")
    fd = build(parse_family(args.family), args.n)
    psi = parse_psi(args.psi)
    if args.report == "mertens":
        rows, low = mertens_lower_check(fd, args.k, psi)
        return _rows_out(MERTENS_COLUMNS, [tuple(_jsonable(v) for v in asdict(r).values()) for r in rows], args.format)
    if args.report == "split":
        rows = smooth_rough_split(fd, args.k, psi)
        return _rows_out(SPLIT_COLUMNS, [tuple(_jsonable(v) for v in asdict(r).values()) for r in rows], args.format)
    if args.report == "overlap":
        rows = overlap_table(fd, args.k, psi)
        return json.dumps([{k: _jsonable(v) for k, v in asdict(r).items()} for r in rows], indent=1) + "\n"
    sets = list(covering_family(fd, args.k, psi).values())
    ce = chung_erdos_check(sets)
    return json.dumps({"lhs": str(ce.lhs), "rhs": str(ce.rhs), "holds": ce.holds}, indent=1) + "\n"


COMMANDS = {
    "seq": cmd_seq,
    "diffset": cmd_diffset,
    "gaps": cmd_gaps,
    "verify": cmd_verify,
    "series": cmd_series,
    "pairstats": cmd_pairstats,
    "cover": cmd_cover,
}


def _emit(text: str, path: str | None, command: str) -> None:
    if path and command != "verify":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = parser.parse_args(argv)
        if pre.command is None:
            parser.error("a subcommand is required")
        sub = parser._subparsers._group_actions[0].choices[pre.command]
        try:
            args = _apply_config(parser, sub, argv)
        except UsageError as exc:
            sub.error(str(exc))
        if args.schema:
            sys.stdout.write(json.dumps({"version": SCHEMA_VERSION, "columns": SCHEMAS[args.command]}, indent=1) + "\n")
            return EXIT_OK
        saved = os.environ.get("SMALLGAPS_PRECISION_CAP")
        if args.precision_cap is not None:
            os.environ["SMALLGAPS_PRECISION_CAP"] = str(args.precision_cap)
        try:
            text = COMMANDS[args.command](args)
        except UsageError as exc:
            sub.error(str(exc))
        finally:
            if saved is None:
                os.environ.pop("SMALLGAPS_PRECISION_CAP", None)
            else:
                os.environ["SMALLGAPS_PRECISION_CAP"] = saved
        _emit(text, args.out, args.command)
        return EXIT_OK
    except SystemExit as exc:
        return int(exc.code or 0) if not isinstance(exc.code, str) else EXIT_USAGE
    except HypothesisError as exc:
        sys.stderr.write(f"hypothesis violation: {exc}\n")
        return EXIT_HYPOTHESIS
    except AmbiguityError as exc:
        sys.stderr.write(f"precision failure: {exc}\n")
        return EXIT_AMBIGUITY
    except (SpecError, DomainError, CoverageError, ValueError, OSError, configparser.Error) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_OTHER


if __name__ == "__main__":
    raise SystemExit(main())
