"""Monte Carlo verification of the almost-everywhere gap bounds.

Every bound is checked empirically: alpha is drawn from a seeded
counter-based generator, the relevant gap statistic is evaluated along an
N grid (running minima), and each alpha gets a verdict.  Reports only ever
state empirical fractions over the sample.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .diffset import FlooredDiffSet, build
from .gaps import GapEntry, gap_curve, make_alpha
from .numeric import AmbiguityError, DomainError, HypothesisError, START_BITS, precision_cap
from .sequences import SeqWindow, SequenceSpec, gap_is_constant, gap_profile, gap_profile_at, generate, parse_family

FORMULA_IDS = ("thm1_lower", "thm1_upper", "thm2_lower", "thm2_upper", "thm3_upper", "thm4_upper", "thm5_upper")
MODES = ("eventually", "infinitely_often")
VERDICT_COLUMNS = ("family", "formula", "alpha", "mode", "N0_observed", "holds")
SLOPE_COLUMNS = ("family", "alpha", "slope", "residual", "points")

# the six application families: integer, real and smooth images
DEFAULT_FAMILIES = (
    "polynomial:2",
    "polynomial:1/2 | 1000",
    "lacunary:3 | 300",
    "beatty:sqrt2",
    "fibonacci | 500",
    "smooth:xlogx@arithmetic:2,1",
)


# ---------------------------------------------------------------------------
# bound formulas
# ---------------------------------------------------------------------------


def _clamped(lg: Callable, one) -> Callable:
    def L(x, depth: int = 1):
        for _ in range(depth):
            x = lg(x)
            x = np.maximum(one, x) if isinstance(x, np.ndarray) else max(one, x)
        return x

    return L


@dataclass(frozen=True)
class BoundFormula:
    """A bound on a gap statistic as a function of (N, D_N, H_N, B_N, c(N))."""

    id: str
    eps: float = 0.1

    def __post_init__(self) -> None:
        if self.id not in FORMULA_IDS:
            raise DomainError(f"unknown formula {self.id!r}; expected one of {FORMULA_IDS}")
        if not self.eps > 0:
            raise DomainError(f"epsilon must be positive, got {self.eps}")

    @property
    def variant(self) -> str:
        """Gap statistic the formula bounds."""
        return "std" if self.id[:4] in ("thm1", "thm2") else "floor"

    @property
    def mode(self) -> str:
        return "infinitely_often" if self.id in ("thm3_upper", "thm4_upper") else "eventually"

    @property
    def is_lower(self) -> bool:
        return self.id.endswith("_lower")

    @property
    def uses_profile(self) -> bool:
        return self.id.startswith("thm2")

    def _eval(self, N, D, H, B, c, log, one, pw):
        L = _clamped(log, one)
        i = self.id
        if i.startswith(("thm1", "thm2")):
            base = (c if i.startswith("thm2") else one) / (D * L(N) * pw(L(N, 2), 1 + self.eps))
            return base if i.endswith("_lower") else one - base
        if i == "thm3_upper":
            M = N / 9
            return 4 * L(B, 2) / (H * L(M) * L(M, 2))
        if i == "thm4_upper":
            return one / H
        return pw(N, self.eps) / H

    def evaluate(self, N, D, H, B, c=1.0):
        """Double-precision value; every argument may be a numpy array."""
        arr = [np.asarray(x, dtype=float) for x in (N, D, H, B, c)]
        return self._eval(*arr, np.log, 1.0, np.power)

    def evaluate_mp(self, N: int, D: int, H: int, B: int, c: Fraction = Fraction(1)):
        """mpmath value at the current working precision."""
        mp = lambda q: mpmath.mpf(q.numerator) / q.denominator if isinstance(q, Fraction) else mpmath.mpf(q)
        return self._eval(mp(N), mp(D), mp(H), mp(B), mp(c), mpmath.log, mpmath.mpf(1), mpmath.power)

    def exact_value(self, H: int) -> Fraction | None:
        """The bound as an exact rational when it is one."""
        return Fraction(1, H) if self.id == "thm4_upper" else None

    def holds(self, stat, bound):
        """The asserted relation, as a boolean (array)."""
        return stat >= bound if self.is_lower else stat <= bound


def parse_formula(text: str, eps: float = 0.1) -> BoundFormula:
    """'thm1_lower' or 'thm1_lower(0.2)'."""
    t = text.strip()
    if t.endswith(")") and "(" in t:
        name, arg = t[:-1].split("(", 1)
        return BoundFormula(name.strip(), float(arg))
    return BoundFormula(t, eps)


def check_hypothesis(formula: BoundFormula, window: SeqWindow, fd: FlooredDiffSet) -> None:
    """Raise HypothesisError when the family does not meet the formula's precondition."""
    if formula.id.startswith("thm1"):
        if not gap_is_constant(window.spec):
            raise HypothesisError(f"{formula.id}: {window.spec} has no uniform positive gap (use thm2)")
        if _profile_lower(gap_profile(window)) <= 0:
            raise HypothesisError(f"{formula.id}: {window.spec} has no certified positive gap")
    elif formula.id.startswith("thm2"):
        if _profile_lower(gap_profile(window)) <= 0:
            raise HypothesisError(f"{formula.id}: {window.spec} has no certified positive gap profile")
    elif not fd.hypothesis_ok:
        raise HypothesisError(
            f"{formula.id}: {window.spec} has two terms closer than 1 (first at N={fd.zero_step})"
        )


def _profile_lower(c) -> Fraction:
    return c.exact if c.exact is not None else c.lower


def gap_profile_values(window: SeqWindow, Ns: Sequence[int]) -> list[Fraction]:
    """Certified lower bounds c(N) for each N of the grid."""
    if gap_is_constant(window.spec):
        return [_profile_lower(gap_profile(window))] * len(Ns)
    return [_profile_lower(gap_profile_at(window.spec, N)) for N in Ns]


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome for one alpha: N0_observed is last failure + 1 or the hit count."""

    alpha: str
    formula: str
    mode: str
    N0_observed: int
    holds: bool


@dataclass
class _Grid:
    Ns: list[int]
    D: np.ndarray
    H: np.ndarray
    B: np.ndarray
    c: list[Fraction]


def _grid_data(window: SeqWindow, fd: FlooredDiffSet, Ns: Sequence[int], need_c: bool) -> _Grid:
    Ns = list(Ns)
    D = np.array([fd.diffset.D(N) for N in Ns])
    H = np.array([fd.H(N) for N in Ns])
    B = np.array([max(fd.B[N], 1) for N in Ns])
    c = gap_profile_values(window, Ns) if need_c else [Fraction(1)] * len(Ns)
    return _Grid(Ns, D, H, B, c)


def _check_grid(Ns: Sequence[int], fd: FlooredDiffSet) -> list[int]:
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise DomainError("empty N grid")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise DomainError("N grid must be strictly increasing")
    if Ns[0] < 2 or Ns[-1] > fd.N:
        raise DomainError(f"N grid must lie in [2, {fd.N}]")
    return Ns


def _relation(formula: BoundFormula, entries: Sequence[GapEntry], g: _Grid) -> np.ndarray:
    """Per-N truth of the bound, certified where double precision is too close to call."""
    stat = np.array([float(e) for e in entries])
    bound = formula.evaluate(g.Ns, g.D, g.H, g.B, [float(x) for x in g.c])
    ok = formula.holds(stat, bound)
    close = np.abs(stat - bound) <= 1e-9 * np.maximum(np.abs(bound), 1e-300)
    for i in np.flatnonzero(close):
        ok[i] = _certified_relation(formula, entries[i], g, i)
    return ok


def _certified_relation(formula: BoundFormula, entry: GapEntry, g: _Grid, i: int) -> bool:
    x = entry.value
    exact_b = formula.exact_value(int(g.H[i]))
    if exact_b is not None and x.exact is not None:
        return bool(formula.holds(x.exact, exact_b))
    prec = START_BITS
    cap = precision_cap()
    while prec <= cap:
        xr = x.at(prec)
        with mpmath.workprec(prec + 32):
            b = formula.evaluate_mp(g.Ns[i], int(g.D[i]), int(g.H[i]), int(g.B[i]), g.c[i])
            lo = mpmath.mpf(xr.lower.numerator) / xr.lower.denominator
            hi = mpmath.mpf(xr.upper.numerator) / xr.upper.denominator
            if hi < b or lo > b:
                return bool(formula.holds(lo, b))
            if exact_b is not None and xr.exact is not None:
                return bool(formula.holds(xr.exact, exact_b))
        prec *= 2
    raise AmbiguityError(f"{formula.id} at N={g.Ns[i]}: statistic and bound agree to {cap} bits")


def _verdict(formula: BoundFormula, alpha: str, Ns: list[int], ok: np.ndarray, threshold: int, min_hits: int) -> Verdict:
    if formula.mode == "eventually":
        fails = np.flatnonzero(~ok)
        n0 = Ns[fails[-1]] + 1 if fails.size else Ns[0]
        return Verdict(alpha, formula.id, formula.mode, int(n0), bool(n0 <= min(threshold, Ns[-1])))
    hits = int(ok.sum())
    return Verdict(alpha, formula.id, formula.mode, hits, hits >= min_hits)


def _map(fn, items: Sequence, threads: int | None) -> list:
    if threads is None or threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def verify_bound(
    window: SeqWindow,
    fd: FlooredDiffSet,
    formula: BoundFormula,
    alphas: Sequence[str],
    N_grid: Sequence[int],
    threshold: int = 100,
    min_hits: int = 5,
    variant: str | None = None,
    threads: int | None = None,
) -> list[Verdict]:
    """One verdict per alpha.

    Eventually-type bounds hold for an alpha when its last grid failure is
    below ``threshold``; infinitely-often bounds hold with at least
    ``min_hits`` grid hits.  ``variant`` overrides the bounded statistic.
    """
    check_hypothesis(formula, window, fd)
    Ns = _check_grid(N_grid, fd)
    g = _grid_data(window, fd, Ns, formula.uses_profile)
    var = variant or formula.variant

    def one(a: str) -> Verdict:
        entries = gap_curve(window, a, Ns, var, argmin=False, floored=fd)
        return _verdict(formula, str(a), Ns, _relation(formula, entries, g), threshold, min_hits)

    return _map(one, list(alphas), threads)


def holds_fraction(verdicts: Sequence[Verdict]) -> float:
    return sum(v.holds for v in verdicts) / len(verdicts) if verdicts else float("nan")


# ---------------------------------------------------------------------------
# alpha sampling
# ---------------------------------------------------------------------------

HEX_DIGITS = 64


def sample_alphas(seed: int, count: int) -> list[str]:
    """``count`` values uniform on (0, 1) as '0x0.<64 hex digits>' strings.

    Philox is counter based, so the stream depends only on the seed.
    """
    if count < 0:
        raise DomainError("sample size must be non-negative")
    words = HEX_DIGITS // 16
    bg = np.random.Philox(int(seed))
    out = []
    while len(out) < count:
        raw = bg.random_raw(words)
        digits = "".join(f"{int(w):016x}" for w in raw)
        if int(digits, 16):
            out.append("0x0." + digits)
    return out


def alpha_float(text: str) -> float:
    a = make_alpha(text)
    return float(a.exact) if a.exact is not None else float(a.real)


# ---------------------------------------------------------------------------
# exponent fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlopeFit:
    alpha: str
    slope: float
    residual: float  # root mean square of the fit residuals
    points: int


def log_grid(lo: int, hi: int, points: int = 60) -> list[int]:
    """Integers spread geometrically over [lo, hi], both ends included."""
    if lo < 2 or hi <= lo:
        raise DomainError(f"need 2 <= lo < hi, got [{lo}, {hi}]")
    g = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    return [int(x) for x in g]


def _fit(Ns: Sequence[int], values: Sequence[float]) -> tuple[float, float, int]:
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.asarray(values, dtype=float)
    keep = y > 0  # log of an exact zero is undefined; such points carry no slope
    x, y = x[keep], np.log(y[keep])
    if x.size < 3 or x.max() - x.min() < 1.5 * math.log(10):
        raise DomainError("degenerate grid: fewer than 3 usable points or under 1.5 decades")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res**2))), int(x.size)


def _fit_grid(N_grid: Sequence[int], fit_min: int) -> list[int]:
    Ns = [int(n) for n in N_grid if n >= fit_min]
    if len(Ns) < 3 or math.log10(Ns[-1] / Ns[0]) < 1.5:
        raise DomainError("degenerate grid: the fit needs at least 1.5 decades of N")
    return Ns


def exponent_fit(
    window, alphas: Sequence[str], N_grid: Sequence[int], fit_min: int = 10, threads: int | None = None, fd=None
) -> list[SlopeFit]:
    """Least-squares slope of log delta_min against log N over the grid points N >= fit_min."""
    Ns = _fit_grid(N_grid, fit_min)
    fd = fd if fd is not None else build(window)

    def one(a: str) -> SlopeFit:
        vals = [float(e) for e in gap_curve(window, a, Ns, "std", argmin=False, floored=fd)]
        return SlopeFit(str(a), *_fit(Ns, vals))

    return _map(one, list(alphas), threads)


def median_slope(fits: Sequence[SlopeFit]) -> float:
    return float(np.median([f.slope for f in fits])) if fits else float("nan")


def bound_curve_slope(window: SeqWindow, fd: FlooredDiffSet, formula: BoundFormula, N_grid: Sequence[int]) -> float:
    """Slope of log(bound) against log N; a shape check on the bound itself."""
    Ns = _check_grid(N_grid, fd)
    g = _grid_data(window, fd, Ns, formula.uses_profile)
    vals = formula.evaluate(g.Ns, g.D, g.H, g.B, [float(x) for x in g.c])
    return _fit(Ns, vals)[0]


# ---------------------------------------------------------------------------
# campaigns
# ---------------------------------------------------------------------------


@dataclass
class CampaignConfig:
    """Campaign parameters; see :func:`load_config` for the file format."""

    seed: int
    alphas: int = 200
    families: list[tuple[str, int]] = field(default_factory=list)
    formulas: list[str] = field(default_factory=lambda: list(FORMULA_IDS))
    n_max: int = 2000
    eps: float = 0.1
    threshold: int = 100
    min_hits: int = 5
    fit_points: int = 60
    fit_min: int = 10
    fit_alphas: int = 50
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.alphas < 0 or self.fit_alphas < 0:
            raise DomainError("sample sizes must be non-negative")
        if self.n_max < 2:
            raise DomainError("n_max must be at least 2")
        for f in self.formulas:
            parse_formula(f, self.eps)


CONFIG_KEYS = {
    "seed": "integer, required",
    "alphas": "verdict sample size (default 200)",
    "families": "one family per line, optionally 'spec | n_max'",
    "formulas": "whitespace-separated formula ids (default all)",
    "n_max": "grid end when a family gives none (default 2000)",
    "epsilon": "epsilon in the bound formulas (default 0.1)",
    "threshold": "largest acceptable N0 for eventually-type bounds (default 100)",
    "min_hits": "hits needed for infinitely-often bounds (default 5)",
    "fit_points": "points of the geometric grid used for slopes (default 60)",
    "fit_min": "smallest N in slope fits (default 10)",
    "fit_alphas": "slope sample size, a prefix of the verdict sample stream (default 50)",
    "threads": "worker threads (default 1)",
}


def parse_family_line(line: str, n_max: int) -> tuple[str, int]:
    spec, _, n = line.partition("|")
    return spec.strip(), int(n) if n.strip() else n_max


def default_families(n_max: int = 2000) -> list[tuple[str, int]]:
    return [
        (s, min(n, n_max)) for s, n in (parse_family_line(line, n_max) for line in DEFAULT_FAMILIES)
    ]


def load_config(text: str) -> CampaignConfig:
    """Parse an INI-style ``[campaign]`` section (keys in CONFIG_KEYS)."""
    cp = configparser.ConfigParser(delimiters=("=",), inline_comment_prefixes=("#", ";"))
    cp.read_string(text)
    if "campaign" not in cp:
        raise DomainError("config needs a [campaign] section")
    sec = cp["campaign"]
    unknown = set(sec) - set(CONFIG_KEYS)
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in sec:
        raise DomainError("config must set seed")
    n_max = sec.getint("n_max", 2000)
    if "families" in sec:
        fams = [parse_family_line(x, n_max) for x in sec["families"].splitlines() if x.strip()]
    else:
        fams = default_families(n_max)
    threads = sec.getint("threads", 1)
    return CampaignConfig(
        seed=sec.getint("seed"),
        alphas=sec.getint("alphas", 200),
        families=fams,
        formulas=sec.get("formulas", " ".join(FORMULA_IDS)).split(),
        n_max=n_max,
        eps=sec.getfloat("epsilon", 0.1),
        threshold=sec.getint("threshold", 100),
        min_hits=sec.getint("min_hits", 5),
        fit_points=sec.getint("fit_points", 60),
        fit_min=sec.getint("fit_min", 10),
        fit_alphas=sec.getint("fit_alphas", 50),
        threads=threads,
    )


@dataclass
class CampaignReport:
    verdicts: list[tuple[str, Verdict]]
    slopes: list[tuple[str, SlopeFit]]
    summary: dict

    def verdicts_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(VERDICT_COLUMNS)
        for fam, v in self.verdicts:
            w.writerow((fam, v.formula, v.alpha, v.mode, v.N0_observed, int(v.holds)))
        return buf.getvalue()

    def slopes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SLOPE_COLUMNS)
        for fam, s in self.slopes:
            w.writerow((fam, s.alpha, repr(s.slope), repr(s.residual), s.points))
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for name, text in (
            ("verdicts.csv", self.verdicts_csv()),
            ("slopes.csv", self.slopes_csv()),
            ("summary.json", self.summary_json()),
        ):
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            paths.append(path)
        return paths


def _family_campaign(cfg: CampaignConfig, spec: SequenceSpec, n_max: int, alphas: list[str], fit_alphas: list[str]):
    window = generate(spec, n_max)
    fd = build(window)
    Ns = list(range(2, n_max + 1))
    verdicts: list[Verdict] = []
    entry = {"n_max": n_max, "formulas": {}, "refused": {}}
    runnable = []
    for text in cfg.formulas:
        f = parse_formula(text, cfg.eps)
        try:
            check_hypothesis(f, window, fd)
            runnable.append(f)
        except HypothesisError as exc:
            entry["refused"][f.id] = str(exc)
    if runnable:
        g = _grid_data(window, fd, Ns, any(f.uses_profile for f in runnable))
        variants = sorted({f.variant for f in runnable})

        def one(a: str) -> list[Verdict]:
            curves = {v: gap_curve(window, a, Ns, v, argmin=False, floored=fd) for v in variants}
            return [
                _verdict(f, a, Ns, _relation(f, curves[f.variant], g), cfg.threshold, cfg.min_hits) for f in runnable
            ]

        per_alpha = _map(one, alphas, cfg.threads)
        for i, f in enumerate(runnable):
            vs = [row[i] for row in per_alpha]
            verdicts.extend(vs)
            entry["formulas"][f.id] = {"mode": f.mode, "alphas": len(vs), "holds_fraction": holds_fraction(vs)}
    slopes: list[SlopeFit] = []
    if fit_alphas:
        try:
            grid = log_grid(2, n_max, cfg.fit_points)
            slopes = exponent_fit(window, fit_alphas, grid, cfg.fit_min, cfg.threads, fd)
            entry["median_slope"] = median_slope(slopes)
        except DomainError as exc:
            entry["slope_error"] = str(exc)
    return verdicts, slopes, entry


def run_campaign(config: CampaignConfig | str) -> CampaignReport:
    """Verdicts, slope fits and a JSON summary; deterministic given the seed."""
    cfg = load_config(config) if isinstance(config, str) else config
    alphas = sample_alphas(cfg.seed, max(cfg.alphas, cfg.fit_alphas))
    verdict_alphas, fit_alphas = alphas[: cfg.alphas], alphas[: cfg.fit_alphas]
    report = CampaignReport([], [], {})
    fams = {}
    for text, n_max in cfg.families:
        spec = parse_family(text)
        vs, ss, entry = _family_campaign(cfg, spec, n_max, verdict_alphas, fit_alphas)
        report.verdicts.extend((text, v) for v in vs)
        report.slopes.extend((text, s) for s in ss)
        fams[text] = entry
    settings = asdict(cfg)
    settings.pop("threads")
    settings["families"] = [list(x) for x in cfg.families]
    report.summary = {"config": settings, "families": fams}
    return report
