"""The four minimal-gap statistics of a window for a given alpha.

For alpha and the differences z:

* ``std``   min ||alpha z||
* ``tilde`` min {alpha z}
* ``hat``   min alpha z
* ``floor`` min ||alpha floor(z)||

Minima are taken over the first D_N (or H_N) enumerated differences, so a
whole curve in N costs one pass over the enumeration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

import numpy as np

from .diffset import DiffSet, FlooredDiffSet, build_diffset, build_floored
from .forms import ExactForm
from .numeric import (
    AmbiguityError,
    CertifiedReal,
    DomainError,
    START_BITS,
    parse_exact,
    precision_cap,
)
from .sequences import SeqWindow, parse_const

VARIANTS = ("std", "tilde", "hat", "floor")
_TWO64 = float(2**64)
_FILTER_K_LIMIT = 1 << 40
_PAD = float(1 << 14)


# ---------------------------------------------------------------------------
# alpha
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alpha:
    """The multiplier alpha: an exact rational or an exact irrational form."""

    real: CertifiedReal
    exact: Fraction | None = None
    form: ExactForm | None = None
    text: str = ""

    def __str__(self) -> str:
        return self.text or str(self.exact if self.exact is not None else self.form)

    def shifted(self, m: int) -> "Alpha":
        """alpha + m."""
        if self.exact is not None:
            return make_alpha(self.exact + m)
        f = self.form + ExactForm.rational(m)
        return Alpha(f.to_real(), None, f, f"{self}+{m}")


def make_alpha(x) -> Alpha:
    """Alpha from a Fraction, int, ExactForm or text (see :func:`parse_alpha`)."""
    if isinstance(x, Alpha):
        return x
    if isinstance(x, str):
        return parse_alpha(x)
    if isinstance(x, ExactForm):
        if x.is_rational:
            return make_alpha(x.rational_value)
        return Alpha(x.to_real(), None, x, str(x))
    if isinstance(x, float):
        raise DomainError("alpha must be exact; pass a decimal string or Fraction")
    q = Fraction(x)
    return Alpha(CertifiedReal.from_fraction(q), q, ExactForm.rational(q), str(q))


def parse_alpha(text: str) -> Alpha:
    """'0.305', '3/7', '0x0.4f...' (hex fraction), 'phi', or 'frac:phi'."""
    t = text.strip()
    frac = t.lower().startswith("frac:")
    body = t[5:] if frac else t
    try:
        q = parse_exact(body)
        f = ExactForm.rational(q)
    except DomainError:
        f = parse_const(body)
    if frac:
        from .numeric import certified_floor

        f = f - ExactForm.rational(certified_floor(f.to_real()))
    a = make_alpha(f)
    return Alpha(a.real, a.exact, a.form, t)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapEntry:
    """One statistic at one N: value enclosure and the argmin pair (m, n)."""

    N: int
    variant: str
    value: CertifiedReal
    pair: tuple[int, int] | None = None

    @property
    def exact(self) -> Fraction | None:
        return self.value.exact

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class GapReport:
    N: int
    alpha: Alpha
    delta: GapEntry
    delta_tilde: GapEntry
    delta_hat: GapEntry
    delta_floor: GapEntry


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------


class _Sources:
    """Per-window caches of the enumerations."""

    def __init__(self, window: SeqWindow, diffset: DiffSet | None = None, floored: FlooredDiffSet | None = None):
        self.window = window
        self._ds = diffset if diffset is not None else (floored.diffset if floored is not None else None)
        self._fd = floored

    @property
    def ds(self) -> DiffSet:
        if self._ds is None:
            self._ds = build_diffset(self.window)
        return self._ds

    @property
    def fd(self) -> FlooredDiffSet:
        if self._fd is None:
            self._fd = build_floored(self.ds)
        return self._fd


def _sources(window, diffset=None, floored=None) -> _Sources:
    if isinstance(window, FlooredDiffSet):
        return _Sources(window.window, window.diffset, window)
    if isinstance(window, DiffSet):
        return _Sources(window.window, window, floored)
    return _Sources(window, diffset, floored)


def gap_curve(
    window,
    alpha,
    N_grid: Sequence[int],
    variant: str = "std",
    argmin: bool = True,
    diffset: DiffSet | None = None,
    floored: FlooredDiffSet | None = None,
) -> list[GapEntry]:
    """The statistic at every N of an ascending grid (running minima)."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    src = _sources(window, diffset, floored)
    N_grid = list(N_grid)
    if not N_grid:
        return []
    if any(b < a for a, b in zip(N_grid, N_grid[1:])):
        raise DomainError("N_grid must be ascending")
    if N_grid[0] < 2:
        raise DomainError("the minimal gap needs N >= 2")
    if N_grid[-1] > src.window.N:
        raise DomainError(f"N={N_grid[-1]} exceeds the window size {src.window.N}")
    a = make_alpha(alpha)
    if variant == "floor":
        fd = src.fd
        values = _IntValues(fd.Z, fd.Z_int64, 1)
        counts = fd.counts
    else:
        ds = src.ds
        counts = ds.counts
        values = _IntValues(ds.ints, ds.int64, ds.scale) if ds.rational else None
    ends = [int(counts[N]) for N in N_grid]
    if variant == "hat":
        entries = _hat_curve(src, a, N_grid, ends, values)
    elif values is not None and a.exact is not None:
        entries = _exact_curve(values, a.exact, variant, N_grid, ends)
    else:
        entries = _enclosure_curve(src, values, a, variant, N_grid, ends)
    if argmin:
        entries = [_with_pair(src, a, e, idx) for e, idx in entries]
    else:
        entries = [e for e, _ in entries]
    return entries


def min_gap(window, alpha, variant: str = "std", N: int | None = None, **kw) -> GapEntry:
    """The statistic at one N (default: the whole window)."""
    src = _sources(window, kw.get("diffset"), kw.get("floored"))
    N = src.window.N if N is None else N
    return gap_curve(src.window, alpha, [N], variant, kw.get("argmin", True), src._ds, src._fd)[0]


def gap_report(window, alpha, N: int | None = None, argmin: bool = True) -> GapReport:
    src = _sources(window)
    N = src.window.N if N is None else N
    a = make_alpha(alpha)
    got = {v: gap_curve(src.window, a, [N], v, argmin, src.ds, src.fd)[0] for v in VARIANTS}
    return GapReport(N, a, got["std"], got["tilde"], got["hat"], got["floor"])


class _IntValues:
    """Integer numerators k_i of the values k_i/scale."""

    def __init__(self, ints, int64: np.ndarray | None, scale: int):
        self.ints = ints
        self.int64 = int64
        self.scale = scale

    def get(self, i: int) -> int:
        return int(self.ints[i])


# exact engine: rational alpha, rational values ------------------------------------


def _exact_curve(values: _IntValues, alpha: Fraction, variant: str, N_grid, ends):
    beta = alpha / values.scale
    p, q = beta.numerator, beta.denominator
    D = ends[-1]
    arr = values.int64
    if arr is not None and D and int(arr[:D].max()) < _FILTER_K_LIMIT:
        cand = _filter_candidates(arr[:D], p, q, variant)
    else:
        cand = np.arange(D)
    # exact scan over candidates
    best_num = None
    best_idx: list[int] = []
    out = []
    ci = 0
    cand = cand.tolist()
    for N, end in zip(N_grid, ends):
        while ci < len(cand) and cand[ci] < end:
            i = cand[ci]
            k = values.get(i)
            r = (p * k) % q
            num = r if variant == "tilde" else min(r, q - r)
            if best_num is None or num < best_num:
                best_num, best_idx = num, [i]
            elif num == best_num:
                best_idx.append(i)
            ci += 1
        if best_num is None:
            raise DomainError("no differences in the window")
        val = Fraction(best_num, q)
        out.append((GapEntry(N, variant, CertifiedReal.from_fraction(val)), list(best_idx)))
    return out


def _filter_candidates(k: np.ndarray, p: int, q: int, variant: str) -> np.ndarray:
    """Indices that can realize a running minimum (float-filtered, certified)."""
    b64 = np.uint64(((p % q) << 64) // q)
    ku = k.astype(np.uint64)
    r = b64 * ku  # wraps modulo 2^64
    kf = k.astype(np.float64)
    if variant == "tilde":
        rf = r.astype(np.float64)
        lo = np.maximum(rf - _PAD, 0.0)
        hi = rf + kf + _PAD
        wrap = hi >= _TWO64
        lo[wrap] = 0.0
        hi[wrap] = _TWO64
    else:
        d = np.minimum(r, (np.uint64(0) - r)).astype(np.float64)
        lo = np.maximum(d - kf - _PAD, 0.0)
        hi = d + kf + _PAD
    env = np.minimum.accumulate(hi)
    return np.flatnonzero(lo <= env)


# enclosure engine: irrational alpha or real values ------------------------------------


def _stat_bounds(lo: int, hi: int, P: int, variant: str) -> tuple[int, int]:
    one = 1 << P
    if variant == "tilde":
        n_lo, n_hi = lo >> P, hi >> P
        if n_lo == n_hi:
            return lo - n_lo * one, hi - n_lo * one
        return 0, one
    half = one >> 1
    c_lo, c_hi = (lo + half) >> P, (hi + half) >> P
    if c_lo == c_hi:
        a, b = lo - c_lo * one, hi - c_lo * one
        if a >= 0:
            return a, b
        if b <= 0:
            return -b, -a
        return 0, max(-a, b)
    d_lo = min(abs(lo - ((lo + half) >> P) * one), abs(hi - ((hi + half) >> P) * one))
    return d_lo, half


def _products(src: _Sources, values: _IntValues | None, a: Alpha, variant: str, D: int, P: int):
    """Fixed-point enclosures of alpha * value_i for i < D at P fractional bits."""
    A = a.real.at(P + 8)
    s = 8
    out = []
    if values is not None:
        sc = values.scale
        for i in range(D):
            k = values.get(i)
            lo, hi = (A.lo * k) // sc, -((-A.hi * k) // sc)
            if k < 0:
                lo, hi = hi, lo
            out.append((lo >> s, -((-hi) >> s)))
        return out
    ds = src.ds
    for i in range(D):
        z = ds.reals[i].at(P + 8)
        prods = (A.lo * z.lo, A.lo * z.hi, A.hi * z.lo, A.hi * z.hi)
        sh = P + 8 + s
        out.append((min(prods) >> sh, -((-max(prods)) >> sh)))
    return out


def _enclosure_curve(src: _Sources, values, a: Alpha, variant: str, N_grid, ends):
    D = ends[-1]
    P = START_BITS
    pre = _float_prefilter(src, values, a, variant, D)
    if pre is not None:
        cand = pre.tolist()
    else:
        prods = _products(src, values, a, variant, D, P)
        bounds = [_stat_bounds(lo, hi, P, variant) for lo, hi in prods]
        cand = []
        env = None
        for i, (lo, hi) in enumerate(bounds):
            env = hi if env is None or hi < env else env
            if lo <= env:
                cand.append(i)
    return [
        (_refinable_min(src, values, a, variant, cand, end, N), None) for N, end in zip(N_grid, ends)
    ]


def _float_prefilter(src: _Sources, values, a: Alpha, variant: str, D: int) -> np.ndarray | None:
    """Indices that can realize a running minimum, screened in double precision.

    Each product alpha*z is known in floats up to a rigorous absolute error;
    an index survives when its lower bound does not exceed the running
    minimum of upper bounds.  Returns None when magnitudes are too large.
    """
    if values is not None:
        if values.int64 is None:
            return None
        k = values.int64[:D]
        if D and int(np.abs(k).max()) >= 1 << 52:
            return None
        zf = k.astype(np.float64) / values.scale
        ez = np.abs(zf).max() * 2.0**-52 if D else 0.0
    else:
        ds = src.ds
        if ds.approx is None:
            return None
        zf = ds.approx[:D]
        ez = ds.approx_err
    if D == 0:
        return np.zeros(0, dtype=np.int64)
    A = a.real
    af = float(A)
    ea = float(A.radius) + abs(af) * 2.0**-52
    x = af * zf
    zmax = float(np.abs(zf).max())
    if zmax * abs(af) >= 2.0**40:
        return None
    err = abs(af) * ez + zmax * ea + np.abs(x) * 2.0**-51 + 2.0**-50
    f = x - np.floor(x)
    if variant == "tilde":
        lo = np.maximum(f - err, 0.0)
        hi = f + err
        wrap = (f - err < 0) | (hi >= 1.0)
        lo[wrap] = 0.0
        hi[wrap] = np.maximum(hi[wrap], 1.0)
    else:
        dist = np.minimum(f, 1.0 - f)
        lo = np.maximum(dist - err, 0.0)
        hi = dist + err
    env = np.minimum.accumulate(hi)
    return np.flatnonzero(lo <= env)


def _refinable_min(src, values, a, variant, cand, end, N) -> GapEntry:
    idx = [i for i in cand if i < end]

    def at(P: int) -> CertifiedReal:
        lo_min = hi_min = None
        for i in idx:
            lo, hi = _stat_bounds(*_single_product(src, values, a, i, P), P, variant)
            lo_min = lo if lo_min is None or lo < lo_min else lo_min
            hi_min = hi if hi_min is None or hi < hi_min else hi_min
        return CertifiedReal(lo_min, hi_min, P)

    val = CertifiedReal.from_source(at, START_BITS)
    return GapEntry(N, variant, val)


def _single_product(src, values, a: Alpha, i: int, P: int) -> tuple[int, int]:
    A = a.real.at(P + 8)
    if values is not None:
        k, sc = values.get(i), values.scale
        lo, hi = (A.lo * k) // sc, -((-A.hi * k) // sc)
        sh = 8
    else:
        z = src.ds.reals[i].at(P + 8)
        prods = (A.lo * z.lo, A.lo * z.hi, A.hi * z.lo, A.hi * z.hi)
        lo, hi = min(prods), max(prods)
        sh = P + 16
    return lo >> sh, -((-hi) >> sh)


# hat ---------------------------------------------------------------------------------


def _hat_curve(src: _Sources, a: Alpha, N_grid, ends, values):
    sign = _alpha_sign(a)
    ds = src.ds
    out = []
    best = None
    pos = 0
    for N, end in zip(N_grid, ends):
        while pos < end:
            if best is None or (_zless(ds, pos, best) if sign >= 0 else _zless(ds, best, pos)):
                best = pos
            pos += 1
        z = ds.real(best)
        val = a.real * z if a.exact is None or z.exact is None else CertifiedReal.from_fraction(a.exact * z.exact)
        out.append((GapEntry(N, "hat", val), [best]))
    return out


def _alpha_sign(a: Alpha) -> int:
    from .numeric import certified_sign

    return certified_sign(a.real)


def _zless(ds: DiffSet, i: int, j: int) -> bool:
    if ds.ints is not None:
        return ds.ints[i] < ds.ints[j]
    x, y = ds.reals[i], ds.reals[j]
    if x.hi < y.lo:
        return True
    if x.lo > y.hi:
        return False
    from .numeric import certified_lt

    return certified_lt(x, y)


# argmin pairs ------------------------------------------------------------------------------


def _with_pair(src: _Sources, a: Alpha, entry: GapEntry, idx):
    if idx is None:
        idx = _resolve_argmin(src, a, entry)
    return GapEntry(entry.N, entry.variant, entry.value, _smallest_pair(src, entry.variant, idx, entry.N))


def _resolve_argmin(src: _Sources, a: Alpha, entry: GapEntry) -> list[int]:
    """Indices attaining the minimum for enclosure-engine entries."""
    variant = entry.variant
    if variant == "floor":
        fd = src.fd
        values = _IntValues(fd.Z, fd.Z_int64, 1)
        end = int(fd.counts[entry.N])
    else:
        ds = src.ds
        values = _IntValues(ds.ints, ds.int64, ds.scale) if ds.rational else None
        end = int(ds.counts[entry.N])
    prods = _products(src, values, a, variant, end, START_BITS)
    bounds = [_stat_bounds(lo, hi, START_BITS, variant) for lo, hi in prods]
    env = min(hi for _, hi in bounds)
    idx = [i for i, (lo, _) in enumerate(bounds) if lo <= env]
    P = START_BITS
    cap = precision_cap()
    while len(idx) > 1:
        keys = [_stat_form(src, values, a, variant, i) for i in idx]
        if all(k is not None for k in keys) and len(set(keys)) == 1:
            return idx
        P = min(2 * P, cap)
        b = {i: _stat_bounds(*_single_product(src, values, a, i, P), P, variant) for i in idx}
        env = min(hi for _, hi in b.values())
        idx = [i for i in idx if b[i][0] <= env]
        if P >= cap and len(idx) > 1:
            keys = [_stat_form(src, values, a, variant, i) for i in idx]
            if all(k is not None for k in keys):
                best = min(set(keys), key=lambda f: float(f.to_real()))
                return [i for i, k in zip(idx, keys) if k == best]
            raise AmbiguityError("argmin cannot be resolved at the precision cap")
    return idx


def _stat_form(src, values, a: Alpha, variant: str, i: int) -> ExactForm | None:
    """Exact form of the statistic value for element i, when representable."""
    from .numeric import certified_floor

    if a.form is None:
        return None
    if values is not None:
        z = ExactForm.rational(Fraction(values.get(i), values.scale))
    else:
        z = src.ds.forms[i]
        if z is None:
            return None
    x = a.form * z
    if x is None:
        return None
    if variant == "hat":
        return x
    n = certified_floor(x.to_real())
    frac = x - ExactForm.rational(n)
    if variant == "tilde":
        return frac
    other = ExactForm.rational(1) - frac
    fr, ot = frac.to_real(), other.to_real()
    from .numeric import certified_lt

    return frac if not certified_lt(ot, fr) else other


def _smallest_pair(src: _Sources, variant: str, idx: list[int], N: int) -> tuple[int, int] | None:
    best = None
    ds = src.ds
    for i in idx:
        if variant == "floor":
            Zval = int(src.fd.Z[i])
            zs = _z_indices_with_floor(ds, Zval, int(ds.counts[N]))
        else:
            zs = [i]
        for zi in zs:
            pr = _pair_for_z(src, zi, N)
            if pr is not None and (best is None or pr < best):
                best = pr
    return best


def _z_indices_with_floor(ds: DiffSet, Zval: int, end: int) -> list[int]:
    if ds.int64 is not None:
        return np.flatnonzero(ds.int64[:end] // ds.scale == Zval).tolist()
    return [n for n in range(end) if ds.floor(n) == Zval]


def _pair_for_z(src: _Sources, zi: int, N: int) -> tuple[int, int] | None:
    """Lexicographically smallest (m, n), m < n <= N, with |a_m - a_n| = z_zi."""
    w, ds = src.window, src.ds
    if w.ints is not None:
        z = int(ds.ints[zi])
        pos = _position_map(w)
        best = None
        for m in range(1, N + 1):
            am = w.ints[m - 1]
            for other in (am + z, am - z):
                n = pos.get(other)
                if n is not None and m < n <= N:
                    if best is None or (m, n) < best:
                        best = (m, n)
            if best is not None and best[0] == m:
                return best
        return best
    if w.step is not None:
        # in a progression the difference k d first occurs at (1, 1 + k)
        i, T = (int(x) for x in ds.pairs[zi])
        return (1, 1 + T - i) if 1 + T - i <= N else None
    f = ds.forms[zi]
    if f is None:
        i, T = ds.pairs[zi]
        return (int(i), int(T)) if T <= N else None
    fmap = _form_map(w)
    best = None
    for m in range(1, N + 1):
        fm = w.forms[m - 1]
        if fm is None:
            continue
        for other in (fm + f, fm - f):
            n = fmap.get(other) if other is not None else None
            if n is not None and m < n <= N:
                if best is None or (m, n) < best:
                    best = (m, n)
        if best is not None and best[0] == m:
            return best
    return best


_POS_CACHE: dict[int, dict] = {}


def _position_map(w: SeqWindow) -> dict:
    key = id(w)
    cached = _POS_CACHE.get(key)
    if cached is None or cached.get("__w") is not w:
        cached = {v: i + 1 for i, v in enumerate(w.ints)}
        cached["__w"] = w
        _POS_CACHE.clear()
        _POS_CACHE[key] = cached
    return cached


def _form_map(w: SeqWindow) -> dict:
    return {f: i + 1 for i, f in enumerate(w.forms) if f is not None}


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

GAP_COLUMNS = ("N", "alpha", "variant", "value", "m", "n")


def format_value(x: CertifiedReal, digits: int = 30) -> str:
    """Exact rationals print as p/q; enclosures print their midpoint."""
    if x.exact is not None:
        return str(x.exact)
    import mpmath

    with mpmath.workprec(x.prec + 16):
        return mpmath.nstr(mpmath.mpf(x.value.numerator) / x.value.denominator, digits)


def write_gap_csv(entries: Iterable[GapEntry], alpha, out: IO[str], header: bool = True) -> None:
    writer = csv.writer(out, lineterminator="\n")
    if header:
        writer.writerow(GAP_COLUMNS)
    for e in entries:
        m, n = e.pair if e.pair else ("", "")
        writer.writerow((e.N, str(alpha), e.variant, format_value(e.value), m, n))
