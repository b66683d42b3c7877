"""Shared family pool and oracle comparison used by several test modules."""

from __future__ import annotations

from fractions import Fraction

import mpmath

import oracle
from smallgaps.diffset import build, cardinality_report
from smallgaps.gaps import VARIANTS, gap_curve, make_alpha
from smallgaps.sequences import generate, parse_family

RATIONAL_FAMILIES = (
    "arithmetic:1,1",
    "arithmetic:3/2,1/3",
    "polynomial:2",
    "polynomial:3",
    "beatty:sqrt2",
    "beatty:pi",
    "beatty:phi",
    "lacunary:3",
    "lacunary:3/2",
    "fibonacci",
    "explicit:0.5,1.2,3,7/3,10,2.25",
    "smooth:affine(1/2,3)@polynomial:2",
)

REAL_FAMILIES = (
    "arithmetic:sqrt2,pi",
    "polynomial:1/2",
    "polynomial:3/2",
    "lacunary:e",
    "smooth:xlogx@arithmetic:2,1",
    "smooth:exp@arithmetic:1,1",
    "smooth:sinh@arithmetic:1,1",
    "smooth:xklog(2)@arithmetic:1,1",
    "smooth:affine(sqrt2,0)@polynomial:1/2",
    "smooth:power(3/2)@arithmetic:1,1",
)

FAMILIES = RATIONAL_FAMILIES + REAL_FAMILIES

# families whose consecutive terms are at least 1 apart
GAP_ONE_FAMILIES = (
    "arithmetic:1,1",
    "polynomial:2",
    "beatty:sqrt2",
    "beatty:pi",
    "lacunary:3",
    "fibonacci",
    "smooth:xlogx@arithmetic:2,1",
)

ALPHAS = ("0.305", "3/7", "0x0.9e3779b97f4a7c15f39cc0605cedc834", "phi", "frac:pi", "frac:e", "frac:sqrt2")


def oracle_alpha(text: str):
    a = make_alpha(text)
    if a.exact is not None:
        return a.exact
    body = text[5:] if text.startswith("frac:") else text
    with mpmath.workdps(oracle.DPS):
        v = oracle.const(body)
        return v - mpmath.floor(v) if text.startswith("frac:") else v


def _close(value, want) -> bool:
    with mpmath.workdps(oracle.DPS):
        if value.exact is not None and isinstance(want, Fraction):
            return value.exact == want
        lo = mpmath.mpf(value.lower.numerator) / value.lower.denominator
        hi = mpmath.mpf(value.upper.numerator) / value.upper.denominator
        w = want if not isinstance(want, Fraction) else mpmath.mpf(want.numerator) / want.denominator
        return lo - mpmath.mpf(10) ** -30 <= w <= hi + mpmath.mpf(10) ** -30


def compare_with_oracle(family: str, N: int, alpha: str) -> list[str]:
    """Mismatch descriptions (empty when everything agrees)."""
    spec = parse_family(family)
    w = generate(spec, N)
    fd = build(w)
    ts = oracle.terms(family, N)
    bad = []
    got = cardinality_report(fd, N)
    want = oracle.cardinalities(ts, N)
    if (got.C, got.D, got.H, got.T, got.B, got.B_tilde) != want:
        bad.append(f"cardinalities {got} != {want}")
    a = oracle_alpha(alpha)
    if w.rational and isinstance(a, Fraction):
        vals = [Fraction(v, w.scale) for v in w.ints]
        expected = oracle.gaps_exact(vals, N, a)
    else:
        expected = oracle.gaps(ts, N, a)
    for v, e in zip(VARIANTS, expected):
        entry = gap_curve(w, alpha, [N], v, floored=fd)[0]
        if not _close(entry.value, e):
            bad.append(f"{v}: {float(entry.value)} != {float(e)}")
        if entry.pair is None:
            bad.append(f"{v}: no argmin pair")
            continue
        m, n = entry.pair
        if not 1 <= m < n <= N:
            bad.append(f"{v}: pair {entry.pair} out of range")
            continue
        if not _close(entry.value, _pair_stat(ts, m, n, a, v)):
            bad.append(f"{v}: pair {entry.pair} does not attain the minimum")
    return bad


def _pair_stat(ts, m, n, a, variant):
    with mpmath.workdps(oracle.DPS):
        if isinstance(a, Fraction):
            a = mpmath.mpf(a.numerator) / a.denominator
        z = abs(ts[n - 1] - ts[m - 1])
        if variant == "std":
            return oracle._dist(a * z)
        if variant == "tilde":
            return oracle._frac(a * z)
        if variant == "hat":
            return a * z
        return oracle._dist(a * oracle._floor(z))
