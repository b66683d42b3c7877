import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import ALPHAS, FAMILIES, RATIONAL_FAMILIES, REAL_FAMILIES, compare_with_oracle
from smallgaps.diffset import build
from smallgaps.gaps import VARIANTS, gap_curve, gap_report, make_alpha, min_gap, parse_alpha, write_gap_csv
from smallgaps.numeric import DomainError
from smallgaps.sequences import explicit, generate, parse_family


def window(fam, N):
    return generate(parse_family(fam), N)


def test_single_pair():
    e = min_gap(generate(explicit(["1", "2"]), 2), "0.5")
    assert e.exact == Fraction(1, 2) and e.pair == (1, 2)


def test_progression_example():
    e = min_gap(window("arithmetic:1,1", 11), "0.305")
    assert e.exact == Fraction(1, 20)
    assert e.pair == (1, 11)


@pytest.mark.parametrize("fam", ["arithmetic:1,1", "polynomial:2", "beatty:pi", "fibonacci", "lacunary:3"])
@pytest.mark.parametrize("alpha", ALPHAS)
def test_floor_equals_std_on_integer_windows(fam, alpha):
    w = window(fam, 25)
    fd = build(w)
    grid = list(range(2, 26))
    std = gap_curve(w, alpha, grid, "std", argmin=False, floored=fd)
    flo = gap_curve(w, alpha, grid, "floor", argmin=False, floored=fd)
    for a, b in zip(std, flo):
        assert a.value.lower == b.value.lower and a.value.upper == b.value.upper


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("alpha", ALPHAS)
def test_matches_oracle(family, alpha):
    N = 6 if family.startswith("explicit") else 13
    assert compare_with_oracle(family, N, alpha) == []


def _brute_lex(vals, a, variant):
    def stat(z):
        if variant == "floor":
            z = Fraction(z.numerator // z.denominator)
        x = a * z
        f = x - x.numerator // x.denominator
        return {"std": min(f, 1 - f), "tilde": f, "hat": x, "floor": min(f, 1 - f)}[variant]

    n = len(vals)
    pairs = [(i + 1, j + 1, stat(abs(vals[j] - vals[i]))) for i in range(n) for j in range(i + 1, n)]
    best = min(p[2] for p in pairs)
    return min((m, k) for m, k, s in pairs if s == best)


@pytest.mark.parametrize(
    "fam", ["explicit:1,2,3,5,8,9,12", "explicit:1,3,4,6,7,10,15,16", "explicit:1/2,3/2,2,7/2,4", "polynomial:2"]
)
@pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(1, 4)])
def test_argmin_ties_lexicographic(fam, a):
    w = generate(parse_family(fam), 8 if fam.startswith("poly") else len(fam.split(",")))
    vals = [w.term_value(n) for n in range(1, w.N + 1)]
    for v in VARIANTS:
        assert gap_curve(w, a, [w.N], v)[0].pair == _brute_lex(vals, a, v)


@settings(max_examples=80)
@given(st.sampled_from(FAMILIES), st.integers(0, 2**64 - 1), st.integers(2, 30))
def test_chain_and_ranges(family, bits, N):
    if family.startswith("explicit"):
        N = min(N, 6)
    alpha = Fraction(bits | 1, 2**64)
    r = gap_report(window(family, N), alpha, argmin=False)
    d, t, h, f = (x.value for x in (r.delta, r.delta_tilde, r.delta_hat, r.delta_floor))
    half = Fraction(1, 2)
    assert d.upper >= 0 and d.lower <= half and f.upper >= 0 and f.lower <= half
    assert t.upper >= 0 and t.lower < 1 and h.upper > 0
    assert r.delta.value.lower <= r.delta_tilde.value.upper
    assert r.delta_tilde.value.lower <= r.delta_hat.value.upper


@settings(max_examples=40)
@given(st.sampled_from(RATIONAL_FAMILIES + REAL_FAMILIES[:4]), st.sampled_from(ALPHAS), st.sampled_from(VARIANTS))
def test_curve_non_increasing(family, alpha, variant):
    N = 6 if family.startswith("explicit") else 30
    curve = gap_curve(window(family, N), alpha, range(2, N + 1), variant, argmin=False)
    for a, b in zip(curve, curve[1:]):
        assert b.value.lower <= a.value.upper


def test_grid_of_one_matches_min_gap():
    w = window("polynomial:2", 10)
    for v in VARIANTS:
        a, b = gap_curve(w, "phi", [2], v)[0], min_gap(w, "phi", v, N=2)
        assert (a.N, a.pair, a.value.lo, a.value.hi) == (b.N, b.pair, b.value.lo, b.value.hi)


def test_golden_ratio_three_distance():
    w = window("arithmetic:1,1", 10_000)
    grid = np.unique(np.geomspace(2, 10_000, 300).astype(int)).tolist()
    for e in gap_curve(w, "frac:phi", grid, argmin=False):
        assert 0.2 <= float(e.value) * e.N <= 1


@settings(max_examples=60)
@given(st.integers(1, 2**32 - 1), st.integers(2, 200))
def test_dirichlet(num, N):
    a = Fraction(num, 2**32 + 15)
    assert min_gap(window("arithmetic:1,1", N), a, "floor", argmin=False).exact <= Fraction(1, N)


@pytest.mark.parametrize("family", ["polynomial:2", "beatty:sqrt2", "lacunary:3", "fibonacci"])
@pytest.mark.parametrize("alpha", ["0.305", "phi", "frac:e"])
def test_alpha_periodicity(family, alpha):
    w = window(family, 20)
    a = parse_alpha(alpha)
    for v in ("std", "tilde", "floor"):
        x, y = min_gap(w, a, v), min_gap(w, a.shifted(3), v)
        assert x.pair == y.pair
        assert x.value.lower <= y.value.upper and y.value.lower <= x.value.upper


def test_errors():
    w = window("polynomial:2", 5)
    with pytest.raises(DomainError):
        min_gap(w, "0.3", N=1)
    with pytest.raises(DomainError):
        gap_curve(w, "0.3", [4, 3])
    with pytest.raises(DomainError):
        gap_curve(w, "0.3", [6])
    with pytest.raises(DomainError):
        min_gap(w, "0.3", "nosuch")
    with pytest.raises(DomainError):
        make_alpha(0.3)


def test_csv():
    buf = io.StringIO()
    w = window("arithmetic:1,1", 11)
    write_gap_csv(gap_curve(w, "0.305", [11]), "0.305", buf)
    head, row = buf.getvalue().splitlines()
    assert head == "N,alpha,variant,value,m,n"
    assert row == "11,0.305,std,1/20,1,11"
