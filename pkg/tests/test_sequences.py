import math
from fractions import Fraction

import mpmath
import pytest

import oracle
from helpers import FAMILIES
from smallgaps.numeric import certified_floor
from smallgaps.sequences import (
    SpecError,
    arithmetic,
    beatty,
    explicit,
    gap_is_constant,
    gap_profile,
    generate,
    lacunary_geometric,
    parse_family,
    polynomial,
    smooth_image,
)


def ints(w):
    return [w.term_value(n) for n in range(1, w.N + 1)]


def test_examples():
    assert ints(generate(arithmetic(1, 1), 5)) == [1, 2, 3, 4, 5]
    assert ints(generate(beatty("sqrt2"), 5)) == [1, 2, 4, 5, 7]
    assert ints(generate(polynomial(2), 5)) == [1, 4, 9, 16, 25]
    assert ints(generate(parse_family("fibonacci"), 6)) == [1, 2, 3, 5, 8, 13]


@pytest.mark.parametrize("family", FAMILIES)
def test_terms_match_oracle(family):
    N = 6 if family.startswith("explicit") else 30
    w = generate(parse_family(family), N)
    want = oracle.terms(family, N)
    with mpmath.workdps(oracle.DPS):
        for n in range(N):
            r = w.reals[n] if w.ints is None else None
            if r is None:
                got = w.term_value(n + 1)
                assert abs(mpmath.mpf(got.numerator) / got.denominator - want[n]) < oracle.TOL
            else:
                lo = mpmath.mpf(r.lower.numerator) / r.lower.denominator
                hi = mpmath.mpf(r.upper.numerator) / r.upper.denominator
                assert lo - oracle.TOL <= want[n] <= hi + oracle.TOL


def test_beatty_steps():
    for theta in ("sqrt2", "pi", "phi", "sqrt5"):
        w = generate(beatty(theta), 400)
        t = certified_floor(w.spec.params[0].to_real())
        a = ints(w)
        assert {y - x for x, y in zip(a, a[1:])} <= {t, t + 1}


@pytest.mark.parametrize("c", ["3", "3/2", "e", "pi"])
def test_lacunary_gap(c):
    w = generate(lacunary_geometric(c), 25)
    g = gap_profile(w)
    cl = g.exact if g.exact is not None else g.lower
    vals = [float(r) for r in w.reals]
    for i in range(len(vals)):
        for j in range(i):
            assert abs(vals[i] - vals[j]) >= float(cl) * (1 - 1e-12)


@pytest.mark.parametrize("theta", ["1", "3/2", "2", "3", "sqrt2"])
def test_polynomial_gap(theta):
    w = generate(polynomial(theta), 50)
    g = float(gap_profile(w))
    t = float(parse_family(f"polynomial:{theta}").params[0].to_real())
    assert g == pytest.approx(2**t - 1, rel=1e-12)
    assert float(w.min_gap) >= g * (1 - 1e-12)


def test_gap_profile_examples():
    assert gap_profile(generate(arithmetic(1, 1), 100)).exact == 1
    assert gap_profile(generate(polynomial("1/2"), 16)).exact == Fraction(1, 8)
    e = math.e
    assert float(gap_profile(generate(lacunary_geometric("e"), 10))) == pytest.approx((e - 1) * e, rel=1e-12)
    assert not gap_is_constant(polynomial("1/2"))
    assert gap_is_constant(polynomial(2))


@pytest.mark.parametrize("family", ["polynomial:1/2", "polynomial:2/3", "smooth:xlogx@arithmetic:2,1", "smooth:exp@polynomial:1/2"])
def test_gap_profile_is_a_lower_bound(family):
    for N in (5, 20, 60):
        w = generate(parse_family(family), N)
        g = gap_profile(w)
        low = g.exact if g.exact is not None else g.lower
        assert low <= w.min_gap_lower or low <= w.min_gap.upper


def test_smooth_constructor_matches_parser():
    a = generate(smooth_image(arithmetic(2, 1), "xlogx"), 10)
    b = generate(parse_family("smooth:xlogx@arithmetic:2,1"), 10)
    assert [float(x) for x in a.reals] == [float(x) for x in b.reals]


def test_rejections():
    with pytest.raises(SpecError):
        explicit([0.5, 1.0])
    with pytest.raises(SpecError):
        generate(explicit(["1", "2", "1"]), 3)
    with pytest.raises(SpecError):
        generate(explicit(["1", "2"]), 3)
    with pytest.raises(SpecError):
        parse_family("polynomial")
    with pytest.raises(SpecError):
        parse_family("nosuch:1")
    with pytest.raises(SpecError):
        parse_family("smooth:xlogx")
    with pytest.raises(SpecError):
        generate(arithmetic(1, 0), 3)
    with pytest.raises(SpecError):
        generate(explicit(["-1", "2"]), 2)


def test_irrational_parameters_keep_identity():
    # sqrt2 * sqrt2 must be exactly 2 so that Beatty floors at integers are certified
    w = generate(parse_family("smooth:power(2)@polynomial:1/2"), 10)
    assert [float(x) for x in w.reals] == [float(n) for n in range(1, 11)]
