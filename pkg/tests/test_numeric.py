import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from smallgaps.numeric import (
    EULER_GAMMA,
    AmbiguityError,
    CertifiedReal,
    DomainError,
    certified_floor,
    clamped_log,
    divisors,
    factorize,
    frac_part,
    mertens_product,
    nearest_int_distance,
    parse_exact,
    primes_up_to,
    totient,
    totient_table,
    union_measure,
)
from smallgaps.forms import ExactForm

Q = CertifiedReal.from_fraction


class TestClampedLog:
    def test_one(self):
        assert clamped_log(1, 1) == 1
        assert clamped_log(1, 2) == 1

    def test_two_step_clamp(self):
        assert clamped_log(math.e**3, 2) == pytest.approx(math.log(3), rel=1e-12)

    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            clamped_log(0)
        with pytest.raises(DomainError):
            clamped_log(5, 4)

    @given(st.floats(min_value=1e-6, max_value=1e300), st.integers(1, 3))
    def test_at_least_one(self, x, d):
        assert clamped_log(x, d) >= 1


class TestNearestInt:
    @pytest.mark.parametrize("x,want", [("1/2", "1/2"), ("5/4", "1/4"), ("-3/10", "3/10")])
    def test_examples(self, x, want):
        assert nearest_int_distance(Q(Fraction(x))).exact == Fraction(want)

    @given(st.fractions(min_value=-50, max_value=50, max_denominator=10**6))
    def test_properties(self, q):
        d = nearest_int_distance(Q(q)).exact
        assert 0 <= d <= Fraction(1, 2)
        assert d == nearest_int_distance(Q(q + 1)).exact == nearest_int_distance(Q(-q)).exact
        f = frac_part(Q(q)).exact
        assert d <= f and d <= 1 - f

    def test_irrational(self):
        x = ExactForm.root(2, 2).to_real()
        assert float(nearest_int_distance(x)) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)


class TestFloor:
    def test_examples(self):
        assert certified_floor(Q(Fraction(7, 10))) == 0
        assert certified_floor(Q(3)) == 3
        assert certified_floor(Q(Fraction(-1, 3))) == -1

    def test_adversarial_enclosure(self):
        x = CertifiedReal.enclosure(Fraction(2999999, 10**6), Fraction(3000001, 10**6))
        with pytest.raises(AmbiguityError):
            certified_floor(x)

    def test_refines_near_integer(self):
        # e^pi - pi is about 19.999099979, so the floor needs a few digits only
        from smallgaps.numeric import cr_exp, cr_pi

        x = cr_exp(cr_pi()) - cr_pi()
        assert certified_floor(x) == 19

    def test_cap_below_start_rejected(self, monkeypatch):
        monkeypatch.setenv("SMALLGAPS_PRECISION_CAP", "64")
        with pytest.raises(DomainError):
            certified_floor(ExactForm.root(2, 2).to_real())


class TestUnion:
    def test_examples(self):
        assert union_measure([("0.1", "0.3"), ("0.2", "0.4")]).measure == Fraction(3, 10)
        assert union_measure([]).measure == 0
        u = union_measure([("-0.1", "0.1"), ("0.9", "1.1")])
        assert u.measure == Fraction(1, 5)

    intervals = st.lists(
        st.tuples(st.fractions(0, 1, max_denominator=50), st.fractions(0, 1, max_denominator=50)).map(sorted),
        max_size=8,
    )

    @given(intervals, intervals)
    def test_subadditive_and_idempotent(self, a, b):
        A, B = union_measure(a), union_measure(b)
        U = A.union(B)
        assert U.measure <= A.measure + B.measure
        assert U.measure == A.measure + B.measure - A.intersection(B).measure
        assert A.union(A) == A
        lo = [x for x, _ in A.intervals]
        assert lo == sorted(lo)
        assert all(h1 < l2 for (_, h1), (l2, _) in zip(A.intervals, A.intervals[1:]))


class TestArithmetic:
    def test_totient(self):
        assert totient(6) == 2 and totient(1) == 1
        assert sum(totient(d) for d in divisors(6)) == 6
        with pytest.raises(DomainError):
            totient(0)

    def test_factorize(self):
        assert factorize(65536) == [(2, 16)]
        n = (2**61 - 1) * (2**31 - 1) * 3**4
        assert factorize(n) == [(3, 4), (2**31 - 1, 1), (2**61 - 1, 1)]

    def test_totient_table_matches(self):
        t = totient_table(2000)
        assert all(t[k] == totient(k) for k in range(1, 2001))

    def test_primes(self):
        assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        assert len(primes_up_to(10**5)) == 9592

    def test_mertens(self):
        assert mertens_product(2, exact=True) == Fraction(1, 2)
        assert mertens_product(10, exact=True) == Fraction(8, 35)
        r = mertens_product(65536) * math.exp(EULER_GAMMA) * math.log(65536)
        assert 0.9 <= r <= 1.1

    @given(st.integers(1, 10**12))
    def test_factorize_roundtrip(self, n):
        f = factorize(n)
        assert math.prod(p**e for p, e in f) == n
        assert [p for p, _ in f] == sorted(p for p, _ in f)


def test_parse_exact():
    assert parse_exact("0x0.8") == Fraction(1, 2)
    assert parse_exact("-1.25") == Fraction(-5, 4)
    assert parse_exact("1e-3") == Fraction(1, 1000)
    with pytest.raises(DomainError):
        parse_exact("abc")


@given(st.fractions(-100, 100, max_denominator=1000), st.fractions(-100, 100, max_denominator=1000))
def test_enclosure_arithmetic_contains_exact(a, b):
    x, y = Q(a), Q(b)
    for got, want in ((x + y, a + b), (x - y, a - b), (x * y, a * b)):
        assert got.lower <= want <= got.upper
