import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallgaps.diffset import build, floored_with_at_least
from smallgaps.experiments import alpha_float, sample_alphas
from smallgaps.numeric import DomainError
from smallgaps.pairstats import (
    PAIRSTAT_COLUMNS,
    BumpFunction,
    concentration_schedule,
    eval_DNM,
    eval_DNM_batch,
    gcd_sum,
    gcd_sum_bound,
    gcd_sum_profile,
    gcd_sum_violations,
    growth_ratios,
    mean_identity_check,
    mean_variance_experiment,
    schedule,
    write_pairstat_csv,
)
from smallgaps.sequences import parse_family

BUMP = BumpFunction.standard()


def fd_of(fam, N):
    return build(parse_family(fam), N)


def test_bump_normalization():
    with mpmath.workdps(30):
        mass = mpmath.quad(lambda x: BUMP.c * mpmath.exp(-1 / (1 - 4 * x * x)), [-0.5, 0, 0.5])
    assert abs(mass - 1) < 1e-12


@settings(max_examples=100)
@given(st.floats(-2, 2))
def test_bump_shape(x):
    assert BUMP.f(x) == BUMP.f(-x) >= 0
    if abs(x) >= 0.5:
        assert BUMP.f(x) == 0


@settings(max_examples=100)
@given(st.floats(-5, 5), st.sampled_from([0.3, 0.7, 1.0, 2.5, 40.0]))
def test_periodization(x, M):
    J = range(-12, 13)
    direct = sum(float(BUMP.f(M * (x - math.floor(x) + j))) for j in J)
    assert float(BUMP.F(x, M)) == pytest.approx(direct, rel=1e-9, abs=1e-12)
    assert float(BUMP.F(x + 3, M)) == pytest.approx(float(BUMP.F(x, M)), rel=1e-9, abs=1e-12)


def test_outside_support_is_zero():
    fd = fd_of("arithmetic:1,1", 3)  # Z = {1, 2}
    # alpha = 1/4: ||alpha z|| in {1/4, 1/2} > 1/(2M) for M = 4
    assert eval_DNM(fd, 3, 4, "1/4") == 0.0


def test_single_integer_product_gives_peak():
    fd = fd_of("arithmetic:1,1", 2)
    assert eval_DNM(fd, 2, 3, "2") == pytest.approx(BUMP.peak(), rel=1e-15)


@pytest.mark.parametrize("alpha", ["0.305", "3/7", "0.9"])
def test_small_progression_brute(alpha):
    fd = fd_of("arithmetic:1,1", 3)
    a = float(eval(alpha.replace("/", "/1.0/"))) if "/" in alpha else float(alpha)
    want = sum(float(BUMP.f(1 * (a * z - math.floor(a * z) + j))) for z in (1, 2) for j in range(-2, 3))
    assert eval_DNM(fd, 3, 1, alpha) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("alpha", ["0.305", "phi", "frac:e"])
def test_alpha_plus_one(alpha):
    from smallgaps.gaps import parse_alpha

    fd = fd_of("polynomial:2", 30)
    a = parse_alpha(alpha)
    assert eval_DNM(fd, 30, 7.5, a) == pytest.approx(eval_DNM(fd, 30, 7.5, a.shifted(1)), rel=1e-12)


def test_batch_matches_single():
    fd = fd_of("beatty:sqrt2", 40)
    al = [alpha_float(a) for a in sample_alphas(3, 20)]
    batch = eval_DNM_batch(fd, 40, 11.0, al)
    single = [eval_DNM(fd, 40, 11.0, a) for a in sample_alphas(3, 20)]
    assert np.allclose(batch, single, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("z", [1, 7, 100])
def test_mean_identity(z):
    for M in (0.5, 3.0, 40.0):
        assert abs(mean_identity_check(z, M) - 1 / M) < 1e-6


def test_gcd_sum_examples():
    fd = fd_of("arithmetic:1,1", 4)  # Z = {1, 2, 3}
    want = 3 + 2 * (1 / math.sqrt(2) + 1 / math.sqrt(3) + 1 / math.sqrt(6))
    assert gcd_sum(fd, 3) == pytest.approx(want, rel=1e-14)
    assert gcd_sum(fd, 1) == 1
    with pytest.raises(DomainError):
        gcd_sum(fd, 0)


@pytest.mark.parametrize("fam", ["polynomial:2", "fibonacci", "beatty:pi"])
def test_gcd_profile_against_naive(fam):
    fd = fd_of(fam, 25)
    Z = fd.values()
    prof = gcd_sum_profile(fd, len(Z), block=7)
    for h in (1, 5, len(Z)):
        naive = sum(math.gcd(a, b) / math.sqrt(a * b) for a in Z[:h] for b in Z[:h])
        assert prof[h - 1] == pytest.approx(naive, rel=1e-12)
        assert prof[h - 1] >= h


def test_gcd_bound_small():
    for fam in ("arithmetic:1,1", "polynomial:2", "lacunary:3"):
        fd = floored_with_at_least(parse_family(fam), 500)
        assert gcd_sum_violations(fd, 500) == []
    assert gcd_sum_bound(1) == pytest.approx(math.exp(7))


@pytest.mark.parametrize("fam", ["arithmetic:1,1", "polynomial:2", "beatty:sqrt2", "fibonacci"])
def test_variance_ratio(fam):
    fd = fd_of(fam, 60 if fam != "fibonacci" else 30)
    N = fd.N
    al = [alpha_float(a) for a in sample_alphas(11, 400)]
    M = fd.H(N) / N
    r = mean_variance_experiment(fd, N, M, al)
    assert r.mean_expected == pytest.approx(fd.H(N) / M)
    assert r.gcd_sum >= fd.H(N)
    assert r.ratio <= 10


def test_mean_expected_vanishes_for_large_M():
    fd = fd_of("polynomial:2", 20)
    al = [i / 137 for i in range(1, 137)]
    assert mean_variance_experiment(fd, 20, 1e9, al).mean_expected < 1e-6
    with pytest.raises(DomainError):
        mean_variance_experiment(fd, 20, 3, al[:50])


def test_schedule():
    assert [schedule(k, 1) for k in range(1, 6)] == [1, 4, 9, 16, 25]
    assert [schedule(k, 2) for k in range(1, 6)] == [1, 2, 3, 4, 5]
    assert [schedule(k, 0.5) for k in range(1, 4)] == [1, 16, 81]
    assert [schedule(k, 1, "growth") for k in (1, 4, 9, 10)] == [1, 2, 3, 3]
    with pytest.raises(DomainError):
        schedule(3, 0)
    with pytest.raises(DomainError):
        schedule(3, 2.5)


FAMS = ["arithmetic:1,1", "polynomial:2", "polynomial:3/2", "beatty:sqrt2", "lacunary:3", "fibonacci", "smooth:xlogx@arithmetic:2,1"]


@pytest.mark.parametrize("fam", FAMS)
def test_concentration_growth(fam):
    small = "lac" in fam or "fib" in fam
    fd = fd_of(fam, 120 if small else 400)
    for eta in (1, 2):
        assert all(r <= 9 for _, r in growth_ratios(fd, eta, range(1, 400), kind="concentration"))
    # smaller eta: the constant grows, but the ratio settles below 9 once k >= 4
    assert all(r <= 9 for _, r in growth_ratios(fd, 0.5, range(4, 400), kind="concentration"))


def test_concentration_rows():
    fd = fd_of("arithmetic:1,1", 100)
    rows = concentration_schedule(fd, 1, range(1, 20))
    assert [r.N for r in rows] == [k * k for k in range(2, 11)]
    assert all(r.M == pytest.approx(r.H / r.N) for r in rows)


def test_csv():
    fd = fd_of("arithmetic:1,1", 10)
    r = mean_variance_experiment(fd, 10, 1.0, [i / 101 for i in range(1, 101)])
    buf = io.StringIO()
    write_pairstat_csv([r], buf)
    head, row = buf.getvalue().splitlines()
    assert head == ",".join(PAIRSTAT_COLUMNS) == "N,M,mean_expected,empirical_mean,empirical_variance,gcd_sum,ratio"
    assert row.startswith("10,1.0,9.0,")
