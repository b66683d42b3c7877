import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallgaps.diffset import CoverageError, build
from smallgaps.numeric import DomainError, totient
from smallgaps.sequences import parse_family
from smallgaps.zeroone import (
    ThresholdSpec,
    divergence_witness,
    evaluate_series,
    general_term,
    parse_threshold,
    series_term,
    series_terms,
    totient_checks,
    write_series_csv,
)

AP = build(parse_family("arithmetic:1,1"), 50)
SQ = build(parse_family("polynomial:2"), 2000)


def test_progression_closed_form():
    eta = ThresholdSpec("power", 2)
    for k in range(1, 60):
        want = totient(k) / (k * (k + 1) ** 2)
        assert series_term(k, AP, eta, B_max=10, L_max=10**6) == pytest.approx(want, rel=1e-14)


def test_progression_first_appearance():
    assert [AP.first_appearance(k) for k in range(1, 200)] == list(range(2, 201))


def test_absent_multiples_give_zero():
    # squares never differ by 2 mod 4, so 2b is absent for every odd b
    eta = ThresholdSpec("power", 1)
    assert series_term(2, SQ, eta, B_max=1) == 0.0
    assert series_term(6, SQ, eta, B_max=1) == 0.0
    assert series_term(2, SQ, eta, B_max=2) == 0.0  # 4 is not a difference of squares either
    assert series_term(2, SQ, eta, B_max=4) > 0.0  # 8 = 9 - 1


def test_zero_threshold():
    terms = series_terms(SQ, ThresholdSpec("constant", 0.0), 100, 20, 1000)
    assert not terms.any()


def test_explicit_table_is_zero_past_its_end():
    eta = parse_threshold("explicit:0.5,0.25,0.125")
    assert eta.values(6).tolist() == [0, 0.5, 0.25, 0.125, 0, 0, 0]
    assert series_term(1, AP, eta, 5, 100) == pytest.approx(0.25)  # eta(N(1)) = eta(2)
    assert series_term(3, AP, eta, 5, 100) == 0.0  # N(3) = 4 is past the table


@settings(max_examples=40)
@given(
    st.sampled_from(["power:1", "power:2", "power:0.5", "over_HN:1.5", "explicit:1,0.2,0.6,0.1,0.3"]),
    st.integers(1, 60),
    st.integers(1, 20),
    st.integers(2, 300),
)
def test_truncation_monotone(eta_text, K, B, L):
    eta = parse_threshold(eta_text)
    base = series_terms(SQ, eta, K, B, L).sum()
    assert series_terms(SQ, eta, K + 7, B, L).sum() >= base
    assert series_terms(SQ, eta, K, B + 5, L).sum() >= base
    assert series_terms(SQ, eta, K, B, L + 50).sum() >= base


@pytest.mark.parametrize("fam", ["arithmetic:1,1", "polynomial:2", "beatty:sqrt2", "fibonacci"])
@pytest.mark.parametrize("eta_text", ["power:1", "power:2", "explicit:0.9,0.5,0.5,0.2,0.1", "over_HN:1.2"])
def test_simplified_equals_general(fam, eta_text):
    fd = build(parse_family(fam), {"polynomial:2": 100, "beatty:sqrt2": 150}.get(fam, 40))
    eta = parse_threshold(eta_text)
    B, L = 6, fd.N
    ks = range(1, 30 if fam != "fibonacci" else 15)
    fast = series_terms(fd, eta, len(ks), B, L)
    for k in ks:
        assert fast[k - 1] == pytest.approx(general_term(k, fd, eta, B, L), rel=1e-13, abs=0)


def test_coverage_error_propagates():
    fd = build(parse_family("polynomial:2"), 10)
    with pytest.raises(CoverageError):
        series_terms(fd, ThresholdSpec("power", 2), 200, 5, 100)


def test_limsup_fast_path():
    est, terms = evaluate_series(SQ, ThresholdSpec("constant", 0.1))
    assert est.verdict == "diverges_suspected" and est.fast_path and terms.size == 0
    assert ThresholdSpec("power", 1).limsup_positive() is False


def test_small_convergent_case():
    fd = build(parse_family("arithmetic:1,1"), 2001)
    est, terms = evaluate_series(fd, ThresholdSpec("power", 2), K_max=2000, B_max=50, L_max=10**5)
    assert est.verdict == "converges_suspected"
    assert est.tail_majorant < 1e-3
    assert est.is_lower_bound and est.partial_sum == pytest.approx(terms.sum())


def test_divergence_witness_examples():
    assert divergence_witness(lambda d: 1.0, range(3, 500), 1.0, 500).holds
    r = divergence_witness(lambda d: 0.0, range(3, 50), 0.01, 50)
    assert not r.holds and r.failures[0] == 3
    with pytest.raises(DomainError):
        divergence_witness([1.0] * 5, range(10, 20), 0.5, 5)


def test_divergence_witness_series_instantiation():
    # a_d = phi(d) * term mass at d for a_n = n, eta = 1/N; blocks stay bounded below
    eta = ThresholdSpec("power", 1)
    terms = series_terms(AP, eta, 40, 20, 10**4)
    a = [t for t in terms]
    r = divergence_witness(a, range(3, 41), 0.0, 40)
    assert r.holds and r.min_block > 0


def test_totient_identities_small():
    rep = totient_checks(5000)
    assert rep.divisor_sum_violations == ()
    assert rep.K0 < 10


def test_csv_and_json():
    buf = io.StringIO()
    write_series_csv([0.5, 0.25], buf)
    assert buf.getvalue().splitlines() == ["k,term,partial_sum", "1,0.5,0.5", "2,0.25,0.75"]
    est, _ = evaluate_series(AP, ThresholdSpec("power", 2), K_max=30, B_max=5, L_max=100)
    data = json.loads(est.to_json())
    assert data["K_max"] == 30 and data["is_lower_bound"] is True


def test_threshold_validation():
    with pytest.raises(DomainError):
        ThresholdSpec("nosuch")
    with pytest.raises(DomainError):
        ThresholdSpec("constant", -1)
    with pytest.raises(DomainError):
        ThresholdSpec("over_HN", 1).values(10)
    assert str(parse_threshold("power:2")) == "power:2"
