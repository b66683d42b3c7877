"""Truncated evaluation of the zero-one series for the floored minimal gap.

The series is sum_k phi(k) sup_b { sup_{l >= N(bk)} eta(l) / (bk) }, with
N(k) the first window size at which k is a floored positive difference and
the empty supremum taken as 0.  Every term is non-negative, so any
truncation (k <= K_max, b <= B_max, l <= L_max) yields a lower bound.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from .diffset import FlooredDiffSet
from .numeric import DomainError, clamped_log, divisors, totient_table
from .sequences import growth

THRESHOLD_KINDS = ("power", "over_HN", "constant", "explicit")
VERDICTS = ("diverges_suspected", "converges_suspected", "inconclusive")


@dataclass(frozen=True)
class ThresholdSpec:
    """eta(N): ``power`` N^-p, ``over_HN`` N^s / H_N, ``constant`` c, ``explicit`` table.

    An explicit table lists eta(1), eta(2), ...; values past its end are 0.
    """

    kind: str
    param: float = 1.0
    table: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in THRESHOLD_KINDS:
            raise DomainError(f"unknown threshold kind {self.kind!r}")
        if self.kind == "constant" and self.param < 0:
            raise DomainError("eta must be non-negative")
        if self.kind == "explicit" and any(v < 0 for v in self.table):
            raise DomainError("eta must be non-negative")

    @property
    def decreasing(self) -> bool:
        if self.kind == "power":
            return self.param >= 0
        if self.kind == "constant":
            return True
        if self.kind == "explicit":
            t = self.table
            return all(t[i] >= t[i + 1] for i in range(len(t) - 1))
        return False

    def limsup_positive(self) -> bool | None:
        """True or False when decidable from the kind alone, else None."""
        if self.kind == "constant":
            return self.param > 0
        if self.kind == "power":
            return self.param <= 0
        if self.kind == "explicit":
            return False
        return None

    def values(self, L: int, fd: FlooredDiffSet | None = None) -> np.ndarray:
        """eta(0..L) as floats (entry 0 unused)."""
        n = np.arange(L + 1, dtype=float)
        n[0] = 1.0
        if self.kind == "power":
            out = n ** (-float(self.param))
        elif self.kind == "constant":
            out = np.full(L + 1, float(self.param))
        elif self.kind == "explicit":
            out = np.zeros(L + 1)
            m = min(L, len(self.table))
            out[1 : m + 1] = np.asarray(self.table[:m], dtype=float)
        else:
            if fd is None:
                raise DomainError("over_HN thresholds need the floored difference set")
            L = min(L, fd.N)
            H = np.asarray(fd.counts[: L + 1], dtype=float)
            out = np.zeros(L + 1)
            ok = H > 0
            out[ok] = n[: L + 1][ok] ** float(self.param) / H[ok]
        out[0] = 0.0
        return out

    def __str__(self) -> str:
        if self.kind == "explicit":
            return f"explicit:{len(self.table)}"
        return f"{self.kind}:{self.param:g}"


def parse_threshold(text: str) -> ThresholdSpec:
    """``power:2``, ``over_HN:0.5``, ``constant:0.1`` or ``explicit:0.5,0.25,...``."""
    kind, _, arg = text.partition(":")
    if kind == "explicit":
        return ThresholdSpec("explicit", 0.0, tuple(float(x) for x in arg.split(",") if x))
    return ThresholdSpec(kind, float(arg) if arg else 1.0)


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


@dataclass
class _Sup:
    """sup_{N <= l <= L} eta(l) by index, with the analytic collapse for decreasing eta."""

    eta: ThresholdSpec
    L: int
    fd: FlooredDiffSet | None
    table: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        v = self.eta.values(self.L, self.fd)
        self.L = len(v) - 1
        self.table = v if self.eta.decreasing else np.maximum.accumulate(v[::-1])[::-1]

    def __call__(self, N: np.ndarray) -> np.ndarray:
        out = np.zeros(N.shape)
        ok = (N >= 1) & (N <= self.L)
        out[ok] = self.table[N[ok]]
        return out


def _block_terms(fd, sup: _Sup, ks: np.ndarray, B: int, phi: np.ndarray) -> np.ndarray:
    b = np.arange(1, B + 1, dtype=np.int64)
    bk = ks[:, None] * b[None, :]
    first = fd.first_appearance_array(bk.ravel()).reshape(bk.shape)
    vals = sup(first) / bk
    return phi[ks] * vals.max(axis=1)


def series_terms(
    fd: FlooredDiffSet, eta: ThresholdSpec, K_max: int, B_max: int = 1000, L_max: int = 10**6, block: int = 64
) -> np.ndarray:
    """Terms for k = 1..K_max (index 0 of the result is k = 1)."""
    if min(K_max, B_max, L_max) < 1:
        raise DomainError("truncation bounds must be positive")
    sup = _Sup(eta, L_max, fd)
    phi = totient_table(K_max)
    out = np.empty(K_max)
    for s in range(1, K_max + 1, block):
        ks = np.arange(s, min(K_max, s + block - 1) + 1, dtype=np.int64)
        out[s - 1 : s - 1 + ks.size] = _block_terms(fd, sup, ks, B_max, phi)
    return out


def series_term(k: int, fd: FlooredDiffSet, eta: ThresholdSpec, B_max: int = 1000, L_max: int = 10**6) -> float:
    if k < 1:
        raise DomainError("k must be positive")
    sup = _Sup(eta, L_max, fd)
    phi = totient_table(k)
    return float(_block_terms(fd, sup, np.array([k], dtype=np.int64), B_max, phi)[0])


def general_term(k: int, fd: FlooredDiffSet, eta: ThresholdSpec, B_max: int, L_max: int) -> float:
    """The term with the inner sup taken literally over l (no monotone collapse)."""
    v = eta.values(L_max, fd)
    phi = totient_table(k)[k]
    best = 0.0
    for b in range(1, B_max + 1):
        n = fd.first_appearance(b * k)
        if n is None or n > len(v) - 1:
            continue
        best = max(best, float(v[n:].max()) / (b * k))
    return float(phi) * best


# ---------------------------------------------------------------------------
# series evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesEstimate:
    K_max: int
    B_max: int
    L_max: int
    partial_sum: float
    verdict: str
    growth_fit: float
    tail_majorant: float | None = None
    fast_path: bool = False
    is_lower_bound: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, default=str)


def _log_slope(partial: np.ndarray, lo: int, hi: int) -> float:
    """Least-squares slope of partial sums against ln K on log-spaced K in [lo, hi]."""
    K = np.unique(np.geomspace(max(lo, 1), hi, 64).astype(np.int64))
    if K.size < 2:
        return float("nan")
    x = np.log(K.astype(float))
    y = partial[K - 1]
    return float(np.polyfit(x, y, 1)[0])


def tail_majorant(fd: FlooredDiffSet, eta: ThresholdSpec, K: int) -> float | None:
    """Upper bound on the sum of all terms with k > K, or None if unavailable.

    For eta(N) = N^-p and a_n <= c n^theta every difference in the first N
    terms is below c N^theta, so N(m) >= (m/c)^(1/theta) and each term is at
    most c^(p/theta) k^(-p/theta); the tail is then bounded by an integral.
    """
    if eta.kind != "power" or eta.param <= 0:
        return None
    g = growth(fd.window.spec)
    if g.exponent is None or g.coeff is None or g.coeff <= 0:
        return None
    s = float(eta.param) / float(g.exponent)
    if s <= 1:
        return None
    return float(g.coeff) ** s * K ** (1 - s) / (s - 1)


def evaluate_series(
    fd: FlooredDiffSet,
    eta: ThresholdSpec,
    K_max: int = 10**4,
    B_max: int = 1000,
    L_max: int = 10**6,
    diverge_slope: float = 0.1,
    diverge_sum: float = 1.0,
    converge_tail: float = 1e-3,
) -> tuple[SeriesEstimate, np.ndarray]:
    """Truncated partial sum, growth diagnostic and a labelled verdict.

    Returns the estimate and the per-k terms (empty on the limsup fast path).
    """
    if eta.limsup_positive():
        est = SeriesEstimate(K_max, B_max, L_max, 0.0, "diverges_suspected", float("nan"), None, True)
        return est, np.zeros(0)
    terms = series_terms(fd, eta, K_max, B_max, L_max)
    partial = np.cumsum(terms)
    lo = int(math.isqrt(K_max))
    slope = _log_slope(partial, lo, K_max)
    late = _log_slope(partial, int(K_max**0.75), K_max)
    tail = tail_majorant(fd, eta, K_max)
    total = float(partial[-1])
    stable = slope > diverge_slope and late > diverge_slope and abs(late - slope) <= 0.5 * slope
    if tail is not None and tail < converge_tail:
        verdict = "converges_suspected"
    elif stable and total > diverge_sum:
        verdict = "diverges_suspected"
    else:
        verdict = "inconclusive"
    return SeriesEstimate(K_max, B_max, L_max, total, verdict, slope, tail), terms


def write_series_csv(terms: Sequence[float], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("k", "term", "partial_sum"))
    acc = 0.0
    for k, t in enumerate(terms, start=1):
        acc += float(t)
        w.writerow((k, repr(float(t)), repr(acc)))


# ---------------------------------------------------------------------------
# divergence hypothesis checker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    holds: bool
    checked: int
    failures: tuple
    min_block: float


def divergence_witness(
    terms: Callable[[int], float] | Sequence[float],
    A: Callable[[int], bool] | Iterable[int],
    epsilon: float,
    budget: int,
    start: int = 1,
) -> WitnessReport:
    """Check sum_{d | k, d >= log k} a_d >= epsilon for every k in A with start <= k <= budget.

    ``terms`` is a callable d -> a_d or a sequence with a_d at index d - 1.
    This checks the hypothesis on tested k only; it proves nothing about the tail.
    """
    a = terms if callable(terms) else (lambda d: float(terms[d - 1]))
    if callable(A):
        ks = [k for k in range(start, budget + 1) if A(k)]
    else:
        ks = sorted(k for k in A if start <= k <= budget)
    if not ks:
        raise DomainError("no index of A inside the budget")
    fails = []
    low = math.inf
    for k in ks:
        lk = clamped_log(k)
        s = sum(a(d) for d in divisors(k) if d >= lk)
        low = min(low, s)
        if s < epsilon:
            fails.append(k)
    return WitnessReport(not fails, len(ks), tuple(fails), float(low))


# ---------------------------------------------------------------------------
# totient identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TotientReport:
    K: int
    divisor_sum_violations: tuple
    K0: int  # smallest K0 with the small-divisor bound holding on [K0, K]


def totient_checks(K: int = 10**5, clamped: bool = True) -> TotientReport:
    """sum_{d | k} phi(d) = k, and sum_{d | k, d < log k} phi(d) < k/2 with K0 reported."""
    phi = totient_table(K)
    full = np.zeros(K + 1, dtype=np.int64)
    small = np.zeros(K + 1, dtype=np.int64)
    k = np.arange(K + 1, dtype=float)
    k[0] = 1.0
    logk = np.log(k)
    if clamped:
        logk = np.maximum(logk, 1.0)
    for d in range(1, K + 1):
        full[d::d] += phi[d]
    for d in range(1, int(math.log(K)) + 2):
        idx = np.arange(d, K + 1, d)
        idx = idx[d < logk[idx]]
        small[idx] += phi[d]
    ks = np.arange(K + 1)
    bad = np.flatnonzero((full != ks)[1:]) + 1
    fail = np.flatnonzero(~(small[1:] < ks[1:] / 2)) + 1
    K0 = int(fail.max()) + 1 if fail.size else 1
    return TotientReport(K, tuple(bad.tolist()), K0)
