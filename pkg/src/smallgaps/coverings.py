"""Covering sets S_n and the overlap quantities used in Borel-Cantelli arguments.

Every set is an exact IntervalUnion whenever its endpoints are rational, so
measures, intersections and the Chung-Erdos inequality are evaluated with
Fractions rather than floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import IO, Callable, Iterable, Sequence

from .diffset import CoverageError, FlooredDiffSet
from .numeric import (
    EULER_GAMMA,
    CertifiedReal,
    DomainError,
    IntervalUnion,
    certified_floor,
    clamped_log,
    factorize,
    primes_in_range,
    primes_up_to,
    totient,
    union_measure,
)

SIEVE_LIMIT = 4**12
PSI_KINDS = ("thm1", "coprime", "quarter", "half")
MODES = ("all", "coprime", "sifted")


# ---------------------------------------------------------------------------
# psi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiSpec:
    """Radius function psi(n).

    ``thm1``: 1/(n log sqrt(n) (log2 sqrt(n))^(1+eps)) with clamped logs;
    ``coprime``: log2 Z_n / (n log n log2 n); ``quarter``: 1/(4n);
    ``half``: 1/(2n).  Irrational values are returned as the exact binary
    value of their double rounding, which keeps every set rational.
    """

    kind: str = "quarter"
    eps: Fraction = Fraction(1, 10)

    def __post_init__(self) -> None:
        if self.kind not in PSI_KINDS:
            raise DomainError(f"unknown psi kind {self.kind!r}; expected one of {PSI_KINDS}")

    def __call__(self, n: int, Z: int | None = None) -> Fraction:
        if n < 1:
            raise DomainError(f"psi needs n >= 1, got {n}")
        if self.kind == "quarter":
            return Fraction(1, 4 * n)
        if self.kind == "half":
            return Fraction(1, 2 * n)
        if self.kind == "thm1":
            r = math.sqrt(n)
            v = 1.0 / (n * clamped_log(r) * clamped_log(r, 2) ** (1 + float(self.eps)))
            return Fraction(v)
        if Z is None:
            raise DomainError("coprime psi needs Z_n")
        v = clamped_log(Z, 2) / (n * clamped_log(n) * clamped_log(n, 2))
        return Fraction(v)


def parse_psi(text: str) -> PsiSpec:
    """``quarter``, ``half``, ``coprime`` or ``thm1`` / ``thm1:<eps>``."""
    name, _, arg = text.partition(":")
    if name == "thm1" and arg:
        return PsiSpec("thm1", Fraction(arg))
    return PsiSpec(name)


# ---------------------------------------------------------------------------
# S_n
# ---------------------------------------------------------------------------


def _admissible(mode: str, k: int | None, Z: int) -> Callable[[int], bool]:
    if mode == "all":
        return lambda a: True
    if mode == "coprime":
        return lambda a: math.gcd(a, Z) == 1
    if k is None:
        raise DomainError("sifted mode needs k")
    S = smooth_of(Z, k)
    return lambda a: math.gcd(a, S) == 1


def smooth_of(Z: int, k: int) -> int:
    """Part of Z built from primes <= 4^k."""
    bound = 4**k
    s = 1
    for p, e in factorize(Z) if Z > 1 else []:
        if p <= bound:
            s *= p**e
    return s


def build_S(z, psi, mode: str = "all", k: int | None = None) -> IntervalUnion:
    """Union over admissible a of (a/z - psi/z, a/z + psi/z), clipped to [0, 1].

    mode ``all`` takes a in {0, ..., floor(z)+1} and accepts real z;
    ``coprime`` and ``sifted`` need an integer z = Z and take a in {0, ..., Z},
    keeping a when gcd(a, Z) = 1, respectively when gcd(a, Z) has no prime
    factor <= 4^k.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    psi = Fraction(psi)
    if psi <= 0:
        raise DomainError("psi must be positive")
    if isinstance(z, CertifiedReal) and z.exact is None:
        if mode != "all":
            raise DomainError(f"mode {mode} needs an integer z")
        top = certified_floor(z) + 1
        zr = z.reciprocal()
        iv = []
        for a in range(top + 1):
            c = zr.scale(Fraction(a))
            w = zr.scale(psi)
            iv.append((c - w, c + w))
        return union_measure(iv)
    zq = z.exact if isinstance(z, CertifiedReal) else Fraction(z)
    if zq <= 0:
        raise DomainError("z must be positive")
    if mode == "all":
        top = math.floor(zq) + 1
        ok = _admissible("all", None, 0)
    else:
        if zq.denominator != 1:
            raise DomainError(f"mode {mode} needs an integer z, got {zq}")
        top = int(zq)
        ok = _admissible(mode, k, top)
    r = psi / zq
    return union_measure((a / zq - r, a / zq + r) for a in range(top + 1) if ok(a))


def sifted_measure(Z: int, psi, k: int) -> Fraction:
    """Closed form of the sifted-mode measure for psi <= 1/2.

    With S the 4^k-smooth part of Z, the interior numerators number
    (Z/S) phi(S) - [S = 1]; when S = 1 the endpoints 0 and Z also qualify
    and contribute half an interval each.
    """
    psi = Fraction(psi)
    if not 0 < psi <= Fraction(1, 2):
        raise DomainError("closed form needs 0 < psi <= 1/2")
    S = smooth_of(Z, k)
    if S == 1:
        return 2 * psi
    return 2 * psi * totient(S) / S


def coprime_measure(Z: int, psi) -> Fraction:
    """2 psi phi(Z) / Z, valid for Z >= 2 and psi <= 1/2."""
    return 2 * Fraction(psi) * totient(Z) / Z


# ---------------------------------------------------------------------------
# overlap quantities
# ---------------------------------------------------------------------------


def overlap_quantities(Zm: int, Zn: int, psi_m, psi_n, k: int) -> tuple[Fraction, Fraction, Fraction]:
    """(D, P, M) for a pair of moduli.

    M = max(Zm psi_n, Zn psi_m), D = M / gcd(Zm, Zn) and P is the product of
    (1 + 1/p) over primes p dividing Zm Zn / gcd^2 with D < p <= 4^k, set to
    0 when D < 1.
    """
    if Zm == Zn:
        raise DomainError("overlap quantities need Zm != Zn")
    psi_m, psi_n = Fraction(psi_m), Fraction(psi_n)
    if psi_m <= 0 or psi_n <= 0:
        raise DomainError("psi values must be positive")
    g = math.gcd(Zm, Zn)
    M = max(Zm * psi_n, Zn * psi_m)
    D = M / g
    if D < 1:
        return D, Fraction(0), M
    P = Fraction(1)
    q = (Zm // g) * (Zn // g)
    bound = 4**k
    for p, _ in factorize(q) if q > 1 else []:
        if D < p <= bound:
            P *= Fraction(p + 1, p)
    return D, P, M


def L_t(q: int, r: int, t) -> Fraction:
    """Sum of 1/p over primes p >= t dividing q r / gcd(q, r)^2."""
    if q < 1 or r < 1:
        raise DomainError("L_t needs positive integers")
    g = math.gcd(q, r)
    m = (q // g) * (r // g)
    return sum((Fraction(1, p) for p, _ in (factorize(m) if m > 1 else []) if p >= t), Fraction(0))


def exceptional_pairs(X: int, Y: int, t, eta: Callable[[int], Fraction]) -> tuple[list[tuple[int, int]], Fraction]:
    """Pairs (q, r) in [X, Y)^2 with gcd >= M(q, r)/t and L_t >= 10.

    Also returns the weighted sum of eta(q)phi(q)/q * eta(r)phi(r)/r over them.
    Reporting only; nothing is asserted about the result.
    """
    out = []
    weight = Fraction(0)
    w = {q: Fraction(eta(q)) * totient(q) / q for q in range(X, Y)}
    for q in range(X, Y):
        for r in range(X, Y):
            M = max(q * Fraction(eta(r)), r * Fraction(eta(q)))
            if math.gcd(q, r) * t >= M and L_t(q, r, t) >= 10:
                out.append((q, r))
                weight += w[q] * w[r]
    return out, weight


# ---------------------------------------------------------------------------
# smooth / rough split
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothRoughSplit:
    n: int
    Z: int
    Z_smooth: int
    Z_rough: int
    h: int
    p_h: int
    Y: int
    psi: Fraction
    measure: Fraction
    lower: Fraction
    upper: Fraction

    @property
    def sandwich_ok(self) -> bool:
        return self.lower <= self.measure <= self.upper


def _check_k(k: int) -> None:
    if k < 2 or k % 2:
        raise DomainError(f"k must be an even integer >= 2, got {k}")
    if 4**k > SIEVE_LIMIT:
        raise DomainError(f"4^k = {4**k} exceeds the sieve budget {SIEVE_LIMIT}")


def index_range(k: int) -> range:
    """Indices n with 2^(k/2) < n <= 2^k."""
    return range(2 ** (k // 2) + 1, 2**k + 1)


def _moduli(fd: FlooredDiffSet, k: int) -> list[int]:
    top = 2**k
    if not fd.hypothesis_ok:
        raise DomainError("covering sets need every difference >= 1")
    if len(fd) < top:
        raise CoverageError(f"need at least {top} floored differences, have {len(fd)}")
    return fd.values(top)


def primes_above(bound: int, count: int) -> list[int]:
    """The ``count`` smallest primes exceeding ``bound``."""
    out: list[int] = []
    span = max(64, 4 * count * max(1, bound.bit_length()))
    lo = bound
    while len(out) < count:
        out.extend(primes_in_range(lo, lo + span))
        lo += span
    return out[:count]


def smooth_rough_split(fd: FlooredDiffSet, k: int, psi: PsiSpec = PsiSpec()) -> list[SmoothRoughSplit]:
    """Split Z_n = smooth * rough for 2^(k/2) < n <= 2^k and build Y_n.

    Y_n = Z_smooth * p_h where h is the rank of Z_rough among the sorted
    distinct rough parts and p_h the h-th prime above 4^k.  Each row carries
    the exact sifted measure and the two sides of the totient sandwich.
    """
    _check_k(k)
    Z = _moduli(fd, k)
    bound = 4**k
    idx = list(index_range(k))
    parts = {}
    for n in idx:
        z = Z[n - 1]
        s = smooth_of(z, k)
        parts[n] = (z, s, z // s)
    rough = sorted({r for _, _, r in parts.values()})
    rank = {r: i + 1 for i, r in enumerate(rough)}
    ph = primes_above(bound, len(rough))
    shrink = Fraction(1) - Fraction(1, bound)
    out = []
    for n in idx:
        z, s, r = parts[n]
        h = rank[r]
        p = ph[h - 1]
        y = s * p
        ps = psi(n, z)
        meas = sifted_measure(z, ps, k)
        low = 2 * ps * totient(s) * (p - 1) / y
        out.append(SmoothRoughSplit(n, z, s, r, h, p, y, ps, meas, low, low / shrink))
    return out


# ---------------------------------------------------------------------------
# Chung-Erdos
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChungErdos:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def chung_erdos_check(sets: Sequence[IntervalUnion]) -> ChungErdos:
    """lhs = measure of the union; rhs = (sum of measures)^2 / sum of all pairwise
    intersection measures (self pairs included)."""
    sets = list(sets)
    total = sum((s.measure for s in sets), Fraction(0))
    if total == 0:
        raise DomainError("every set is null")
    union = IntervalUnion()
    for s in sets:
        union = union.union(s)
    denom = total  # diagonal
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            denom += 2 * sets[i].intersection(sets[j]).measure
    rhs = total * total / denom
    lhs = union.measure
    return ChungErdos(lhs, rhs, lhs >= rhs)


def covering_family(fd: FlooredDiffSet, k: int, psi: PsiSpec = PsiSpec()) -> dict[int, IntervalUnion]:
    """S_n* for 2^(k/2) < n <= 2^k as explicit interval unions."""
    _check_k(k)
    Z = _moduli(fd, k)
    return {n: build_S(Z[n - 1], psi(n, Z[n - 1]), "sifted", k) for n in index_range(k)}


# ---------------------------------------------------------------------------
# Mertens-type lower bound on lambda(S_n*)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MertensRow:
    n: int
    Z: int
    measure: Fraction
    bound: float
    ratio: float


def mertens_lower_check(fd: FlooredDiffSet, k: int, psi: PsiSpec = PsiSpec()) -> tuple[list[MertensRow], float]:
    """Per-n exact lambda(S_n*) against (1/n) / (e^gamma ln 4^k); returns rows and the min ratio."""
    _check_k(k)
    Z = _moduli(fd, k)
    scale = math.exp(EULER_GAMMA) * k * math.log(4)
    rows = []
    for n in index_range(k):
        z = Z[n - 1]
        m = sifted_measure(z, psi(n, z), k)
        rows.append(MertensRow(n, z, m, 1 / (n * scale), float(m) * n * scale))
    return rows, min(r.ratio for r in rows)


# ---------------------------------------------------------------------------
# pairwise overlap table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapRow:
    m: int
    n: int
    Zm: int
    Zn: int
    D: Fraction
    P: Fraction
    intersection: Fraction
    bound_shape: float
    constant: float | None


def overlap_table(fd: FlooredDiffSet, k: int, psi: PsiSpec = PsiSpec()) -> list[OverlapRow]:
    """Exact lambda(S_m* n S_n*) for m < n against sqrt(psi_m psi_n)/4^k + P lambda lambda.

    ``constant`` is the ratio of the two (None when the shape vanishes).
    """
    sets = covering_family(fd, k, psi)
    Z = fd.values(2**k)
    idx = sorted(sets)
    rows = []
    for i, m in enumerate(idx):
        for n in idx[i + 1 :]:
            zm, zn = Z[m - 1], Z[n - 1]
            if zm == zn:
                continue
            pm, pn = psi(m, zm), psi(n, zn)
            D, P, _ = overlap_quantities(zm, zn, pm, pn, k)
            inter = sets[m].intersection(sets[n]).measure
            shape = math.sqrt(pm * pn) / 4**k + float(P * sets[m].measure * sets[n].measure)
            rows.append(OverlapRow(m, n, zm, zn, D, P, inter, shape, float(inter) / shape if shape else None))
    return rows


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def write_overlap_json(rows: Iterable[OverlapRow], out: IO[str]) -> None:
    data = [{k: _jsonable(v) for k, v in asdict(r).items()} for r in rows]
    json.dump(data, out, indent=1)
    out.write("\n")


def small_primes(k: int) -> list[int]:
    _check_k(k)
    return primes_up_to(4**k)
