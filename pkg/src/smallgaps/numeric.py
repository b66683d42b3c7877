"""Certified fixed-point reals, clamped logarithms, mod-1 primitives,
exact interval unions and small arithmetic functions."""

from __future__ import annotations

import math
import os
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from mpmath.libmp import (
    from_man_exp,
    libmpi,
    mpf_shift,
    round_ceiling,
    round_floor,
    to_int,
)

START_BITS = 128
DEFAULT_CAP_BITS = 2048
EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class HypothesisError(DomainError):
    """A sequence does not satisfy the precondition a bound formula needs."""


class AmbiguityError(ArithmeticError):
    """A certified decision could not be made below the precision cap."""


def precision_cap() -> int:
    """Default precision cap in bits, overridable by SMALLGAPS_PRECISION_CAP."""
    raw = os.environ.get("SMALLGAPS_PRECISION_CAP")
    if raw is None:
        return DEFAULT_CAP_BITS
    cap = int(raw)
    if cap < START_BITS:
        raise DomainError(f"precision cap {cap} is below the starting precision {START_BITS}")
    return cap


def _precisions(start: int, cap: int | None) -> Iterable[int]:
    cap = precision_cap() if cap is None else cap
    p = start
    while p < cap:
        yield p
        p *= 2
    yield cap


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# CertifiedReal
# ---------------------------------------------------------------------------

Source = Callable[[int], "CertifiedReal"]


@dataclass(frozen=True, eq=False)
class CertifiedReal:
    """A real number x known to lie in [lo, hi] * 2^-prec.

    ``exact`` holds the value when it is rational and known exactly.
    ``source`` recomputes the enclosure at a higher precision; arithmetic
    composes sources, so derived quantities stay refinable.
    """

    lo: int
    hi: int
    prec: int
    exact: Fraction | None = None
    source: Source | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("empty enclosure")

    # construction -------------------------------------------------------
    @staticmethod
    def from_fraction(q: Fraction | int, prec: int = START_BITS) -> "CertifiedReal":
        q = Fraction(q)
        num = q.numerator << prec
        return CertifiedReal(
            _floor_div(num, q.denominator), _ceil_div(num, q.denominator), prec, q, None
        )

    @staticmethod
    def from_source(source: Source, prec: int = START_BITS) -> "CertifiedReal":
        base = source(prec)
        return CertifiedReal(base.lo, base.hi, base.prec, base.exact, source)

    @staticmethod
    def from_mpi(iv, prec: int) -> "CertifiedReal":
        a, b = iv
        lo = int(to_int(mpf_shift(a, prec), round_floor))
        hi = int(to_int(mpf_shift(b, prec), round_ceiling))
        return CertifiedReal(lo, hi, prec)

    @staticmethod
    def enclosure(lo: Fraction, hi: Fraction, prec: int = START_BITS) -> "CertifiedReal":
        """An enclosure from rational bounds with no way to refine it."""
        lo_i = _floor_div(lo.numerator << prec, lo.denominator)
        hi_i = _ceil_div(hi.numerator << prec, hi.denominator)
        return CertifiedReal(lo_i, hi_i, prec)

    # views ---------------------------------------------------------------
    @property
    def precision_bits(self) -> int:
        return self.prec

    @property
    def lower(self) -> Fraction:
        return Fraction(self.lo, 1 << self.prec)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.hi, 1 << self.prec)

    @property
    def value(self) -> Fraction:
        if self.exact is not None:
            return self.exact
        return Fraction(self.lo + self.hi, 1 << (self.prec + 1))

    @property
    def radius(self) -> Fraction:
        if self.exact is not None:
            return Fraction(0)
        return Fraction(self.hi - self.lo, 1 << (self.prec + 1))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.ldexp(self.lo + self.hi, -self.prec - 1) if self.prec < 1000 else float(self.value)

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"CertifiedReal({self.exact})"
        return f"CertifiedReal({float(self)!r} ± {float(self.radius):.3g}, prec={self.prec})"

    # refinement ------------------------------------------------------------
    def at(self, prec: int) -> "CertifiedReal":
        """Enclosure at ``prec`` fractional bits (rounded outward if lower)."""
        if prec == self.prec:
            return self
        if self.exact is not None:
            r = CertifiedReal.from_fraction(self.exact, prec)
            return CertifiedReal(r.lo, r.hi, prec, self.exact, self.source)
        if prec > self.prec and self.source is not None:
            r = self.source(prec)
            return CertifiedReal(r.lo, r.hi, r.prec, r.exact, self.source)
        if prec < self.prec:
            s = self.prec - prec
            return CertifiedReal(self.lo >> s, -((-self.hi) >> s), prec, None, self.source)
        return self

    @property
    def refinable(self) -> bool:
        return self.exact is not None or self.source is not None

    # arithmetic --------------------------------------------------------------
    def _align(self, other: "CertifiedReal") -> tuple["CertifiedReal", "CertifiedReal"]:
        if self.prec == other.prec:
            return self, other
        p = max(self.prec, other.prec)
        return _shift_up(self, p), _shift_up(other, p)

    def __add__(self, other) -> "CertifiedReal":
        other = _coerce(other, self.prec)
        a, b = self._align(other)
        exact = a.exact + b.exact if a.exact is not None and b.exact is not None else None
        return CertifiedReal(a.lo + b.lo, a.hi + b.hi, a.prec, exact, _compose(a, b, lambda x, y: x + y))

    __radd__ = __add__

    def __neg__(self) -> "CertifiedReal":
        exact = -self.exact if self.exact is not None else None
        src = self.source
        return CertifiedReal(-self.hi, -self.lo, self.prec, exact, (lambda p: -src(p)) if src else None)

    def __sub__(self, other) -> "CertifiedReal":
        return self + (-_coerce(other, self.prec))

    def __rsub__(self, other) -> "CertifiedReal":
        return _coerce(other, self.prec) + (-self)

    def __mul__(self, other) -> "CertifiedReal":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(other))
        other = _coerce(other, self.prec)
        a, b = self._align(other)
        p = a.prec
        prods = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
        lo, hi = min(prods) >> p, -((-max(prods)) >> p)
        exact = a.exact * b.exact if a.exact is not None and b.exact is not None else None
        return CertifiedReal(lo, hi, p, exact, _compose(a, b, lambda x, y: x * y))

    __rmul__ = __mul__

    def scale(self, q: Fraction) -> "CertifiedReal":
        """Multiply by an exact rational."""
        n, d = q.numerator, q.denominator
        if n >= 0:
            lo, hi = _floor_div(self.lo * n, d), _ceil_div(self.hi * n, d)
        else:
            lo, hi = _floor_div(self.hi * n, d), _ceil_div(self.lo * n, d)
        exact = self.exact * q if self.exact is not None else None
        src = self.source
        return CertifiedReal(lo, hi, self.prec, exact, (lambda p: src(p).scale(q)) if src else None)

    def __truediv__(self, other) -> "CertifiedReal":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self.scale(1 / Fraction(other))
        other = _coerce(other, self.prec)
        return self * other.reciprocal()

    def reciprocal(self) -> "CertifiedReal":
        if self.lo <= 0 <= self.hi:
            if self.exact is not None and self.exact != 0:
                return CertifiedReal.from_fraction(1 / self.exact, self.prec)
            raise AmbiguityError("reciprocal of an enclosure containing zero")
        p = self.prec
        one = 1 << (2 * p)
        lo, hi = _floor_div(one, self.hi), _ceil_div(one, self.lo)
        exact = 1 / self.exact if self.exact is not None else None
        src = self.source
        return CertifiedReal(lo, hi, p, exact, (lambda q: src(q).reciprocal()) if src else None)

    def __abs__(self) -> "CertifiedReal":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        exact = abs(self.exact) if self.exact is not None else None
        src = self.source
        return CertifiedReal(0, max(-self.lo, self.hi), self.prec, exact, (lambda p: abs(src(p))) if src else None)

    def to_mpi(self):
        return (from_man_exp(self.lo, -self.prec), from_man_exp(self.hi, -self.prec))

    def magnitude_bits(self) -> int:
        """Bits needed for the integer part of max(|lo|, |hi|)."""
        m = max(abs(self.lo), abs(self.hi)) >> self.prec
        return m.bit_length()


def _shift_up(x: CertifiedReal, p: int) -> CertifiedReal:
    if x.prec == p:
        return x
    if x.exact is not None or x.source is not None:
        return x.at(p)
    s = p - x.prec
    return CertifiedReal(x.lo << s, x.hi << s, p, None, None)


def _coerce(x, prec: int) -> CertifiedReal:
    if isinstance(x, CertifiedReal):
        return x
    if isinstance(x, (int, Fraction)):
        return CertifiedReal.from_fraction(Fraction(x), prec)
    raise TypeError(f"cannot combine CertifiedReal with {type(x).__name__}")


def _compose(a: CertifiedReal, b: CertifiedReal, op) -> Source | None:
    if not (a.refinable and b.refinable):
        return None
    if a.exact is not None and b.exact is not None:
        return None
    return lambda p: op(a.at(p), b.at(p))


def certified(x, prec: int = START_BITS) -> CertifiedReal:
    """Widen an int, Fraction, decimal string or CertifiedReal."""
    if isinstance(x, CertifiedReal):
        return x
    if isinstance(x, str):
        return CertifiedReal.from_fraction(parse_exact(x), prec)
    if isinstance(x, float):
        raise DomainError("binary floating point inputs are not accepted; pass a string or Fraction")
    return CertifiedReal.from_fraction(Fraction(x), prec)


def parse_exact(text: str) -> Fraction:
    """Parse '3', '-1.25', '3/7', '1e-3' or a hexadecimal fraction '0x0.8' exactly."""
    t = text.strip().replace("_", "")
    low = t.lower()
    neg = low.startswith("-")
    body = low[1:] if neg or low.startswith("+") else low
    if body.startswith("0x"):
        digits = body[2:]
        whole, _, frac = digits.partition(".")
        val = Fraction(int(whole or "0", 16))
        if frac:
            val += Fraction(int(frac, 16), 16 ** len(frac))
        return -val if neg else val
    try:
        return Fraction(t)
    except ValueError as exc:
        raise DomainError(f"not an exact number: {text!r}") from exc


# ---------------------------------------------------------------------------
# elementary functions on enclosures
# ---------------------------------------------------------------------------

_GUARD = 32


def _mpi_unary(fn, x: CertifiedReal, prec: int, extra: int) -> CertifiedReal:
    work = prec + extra + _GUARD
    xi = x.at(work)
    return CertifiedReal.from_mpi(fn(xi.to_mpi(), work + xi.magnitude_bits()), prec)


def cr_exp(x: CertifiedReal) -> CertifiedReal:
    def src(p: int) -> CertifiedReal:
        mag = int(max(0.0, float(x.at(64).upper)) * 1.4427) + 2
        return _mpi_unary(libmpi.mpi_exp, x, p, mag)

    return CertifiedReal.from_source(src)


def cr_log(x: CertifiedReal) -> CertifiedReal:
    if x.at(START_BITS).lo <= 0:
        raise DomainError("logarithm of a non-positive enclosure")

    def src(p: int) -> CertifiedReal:
        lowest = x.at(p + _GUARD).lower
        extra = max(0, -math.floor(math.log2(lowest))) if lowest < 1 else 0
        return _mpi_unary(libmpi.mpi_log, x, p, extra + 8)

    return CertifiedReal.from_source(src)


def cr_pow(x: CertifiedReal, t: CertifiedReal) -> CertifiedReal:
    """x**t for positive x."""
    if x.at(START_BITS).lo <= 0:
        raise DomainError("power of a non-positive enclosure")

    def src(p: int) -> CertifiedReal:
        mag = int(abs(float(t)) * (x.magnitude_bits() + 1)) + 4
        work = p + 2 * mag + _GUARD
        xi, ti = x.at(work), t.at(work)
        iv = libmpi.mpi_pow(xi.to_mpi(), ti.to_mpi(), work + mag)
        return CertifiedReal.from_mpi(iv, p)

    return CertifiedReal.from_source(src)


def cr_pi() -> CertifiedReal:
    return CertifiedReal.from_source(lambda p: CertifiedReal.from_mpi(libmpi.mpi_pi(p + _GUARD), p))


def cr_e() -> CertifiedReal:
    return cr_exp(CertifiedReal.from_fraction(1))


def iroot(n: int, q: int) -> int:
    """floor(n ** (1/q)) for n >= 0."""
    if n < 0:
        raise DomainError("root of a negative integer")
    if n < 2 or q == 1:
        return n
    if q == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x ** q > n:
        x -= 1
    while (x + 1) ** q <= n:
        x += 1
    return x


def cr_root(r: int, q: int) -> CertifiedReal:
    """r ** (1/q) for a positive integer r, enclosed by integer root extraction."""

    def src(p: int) -> CertifiedReal:
        k = iroot(r << (q * p), q)
        exact_hit = k ** q == r << (q * p)
        return CertifiedReal(k, k if exact_hit else k + 1, p)

    base = iroot(r, q)
    if base ** q == r:
        return CertifiedReal.from_fraction(base)
    return CertifiedReal.from_source(src)


# ---------------------------------------------------------------------------
# certified decisions
# ---------------------------------------------------------------------------


def certified_floor(x: CertifiedReal, cap: int | None = None) -> int:
    """floor(x) for the exact value enclosed by ``x``; refines up to ``cap``."""
    if x.exact is not None:
        return math.floor(x.exact)
    cur = x
    for p in _precisions(max(x.prec, START_BITS), cap):
        cur = cur.at(p)
        a, b = cur.lo >> cur.prec, cur.hi >> cur.prec
        if a == b:
            return a
        if not cur.refinable:
            break
    raise AmbiguityError(f"cannot certify the floor of {x!r} at the precision cap")


def certified_sign(x: CertifiedReal, cap: int | None = None) -> int:
    """Sign of x; zero only when x is exactly zero."""
    if x.exact is not None:
        return (x.exact > 0) - (x.exact < 0)
    cur = x
    for p in _precisions(max(x.prec, START_BITS), cap):
        cur = cur.at(p)
        if cur.lo > 0:
            return 1
        if cur.hi < 0:
            return -1
        if not cur.refinable:
            break
    raise AmbiguityError(f"cannot certify the sign of {x!r} at the precision cap")


def certified_lt(x: CertifiedReal, y, cap: int | None = None) -> bool:
    """x < y, certified; equal exact values return False."""
    d = _coerce(y, x.prec) - x
    if d.exact is not None:
        return d.exact > 0
    return certified_sign(d, cap) > 0


def frac_part(x: CertifiedReal) -> CertifiedReal:
    """{x} = x - floor(x)."""
    if x.exact is not None:
        return CertifiedReal.from_fraction(x.exact - math.floor(x.exact), x.prec)
    n = certified_floor(x)
    return x - n


def nearest_int_distance(x: CertifiedReal, cap: int | None = None) -> CertifiedReal:
    """||x||, the distance from x to the nearest integer."""
    if x.exact is not None:
        f = x.exact - math.floor(x.exact)
        return CertifiedReal.from_fraction(min(f, 1 - f), x.prec)
    cur = x
    for p in _precisions(max(x.prec, START_BITS), cap):
        cur = cur.at(p)
        half = 1 << (cur.prec - 1)
        # locate x relative to the half-integer grid
        a = (cur.lo + half) >> cur.prec  # nearest integer to lo
        b = (cur.hi + half) >> cur.prec
        if a == b:
            return abs(cur - a)
        if not cur.refinable:
            break
    raise AmbiguityError(f"cannot locate the nearest integer to {x!r} at the precision cap")


# ---------------------------------------------------------------------------
# clamped logarithms
# ---------------------------------------------------------------------------


def clamped_log(x, depth: int = 1) -> float:
    """max(1, ln x), iterated ``depth`` times with the clamp at every step."""
    if depth not in (1, 2, 3):
        raise DomainError(f"depth must be 1, 2 or 3, got {depth}")
    if isinstance(x, CertifiedReal):
        x = x.value
    if x <= 0:
        raise DomainError(f"clamped_log needs x > 0, got {x}")
    v = x
    for _ in range(depth):
        if isinstance(v, int) and v.bit_length() > 1000:
            lv = math.log(v)
        elif isinstance(v, Fraction):
            lv = math.log(v.numerator) - math.log(v.denominator)
        else:
            lv = math.log(v)
        v = max(1.0, lv)
    return float(v)


def clamped_log_mp(x, depth: int = 1):
    """mpmath version of :func:`clamped_log` used for tie-breaking comparisons."""
    import mpmath

    if x <= 0:
        raise DomainError(f"clamped_log needs x > 0, got {x}")
    v = mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
    for _ in range(depth):
        v = max(mpmath.mpf(1), mpmath.log(v))
    return v


# ---------------------------------------------------------------------------
# interval unions with exact measure
# ---------------------------------------------------------------------------


def _rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_exact(x)
    return Fraction(x)


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint open intervals inside [0, 1].

    ``exact`` is False when endpoints came from outward-rounded
    irrational enclosures, so the measure is an upper bound.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...] = ()
    exact: bool = True

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return _canonical(list(self.intervals) + list(other.intervals), self.exact and other.exact)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out: list[tuple[Fraction, Fraction]] = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion(tuple(out), self.exact and other.exact)

    def contains(self, x) -> bool:
        x = _rational(x)
        k = bisect_right(self.intervals, (x, Fraction(2))) - 1
        return k >= 0 and self.intervals[k][0] < x < self.intervals[k][1]


def _canonical(raw: list[tuple[Fraction, Fraction]], exact: bool) -> IntervalUnion:
    clipped = []
    for lo, hi in raw:
        lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
        if lo < hi:
            clipped.append((lo, hi))
    clipped.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in clipped:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return IntervalUnion(tuple((lo, hi) for lo, hi in merged), exact)


def union_measure(intervals: Iterable[tuple]) -> IntervalUnion:
    """Canonical union of raw intervals clipped to [0, 1].

    Endpoints may be ints, Fractions, decimal strings, floats (taken at
    their exact binary value) or CertifiedReals (rounded outward).
    """
    raw = []
    exact = True
    for lo, hi in intervals:
        if isinstance(lo, CertifiedReal) or isinstance(hi, CertifiedReal):
            lo_q = lo.lower if isinstance(lo, CertifiedReal) else _rational(lo)
            hi_q = hi.upper if isinstance(hi, CertifiedReal) else _rational(hi)
            exact = exact and all(
                not isinstance(v, CertifiedReal) or v.exact is not None for v in (lo, hi)
            )
            if isinstance(lo, CertifiedReal) and lo.exact is not None:
                lo_q = lo.exact
            if isinstance(hi, CertifiedReal) and hi.exact is not None:
                hi_q = hi.exact
            raw.append((lo_q, hi_q))
        else:
            raw.append((_rational(lo), _rational(hi)))
    return _canonical(raw, exact)


# ---------------------------------------------------------------------------
# elementary arithmetic functions
# ---------------------------------------------------------------------------


def primes_up_to(x) -> list[int]:
    """All primes p <= x (sieve of Eratosthenes)."""
    n = int(math.floor(x))
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes p with lo < p <= hi, by a segmented sieve."""
    if hi <= max(lo, 1):
        return []
    start = lo + 1
    seg = np.ones(hi - start + 1, dtype=bool)
    for p in primes_up_to(math.isqrt(hi)):
        first = max(p * p, ((start + p - 1) // p) * p)
        seg[first - start :: p] = False
    if start <= 1:
        seg[: 2 - start] = False
    return (np.flatnonzero(seg) + start).tolist()


def _check_positive(k: int) -> None:
    if int(k) != k or k < 1:
        raise DomainError(f"expected a positive integer, got {k}")


_SMALL_PRIMES = primes_up_to(1000)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:25]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1


def factorize(k: int) -> list[tuple[int, int]]:
    """Prime factorization as sorted (prime, exponent) pairs."""
    _check_positive(k)
    k = int(k)
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > k:
            break
        while k % p == 0:
            out[p] = out.get(p, 0) + 1
            k //= p
    stack = [k] if k > 1 else []
    while stack:
        n = stack.pop()
        if n == 1:
            continue
        if _is_probable_prime(n):
            out[n] = out.get(n, 0) + 1
            continue
        d = _pollard_rho(n)
        stack.extend((d, n // d))
    return sorted(out.items())


def prime_divisors(k: int) -> list[int]:
    return [p for p, _ in factorize(k)]


def totient(k: int) -> int:
    """Euler's phi."""
    _check_positive(k)
    r = int(k)
    for p, _ in factorize(k):
        r -= r // p
    return r


def divisors(k: int) -> list[int]:
    """All positive divisors of k in increasing order."""
    divs = [1]
    for p, e in factorize(k):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def totient_table(n: int) -> np.ndarray:
    """phi(0..n) by a linear sieve; entry 0 is 0."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        phi[p::p] -= phi[p::p] // p
    return phi


def mertens_product(x, exact: bool = False) -> float | Fraction:
    """prod_{p <= x} (1 - 1/p)."""
    if x < 2:
        raise DomainError(f"mertens_product needs x >= 2, got {x}")
    ps = primes_up_to(x)
    if exact:
        r = Fraction(1)
        for p in ps:
            r *= Fraction(p - 1, p)
        return r
    return float(np.exp(np.sum(np.log1p(-1.0 / np.asarray(ps, dtype=float)))))


def smooth_part(z: int, bound: int) -> int:
    """Largest divisor of z whose prime factors are all <= bound."""
    s = 1
    for p, e in factorize(z):
        if p <= bound:
            s *= p**e
    return s


def gcd_many(values: Sequence[int]) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g
