"""Exact Q-linear combinations over bases known to be linearly independent.

A form is c_1 b_1 + ... + c_k b_k with rational c_i, where the b_i all come
from one family of numbers that are linearly independent over Q:

* ``radical`` (degree q): r^(1/q) for q-th-power-free integers r >= 1
  (independent by Besicovitch's theorem);
* ``exp``: e^r for distinct rationals r (Lindemann-Weierstrass);
* ``pipow``: pi^j for integers j (pi is transcendental);
* ``logprime``: 1 and log p for distinct primes p.

Two forms are equal exactly when their canonical coefficient tuples are
equal, and a form is rational exactly when only the unit basis element
carries weight.  Forms that would mix families are not representable and
the caller falls back to purely numerical certification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .numeric import (
    CertifiedReal,
    cr_exp,
    cr_log,
    cr_pi,
    cr_root,
    factorize,
)

_ONE = {"rational": 1, "radical": 1, "exp": Fraction(0), "pipow": 0, "logprime": 1}
_GUARD = 16


@dataclass(frozen=True)
class ExactForm:
    kind: str
    degree: int
    terms: tuple  # sorted ((key, Fraction coeff), ...), all coeffs nonzero

    # construction -------------------------------------------------------
    @staticmethod
    def rational(c) -> "ExactForm":
        c = Fraction(c)
        return ExactForm("rational", 1, ((1, c),) if c else ())

    @staticmethod
    def make(kind: str, degree: int, coeffs: dict) -> "ExactForm":
        items = tuple(sorted((k, Fraction(v)) for k, v in coeffs.items() if v != 0))
        one = _ONE[kind]
        if all(k == one for k, _ in items):
            return ExactForm.rational(items[0][1] if items else 0)
        return ExactForm(kind, degree, items)

    @staticmethod
    def root(r: int, q: int, coeff=1) -> "ExactForm":
        """coeff * r^(1/q) for a positive integer r."""
        s, t = _split_power(r, q)
        return ExactForm.make("radical", q, {t: Fraction(coeff) * s})

    @staticmethod
    def exp(r, coeff=1) -> "ExactForm":
        return ExactForm.make("exp", 1, {Fraction(r): coeff})

    @staticmethod
    def pi_power(j: int, coeff=1) -> "ExactForm":
        return ExactForm.make("pipow", 1, {int(j): coeff})

    @staticmethod
    def log_rational(x: Fraction, coeff=1) -> "ExactForm":
        """coeff * log x for a positive rational x."""
        x = Fraction(x)
        c = Fraction(coeff)
        out: dict[int, Fraction] = {}
        for p, e in factorize(x.numerator) if x.numerator > 1 else []:
            out[p] = out.get(p, Fraction(0)) + c * e
        for p, e in factorize(x.denominator) if x.denominator > 1 else []:
            out[p] = out.get(p, Fraction(0)) - c * e
        return ExactForm.make("logprime", 1, out)

    # inspection -----------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("form is irrational")
        return self.terms[0][1] if self.terms else Fraction(0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _as_dict(self, kind: str, degree: int) -> dict:
        """Coefficients re-expressed in another family (only from rational or degree lifts)."""
        if self.kind == kind and self.degree == degree:
            return dict(self.terms)
        if self.is_rational:
            return {_ONE[kind]: self.rational_value} if self.terms else {}
        if self.kind == "radical" and kind == "radical" and degree % self.degree == 0:
            out: dict = {}
            m = degree // self.degree
            for r, c in self.terms:
                s, t = _split_power(r**m, degree)
                out[t] = out.get(t, Fraction(0)) + c * s
            return out
        raise _Incompatible

    # arithmetic --------------------------------------------------------------
    def __add__(self, other: "ExactForm") -> "ExactForm | None":
        kind, degree = _common(self, other)
        if kind is None:
            return None
        a, b = self._as_dict(kind, degree), other._as_dict(kind, degree)
        for k, v in b.items():
            a[k] = a.get(k, Fraction(0)) + v
        return ExactForm.make(kind, degree, a)

    def __neg__(self) -> "ExactForm":
        return self.scale(-1)

    def __sub__(self, other: "ExactForm") -> "ExactForm | None":
        return self + (-other)

    def scale(self, c) -> "ExactForm":
        c = Fraction(c)
        if c == 0:
            return ExactForm.rational(0)
        return ExactForm(self.kind, self.degree, tuple((k, v * c) for k, v in self.terms))

    def __mul__(self, other: "ExactForm") -> "ExactForm | None":
        if other.is_rational:
            return self.scale(other.rational_value)
        if self.is_rational:
            return other.scale(self.rational_value)
        kind, degree = _common(self, other)
        if kind is None or kind == "logprime":
            return None
        a, b = self._as_dict(kind, degree), other._as_dict(kind, degree)
        out: dict = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                if kind == "radical":
                    s, t = _split_power(ka * kb, degree)
                    key, coeff = t, va * vb * s
                else:
                    key, coeff = ka + kb, va * vb
                out[key] = out.get(key, Fraction(0)) + coeff
        return ExactForm.make(kind, degree, out)

    def inverse(self) -> "ExactForm | None":
        """1/self for a single-term form, else None."""
        if self.is_rational:
            v = self.rational_value
            return ExactForm.rational(1 / v) if v else None
        if len(self.terms) != 1:
            return None
        key, c = self.terms[0]
        if self.kind == "radical":
            return ExactForm.root(key ** (self.degree - 1), self.degree, 1 / (c * key))
        if self.kind == "exp":
            return ExactForm.exp(-key, 1 / c)
        if self.kind == "pipow":
            return ExactForm.pi_power(-key, 1 / c)
        return None

    def power(self, n: int) -> "ExactForm | None":
        if n < 0:
            return None
        result: ExactForm | None = ExactForm.rational(1)
        base: ExactForm | None = self
        while n and result is not None and base is not None:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # evaluation -----------------------------------------------------------------
    def evaluate(self, prec: int) -> CertifiedReal:
        """Enclosure at ``prec`` fractional bits."""
        if self.is_rational:
            return CertifiedReal.from_fraction(self.rational_value, prec)
        work = prec + _GUARD + max(c.numerator.bit_length() for _, c in self.terms)
        lo = hi = 0
        for key, c in self.terms:
            b = _basis(self.kind, self.degree, key, work)
            n, d = c.numerator, c.denominator
            if n >= 0:
                lo += (b.lo * n) // d
                hi += -((-b.hi * n) // d)
            else:
                lo += (b.hi * n) // d
                hi += -((-b.lo * n) // d)
        s = work - prec
        return CertifiedReal(lo >> s, -((-hi) >> s), prec)

    def to_real(self, prec: int = 128) -> CertifiedReal:
        if self.is_rational:
            return CertifiedReal.from_fraction(self.rational_value, prec)
        return CertifiedReal.from_source(self.evaluate, prec)

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.rational_value)
        parts = []
        for k, c in self.terms:
            if k == _ONE[self.kind]:
                parts.append(str(c))
            elif self.kind == "radical":
                parts.append(f"{c}*{k}^(1/{self.degree})")
            elif self.kind == "exp":
                parts.append(f"{c}*e^({k})")
            elif self.kind == "pipow":
                parts.append(f"{c}*pi^{k}")
            else:
                parts.append(f"{c}*log({k})")
        return " + ".join(parts)


class _Incompatible(Exception):
    pass


def _common(a: ExactForm, b: ExactForm) -> tuple[str | None, int]:
    if a.is_rational:
        return b.kind, b.degree
    if b.is_rational or (a.kind == b.kind and a.degree == b.degree):
        return a.kind, a.degree
    if a.kind == b.kind == "radical":
        return "radical", a.degree * b.degree // math.gcd(a.degree, b.degree)
    if a.kind == b.kind:
        return a.kind, 1
    return None, 0


def _split_power(r: int, q: int) -> tuple[int, int]:
    """Write r = s^q * t with t q-th-power-free; returns (s, t)."""
    if r < 1:
        raise ValueError("radicand must be a positive integer")
    if q == 1:
        return r, 1
    s = t = 1
    for p, e in factorize(r) if r > 1 else []:
        s *= p ** (e // q)
        t *= p ** (e % q)
    return s, t


@lru_cache(maxsize=4096)
def _basis(kind: str, degree: int, key, prec: int) -> CertifiedReal:
    if kind == "radical":
        return cr_root(key, degree).at(prec)
    if kind == "exp":
        return cr_exp(CertifiedReal.from_fraction(key)).at(prec)
    if kind == "pipow":
        if key >= 0:
            return _pi_power(key, prec)
        return _pi_power(-key, prec + 8).reciprocal().at(prec)
    if kind == "logprime":
        return cr_log(CertifiedReal.from_fraction(key)).at(prec)
    raise ValueError(kind)


def _pi_power(j: int, prec: int) -> CertifiedReal:
    work = prec + 2 * j + 16
    pi = cr_pi().at(work)
    acc = CertifiedReal.from_fraction(1, work)
    for _ in range(j):
        acc = acc * pi
    return acc.at(prec)


def form_of(x) -> ExactForm:
    """ExactForm of an int, Fraction or ExactForm."""
    if isinstance(x, ExactForm):
        return x
    return ExactForm.rational(Fraction(x))
