"""Sequence families as certified real windows with gap metadata."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

from .forms import ExactForm, form_of
from .numeric import (
    AmbiguityError,
    CertifiedReal,
    DomainError,
    START_BITS,
    certified_floor,
    certified_sign,
    cr_exp,
    cr_log,
    cr_pow,
    parse_exact,
    precision_cap,
)

NAMED_CONSTANTS = ("e", "pi", "phi", "sqrt<k>")


class SpecError(ValueError):
    """A sequence specification is malformed or generates invalid terms."""


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def parse_const(text: str) -> ExactForm:
    """Exact form of a parameter: rational/decimal text or a named constant."""
    t = text.strip().lower()
    if t == "e":
        return ExactForm.exp(1)
    if t == "pi":
        return ExactForm.pi_power(1)
    if t == "phi":
        return ExactForm.make("radical", 2, {1: Fraction(1, 2), 5: Fraction(1, 2)})
    m = re.fullmatch(r"sqrt(\d+)", t)
    if m:
        return ExactForm.root(int(m.group(1)), 2)
    m = re.fullmatch(r"(\d+)\^\((\d+)/(\d+)\)", t)
    if m:
        r, p, q = (int(g) for g in m.groups())
        return ExactForm.root(r**p, q)
    try:
        return ExactForm.rational(parse_exact(t))
    except DomainError as exc:
        raise SpecError(f"unknown constant {text!r}; use a number or one of {NAMED_CONSTANTS}") from exc


def _fmt_const(f: ExactForm) -> str:
    return str(f)


# ---------------------------------------------------------------------------
# specification
# ---------------------------------------------------------------------------

FAMILIES = ("arithmetic", "polynomial", "beatty", "lacunary", "fibonacci", "explicit", "smooth")
SMOOTH_MAPS = ("exp", "sinh", "xklog", "xlogx", "affine", "power")


@dataclass(frozen=True)
class SequenceSpec:
    """A named sequence family with exact parameters.

    ``params`` holds ExactForms (rationals or named constants); for
    ``explicit`` it holds the listed terms; for ``smooth`` the map name is
    ``fname`` with parameters ``fparams`` applied to ``base``.
    """

    family: str
    params: tuple = ()
    base: "SequenceSpec | None" = None
    fname: str = ""
    fparams: tuple = ()
    text: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.text or self.family

    # parameter validation happens in generate()


def arithmetic(a=1, d=1) -> SequenceSpec:
    return SequenceSpec("arithmetic", (form_of(_exact(a)), form_of(_exact(d))), text=f"arithmetic:{a},{d}")


def polynomial(theta=2) -> SequenceSpec:
    return SequenceSpec("polynomial", (form_of(_exact(theta)),), text=f"polynomial:{theta}")


def beatty(theta) -> SequenceSpec:
    f = parse_const(theta) if isinstance(theta, str) else form_of(theta)
    return SequenceSpec("beatty", (f,), text=f"beatty:{theta}")


def lacunary_geometric(c) -> SequenceSpec:
    f = parse_const(c) if isinstance(c, str) else form_of(_exact(c))
    return SequenceSpec("lacunary", (f,), text=f"lacunary:{c}")


def fibonacci() -> SequenceSpec:
    return SequenceSpec("fibonacci", (), text="fibonacci")


def explicit(values) -> SequenceSpec:
    terms = []
    for v in values:
        if isinstance(v, float):
            raise SpecError("explicit terms must be decimal strings or rationals, not floats")
        terms.append(form_of(parse_exact(v) if isinstance(v, str) else Fraction(v)))
    return SequenceSpec("explicit", tuple(terms), text="explicit:" + ",".join(str(v) for v in values))


def smooth_image(base: SequenceSpec, fname: str, *fparams) -> SequenceSpec:
    if fname not in SMOOTH_MAPS:
        raise SpecError(f"unknown smooth map {fname!r}; expected one of {SMOOTH_MAPS}")
    fp = tuple(parse_const(p) if isinstance(p, str) else form_of(_exact(p)) for p in fparams)
    args = ",".join(str(p) for p in fparams)
    return SequenceSpec("smooth", (), base, fname, fp, text=f"smooth:{fname}({args})@{base}")


def _exact(x):
    if isinstance(x, float):
        raise SpecError("floating point parameters are not accepted; pass a string or Fraction")
    if isinstance(x, str):
        return parse_const(x)
    return x


def parse_family(text: str) -> SequenceSpec:
    """Parse the family grammar ``name:p1,p2``.

    Examples: ``arithmetic:1,1``, ``polynomial:1/2``, ``beatty:sqrt2``,
    ``lacunary:e``, ``fibonacci``, ``explicit:0.5,1.2,3``,
    ``smooth:xlogx@arithmetic:2,1``, ``smooth:affine(1/2,3)@polynomial:2``.
    """
    t = text.strip()
    name, _, rest = t.partition(":")
    name = name.strip().lower()
    if name == "lacunary_geometric":
        name = "lacunary"
    if name not in FAMILIES:
        raise SpecError(f"unknown family {name!r}; expected one of {FAMILIES}")
    if name == "smooth":
        head, sep, base_text = rest.partition("@")
        if not sep:
            raise SpecError("smooth family needs '@<base family>'")
        m = re.fullmatch(r"\s*(\w+)\s*(?:\((.*)\))?\s*", head)
        if not m:
            raise SpecError(f"cannot parse smooth map {head!r}")
        fname = m.group(1)
        fargs = [a for a in (m.group(2) or "").split(",") if a.strip()]
        spec = smooth_image(parse_family(base_text), fname, *fargs)
        return SequenceSpec(spec.family, spec.params, spec.base, spec.fname, spec.fparams, t)
    args = [a.strip() for a in rest.split(",") if a.strip()] if rest else []
    if name == "explicit":
        spec = explicit(args)
    elif name == "fibonacci":
        if args:
            raise SpecError("fibonacci takes no parameters")
        spec = fibonacci()
    else:
        expected = {"arithmetic": 2, "polynomial": 1, "beatty": 1, "lacunary": 1}[name]
        if len(args) != expected:
            raise SpecError(f"{name} takes {expected} parameter(s), got {len(args)}")
        forms = tuple(parse_const(a) for a in args)
        spec = SequenceSpec(name, forms)
    return SequenceSpec(spec.family, spec.params, spec.base, spec.fname, spec.fparams, t)


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeqWindow:
    """The first N terms of a sequence.

    Rational windows keep the scaled integers ``ints`` with common
    denominator ``scale`` (term n equals ints[n-1]/scale).  Real windows
    keep per-term ExactForms (None when no exact form is known) and
    refinable enclosures.
    """

    spec: SequenceSpec
    N: int
    forms: tuple
    reals: tuple  # CertifiedReal per term
    ints: tuple | None = None
    scale: int = 1
    base: "SeqWindow | None" = None
    step: "ExactForm | None" = None  # common difference of an arithmetic progression

    @property
    def rational(self) -> bool:
        return self.ints is not None

    @property
    def integer_valued(self) -> bool:
        return self.ints is not None and self.scale == 1

    @property
    def terms(self) -> tuple:
        return self.reals

    def term_value(self, n: int) -> Fraction:
        """Exact value of a_n (1-based) for rational windows."""
        if self.ints is None:
            raise ValueError("window is not rational")
        return Fraction(self.ints[n - 1], self.scale)

    @cached_property
    def _enclosure_cache(self) -> dict:
        return {}

    def enclosures(self, prec: int) -> list[tuple[int, int]]:
        """Fixed-point (lo, hi) bounds of every term at ``prec`` fractional bits."""
        cache = self._enclosure_cache
        if prec not in cache:
            if self.ints is not None:
                out = []
                for v in self.ints:
                    num = v << prec
                    out.append((num // self.scale, -((-num) // self.scale)))
            else:
                out = [(r.lo, r.hi) for r in (x.at(prec) for x in self.reals)]
            cache[prec] = out
        return cache[prec]

    @cached_property
    def min_gap(self) -> CertifiedReal:
        """The minimal pairwise distance among the terms (refinable enclosure)."""
        return _min_adjacent_gap(self)

    @property
    def min_gap_lower(self) -> Fraction:
        """A certified lower bound on every pairwise distance."""
        g = self.min_gap
        return g.exact if g.exact is not None else g.lower

    @cached_property
    def order(self) -> tuple[int, ...]:
        """0-based indices of the terms in increasing order of value."""
        if self.ints is not None:
            return tuple(sorted(range(self.N), key=self.ints.__getitem__))
        return tuple(_certified_sort(self))

    @property
    def increasing(self) -> bool:
        return self.order == tuple(range(self.N))


def _min_adjacent_gap(w: SeqWindow) -> CertifiedReal:
    idx = w.order
    if w.ints is not None:
        g = min(w.ints[idx[i + 1]] - w.ints[idx[i]] for i in range(w.N - 1))
        return CertifiedReal.from_fraction(Fraction(g, w.scale))
    diffs = [w.reals[idx[i + 1]] - w.reals[idx[i]] for i in range(w.N - 1)]
    best = diffs[0]
    for d in diffs[1:]:
        if d.hi < best.lo:
            best = d
        elif d.lo <= best.hi and _less(d, best):
            best = d
    return best


def _less(a: CertifiedReal, b: CertifiedReal) -> bool:
    try:
        return certified_sign(b - a) > 0
    except AmbiguityError:
        return False


def _certified_sort(w: SeqWindow) -> list[int]:
    prec = START_BITS
    cap = precision_cap()
    while True:
        enc = w.enclosures(prec)
        idx = sorted(range(w.N), key=lambda i: enc[i][0])
        if all(enc[idx[i]][1] < enc[idx[i + 1]][0] for i in range(w.N - 1)):
            return idx
        if prec >= cap:
            raise AmbiguityError("terms cannot be separated at the precision cap")
        prec = min(2 * prec, cap)


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def generate(spec: SequenceSpec, N: int) -> SeqWindow:
    """First N terms of ``spec`` as a validated window."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    maker = _GENERATORS.get(spec.family)
    if maker is None:
        raise SpecError(f"unknown family {spec.family!r}")
    window = maker(spec, N)
    _validate(window)
    return window


def _rational_window(spec: SequenceSpec, values: list[Fraction], base=None) -> SeqWindow:
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    ints = tuple(int(v * scale) for v in values)
    return SeqWindow(spec, len(values), _LazyForms(ints, scale), _LazyReals(ints, scale), ints, scale, base)


def _int_window(spec: SequenceSpec, ints: list[int], base=None) -> SeqWindow:
    return SeqWindow(spec, len(ints), _LazyForms(tuple(ints), 1), _LazyReals(tuple(ints), 1), tuple(ints), 1, base)


class _LazyReals(tuple):
    """Tuple-like view creating exact CertifiedReals on access."""

    def __new__(cls, ints, scale):
        obj = super().__new__(cls, ())
        obj._ints, obj._scale = ints, scale
        return obj

    def __len__(self):
        return len(self._ints)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return tuple(self[j] for j in range(*i.indices(len(self))))
        return CertifiedReal.from_fraction(Fraction(self._ints[i], self._scale))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


class _LazyForms(_LazyReals):
    def __getitem__(self, i):
        if isinstance(i, slice):
            return tuple(self[j] for j in range(*i.indices(len(self))))
        return ExactForm.rational(Fraction(self._ints[i], self._scale))


def _real_window(spec: SequenceSpec, forms: list, reals: list, base=None) -> SeqWindow:
    if all(f is not None and f.is_rational for f in forms):
        return _rational_window(spec, [f.rational_value for f in forms], base)
    return SeqWindow(spec, len(forms), tuple(forms), tuple(reals), None, 1, base)


def _gen_arithmetic(spec: SequenceSpec, N: int) -> SeqWindow:
    a, d = spec.params
    if not _positive(d):
        raise SpecError("arithmetic progression needs d > 0")
    if a.is_rational and d.is_rational:
        av, dv = a.rational_value, d.rational_value
        return _rational_window(spec, [av + n * dv for n in range(N)])
    # a + n d has no single-basis form when a and d use different bases
    forms = [a + d.scale(n) for n in range(N)]
    ar, dr = a.to_real(), d.to_real()
    reals = [_real_of(f) if f is not None else ar + dr.scale(Fraction(n)) for n, f in enumerate(forms)]
    return SeqWindow(spec, N, tuple(forms), tuple(reals), None, 1, None, d)


def _gen_polynomial(spec: SequenceSpec, N: int) -> SeqWindow:
    (theta,) = spec.params
    if theta.is_zero:
        raise SpecError("polynomial exponent must be nonzero")
    if theta.is_rational:
        t = theta.rational_value
        if t.denominator == 1 and t > 0:
            return _int_window(spec, [n ** int(t) for n in range(1, N + 1)])
        forms = [_rational_power(Fraction(n), t) for n in range(1, N + 1)]
        return _real_window(spec, forms, [_real_of(f) for f in forms])
    th = theta.to_real()
    reals = [cr_pow(CertifiedReal.from_fraction(n), th) if n > 1 else CertifiedReal.from_fraction(1) for n in range(1, N + 1)]
    forms = [ExactForm.rational(1)] + [None] * (N - 1)
    return _real_window(spec, forms, reals)


def _rational_power(x: Fraction, t: Fraction) -> ExactForm:
    """x^t for positive rational x and rational t as a radical form."""
    if t < 0:
        x, t = 1 / x, -t
    p, q = t.numerator, t.denominator
    a, b = x.numerator, x.denominator
    # (a/b)^(p/q) = (a^p b^((q-1)p))^(1/q) / b^p
    return ExactForm.root(a**p * b ** ((q - 1) * p), q, Fraction(1, b**p))


def _gen_beatty(spec: SequenceSpec, N: int) -> SeqWindow:
    (theta,) = spec.params
    if theta.is_rational:
        raise SpecError("Beatty sequences need an irrational theta")
    th = theta.to_real()
    if certified_sign(th - 1) <= 0:
        raise SpecError("Beatty sequences need theta > 1")
    return _int_window(spec, floors_of_multiples(th, N))


def floors_of_multiples(x: CertifiedReal, N: int) -> list[int]:
    """[floor(n x) for n = 1..N], certified; x must be irrational or exact."""
    if x.exact is not None:
        return [math.floor(n * x.exact) for n in range(1, N + 1)]
    prec = max(START_BITS, N.bit_length() + 64)
    out: list[int | None] = [None] * N
    todo = list(range(N))
    cap = precision_cap()
    while todo:
        cur = x.at(prec)
        rest = []
        for i in todo:
            n = i + 1
            a, b = (n * cur.lo) >> prec, (n * cur.hi) >> prec
            if a == b:
                out[i] = a
            else:
                rest.append(i)
        todo = rest
        if todo:
            if prec >= cap:
                raise AmbiguityError("Beatty floor undecided at the precision cap")
            prec = min(2 * prec, cap)
    return out  # type: ignore[return-value]


def _gen_lacunary(spec: SequenceSpec, N: int) -> SeqWindow:
    (c,) = spec.params
    cr = c.to_real()
    if certified_sign(cr - 1) <= 0:
        raise SpecError("lacunary sequences need c > 1")
    if c.is_rational:
        cv = c.rational_value
        return _rational_window(spec, [cv**n for n in range(1, N + 1)])
    forms: list = []
    f: ExactForm | None = c
    for n in range(1, N + 1):
        forms.append(f)
        f = f * c if f is not None else None
    reals = []
    for n, f in enumerate(forms, start=1):
        reals.append(_real_of(f) if f is not None else _numeric_power(cr, n))
    return _real_window(spec, forms, reals)


def _numeric_power(c: CertifiedReal, n: int) -> CertifiedReal:
    return cr_pow(c, CertifiedReal.from_fraction(n))


def _gen_fibonacci(spec: SequenceSpec, N: int) -> SeqWindow:
    # F_2, F_3, ... = 1, 2, 3, 5, ... (distinct terms)
    out, a, b = [], 1, 2
    for _ in range(N):
        out.append(a)
        a, b = b, a + b
    return _int_window(spec, out)


def _gen_explicit(spec: SequenceSpec, N: int) -> SeqWindow:
    if N > len(spec.params):
        raise SpecError(f"explicit list has {len(spec.params)} terms, {N} requested")
    return _rational_window(spec, [f.rational_value for f in spec.params[:N]])


def _gen_smooth(spec: SequenceSpec, N: int) -> SeqWindow:
    base = generate(spec.base, N)
    fname, fp = spec.fname, spec.fparams
    forms, reals = [], []
    for n in range(N):
        bf = base.forms[n]
        f = _smooth_form(fname, fp, bf)
        forms.append(f)
        reals.append(_real_of(f) if f is not None else _smooth_numeric(fname, fp, base.reals[n]))
    w = _real_window(spec, forms, reals, base)
    return w


def _smooth_form(fname: str, fp: tuple, x: ExactForm | None) -> ExactForm | None:
    if x is None:
        return None
    if fname == "affine":
        m, d = _affine_params(fp)
        inv = m.inverse()
        y = x * inv if inv is not None else None
        return y + d if y is not None else None
    if not x.is_rational:
        return None
    v = x.rational_value
    if fname == "exp":
        return ExactForm.exp(v)
    if fname == "sinh":
        return ExactForm.make("exp", 1, {v: Fraction(1, 2), -v: Fraction(-1, 2)})
    if fname == "xlogx":
        if v <= 0:
            raise SpecError("x log x needs positive base terms")
        return ExactForm.log_rational(v, v)
    if fname == "xklog":
        (k,) = _int_params(fp, 1)
        if v <= -1:
            raise SpecError("x^k log(x+1) needs base terms > -1")
        return ExactForm.log_rational(v + 1, v**k)
    if fname == "power":
        (t,) = fp
        if not t.is_rational:
            return None
        if v <= 0:
            raise SpecError("power map needs positive base terms")
        return _rational_power(v, t.rational_value)
    raise SpecError(fname)


def _affine_params(fp: tuple) -> tuple[ExactForm, ExactForm]:
    if len(fp) == 1:
        return fp[0], ExactForm.rational(0)
    if len(fp) != 2:
        raise SpecError("affine takes (m) or (m, d)")
    return fp[0], fp[1]


def _int_params(fp: tuple, count: int) -> tuple[int, ...]:
    if len(fp) != count or not all(f.is_rational and f.rational_value.denominator == 1 for f in fp):
        raise SpecError(f"expected {count} integer parameter(s)")
    return tuple(int(f.rational_value) for f in fp)


def _smooth_numeric(fname: str, fp: tuple, x: CertifiedReal) -> CertifiedReal:
    if fname == "exp":
        return cr_exp(x)
    if fname == "sinh":
        return (cr_exp(x) - cr_exp(-x)) / 2
    if fname == "xlogx":
        return x * cr_log(x)
    if fname == "xklog":
        (k,) = _int_params(fp, 1)
        p = CertifiedReal.from_fraction(1)
        for _ in range(k):
            p = p * x
        return p * cr_log(x + 1)
    if fname == "affine":
        m, d = _affine_params(fp)
        return x / m.to_real() + d.to_real()
    if fname == "power":
        return cr_pow(x, fp[0].to_real())
    raise SpecError(fname)


_GENERATORS: dict[str, Callable[[SequenceSpec, int], SeqWindow]] = {
    "arithmetic": _gen_arithmetic,
    "polynomial": _gen_polynomial,
    "beatty": _gen_beatty,
    "lacunary": _gen_lacunary,
    "fibonacci": _gen_fibonacci,
    "explicit": _gen_explicit,
    "smooth": _gen_smooth,
}


def _real_of(f: ExactForm) -> CertifiedReal:
    return f.to_real()


def _positive(f: ExactForm) -> bool:
    return certified_sign(f.to_real()) > 0


def _validate(w: SeqWindow) -> None:
    if w.ints is not None:
        if min(w.ints) <= 0:
            raise SpecError(f"{w.spec}: terms must be positive")
        if len(set(w.ints)) != w.N:
            raise SpecError(f"{w.spec}: terms are not distinct")
        return
    for n, r in enumerate(w.reals, start=1):
        if certified_sign(r) <= 0:
            raise SpecError(f"{w.spec}: term {n} is not positive")
    keys = [f for f in w.forms if f is not None]
    if len(set(keys)) != len(keys):
        raise SpecError(f"{w.spec}: terms are not distinct")
    # numerical separation also proves distinctness of formless terms
    w.order


# ---------------------------------------------------------------------------
# gap profiles
# ---------------------------------------------------------------------------


def gap_profile(window: SeqWindow) -> CertifiedReal:
    """Certified lower bound c(N) on the minimal gap guaranteed by the family."""
    return gap_profile_at(window.spec, window.N, window)


def gap_profile_at(spec: SequenceSpec, N: int, window: SeqWindow | None = None) -> CertifiedReal:
    """c(N) without a window where the family allows it (explicit and smooth need one)."""
    fam = spec.family
    if fam in ("explicit", "smooth") and (window is None or window.N != N):
        window = generate(spec, N)
    if fam == "arithmetic":
        return spec.params[1].to_real()
    if fam == "polynomial":
        t = spec.params[0]
        tr = t.to_real()
        if t.is_rational and t.rational_value >= 1:
            return _rational_power_real(2, t) - 1
        if not t.is_rational and certified_sign(tr - 1) >= 0:
            return cr_pow(CertifiedReal.from_fraction(2), tr) - 1
        # mean value bound |theta| N^(theta - 1)
        if t.is_rational:
            return _rational_power_real(N, t - ExactForm.rational(1)) * abs(t.rational_value)
        return abs(tr) * cr_pow(CertifiedReal.from_fraction(N), tr - 1)
    if fam == "beatty":
        return CertifiedReal.from_fraction(certified_floor(spec.params[0].to_real()))
    if fam == "lacunary":
        c = spec.params[0]
        sq = c * c
        f = sq - c if sq is not None else None
        if f is not None:
            return f.to_real()
        cr = c.to_real()
        return (cr - 1) * cr
    if fam == "fibonacci":
        return CertifiedReal.from_fraction(1)
    if fam == "explicit":
        return window.min_gap
    if fam == "smooth":
        return _smooth_gap(window)
    raise SpecError(fam)


def _rational_power_real(n: int, t: ExactForm) -> CertifiedReal:
    return _rational_power(Fraction(n), t.rational_value).to_real()


def gap_is_constant(spec: SequenceSpec) -> bool:
    """True when the family's gap profile does not depend on N."""
    fam = spec.family
    if fam == "polynomial":
        return certified_sign(spec.params[0].to_real() - 1) >= 0
    if fam == "smooth":
        return _increasing_derivative(spec) and gap_is_constant(spec.base)
    return True


def _increasing_derivative(spec: SequenceSpec) -> bool:
    # f' non-decreasing on the positive axis, so inf |f'| sits at the smallest term
    if spec.fname in ("exp", "sinh", "xklog", "xlogx", "affine"):
        return True
    return spec.fname == "power" and certified_sign(spec.fparams[0].to_real() - 1) >= 0


def _smooth_gap(window: SeqWindow) -> CertifiedReal:
    """delta0 * c_base(N), delta0 = inf |f'| over the hull of the base terms."""
    base = window.base
    spec = window.spec
    lo_b = base.reals[base.order[0]]
    hi_b = base.reals[base.order[-1]]
    dl = _derivative(spec.fname, spec.fparams, lo_b)
    dh = _derivative(spec.fname, spec.fparams, hi_b)
    bound = min(_lower_abs(dl), _lower_abs(dh))
    c_base = gap_profile(base)
    c_low = c_base.exact if c_base.exact is not None else c_base.lower
    return CertifiedReal.from_fraction(bound * max(c_low, Fraction(0)))


def _lower_abs(x: CertifiedReal) -> Fraction:
    if x.exact is not None:
        return abs(x.exact)
    if x.lo > 0:
        return x.lower
    if x.hi < 0:
        return -x.upper
    return Fraction(0)


def _derivative(fname: str, fp: tuple, x: CertifiedReal) -> CertifiedReal:
    if fname == "exp":
        return cr_exp(x)
    if fname == "sinh":
        return (cr_exp(x) + cr_exp(-x)) / 2
    if fname == "xlogx":
        return cr_log(x) + 1
    if fname == "xklog":
        (k,) = _int_params(fp, 1)
        xk1 = CertifiedReal.from_fraction(1)
        for _ in range(k - 1):
            xk1 = xk1 * x
        return xk1 * k * cr_log(x + 1) + xk1 * x / (x + 1)
    if fname == "affine":
        m, _ = _affine_params(fp)
        return m.to_real().reciprocal()
    if fname == "power":
        t = fp[0].to_real()
        return t * cr_pow(x, t - 1)
    raise SpecError(fname)


# ---------------------------------------------------------------------------
# growth metadata used by coverage certificates and series majorants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Growth:
    """a_n <= coeff * n ** exponent for all n (None when not polynomially bounded)."""

    exponent: Fraction | None
    coeff: Fraction | None


def growth(spec: SequenceSpec) -> Growth:
    fam = spec.family
    if fam == "arithmetic":
        a, d = spec.params
        if a.is_rational and d.is_rational:
            av, dv = a.rational_value, d.rational_value
            # a + (n-1) d <= (max(a - d, 0) + d) n for n >= 1
            return Growth(Fraction(1), max(av - dv, Fraction(0)) + dv)
    if fam == "polynomial" and spec.params[0].is_rational and spec.params[0].rational_value > 0:
        return Growth(spec.params[0].rational_value, Fraction(1))
    if fam == "beatty":
        return Growth(Fraction(1), Fraction(math.ceil(float(spec.params[0].to_real()))))
    return Growth(None, None)


def convex_increasing(spec: SequenceSpec) -> bool:
    """True when consecutive gaps a_{n+1}-a_n are positive and non-decreasing."""
    fam = spec.family
    if fam in ("arithmetic", "fibonacci", "lacunary"):
        return True
    if fam == "polynomial":
        return certified_sign(spec.params[0].to_real() - 1) >= 0
    if fam == "smooth":
        # an increasing convex map keeps a convex increasing base convex increasing
        if spec.fname == "affine" and certified_sign(spec.fparams[0].to_real()) <= 0:
            return False
        return _increasing_derivative(spec) and convex_increasing(spec.base)
    return False
