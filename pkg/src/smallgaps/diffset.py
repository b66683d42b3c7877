"""Difference sets, floored difference sets and their invariants, grown in N."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from .forms import ExactForm
from .numeric import AmbiguityError, CertifiedReal, DomainError, START_BITS, precision_cap
from .sequences import SeqWindow, convex_increasing, generate

BITMAP_LIMIT = 1 << 27
_INT64_SAFE = 1 << 62


class CoverageError(LookupError):
    """A query needs a larger window than the one built."""

    def __init__(self, message: str, required_N: int | None = None):
        super().__init__(message)
        self.required_N = required_N


# ---------------------------------------------------------------------------
# DiffSet
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiffSet:
    """Enumeration z_1, z_2, ... of the positive differences.

    Elements are listed block by block: block T holds the differences that
    first occur among a_1..a_T, in increasing order.  ``counts[N]`` is D_N.
    ``pairs[n]`` is the first realizing pair (i, T), 1-based with i < T.

    Rational windows store integer numerators ``ints`` over ``scale``;
    real windows store enclosures ``reals`` and ExactForms ``forms``.
    """

    window: SeqWindow
    counts: np.ndarray
    steps: np.ndarray
    pairs: np.ndarray
    ints: np.ndarray | list | None = None
    scale: int = 1
    reals: tuple = ()
    forms: tuple = ()
    floors: tuple | np.ndarray | None = None  # certified floors for real windows
    approx: np.ndarray | None = None  # float values of real differences
    approx_err: float = 0.0  # bound on |approx - value|

    @property
    def N(self) -> int:
        return self.window.N

    @property
    def rational(self) -> bool:
        return self.ints is not None

    def D(self, N: int) -> int:
        _check_N(N, self.N)
        return int(self.counts[N])

    def C(self, N: int) -> int:
        """#(A_N - A_N), counting 0 from m = n."""
        return 2 * self.D(N) + 1

    def __len__(self) -> int:
        return int(self.counts[self.N])

    def value(self, n: int) -> Fraction:
        """Exact z_n (0-based index) for rational windows."""
        return Fraction(int(self.ints[n]), self.scale)

    def real(self, n: int) -> CertifiedReal:
        if self.ints is not None:
            return CertifiedReal.from_fraction(self.value(n))
        return self.reals[n]

    def floor(self, n: int) -> int:
        if self.ints is not None:
            return int(self.ints[n]) // self.scale
        return self.floors[n]

    @cached_property
    def int64(self) -> np.ndarray | None:
        """z numerators as int64 when they fit, else None."""
        if isinstance(self.ints, np.ndarray):
            return self.ints
        return None


def _check_N(N: int, built: int) -> None:
    if not 1 <= N <= built:
        raise DomainError(f"N={N} outside the built window 1..{built}")


def build_diffset(window: SeqWindow) -> DiffSet:
    """Enumerate (A_N - A_N)^+ block by block for every N up to window.N."""
    if window.N < 1:
        raise DomainError("empty window")
    if window.ints is not None:
        return _build_rational(window)
    return _build_real(window)


def _build_rational(w: SeqWindow) -> DiffSet:
    N = w.N
    a_max = max(w.ints)
    a_min = min(w.ints)
    counts = np.zeros(N + 1, dtype=np.int64)
    if a_max - a_min < _INT64_SAFE:
        a = np.asarray(w.ints, dtype=np.int64)
        span = int(a_max - a_min)
        vals, steps, pi = [], [], []
        if span <= BITMAP_LIMIT:
            seen = np.zeros(span + 1, dtype=bool)
            for T in range(2, N + 1):
                d = np.abs(a[T - 1] - a[: T - 1])
                fresh = ~seen[d]
                if fresh.any():
                    u, first = np.unique(d[fresh], return_index=True)
                    seen[u] = True
                    js = np.flatnonzero(fresh)[first]
                    vals.append(u)
                    pi.append(js + 1)
                    steps.append(np.full(len(u), T, dtype=np.int64))
                counts[T] = counts[T - 1] + (len(u) if fresh.any() else 0)
        else:
            seen_set: set[int] = set()
            for T in range(2, N + 1):
                d = np.abs(a[T - 1] - a[: T - 1])
                u, first = np.unique(d, return_index=True)
                keep = [k for k, v in enumerate(u.tolist()) if v not in seen_set]
                if keep:
                    u, first = u[keep], first[keep]
                    seen_set.update(u.tolist())
                    vals.append(u)
                    pi.append(first + 1)
                    steps.append(np.full(len(u), T, dtype=np.int64))
                counts[T] = counts[T - 1] + len(keep)
        ints = np.concatenate(vals) if vals else np.zeros(0, dtype=np.int64)
        step_arr = np.concatenate(steps) if steps else np.zeros(0, dtype=np.int64)
        pi_arr = np.concatenate(pi) if pi else np.zeros(0, dtype=np.int64)
        pairs = np.stack([pi_arr, step_arr], axis=1) if len(ints) else np.zeros((0, 2), dtype=np.int64)
        return DiffSet(w, counts, step_arr, pairs, ints, w.scale)
    # huge integers: exact Python arithmetic
    a = list(w.ints)
    seen_set = set()
    vals_l: list[int] = []
    steps_l: list[int] = []
    pairs_l: list[tuple[int, int]] = []
    for T in range(2, N + 1):
        new: dict[int, int] = {}
        aT = a[T - 1]
        for j in range(T - 1):
            v = abs(aT - a[j])
            if v not in seen_set and v not in new:
                new[v] = j + 1
        for v in sorted(new):
            vals_l.append(v)
            steps_l.append(T)
            pairs_l.append((new[v], T))
        seen_set.update(new)
        counts[T] = counts[T - 1] + len(new)
    return DiffSet(
        w,
        counts,
        np.asarray(steps_l, dtype=np.int64),
        np.asarray(pairs_l, dtype=np.int64).reshape(-1, 2),
        vals_l,
        w.scale,
    )


def _build_real(w: SeqWindow) -> DiffSet:
    N = w.N
    rank = [0] * N
    for r, i in enumerate(w.order):
        rank[i] = r
    prec = START_BITS
    cap = precision_cap()
    fast = _float_terms(w, prec)
    while True:
        try:
            if fast is not None:
                return _build_real_screened(w, rank, prec, *fast)
            return _build_real_at(w, rank, prec)
        except _NeedPrecision:
            if prec >= cap:
                raise AmbiguityError(
                    f"{w.spec}: differences cannot be separated at the precision cap"
                ) from None
            prec = min(2 * prec, cap)


class _NeedPrecision(Exception):
    pass


def _build_real_at(w: SeqWindow, rank: list[int], prec: int) -> DiffSet:
    N = w.N
    enc = w.enclosures(prec)
    forms = w.forms
    # group pairs by value: exact keys when available
    groups: dict = {}  # key -> [lo, hi, form, first (T, i), members]
    order_keys: list = []
    for T in range(2, N + 1):
        lT, hT = enc[T - 1]
        for j in range(T - 1):
            lj, hj = enc[j]
            up = rank[T - 1] > rank[j]
            lo, hi = (lT - hj, hT - lj) if up else (lj - hT, hj - lT)
            f = _pair_form(w, rank, j, T - 1)
            key = ("f", f) if f is not None else ("p", j, T)
            g = groups.get(key)
            if g is None:
                groups[key] = [lo, hi, f, T, j + 1]
                order_keys.append(key)
    # numerical separation of distinct groups
    items = sorted(order_keys, key=lambda k: groups[k][0])
    for x, y in zip(items, items[1:]):
        if groups[y][0] <= groups[x][1]:
            raise _NeedPrecision
    # certified floors
    floors = {}
    for k in order_keys:
        lo, hi, f = groups[k][0], groups[k][1], groups[k][2]
        if f is not None and f.is_rational:
            floors[k] = math.floor(f.rational_value)
            continue
        a, b = lo >> prec, hi >> prec
        if a != b:
            raise _NeedPrecision
        floors[k] = a
    rank_of = {k: r for r, k in enumerate(items)}
    by_step: dict[int, list] = {}
    for k in order_keys:
        by_step.setdefault(groups[k][3], []).append(k)
    counts = np.zeros(N + 1, dtype=np.int64)
    z_keys: list = []
    for T in range(2, N + 1):
        block = sorted(by_step.get(T, []), key=rank_of.__getitem__)
        z_keys.extend(block)
        counts[T] = counts[T - 1] + len(block)
    reals = []
    zforms = []
    for k in z_keys:
        lo, hi, f, T, i = groups[k]
        zforms.append(f)
        reals.append(_diff_real(w, f, i, T, rank, lo, hi, prec))
    steps = np.asarray([groups[k][3] for k in z_keys], dtype=np.int64)
    pairs = np.asarray([(groups[k][4], groups[k][3]) for k in z_keys], dtype=np.int64).reshape(-1, 2)
    return DiffSet(
        w, counts, steps, pairs, None, 1, tuple(reals), tuple(zforms), tuple(floors[k] for k in z_keys)
    )


_FLOAT_SAFE = 2.0**40


def _float_terms(w: SeqWindow, prec: int):
    """Double approximations of the terms and a bound on the error of any difference."""
    enc = w.enclosures(prec)
    if not enc or max(max(abs(lo), abs(hi)) for lo, hi in enc) >> prec >= _FLOAT_SAFE:
        return None
    a = np.array([math.ldexp(lo + hi, -prec - 1) for lo, hi in enc])
    width = max(hi - lo for lo, hi in enc)
    amax = float(np.max(np.abs(a)))
    # each term is off by <= ulp/2 + width; a float subtraction adds <= ulp(2 amax)/2
    err = 4 * amax * 2.0**-52 + 2 * math.ldexp(width + 1, -prec) + 1e-300
    return a, err


class _LazyDiffs(tuple):
    """Per-difference forms or enclosures, created on access."""

    def __new__(cls, w: SeqWindow, rank, pairs: np.ndarray, prec: int, kind: str):
        obj = super().__new__(cls, ())
        obj._w, obj._rank, obj._pairs, obj._prec, obj._kind = w, rank, pairs, prec, kind
        obj._cache = {}
        return obj

    def __len__(self):
        return len(self._pairs)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __getitem__(self, n):
        if isinstance(n, slice):
            return tuple(self[j] for j in range(*n.indices(len(self))))
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        i, T = (int(x) for x in self._pairs[n])
        f = _pair_form(self._w, self._rank, i - 1, T - 1)
        if self._kind == "forms":
            out = f
        else:
            enc = self._w.enclosures(self._prec)
            lo, hi = _pair_enclosure(enc, self._rank, i - 1, T - 1)
            out = _diff_real(self._w, f, i, T, self._rank, lo, hi, self._prec)
        self._cache[n] = out
        return out


def _pair_form(w: SeqWindow, rank, j: int, t: int) -> ExactForm | None:
    if w.step is not None:
        return w.step.scale(abs(t - j))
    fa, fb = w.forms[t], w.forms[j]
    if fa is None or fb is None:
        return None
    return fa - fb if rank[t] > rank[j] else fb - fa


def _pair_enclosure(enc, rank, j: int, t: int) -> tuple[int, int]:
    (lT, hT), (lj, hj) = enc[t], enc[j]
    return (lT - hj, hT - lj) if rank[t] > rank[j] else (lj - hT, hj - lT)


def _build_real_screened(w: SeqWindow, rank, prec: int, a: np.ndarray, err: float) -> DiffSet:
    """Distinct differences of a moderate-size real window.

    Doubles separate almost every pair of differences; only runs of
    differences closer than the error bound, and values near an integer,
    are settled with exact forms or fixed-point enclosures.
    """
    N = w.N
    row, col = np.tril_indices(N, -1)  # row = T - 1 > col = j, ordered by (T, j)
    d = np.abs(a[row] - a[col])
    order = np.argsort(d, kind="stable")
    ds_ = d[order]
    near = np.diff(ds_) <= 2 * err
    enc = w.enclosures(prec)
    group_of = np.arange(len(order))
    exact_rank = np.arange(len(order), dtype=np.float64)
    if near.any():
        starts = np.flatnonzero(near & ~np.r_[False, near[:-1]])
        for s0 in starts.tolist():
            e0 = s0 + 1
            while e0 < len(near) and near[e0]:
                e0 += 1
            _settle_cluster(w, rank, enc, prec, order, row, col, s0, e0, group_of, exact_rank)
    is_rep = group_of == np.arange(len(order))
    reps = order[is_rep]
    T = row[reps] + 1
    J = col[reps] + 1
    vals = d[reps]
    erank = exact_rank[is_rep]
    pick = np.lexsort((erank, T))
    T, J, vals = T[pick], J[pick], vals[pick]
    pairs = np.stack([J, T], axis=1).astype(np.int64)
    floors = np.floor(vals).astype(np.int64)
    dist = np.minimum(vals - floors, floors + 1 - vals)
    for n in np.flatnonzero(dist <= err).tolist():
        j, t = int(J[n]) - 1, int(T[n]) - 1
        f = _pair_form(w, rank, j, t)
        if f is not None and f.is_rational:
            floors[n] = math.floor(f.rational_value)
            continue
        lo, hi = _pair_enclosure(enc, rank, j, t)
        if lo >> prec != hi >> prec:
            raise _NeedPrecision
        floors[n] = lo >> prec
    counts = np.zeros(N + 1, dtype=np.int64)
    np.add.at(counts, T, 1)
    counts = np.cumsum(counts)
    return DiffSet(
        w,
        counts,
        T.astype(np.int64),
        pairs,
        None,
        1,
        _LazyDiffs(w, rank, pairs, prec, "reals"),
        _LazyDiffs(w, rank, pairs, prec, "forms"),
        floors,
        vals,
        err,
    )


def _settle_cluster(w, rank, enc, prec, order, row, col, s0, e0, group_of, exact_rank) -> None:
    """Merge exactly equal differences among sorted slots s0..e0 and order the groups exactly."""
    groups: dict = {}  # key -> [representative slot, lo, hi]
    keys = []
    for k in range(s0, e0 + 1):
        p = int(order[k])
        j, t = int(col[p]), int(row[p])
        f = _pair_form(w, rank, j, t)
        key = ("f", f) if f is not None else ("p", p)
        keys.append(key)
        g = groups.get(key)
        if g is None:
            lo, hi = _pair_enclosure(enc, rank, j, t)
            groups[key] = [k, lo, hi]
        else:
            q = int(order[g[0]])
            if (row[p], col[p]) < (row[q], col[q]):  # keep the earliest (T, j)
                g[0] = k
    for k, key in zip(range(s0, e0 + 1), keys):
        group_of[k] = groups[key][0]
    ranked = sorted(groups, key=lambda key: groups[key][1])
    for x, y in zip(ranked, ranked[1:]):
        if groups[y][1] <= groups[x][2]:
            raise _NeedPrecision
    for r, key in enumerate(ranked):
        exact_rank[groups[key][0]] = s0 + r / (len(ranked) + 1)


def _diff_real(w: SeqWindow, f: ExactForm | None, i: int, T: int, rank, lo, hi, prec) -> CertifiedReal:
    if f is not None:
        if f.is_rational:
            return CertifiedReal.from_fraction(f.rational_value)
        return CertifiedReal(lo, hi, prec, None, f.evaluate)
    a, b = w.reals[T - 1], w.reals[i - 1]
    d = a - b if rank[T - 1] > rank[i - 1] else b - a
    return d.at(prec) if d.refinable else CertifiedReal(lo, hi, prec)


# ---------------------------------------------------------------------------
# FlooredDiffSet
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlooredDiffSet:
    """Enumeration Z_1, Z_2, ... of the floored positive differences.

    ``counts[N]`` is H_N; ``zero_step`` is the first N at which 0 occurs
    (0 when it never does); ``B`` and ``B_tilde`` hold per-N extremes.
    """

    diffset: DiffSet
    Z: np.ndarray | list
    counts: np.ndarray
    steps: np.ndarray
    B: list
    B_tilde: list
    zero_step: int
    first: dict = field(repr=False)

    @property
    def window(self) -> SeqWindow:
        return self.diffset.window

    @property
    def N(self) -> int:
        return self.diffset.N

    @property
    def hypothesis_ok(self) -> bool:
        """Every difference in the window is at least 1 (no zero floors)."""
        return self.zero_step == 0

    def H(self, N: int) -> int:
        _check_N(N, self.N)
        return int(self.counts[N])

    def T(self, N: int) -> int:
        _check_N(N, self.N)
        has_zero = self.zero_step and self.zero_step <= N
        return int(self.counts[N]) - (1 if has_zero else 0)

    def values(self, H: int | None = None) -> list[int]:
        """Z_1..Z_H as Python ints."""
        H = len(self) if H is None else H
        if isinstance(self.Z, np.ndarray):
            return self.Z[:H].tolist()
        return list(self.Z[:H])

    def __len__(self) -> int:
        return int(self.counts[self.N])

    @cached_property
    def Z_int64(self) -> np.ndarray | None:
        if isinstance(self.Z, np.ndarray):
            return self.Z
        if not self.Z or max(self.Z) < _INT64_SAFE:
            return np.asarray(self.Z, dtype=np.int64)
        return None

    # first appearance ---------------------------------------------------------
    def first_appearance(self, k: int) -> int | None:
        """N(k) = min{M : k is a floored positive difference of A_M}.

        Returns None when k certainly never occurs and raises CoverageError
        when the built window cannot decide.
        """
        k = int(k)
        hit = self.first.get(k)
        if hit is not None:
            return hit
        closed = _closed_form_first(self.window, k)
        if closed is not _UNKNOWN:
            return closed
        bound = self.future_floor_bound
        if bound is not None and k < bound:
            return None
        raise CoverageError(
            f"membership of {k} is not decided by the window N={self.N}",
            self._required_for(k),
        )

    def first_appearance_array(self, ks: np.ndarray) -> np.ndarray:
        """Vectorized N(k); 0 marks certified absence."""
        ks = np.asarray(ks, dtype=np.int64)
        out = np.zeros(ks.shape, dtype=np.int64)
        ap = _ap_params(self.window)
        if ap is not None:
            a0, d = ap
            num, den = d.numerator, d.denominator
            m = -((-ks * den) // num)  # ceil(k/d)
            ok = (m * num) < (ks + 1) * den
            ok &= m >= 1
            out[ok] = m[ok] + 1
            return out
        table = self._first_table
        inside = ks < len(table)
        out[inside] = table[ks[inside]]
        undecided = out == 0
        if undecided.any():
            bound = self.future_floor_bound
            bad = ks[undecided & ~(ks < (bound if bound is not None else 0))]
            if bad.size:
                k = int(bad.min())
                raise CoverageError(
                    f"membership of {k} is not decided by the window N={self.N}", self._required_for(k)
                )
        return out

    @cached_property
    def _first_table(self) -> np.ndarray:
        if not self.first:
            return np.zeros(1, dtype=np.int64)
        top = max(self.first)
        if top > 1 << 26:
            top = 1 << 26
        table = np.zeros(top + 1, dtype=np.int64)
        for k, n in self.first.items():
            if k <= top:
                table[k] = n
        return table

    @cached_property
    def future_floor_bound(self) -> int | None:
        """Every floored difference first occurring after step N is >= this."""
        w = self.window
        if not convex_increasing(w.spec) or not w.increasing:
            return None
        nxt = generate(w.spec, w.N + 1)
        if nxt.ints is not None:
            return (nxt.ints[-1] - nxt.ints[-2]) // nxt.scale
        d = nxt.reals[-1] - nxt.reals[-2]
        from .numeric import certified_floor

        return certified_floor(d)

    def _required_for(self, k: int) -> int | None:
        w = self.window
        if not convex_increasing(w.spec):
            return None
        n = w.N
        while n < 1 << 20:
            n *= 2
            nxt = generate(w.spec, n + 1)
            gap = (
                (nxt.ints[-1] - nxt.ints[-2]) / nxt.scale
                if nxt.ints is not None
                else float(nxt.reals[-1] - nxt.reals[-2])
            )
            if gap > k + 1:
                return n
        return None


_UNKNOWN = object()


def _ap_params(w: SeqWindow) -> tuple[Fraction, Fraction] | None:
    spec = w.spec
    if spec.family != "arithmetic":
        return None
    a, d = spec.params
    if not (a.is_rational and d.is_rational):
        return None
    return a.rational_value, d.rational_value


def _closed_form_first(w: SeqWindow, k: int):
    ap = _ap_params(w)
    if ap is None:
        return _UNKNOWN
    _, d = ap
    # differences are m*d; floor(m d) = k first at m = ceil(k/d)
    if k < 0:
        return None
    m = max(1, math.ceil(Fraction(k) / d))
    if m * d < k + 1:
        return m + 1
    return None


def build_floored(window_or_diffset) -> FlooredDiffSet:
    """Enumerate the floored positive differences with H_N, T_N, B_N, B~_N, N(k)."""
    ds = window_or_diffset if isinstance(window_or_diffset, DiffSet) else build_diffset(window_or_diffset)
    N = ds.N
    counts = np.zeros(N + 1, dtype=np.int64)
    B = [0] * (N + 1)
    Bt = [0] * (N + 1)
    first: dict[int, int] = {}
    zero_step = 0
    Z_list: list = []
    step_list: list[int] = []
    np_path = ds.int64 is not None
    if np_path:
        z = ds.int64
        fl = z // ds.scale
        is_int = (z % ds.scale) == 0
        vals: list[np.ndarray] = []
        stp: list[np.ndarray] = []
        span = int(fl.max()) if len(fl) else 0
        seen = np.zeros(span + 1, dtype=bool) if span <= BITMAP_LIMIT else None
        seen_set: set[int] = set()
        run_max = -1
        run_max_int = True
        for T in range(2, N + 1):
            lo, hi = int(ds.counts[T - 1]), int(ds.counts[T])
            block = fl[lo:hi]
            if hi > lo:
                bmax = int(z[lo:hi].max())
                if bmax > run_max:
                    run_max = bmax
                    run_max_int = bmax % ds.scale == 0
                if seen is not None:
                    u = np.unique(block)
                    u = u[~seen[u]]
                    seen[u] = True
                else:
                    u = np.asarray(sorted(set(block.tolist()) - seen_set), dtype=np.int64)
                    seen_set.update(u.tolist())
                if len(u):
                    vals.append(u)
                    stp.append(np.full(len(u), T, dtype=np.int64))
                    if u[0] == 0:
                        zero_step = T
                counts[T] = counts[T - 1] + len(u)
            else:
                counts[T] = counts[T - 1]
            if run_max >= 0:
                B[T] = run_max // ds.scale
                Bt[T] = B[T] + (0 if run_max_int else 1)
        Z = np.concatenate(vals) if vals else np.zeros(0, dtype=np.int64)
        steps = np.concatenate(stp) if stp else np.zeros(0, dtype=np.int64)
        for k, s in zip(Z.tolist(), steps.tolist()):
            first[k] = s
        return FlooredDiffSet(ds, Z, counts, steps, B, Bt, zero_step, first)
    if isinstance(ds.floors, np.ndarray):
        return _floored_screened(ds)
    # generic path (huge integers or real windows)
    run_max_idx = -1
    for T in range(2, N + 1):
        lo, hi = int(ds.counts[T - 1]), int(ds.counts[T])
        fresh = set()
        for n in range(lo, hi):
            k = ds.floor(n)
            if k not in first and k not in fresh:
                fresh.add(k)
            if run_max_idx < 0 or _greater(ds, n, run_max_idx):
                run_max_idx = n
        for k in sorted(fresh):
            first[k] = T
            Z_list.append(k)
            step_list.append(T)
            if k == 0:
                zero_step = T
        counts[T] = counts[T - 1] + len(fresh)
        if run_max_idx >= 0:
            B[T] = ds.floor(run_max_idx)
            Bt[T] = B[T] + (0 if _is_integer(ds, run_max_idx) else 1)
    return FlooredDiffSet(ds, Z_list, counts, np.asarray(step_list, dtype=np.int64), B, Bt, zero_step, first)


def _floored_screened(ds: DiffSet) -> FlooredDiffSet:
    """Floored enumeration for real difference sets with vectorized floors."""
    N = ds.N
    fl = ds.floors
    counts = np.zeros(N + 1, dtype=np.int64)
    B = [0] * (N + 1)
    Bt = [0] * (N + 1)
    span = int(fl.max()) if len(fl) else 0
    seen = np.zeros(span + 1, dtype=bool) if span <= BITMAP_LIMIT else None
    seen_set: set[int] = set()
    vals: list[np.ndarray] = []
    stp: list[np.ndarray] = []
    zero_step = 0
    run = -1
    run_int = False
    approx, err = ds.approx, ds.approx_err
    for T in range(2, N + 1):
        lo, hi = int(ds.counts[T - 1]), int(ds.counts[T])
        if hi > lo:
            if seen is not None:
                u = np.unique(fl[lo:hi])
                u = u[~seen[u]]
                seen[u] = True
            else:
                u = np.asarray(sorted(set(fl[lo:hi].tolist()) - seen_set), dtype=np.int64)
                seen_set.update(u.tolist())
            if len(u):
                vals.append(u)
                stp.append(np.full(len(u), T, dtype=np.int64))
                if u[0] == 0:
                    zero_step = T
            top = hi - 1  # blocks are ascending
            if run < 0 or approx[top] > approx[run] + 2 * err or (
                approx[top] >= approx[run] - 2 * err and _greater(ds, top, run)
            ):
                run = top
                near = abs(approx[run] - round(approx[run])) <= err
                run_int = near and _is_integer(ds, run)
        counts[T] = counts[T - 1] + (len(u) if hi > lo else 0)
        if run >= 0:
            B[T] = int(fl[run])
            Bt[T] = B[T] + (0 if run_int else 1)
    Z = np.concatenate(vals) if vals else np.zeros(0, dtype=np.int64)
    steps = np.concatenate(stp) if stp else np.zeros(0, dtype=np.int64)
    first = dict(zip(Z.tolist(), steps.tolist()))
    return FlooredDiffSet(ds, Z, counts, steps, B, Bt, zero_step, first)


def _greater(ds: DiffSet, n: int, m: int) -> bool:
    if ds.ints is not None:
        return ds.ints[n] > ds.ints[m]
    a, b = ds.reals[n], ds.reals[m]
    if a.lo > b.hi:
        return True
    if a.hi < b.lo:
        return False
    from .numeric import certified_lt

    return certified_lt(b, a)


def _is_integer(ds: DiffSet, n: int) -> bool:
    if ds.ints is not None:
        return ds.ints[n] % ds.scale == 0
    f = ds.forms[n]
    return f is not None and f.is_rational and f.rational_value.denominator == 1


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CardinalityRow:
    N: int
    C: int
    D: int
    H: int
    T: int
    B: int
    B_tilde: int

    def as_tuple(self) -> tuple[int, ...]:
        return (self.N, self.C, self.D, self.H, self.T, self.B, self.B_tilde)


CARDINALITY_COLUMNS = ("N", "C_N", "D_N", "H_N", "T_N", "B_N", "B_tilde_N")


def cardinality_report(fd: FlooredDiffSet, N: int) -> CardinalityRow:
    """(C_N, D_N, H_N, T_N, B_N, B~_N) for one N."""
    _check_N(N, fd.N)
    ds = fd.diffset
    return CardinalityRow(N, ds.C(N), ds.D(N), fd.H(N), fd.T(N), fd.B[N], fd.B_tilde[N])


def write_cardinality_csv(fd: FlooredDiffSet, out: IO[str], Ns: Iterable[int] | None = None) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CARDINALITY_COLUMNS)
    for N in Ns if Ns is not None else range(1, fd.N + 1):
        writer.writerow(cardinality_report(fd, N).as_tuple())


def build(spec_or_window, N: int | None = None) -> FlooredDiffSet:
    """Convenience: generate a window if needed and build its floored set."""
    w = spec_or_window if isinstance(spec_or_window, SeqWindow) else generate(spec_or_window, N)
    return build_floored(build_diffset(w))


def floored_with_at_least(spec, H: int, start: int = 8, limit: int = 1 << 16) -> FlooredDiffSet:
    """Smallest doubling window whose floored set has at least H elements."""
    n = start
    while True:
        fd = build(spec, n)
        if len(fd) >= H:
            return fd
        if n >= limit:
            raise CoverageError(f"no window up to N={limit} has {H} floored differences")
        n *= 2
