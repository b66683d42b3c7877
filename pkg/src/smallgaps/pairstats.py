"""Pair-counting statistic D(N, M)(alpha), its mean and variance, and GCD sums.

D(N, M)(alpha) = sum over the first H_N floored differences z of F_M(alpha z),
where F_M(x) = sum_j f(M (x + j)) periodizes a unit-mass bump f supported in
[-1/2, 1/2].  Averaging over alpha in [0, 1] gives exactly H_N / M.
"""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from functools import lru_cache
from typing import IO, Iterable, Sequence

import mpmath
import numpy as np

from .diffset import CoverageError, FlooredDiffSet
from .gaps import Alpha, make_alpha
from .numeric import DomainError, clamped_log, frac_part


# ---------------------------------------------------------------------------
# bump function
# ---------------------------------------------------------------------------


def _shape(x):
    """exp(-1/(1 - 4x^2)) on |x| < 1/2, zero outside (numpy or mpmath scalar)."""
    if isinstance(x, np.ndarray):
        out = np.zeros_like(x, dtype=float)
        inside = np.abs(x) < 0.5
        out[inside] = np.exp(-1.0 / (1.0 - 4.0 * x[inside] ** 2))
        return out
    if abs(x) >= 0.5:
        return mpmath.mpf(0) if isinstance(x, mpmath.mpf) else 0.0
    return mpmath.exp(-1 / (1 - 4 * x * x)) if isinstance(x, mpmath.mpf) else math.exp(-1 / (1 - 4 * x * x))


@lru_cache(maxsize=1)
def bump_normalization() -> float:
    """c with c * integral of the shape over [-1/2, 1/2] equal to 1."""
    with mpmath.workdps(30):
        mass = mpmath.quad(lambda t: _shape(mpmath.mpf(t)), [-0.5, 0, 0.5])
        return float(1 / mass)


@dataclass(frozen=True)
class BumpFunction:
    """f(x) = c exp(-1/(1 - 4x^2)) for |x| < 1/2, else 0, with unit integral."""

    c: float

    @staticmethod
    def standard() -> "BumpFunction":
        return BumpFunction(bump_normalization())

    def f(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * _shape(x)

    def peak(self) -> float:
        return self.c * math.exp(-1.0)

    def F(self, x, M: float) -> np.ndarray:
        """Periodization F_M(x) = sum_j f(M (x + j)); x is reduced mod 1 first."""
        if M <= 0:
            raise DomainError(f"M must be positive, got {M}")
        x = np.asarray(x, dtype=float)
        r = x - np.floor(x)
        r = np.where(r >= 0.5, r - 1.0, r)  # signed residue in [-1/2, 1/2)
        if M > 1:
            return self.c * _shape(M * r)
        J = int(math.ceil(0.5 / M)) + 1
        total = np.zeros_like(r)
        for j in range(-J, J + 1):
            total += _shape(M * (r + j))
        return self.c * total


# ---------------------------------------------------------------------------
# D(N, M)
# ---------------------------------------------------------------------------


def _zs(fd: FlooredDiffSet, N: int) -> np.ndarray:
    if N > fd.N:
        raise CoverageError(f"window has N={fd.N}, need {N}", N)
    H = fd.H(N)
    Z = fd.Z_int64
    if Z is None:
        raise DomainError("floored differences exceed 64-bit range")
    return Z[:H]


def _residues(alpha: Alpha, zs: np.ndarray) -> np.ndarray:
    """{alpha z} for each z, computed exactly (rational alpha) or from a 128-bit enclosure."""
    if alpha.exact is not None:
        p, q = alpha.exact.numerator, alpha.exact.denominator
        return np.array([float(Fraction((p * int(z)) % q, q)) for z in zs])
    return np.array([float(frac_part(alpha.real.scale(Fraction(int(z))))) for z in zs])


def eval_DNM(fd: FlooredDiffSet, N: int, M: float, alpha, bump: BumpFunction | None = None) -> float:
    """D(N, M)(alpha) by direct summation over the first H_N floored differences."""
    bump = bump or BumpFunction.standard()
    a = alpha if isinstance(alpha, Alpha) else make_alpha(alpha)
    zs = _zs(fd, N)
    if zs.size == 0:
        return 0.0
    return float(np.sum(bump.F(_residues(a, zs), float(M))))


def eval_DNM_batch(
    fd: FlooredDiffSet, N: int, M: float, alphas: Sequence[float], bump: BumpFunction | None = None, block: int = 256
) -> np.ndarray:
    """D(N, M) for many float alphas at once (double-precision residues)."""
    bump = bump or BumpFunction.standard()
    zs = _zs(fd, N).astype(float)
    al = np.asarray(alphas, dtype=float)
    out = np.empty(al.size)
    for s in range(0, al.size, block):
        x = np.outer(al[s : s + block], zs)
        out[s : s + block] = bump.F(x, float(M)).sum(axis=1)
    return out


def mean_identity_check(z: int, M: float, bump: BumpFunction | None = None, nodes: int = 48) -> float:
    """Quadrature of the integral over alpha in [0, 1] of F_M(alpha z); equals 1/M.

    The interval is cut at every point where alpha z hits a support edge or a
    half-integer, so Gauss-Legendre sees a smooth integrand on each piece.
    """
    bump = bump or BumpFunction.standard()
    if z < 1:
        raise DomainError("z must be a positive integer")
    e = (0.5 / M) % 1.0
    offsets = np.unique([0.0, 0.5, e, 1.0 - e])
    cuts = np.unique(np.clip((np.arange(z + 1)[:, None] + offsets[None, :]).ravel() / z, 0.0, 1.0))
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = cuts[:-1], cuts[1:]
    half = (b - a) / 2
    pts = (a + b)[:, None] / 2 + half[:, None] * x[None, :]
    vals = bump.F(pts * z, float(M))
    return float(np.sum(half[:, None] * w[None, :] * vals))


# ---------------------------------------------------------------------------
# GCD sums
# ---------------------------------------------------------------------------


def _positive_Z(fd: FlooredDiffSet, H: int) -> np.ndarray:
    if H > len(fd):
        raise CoverageError(f"need {H} floored differences, have {len(fd)}")
    Z = fd.Z_int64
    if Z is not None:
        Z = Z[:H]
    else:
        vals = fd.values(H)
        # exact Python-int gcds once the prefix leaves the int64 range
        Z = np.asarray(vals, dtype=np.int64 if max(vals, default=0) < 1 << 62 else object)
    if H and Z.min() < 1:
        raise DomainError("GCD sums need positive floored differences")
    return Z


def gcd_sum_profile(fd: FlooredDiffSet, H: int, block: int = 512) -> np.ndarray:
    """S(h) = sum over m, n <= h of gcd(Z_m, Z_n)/sqrt(Z_m Z_n) for h = 1..H."""
    Z = _positive_Z(fd, H)
    root = np.sqrt(Z.astype(float))
    row = np.zeros(H)
    for s in range(0, H, block):
        e = min(H, s + block)
        g = np.gcd(Z[s:e, None], Z[None, :e])
        w = g / (root[s:e, None] * root[None, :e])
        # strictly lower triangle: m < n for each row n
        mask = np.arange(e)[None, :] < np.arange(s, e)[:, None]
        row[s:e] = np.where(mask, w, 0.0).sum(axis=1)
    return np.arange(1, H + 1) + 2 * np.cumsum(row)


def gcd_sum(fd: FlooredDiffSet, H: int) -> float:
    """Double sum over ordered pairs m, n <= H of gcd(Z_m, Z_n)/sqrt(Z_m Z_n)."""
    if H < 1:
        raise DomainError("H must be positive")
    return float(gcd_sum_profile(fd, H)[-1])


def gcd_sum_bound(H: int, A: float = 7.0) -> float:
    """exp(A sqrt(L L3 / L2)) with clamped iterated logs of H."""
    L1, L2, L3 = (clamped_log(H, d) for d in (1, 2, 3))
    return math.exp(A * math.sqrt(L1 * L3 / L2))


def gcd_sum_violations(fd: FlooredDiffSet, H: int, A: float = 7.0) -> list[int]:
    """Every h <= H with S(h)/h above the bound."""
    S = gcd_sum_profile(fd, H)
    return [h for h in range(1, H + 1) if S[h - 1] / h > gcd_sum_bound(h, A)]


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairStatReport:
    N: int
    M: float
    mean_expected: float
    empirical_mean: float
    empirical_variance: float
    gcd_sum: float
    ratio: float  # empirical variance / (gcd_sum / M)


PAIRSTAT_COLUMNS = tuple(f.name for f in fields(PairStatReport))


def mean_variance_experiment(
    fd: FlooredDiffSet, N: int, M: float, alphas: Sequence[float], bump: BumpFunction | None = None
) -> PairStatReport:
    """Empirical mean and variance of D(N, M) over an alpha sample."""
    if len(alphas) < 100:
        raise DomainError("need at least 100 sampled alphas")
    H = fd.H(N)
    values = eval_DNM_batch(fd, N, M, alphas, bump)
    g = gcd_sum(fd, H) if H else 0.0
    var = float(np.var(values, ddof=1))
    ratio = var / (g / M) if g else float("nan")
    return PairStatReport(N, float(M), H / M, float(np.mean(values)), var, g, ratio)


def write_pairstat_csv(reports: Iterable[PairStatReport], out: IO[str], header: bool = True) -> None:
    w = csv.writer(out, lineterminator="\n")
    if header:
        w.writerow(PAIRSTAT_COLUMNS)
    for r in reports:
        w.writerow(astuple(r))


def schedule(k: int, eta: float, kind: str = "concentration") -> int:
    """N_k = floor(k^(2/eta)) (``concentration``) or floor(k^(eta/2)) (``growth``)."""
    if not 0 < eta <= 2:
        raise DomainError(f"eta must lie in (0, 2], got {eta}")
    e = 2 / eta if kind == "concentration" else eta / 2
    return math.floor(k**e * (1 + 1e-12))  # absorb pow() rounding below exact integers


@dataclass(frozen=True)
class ScheduleRow:
    k: int
    N: int
    H: int
    M: float


def concentration_schedule(fd: FlooredDiffSet, eta: float, ks: Iterable[int]) -> list[ScheduleRow]:
    """(k, N_k, H_{N_k}, M_k = H_{N_k}/N_k^eta) with N_k = floor(k^(2/eta))."""
    rows = []
    for k in ks:
        n = schedule(k, eta)
        if n < 2 or n > fd.N:
            continue
        H = fd.H(n)
        rows.append(ScheduleRow(k, n, H, H / n**eta))
    return rows


def growth_ratios(fd: FlooredDiffSet, eta: float, ks: Iterable[int], kind: str = "growth") -> list[tuple[int, float]]:
    """H_{N_{k+1}} / H_{N_k} along the schedule, skipping steps with H_{N_k} = 0."""
    out = []
    for k in ks:
        a, b = schedule(k, eta, kind), schedule(k + 1, eta, kind)
        if b > fd.N:
            break
        Ha = fd.H(a) if a >= 1 else 0
        if Ha == 0:
            continue
        out.append((k, fd.H(b) / Ha))
    return out
