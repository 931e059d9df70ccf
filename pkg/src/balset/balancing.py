"""Exact balancedness machinery.

A word y is balanced when its Hamming weight is exactly n/2, and a set C
balances F_2^n when every y is at distance n/2 from some element of C.  The
relaxed version allows |d(y, x) - n/2| <= lam.  This module computes the
uncovered fraction

    Q(C) = |{y : no x in C has |d(y, x) - n/2| <= lam}| / 2^n

exactly, by several interchangeable algorithms, along with the binomial
bounds on the balanced-sphere size and the sphere-intersection and
distance-pair counting formulas.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .gf2 import (
    CapExceededError,
    LinearCode,
    bulk_syndromes,
    span_array,
    syndrome_tables,
    weight_words,
    weight_words_chunks,
)

__all__ = [
    "BalanceSpec",
    "BinomialBounds",
    "CoverageProfile",
    "QReport",
    "binomial_exact",
    "bounds_check",
    "coverage_profile",
    "fwht_inplace",
    "is_balancing_set",
    "pair_distance_count",
    "q_exact",
    "sphere_intersection_size",
    "thick_sphere_words",
    "uncovered_mask",
]

Q_METHODS = ("naive", "sphere_mark", "wht", "syndrome")

NAIVE_N_CAP = 24
NAIVE_K_CAP = 20
SPHERE_MARK_WORK_CAP = 1 << 36
WHT_N_CAP = 28           # extendable to 32 via allow_large_wht
WHT_N_HARD_CAP = 32      # int64 intermediate values stay below 2^(n+1)
WHT_DUAL_CAP = 26        # dual span is materialized for the indicator mask
SYNDROME_BUCKET_CAP = 26

# pi truncated to 37 decimal digits; the bracket width 1e-37 < 2^-120 gives
# the binomial bounds comparisons well over 80 bits of precision
_PI_LO = Fraction(31415926535897932384626433832795028841, 10**37)
_PI_HI = _PI_LO + Fraction(1, 10**37)


@dataclass(frozen=True)
class BalanceSpec:
    """Length and tolerance of a balancing check; lam=0 is exact balance."""

    n: int
    lam: int = 0

    def __post_init__(self) -> None:
        if self.n < 2 or self.n % 2:
            raise ValueError(f"length must be even and >= 2, got {self.n}")
        if not 0 <= self.lam < self.n // 2:
            raise ValueError(f"tolerance {self.lam} out of range [0, {self.n // 2})")

    @property
    def band(self) -> tuple[int, int]:
        """Inclusive weight band [n/2 - lam, n/2 + lam] of covering distances."""
        return self.n // 2 - self.lam, self.n // 2 + self.lam


@dataclass(frozen=True)
class QReport:
    """Exact coverage-deficit report for one (code, spec) check."""

    n: int
    k: int
    lam: int
    uncovered_count: int
    method: str
    elapsed_ms: float

    @property
    def q(self) -> Fraction:
        return Fraction(self.uncovered_count, 1 << self.n)

    def to_json_dict(self) -> dict:
        q = self.q
        return {
            "n": self.n,
            "k": self.k,
            "lambda": self.lam,
            "uncovered": self.uncovered_count,
            "q_num": q.numerator,
            "q_den": q.denominator,
            "method": self.method,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass(frozen=True)
class CoverageProfile:
    """Histogram over y of how many codewords sit at covering distance."""

    n: int
    k: int
    lam: int
    histogram: tuple[int, ...]

    @property
    def uncovered_count(self) -> int:
        return self.histogram[0] if self.histogram else 0


def binomial_exact(n: int, k: int) -> int:
    if not 0 <= k <= n:
        raise ValueError(f"binomial arguments out of range: ({n}, {k})")
    return math.comb(n, k)


@dataclass(frozen=True)
class BinomialBounds:
    """Enclosure 2^n/sqrt(2n) <= C(n, n/2) <= 2^n/sqrt(pi*n/2).

    lower and upper are rational enclosure endpoints rounded toward the
    central value, so `lower <= value <= upper` is a rigorous verification
    of the true inequality.  `holds` is decided by exact cross-multiplied
    integer comparisons (the pi side uses a 123-bit rational bracket).
    """

    n: int
    lower: Fraction
    value: int
    upper: Fraction
    holds: bool


def bounds_check(n: int, precision_bits: int = 128) -> BinomialBounds:
    if n < 2 or n % 2:
        raise ValueError(f"length must be even and >= 2, got {n}")
    c = math.comb(n, n // 2)
    # lower: C >= 2^n/sqrt(2n)  <=>  C^2 * 2n >= 2^(2n), exactly
    lower_ok = c * c * 2 * n >= 1 << (2 * n)
    # upper: C <= 2^n/sqrt(pi*n/2)  <=  C^2 * n * PI_HI <= 2^(2n+1)
    upper_ok = c * c * n * _PI_HI.numerator <= _PI_HI.denominator << (2 * n + 1)

    p = precision_bits
    # isqrt enclosures scaled by 2^p, rounded toward c on both sides
    r_lo = math.isqrt(2 * n << (2 * p))
    lower = Fraction(1 << (n + p), r_lo)
    a_hi = -(-_PI_HI.numerator * n << (2 * p)) // (2 * _PI_HI.denominator)
    r_hi = math.isqrt(a_hi) + 1
    upper = Fraction(1 << (n + p), r_hi)
    return BinomialBounds(n, lower, c, upper, lower_ok and upper_ok)


def fwht_inplace(a: np.ndarray) -> None:
    """Unnormalized in-place Walsh-Hadamard transform (XOR kernel)."""
    size = a.size
    if size & (size - 1):
        raise ValueError(f"length {size} is not a power of two")
    scratch = np.empty(size // 2, dtype=a.dtype)
    h = 1
    while h < size:
        view = a.reshape(-1, 2 * h)
        x = view[:, :h]
        y = view[:, h:]
        t = scratch.reshape(x.shape)
        np.subtract(x, y, out=t)
        x += y
        y[:] = t
        h *= 2


@lru_cache(maxsize=4)
def thick_sphere_words(n: int, lam: int) -> np.ndarray:
    """All words with weight in [n/2 - lam, n/2 + lam], cached per (n, lam)."""
    lo, hi = n // 2 - lam, n // 2 + lam
    out = np.concatenate([weight_words(n, w) for w in range(lo, hi + 1)])
    out.flags.writeable = False
    return out


def _validate(code: LinearCode, spec: BalanceSpec) -> None:
    if code.n != spec.n:
        raise ValueError(f"code length {code.n} != spec length {spec.n}")


def _q_naive(code: LinearCode, spec: BalanceSpec) -> int:
    n = spec.n
    if n > NAIVE_N_CAP or code.k > NAIVE_K_CAP:
        raise CapExceededError(
            f"naive method capped at n <= {NAIVE_N_CAP}, k <= {NAIVE_K_CAP}"
        )
    lo, hi = spec.band
    remaining = np.arange(1 << n, dtype=np.uint64)
    for x in span_array(code):
        d = np.bitwise_count(remaining ^ x)
        remaining = remaining[(d < lo) | (d > hi)]
        if remaining.size == 0:
            break
    return int(remaining.size)


def _q_sphere_mark(code: LinearCode, spec: BalanceSpec) -> int:
    n = spec.n
    thick = thick_sphere_words(n, spec.lam)
    if (1 << code.k) * thick.size > SPHERE_MARK_WORK_CAP or n > WHT_N_CAP:
        raise CapExceededError("sphere_mark work size exceeds cap")
    covered = np.zeros(1 << n, dtype=bool)
    for x in span_array(code):
        covered[thick ^ x] = True
    return (1 << n) - int(np.count_nonzero(covered))


def _wht_counts(code: LinearCode, spec: BalanceSpec, allow_large: bool) -> np.ndarray:
    """Per-word count of codewords at covering distance, for every y.

    XOR convolution of the code indicator with the thick-sphere indicator,
    carried out by two length-2^n transforms in exact int64: the transform
    of a subspace indicator is known in closed form (|C| on the dual, 0
    elsewhere), so the dual mask substitutes for the first transform.
    Intermediate magnitudes stay below 2^(n+1).
    """
    n, k = spec.n, code.k
    cap = WHT_N_HARD_CAP if allow_large else WHT_N_CAP
    if n > cap:
        raise CapExceededError(f"wht method capped at n <= {cap}")
    if n - k > WHT_DUAL_CAP:
        raise CapExceededError(
            f"wht dual mask capped at n - k <= {WHT_DUAL_CAP}; use syndrome"
        )
    v = np.zeros(1 << n, dtype=np.int64)
    v[thick_sphere_words(n, spec.lam)] = 1
    fwht_inplace(v)
    dual = span_array(LinearCode(n, code.dual_basis()))
    keep = v[dual]
    v[:] = 0
    v[dual] = keep
    fwht_inplace(v)
    if __debug__:
        assert not (v & ((1 << (n - k)) - 1)).any(), "transform not divisible"
    v >>= n - k
    return v


def _q_wht(code: LinearCode, spec: BalanceSpec, allow_large: bool) -> int:
    counts = _wht_counts(code, spec, allow_large)
    return int(np.count_nonzero(counts == 0))


def _q_syndrome(code: LinearCode, spec: BalanceSpec) -> int:
    """Coset-collapsed count: y is covered iff its coset meets the sphere.

    The number of codewords at covering distance from y only depends on the
    coset y + C, so it suffices to bucket the thick-sphere words by their
    syndrome and count empty buckets.
    """
    n, k = spec.n, code.k
    if n - k > SYNDROME_BUCKET_CAP:
        raise CapExceededError(f"syndrome buckets capped at n - k <= {SYNDROME_BUCKET_CAP}")
    tables, r = syndrome_tables(code)
    covered = np.zeros(1 << r, dtype=bool)
    lo, hi = spec.band
    for w in range(lo, hi + 1):
        for chunk in weight_words_chunks(n, w):
            covered[bulk_syndromes(tables, chunk)] = True
    return ((1 << r) - int(np.count_nonzero(covered))) << k


def _pick_method(code: LinearCode, spec: BalanceSpec) -> str:
    n, k = spec.n, code.k
    if n <= 16 and k <= 8:
        return "naive"
    if n <= WHT_N_CAP - 2 and n - k <= WHT_DUAL_CAP:
        return "wht"
    if n - k <= SYNDROME_BUCKET_CAP:
        return "syndrome"
    raise CapExceededError(f"no exact method available for n={n}, k={k}")


def q_exact(
    code: LinearCode,
    spec: BalanceSpec,
    method: str = "auto",
    *,
    allow_large_wht: bool = False,
) -> QReport:
    """Exact uncovered count for the covering band n/2 +- lam.

    Methods (all return identical counts):
      naive:       per-word scan over codewords with early exit.
      sphere_mark: mark every covered word in a 2^n bitmap, codeword by
                   codeword.
      wht:         XOR-convolve code and thick-sphere indicators via the
                   length-2^n Walsh-Hadamard transform, then count zeros.
      syndrome:    bucket thick-sphere words by syndrome; counts collapse
                   onto cosets (cheapest at large n, small k).
    """
    _validate(code, spec)
    chosen = _pick_method(code, spec) if method == "auto" else method
    t0 = time.perf_counter()
    if chosen == "naive":
        unc = _q_naive(code, spec)
    elif chosen == "sphere_mark":
        unc = _q_sphere_mark(code, spec)
    elif chosen == "wht":
        unc = _q_wht(code, spec, allow_large_wht)
    elif chosen == "syndrome":
        unc = _q_syndrome(code, spec)
    else:
        raise ValueError(f"unknown method {chosen!r}; expected one of {Q_METHODS}")
    elapsed = (time.perf_counter() - t0) * 1000.0
    return QReport(spec.n, code.k, spec.lam, unc, chosen, elapsed)


def is_balancing_set(code: LinearCode, spec: BalanceSpec, method: str = "auto") -> bool:
    return q_exact(code, spec, method).uncovered_count == 0


def uncovered_mask(code: LinearCode, spec: BalanceSpec) -> np.ndarray:
    """Boolean mask over all 2^n words, True where no codeword covers."""
    _validate(code, spec)
    try:
        return _wht_counts(code, spec, allow_large=False) == 0
    except CapExceededError:
        covered = np.zeros(1 << spec.n, dtype=bool)
        thick = thick_sphere_words(spec.n, spec.lam)
        for x in span_array(code):
            covered[thick ^ x] = True
        return ~covered


def coverage_profile(code: LinearCode, spec: BalanceSpec) -> CoverageProfile:
    _validate(code, spec)
    counts = _wht_counts(code, spec, allow_large=False)
    hist = np.bincount(counts)
    return CoverageProfile(spec.n, code.k, spec.lam, tuple(int(h) for h in hist))


def sphere_intersection_size(n: int, dist: int) -> int:
    """|B(x) . B(x')| for centers at distance dist: count of y balanced
    relative to both.  Zero whenever dist is odd."""
    if n < 2 or n % 2:
        raise ValueError(f"length must be even and >= 2, got {n}")
    if not 0 <= dist <= n:
        raise ValueError(f"distance {dist} out of range for length {n}")
    if dist % 2:
        return 0
    return math.comb(dist, dist // 2) * math.comb(n - dist, (n - dist) // 2)


def pair_distance_count(n: int, dist: int, i: int, j: int) -> int:
    """Number of words y with d(x, y) = i and d(x', y) = j for any fixed
    pair of centers at distance dist; zero out of range or parity."""
    if n < 1:
        raise ValueError(f"length must be positive, got {n}")
    for name, v in (("dist", dist), ("i", i), ("j", j)):
        if not 0 <= v <= n:
            raise ValueError(f"{name} = {v} out of range for length {n}")
    a2 = j - i + dist
    b2 = i + j - dist
    if a2 % 2 or b2 % 2:
        return 0
    a, b = a2 // 2, b2 // 2
    if not (0 <= a <= dist and 0 <= b <= n - dist):
        return 0
    return math.comb(dist, a) * math.comb(n - dist, b)
