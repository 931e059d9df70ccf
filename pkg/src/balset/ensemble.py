"""Randomized-ensemble experiments over uniformly sampled generator rows.

Covers Monte-Carlo estimation of the probability that a random row list
spans a (lam-almost-)balancing set, the exact shift-averaging identity
mean_x Q(C + Fx) = Q(C)^2 verified in rational arithmetic, and the
weight-concentration experiment for small sampled subspaces.

Every trial draws its randomness from a counter-based philox4x64 stream
keyed by (master_seed, trial_index), so runs are reproducible and trials
can execute in any order or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gf2 import LinearCode, Word
from .balancing import BalanceSpec, q_exact, uncovered_mask

__all__ = [
    "ConcentrationReport",
    "EnsembleConfig",
    "EnsembleReport",
    "estimate_balancing_probability",
    "lemma1_identity_check",
    "sample_random_subspace",
    "trial_rng",
    "weight_concentration_check",
    "wilson_interval",
]

LEMMA1_N_CAP = 16

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    rows: int
    lam: int = 0
    trials: int = 1
    master_seed: int = 0
    fixed_prefix: LinearCode | None = None

    def __post_init__(self) -> None:
        BalanceSpec(self.n, self.lam)
        if self.rows < 0:
            raise ValueError(f"rows must be >= 0, got {self.rows}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.fixed_prefix is not None and self.fixed_prefix.n != self.n:
            raise ValueError("fixed_prefix length mismatch")


@dataclass(frozen=True)
class EnsembleReport:
    config: EnsembleConfig
    successes: int
    fraction: Fraction
    wilson_ci_95: tuple[float, float]
    outcomes: tuple[bool, ...] = field(repr=False)

    def to_json_dict(self) -> dict:
        cfg = self.config
        return {
            "n": cfg.n,
            "rows": cfg.rows,
            "lambda": cfg.lam,
            "trials": cfg.trials,
            "master_seed": cfg.master_seed,
            "successes": self.successes,
            "fraction": float(self.fraction),
            "ci_lo": self.wilson_ci_95[0],
            "ci_hi": self.wilson_ci_95[1],
        }


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; always contains successes/trials."""
    if not 0 <= successes <= trials or trials < 1:
        raise ValueError(f"bad counts: {successes}/{trials}")
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # at the boundaries center - half is 0 (resp. center + half is 1)
    # analytically; pin them so the interval always contains p
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """The philox4x64 stream for one trial; streams never overlap across
    distinct (master_seed, trial) keys."""
    return np.random.Generator(np.random.Philox(key=[master_seed, trial]))


def _uniform_word(n: int, rng: np.random.Generator) -> int:
    return int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)


def sample_random_subspace(
    n: int,
    rows: int,
    rng: np.random.Generator,
    fixed_prefix: LinearCode | None = None,
) -> LinearCode:
    """`rows` words iid uniform over F_2^n, kept as drawn (dependent rows
    permitted, so rank may be below the row count); an optional prefix
    code's basis is prepended before sampling."""
    if rows < 0:
        raise ValueError(f"rows must be >= 0, got {rows}")
    prefix = fixed_prefix.basis if fixed_prefix is not None else ()
    sampled = tuple(Word(n, _uniform_word(n, rng)) for _ in range(rows))
    return LinearCode(n, prefix + sampled)


def _run_trial(config: EnsembleConfig, spec: BalanceSpec, trial: int) -> bool:
    rng = trial_rng(config.master_seed, trial)
    code = sample_random_subspace(config.n, config.rows, rng, config.fixed_prefix)
    return q_exact(code, spec).uncovered_count == 0


def estimate_balancing_probability(
    config: EnsembleConfig, threads: int = 1
) -> EnsembleReport:
    """Fraction of sampled row lists whose span covers everything, with a
    Wilson 95% interval.  Deterministic for a fixed config regardless of
    thread count (per-trial streams, order-independent aggregation)."""
    spec = BalanceSpec(config.n, config.lam)
    trials = range(config.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = tuple(pool.map(lambda t: _run_trial(config, spec, t), trials))
    else:
        outcomes = tuple(_run_trial(config, spec, t) for t in trials)
    successes = sum(outcomes)
    return EnsembleReport(
        config,
        successes,
        Fraction(successes, config.trials),
        wilson_interval(successes, config.trials),
        outcomes,
    )


def lemma1_identity_check(
    code: LinearCode, spec: BalanceSpec
) -> tuple[Fraction, Fraction, bool]:
    """Exact check of mean_x Q(C + Fx) = Q(C)^2 over all 2^n shifts x.

    Q(C + Fx) only depends on the coset x + C (adjoining x or x + c spans
    the same subspace), so one representative per coset is evaluated and
    weighted by |C|.  Each evaluation uses uncovered(C + Fx) =
    |U . (U + x)| with U the uncovered set of C, summed honestly rather
    than through the identity under test.
    """
    n = spec.n
    if code.n != n:
        raise ValueError(f"code length {code.n} != spec length {spec.n}")
    if n > LEMMA1_N_CAP:
        raise ValueError(f"shift sum capped at n <= {LEMMA1_N_CAP}")
    mask = uncovered_mask(code, spec)
    unc = int(np.count_nonzero(mask))
    rhs = Fraction(unc, 1 << n) ** 2
    if unc == 0:
        return Fraction(0), rhs, rhs == 0

    u_idx = np.flatnonzero(mask).astype(np.uint64)
    pivots = set(code.pivots)
    free = [c for c in range(n) if c not in pivots]
    total = 0
    for sub in range(1 << len(free)):
        r = sum(1 << c for j, c in enumerate(free) if sub >> j & 1)
        total += int(np.count_nonzero(mask[u_idx ^ np.uint64(r)]))
    lhs = Fraction(total << code.k, 1 << (2 * n))
    return lhs, rhs, lhs == rhs


@dataclass(frozen=True)
class ConcentrationReport:
    """Per-trial weight-concentration outcomes for small random subspaces.

    A trial samples ell = ceil(log2(n)/2) generator rows (minus any fixed
    prefix rank) and records whether every nonzero codeword x satisfies
    |w(x) - n/2| <= delta*n (event E), plus the exact uncovered count.
    """

    n: int
    ell: int
    delta: Fraction
    trials: int
    master_seed: int
    e_holds: tuple[bool, ...] = field(repr=False)
    uncovered: tuple[int, ...] = field(repr=False)

    @property
    def freq_e(self) -> Fraction:
        return Fraction(sum(self.e_holds), self.trials)

    @property
    def freq_q_above_3_4(self) -> Fraction:
        hits = sum(4 * u > 3 * (1 << self.n) for u in self.uncovered)
        return Fraction(hits, self.trials)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "delta_num": self.delta.numerator,
            "delta_den": self.delta.denominator,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "freq_E": float(self.freq_e),
            "freq_q_above_3_4": float(self.freq_q_above_3_4),
        }


def weight_concentration_check(
    n: int,
    delta: Fraction,
    trials: int,
    seed: int,
    fixed_prefix: LinearCode | None = None,
) -> ConcentrationReport:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    spec = BalanceSpec(n, 0)
    delta = Fraction(delta)
    # ell = ceil(log2(n) / 2), exactly: smallest ell with 4^ell >= n
    ell = 0
    while 1 << (2 * ell) < n:
        ell += 1
    prefix_k = fixed_prefix.k if fixed_prefix is not None else 0
    draw = max(0, ell - prefix_k)
    e_holds: list[bool] = []
    uncovered: list[int] = []
    for t in range(trials):
        rng = trial_rng(seed, t)
        code = sample_random_subspace(n, draw, rng, fixed_prefix)
        ok = all(
            abs(2 * w.weight() - n) * delta.denominator <= 2 * delta.numerator * n
            for w in _nonzero_span(code)
        )
        e_holds.append(ok)
        uncovered.append(q_exact(code, spec).uncovered_count)
    return ConcentrationReport(
        n, ell, delta, trials, seed, tuple(e_holds), tuple(uncovered)
    )


def _nonzero_span(code: LinearCode):
    from .gf2 import enumerate_span

    it = enumerate_span(code)
    next(it)  # the zero word
    return it
