"""Exact and bounded probability computations for the lane-contact process.

Everything here is exact (log-space factorials, compensated summation) or an
explicit bound (binomial KL exponents).  Sampling lives in :mod:`pivotk.simulator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "Prob",
    "HypergeomLaw",
    "DiscreteDistribution",
    "hypergeom_pmf",
    "log_hypergeom_pmf",
    "hypergeom_tail_ge",
    "convolve_iid",
    "kl_divergence",
    "chernoff_tail_bound",
    "binomial_pmf_vector",
    "binomial_tail_ge",
]

NEG_INF = float("-inf")

# Log-factorial cache: append-only, entries never mutated after being written.
# Values near n=10^4 are ~8e4, where a single double quantizes at ~1.5e-11;
# that alone breaks 1e-12 PMF normalization.  The table therefore keeps each
# ln(n!) as a compensated (hi, lo) pair and log_comb subtracts with
# error-free transforms, rounding to a double only at the end.
_LOG_FACT_HI: list[float] = [0.0, 0.0]
_LOG_FACT_LO: list[float] = [0.0, 0.0]


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _grow_log_fact(n: int) -> None:
    while len(_LOG_FACT_HI) <= n:
        k = len(_LOG_FACT_HI)
        s, e = _two_sum(_LOG_FACT_HI[k - 1], math.log(k))
        lo = _LOG_FACT_LO[k - 1] + e
        hi, lo = _two_sum(s, lo)
        _LOG_FACT_HI.append(hi)
        _LOG_FACT_LO.append(lo)


def log_factorial(n: int) -> float:
    """ln(n!) from the compensated table."""
    if n < 0:
        raise ValueError(f"factorial of negative {n}")
    _grow_log_fact(n)
    return _LOG_FACT_HI[n] + _LOG_FACT_LO[n]


def log_comb(n: int, k: int) -> float:
    """ln C(n, k) with compensated cancellation; -inf outside 0 <= k <= n."""
    if k < 0 or k > n:
        return NEG_INF
    _grow_log_fact(n)
    hi, lo = _LOG_FACT_HI[n], _LOG_FACT_LO[n]
    for idx in (k, n - k):
        s, e = _two_sum(hi, -_LOG_FACT_HI[idx])
        lo = lo + e - _LOG_FACT_LO[idx]
        hi, lo = _two_sum(s, lo)
    return hi + lo


class Prob(float):
    """A probability that carries its natural log alongside the linear value.

    Tail masses in this model span twenty-plus orders of magnitude; the linear
    float underflows to 0.0 below ~1e-308 while ``log`` stays finite, so both
    representations are kept.  Instances behave as plain floats in arithmetic.
    """

    log: float

    def __new__(cls, value: float, log: float | None = None) -> "Prob":
        self = super().__new__(cls, value)
        if log is None:
            log = math.log(value) if value > 0.0 else NEG_INF
        self.log = log
        return self

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Prob({float(self)!r}, log={self.log!r})"


def _logsumexp(terms: Sequence[float]) -> float:
    finite = [t for t in terms if t != NEG_INF]
    if not finite:
        return NEG_INF
    peak = max(finite)
    out = peak + math.log(math.fsum(math.exp(t - peak) for t in finite))
    # Summing a distribution's own terms cannot exceed total mass 1.
    return min(out, 0.0)


@dataclass(frozen=True)
class HypergeomLaw:
    """Number of marked lanes hit when drawing ``draws`` of ``population`` lanes.

    ``successes`` of the ``population`` lanes are marked (the cartel's lanes);
    one slot's contact count follows this law.
    """

    population: int
    successes: int
    draws: int

    def __post_init__(self) -> None:
        if self.population <= 0:
            raise ValueError("population must be positive")
        if not 0 <= self.successes <= self.population:
            raise ValueError(
                f"successes={self.successes} outside [0, population={self.population}]"
            )
        if not 0 <= self.draws <= self.population:
            raise ValueError(
                f"draws={self.draws} outside [0, population={self.population}]"
            )

    @property
    def support_min(self) -> int:
        return max(0, self.draws + self.successes - self.population)

    @property
    def support_max(self) -> int:
        return min(self.draws, self.successes)

    @property
    def mean(self) -> float:
        return self.draws * self.successes / self.population


def log_hypergeom_pmf(law: HypergeomLaw, k: int) -> float:
    """ln P[A = k]; -inf out of support."""
    if k < law.support_min or k > law.support_max:
        return NEG_INF
    return (
        log_comb(law.successes, k)
        + log_comb(law.population - law.successes, law.draws - k)
        - log_comb(law.population, law.draws)
    )


def hypergeom_pmf(law: HypergeomLaw, k: int) -> float:
    """P[A = k], exact up to one final exponentiation of log-factorial sums."""
    lp = log_hypergeom_pmf(law, k)
    return math.exp(lp) if lp != NEG_INF else 0.0


def hypergeom_tail_ge(law: HypergeomLaw, r: int) -> Prob:
    """P[A >= r], summed exactly over the support in log space."""
    if r <= law.support_min:
        return Prob(1.0, 0.0)
    if r > law.support_max:
        return Prob(0.0, NEG_INF)
    ls = _logsumexp([log_hypergeom_pmf(law, k) for k in range(r, law.support_max + 1)])
    return Prob(math.exp(ls), ls)


@dataclass(frozen=True)
class DiscreteDistribution:
    """An integer-supported distribution as ``offset`` plus a mass vector.

    ``masses[i]`` is the probability of the value ``offset + i``.  With
    ``strict=True`` (the default) total mass must be 1 within 1e-12; truncated
    laws (for example a capped inclusion-time law) pass ``strict=False`` and
    account for the missing mass themselves.
    """

    offset: int
    masses: tuple[float, ...]
    strict: bool = True

    def __post_init__(self) -> None:
        if any(m < -1e-15 for m in self.masses):
            raise ValueError("negative probability mass")
        total = math.fsum(self.masses)
        if self.strict and abs(total - 1.0) > 1e-12:
            raise ValueError(f"total mass {total} deviates from 1 by more than 1e-12")
        if total > 1.0 + 1e-12:
            raise ValueError(f"total mass {total} exceeds 1")

    @classmethod
    def from_law(cls, law: HypergeomLaw) -> "DiscreteDistribution":
        lo, hi = law.support_min, law.support_max
        return cls(lo, tuple(hypergeom_pmf(law, k) for k in range(lo, hi + 1)))

    @property
    def support_max(self) -> int:
        return self.offset + len(self.masses) - 1

    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def pmf(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < len(self.masses):
            return self.masses[i]
        return 0.0

    def mean(self) -> float:
        return math.fsum(m * (self.offset + i) for i, m in enumerate(self.masses))

    def tail_ge(self, r: int) -> float:
        """P[X >= r] by compensated summation."""
        i = max(r - self.offset, 0)
        return math.fsum(self.masses[i:])

    def tail_gt(self, r: int) -> float:
        """P[X > r]."""
        return self.tail_ge(r + 1)

    def expected_power(self, gamma: float) -> float:
        """E[gamma^X] over the represented mass."""
        return math.fsum(
            m * gamma ** (self.offset + i) for i, m in enumerate(self.masses)
        )

    def convolve(self, other: "DiscreteDistribution") -> "DiscreteDistribution":
        out = np.convolve(np.asarray(self.masses), np.asarray(other.masses))
        return DiscreteDistribution(
            self.offset + other.offset,
            tuple(float(x) for x in out),
            strict=self.strict and other.strict,
        )


def convolve_iid(law: HypergeomLaw, t: int) -> DiscreteDistribution:
    """Exact law of the sum of ``t`` independent draws from ``law``.

    This is the cumulative cartel contact count after ``t`` slots.
    """
    if t < 1:
        raise ValueError("need at least one draw")
    base = DiscreteDistribution.from_law(law)
    result = base
    for _ in range(t - 1):
        result = result.convolve(base)
    return result


def kl_divergence(theta: float, beta: float) -> float:
    """Bernoulli relative entropy D(theta || beta) in nats.

    Conventions: 0 ln 0 = 0, so D(0||b) = ln(1/(1-b)) and D(1||b) = ln(1/b).
    ``beta`` must be interior; the divergence is infinite at the endpoints.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"reference probability beta={beta} must lie in (0, 1)")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta={theta} outside [0, 1]")
    acc = 0.0
    if theta > 0.0:
        acc += theta * math.log(theta / beta)
    if theta < 1.0:
        acc += (1.0 - theta) * math.log((1.0 - theta) / (1.0 - beta))
    return acc


def chernoff_tail_bound(
    t: int, m: int, theta: float, beta: float, side: Literal["upper", "lower"]
) -> float:
    """exp(-t m D(theta||beta)), the binomial KL exponent for a t-slot sum.

    ``side="upper"`` bounds P[S/(tm) >= theta] and requires theta > beta;
    ``side="lower"`` bounds P[S/(tm) <= theta] and requires theta < beta.
    theta == beta is allowed on either side and gives the vacuous bound 1.
    """
    if t < 1 or m < 1:
        raise ValueError("t and m must be positive")
    if side == "upper":
        if theta < beta:
            raise ValueError("upper-tail bound needs theta >= beta")
    elif side == "lower":
        if theta > beta:
            raise ValueError("lower-tail bound needs theta <= beta")
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return math.exp(-t * m * kl_divergence(theta, beta))


def log_binomial_pmf(n: int, p: float, k: int) -> float:
    if k < 0 or k > n:
        return NEG_INF
    if p == 0.0:
        return 0.0 if k == 0 else NEG_INF
    if p == 1.0:
        return 0.0 if k == n else NEG_INF
    return log_comb(n, k) + k * math.log(p) + (n - k) * math.log1p(-p)


def binomial_pmf_vector(n: int, p: float) -> DiscreteDistribution:
    """The full Bin(n, p) law as a DiscreteDistribution on [0, n]."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    masses = tuple(
        math.exp(lp) if (lp := log_binomial_pmf(n, p, k)) != NEG_INF else 0.0
        for k in range(n + 1)
    )
    return DiscreteDistribution(0, masses)


def binomial_tail_ge(n: int, p: float, r: int) -> Prob:
    """P[Bin(n, p) >= r], exact summation in log space."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if r <= 0:
        return Prob(1.0, 0.0)
    if r > n:
        return Prob(0.0, NEG_INF)
    ls = _logsumexp([log_binomial_pmf(n, p, k) for k in range(r, n + 1)])
    return Prob(math.exp(ls), ls)
