"""Adaptive-sender analysis: lane flagging, pool shrinkage, and delay bounds.

A sender that permanently stops contacting lanes whose tickets go unredeemed
turns every withheld bundle into a burned cartel lane.  With a multi-slot
horizon this collapses the relevant delay event to a first-slot deficit and
shrinks the cartel's effective fraction slot over slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import ContactSchedule, SystemInstance, cartel_lane_count
from .probability import (
    DiscreteDistribution,
    HypergeomLaw,
    Prob,
    binomial_pmf_vector,
    convolve_iid,
    hypergeom_tail_ge,
)

__all__ = [
    "RatchetState",
    "q_rat_first_slot",
    "beta_shrink",
    "MCEstimate",
    "ratchet_multi_slot_delay",
    "honest_miss_delay_bound",
]


@dataclass(frozen=True)
class RatchetState:
    """Eligible-pool bookkeeping after some lanes have been flagged."""

    eligible_count: int
    flagged_count: int
    cartel_remaining: int

    @property
    def effective_beta(self) -> float:
        if self.eligible_count <= 0:
            return 0.0
        return self.cartel_remaining / self.eligible_count


def q_rat_first_slot(schedule: ContactSchedule, n: int, beta) -> Prob:
    """Delay probability when withholding is confined to slot one.

    Flagged lanes never see another ticket, so the attack must beat the
    schedule's recovery slack with the first slot's contacts alone:
    P[A_1 > delta_rec] under the single-slot contact law.
    """
    marked = cartel_lane_count(n, beta)
    law = HypergeomLaw(n, marked, schedule.first_slot_contacts)
    return hypergeom_tail_ge(law, schedule.delta_rec + 1)


def beta_shrink(n: int, beta, flagged: int) -> float:
    """Effective cartel fraction after ``flagged`` cartel lanes are excluded."""
    marked = cartel_lane_count(n, beta)
    if flagged < 0:
        raise ValueError("flagged count must be nonnegative")
    if flagged > marked:
        raise ValueError(
            f"cannot flag {flagged} cartel lanes; only {marked} exist"
        )
    return (marked - flagged) / (n - flagged)


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo frequency with binomial error bars."""

    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    trials: int
    static_exact: float

    @classmethod
    def from_counts(cls, hits: int, trials: int, static_exact: float) -> "MCEstimate":
        p = hits / trials
        se = math.sqrt(p * (1.0 - p) / trials)
        return cls(
            estimate=p,
            stderr=se,
            ci_low=max(0.0, p - 1.96 * se),
            ci_high=min(1.0, p + 1.96 * se),
            trials=trials,
            static_exact=static_exact,
        )


def ratchet_multi_slot_delay(
    instance: SystemInstance,
    beta,
    spread_policy: Sequence[int],
    trials: int,
    seed: int,
) -> MCEstimate:
    """Monte-Carlo delay frequency for a withholding spread under the ratchet.

    ``spread_policy[t-1]`` caps how many bundles the cartel withholds in slot
    ``t``; it withholds ``min(cap, contacts)`` and each withheld bundle flags
    its lane out of the pool.  Requires a multi-slot horizon; with t* = 1
    there is no later slot for the ratchet to protect.  Also carries the
    static-pool exact delay probability for comparison.
    """
    if instance.t_star < 2:
        raise ValueError("ratchet analysis needs t_star >= 2")
    if len(spread_policy) < instance.t_star:
        raise ValueError(f"spread policy must cover {instance.t_star} slots")
    if any(w < 0 for w in spread_policy):
        raise ValueError("spread policy entries must be nonnegative")
    if trials < 1:
        raise ValueError("need at least one trial")

    n, m, delta, t_star = instance.n, instance.m, instance.delta, instance.t_star
    marked = cartel_lane_count(n, beta)
    static_exact = float(
        convolve_iid(HypergeomLaw(n, marked, m), t_star).tail_gt(delta)
    )

    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        pool_n, pool_cartel = n, marked
        withheld = 0
        for t in range(t_star):
            if pool_n < m:
                raise ValueError(
                    f"eligible pool shrank below m={m}; instance too small for the spread"
                )
            a = int(rng.hypergeometric(pool_cartel, pool_n - pool_cartel, m))
            w = min(spread_policy[t], a)
            withheld += w
            pool_n -= w
            pool_cartel -= w
        if withheld > delta:
            hits += 1
    return MCEstimate.from_counts(hits, trials, static_exact)


def honest_miss_delay_bound(
    schedule: ContactSchedule,
    epsilon: float,
    withheld_law: DiscreteDistribution,
) -> float:
    """Delay bound when honest lanes miss redemptions at rate ``epsilon``.

    Honest misses add an independent Bin(M, epsilon) of lost bundles on top of
    the strategic withholding law, where M is the schedule's planned contact
    total by the horizon: P[W + Bin(M, eps) > delta_rec].
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    total = schedule.total_by_horizon
    combined = withheld_law.convolve(binomial_pmf_vector(total, epsilon))
    return combined.tail_gt(schedule.delta_rec)
