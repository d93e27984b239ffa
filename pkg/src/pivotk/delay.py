"""Delay probabilities for static-sender withholding policies.

The delay event is a bundle deficit: inclusion slips past the honest horizon
exactly when withheld bundles exceed the slack.  Full withholding is the
worst case over all dynamic policies, so its exact law anchors everything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .geometry import ContactSchedule, SystemInstance, cartel_lane_count
from .intra_slot import q_micro
from .probability import (
    HypergeomLaw,
    Prob,
    chernoff_tail_bound,
    convolve_iid,
    log_comb,
)
from .ratchet import q_rat_first_slot

__all__ = [
    "DelayRegime",
    "DelayReport",
    "exact_q0",
    "knife_edge_q0",
    "fluid_delay_report",
    "no_delay_upper",
    "SweepRow",
    "sawtooth_sweep",
    "SWEEP_CSV_HEADER",
]


def _contact_law(instance: SystemInstance, beta) -> HypergeomLaw:
    marked = cartel_lane_count(instance.n, beta)
    return HypergeomLaw(instance.n, marked, instance.m)


def exact_q0(instance: SystemInstance, beta) -> Prob:
    """P[delay] under full withholding: the cumulative contact law past the slack.

    Computed from the exact convolution of t* single-slot draws, then a strict
    tail at the slack: P[S > delta].
    """
    law = _contact_law(instance, beta)
    if law.successes == 0:
        return Prob(0.0)
    dist = convolve_iid(law, instance.t_star)
    value = dist.tail_gt(instance.delta)
    return Prob(value)


def knife_edge_q0(instance: SystemInstance, beta) -> Prob:
    """Closed form at zero slack: one cartel contact anywhere forces delay.

    1 - P[A = 0]^t*, with P[A = 0] the no-contact probability of a single
    slot.  Only valid on knife-edge instances; must agree with exact_q0.
    """
    if instance.delta != 0:
        raise ValueError("closed form applies only when the slack is zero")
    marked = cartel_lane_count(instance.n, beta)
    if marked == 0:
        return Prob(0.0)
    log_p0 = log_comb(instance.n - marked, instance.m) - log_comb(
        instance.n, instance.m
    )
    if log_p0 == float("-inf"):
        return Prob(1.0, 0.0)
    return Prob(-math.expm1(instance.t_star * log_p0))


class DelayRegime(Enum):
    """Where the required interception density sits relative to the cartel share."""

    DELAY_RARE = "delay_rare"  # theta_w > beta: delay needs an upper-tail excursion
    DELAY_LIKELY = "delay_likely"  # theta_w < beta: staying on time is the excursion
    IMPOSSIBLE = "impossible"  # theta_w >= 1: not enough bundle mass to intercept
    DEGENERATE = "degenerate"  # theta_w == beta: no one-sided exponent applies


@dataclass(frozen=True)
class DelayReport:
    """Exact delay probability with its large-deviation bound and regime.

    In DELAY_RARE the bound caps the delay probability itself; in
    DELAY_LIKELY it caps the complement.  Degenerate and impossible regimes
    carry no bound.
    """

    exact_probability: float
    kl_bound: float | None
    regime: DelayRegime
    theta_w: float


def fluid_delay_report(instance: SystemInstance, beta, w: float) -> DelayReport:
    """Delay report for the stationary inclusion-rate model.

    Under inclusion rate ``w`` the withheld mass is (1-w) of the cartel's
    contacts, so delay means S > delta/(1-w).  The threshold comparison is
    done in exact rational arithmetic; the strict event never depends on a
    float rounding at the boundary.
    """
    if not 0.0 <= w < 1.0:
        raise ValueError("w must lie in [0, 1); w = 1 never delays")
    marked = cartel_lane_count(instance.n, beta)
    beta_frac = marked / instance.n
    tm = instance.t_star * instance.m

    one_minus_w = Fraction(1) - Fraction.from_float(float(w))
    threshold = Fraction(instance.delta) / one_minus_w  # delay iff S > threshold
    theta_w = float(threshold / tm)

    if threshold >= tm:
        return DelayReport(0.0, None, DelayRegime.IMPOSSIBLE, theta_w)

    if marked == 0:
        exact = 0.0
    else:
        dist = convolve_iid(HypergeomLaw(instance.n, marked, instance.m), instance.t_star)
        exact = dist.tail_ge(math.floor(threshold) + 1)

    if not 0.0 < beta_frac < 1.0:
        return DelayReport(exact, None, DelayRegime.DEGENERATE, theta_w)

    if theta_w > beta_frac:
        bound = chernoff_tail_bound(instance.t_star, instance.m, theta_w, beta_frac, "upper")
        regime = DelayRegime.DELAY_RARE
    elif theta_w < beta_frac:
        bound = chernoff_tail_bound(instance.t_star, instance.m, theta_w, beta_frac, "lower")
        regime = DelayRegime.DELAY_LIKELY
    else:
        return DelayReport(exact, None, DelayRegime.DEGENERATE, theta_w)
    return DelayReport(exact, bound, regime, theta_w)


def no_delay_upper(instance: SystemInstance, beta) -> float:
    """Upper bound on the on-time probability under full withholding.

    exp(-t* m D(delta/(t* m) || beta)): staying within the slack requires the
    cartel's contact rate to undershoot its share, which is exponentially
    unlikely as the horizon grows.  Vacuous (returns 1) when the slack
    fraction is not below the cartel share.
    """
    marked = cartel_lane_count(instance.n, beta)
    beta_frac = marked / instance.n
    frac = instance.delta / (instance.t_star * instance.m)
    if not 0.0 < beta_frac < 1.0 or frac >= beta_frac:
        return 1.0
    return chernoff_tail_bound(instance.t_star, instance.m, frac, beta_frac, "lower")


SWEEP_CSV_HEADER = "kappa,t_star,delta,q0,q_rat,q_micro,knife_edge"


@dataclass(frozen=True)
class SweepRow:
    kappa: int
    t_star: int
    delta: int
    q0: float
    q_rat: float
    q_micro: float
    knife_edge: bool

    def to_csv(self) -> str:
        flag = "true" if self.knife_edge else "false"
        return (
            f"{self.kappa},{self.t_star},{self.delta},"
            f"{self.q0!r},{self.q_rat!r},{self.q_micro!r},{flag}"
        )


def sawtooth_sweep(
    n: int, m: int, beta, kappa_range: Iterable[int]
) -> list[SweepRow]:
    """Per-threshold delay panorama: exact q0, first-slot ratchet tail, race tail.

    One row per decode threshold, ordered by kappa.  Knife edges (m | kappa)
    are flagged; there the ratchet tail coincides with the single-contact
    event and the race tail collapses to the all-cartel draw.
    """
    kappas = sorted(set(int(k) for k in kappa_range))
    if not kappas:
        raise ValueError("kappa range is empty")
    rows = []
    for kappa in kappas:
        inst = SystemInstance.from_kappa(n, m, kappa)
        schedule = ContactSchedule.static(inst)
        rows.append(
            SweepRow(
                kappa=kappa,
                t_star=inst.t_star,
                delta=inst.delta,
                q0=float(exact_q0(inst, beta)),
                q_rat=float(q_rat_first_slot(schedule, n, beta)),
                q_micro=float(q_micro(inst, beta)),
                knife_edge=inst.knife_edge,
            )
        )
    return rows
