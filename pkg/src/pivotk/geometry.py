"""Dissemination geometry: decode thresholds, horizons, slack, and schedules."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "SystemInstance",
    "ContactSchedule",
    "derive_instance",
    "derive_schedule",
    "cartel_lane_count",
]


def cartel_lane_count(n: int, beta) -> int:
    """The integer cartel lane count ``beta * n``.

    ``beta`` may be a float or Fraction; the product must be integral (to
    within 1e-9 for floats) because the contact law needs a whole number of
    marked lanes.  Non-integral products are rejected with the nearest legal
    cartel size in the message.
    """
    if isinstance(beta, Fraction):
        exact = beta * n
        if exact.denominator != 1:
            nearest = int(round(float(exact)))
            raise ValueError(
                f"beta*n = {exact} is not an integer; nearest integral cartel "
                f"size is {nearest} lanes (beta = {Fraction(nearest, n)})"
            )
        count = int(exact)
    else:
        raw = float(beta) * n
        count = int(round(raw))
        if abs(raw - count) > 1e-9:
            raise ValueError(
                f"beta*n = {raw} is not an integer; nearest integral cartel "
                f"size is {count} lanes (beta = {count}/{n})"
            )
    if not 0 <= count <= n:
        raise ValueError(f"cartel size {count} outside [0, {n}]")
    return count


@dataclass(frozen=True)
class SystemInstance:
    """Static dissemination geometry for one transaction.

    ``n`` lanes, ``m`` contacted per slot, ``s`` symbols per bundle, decode
    threshold ``K`` symbols.  Derived quantities:

    * ``kappa``   - bundles needed, ceil(K/s)
    * ``t_star``  - honest inclusion horizon, ceil(kappa/m)
    * ``delta``   - slack at the horizon, t_star*m - kappa, in [0, m-1]
    * ``r``       - bundles still needed entering the final slot, m - delta
    * ``r_idx``   - pivotal symbol indices carried by the final bundle,
      K - (kappa-1)*s, in [1, s]
    """

    n: int
    m: int
    s: int
    K: int

    def __post_init__(self) -> None:
        for name in ("n", "m", "s", "K"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.m > self.n:
            raise ValueError(f"m={self.m} exceeds lane count n={self.n}")

    @property
    def kappa(self) -> int:
        return -(-self.K // self.s)

    @property
    def t_star(self) -> int:
        return -(-self.kappa // self.m)

    @property
    def delta(self) -> int:
        return self.t_star * self.m - self.kappa

    @property
    def r(self) -> int:
        return self.m - self.delta

    @property
    def r_idx(self) -> int:
        return self.K - (self.kappa - 1) * self.s

    @property
    def knife_edge(self) -> bool:
        return self.delta == 0

    @classmethod
    def from_kappa(cls, n: int, m: int, kappa: int) -> "SystemInstance":
        """Single-symbol bundles: K = kappa, s = 1."""
        return derive_instance(n, m, 1, kappa)

    def to_config(self) -> dict:
        """Primitive fields only; derived values are always recomputed."""
        return {"n": self.n, "m": self.m, "s": self.s, "K": self.K}

    @classmethod
    def from_config(cls, obj: Mapping) -> "SystemInstance":
        return derive_instance(int(obj["n"]), int(obj["m"]), int(obj["s"]), int(obj["K"]))


def derive_instance(n: int, m: int, s: int, K: int) -> SystemInstance:
    return SystemInstance(n=n, m=m, s=s, K=K)


@dataclass(frozen=True)
class ContactSchedule:
    """A finite per-slot contact plan reaching the decode threshold.

    ``per_slot_contacts[t-1]`` lanes are contacted in slot ``t``.  The horizon
    is the first slot whose cumulative contact count reaches ``kappa``; the
    recovery slack is whatever the plan over-delivers by then, which is the
    deficit a first-slot withholder must exceed once flagged lanes are routed
    around.
    """

    per_slot_contacts: tuple[int, ...]
    kappa: int

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if not self.per_slot_contacts:
            raise ValueError("schedule is empty")
        if any(c < 0 for c in self.per_slot_contacts):
            raise ValueError("per-slot contact counts must be nonnegative")
        if sum(self.per_slot_contacts) < self.kappa:
            raise ValueError(
                f"schedule delivers {sum(self.per_slot_contacts)} contacts, "
                f"never reaching kappa={self.kappa}"
            )

    @property
    def cumulative(self) -> tuple[int, ...]:
        out = []
        acc = 0
        for c in self.per_slot_contacts:
            acc += c
            out.append(acc)
        return tuple(out)

    @property
    def t_star(self) -> int:
        for t, acc in enumerate(self.cumulative, start=1):
            if acc >= self.kappa:
                return t
        raise AssertionError("unreachable: construction guarantees the threshold")

    @property
    def total_by_horizon(self) -> int:
        return self.cumulative[self.t_star - 1]

    @property
    def slack(self) -> int:
        return self.total_by_horizon - self.kappa

    # Recovery slack for the adaptive-sender analysis; equals the schedule
    # slack because both count planned over-delivery at the horizon.
    @property
    def delta_rec(self) -> int:
        return self.slack

    @property
    def first_slot_contacts(self) -> int:
        return self.per_slot_contacts[0]

    @classmethod
    def static(cls, instance: SystemInstance) -> "ContactSchedule":
        """The fixed-m sender truncated at its horizon."""
        return cls((instance.m,) * instance.t_star, instance.kappa)


def derive_schedule(per_slot_contacts: Sequence[int], kappa: int) -> ContactSchedule:
    return ContactSchedule(tuple(int(c) for c in per_slot_contacts), kappa)
