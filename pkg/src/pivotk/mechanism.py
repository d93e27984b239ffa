"""Pivotal-bundle bounty rule: resolution order, allocations, and rank weights.

The bounty budget is split over the first kappa admissibly included bundles
in the deterministic resolution order; later bundles are redundant for
decoding and earn nothing.  Payments are exact rationals so that the budget
conservation invariant holds to the last bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Sequence

__all__ = [
    "Owner",
    "BundleRecord",
    "DecodeNotReached",
    "resolve_order",
    "PaymentEntry",
    "PivotalAllocation",
    "pivotal_allocation",
    "WeightRule",
    "removal_floor",
    "MinimaxReport",
    "minimax_certificate",
    "cartel_prefix_count",
    "ticket_hash_of",
]

Owner = Literal["honest", "cartel"]


def ticket_hash_of(ticket_id) -> int:
    """Deterministic 64-bit mix of an opaque ticket identifier.

    Stands in for a cryptographic hash in the resolution order; all the order
    needs is determinism across processes and collision-freeness in practice.
    """
    payload = repr(ticket_id).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class BundleRecord:
    """One bundle occurrence as seen by the settlement layer."""

    slot: int
    lane: int
    ticket_id: object
    owner: Owner
    admissible: bool = True

    @property
    def ticket_hash(self) -> int:
        return ticket_hash_of(self.ticket_id)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.slot, self.lane, self.ticket_hash)


class DecodeNotReached(Exception):
    """Raised when fewer bundles than the decode threshold were included."""


def resolve_order(records: Iterable[BundleRecord]) -> list[BundleRecord]:
    """Admissible records in deterministic resolution order.

    Non-admissible occurrences are ignored entirely, so stuffing the history
    with copied or unticketed bundles cannot move anyone's rank.  Each ticket
    is redeemable once: only its first admissible occurrence in the order
    survives.  Distinct tickets that collide in the full sort key are
    rejected rather than tie-broken arbitrarily.
    """
    admissible = [rec for rec in records if rec.admissible]
    admissible.sort(key=lambda rec: rec.sort_key)
    seen_tickets: set = set()
    keys: set[tuple[int, int, int]] = set()
    out = []
    for rec in admissible:
        if rec.ticket_id in seen_tickets:
            continue
        key = rec.sort_key
        if key in keys:
            raise ValueError(
                f"distinct tickets collide in the resolution order at {key}"
            )
        keys.add(key)
        seen_tickets.add(rec.ticket_id)
        out.append(rec)
    return out


@dataclass(frozen=True)
class PaymentEntry:
    rank: int
    lane: int
    owner: Owner
    index_count: int
    payment: Fraction


@dataclass(frozen=True)
class PivotalAllocation:
    """Per-bundle payments over the decoding prefix.

    The first kappa-1 bundles each carry s fresh symbol indices; the final
    prefix bundle contributes only the r_idx indices still missing, and is
    paid pro rata.  Payments always sum to exactly the budget.
    """

    entries: tuple[PaymentEntry, ...]
    kappa: int
    r_idx: int
    budget: Fraction

    @property
    def total_paid(self) -> Fraction:
        return sum((e.payment for e in self.entries), Fraction(0))

    def paid_to(self, owner: Owner) -> Fraction:
        return sum((e.payment for e in self.entries if e.owner == owner), Fraction(0))

    def to_json_rows(self) -> str:
        rows = [
            {
                "rank": e.rank,
                "lane": e.lane,
                "owner": e.owner,
                "payment_numerator": e.payment.numerator,
                "payment_denominator": e.payment.denominator,
            }
            for e in self.entries
        ]
        return json.dumps(rows)


def pivotal_allocation(
    ordered: Sequence[BundleRecord], K: int, s: int, B
) -> PivotalAllocation:
    """Split budget ``B`` over the decoding prefix of an ordered inclusion list.

    Each symbol index in the first K pays B/K; a full bundle therefore earns
    s*B/K and the final, possibly partial, bundle earns r_idx*B/K.  Raises
    :class:`DecodeNotReached` when the list is shorter than the bundle
    threshold.
    """
    if K < 1 or s < 1:
        raise ValueError("K and s must be positive")
    kappa = -(-K // s)
    r_idx = K - (kappa - 1) * s
    if len(ordered) < kappa:
        raise DecodeNotReached(
            f"decode needs {kappa} bundles, only {len(ordered)} included"
        )
    budget = Fraction(B)
    per_index = budget / K
    entries = []
    for rank, rec in enumerate(ordered[:kappa], start=1):
        count = s if rank < kappa else r_idx
        entries.append(
            PaymentEntry(
                rank=rank,
                lane=rec.lane,
                owner=rec.owner,
                index_count=count,
                payment=per_index * count,
            )
        )
    return PivotalAllocation(tuple(entries), kappa, r_idx, budget)


@dataclass(frozen=True)
class WeightRule:
    """A budget-capped rank-based payment rule over the pivotal prefix.

    ``weights[j]`` is the budget fraction paid to the bundle of rank j+1;
    weights are nonnegative rationals summing to one.
    """

    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("need at least one rank")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if sum(self.weights) != 1:
            raise ValueError(f"weights sum to {sum(self.weights)}, not 1")

    @property
    def kappa(self) -> int:
        return len(self.weights)

    @property
    def is_uniform(self) -> bool:
        u = Fraction(1, self.kappa)
        return all(w == u for w in self.weights)

    @classmethod
    def uniform(cls, kappa: int) -> "WeightRule":
        return cls(tuple(Fraction(1, kappa) for _ in range(kappa)))

    @classmethod
    def from_weights(cls, raw: Sequence) -> "WeightRule":
        ws = [Fraction(w) for w in raw]
        total = sum(ws, Fraction(0))
        if total <= 0:
            raise ValueError("weights must have positive total")
        return cls(tuple(w / total for w in ws))

    @classmethod
    def slot_decayed(cls, kappa: int, decay) -> "WeightRule":
        """Earlier ranks paid more, scaled by decay^(rank-1) and renormalized.

        Mixes rank and time effects; provided for experimentation only, with
        no deterrence analysis attached.
        """
        d = Fraction(decay)
        if not 0 < d <= 1:
            raise ValueError("decay must lie in (0, 1]")
        return cls.from_weights([d**j for j in range(kappa)])


def removal_floor(rule: WeightRule, d: int) -> Fraction:
    """Minimum budget fraction forfeited by deleting any d pivotal ranks.

    An attacker targets the d cheapest ranks, so the floor is the sum of the
    d smallest weights.
    """
    if not 1 <= d <= rule.kappa:
        raise ValueError(f"d={d} outside [1, {rule.kappa}]")
    return sum(sorted(rule.weights)[:d], Fraction(0))


@dataclass(frozen=True)
class MinimaxReport:
    """Outcome of checking the uniform rule's worst-case-forfeiture optimality."""

    kappa: int
    d: int
    ceiling: Fraction
    rules_checked: int
    violations: tuple[int, ...]  # indices with floor above the ceiling
    false_equalities: tuple[int, ...]  # non-uniform rules attaining the ceiling

    @property
    def passed(self) -> bool:
        return not self.violations and not self.false_equalities


def minimax_certificate(
    kappa: int, d: int, trial_rules: Sequence[WeightRule]
) -> MinimaxReport:
    """Certify d/kappa as the exact removal-floor ceiling over trial rules.

    Every rule must satisfy floor <= d/kappa, with equality only for the
    uniform rule; all comparisons are exact rational arithmetic.
    """
    ceiling = Fraction(d, kappa)
    violations = []
    false_eq = []
    for i, rule in enumerate(trial_rules):
        if rule.kappa != kappa:
            raise ValueError(f"rule {i} has {rule.kappa} ranks, expected {kappa}")
        floor = removal_floor(rule, d)
        if floor > ceiling:
            violations.append(i)
        elif floor == ceiling and not rule.is_uniform:
            false_eq.append(i)
    return MinimaxReport(
        kappa=kappa,
        d=d,
        ceiling=ceiling,
        rules_checked=len(trial_rules),
        violations=tuple(violations),
        false_equalities=tuple(false_eq),
    )


def cartel_prefix_count(owners: Sequence[Owner], kappa: int) -> int:
    """How many of the first kappa included bundles belong to the cartel."""
    return sum(1 for o in owners[:kappa] if o == "cartel")
