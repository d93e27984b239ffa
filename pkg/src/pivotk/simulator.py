"""Pathwise Monte-Carlo engine over the lane-contact process.

Traces are bit-reproducible from (instance, policy, seed).  Contact draws and
policy randomness come from separate streams so that dominance checks can
share contact paths across policies (common random numbers) while policies
keep their own noise.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import SystemInstance, cartel_lane_count
from .incentives import EconParams
from .mechanism import (
    BundleRecord,
    cartel_prefix_count,
    pivotal_allocation,
    resolve_order,
)

__all__ = [
    "AdversaryPolicy",
    "FullInclude",
    "FullWithhold",
    "StationaryW",
    "MinimalSabotage",
    "RatchetSpread",
    "Scripted",
    "policy_from_config",
    "SlotRecord",
    "Trace",
    "run_trace",
    "DelayEstimate",
    "estimate_delay",
    "PayoffBreakdown",
    "payoff_of_trace",
    "SabotageReport",
    "minimal_sabotage_exhaustive",
    "prefix_monotonicity_exhaustive",
    "PathwiseReport",
    "verify_pathwise_theorems",
    "trace_to_json",
    "trace_from_json",
    "trace_from_json_with_econ",
]

HORIZON_CAP_FACTOR = 64  # traces never run past this many horizons

_CONTACT_STREAM = 0
_POLICY_STREAM = 1


class AdversaryPolicy:
    """Per-slot inclusion decisions over the cartel's contacted bundles."""

    name = "abstract"

    def include_flags(
        self,
        t: int,
        contacts: int,
        withheld_so_far: int,
        instance: SystemInstance,
        rng: np.random.Generator,
    ) -> list[bool]:
        raise NotImplementedError

    def withheld_by_horizon(
        self, contacts: np.ndarray, instance: SystemInstance, rng: np.random.Generator
    ) -> np.ndarray:
        """Vectorized pre-horizon withheld counts, one per path row."""
        raise NotImplementedError

    def to_config(self) -> dict:
        return {"kind": self.name}


class FullInclude(AdversaryPolicy):
    name = "full_include"

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        return [True] * contacts

    def withheld_by_horizon(self, contacts, instance, rng):
        return np.zeros(contacts.shape[0], dtype=np.int64)


class FullWithhold(AdversaryPolicy):
    name = "full_withhold"

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        return [False] * contacts

    def withheld_by_horizon(self, contacts, instance, rng):
        return contacts.sum(axis=1)


@dataclass(frozen=True)
class StationaryW(AdversaryPolicy):
    """Each received bundle is included independently with probability w."""

    w: float
    name = "stationary_w"

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        return [bool(u < self.w) for u in rng.random(contacts)]

    def withheld_by_horizon(self, contacts, instance, rng):
        included = rng.binomial(contacts, self.w)
        return (contacts - included).sum(axis=1)

    def to_config(self):
        return {"kind": self.name, "w": self.w}


@dataclass(frozen=True)
class MinimalSabotage(AdversaryPolicy):
    """Withhold the first slack+1 bundles before the horizon, include the rest."""

    name = "minimal_sabotage"

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        target = instance.delta + 1
        if t > instance.t_star or withheld_so_far >= target:
            return [True] * contacts
        k = min(target - withheld_so_far, contacts)
        return [False] * k + [True] * (contacts - k)

    def withheld_by_horizon(self, contacts, instance, rng):
        return np.minimum(contacts.sum(axis=1), instance.delta + 1)


@dataclass(frozen=True)
class RatchetSpread(AdversaryPolicy):
    """Withhold at most caps[t-1] bundles in slot t; include everything later."""

    caps: tuple[int, ...]
    name = "ratchet_spread"

    def __post_init__(self):
        if any(c < 0 for c in self.caps):
            raise ValueError("caps must be nonnegative")

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        cap = self.caps[t - 1] if t <= len(self.caps) else 0
        k = min(cap, contacts)
        return [False] * k + [True] * (contacts - k)

    def withheld_by_horizon(self, contacts, instance, rng):
        t_star = contacts.shape[1]
        row = np.zeros(t_star, dtype=np.int64)
        upto = min(len(self.caps), t_star)
        row[:upto] = self.caps[:upto]
        return np.minimum(contacts, row[None, :]).sum(axis=1)

    def to_config(self):
        return {"kind": self.name, "caps": list(self.caps)}


@dataclass(frozen=True)
class Scripted(AdversaryPolicy):
    """Include exactly min(script[t-1], contacts) bundles in slot t."""

    includes: tuple[int, ...]
    name = "scripted"

    def __post_init__(self):
        if any(x < 0 for x in self.includes):
            raise ValueError("inclusion counts must be nonnegative")

    def include_flags(self, t, contacts, withheld_so_far, instance, rng):
        if t > len(self.includes):
            return [True] * contacts
        x = min(self.includes[t - 1], contacts)
        return [False] * (contacts - x) + [True] * x

    def withheld_by_horizon(self, contacts, instance, rng):
        t_star = contacts.shape[1]
        row = np.full(t_star, np.iinfo(np.int64).max, dtype=np.int64)
        upto = min(len(self.includes), t_star)
        row[:upto] = self.includes[:upto]
        return np.maximum(contacts - row[None, :], 0).sum(axis=1)

    def to_config(self):
        return {"kind": self.name, "includes": list(self.includes)}


def policy_from_config(obj: dict) -> AdversaryPolicy:
    kind = obj["kind"]
    if kind == "full_include":
        return FullInclude()
    if kind == "full_withhold":
        return FullWithhold()
    if kind == "stationary_w":
        return StationaryW(float(obj["w"]))
    if kind == "minimal_sabotage":
        return MinimalSabotage()
    if kind == "ratchet_spread":
        return RatchetSpread(tuple(int(c) for c in obj["caps"]))
    if kind == "scripted":
        return Scripted(tuple(int(x) for x in obj["includes"]))
    raise ValueError(f"unknown policy kind {kind!r}")


@dataclass(frozen=True)
class SlotRecord:
    contacts_cartel: int
    contacts_honest: int
    included_cartel: int


@dataclass(frozen=True)
class Trace:
    """One sample path: contacts, decisions, resolution order, and outcome."""

    instance: SystemInstance
    cartel_lanes: int
    policy_config: dict
    seed: int
    slots: tuple[SlotRecord, ...]
    inclusion_order: tuple[BundleRecord, ...]
    inclusion_time: int | None
    withheld_at_horizon: int
    pivotal_cartel_count: int | None
    delayed: bool
    truncated: bool

    @property
    def t_star(self) -> int:
        return self.instance.t_star


def _seed_list(seed) -> list[int]:
    if isinstance(seed, (list, tuple)):
        return [int(s) for s in seed]
    return [int(seed)]


def run_trace(
    instance: SystemInstance, beta, policy: AdversaryPolicy, seed
) -> Trace:
    """Simulate one transaction to one slot past inclusion (or the cap).

    Contacts are drawn per slot by taking the first m entries of a lane
    permutation, so specific lane identities are available for tickets.  The
    cartel's lane set is itself drawn uniformly per trace: lane ids tie-break
    the resolution order, so a fixed cartel block (say lanes 1..beta*n) would
    systematically front-run the pivotal prefix.
    """
    marked = cartel_lane_count(instance.n, beta)
    key = _seed_list(seed)
    contact_rng = np.random.default_rng(key + [_CONTACT_STREAM])
    policy_rng = np.random.default_rng(key + [_POLICY_STREAM])

    n, m, kappa, t_star = instance.n, instance.m, instance.kappa, instance.t_star
    cap = HORIZON_CAP_FACTOR * t_star
    cartel_set = frozenset(int(l) for l in contact_rng.permutation(n)[:marked] + 1)

    slots: list[SlotRecord] = []
    records: list[BundleRecord] = []
    included_total = 0
    withheld_so_far = 0
    withheld_at_horizon = 0
    inclusion_time: int | None = None
    truncated = False

    t = 0
    while True:
        t += 1
        lanes = contact_rng.permutation(n)[:m] + 1
        cartel = sorted(int(l) for l in lanes if l in cartel_set)
        honest = sorted(int(l) for l in lanes if l not in cartel_set)
        flags = policy.include_flags(t, len(cartel), withheld_so_far, instance, policy_rng)
        if len(flags) != len(cartel):
            raise ValueError("policy returned wrong number of decisions")
        x = sum(flags)
        withheld_so_far += len(cartel) - x
        if t == t_star:
            withheld_at_horizon = withheld_so_far

        for lane in honest:
            records.append(BundleRecord(t, lane, (0, t, lane), "honest"))
        for lane, inc in zip(cartel, flags):
            if inc:
                records.append(BundleRecord(t, lane, (0, t, lane), "cartel"))
        slots.append(SlotRecord(len(cartel), len(honest), x))
        included_total += len(honest) + x

        if inclusion_time is None and included_total >= kappa:
            inclusion_time = t
        if inclusion_time is not None and t >= max(inclusion_time, t_star) + 1:
            break
        if t >= cap:
            truncated = inclusion_time is None
            break

    order = tuple(resolve_order(records))
    j_kappa = (
        cartel_prefix_count([r.owner for r in order], kappa)
        if len(order) >= kappa
        else None
    )
    delayed = withheld_at_horizon > instance.delta
    if not truncated and inclusion_time is not None:
        if (inclusion_time > t_star) != delayed:
            raise RuntimeError(
                "delay/deficit equivalence violated: "
                f"T={inclusion_time}, t*={t_star}, W={withheld_at_horizon}, "
                f"delta={instance.delta}"
            )

    return Trace(
        instance=instance,
        cartel_lanes=marked,
        policy_config=policy.to_config(),
        seed=key[0] if len(key) == 1 else key,
        slots=tuple(slots),
        inclusion_order=order,
        inclusion_time=inclusion_time,
        withheld_at_horizon=withheld_at_horizon,
        pivotal_cartel_count=j_kappa,
        delayed=delayed,
        truncated=truncated,
    )


@dataclass(frozen=True)
class DelayEstimate:
    frequency: float
    stderr: float
    ci_low: float
    ci_high: float
    trials: int


def estimate_delay(
    instance: SystemInstance, beta, policy: AdversaryPolicy, trials: int, seed
) -> DelayEstimate:
    """Monte-Carlo delay frequency for a policy.

    Works at contact-count granularity: the delay event depends only on the
    pre-horizon withheld count, so lane identities are not drawn.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    marked = cartel_lane_count(instance.n, beta)
    key = _seed_list(seed)
    contact_rng = np.random.default_rng(key + [_CONTACT_STREAM])
    policy_rng = np.random.default_rng(key + [_POLICY_STREAM])

    contacts = contact_rng.hypergeometric(
        marked, instance.n - marked, instance.m, size=(trials, instance.t_star)
    ) if marked > 0 else np.zeros((trials, instance.t_star), dtype=np.int64)
    withheld = policy.withheld_by_horizon(contacts, instance, policy_rng)
    hits = int((withheld > instance.delta).sum())
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return DelayEstimate(
        frequency=p,
        stderr=se,
        ci_low=max(0.0, p - 1.96 * se),
        ci_high=min(1.0, p + 1.96 * se),
        trials=trials,
    )


@dataclass(frozen=True)
class PayoffBreakdown:
    """Cartel revenue split: discounted fees, bounty share, and the MEV option."""

    fee_revenue: float
    bounty_revenue: float
    mev_option: float

    @property
    def total(self) -> float:
        return self.fee_revenue + self.bounty_revenue + self.mev_option


def payoff_of_trace(
    trace: Trace, econ: EconParams, mechanism_mode: str = "pivotal"
) -> PayoffBreakdown:
    """Cartel payoff of a finished trace.

    Fees: gamma^(t-1) * f per included cartel bundle, up to the inclusion
    slot.  Bounty: the cartel's exact share of the pivotal allocation,
    discounted to the inclusion slot; zero if decoding never happened or the
    mechanism is disabled.  MEV option: alpha*v*gamma^t* on delayed paths.
    """
    if mechanism_mode not in ("pivotal", "none"):
        raise ValueError(f"unknown mechanism mode {mechanism_mode!r}")
    inst = trace.instance
    f = econ.proposer_fee(inst.s)
    g = econ.gamma
    horizon = (
        trace.inclusion_time if trace.inclusion_time is not None else len(trace.slots)
    )
    fee = math.fsum(
        g ** (t - 1) * f * rec.included_cartel
        for t, rec in enumerate(trace.slots, start=1)
        if t <= horizon
    )

    bounty = 0.0
    if (
        mechanism_mode == "pivotal"
        and econ.bounty > 0
        and trace.inclusion_time is not None
        and len(trace.inclusion_order) >= inst.kappa
    ):
        alloc = pivotal_allocation(trace.inclusion_order, inst.K, inst.s, econ.bounty)
        bounty = g**trace.inclusion_time * float(alloc.paid_to("cartel"))

    mev = econ.mev_exposure * g**inst.t_star if trace.delayed else 0.0
    return PayoffBreakdown(fee, bounty, mev)


# --- serialization ---------------------------------------------------------


def trace_to_json(
    trace: Trace,
    payoff: PayoffBreakdown | None = None,
    econ: EconParams | None = None,
) -> str:
    """One trace as a single JSON line, replayable and diffable.

    Embedding the econ block alongside the payoff makes the line
    self-contained: a replay recomputes the payoff from the same inputs and
    must reproduce the stored floats exactly.
    """
    obj = {
        "format": 1,
        "instance": trace.instance.to_config(),
        "cartel_lanes": trace.cartel_lanes,
        "policy": trace.policy_config,
        "seed": trace.seed,
        "slots": [
            [s.contacts_cartel, s.contacts_honest, s.included_cartel]
            for s in trace.slots
        ],
        "inclusion_order": [[r.slot, r.lane, r.owner] for r in trace.inclusion_order],
        "inclusion_time": trace.inclusion_time,
        "withheld_at_horizon": trace.withheld_at_horizon,
        "pivotal_cartel_count": trace.pivotal_cartel_count,
        "delayed": trace.delayed,
        "truncated": trace.truncated,
    }
    if payoff is not None:
        obj["payoff"] = {
            "fee_revenue": payoff.fee_revenue,
            "bounty_revenue": payoff.bounty_revenue,
            "mev_option": payoff.mev_option,
            "total": payoff.total,
        }
    if econ is not None:
        obj["econ"] = econ.to_config()
    return json.dumps(obj, separators=(",", ":"))


def trace_from_json_with_econ(
    line: str,
) -> tuple[Trace, PayoffBreakdown | None, EconParams | None]:
    obj = json.loads(line)
    if obj.get("format") != 1:
        raise ValueError("unknown trace format")
    instance = SystemInstance.from_config(obj["instance"])
    order = tuple(
        BundleRecord(slot, lane, (0, slot, lane), owner)
        for slot, lane, owner in obj["inclusion_order"]
    )
    trace = Trace(
        instance=instance,
        cartel_lanes=int(obj["cartel_lanes"]),
        policy_config=obj["policy"],
        seed=obj["seed"],
        slots=tuple(SlotRecord(a, h, x) for a, h, x in obj["slots"]),
        inclusion_order=order,
        inclusion_time=obj["inclusion_time"],
        withheld_at_horizon=int(obj["withheld_at_horizon"]),
        pivotal_cartel_count=obj["pivotal_cartel_count"],
        delayed=bool(obj["delayed"]),
        truncated=bool(obj["truncated"]),
    )
    payoff = None
    if "payoff" in obj:
        p = obj["payoff"]
        payoff = PayoffBreakdown(
            p["fee_revenue"], p["bounty_revenue"], p["mev_option"]
        )
    econ = EconParams.from_config(obj["econ"]) if "econ" in obj else None
    return trace, payoff, econ


def trace_from_json(line: str) -> tuple[Trace, PayoffBreakdown | None]:
    trace, payoff, _ = trace_from_json_with_econ(line)
    return trace, payoff


# --- theorem verification --------------------------------------------------


@dataclass(frozen=True)
class SabotageReport:
    """Exhaustive check that optimal delay-inducing deviations are minimal."""

    paths_checked: int
    paths_with_delay_option: int
    paths_skipped: int
    violations: int
    assumption_static_fees: bool

    @property
    def passed(self) -> bool:
        return self.violations == 0


def minimal_sabotage_exhaustive(
    instance: SystemInstance,
    beta,
    econ: EconParams,
    paths: int,
    seed,
    assume_static_fees: bool = True,
    pattern_limit: int = 1 << 16,
) -> SabotageReport:
    """Enumerate every withholding pattern on sampled paths.

    For each sampled contact path, all subsets of pre-horizon cartel bundles
    are tried as withholding sets.  Among the delay-achieving subsets, every
    payoff maximizer must withhold exactly slack+1 bundles.  Only meaningful
    under nonnegative net marginal inclusion payoff; when that assumption is
    dropped the enumeration is skipped and reported as not applicable.
    """
    if instance.t_star * instance.m > 18:
        raise ValueError("exhaustive enumeration is limited to t* * m <= 18")
    if instance.s != 1:
        raise ValueError("enumeration assumes single-symbol bundles (s = 1)")
    if not assume_static_fees:
        return SabotageReport(0, 0, 0, 0, assumption_static_fees=False)

    marked = cartel_lane_count(instance.n, beta)
    n, m, kappa, t_star, delta = (
        instance.n,
        instance.m,
        instance.kappa,
        instance.t_star,
        instance.delta,
    )
    f = econ.proposer_fee(instance.s)
    g = econ.gamma
    cap = HORIZON_CAP_FACTOR * t_star

    key = _seed_list(seed)
    with_delay = 0
    skipped = 0
    violations = 0

    for path_idx in range(paths):
        rng = np.random.default_rng(key + [_CONTACT_STREAM, path_idx])
        cartel_set = frozenset(int(l) for l in rng.permutation(n)[:marked] + 1)
        slot_lanes = []
        for _ in range(cap):
            lanes = rng.permutation(n)[:m] + 1
            slot_lanes.append(sorted(int(l) for l in lanes))

        # pre-horizon cartel bundle positions, in resolution order
        positions = [
            (t, lane)
            for t in range(1, t_star + 1)
            for lane in slot_lanes[t - 1]
            if lane in cartel_set
        ]
        c = len(positions)
        if c <= delta:
            continue  # no delay-achieving pattern exists on this path
        if 1 << c > pattern_limit:
            skipped += 1
            continue
        with_delay += 1

        best_payoff = -math.inf
        best_cardinalities: set[int] = set()
        for mask in range(1 << c):
            withheld = {positions[i] for i in range(c) if mask >> i & 1}
            w_count = len(withheld)
            if w_count <= delta:
                continue  # not delay-achieving

            owners: list[str] = []
            fee = 0.0
            included = 0
            inclusion_time = None
            for t in range(1, cap + 1):
                x_t = 0
                for lane in slot_lanes[t - 1]:
                    is_cartel = lane in cartel_set
                    if t <= t_star and is_cartel and (t, lane) in withheld:
                        continue
                    if included < kappa:
                        owners.append("cartel" if is_cartel else "honest")
                    included += 1
                    if is_cartel:
                        x_t += 1
                fee += g ** (t - 1) * f * x_t
                if included >= kappa:
                    inclusion_time = t
                    break
            if inclusion_time is None:
                raise RuntimeError("path too short to realize inclusion")

            j = sum(1 for o in owners[:kappa] if o == "cartel")
            bounty = g**inclusion_time * j * econ.bounty / kappa
            mev = econ.mev_exposure * g**t_star
            payoff = fee + bounty + mev

            if payoff > best_payoff + 1e-12:
                best_payoff = payoff
                best_cardinalities = {w_count}
            elif abs(payoff - best_payoff) <= 1e-12:
                best_cardinalities.add(w_count)

        if best_cardinalities != {delta + 1}:
            violations += 1

    return SabotageReport(
        paths_checked=paths,
        paths_with_delay_option=with_delay,
        paths_skipped=skipped,
        violations=violations,
        assumption_static_fees=True,
    )


def _prefix_count(seq: Sequence[str], kappa: int) -> int:
    return sum(1 for o in seq[:kappa] if o == "cartel")


def prefix_monotonicity_exhaustive(kappa: int, extra: int = 2) -> int:
    """Exhaustively verify that inserting cartel bundles never shrinks the prefix count.

    All owner sequences of length kappa+extra and all ways to insert one or
    two cartel bundles are enumerated; returns the number of cases checked.
    Raises on any violation.
    """
    if kappa > 6:
        raise ValueError("exhaustive enumeration is limited to kappa <= 6")
    length = kappa + extra
    checked = 0
    for bits in range(1 << length):
        seq = ["cartel" if bits >> i & 1 else "honest" for i in range(length)]
        base = _prefix_count(seq, kappa)
        for k_insert in (1, 2):
            for spots in itertools.combinations_with_replacement(
                range(length + 1), k_insert
            ):
                aug = list(seq)
                for offset, pos in enumerate(sorted(spots)):
                    aug.insert(pos + offset, "cartel")
                if _prefix_count(aug, kappa) < base:
                    raise AssertionError(
                        f"prefix count dropped after insertion: seq={seq}, spots={spots}"
                    )
                checked += 1
    return checked


@dataclass(frozen=True)
class PathwiseReport:
    """Outcome of the pathwise theorem battery."""

    dominance_paths: int
    dominance_violations: int
    prefix_cases_checked: int
    prefix_violations: int
    sabotage: SabotageReport | None

    @property
    def passed(self) -> bool:
        ok = self.dominance_violations == 0 and self.prefix_violations == 0
        if self.sabotage is not None:
            ok = ok and self.sabotage.passed
        return ok


def verify_pathwise_theorems(
    instance: SystemInstance,
    beta,
    trials: int,
    seed,
    policies: Sequence[AdversaryPolicy] | None = None,
    sabotage_econ: EconParams | None = None,
    sabotage_paths: int = 25,
    assume_static_fees: bool = True,
) -> PathwiseReport:
    """Check the pathwise dominance, prefix monotonicity, and minimal sabotage.

    Dominance: on shared contact paths, no policy's delay indicator may
    exceed full withholding's, with zero violations allowed.  Prefix
    monotonicity is enumerated exhaustively for small thresholds.  The
    sabotage enumeration runs only when the instance is small enough and an
    econ is supplied.
    """
    if policies is None:
        policies = [
            FullInclude(),
            StationaryW(0.25),
            StationaryW(0.5),
            StationaryW(0.75),
            MinimalSabotage(),
        ]
    marked = cartel_lane_count(instance.n, beta)
    key = _seed_list(seed)
    contact_rng = np.random.default_rng(key + [_CONTACT_STREAM])
    contacts = contact_rng.hypergeometric(
        marked, instance.n - marked, instance.m, size=(trials, instance.t_star)
    ) if marked > 0 else np.zeros((trials, instance.t_star), dtype=np.int64)

    baseline = contacts.sum(axis=1) > instance.delta  # full withholding
    violations = 0
    for idx, policy in enumerate(policies):
        policy_rng = np.random.default_rng(key + [_POLICY_STREAM, idx])
        withheld = policy.withheld_by_horizon(contacts, instance, policy_rng)
        delayed = withheld > instance.delta
        violations += int((delayed & ~baseline).sum())

    prefix_checked = 0
    prefix_violations = 0
    for kappa in range(1, 7):
        try:
            prefix_checked += prefix_monotonicity_exhaustive(kappa)
        except AssertionError:
            prefix_violations += 1

    sabotage = None
    if sabotage_econ is not None and instance.t_star * instance.m <= 18:
        sabotage = minimal_sabotage_exhaustive(
            instance,
            beta,
            sabotage_econ,
            paths=sabotage_paths,
            seed=key + [2],
            assume_static_fees=assume_static_fees,
        )

    return PathwiseReport(
        dominance_paths=trials,
        dominance_violations=violations,
        prefix_cases_checked=prefix_checked,
        prefix_violations=prefix_violations,
        sabotage=sabotage,
    )
