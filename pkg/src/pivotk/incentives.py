"""Closed-form incentive quantities: payoffs, IC thresholds, coalition bounds.

Sign conventions: margins are reported as computed, including negative ones.
Infeasibility is a finding, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .geometry import SystemInstance, cartel_lane_count
from .probability import DiscreteDistribution, HypergeomLaw, hypergeom_pmf

__all__ = [
    "EconParams",
    "pi_share",
    "fee_revenue_upper",
    "bounty_gap_lower",
    "ICCheck",
    "ic_stationary_check",
    "KnifeEdgeThreshold",
    "knife_edge_bounty_threshold",
    "coalition_sufficient_bounty",
    "coalition_loss_floor",
    "equal_share",
    "phi_threshold",
    "sender_ir_bound",
    "InclusionTimeLaw",
    "distribution_of_T0",
    "bounty_proxies",
    "BountyPrior",
    "BayesBountyResult",
    "bayesian_optimal_bounty",
    "AttackItem",
    "KnapsackResult",
    "knapsack_select",
]


@dataclass(frozen=True)
class EconParams:
    """Fee, bounty, and discount economics for one transaction.

    Two construction modes.  The byte model derives the per-bundle price from
    sizes, ``bundle_price(s) = per_byte_price * (header_bytes + s *
    (metadata_bytes + symbol_bytes))``, and the proposer keeps the share
    ``proposer_share`` of it.  The normalized mode fixes the proposer fee per
    included bundle directly (the tables' unit-fee convention) and carries an
    explicit bundle price for fee-share questions.
    """

    gamma: float
    alpha: float
    value: float
    bounty: float = 0.0
    header_bytes: int | None = None
    metadata_bytes: int | None = None
    symbol_bytes: int | None = None
    per_byte_price: float | None = None
    proposer_share: float | None = None
    fee_unit: float | None = None
    bundle_price_unit: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.value <= 0:
            raise ValueError("transaction value must be positive")
        if self.bounty < 0:
            raise ValueError("bounty must be nonnegative")
        byte_fields = (
            self.header_bytes,
            self.metadata_bytes,
            self.symbol_bytes,
            self.per_byte_price,
            self.proposer_share,
        )
        if self.fee_unit is None:
            if any(f is None for f in byte_fields):
                raise ValueError("byte model requires all size and price fields")
            if self.proposer_share is not None and not 0.0 <= self.proposer_share <= 1.0:
                raise ValueError("proposer_share must lie in [0, 1]")
        elif any(f is not None for f in byte_fields):
            raise ValueError("normalized mode excludes the byte-model fields")

    @classmethod
    def normalized(
        cls,
        fee: float,
        alpha_v: float,
        gamma: float,
        bounty: float = 0.0,
        alpha: float = 1.0,
        bundle_price: float | None = None,
    ) -> "EconParams":
        """Unit-fee economics: proposer fee set directly, MEV given as alpha*v."""
        if alpha <= 0:
            raise ValueError("alpha must be positive to recover v from alpha*v")
        return cls(
            gamma=gamma,
            alpha=alpha,
            value=alpha_v / alpha,
            bounty=bounty,
            fee_unit=fee,
            bundle_price_unit=bundle_price if bundle_price is not None else fee,
        )

    @classmethod
    def byte_model(
        cls,
        header_bytes: int,
        metadata_bytes: int,
        symbol_bytes: int,
        per_byte_price: float,
        proposer_share: float,
        alpha: float,
        value: float,
        gamma: float,
        bounty: float = 0.0,
    ) -> "EconParams":
        return cls(
            gamma=gamma,
            alpha=alpha,
            value=value,
            bounty=bounty,
            header_bytes=header_bytes,
            metadata_bytes=metadata_bytes,
            symbol_bytes=symbol_bytes,
            per_byte_price=per_byte_price,
            proposer_share=proposer_share,
        )

    @property
    def mev_exposure(self) -> float:
        """alpha * v, the value at risk from an early decode."""
        return self.alpha * self.value

    def bundle_bytes(self, s: int) -> int | None:
        if self.header_bytes is None:
            return None
        return self.header_bytes + s * (self.metadata_bytes + self.symbol_bytes)

    def bundle_price(self, s: int) -> float:
        if self.fee_unit is not None:
            return self.bundle_price_unit
        return self.per_byte_price * self.bundle_bytes(s)

    def proposer_fee(self, s: int) -> float:
        if self.fee_unit is not None:
            return self.fee_unit
        return self.proposer_share * self.bundle_price(s)

    def to_config(self) -> dict:
        if self.fee_unit is not None:
            return {
                "mode": "normalized",
                "fee": self.fee_unit,
                "alpha_v": self.mev_exposure,
                "alpha": self.alpha,
                "gamma": self.gamma,
                "bounty": self.bounty,
                "bundle_price": self.bundle_price_unit,
            }
        return {
            "mode": "bytes",
            "header_bytes": self.header_bytes,
            "metadata_bytes": self.metadata_bytes,
            "symbol_bytes": self.symbol_bytes,
            "per_byte_price": self.per_byte_price,
            "proposer_share": self.proposer_share,
            "alpha": self.alpha,
            "value": self.value,
            "gamma": self.gamma,
            "bounty": self.bounty,
        }

    @classmethod
    def from_config(cls, obj: dict) -> "EconParams":
        mode = obj.get("mode", "normalized")
        if mode == "normalized":
            return cls.normalized(
                fee=float(obj["fee"]),
                alpha_v=float(obj["alpha_v"]),
                gamma=float(obj["gamma"]),
                bounty=float(obj.get("bounty", 0.0)),
                alpha=float(obj.get("alpha", 1.0)),
                bundle_price=(
                    float(obj["bundle_price"]) if obj.get("bundle_price") is not None else None
                ),
            )
        if mode == "bytes":
            return cls.byte_model(
                header_bytes=int(obj["header_bytes"]),
                metadata_bytes=int(obj["metadata_bytes"]),
                symbol_bytes=int(obj["symbol_bytes"]),
                per_byte_price=float(obj["per_byte_price"]),
                proposer_share=float(obj["proposer_share"]),
                alpha=float(obj["alpha"]),
                value=float(obj["value"]),
                gamma=float(obj["gamma"]),
                bounty=float(obj.get("bounty", 0.0)),
            )
        raise ValueError(f"unknown econ mode {mode!r}")


def _beta_fraction(instance: SystemInstance, beta) -> float:
    return cartel_lane_count(instance.n, beta) / instance.n


def pi_share(w: float, beta: float) -> float:
    """Cartel's long-run share of included bundles at inclusion rate w.

    Bernoulli-thinning benchmark: each cartel bundle is included with
    probability w, honest bundles always, giving w*beta / (1 - beta + w*beta).
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    return w * beta / (1.0 - beta + w * beta)


def fee_revenue_upper(w: float, beta: float, m: int, fee: float, gamma: float) -> float:
    """Upper bound on discounted fee revenue: f * w * beta * m / (1 - gamma)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return fee * w * beta * m / (1.0 - gamma)


def bounty_gap_lower(
    w: float, instance: SystemInstance, beta, bounty: float, gamma: float
) -> float:
    """Lower bound on the bounty revenue the cartel forfeits by playing w < 1.

    gamma^t* (beta - pi(w) - m/kappa) * B.  The m/kappa slack is the terminal
    slot error of the share estimate; the value may be negative, in which
    case the bound is uninformative for this w.
    """
    bf = _beta_fraction(instance, beta)
    share = pi_share(w, bf) if w > 0 else 0.0
    return (
        gamma**instance.t_star
        * (bf - share - instance.m / instance.kappa)
        * bounty
    )


@dataclass(frozen=True)
class ICCheck:
    """One point of the stationary sufficient condition for full inclusion."""

    w: float
    lhs: float  # forfeited bounty share gap times B
    rhs: float  # MEV option at this w
    margin: float

    @property
    def satisfied(self) -> bool:
        return self.margin >= 0.0


def ic_stationary_check(
    instance: SystemInstance, beta, econ: EconParams, w: float, q_w: float
) -> ICCheck:
    """Check (beta - pi(w) - m/kappa) * B >= alpha*v * q_w at one inclusion rate.

    The fee gap is dropped, so this is conservative; a negative margin means
    the bounty alone does not cover the delay option at this w.
    """
    if not 0.0 <= w < 1.0:
        raise ValueError("the check compares full inclusion against w < 1")
    bf = _beta_fraction(instance, beta)
    share = pi_share(w, bf) if w > 0 else 0.0
    lhs = (bf - share - instance.m / instance.kappa) * econ.bounty
    rhs = econ.mev_exposure * q_w
    return ICCheck(w=w, lhs=lhs, rhs=rhs, margin=lhs - rhs)


def ic_stationary_profile(
    instance: SystemInstance,
    beta,
    econ: EconParams,
    q_of_w: Callable[[float], float],
    grid_points: int = 101,
) -> tuple[list[ICCheck], ICCheck]:
    """Sweep the stationary IC condition over a w grid; the worst margin rules.

    The condition quantifies over every w in [0, 1); no closed-form minimizer
    exists, so it is evaluated pointwise on ``grid_points`` equispaced rates.
    """
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    checks = []
    for i in range(grid_points):
        w = i / grid_points  # covers [0, 1), endpoint excluded
        checks.append(ic_stationary_check(instance, beta, econ, w, q_of_w(w)))
    worst = min(checks, key=lambda c: c.margin)
    return checks, worst


@dataclass(frozen=True)
class KnifeEdgeThreshold:
    """Bounty threshold for zero-slack instances, with its revenue decomposition.

    At the threshold the three deterrence terms exactly offset the MEV
    option.  ``net_fee_sacrifice`` can be negative when the extra slot's fee
    windfall exceeds the withheld bundle's fee.
    """

    bounty_min: float
    net_fee_sacrifice: float
    bounty_discount_loss: float
    lost_pivotal_share: float
    mev_option: float


def knife_edge_bounty_threshold(
    instance: SystemInstance, beta, econ: EconParams, q0: float
) -> KnifeEdgeThreshold:
    """Minimum bounty deterring the one-bundle deviation at zero slack.

    B >= q0 (alpha*v - f/gamma + beta*m*f) /
         ((1-gamma)*beta + gamma*(1-beta)*q0/kappa)

    A nonpositive numerator means fees alone already deter; the threshold is
    then reported as computed (nonpositive), never clamped.
    """
    if instance.delta != 0:
        raise ValueError("threshold applies only to zero-slack instances")
    bf = _beta_fraction(instance, beta)
    g = econ.gamma
    f = econ.proposer_fee(instance.s)
    kappa, t_star, m = instance.kappa, instance.t_star, instance.m

    denom = (1.0 - g) * bf + g * (1.0 - bf) * q0 / kappa
    if denom <= 0.0:
        raise ValueError("degenerate economics: threshold denominator is zero")
    b_min = q0 * (econ.mev_exposure - f / g + bf * m * f) / denom

    return KnifeEdgeThreshold(
        bounty_min=b_min,
        net_fee_sacrifice=q0 * (g ** (t_star - 1) * f - g**t_star * bf * m * f),
        bounty_discount_loss=g**t_star * (1.0 - g) * bf * b_min,
        lost_pivotal_share=g ** (t_star + 1) * (1.0 - bf) * q0 / kappa * b_min,
        mev_option=econ.mev_exposure * g**t_star * q0,
    )


def coalition_sufficient_bounty(
    instance: SystemInstance, econ: EconParams
) -> float | None:
    """Bounty making every delay-inducing coalition run at an aggregate loss.

    kappa * max(0, alpha*v*gamma^t* - (delta+1)*f) for positive slack.  At
    zero slack the attack is unilateral and the decomposition does not apply;
    returns None.
    """
    if instance.delta == 0:
        return None
    f = econ.proposer_fee(instance.s)
    shortfall = econ.mev_exposure * econ.gamma**instance.t_star - (instance.delta + 1) * f
    return instance.kappa * max(0.0, shortfall)


def coalition_loss_floor(c: int, instance: SystemInstance, econ: EconParams) -> float:
    """Minimum direct revenue a coalition burns by withholding c bundles.

    c*f in fees, plus B/kappa for each of the (c - delta)+ deletions that
    necessarily land inside the pivotal prefix.
    """
    if c < 0:
        raise ValueError("withheld count must be nonnegative")
    f = econ.proposer_fee(instance.s)
    pivotal_hits = max(0, c - instance.delta)
    return c * f + pivotal_hits * econ.bounty / instance.kappa


def equal_share(econ: EconParams, instance: SystemInstance) -> float:
    """Per-member MEV under even splitting across the minimal coalition.

    alpha*v*gamma^t* / (delta+1): the discounted MEV pie divided by the
    minimum number of withheld bundles any successful delay needs.
    """
    return econ.mev_exposure * econ.gamma**instance.t_star / (instance.delta + 1)


def phi_threshold(
    instance: SystemInstance, beta, econ: EconParams, q0: float
) -> float:
    """Proposer fee share above which fees alone deter full withholding.

    phi* = alpha*v*gamma^t* * q0 * (1-gamma) / (c*L(s)*beta*m*(1-gamma^t*)).
    Values above 1 mean no feasible share suffices and a bounty is required.
    """
    bf = _beta_fraction(instance, beta)
    price = econ.bundle_price(instance.s)
    if price <= 0 or bf <= 0:
        raise ValueError("need positive bundle price and cartel fraction")
    g = econ.gamma
    numer = econ.mev_exposure * g**instance.t_star * q0 * (1.0 - g)
    denom = price * bf * instance.m * (1.0 - g**instance.t_star)
    return numer / denom


def sender_ir_bound(
    instance: SystemInstance,
    beta,
    econ: EconParams,
    q0: float,
    expected_discount_T0: float,
) -> float:
    """Largest bounty a rational sender would post, worst-case cartel response.

    v*(gamma^t* - E[gamma^T(0)]) + alpha*v*gamma^t* * q0: the delay cost plus
    the MEV loss that full inclusion eliminates, both priced against full
    withholding.
    """
    g_star = econ.gamma**instance.t_star
    return econ.value * (g_star - expected_discount_T0) + econ.mev_exposure * g_star * q0


@dataclass(frozen=True)
class InclusionTimeLaw:
    """Law of the inclusion slot under full withholding, truncated at a cap.

    ``law`` carries mass for T in [t*, horizon_cap]; ``residual_mass`` is
    P[T > horizon_cap], kept separate and required to be under 1e-9.
    """

    law: DiscreteDistribution
    residual_mass: float
    horizon_cap: int

    @property
    def t_star(self) -> int:
        return self.law.offset

    def delay_probability(self) -> float:
        """P[T > t*] = 1 - P[T = t*]; residual mass is beyond t* by construction."""
        return 1.0 - self.law.pmf(self.t_star)

    def expected_discount(self, gamma: float) -> float:
        """E[gamma^T] over the represented mass (residual adds < 1e-9 * gamma^cap)."""
        return self.law.expected_power(gamma)


_RESIDUAL_LIMIT = 1e-9
_AUTO_RESIDUAL_TARGET = 1e-12


def distribution_of_T0(
    instance: SystemInstance, beta, horizon_cap: int | None = None
) -> InclusionTimeLaw:
    """Exact inclusion-time law under full withholding, by honest-count DP.

    Only honest contacts accumulate on-chain; the state is the honest bundle
    count so far, and inclusion fires at the first slot reaching kappa.  With
    an explicit cap the truncated mass must come in under 1e-9, otherwise the
    error names a cap that suffices; the default cap is grown automatically
    until the residual is negligible.
    """
    marked = cartel_lane_count(instance.n, beta)
    honest_law = HypergeomLaw(instance.n, instance.n - marked, instance.m)
    h_lo, h_hi = honest_law.support_min, honest_law.support_max
    h_pmf = [hypergeom_pmf(honest_law, h) for h in range(h_lo, h_hi + 1)]
    kappa, t_star = instance.kappa, instance.t_star

    if horizon_cap is not None and horizon_cap < t_star:
        raise ValueError(f"horizon cap {horizon_cap} is below the horizon {t_star}")

    def run(cap: int) -> tuple[list[float], float]:
        alive = [0.0] * kappa  # index u: P[sum of honest so far = u, T not yet hit]
        alive[0] = 1.0
        hit: list[float] = []
        for _ in range(cap):
            nxt = [0.0] * kappa
            reached = 0.0
            for u, pu in enumerate(alive):
                if pu == 0.0:
                    continue
                for i, ph in enumerate(h_pmf):
                    if ph == 0.0:
                        continue
                    v = u + h_lo + i
                    if v >= kappa:
                        reached += pu * ph
                    else:
                        nxt[v] += pu * ph
            hit.append(reached)
            alive = nxt
        return hit, math.fsum(alive)

    if horizon_cap is None:
        cap = max(t_star + 8, 2 * t_star)
        while True:
            hit, residual = run(cap)
            if residual < _AUTO_RESIDUAL_TARGET:
                break
            if cap > 65536 * instance.t_star:
                raise ValueError(
                    "inclusion-time law does not concentrate; check parameters"
                )
            cap *= 2
    else:
        cap = horizon_cap
        hit, residual = run(cap)
        if residual >= _RESIDUAL_LIMIT:
            probe = cap
            while True:
                probe *= 2
                _, probe_res = run(probe)
                if probe_res < _RESIDUAL_LIMIT or probe > 65536 * instance.t_star:
                    break
            raise ValueError(
                f"horizon cap {cap} leaves residual mass {residual:.3e}; "
                f"a cap of {probe} suffices"
            )

    # Mass cannot appear before t*: fewer than kappa bundles exist until then.
    assert all(p == 0.0 for p in hit[: t_star - 1])
    law = DiscreteDistribution(t_star, tuple(hit[t_star - 1 :]), strict=False)
    return InclusionTimeLaw(law=law, residual_mass=residual, horizon_cap=cap)


def bounty_proxies(
    instance: SystemInstance, beta, econ: EconParams, q0: float, q_rat: float
) -> tuple[float, float]:
    """Monolithic bounty proxies (alpha*v/beta) * q for static and ratchet delays.

    Conservative expected-value pricing that ignores fees and discounting.
    """
    bf = _beta_fraction(instance, beta)
    if bf <= 0:
        raise ValueError("need a positive cartel fraction")
    scale = econ.mev_exposure / bf
    return scale * q0, scale * q_rat


@dataclass(frozen=True)
class BountyPrior:
    """Posted-bounty problem under a prior over the cartel's response threshold.

    The cartel includes iff the posted bounty clears an unknown threshold
    with CDF ``cdf`` supported on ``[support_lo, support_hi]``; ``u_include``
    and ``u_withhold`` are the sender's utilities in the two outcomes, gross
    of the bounty transfer.
    """

    cdf: Callable[[float], float]
    support_lo: float
    support_hi: float
    u_include: float
    u_withhold: float

    def __post_init__(self) -> None:
        if self.support_hi < self.support_lo:
            raise ValueError("empty support")

    def utility(self, bounty: float) -> float:
        fb = float(self.cdf(bounty))
        fb = min(max(fb, 0.0), 1.0)
        return fb * (self.u_include - bounty) + (1.0 - fb) * self.u_withhold

    @classmethod
    def uniform(
        cls, lo: float, hi: float, u_include: float, u_withhold: float
    ) -> "BountyPrior":
        if hi <= lo:
            raise ValueError("uniform prior needs lo < hi")

        def cdf(b: float) -> float:
            return min(max((b - lo) / (hi - lo), 0.0), 1.0)

        return cls(cdf, lo, hi, u_include, u_withhold)

    @classmethod
    def point(cls, b0: float, u_include: float, u_withhold: float) -> "BountyPrior":
        return cls(lambda b: 1.0 if b >= b0 else 0.0, b0, b0, u_include, u_withhold)


@dataclass(frozen=True)
class BayesBountyResult:
    bounty: float
    utility: float
    foc_residual: float | None


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def bayesian_optimal_bounty(
    prior: BountyPrior, grid_resolution: float = 1e-3
) -> BayesBountyResult:
    """Maximize F(B)(U_inc - B) + (1-F(B))U_wh over posted bounties.

    Grid search over the prior's support at ``grid_resolution``, then
    golden-section refinement around the best cell.  When inclusion is not
    worth inducing the optimum is to post nothing.  The first-order-condition
    residual f(B)(U_inc - U_wh - B) - F(B) is reported via a central
    finite-difference density estimate; it is meaningful only for priors
    with a density.
    """
    if grid_resolution <= 0:
        raise ValueError("grid resolution must be positive")
    if prior.u_include < prior.u_withhold:
        return BayesBountyResult(0.0, prior.utility(0.0), None)

    lo = min(0.0, prior.support_lo)
    hi = prior.support_hi
    if hi <= lo:
        candidates = [lo, prior.support_lo, prior.support_hi]
    else:
        steps = int(math.ceil((hi - lo) / grid_resolution))
        candidates = [lo + i * (hi - lo) / steps for i in range(steps + 1)]
        candidates.append(prior.support_lo)
    best = max(candidates, key=prior.utility)

    # Golden-section pass inside the bracketing cells around the grid optimum.
    a = max(lo, best - grid_resolution)
    b = min(hi, best + grid_resolution)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = prior.utility(x1), prior.utility(x2)
    for _ in range(80):
        if b - a < 1e-12:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = prior.utility(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = prior.utility(x1)
    refined = max([best, a, b, x1, x2], key=prior.utility)
    util = prior.utility(refined)

    h = max(grid_resolution * 1e-3, 1e-9)
    density = (float(prior.cdf(refined + h)) - float(prior.cdf(refined - h))) / (2 * h)
    foc = density * (prior.u_include - prior.u_withhold - refined) - float(
        prior.cdf(refined)
    )
    return BayesBountyResult(refined, util, foc)


@dataclass(frozen=True)
class AttackItem:
    """A candidate attack: incremental gain versus private capacity cost."""

    gain: float
    cost: float

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise ValueError("attack cost must be nonnegative")


@dataclass(frozen=True)
class KnapsackResult:
    selected: tuple[int, ...]
    total_gain: float
    total_cost: float


def knapsack_select(
    items: Sequence[AttackItem], capacity: float, cost_resolution: float = 1e-3
) -> KnapsackResult:
    """Exact 0-1 knapsack over attack candidates with a capacity budget.

    Costs are used as-is when integral, otherwise quantized to
    ``cost_resolution`` units before the dynamic program.  Items with
    nonpositive gain are never selected.
    """
    if capacity < 0:
        raise ValueError("capacity must be nonnegative")
    if cost_resolution <= 0:
        raise ValueError("cost resolution must be positive")

    integral = float(capacity).is_integer() and all(
        float(it.cost).is_integer() for it in items
    )
    unit = 1.0 if integral else cost_resolution
    cap = int(round(capacity / unit))
    if cap * max(len(items), 1) > 20_000_000:
        raise ValueError("capacity grid too fine; raise cost_resolution")

    usable = [
        (i, it, int(round(it.cost / unit)))
        for i, it in enumerate(items)
        if it.gain > 0
    ]
    usable = [(i, it, c) for (i, it, c) in usable if c <= cap]

    best = [0.0] * (cap + 1)
    choice: list[list[bool]] = [[False] * (cap + 1) for _ in usable]
    for row, (_, it, c) in enumerate(usable):
        prev = best[:]
        for budget in range(cap, c - 1, -1):
            cand = prev[budget - c] + it.gain
            if cand > prev[budget]:
                best[budget] = cand
                choice[row][budget] = True
    # back-walk the selections
    picked = []
    budget = cap
    for row in range(len(usable) - 1, -1, -1):
        if choice[row][budget]:
            idx, it, c = usable[row]
            picked.append(idx)
            budget -= c
    picked.sort()
    total_gain = sum(items[i].gain for i in picked)
    total_cost = sum(items[i].cost for i in picked)
    return KnapsackResult(tuple(picked), total_gain, total_cost)
