"""Incentive closed forms: shares, thresholds, coalition bounds, Bayes, knapsack."""

from __future__ import annotations

import math
import random

import pytest

from pivotk.delay import exact_q0, fluid_delay_report
from pivotk.geometry import SystemInstance
from pivotk.incentives import (
    AttackItem,
    BountyPrior,
    EconParams,
    bayesian_optimal_bounty,
    bounty_gap_lower,
    bounty_proxies,
    coalition_loss_floor,
    coalition_sufficient_bounty,
    distribution_of_T0,
    equal_share,
    fee_revenue_upper,
    ic_stationary_check,
    ic_stationary_profile,
    knapsack_select,
    knife_edge_bounty_threshold,
    phi_threshold,
    pi_share,
    sender_ir_bound,
)

PAPER_ECON = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99)


class TestEconParams:
    def test_normalized_fields(self):
        assert PAPER_ECON.proposer_fee(1) == 1.0
        assert PAPER_ECON.mev_exposure == 100.0
        assert PAPER_ECON.bundle_price(1) == 1.0

    def test_byte_model_fee(self):
        econ = EconParams.byte_model(
            header_bytes=100,
            metadata_bytes=10,
            symbol_bytes=40,
            per_byte_price=0.01,
            proposer_share=0.5,
            alpha=0.5,
            value=200.0,
            gamma=0.99,
        )
        assert econ.bundle_bytes(4) == 100 + 4 * 50
        assert econ.bundle_price(4) == pytest.approx(3.0)
        assert econ.proposer_fee(4) == pytest.approx(1.5)
        assert econ.mev_exposure == pytest.approx(100.0)

    def test_mode_exclusivity(self):
        with pytest.raises(ValueError):
            EconParams(gamma=0.99, alpha=1.0, value=1.0, fee_unit=1.0, header_bytes=10)

    def test_config_round_trip(self):
        for econ in (
            PAPER_ECON,
            EconParams.byte_model(100, 10, 40, 0.01, 0.5, 0.5, 200.0, 0.99, bounty=3.0),
        ):
            assert EconParams.from_config(econ.to_config()) == econ


class TestShares:
    def test_pi_share_endpoints(self):
        assert pi_share(1.0, 0.2) == pytest.approx(0.2)
        assert pi_share(0.0, 0.2) == 0.0

    def test_pi_share_interior(self):
        assert pi_share(0.5, 0.2) == pytest.approx(0.1 / 0.9)

    def test_fee_revenue_upper(self):
        assert fee_revenue_upper(0.0, 0.2, 20, 1.0, 0.99) == 0.0
        assert fee_revenue_upper(1.0, 0.2, 20, 1.0, 0.99) == pytest.approx(400.0)
        assert fee_revenue_upper(1.0, 0.2, 20, 2.0, 0.99) == pytest.approx(800.0)

    def test_bounty_gap_lower(self, table_instances, beta):
        full = bounty_gap_lower(1.0, table_instances[100], beta, 100.0, 1.0)
        assert full == pytest.approx(-0.2 * 100)  # -m/kappa * B
        boundary = bounty_gap_lower(0.0, table_instances[100], beta, 100.0, 1.0)
        assert boundary == pytest.approx(0.0, abs=1e-12)
        small = SystemInstance.from_kappa(100, 20, 10)  # m/kappa = 2 > beta
        for w in (0.0, 0.5, 0.9):
            assert bounty_gap_lower(w, small, beta, 50.0, 0.99) < 0


class TestStationaryIC:
    def test_no_bounty_fails_under_positive_threat(self, table_instances, beta):
        econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=0.0)
        check = ic_stationary_check(table_instances[100], beta, econ, 0.0, q_w=0.993)
        assert not check.satisfied

    def test_no_threat_and_positive_gap_holds(self, table_instances, beta):
        econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=10.0)
        check = ic_stationary_check(table_instances[100], beta, econ, 0.0, q_w=0.0)
        assert check.satisfied

    def test_reference_point(self, table_instances, beta):
        econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=600.0)
        check = ic_stationary_check(table_instances[100], beta, econ, 0.0, q_w=0.993)
        assert check.lhs == pytest.approx(0.0, abs=1e-9)
        assert check.rhs == pytest.approx(99.3)
        assert not check.satisfied

    def test_monotone_in_bounty_when_gap_positive(self, beta):
        # At kappa=200 the share gap beta - pi(w) - m/kappa stays positive up
        # to w = 4/9; below that, raising the bounty only helps.
        inst = SystemInstance.from_kappa(100, 20, 200)
        q_w = float(exact_q0(inst, beta))
        margins = []
        for bounty in (0.0, 500.0, 1000.0, 5000.0):
            econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=bounty)
            margins.append(ic_stationary_check(inst, beta, econ, 0.2, q_w).margin)
        assert all(a < b for a, b in zip(margins, margins[1:]))

    def test_profile_reports_worst_margin(self, beta):
        inst = SystemInstance.from_kappa(100, 20, 200)
        econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=1000.0)
        checks, worst = ic_stationary_profile(
            inst, beta, econ, lambda w: fluid_delay_report(inst, beta, w).exact_probability
        )
        assert len(checks) == 101
        assert worst.margin == min(c.margin for c in checks)


class TestKnifeEdgeThreshold:
    def test_single_slot_operating_point(self, table_instances, beta):
        inst = table_instances[20]
        q0 = float(exact_q0(inst, beta))
        out = knife_edge_bounty_threshold(inst, beta, PAPER_ECON, q0)
        assert out.bounty_min == pytest.approx(2475, rel=0.01)
        assert abs(out.bounty_min - 2500) / 2500 < 0.05

    def test_five_slot_operating_point(self, table_instances, beta):
        inst = table_instances[100]
        out = knife_edge_bounty_threshold(inst, beta, PAPER_ECON, q0=0.993)
        assert out.bounty_min == pytest.approx(10370, rel=0.01)
        assert abs(out.bounty_min - 10000) / 10000 < 0.05
        exact = knife_edge_bounty_threshold(
            inst, beta, PAPER_ECON, float(exact_q0(inst, beta))
        )
        assert abs(exact.bounty_min - 10000) / 10000 < 0.05

    def test_decomposition_balances_at_threshold(self, table_instances, beta):
        inst = table_instances[20]
        q0 = float(exact_q0(inst, beta))
        out = knife_edge_bounty_threshold(inst, beta, PAPER_ECON, q0)
        deterrent = out.net_fee_sacrifice + out.bounty_discount_loss + out.lost_pivotal_share
        assert deterrent == pytest.approx(out.mev_option, rel=1e-9)

    def test_fees_alone_sufficient_gives_nonpositive(self, beta):
        # Needs beta*m*gamma < 1 so the windfall does not swamp the fee, and
        # alpha*v below f/gamma - beta*m*f; then no bounty is required.
        inst = SystemInstance.from_kappa(100, 4, 4)
        cheap = EconParams.normalized(fee=1.0, alpha_v=0.1, gamma=0.99)
        q0 = float(exact_q0(inst, beta))
        out = knife_edge_bounty_threshold(inst, beta, cheap, q0)
        assert out.bounty_min <= 0.0

    def test_positive_slack_rejected(self, table_instances, beta):
        with pytest.raises(ValueError):
            knife_edge_bounty_threshold(table_instances[30], beta, PAPER_ECON, 0.1)

    def test_monotonicities(self, beta):
        # nondecreasing in alpha*v and q0; nonincreasing in kappa
        inst20 = SystemInstance.from_kappa(100, 20, 20)
        by_av = [
            knife_edge_bounty_threshold(
                inst20, beta, EconParams.normalized(1.0, av, 0.99), 0.993
            ).bounty_min
            for av in (10, 50, 100, 500)
        ]
        assert all(a <= b for a, b in zip(by_av, by_av[1:]))
        by_q0 = [
            knife_edge_bounty_threshold(inst20, beta, PAPER_ECON, q).bounty_min
            for q in (0.2, 0.5, 0.9, 0.993)
        ]
        assert all(a <= b for a, b in zip(by_q0, by_q0[1:]))
        # Deeper knife edges need larger bounties: the per-position share
        # B/kappa thins out as kappa grows, so the threshold rises (the
        # single-slot point needs ~2.5k while the five-slot point needs ~10k).
        by_kappa = [
            knife_edge_bounty_threshold(
                SystemInstance.from_kappa(100, 20, 20 * t), beta, PAPER_ECON, 0.993
            ).bounty_min
            for t in (1, 2, 3, 5)
        ]
        assert all(a <= b for a, b in zip(by_kappa, by_kappa[1:]))


class TestCoalitionBounds:
    def test_reference_rows(self, table_instances, beta):
        assert coalition_sufficient_bounty(table_instances[10], PAPER_ECON) == pytest.approx(880.0)
        assert coalition_sufficient_bounty(table_instances[30], PAPER_ECON) == pytest.approx(2610.3)
        assert coalition_sufficient_bounty(table_instances[50], PAPER_ECON) == pytest.approx(4301.495)

    def test_knife_edge_not_applicable(self, table_instances):
        assert coalition_sufficient_bounty(table_instances[20], PAPER_ECON) is None
        assert coalition_sufficient_bounty(table_instances[100], PAPER_ECON) is None

    def test_zero_fee_limit(self, table_instances):
        econ = EconParams.normalized(fee=0.0, alpha_v=100.0, gamma=0.99)
        inst = table_instances[10]
        expected = inst.kappa * 100.0 * 0.99**inst.t_star
        assert coalition_sufficient_bounty(inst, econ) == pytest.approx(expected)

    def test_large_fee_floors_at_zero(self, table_instances):
        econ = EconParams.normalized(fee=50.0, alpha_v=100.0, gamma=0.99)
        assert coalition_sufficient_bounty(table_instances[10], econ) == 0.0

    def test_loss_floor(self, table_instances):
        inst = table_instances[30]  # delta=10, kappa=30
        econ = EconParams.normalized(fee=1.0, alpha_v=100.0, gamma=0.99, bounty=30.0)
        assert coalition_loss_floor(0, inst, econ) == 0.0
        assert coalition_loss_floor(7, inst, econ) == pytest.approx(7.0)
        assert coalition_loss_floor(11, inst, econ) == pytest.approx(11.0 + 1.0)
        assert coalition_loss_floor(15, inst, econ) == pytest.approx(15.0 + 5.0)

    def test_equal_share_rows(self, table_instances):
        expected = {10: 9.0, 20: 99.0, 30: 8.91, 50: 8.8209, 100: 95.099}
        for kappa, value in expected.items():
            assert equal_share(PAPER_ECON, table_instances[kappa]) == pytest.approx(
                value, rel=1e-3
            )


class TestPhiThreshold:
    def test_zero_threat(self, table_instances, beta):
        assert phi_threshold(table_instances[30], beta, PAPER_ECON, 0.0) == 0.0

    def test_linear_in_exposure(self, table_instances, beta):
        inst = table_instances[30]
        one = phi_threshold(inst, beta, EconParams.normalized(1.0, 1.0, 0.99), 0.136)
        hundred = phi_threshold(inst, beta, EconParams.normalized(1.0, 100.0, 0.99), 0.136)
        assert hundred == pytest.approx(100 * one)

    def test_reference_point_infeasible(self, table_instances, beta):
        value = phi_threshold(table_instances[30], beta, PAPER_ECON, 0.136)
        assert value == pytest.approx(1.6746, rel=1e-3)
        assert value > 1.0

    def test_single_slot_no_singularity(self, table_instances, beta):
        value = phi_threshold(table_instances[20], beta, PAPER_ECON, 0.993)
        assert math.isfinite(value) and value > 0


class TestInclusionTimeLaw:
    def test_no_cartel_point_mass(self, table_instances):
        law = distribution_of_T0(table_instances[30], 0.0)
        assert law.law.pmf(table_instances[30].t_star) == pytest.approx(1.0)
        assert law.delay_probability() == pytest.approx(0.0, abs=1e-15)

    def test_delay_probability_matches_exact_q0(self, table_instances, beta):
        for kappa in (10, 20, 30, 50, 100):
            inst = table_instances[kappa]
            law = distribution_of_T0(inst, beta)
            assert law.delay_probability() == pytest.approx(
                float(exact_q0(inst, beta)), abs=1e-12
            )

    def test_no_mass_before_horizon(self, table_instances, beta):
        law = distribution_of_T0(table_instances[50], beta)
        assert law.law.offset == table_instances[50].t_star

    def test_residual_negligible(self, table_instances, beta):
        law = distribution_of_T0(table_instances[100], beta)
        assert law.residual_mass < 1e-9

    def test_cap_too_small_names_sufficient_cap(self, table_instances, beta):
        with pytest.raises(ValueError, match="suffices"):
            distribution_of_T0(table_instances[100], beta, horizon_cap=6)

    def test_ir_bound_composition(self, table_instances, beta):
        inst = table_instances[30]
        q0 = float(exact_q0(inst, beta))
        law = distribution_of_T0(inst, beta)
        bound = sender_ir_bound(
            inst, beta, PAPER_ECON, q0, law.expected_discount(PAPER_ECON.gamma)
        )
        _, b_ratchet = bounty_proxies(inst, beta, PAPER_ECON, q0, 8.0e-5)
        assert bound > b_ratchet  # the ratchet-priced bounty is IR-affordable

    def test_ir_bound_degenerate(self, table_instances, beta):
        inst = table_instances[30]
        g_star = PAPER_ECON.gamma**inst.t_star
        assert sender_ir_bound(inst, beta, PAPER_ECON, 0.0, g_star) == pytest.approx(0.0)

    def test_ir_bound_monotone_in_exposure(self, table_instances, beta):
        inst = table_instances[30]
        values = [
            sender_ir_bound(
                inst, beta, EconParams.normalized(1.0, av, 0.99), 0.136, 0.97
            )
            for av in (1.0, 10.0, 100.0)
        ]
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestBountyProxies:
    def test_reference_values(self, table_instances, beta):
        q0_10 = float(exact_q0(table_instances[10], beta))
        b_static, _ = bounty_proxies(table_instances[10], beta, PAPER_ECON, q0_10, q0_10)
        assert b_static == pytest.approx(0.04, rel=5e-3)
        q0_50 = float(exact_q0(table_instances[50], beta))
        b_static, _ = bounty_proxies(table_instances[50], beta, PAPER_ECON, q0_50, 8.0e-5)
        assert round(b_static) == 350

    def test_mid_tier_ratchet_cost(self, table_instances, beta):
        econ = EconParams.normalized(fee=1.0, alpha_v=50.0, gamma=0.99)
        _, b_ratchet = bounty_proxies(
            table_instances[30], beta, econ, 0.136, 7.996483334308243e-05
        )
        assert b_ratchet == pytest.approx(0.02, rel=5e-3)
        assert b_ratchet / 50.0 == pytest.approx(4.0e-4, rel=5e-3)


class TestBayesianBounty:
    def test_uniform_prior_closed_form(self):
        prior = BountyPrior.uniform(0.0, 1.0, u_include=1.0, u_withhold=0.0)
        out = bayesian_optimal_bounty(prior, grid_resolution=1e-3)
        assert out.bounty == pytest.approx(0.5, abs=1e-3)
        assert out.utility == pytest.approx(0.25, abs=1e-6)
        assert out.foc_residual == pytest.approx(0.0, abs=1e-3)

    def test_point_prior_posts_exactly_threshold(self):
        prior = BountyPrior.point(0.3, u_include=1.0, u_withhold=0.0)
        out = bayesian_optimal_bounty(prior, grid_resolution=1e-3)
        assert out.bounty == pytest.approx(0.3, abs=1e-3)

    def test_withholding_preferred_posts_nothing(self):
        prior = BountyPrior.uniform(0.0, 1.0, u_include=0.2, u_withhold=0.9)
        out = bayesian_optimal_bounty(prior, grid_resolution=1e-3)
        assert out.bounty == 0.0


class TestKnapsack:
    def test_zero_capacity(self):
        items = [AttackItem(5.0, 1.0)]
        assert knapsack_select(items, 0).selected == ()

    def test_reference_point(self):
        items = [AttackItem(10, 5), AttackItem(6, 3), AttackItem(5, 3)]
        out = knapsack_select(items, 6)
        assert out.selected == (1, 2)
        assert out.total_gain == pytest.approx(11.0)

    def test_single_item(self):
        assert knapsack_select([AttackItem(3.0, 2.0)], 2).selected == (0,)
        assert knapsack_select([AttackItem(-3.0, 2.0)], 2).selected == ()
        assert knapsack_select([AttackItem(3.0, 5.0)], 2).selected == ()

    def test_negative_capacity_rejected(self):
        with pytest.raises(ValueError):
            knapsack_select([], -1.0)

    def test_fractional_costs(self):
        items = [AttackItem(4.0, 0.5), AttackItem(5.0, 0.75), AttackItem(3.0, 0.25)]
        out = knapsack_select(items, 1.0, cost_resolution=1e-3)
        assert out.total_gain == pytest.approx(8.0)  # items 1 and 2

    def test_matches_exhaustive_enumeration(self):
        rng = random.Random(5)
        for _ in range(60):
            size = rng.randint(1, 12)
            items = [
                AttackItem(rng.randint(-3, 15), rng.randint(0, 10)) for _ in range(size)
            ]
            capacity = rng.randint(0, 25)
            best = 0.0
            for mask in range(1 << size):
                chosen = [items[i] for i in range(size) if mask >> i & 1]
                if sum(it.cost for it in chosen) <= capacity:
                    best = max(best, sum(it.gain for it in chosen))
            assert knapsack_select(items, capacity).total_gain == pytest.approx(best)
