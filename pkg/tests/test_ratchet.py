"""Adaptive-sender ratchet: first-slot tails, pool shrinkage, honest misses."""

from __future__ import annotations

import pytest

from pivotk.delay import exact_q0
from pivotk.geometry import ContactSchedule, SystemInstance, derive_schedule
from pivotk.probability import DiscreteDistribution, HypergeomLaw
from pivotk.ratchet import (
    RatchetState,
    beta_shrink,
    honest_miss_delay_bound,
    q_rat_first_slot,
    ratchet_multi_slot_delay,
)


def contact_law_dist(n=100, marked=20, m=20):
    return DiscreteDistribution.from_law(HypergeomLaw(n, marked, m))


class TestFirstSlotTail:
    def test_two_slot_operating_point(self, table_instances, beta):
        schedule = ContactSchedule.static(table_instances[30])
        assert float(q_rat_first_slot(schedule, 100, beta)) == pytest.approx(
            8.0e-5, rel=5e-3
        )

    def test_knife_edge_single_contact_suffices(self, table_instances, beta):
        schedule = ContactSchedule.static(table_instances[100])
        assert schedule.delta_rec == 0
        assert float(q_rat_first_slot(schedule, 100, beta)) == pytest.approx(
            0.993, abs=5e-4
        )

    def test_recovery_slack_beyond_first_slot(self, beta):
        schedule = derive_schedule([20, 40], kappa=30)  # delta_rec = 30 > m1
        assert float(q_rat_first_slot(schedule, 100, beta)) == 0.0

    def test_time_varying_schedule_uses_first_slot_draws(self, beta):
        # over-contacting slot one both widens the draw and adds slack
        schedule = derive_schedule([25], kappa=20)
        law = HypergeomLaw(100, 20, 25)
        from pivotk.probability import hypergeom_tail_ge

        assert float(q_rat_first_slot(schedule, 100, beta)) == pytest.approx(
            float(hypergeom_tail_ge(law, 6)), rel=1e-12
        )

    def test_improves_on_static_for_multi_slot(self, beta):
        # strict improvement everywhere the horizon is multi-slot with slack
        for kappa in range(21, 121):
            inst = SystemInstance.from_kappa(100, 20, kappa)
            if inst.t_star < 2:
                continue
            schedule = ContactSchedule.static(inst)
            q_rat = float(q_rat_first_slot(schedule, 100, beta))
            q0 = float(exact_q0(inst, beta))
            assert q_rat <= q0 + 1e-15
            if not inst.knife_edge:
                assert q_rat < q0

    def test_coincides_for_single_slot(self, beta):
        for kappa in range(1, 21):
            inst = SystemInstance.from_kappa(100, 20, kappa)
            schedule = ContactSchedule.static(inst)
            assert float(q_rat_first_slot(schedule, 100, beta)) == pytest.approx(
                float(exact_q0(inst, beta)), rel=1e-12
            )


class TestBetaShrink:
    def test_no_flags(self):
        assert beta_shrink(100, 0.2, 0) == pytest.approx(0.2)

    def test_five_flags(self):
        assert beta_shrink(100, 0.2, 5) == pytest.approx(15 / 95)

    def test_cartel_exhausted(self):
        assert beta_shrink(100, 0.2, 20) == 0.0

    def test_overflag_rejected(self):
        with pytest.raises(ValueError):
            beta_shrink(100, 0.2, 21)

    def test_strictly_decreasing(self):
        values = [beta_shrink(100, 0.2, f) for f in range(21)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_state_effective_beta(self):
        state = RatchetState(eligible_count=95, flagged_count=5, cartel_remaining=15)
        assert state.effective_beta == pytest.approx(15 / 95)


class TestMultiSlotRatchet:
    def test_single_slot_horizon_rejected(self, table_instances, beta):
        with pytest.raises(ValueError):
            ratchet_multi_slot_delay(table_instances[10], beta, (1,), 10, 0)

    def test_no_withholding_never_delays(self, table_instances, beta):
        est = ratchet_multi_slot_delay(table_instances[30], beta, (0, 0), 500, 1)
        assert est.estimate == 0.0

    def test_bounded_by_static_exact(self, table_instances, beta):
        inst = table_instances[30]
        q0 = float(exact_q0(inst, beta))
        for spread in [(20, 0), (11, 0), (6, 5), (4, 4), (0, 20)]:
            est = ratchet_multi_slot_delay(inst, beta, spread, 2000, 7)
            assert est.static_exact == pytest.approx(q0, rel=1e-12)
            assert est.estimate <= q0 + 3 * max(est.stderr, 1e-4)

    def test_all_first_slot_spread_matches_first_slot_tail(self, beta):
        # With delta=2 the first-slot tail is large enough for MC to see.
        inst = SystemInstance.from_kappa(100, 20, 38)
        schedule = ContactSchedule.static(inst)
        q_rat = float(q_rat_first_slot(schedule, 100, beta))
        est = ratchet_multi_slot_delay(inst, beta, (20, 0), 4000, 11)
        assert est.ci_low - 0.02 <= q_rat <= est.ci_high + 0.02

    def test_reproducible(self, table_instances, beta):
        a = ratchet_multi_slot_delay(table_instances[30], beta, (6, 5), 300, 42)
        b = ratchet_multi_slot_delay(table_instances[30], beta, (6, 5), 300, 42)
        assert a == b


class TestHonestMissBound:
    def test_zero_rate_reduces_to_first_slot_tail(self, beta):
        for kappa in (25, 30, 38, 50):
            inst = SystemInstance.from_kappa(100, 20, kappa)
            schedule = ContactSchedule.static(inst)
            law = contact_law_dist()
            bound = honest_miss_delay_bound(schedule, 0.0, law)
            assert bound == pytest.approx(
                float(q_rat_first_slot(schedule, 100, beta)), abs=1e-12
            )

    def test_nondecreasing_in_miss_rate(self, table_instances):
        schedule = ContactSchedule.static(table_instances[30])
        law = contact_law_dist()
        values = [
            honest_miss_delay_bound(schedule, eps, law)
            for eps in (0.0, 0.005, 0.01, 0.05, 0.2, 0.5)
        ]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))

    def test_small_miss_rate_bracketed(self, table_instances, beta):
        schedule = ContactSchedule.static(table_instances[30])
        law = contact_law_dist()
        lo = honest_miss_delay_bound(schedule, 0.0, law)
        mid = honest_miss_delay_bound(schedule, 0.01, law)
        hi = honest_miss_delay_bound(schedule, 0.05, law)
        assert lo < mid < hi

    def test_certain_misses_saturate(self, table_instances):
        schedule = ContactSchedule.static(table_instances[30])
        law = contact_law_dist()
        assert honest_miss_delay_bound(schedule, 0.999, law) > 0.999999

    def test_nondecreasing_in_withholding_law(self, table_instances):
        schedule = ContactSchedule.static(table_instances[30])
        # point masses at increasing withheld counts dominate stochastically
        values = [
            honest_miss_delay_bound(
                schedule, 0.01, DiscreteDistribution(w, (1.0,), strict=True)
            )
            for w in (0, 4, 8, 12, 16, 20)
        ]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))

    def test_invalid_rate_rejected(self, table_instances):
        schedule = ContactSchedule.static(table_instances[30])
        with pytest.raises(ValueError):
            honest_miss_delay_bound(schedule, 1.0, contact_law_dist())
