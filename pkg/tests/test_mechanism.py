"""Pivotal bounty rule: ordering, allocation conservation, minimax weights."""

from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pivotk.mechanism import (
    BundleRecord,
    DecodeNotReached,
    WeightRule,
    minimax_certificate,
    pivotal_allocation,
    removal_floor,
    resolve_order,
    ticket_hash_of,
)


def rec(slot, lane, ticket=None, owner="honest", admissible=True):
    return BundleRecord(slot, lane, ticket or (0, slot, lane), owner, admissible)


class TestResolveOrder:
    def test_duplicate_ticket_dropped(self):
        first = rec(1, 2, ticket="t1")
        dup = rec(3, 9, ticket="t1")
        assert resolve_order([dup, first]) == [first]

    def test_sorted_admissible_input_is_identity(self):
        records = [rec(1, 1), rec(1, 5), rec(2, 3)]
        assert resolve_order(records) == records

    def test_order_is_input_permutation_invariant(self):
        records = [rec(2, 7), rec(1, 9), rec(1, 2), rec(3, 1), rec(2, 2)]
        expected = sorted(records, key=lambda r: (r.slot, r.lane, r.ticket_hash))
        for perm in itertools.permutations(records):
            assert resolve_order(perm) == expected

    def test_non_admissible_ignored(self):
        keep = [rec(1, 3), rec(2, 4)]
        noise = [rec(1, 1, admissible=False), rec(1, 9, ticket="copy", admissible=False)]
        assert resolve_order(noise + keep) == keep

    def test_hash_tiebreak_within_cell(self):
        a = rec(1, 1, ticket="aaa")
        b = rec(1, 1, ticket="bbb")
        expected_first = min(a, b, key=lambda r: r.ticket_hash)
        assert resolve_order([a, b])[0] == expected_first

    def test_distinct_tickets_with_colliding_keys_rejected(self):
        class Opaque:
            def __init__(self, tag):
                self.tag = tag

            def __repr__(self):  # identical reprs force identical hashes
                return "opaque-ticket"

        a = rec(1, 1, ticket=Opaque("a"))
        b = rec(1, 1, ticket=Opaque("b"))
        with pytest.raises(ValueError, match="collide"):
            resolve_order([a, b])

    def test_hash_is_deterministic(self):
        assert ticket_hash_of((0, 1, 2)) == ticket_hash_of((0, 1, 2))
        assert ticket_hash_of((0, 1, 2)) != ticket_hash_of((0, 1, 3))


class TestPivotalAllocation:
    def test_divisible_uniform_payments(self):
        ordered = [rec(1, lane) for lane in range(1, 8)]
        alloc = pivotal_allocation(ordered, K=10, s=2, B=1)
        assert alloc.kappa == 5
        assert [e.payment for e in alloc.entries] == [Fraction(1, 5)] * 5
        assert alloc.total_paid == 1

    def test_partial_final_bundle(self):
        ordered = [rec(1, lane) for lane in range(1, 5)]
        alloc = pivotal_allocation(ordered, K=10, s=4, B=1)
        assert alloc.kappa == 3
        assert alloc.r_idx == 2
        assert [float(e.payment) for e in alloc.entries] == [0.4, 0.4, 0.2]
        assert alloc.total_paid == 1

    def test_decode_not_reached(self):
        ordered = [rec(1, lane) for lane in range(1, 3)]
        with pytest.raises(DecodeNotReached):
            pivotal_allocation(ordered, K=3, s=1, B=5)

    def test_bundles_beyond_threshold_unpaid(self):
        ordered = [rec(1, lane) for lane in range(1, 10)]
        alloc = pivotal_allocation(ordered, K=4, s=1, B=8)
        assert len(alloc.entries) == 4
        assert {e.lane for e in alloc.entries} == {1, 2, 3, 4}

    def test_conservation_randomized(self):
        rng = random.Random(7)
        for _ in range(300):
            s = rng.randint(1, 9)
            kappa = rng.randint(1, 25)
            K = (kappa - 1) * s + rng.randint(1, s)
            B = rng.randint(1, 10**6)
            ordered = [rec(1, lane) for lane in range(1, kappa + rng.randint(1, 4))]
            alloc = pivotal_allocation(ordered, K, s, B)
            assert alloc.total_paid == Fraction(B)

    def test_insensitive_to_non_admissible_stuffing(self):
        ordered = [rec(1, lane) for lane in range(1, 6)]
        stuffed = resolve_order(
            ordered + [rec(1, 1, ticket="x", admissible=False) for _ in range(10)]
        )
        base = pivotal_allocation(ordered, 5, 1, 7)
        again = pivotal_allocation(stuffed, 5, 1, 7)
        assert base == again

    def test_json_rows(self):
        ordered = [rec(1, 1, owner="cartel"), rec(1, 2)]
        alloc = pivotal_allocation(ordered, 2, 1, 3)
        rows = json.loads(alloc.to_json_rows())
        assert rows[0] == {
            "rank": 1,
            "lane": 1,
            "owner": "cartel",
            "payment_numerator": 3,
            "payment_denominator": 2,
        }

    def test_cartel_share(self):
        ordered = [rec(1, 1, owner="cartel"), rec(1, 2), rec(1, 3, owner="cartel")]
        alloc = pivotal_allocation(ordered, 3, 1, 9)
        assert alloc.paid_to("cartel") == 6
        assert alloc.paid_to("honest") == 3


class TestWeightRules:
    def test_uniform_floor(self):
        rule = WeightRule.uniform(12)
        for d in range(1, 13):
            assert removal_floor(rule, d) == Fraction(d, 12)

    def test_concentrated_rule_floor_zero(self):
        rule = WeightRule.from_weights([1, 0, 0, 0])
        assert removal_floor(rule, 1) == 0

    def test_floor_matches_subset_minimum(self):
        rng = random.Random(3)
        for _ in range(50):
            raw = [rng.randint(0, 20) for _ in range(5)]
            if sum(raw) == 0:
                raw[0] = 1
            rule = WeightRule.from_weights(raw)
            brute = min(
                sum(subset, Fraction(0))
                for subset in itertools.combinations(rule.weights, 2)
            )
            assert removal_floor(rule, 2) == brute

    def test_out_of_range_rejected(self):
        rule = WeightRule.uniform(4)
        with pytest.raises(ValueError):
            removal_floor(rule, 0)
        with pytest.raises(ValueError):
            removal_floor(rule, 5)

    def test_rejects_unnormalized_or_negative(self):
        with pytest.raises(ValueError):
            WeightRule((Fraction(1, 2), Fraction(1, 3)))
        with pytest.raises(ValueError):
            WeightRule((Fraction(3, 2), Fraction(-1, 2)))

    def test_slot_decay_constructor(self):
        rule = WeightRule.slot_decayed(3, Fraction(1, 2))
        assert rule.weights == (Fraction(4, 7), Fraction(2, 7), Fraction(1, 7))

    @given(raw=st.lists(st.integers(0, 50), min_size=1, max_size=10))
    @settings(max_examples=200, deadline=None)
    def test_floor_never_exceeds_uniform(self, raw):
        if sum(raw) == 0:
            raw[0] = 1
        rule = WeightRule.from_weights(raw)
        for d in range(1, rule.kappa + 1):
            assert removal_floor(rule, d) <= Fraction(d, rule.kappa)


class TestMinimaxCertificate:
    def test_random_rules_bounded_with_unique_equality(self):
        rng = random.Random(11)
        kappa = 12
        rules = [WeightRule.uniform(kappa)]
        for _ in range(1000):
            raw = [rng.randint(0, 999) for _ in range(kappa)]
            if sum(raw) == 0:
                raw[0] = 1
            rules.append(WeightRule.from_weights(raw))
        for d in (1, 2, 3):
            report = minimax_certificate(kappa, d, rules)
            assert report.passed
            assert report.ceiling == Fraction(d, kappa)

    def test_single_rank_is_trivially_uniform(self):
        report = minimax_certificate(1, 1, [WeightRule.uniform(1)])
        assert report.passed
        assert report.ceiling == 1

    def test_perturbed_uniform_strictly_below(self):
        kappa = 10
        eps = Fraction(1, 1000)
        weights = [Fraction(1, kappa)] * kappa
        weights[0] += eps
        weights[1] -= eps
        rule = WeightRule(tuple(weights))
        for d in range(1, kappa):
            assert removal_floor(rule, d) < Fraction(d, kappa)

    def test_mismatched_rank_count_rejected(self):
        with pytest.raises(ValueError):
            minimax_certificate(5, 2, [WeightRule.uniform(4)])
