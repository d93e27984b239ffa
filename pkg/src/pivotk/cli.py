"""Command-line surface: tables, sweeps, property verification, and advice.

Exit codes: 0 success, 1 configuration/usage error, 2 property failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import delay, incentives, intra_slot, mechanism, ratchet, simulator
from .config import AnalysisConfig, ConfigError
from .geometry import ContactSchedule, SystemInstance, cartel_lane_count
from .incentives import EconParams
from .probability import DiscreteDistribution, HypergeomLaw
from .reporting import (
    displayed_fee_units,
    format_fee_units,
    format_percent,
    format_probability,
    format_usd,
    format_usd_small,
    format_usd_whole,
    render_csv,
    render_table,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PROPERTY = 2


def _load_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig.load(args.config) if args.config else AnalysisConfig.default()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "trials", None) is not None:
        d = cfg.to_dict()
        d["mc"]["trials"] = args.trials
        cfg = AnalysisConfig.from_dict(d)
    return cfg


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, cfg: AnalysisConfig, header, display_rows, raw_rows) -> str:
    if args.format == "table":
        return render_table(header, display_rows)
    if args.format == "csv":
        return render_csv(header, display_rows)
    return (
        json.dumps({"config": cfg.to_dict(), "rows": raw_rows}, indent=2, sort_keys=True)
        + "\n"
    )


# --- table commands ---------------------------------------------------------


def _main_table_rows(cfg: AnalysisConfig):
    inst0 = cfg.instance
    display, raw = [], []
    for kappa in cfg.table_kappas:
        inst = SystemInstance.from_kappa(inst0.n, inst0.m, kappa)
        schedule = ContactSchedule.static(inst)
        q0 = float(delay.exact_q0(inst, cfg.beta))
        q_rat = float(ratchet.q_rat_first_slot(schedule, inst.n, cfg.beta))
        q_micro = float(intra_slot.q_micro(inst, cfg.beta))
        b_static, _ = incentives.bounty_proxies(inst, cfg.beta, cfg.econ, q0, q_rat)
        b_shown = displayed_fee_units(b_static)
        usd = b_shown * cfg.usd_per_fee_unit
        display.append(
            [
                str(kappa),
                str(inst.t_star),
                str(inst.delta),
                format_probability(q0),
                format_probability(q_rat),
                format_probability(q_micro),
                format_fee_units(b_static),
                format_usd(usd),
            ]
        )
        raw.append(
            {
                "kappa": kappa,
                "t_star": inst.t_star,
                "delta": inst.delta,
                "q0": q0,
                "q_rat": q_rat,
                "q_micro": q_micro,
                "b_static": b_static,
                "b_static_usd": usd,
            }
        )
    return display, raw


def cmd_table_main(args) -> int:
    cfg = _load_config(args)
    header = ["kappa", "t_star", "delta", "q0", "q_rat", "q_micro", "B_static", "B_static_usd"]
    display, raw = _main_table_rows(cfg)
    _emit(args, _render(args, cfg, header, display, raw))
    return EXIT_OK


def cmd_table_coalition(args) -> int:
    cfg = _load_config(args)
    inst0 = cfg.instance
    header = ["kappa", "delta", "unilateral_safe", "equal_share", "B_coal", "B_static"]
    display, raw = [], []
    for kappa in cfg.table_kappas:
        inst = SystemInstance.from_kappa(inst0.n, inst0.m, kappa)
        q0 = float(delay.exact_q0(inst, cfg.beta))
        share = incentives.equal_share(cfg.econ, inst)
        b_coal = incentives.coalition_sufficient_bounty(inst, cfg.econ)
        b_static = cfg.econ.mev_exposure / cfg.beta * q0
        display.append(
            [
                str(kappa),
                str(inst.delta),
                "yes" if inst.delta > 0 else "no",
                f"{share:.1f}",
                "n/a" if b_coal is None else str(round(b_coal)),
                format_fee_units(b_static),
            ]
        )
        raw.append(
            {
                "kappa": kappa,
                "delta": inst.delta,
                "unilateral_safe": inst.delta > 0,
                "equal_share": share,
                "b_coal": b_coal,
                "b_static": b_static,
            }
        )
    _emit(args, _render(args, cfg, header, display, raw))
    return EXIT_OK


def cmd_table_cost(args) -> int:
    cfg = _load_config(args)
    inst = cfg.instance
    schedule = ContactSchedule.static(inst)
    q0 = float(delay.exact_q0(inst, cfg.beta))
    q_rat = float(ratchet.q_rat_first_slot(schedule, inst.n, cfg.beta))
    ratio = q_rat / cfg.beta
    # USD columns derive from the probabilities at displayed precision, so a
    # reader can reproduce every cell from the printed delay table.
    q0_shown = float(format_probability(q0).replace("~1", "1"))
    q_rat_shown = float(format_probability(q_rat).replace("~1", "1"))
    header = ["alpha_v_usd", "B_static_usd", "B_ratchet_usd", "ratio"]
    display, raw = [], []
    for tier in cfg.mev_tiers_usd:
        b_static = tier / cfg.beta * q0_shown
        b_ratchet = tier / cfg.beta * q_rat_shown
        display.append(
            [
                format_usd_whole(tier),
                format_usd_small(b_static),
                format_usd_small(b_ratchet),
                format_percent(ratio),
            ]
        )
        raw.append(
            {
                "alpha_v_usd": tier,
                "b_static_usd": b_static,
                "b_ratchet_usd": b_ratchet,
                "ratio": ratio,
            }
        )
    _emit(args, _render(args, cfg, header, display, raw))
    return EXIT_OK


# --- sweeps ------------------------------------------------------------------


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    rows = delay.sawtooth_sweep(
        cfg.instance.n, cfg.instance.m, cfg.beta, range(cfg.sweep_min, cfg.sweep_max + 1)
    )
    if args.format == "json":
        raw = [
            {
                "kappa": r.kappa,
                "t_star": r.t_star,
                "delta": r.delta,
                "q0": r.q0,
                "q_rat": r.q_rat,
                "q_micro": r.q_micro,
                "knife_edge": r.knife_edge,
            }
            for r in rows
        ]
        _emit(args, json.dumps({"config": cfg.to_dict(), "rows": raw}, indent=2) + "\n")
    elif args.format == "table":
        header = delay.SWEEP_CSV_HEADER.split(",")
        cells = [r.to_csv().split(",") for r in rows]
        _emit(args, render_table(header, cells))
    else:
        lines = [delay.SWEEP_CSV_HEADER]
        lines.extend(r.to_csv() for r in rows)
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _even_spread(delta: int, t_star: int) -> tuple[int, ...]:
    need = delta + 1
    base, extra = divmod(need, t_star)
    return tuple(base + (1 if i < extra else 0) for i in range(t_star))


def cmd_sweep_ratchet(args) -> int:
    cfg = _load_config(args)
    trials = cfg.trials
    lines = ["kappa,q0,q_rat,q_rat_multi_mc,ci_low,ci_high,epsilon"]
    epsilon = args.epsilon
    marked = cartel_lane_count(cfg.instance.n, cfg.beta)
    for kappa in range(cfg.sweep_min, cfg.sweep_max + 1):
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        if inst.t_star < 2:
            continue
        schedule = ContactSchedule.static(inst)
        q0 = float(delay.exact_q0(inst, cfg.beta))
        # first-slot bound at the configured honest-miss rate; at epsilon=0
        # this is exactly the ratchet tail P[A1 > delta_rec]
        first_slot_law = DiscreteDistribution.from_law(
            HypergeomLaw(inst.n, marked, inst.m)
        )
        q_rat = ratchet.honest_miss_delay_bound(schedule, epsilon, first_slot_law)
        spreads = [
            (inst.m,) + (0,) * (inst.t_star - 1),  # all in slot one
            _even_spread(inst.delta, inst.t_star),  # minimal need, spread out
        ]
        worst = None
        for spread in spreads:
            est = ratchet.ratchet_multi_slot_delay(
                inst, cfg.beta, spread, trials, cfg.seed
            )
            if worst is None or est.estimate > worst.estimate:
                worst = est
        lines.append(
            f"{kappa},{q0!r},{q_rat!r},{worst.estimate!r},"
            f"{worst.ci_low!r},{worst.ci_high!r},{epsilon!r}"
        )
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep_race(args) -> int:
    cfg = _load_config(args)
    race = intra_slot.RaceModel.exponential(
        cfg.race.slot_duration,
        cfg.race.seal_deadline,
        cfg.race.reaction_time,
        cfg.race.rate,
    )
    m = cfg.instance.m
    rho_bar, _, _ = intra_slot.worst_case_rho(race, m)
    lines = ["kappa,r,q_micro,g_inc_upper,g_inc_floor"]
    for kappa in range(cfg.sweep_min, cfg.sweep_max + 1):
        inst = SystemInstance.from_kappa(cfg.instance.n, m, kappa)
        upper = intra_slot.g_inc_upper(inst, cfg.beta, rho_bar, cfg.econ.gamma)
        tail = float(upper.feasibility_tail)
        rho_floor = float(intra_slot.rho_deadline(inst.r, inst.r, race))
        floor = intra_slot.g_inc_floor(inst, rho_floor, tail, cfg.econ.gamma)
        lines.append(f"{kappa},{inst.r},{tail!r},{upper.value!r},{floor!r}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def _suite_minimax(cfg: AnalysisConfig, inject_fault: bool) -> dict:
    rng = np.random.default_rng([cfg.seed, 11])
    kappa = 12
    rules = [mechanism.WeightRule.uniform(kappa)]
    for _ in range(999):
        raw = rng.integers(0, 1000, size=kappa)
        if raw.sum() == 0:
            raw[0] = 1
        rules.append(mechanism.WeightRule.from_weights([int(x) for x in raw]))
    if inject_fault:
        # Simulated implementation bug: an unnormalized rule slipped through.
        bad = mechanism.WeightRule.__new__(mechanism.WeightRule)
        object.__setattr__(
            bad, "weights", tuple(Fraction(2, kappa) for _ in range(kappa))
        )
        rules.append(bad)
    reports = [mechanism.minimax_certificate(kappa, d, rules) for d in (1, 2, 3)]
    return {
        "passed": all(r.passed for r in reports),
        "rules_checked": len(rules),
        "d_values": [1, 2, 3],
        "violations": sum(len(r.violations) for r in reports),
        "false_equalities": sum(len(r.false_equalities) for r in reports),
    }


def _suite_conservation(cfg: AnalysisConfig, triples: int = 300) -> dict:
    rng = np.random.default_rng([cfg.seed, 12])
    failures = 0
    for _ in range(triples):
        s = int(rng.integers(1, 9))
        kappa = int(rng.integers(1, 30))
        K = (kappa - 1) * s + int(rng.integers(1, s + 1))
        B = int(rng.integers(1, 10_000))
        count = -(-K // s) + int(rng.integers(0, 5))
        records = [
            mechanism.BundleRecord(1, lane + 1, (0, 1, lane + 1), "honest")
            for lane in range(count)
        ]
        alloc = mechanism.pivotal_allocation(records, K, s, B)
        if alloc.total_paid != Fraction(B):
            failures += 1
    return {"passed": failures == 0, "triples": triples, "failures": failures}


def _suite_pathwise(cfg: AnalysisConfig) -> dict:
    detail = {}
    ok = True
    sabotage_inst = SystemInstance.from_kappa(10, 3, 6)
    sabotage_econ = EconParams.normalized(fee=1.0, alpha_v=30.0, gamma=0.9, bounty=12.0)
    for kappa in cfg.table_kappas:
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        report = simulator.verify_pathwise_theorems(
            inst, cfg.beta, trials=cfg.trials, seed=[cfg.seed, kappa]
        )
        ok = ok and report.passed
        detail[str(kappa)] = {
            "paths": report.dominance_paths,
            "dominance_violations": report.dominance_violations,
            "prefix_violations": report.prefix_violations,
        }
    sab = simulator.minimal_sabotage_exhaustive(
        sabotage_inst, 0.3, sabotage_econ, paths=25, seed=[cfg.seed, 13]
    )
    ok = ok and sab.passed
    detail["sabotage"] = {
        "instance": sabotage_inst.to_config(),
        "paths_with_delay_option": sab.paths_with_delay_option,
        "violations": sab.violations,
    }
    return {"passed": ok, **detail}


def _suite_bound_dominance(cfg: AnalysisConfig) -> dict:
    failures = []
    marked = cartel_lane_count(cfg.instance.n, cfg.beta)
    beta_frac = marked / cfg.instance.n
    for kappa in range(cfg.sweep_min, cfg.sweep_max + 1):
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        q0 = float(delay.exact_q0(inst, cfg.beta))
        theta0 = inst.delta / (inst.t_star * inst.m)
        if theta0 > beta_frac:
            report = delay.fluid_delay_report(inst, cfg.beta, 0.0)
            if report.kl_bound is not None and report.exact_probability > report.kl_bound + 1e-12:
                failures.append(kappa)
        bound = delay.no_delay_upper(inst, cfg.beta)
        if (1.0 - q0) > bound + 1e-12:
            failures.append(kappa)
    return {"passed": not failures, "failures": failures}


def _suite_ratchet_improvement(cfg: AnalysisConfig) -> dict:
    rows = delay.sawtooth_sweep(
        cfg.instance.n, cfg.instance.m, cfg.beta, range(cfg.sweep_min, cfg.sweep_max + 1)
    )
    weak = [r.kappa for r in rows if r.q_rat > r.q0 + 1e-15]
    strict = [
        r.kappa
        for r in rows
        if r.t_star >= 2 and not r.knife_edge and not r.q_rat < r.q0
    ]
    return {
        "passed": not weak and not strict,
        "weak_failures": weak,
        "strict_failures": strict,
    }


def _suite_honest_miss(cfg: AnalysisConfig) -> dict:
    failures = []
    for kappa in range(cfg.sweep_min, cfg.sweep_max + 1):
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        schedule = ContactSchedule.static(inst)
        marked = cartel_lane_count(inst.n, cfg.beta)
        law = DiscreteDistribution.from_law(HypergeomLaw(inst.n, marked, inst.m))
        with_miss = ratchet.honest_miss_delay_bound(schedule, 0.0, law)
        q_rat = float(ratchet.q_rat_first_slot(schedule, inst.n, cfg.beta))
        if abs(with_miss - q_rat) > 1e-12:
            failures.append(kappa)
    return {"passed": not failures, "failures": failures}


def _suite_mc_exact(cfg: AnalysisConfig) -> dict:
    detail = {}
    ok = True
    for kappa in cfg.table_kappas:
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        q0 = float(delay.exact_q0(inst, cfg.beta))
        if q0 < 1e-4:
            detail[str(kappa)] = {"skipped": "q0 below MC resolution"}
            continue
        est = simulator.estimate_delay(
            inst, cfg.beta, simulator.FullWithhold(), cfg.trials, [cfg.seed, kappa]
        )
        err = abs(est.frequency - q0)
        tol = 3.0 * max(est.stderr, math.sqrt(q0 * (1 - q0) / cfg.trials))
        good = err <= tol
        ok = ok and good
        detail[str(kappa)] = {
            "exact": q0,
            "mc": est.frequency,
            "within_3_stderr": good,
        }
    return {"passed": ok, **detail}


def _suite_knife_edge(cfg: AnalysisConfig) -> dict:
    failures = []
    for kappa in range(cfg.sweep_min, cfg.sweep_max + 1):
        if kappa % cfg.instance.m != 0:
            continue
        inst = SystemInstance.from_kappa(cfg.instance.n, cfg.instance.m, kappa)
        closed = float(delay.knife_edge_q0(inst, cfg.beta))
        exact = float(delay.exact_q0(inst, cfg.beta))
        if abs(closed - exact) > 1e-12:
            failures.append(kappa)
    return {"passed": not failures, "failures": failures}


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    suites: dict[str, Callable[[], dict]] = {
        "minimax": lambda: _suite_minimax(cfg, args.inject_fault == "minimax"),
        "conservation": lambda: _suite_conservation(cfg),
        "pathwise": lambda: _suite_pathwise(cfg),
        "bound_dominance": lambda: _suite_bound_dominance(cfg),
        "ratchet_improvement": lambda: _suite_ratchet_improvement(cfg),
        "honest_miss": lambda: _suite_honest_miss(cfg),
        "mc_exact": lambda: _suite_mc_exact(cfg),
        "knife_edge_closed_form": lambda: _suite_knife_edge(cfg),
    }
    results = {}
    all_ok = True
    for name, runner in suites.items():
        outcome = runner()
        results[name] = outcome
        all_ok = all_ok and outcome["passed"]
    summary = {"seed": cfg.seed, "trials": cfg.trials, "passed": all_ok, "suites": results}
    _emit(args, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if all_ok else EXIT_PROPERTY


# --- advise ------------------------------------------------------------------


def cmd_advise(args) -> int:
    cfg = _load_config(args)
    inst = cfg.instance
    schedule = ContactSchedule.static(inst)
    q0 = float(delay.exact_q0(inst, cfg.beta))
    q_rat = float(ratchet.q_rat_first_slot(schedule, inst.n, cfg.beta))
    q_mic = float(intra_slot.q_micro(inst, cfg.beta))
    b_static, b_ratchet = incentives.bounty_proxies(inst, cfg.beta, cfg.econ, q0, q_rat)
    phi_star = incentives.phi_threshold(inst, cfg.beta, cfg.econ, q0)
    t0 = incentives.distribution_of_T0(inst, cfg.beta)
    ir_ceiling = incentives.sender_ir_bound(
        inst, cfg.beta, cfg.econ, q0, t0.expected_discount(cfg.econ.gamma)
    )

    report: dict = {
        "instance": inst.to_config(),
        "kappa": inst.kappa,
        "t_star": inst.t_star,
        "delta": inst.delta,
        "knife_edge": inst.knife_edge,
        "q0": q0,
        "q_rat": q_rat,
        "q_micro": q_mic,
        "b_static_proxy": b_static,
        "b_ratchet_proxy": b_ratchet,
        "phi_threshold": phi_star,
        "fees_alone_feasible": phi_star <= 1.0,
        "ir_bounty_ceiling": ir_ceiling,
    }
    lines = [
        f"instance: n={inst.n} m={inst.m} s={inst.s} K={inst.K} "
        f"(kappa={inst.kappa}, t*={inst.t_star}, delta={inst.delta})",
        f"delay probabilities: q0={format_probability(q0)} "
        f"q_rat={format_probability(q_rat)} q_micro={format_probability(q_mic)}",
    ]
    if inst.knife_edge:
        threshold = incentives.knife_edge_bounty_threshold(inst, cfg.beta, cfg.econ, q0)
        report["knife_edge_bounty"] = threshold.bounty_min
        lines.append(
            "avoid: knife edge (m | kappa); single-bundle sabotage is unilateral"
        )
        lines.append(
            f"knife-edge bounty threshold: {threshold.bounty_min:.0f} fee units"
        )
    else:
        b_coal = incentives.coalition_sufficient_bounty(inst, cfg.econ)
        report["coalition_bounty"] = b_coal
        lines.append(
            f"positive slack: unilateral withholding unprofitable; "
            f"coalition bounty {b_coal:.0f} fee units"
        )
    lines.append(
        f"fee share threshold phi* = {phi_star:.3f}"
        + ("" if phi_star <= 1.0 else "  (>1: fees alone infeasible)")
    )
    lines.append(
        f"bounty proxies: static {format_fee_units(b_static)}, "
        f"ratchet {format_fee_units(b_ratchet)} fee units"
    )
    lines.append(f"sender IR bounty ceiling: {ir_ceiling:.2f} fee units")

    if args.format == "json":
        _emit(args, json.dumps({"config": cfg.to_dict(), "report": report}, indent=2) + "\n")
    else:
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# --- simulate / replay -------------------------------------------------------


def _parse_policy(spec: str) -> simulator.AdversaryPolicy:
    kind, _, arg = spec.partition(":")
    if kind == "full_include":
        return simulator.FullInclude()
    if kind == "full_withhold":
        return simulator.FullWithhold()
    if kind == "stationary_w":
        return simulator.StationaryW(float(arg))
    if kind == "minimal_sabotage":
        return simulator.MinimalSabotage()
    if kind == "ratchet_spread":
        return simulator.RatchetSpread(tuple(int(x) for x in arg.split(",")))
    if kind == "scripted":
        return simulator.Scripted(tuple(int(x) for x in arg.split(",")))
    raise ConfigError(f"unknown policy spec {spec!r}")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    policy = _parse_policy(args.policy)
    lines = []
    for i in range(args.traces):
        trace = simulator.run_trace(cfg.instance, cfg.beta, policy, [cfg.seed, i])
        payoff = simulator.payoff_of_trace(trace, cfg.econ)
        lines.append(simulator.trace_to_json(trace, payoff, econ=cfg.econ))
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_replay(args) -> int:
    mismatches = 0
    total = 0
    with open(args.input, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            total += 1
            trace, stored, econ = simulator.trace_from_json_with_econ(line)
            if stored is None or econ is None:
                continue
            fresh = simulator.payoff_of_trace(trace, econ)
            if (
                fresh.fee_revenue != stored.fee_revenue
                or fresh.bounty_revenue != stored.bounty_revenue
                or fresh.mev_option != stored.mev_option
            ):
                mismatches += 1
    sys.stdout.write(
        json.dumps({"traces": total, "mismatches": mismatches}) + "\n"
    )
    return EXIT_OK if mismatches == 0 else EXIT_PROPERTY


# --- entry point -------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, formats=("table", "csv", "json")) -> None:
    p.add_argument("--config", help="path to a JSON analysis config")
    p.add_argument("--seed", type=int, help="override the config RNG seed")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--out", help="write output to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pivotk",
        description="Withholding-incentive analysis for coded multi-lane dissemination",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table-main", help="delay, ratchet, and race probabilities per kappa")
    _add_common(p)
    p.set_defaults(func=cmd_table_main)

    p = sub.add_parser("table-coalition", help="coalition decomposition per kappa")
    _add_common(p)
    p.set_defaults(func=cmd_table_coalition)

    p = sub.add_parser("table-cost", help="bounty cost in USD across MEV tiers")
    _add_common(p)
    p.set_defaults(func=cmd_table_cost)

    p = sub.add_parser("sweep", help="per-kappa delay sweep CSV for plotting")
    _add_common(p, formats=("csv", "json", "table"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sweep-ratchet", help="multi-slot ratchet Monte-Carlo sweep CSV")
    _add_common(p, formats=("csv",))
    p.add_argument("--trials", type=int, help="override MC trials per kappa")
    p.add_argument("--epsilon", type=float, default=0.0, help="honest miss rate column")
    p.set_defaults(func=cmd_sweep_ratchet)

    p = sub.add_parser("sweep-race", help="within-slot race bound sweep CSV")
    _add_common(p, formats=("csv",))
    p.set_defaults(func=cmd_sweep_race)

    p = sub.add_parser("verify", help="run the full property battery")
    _add_common(p, formats=("json",))
    p.add_argument("--trials", type=int, help="override MC trials")
    p.add_argument(
        "--inject-fault",
        choices=("minimax",),
        help="deliberately corrupt an input to prove the battery catches it",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("advise", help="operating-point recommendation")
    _add_common(p, formats=("text", "json"))
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("simulate", help="write traces as line-delimited JSON")
    _add_common(p, formats=("jsonl",))
    p.add_argument("--policy", default="full_withhold", help="e.g. stationary_w:0.5")
    p.add_argument("--traces", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="recompute payoffs from stored traces")
    p.add_argument("--input", required=True, help="trace JSONL file")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
