"""Command line front end.

Subcommands: gas (price a block), schedule (exact or greedy schedule plus a
Gantt rendering), check (fixtures and the property comparison matrix),
simulate (fee-market simulation).  Exit codes: 0 ok, 1 check failure,
2 usage or input error.

The environment variable PARAGAS_INSTANCE_CAP overrides the exact
scheduler's instance size cap.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import (BlockError, WeightTable, format_rational, parse_block,
                   to_rational)
from .feemarket import BaseFeeState, WorkloadConfig, simulate, workload
from .gcm import MECHANISMS, TABLE_MECHANISMS, PricingEnv
from .properties import (PROPERTIES, FixtureMismatch, evaluate_cell,
                         known_violations, load_expected_matrix,
                         run_fixture_suite)
from .render import gantt_svg, gantt_text
from .sampling import SamplerConfig
from .scheduler import (InstanceTooLarge, SchedulerConfig, greedy_schedule,
                        makespan, optimal_schedule, validate_schedule)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2

INSTANCE_CAP_ENV = "PARAGAS_INSTANCE_CAP"


class UsageError(Exception):
    pass


def _threads(value: str):
    if value == "unbounded":
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--threads must be an integer >= 2 or 'unbounded', got {value!r}")
    if n < 2:
        raise argparse.ArgumentTypeError("--threads must be >= 2")
    return n


def _scheduler_cfg(threads) -> SchedulerConfig:
    cap = os.environ.get(INSTANCE_CAP_ENV)
    if cap is None:
        return SchedulerConfig(threads=threads)
    try:
        cap_n = int(cap)
        if cap_n < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"{INSTANCE_CAP_ENV} must be a positive integer, "
                         f"got {cap!r}")
    return SchedulerConfig(threads=threads, instance_cap=cap_n)


def _load_block(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_block(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read block file: {exc}")


def _load_weights(path: str | None, fallback: WeightTable) -> WeightTable:
    if path is None:
        return fallback
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read weights file: {exc}")
    if not isinstance(data, dict):
        raise UsageError("weights file must be a JSON object")
    if set(data) <= {"weights", "default_weight"}:
        return WeightTable(weights=data.get("weights", {}),
                           default_weight=to_rational(
                               data.get("default_weight", 1)))
    return WeightTable(weights=data)


def _threads_label(threads) -> str:
    return "unbounded" if threads is None else threads


# ---------------------------------------------------------------------------
# gas


def cmd_gas(args) -> int:
    txs, file_weights = _load_block(args.block)
    weights = _load_weights(args.weights, file_weights)
    cfg = _scheduler_cfg(args.threads)
    env = PricingEnv(weights=weights, scheduler_cfg=cfg)
    per_tx = {tx.tx_id: env.gas(txs, tx, args.mech) for tx in txs}
    total = sum(per_tx.values(), Fraction(0))
    v = env.value(txs)
    report = {
        "mechanism": args.mech,
        "block_value": format_rational(v),
        "per_tx": {tx_id: format_rational(g)
                   for tx_id, g in sorted(per_tx.items())},
        "total": format_rational(total),
        "config": {"block": args.block,
                   "threads": _threads_label(args.threads),
                   "weights": args.weights,
                   "instance_cap": cfg.instance_cap},
    }
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(f"mechanism {args.mech}, threads {_threads_label(args.threads)}"
              f", block {args.block}")
        for tx_id, g in sorted(per_tx.items()):
            print(f"  {tx_id}: {format_rational(g)} (~{float(g):g})")
        print(f"total {format_rational(total)}, "
              f"v(T) = {format_rational(v)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# schedule


def cmd_schedule(args) -> int:
    txs, _ = _load_block(args.block)
    cfg = _scheduler_cfg(args.threads)
    if args.mode == "exact":
        schedule = optimal_schedule(txs, cfg)
    else:
        schedule = greedy_schedule(txs, cfg)
    report = validate_schedule(schedule, txs, cfg)
    assert report.valid, report.to_dict()
    if args.format == "svg":
        print(gantt_svg(schedule))
        return EXIT_OK
    if args.format == "text":
        print(f"mode {args.mode}, threads {_threads_label(args.threads)}, "
              f"block {args.block}")
        print(gantt_text(schedule))
        return EXIT_OK
    doc = {
        "starts": {tx_id: format_rational(s)
                   for tx_id, s in sorted(schedule.starts.items())},
        "makespan": format_rational(makespan(schedule)),
        "validity": report.to_dict(),
        "config": {"block": args.block, "mode": args.mode,
                   "threads": _threads_label(args.threads),
                   "instance_cap": cfg.instance_cap},
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    mechs = TABLE_MECHANISMS if args.mech in (None, "all") else (args.mech,)
    props = PROPERTIES if args.prop in (None, "all") else (args.prop,)
    for mech in mechs:
        if mech not in TABLE_MECHANISMS:
            raise UsageError(
                f"mechanism {args.mech!r} is not in the comparison matrix")
    for prop in props:
        if prop not in PROPERTIES:
            raise UsageError(f"unknown property {args.prop!r}")
    sampler = SamplerConfig(seed=args.seed)
    envs = {n: PricingEnv(scheduler_cfg=SchedulerConfig(threads=n))
            for n in sampler.threads}
    known = known_violations()
    expected = load_expected_matrix()["rows"]
    failures = []

    fixture_count = 0
    for mech in mechs:
        try:
            fixture_count += len(run_fixture_suite(mech))
        except FixtureMismatch as exc:
            failures.append(f"fixture mismatch ({mech}): {exc}")

    cells = {}
    for mech in mechs:
        for prop in props:
            cell = evaluate_cell(prop, mech, sampler, args.budget, envs, known)
            cells[f"{mech}/{prop}"] = cell
            want = expected[mech][prop]
            if cell.symbol != want:
                failures.append(f"matrix mismatch {mech}/{prop}: computed "
                                f"{cell.symbol}, expected {want}")

    doc = {
        "config": {"mechanisms": list(mechs), "properties": list(props),
                   "seed": args.seed, "budget": args.budget,
                   "sampler": {"max_txs": sampler.max_txs,
                               "key_pool": sampler.key_pool,
                               "time_range": list(sampler.time_range),
                               "threads": [_threads_label(t)
                                           for t in sampler.threads]}},
        "fixture_checks": fixture_count,
        "cells": {name: {"symbol": c.symbol, "trials": c.trials,
                         "strict": c.strict_count, "equal": c.equal_count,
                         "witness": c.witness}
                  for name, c in sorted(cells.items())},
        "failures": failures,
        "ok": not failures,
    }
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(f"seed {args.seed}, budget {args.budget}, "
              f"{fixture_count} fixture values checked")
        for name, cell in sorted(cells.items()):
            print(f"  {name}: {cell.symbol} ({cell.trials} trials)")
        for f in failures:
            print(f"  FAIL: {f}")
        print("ok" if not failures else "FAILED")
    return EXIT_OK if not failures else EXIT_CHECK_FAILURE


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    if args.workload is not None:
        try:
            with open(args.workload, encoding="utf-8") as fh:
                wl_cfg = WorkloadConfig.from_json(fh.read())
        except (OSError, json.JSONDecodeError, TypeError, BlockError) as exc:
            raise UsageError(f"cannot read workload config: {exc}")
        if args.seed is not None:
            wl_cfg = WorkloadConfig.from_dict(
                {**wl_cfg.__dict__, "seed": args.seed})
    else:
        wl_cfg = WorkloadConfig(seed=args.seed or 0)
    cfg = _scheduler_cfg(args.threads)
    env = PricingEnv(scheduler_cfg=cfg)
    state0 = BaseFeeState(base_fee=to_rational(args.base_fee),
                          target_gas=to_rational(args.target),
                          adjustment_denominator=args.denominator)
    gas_limit = to_rational(args.gas_limit)
    stream = workload(wl_cfg, args.blocks, args.mech, env)
    report = simulate(stream, args.blocks, args.mech, env, state0, gas_limit)
    if args.format == "json":
        doc = {
            "config": {"mechanism": args.mech, "blocks": args.blocks,
                       "seed": wl_cfg.seed, "gas_limit": args.gas_limit,
                       "target": args.target, "base_fee": args.base_fee,
                       "denominator": args.denominator,
                       "threads": _threads_label(args.threads)},
            "rows": [{"block_index": r.block_index,
                      "base_fee": format_rational(r.base_fee),
                      "gas_used": format_rational(r.gas_used),
                      "gas_limit": format_rational(r.gas_limit),
                      "makespan": format_rational(r.makespan),
                      "included_count": r.included_count}
                     for r in report.rows],
            "final_base_fee": format_rational(report.final_state.base_fee),
        }
        print(json.dumps(doc, indent=2))
    else:
        sys.stdout.write(report.to_csv())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paragas",
        description="Gas computation mechanisms for parallel execution: "
                    "exact makespan scheduling, block pricing, property "
                    "checks and a minimal fee market.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_gas = sub.add_parser("gas", help="price a block")
    p_gas.add_argument("block", help="block JSON file")
    p_gas.add_argument("--mech", default="current", choices=MECHANISMS)
    p_gas.add_argument("--threads", type=_threads, default=2,
                       metavar="N|unbounded")
    p_gas.add_argument("--weights", default=None,
                       help="JSON weights file (overrides block weights)")
    p_gas.add_argument("--format", default="json", choices=("json", "text"))
    p_gas.set_defaults(fn=cmd_gas)

    p_sched = sub.add_parser("schedule", help="schedule a block")
    p_sched.add_argument("block", help="block JSON file")
    p_sched.add_argument("--threads", type=_threads, default=2,
                         metavar="N|unbounded")
    p_sched.add_argument("--mode", default="exact",
                         choices=("exact", "greedy"))
    p_sched.add_argument("--format", default="json",
                         choices=("json", "text", "svg"))
    p_sched.set_defaults(fn=cmd_schedule)

    p_check = sub.add_parser(
        "check", help="run counterexample fixtures and the property matrix")
    p_check.add_argument("--mech", default="all")
    p_check.add_argument("--prop", default="all")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--budget", type=int, default=2000)
    p_check.add_argument("--format", default="text",
                         choices=("json", "text"))
    p_check.set_defaults(fn=cmd_check)

    p_sim = sub.add_parser("simulate", help="run a fee-market simulation")
    p_sim.add_argument("--mech", default="current", choices=MECHANISMS)
    p_sim.add_argument("--blocks", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--workload", default=None,
                       help="workload config JSON file")
    p_sim.add_argument("--gas-limit", default="20")
    p_sim.add_argument("--target", default="10")
    p_sim.add_argument("--base-fee", default="1")
    p_sim.add_argument("--denominator", type=int, default=8)
    p_sim.add_argument("--threads", type=_threads, default=2,
                       metavar="N|unbounded")
    p_sim.add_argument("--format", default="csv", choices=("csv", "json"))
    p_sim.set_defaults(fn=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except (UsageError, BlockError, InstanceTooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
