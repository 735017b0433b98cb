from fractions import Fraction

import pytest

from paragas import (BaseFeeState, Bid, PricingEnv, SchedulerConfig,
                     WorkloadConfig, base_fee_update, build_block, make_bid,
                     make_transaction, simulate, workload)
from paragas.core import MalformedDocument

N2 = SchedulerConfig(threads=2)


def tx(tx_id, time, keys):
    return make_transaction(tx_id, time, keys)


def env2():
    return PricingEnv(scheduler_cfg=N2)


def test_bid_validation():
    t = tx("a", 1, ["k1"])
    with pytest.raises(ValueError):
        Bid(t, Fraction(-1), Fraction(1))
    with pytest.raises(ValueError):
        Bid(t, Fraction(1), Fraction(0))


def test_declared_gas_is_singleton_estimate():
    e = env2()
    t = tx("a", 2, ["k1", "k2"])
    assert make_bid(t, 1, "current", e).declared_gas == 2
    assert make_bid(t, 1, "weighted_area", e).declared_gas == 6
    assert make_bid(t, 1, "shapley", e).declared_gas == 2
    assert make_bid(t, 1, "xsm", e).declared_gas == Fraction(2, 3)


def test_single_bid_included_and_fee_identity():
    e = env2()
    state = BaseFeeState(base_fee=Fraction(2), target_gas=Fraction(10))
    bid = make_bid(tx("a", 3, ["k1"]), 2, "current", e)
    result = build_block([bid], Fraction(10), "current", e, state)
    assert result.included.ids == {"a"}
    assert result.per_tx_gas["a"] == 3
    assert result.per_tx_fee["a"] == 6  # gas * base_fee
    assert result.gas_used == 3


def test_all_bids_below_base_fee_gives_empty_block():
    e = env2()
    state = BaseFeeState(base_fee=Fraction(5))
    bids = [make_bid(tx("a", 1, ["k1"]), "9/2", "current", e)]
    result = build_block(bids, Fraction(10), "current", e, state)
    assert len(result.included) == 0
    assert result.gas_used == 0
    assert result.makespan == 0


def test_greedy_fills_then_respects_capacity():
    # Weighted area, unit weights: gas 9 for (3,{k1,k2}) and gas 2 for
    # (1,{k3}); equal prices, limit 10: the 9 fits first, the 2 no longer does.
    e = env2()
    state = BaseFeeState(base_fee=Fraction(1))
    big = make_bid(tx("a", 3, ["k1", "k2"]), 1, "weighted_area", e)
    small = make_bid(tx("b", 1, ["k3"]), 1, "weighted_area", e)
    assert big.declared_gas == 9 and small.declared_gas == 2
    result = build_block([small, big], Fraction(10), "weighted_area", e, state)
    assert result.included.ids == {"a"}
    assert result.gas_used == 9


def test_price_ordering_beats_id_ordering():
    e = env2()
    state = BaseFeeState(base_fee=Fraction(1))
    cheap = make_bid(tx("a", 4, ["k1"]), 1, "current", e)
    rich = make_bid(tx("b", 4, ["k2"]), 3, "current", e)
    result = build_block([cheap, rich], Fraction(4), "current", e, state)
    assert result.included.ids == {"b"}


def test_non_easy_gas_recomputed_with_reported_gap():
    e = env2()
    state = BaseFeeState(base_fee=Fraction(1))
    bids = [make_bid(tx("a", 1, ["k1"]), 1, "shapley", e),
            make_bid(tx("b", 1, ["k2"]), 1, "shapley", e)]
    result = build_block(bids, Fraction(10), "shapley", e, state)
    # alone each costs 1; together the block's makespan 1 is split evenly
    assert result.per_tx_gas == {"a": Fraction(1, 2), "b": Fraction(1, 2)}
    assert result.per_tx_gap == {"a": Fraction(1, 2), "b": Fraction(1, 2)}
    assert result.gas_used == 1


def test_base_fee_update_formula():
    state = BaseFeeState(base_fee=Fraction(4), target_gas=Fraction(10))
    assert base_fee_update(state, Fraction(10)).base_fee == 4  # at target
    assert base_fee_update(state, Fraction(20)).base_fee == \
        Fraction(4) * Fraction(9, 8)
    assert base_fee_update(state, Fraction(0)).base_fee == \
        Fraction(4) * Fraction(7, 8)


def test_base_fee_floor():
    state = BaseFeeState(base_fee=Fraction(1, 900),
                         min_base_fee=Fraction(1, 1000))
    assert base_fee_update(state, Fraction(0)).base_fee == Fraction(1, 1000)


def test_zero_demand_decays_by_seven_eighths():
    e = env2()
    state0 = BaseFeeState(base_fee=Fraction(8), target_gas=Fraction(10))
    report = simulate(iter([]), 4, "current", e, state0, Fraction(20))
    fees = [row.base_fee for row in report.rows]
    assert fees == [Fraction(8), Fraction(7), Fraction(49, 8),
                    Fraction(343, 64)]
    assert all(row.gas_used == 0 and row.included_count == 0
               for row in report.rows)


def test_simulation_deterministic_and_capacity_bounded():
    cfg = WorkloadConfig(seed=7, bids_per_block=6)
    state0 = BaseFeeState(base_fee=Fraction(1), target_gas=Fraction(8))
    limit = Fraction(16)

    def run():
        e = env2()
        stream = workload(cfg, 30, "current", e)
        return simulate(stream, 30, "current", e, state0, limit)

    r1, r2 = run(), run()
    assert r1.to_csv() == r2.to_csv()
    for row in r1.rows:
        assert row.gas_used <= limit
    for result in r1.blocks:
        for tx_id, fee in result.per_tx_fee.items():
            assert fee == result.per_tx_gas[tx_id] * result.base_fee


def test_capacity_holds_for_block_dependent_mechanisms():
    cfg = WorkloadConfig(seed=3, bids_per_block=6, key_pool=3)
    limit = Fraction(8)
    for mech in ("shapley", "esm", "xsm", "tpm", "banzhaf"):
        e = env2()
        state0 = BaseFeeState(base_fee=Fraction(1), target_gas=Fraction(4))
        report = simulate(workload(cfg, 15, mech, e), 15, mech, e,
                          state0, limit)
        for row in report.rows:
            assert row.gas_used <= limit, mech


def test_simulation_csv_shape():
    e = env2()
    state0 = BaseFeeState()
    report = simulate(iter([]), 1, "current", e, state0, Fraction(20))
    lines = report.to_csv().strip().split("\n")
    assert lines[0] == ("block_index,base_fee,gas_used,gas_limit,"
                        "makespan,included_count")
    assert lines[1] == "0,1,0,20,0,0"
    with pytest.raises(ValueError):
        simulate(iter([]), 0, "current", e, state0, Fraction(20))


def test_workload_config_parsing():
    cfg = WorkloadConfig.from_json(
        '{"seed": 5, "bids_per_block": 3, "time_range": [1, 2],'
        ' "price_range": [1, 8], "price_denominator": 4}')
    assert cfg.seed == 5
    assert cfg.time_range == (1, 2)
    with pytest.raises(MalformedDocument):
        WorkloadConfig.from_json('{"seed": 1, "bogus": 2}')
