from fractions import Fraction

import pytest

from paragas import (InstanceTooLarge, Schedule, SchedulerConfig, TxSet,
                     ValueOracle, check_scheduler_axioms, greedy_schedule,
                     make_transaction, makespan, optimal_makespan,
                     optimal_schedule, subset_value_table, validate_schedule)
from paragas.sampling import SamplerConfig, rng_for, sample_transaction, \
    sample_txset

from exhaustive import exhaustive_makespan

N2 = SchedulerConfig(threads=2)
N3 = SchedulerConfig(threads=3)
UNB = SchedulerConfig(threads=None)


def tx(tx_id, time, keys):
    return make_transaction(tx_id, time, keys)


def fig5_block():
    return TxSet([
        tx("tx1", 2, ["k2", "k3", "k4", "k5", "k6", "k7", "k8"]),
        tx("tx2", 4, ["k2", "k3"]),
        tx("tx3", 5, ["k4", "k5", "k6"]),
        tx("tx4", 2, ["k7", "k8"]),
    ])


def test_four_tx_block_makespans():
    block = fig5_block()
    assert optimal_makespan(block, N3) == 7
    assert optimal_makespan(block, N2) == 8


def test_makespan_basics():
    assert makespan(Schedule(TxSet(), {})) == 0
    single = TxSet([tx("a", 3, ["k1"])])
    assert makespan(Schedule(single, {"a": Fraction(0)})) == 3


def test_validate_three_parallel_layout():
    block = fig5_block()
    starts = {"tx1": Fraction(0), "tx2": Fraction(2),
              "tx3": Fraction(2), "tx4": Fraction(2)}
    sched = Schedule(block, starts)
    assert makespan(sched) == 7
    assert validate_schedule(sched, block, N3).valid
    report = validate_schedule(sched, block, N2)
    assert not report.valid
    assert any(v.kind == "concurrency-exceeded" for v in report.violations)


def test_validate_conflict_overlap():
    block = TxSet([tx("a", 1, ["k1"]), tx("b", 1, ["k1"])])
    sched = Schedule(block, {"a": Fraction(0), "b": Fraction(0)})
    report = validate_schedule(sched, block, N2)
    assert not report.valid
    assert report.violations[0].kind == "conflict-overlap"


def test_validate_missing_and_unknown():
    block = TxSet([tx("a", 1, ["k1"])])
    report = validate_schedule(Schedule(block, {}), block, N2)
    assert any(v.kind == "missing-tx" for v in report.violations)
    report = validate_schedule(
        Schedule(block, {"a": Fraction(0), "zz": Fraction(0)}), block, N2)
    assert any(v.kind == "unknown-tx" for v in report.violations)


def test_back_to_back_conflicting_txs_are_valid():
    block = TxSet([tx("a", 1, ["k1"]), tx("b", 1, ["k1"])])
    sched = Schedule(block, {"a": Fraction(0), "b": Fraction(1)})
    assert validate_schedule(sched, block, N2).valid


def test_optimal_schedule_small_cases():
    single = TxSet([tx("a", 3, ["k1"])])
    sched = optimal_schedule(single, N2)
    assert sched.starts == {"a": Fraction(0)}
    pair = TxSet([tx("a", 1, ["k1"]), tx("b", 3, ["k2"])])
    assert optimal_makespan(pair, N2) == 3
    serial = TxSet([tx("a", 1, ["k1"]), tx("b", 1, ["k1"])])
    assert optimal_makespan(serial, N2) == 2
    disjoint = TxSet([tx("a", 1, ["k1"]), tx("b", 1, ["k2"])])
    assert optimal_makespan(disjoint, N2) == 1


def test_greedy_basics():
    assert greedy_schedule(TxSet(), N2).starts == {}
    units = TxSet([tx(f"t{i}", 1, [f"k{i}"]) for i in range(5)])
    assert makespan(greedy_schedule(units, UNB)) == 1
    block = fig5_block()
    sched = greedy_schedule(block, N3)
    assert validate_schedule(sched, block, N3).valid
    assert makespan(sched) >= 7


def test_instance_cap():
    big = TxSet([tx(f"t{i}", 1, [f"k{i}"]) for i in range(13)])
    with pytest.raises(InstanceTooLarge):
        optimal_schedule(big, N2)
    small_cap = SchedulerConfig(threads=2, instance_cap=3)
    with pytest.raises(InstanceTooLarge):
        optimal_schedule(TxSet([tx(f"t{i}", 1, [f"k{i}"])
                                for i in range(4)]), small_cap)


def test_thread_count_validation():
    with pytest.raises(ValueError):
        SchedulerConfig(threads=1)
    SchedulerConfig(threads=None)  # unbounded is fine


def test_subset_value_table_three_txs():
    block = TxSet([tx("tx1", 1, ["k1"]), tx("tx2", 1, ["k1"]),
                   tx("tx3", 1, ["k2"])])
    table = subset_value_table(block, N2)
    assert table.value(frozenset()) == 0
    for tx_id in block.ids:
        assert table.value(frozenset({tx_id})) == 1
    assert table.value(frozenset({"tx1", "tx2"})) == 2
    assert table.value(frozenset({"tx1", "tx3"})) == 1
    assert table.value(frozenset({"tx2", "tx3"})) == 1
    assert table.value(block.ids) == 2
    # monotone under subset growth
    items = sorted(table.values.items(), key=lambda kv: len(kv[0]))
    for ids, v in items:
        for other, w in items:
            if ids <= other:
                assert v <= w


def test_exact_matches_unpruned_exhaustive_search():
    cfg = SamplerConfig(seed=11, max_txs=5, key_pool=4)
    for i in range(60):
        rng = rng_for(cfg, "vs-exhaustive", i)
        txs = sample_txset(rng, cfg)
        for threads in (2, 3, None):
            got = optimal_makespan(txs, SchedulerConfig(threads=threads))
            want = exhaustive_makespan(txs, threads)
            assert got == want, (i, threads, txs)


def test_exact_beats_or_ties_greedy_and_sandwich_bounds():
    cfg = SamplerConfig(seed=5, max_txs=6, key_pool=5)
    for i in range(80):
        rng = rng_for(cfg, "sandwich", i)
        txs = sample_txset(rng, cfg)
        for scfg in (N2, N3):
            sched = optimal_schedule(txs, scfg)
            assert validate_schedule(sched, txs, scfg).valid
            v = makespan(sched)
            assert v <= makespan(greedy_schedule(txs, scfg))
            assert v <= txs.total_time()
            if len(txs):
                per_key = max(
                    (sum((t.time for t in txs if k in t.keys), Fraction(0))
                     for k in txs.all_keys()), default=Fraction(0))
                assert v >= per_key
                assert v >= txs.total_time() / scfg.threads
                assert v >= max(t.time for t in txs)


def test_unbounded_threads_only_conflicts_matter():
    txs = TxSet([tx(f"t{i}", 2, [f"k{i}"]) for i in range(6)])
    assert optimal_makespan(txs, UNB) == 2
    assert optimal_makespan(txs, N2) == 6


def test_scheduler_axioms_hold_for_exact_scheduler():
    cfg = SamplerConfig(seed=3, max_txs=4, key_pool=4)
    oracle = ValueOracle(N2)

    def sampler(i):
        rng = rng_for(cfg, "axioms", i)
        base = sample_txset(rng, cfg)
        return (base, sample_transaction(rng, cfg, "x1"),
                sample_transaction(rng, cfg, "x2"))

    report = check_scheduler_axioms(oracle.value, sampler, trials=200)
    assert report.passed, report.witnesses


def test_axiom_s1_non_strict_case():
    a = tx("a", 1, ["k1"])
    b = tx("b", 1, ["k2"])
    oracle = ValueOracle(UNB)
    assert oracle.value(TxSet([a])) == oracle.value(TxSet([a, b])) == 1


def test_value_oracle_memoizes_across_renamings():
    oracle = ValueOracle(N2)
    v1 = oracle.value(TxSet([tx("a", 1, ["k1"]), tx("b", 2, ["k1"])]))
    v2 = oracle.value(TxSet([tx("p", 2, ["k1"]), tx("q", 1, ["k1"])]))
    assert v1 == v2 == 3
    assert len(oracle._memo) == 1
