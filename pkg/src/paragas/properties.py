"""Executable mechanism properties, counterexample fixtures and the
mechanism-by-property comparison matrix.

Eight properties are checked; polynomial-time computability is documented in
the expected-matrix data file (complexity notes) and has no runtime check.
Satisfied cells are classified statistically ("no violation in N trials",
with per-sample strictness); violated cells always carry a replayable
witness.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable

from .core import (Transaction, TxSet, concatenate, format_rational, similar,
                   to_rational)
from .gcm import TABLE_MECHANISMS, PricingEnv
from .sampling import (SamplerConfig, rng_for, sample_keys, sample_time,
                       sample_transaction, sample_txset)
from .scheduler import SchedulerConfig

PROPERTIES = (
    "key_monotonicity",         # P1
    "time_monotonicity",        # P2
    "key_time_monotonicity",    # P3
    "set_inclusion",            # P4
    "bundling",                 # P5
    "scheduling_monotonicity",  # P6
    "efficiency",               # P7
    "easy_gas_estimation",      # P8
)

VIOLATED = "violated"
HOLDS_EQUAL = "holds_with_equality"
HOLDS_STRICT = "holds_strictly"
NOT_APPLICABLE = "not_applicable"


class MalformedInstance(ValueError):
    pass


class FixtureMismatch(AssertionError):
    pass


class MatrixMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class CheckOutcome:
    verdict: str
    strict_premise: bool
    witness: dict | None = None
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Instances


@dataclass(frozen=True)
class PairInstance:
    """For P1-P3 and P6: compare gas of tx1 in T+{tx1} vs tx2 in T+{tx2}."""
    base: TxSet
    tx1: Transaction
    tx2: Transaction


@dataclass(frozen=True)
class SetInclusionInstance:
    base: TxSet
    subset: TxSet
    superset: TxSet


@dataclass(frozen=True)
class BundlingInstance:
    base: TxSet
    tx1: Transaction
    tx2: Transaction
    bundled: Transaction


@dataclass(frozen=True)
class EfficiencyInstance:
    base: TxSet


@dataclass(frozen=True)
class EstimationInstance:
    block1: TxSet
    block2: TxSet
    tx: Transaction


def _tx_obj(tx: Transaction) -> dict:
    return {"id": tx.tx_id, "time": format_rational(tx.time),
            "keys": sorted(tx.keys)}


def _txset_obj(txs: TxSet) -> list:
    return [_tx_obj(tx) for tx in txs]


def _tx_from(obj: dict) -> Transaction:
    return Transaction(obj["id"], to_rational(obj["time"]),
                       frozenset(obj["keys"]))


def _txset_from(objs: Iterable[dict]) -> TxSet:
    return TxSet(_tx_from(o) for o in objs)


def instance_to_dict(instance) -> dict:
    if isinstance(instance, PairInstance):
        return {"base": _txset_obj(instance.base),
                "tx1": _tx_obj(instance.tx1), "tx2": _tx_obj(instance.tx2)}
    if isinstance(instance, SetInclusionInstance):
        return {"base": _txset_obj(instance.base),
                "subset": _txset_obj(instance.subset),
                "superset": _txset_obj(instance.superset)}
    if isinstance(instance, BundlingInstance):
        return {"base": _txset_obj(instance.base),
                "tx1": _tx_obj(instance.tx1), "tx2": _tx_obj(instance.tx2),
                "bundled": _tx_obj(instance.bundled)}
    if isinstance(instance, EfficiencyInstance):
        return {"base": _txset_obj(instance.base)}
    if isinstance(instance, EstimationInstance):
        return {"block1": _txset_obj(instance.block1),
                "block2": _txset_obj(instance.block2),
                "tx": _tx_obj(instance.tx)}
    raise MalformedInstance(f"unknown instance type {type(instance)!r}")


def instance_from_dict(prop: str, data: dict):
    if prop in ("key_monotonicity", "time_monotonicity",
                "key_time_monotonicity", "scheduling_monotonicity"):
        return PairInstance(_txset_from(data["base"]),
                            _tx_from(data["tx1"]), _tx_from(data["tx2"]))
    if prop == "set_inclusion":
        return SetInclusionInstance(_txset_from(data["base"]),
                                    _txset_from(data["subset"]),
                                    _txset_from(data["superset"]))
    if prop == "bundling":
        return BundlingInstance(_txset_from(data["base"]),
                                _tx_from(data["tx1"]), _tx_from(data["tx2"]),
                                _tx_from(data["bundled"]))
    if prop == "efficiency":
        return EfficiencyInstance(_txset_from(data["base"]))
    if prop == "easy_gas_estimation":
        return EstimationInstance(_txset_from(data["block1"]),
                                  _txset_from(data["block2"]),
                                  _tx_from(data["tx"]))
    raise MalformedInstance(f"unknown property {prop!r}")


# ---------------------------------------------------------------------------
# Property evaluation


def _check_pair_monotonicity(prop: str, mech: str, inst: PairInstance,
                             env: PricingEnv) -> CheckOutcome:
    tx1, tx2 = inst.tx1, inst.tx2
    if tx1.tx_id in inst.base or tx2.tx_id in inst.base:
        raise MalformedInstance("tx1/tx2 must not be in the base set")
    if prop == "key_monotonicity" and not (tx1.time == tx2.time
                                           and tx1.keys <= tx2.keys):
        raise MalformedInstance("P1 requires t1 = t2 and K1 subset of K2")
    if prop == "time_monotonicity" and not (tx1.time <= tx2.time
                                            and tx1.keys == tx2.keys):
        raise MalformedInstance("P2 requires t1 <= t2 and K1 = K2")
    if prop == "key_time_monotonicity" and not (tx1.time <= tx2.time
                                                and tx1.keys <= tx2.keys):
        raise MalformedInstance("P3 requires t1 <= t2 and K1 subset of K2")
    gas1 = env.gas(inst.base.with_txs(tx1), tx1, mech)
    gas2 = env.gas(inst.base.with_txs(tx2), tx2, mech)
    strict_premise = not similar(tx1, tx2)
    details = {"gas1": format_rational(gas1), "gas2": format_rational(gas2)}
    if gas1 > gas2:
        return CheckOutcome(VIOLATED, strict_premise,
                            instance_to_dict(inst), details)
    verdict = HOLDS_STRICT if gas1 < gas2 else HOLDS_EQUAL
    return CheckOutcome(verdict, strict_premise, None, details)


def _check_scheduling_monotonicity(mech: str, inst: PairInstance,
                                   env: PricingEnv) -> CheckOutcome:
    tx1, tx2 = inst.tx1, inst.tx2
    if tx1.tx_id in inst.base or tx2.tx_id in inst.base:
        raise MalformedInstance("tx1/tx2 must not be in the base set")
    block1 = inst.base.with_txs(tx1)
    block2 = inst.base.with_txs(tx2)
    v1, v2 = env.value(block1), env.value(block2)
    details = {"v1": format_rational(v1), "v2": format_rational(v2)}
    if not v1 < v2:  # the premise is the strict v-inequality
        return CheckOutcome(NOT_APPLICABLE, False, None, details)
    gas1 = env.gas(block1, tx1, mech)
    gas2 = env.gas(block2, tx2, mech)
    details.update(gas1=format_rational(gas1), gas2=format_rational(gas2))
    if gas1 > gas2:
        return CheckOutcome(VIOLATED, True, instance_to_dict(inst), details)
    verdict = HOLDS_STRICT if gas1 < gas2 else HOLDS_EQUAL
    return CheckOutcome(verdict, True, None, details)


def _check_set_inclusion(mech: str, inst: SetInclusionInstance,
                         env: PricingEnv) -> CheckOutcome:
    sub_ids, sup_ids = inst.subset.ids, inst.superset.ids
    if not sub_ids <= sup_ids:
        raise MalformedInstance("subset must be contained in superset")
    if sup_ids & inst.base.ids:
        raise MalformedInstance("superset must be disjoint from the base set")
    for tx_id in sub_ids:
        if inst.subset.get(tx_id) != inst.superset.get(tx_id):
            raise MalformedInstance("subset transactions must match superset")
    gas1 = env.block_gas(inst.base.union(inst.subset), inst.subset, mech)
    gas2 = env.block_gas(inst.base.union(inst.superset), inst.superset, mech)
    strict_premise = sub_ids != sup_ids
    details = {"gas1": format_rational(gas1), "gas2": format_rational(gas2)}
    if gas1 > gas2:
        return CheckOutcome(VIOLATED, strict_premise,
                            instance_to_dict(inst), details)
    verdict = HOLDS_STRICT if gas1 < gas2 else HOLDS_EQUAL
    return CheckOutcome(verdict, strict_premise, None, details)


def _check_bundling(mech: str, inst: BundlingInstance,
                    env: PricingEnv) -> CheckOutcome:
    tx1, tx2, tx3 = inst.tx1, inst.tx2, inst.bundled
    if {tx1.tx_id, tx2.tx_id, tx3.tx_id} & inst.base.ids:
        raise MalformedInstance("tx1/tx2/bundled must not be in the base set")
    if tx3.time != tx1.time + tx2.time or tx3.keys != tx1.keys | tx2.keys:
        raise MalformedInstance("bundled tx must be the concatenation")
    split_block = inst.base.with_txs(tx1, tx2)
    split = env.gas(split_block, tx1, mech) + env.gas(split_block, tx2, mech)
    bundled = env.gas(inst.base.with_txs(tx3), tx3, mech)
    details = {"split": format_rational(split),
               "bundled": format_rational(bundled)}
    if split > bundled:
        return CheckOutcome(VIOLATED, True, instance_to_dict(inst), details)
    verdict = HOLDS_STRICT if split < bundled else HOLDS_EQUAL
    return CheckOutcome(verdict, True, None, details)


def _check_efficiency(mech: str, inst: EfficiencyInstance,
                      env: PricingEnv) -> CheckOutcome:
    total = env.block_gas(inst.base, inst.base, mech)
    value = env.value(inst.base)
    details = {"total": format_rational(total),
               "value": format_rational(value)}
    if total != value:
        return CheckOutcome(VIOLATED, True, instance_to_dict(inst), details)
    return CheckOutcome(HOLDS_EQUAL, True, None, details)


def _check_estimation(mech: str, inst: EstimationInstance,
                      env: PricingEnv) -> CheckOutcome:
    if inst.tx.tx_id in inst.block1 or inst.tx.tx_id in inst.block2:
        raise MalformedInstance("tx must not be in either block")
    gas1 = env.gas(inst.block1.with_txs(inst.tx), inst.tx, mech)
    gas2 = env.gas(inst.block2.with_txs(inst.tx), inst.tx, mech)
    details = {"gas1": format_rational(gas1), "gas2": format_rational(gas2)}
    if gas1 != gas2:
        return CheckOutcome(VIOLATED, True, instance_to_dict(inst), details)
    return CheckOutcome(HOLDS_EQUAL, True, None, details)


def check_property(prop: str, mech: str, instance,
                   env: PricingEnv) -> CheckOutcome:
    if prop in ("key_monotonicity", "time_monotonicity",
                "key_time_monotonicity"):
        return _check_pair_monotonicity(prop, mech, instance, env)
    if prop == "scheduling_monotonicity":
        return _check_scheduling_monotonicity(mech, instance, env)
    if prop == "set_inclusion":
        return _check_set_inclusion(mech, instance, env)
    if prop == "bundling":
        return _check_bundling(mech, instance, env)
    if prop == "efficiency":
        return _check_efficiency(mech, instance, env)
    if prop == "easy_gas_estimation":
        return _check_estimation(mech, instance, env)
    raise MalformedInstance(f"unknown property {prop!r}")


# ---------------------------------------------------------------------------
# Random instance generation


def sample_instance(prop: str, rng, cfg: SamplerConfig):
    if prop in ("key_monotonicity", "time_monotonicity",
                "key_time_monotonicity", "scheduling_monotonicity"):
        base = sample_txset(rng, cfg, rng.randint(0, cfg.max_txs - 1))
        if prop == "scheduling_monotonicity":
            tx1 = sample_transaction(rng, cfg, "x1")
            tx2 = sample_transaction(rng, cfg, "x2")
        elif prop == "key_monotonicity":
            t = sample_time(rng, cfg)
            big = sample_keys(rng, cfg)
            small = frozenset(rng.sample(sorted(big),
                                         rng.randint(1, len(big))))
            tx1 = Transaction("x1", t, small)
            tx2 = Transaction("x2", t, big)
        elif prop == "time_monotonicity":
            keys = sample_keys(rng, cfg)
            t1 = sample_time(rng, cfg)
            tx1 = Transaction("x1", t1, keys)
            tx2 = Transaction("x2", t1 + rng.randint(0, 2), keys)
        else:
            big = sample_keys(rng, cfg)
            small = frozenset(rng.sample(sorted(big),
                                         rng.randint(1, len(big))))
            t1 = sample_time(rng, cfg)
            tx1 = Transaction("x1", t1, small)
            tx2 = Transaction("x2", t1 + rng.randint(0, 2), big)
        return PairInstance(base, tx1, tx2)
    if prop == "set_inclusion":
        # Empty bases matter here: equality cases of the property (same
        # makespan, whole block charged) only show up without background
        # transactions, so sample them often.
        if rng.random() < 0.5:
            base = TxSet()
        else:
            base = sample_txset(rng, cfg,
                                rng.randint(1, max(1, cfg.max_txs - 2)))
        sup_size = rng.randint(1, cfg.max_txs - len(base))
        superset = TxSet(sample_transaction(rng, cfg, f"x{i}")
                         for i in range(sup_size))
        sub_ids = [tx.tx_id for tx in superset
                   if rng.random() < 0.6]
        return SetInclusionInstance(base, superset.subset(sub_ids), superset)
    if prop == "bundling":
        base = sample_txset(rng, cfg, rng.randint(0, max(0, cfg.max_txs - 2)))
        tx1 = sample_transaction(rng, cfg, "x1")
        tx2 = sample_transaction(rng, cfg, "x2")
        return BundlingInstance(base, tx1, tx2, concatenate(tx1, tx2, "x3"))
    if prop == "efficiency":
        return EfficiencyInstance(sample_txset(rng, cfg))
    if prop == "easy_gas_estimation":
        block1 = sample_txset(rng, cfg,
                              rng.randint(0, cfg.max_txs - 1), prefix="a")
        block2 = sample_txset(rng, cfg,
                              rng.randint(0, cfg.max_txs - 1), prefix="b")
        return EstimationInstance(block1, block2,
                                  sample_transaction(rng, cfg, "x"))
    raise MalformedInstance(f"unknown property {prop!r}")


# ---------------------------------------------------------------------------
# Known violation witnesses (the appendix counterexamples, plus two
# constructed ones for mechanisms that price each transaction in isolation)


def _t(tx_id: str, time, keys) -> Transaction:
    return Transaction(tx_id, Fraction(time), frozenset(keys))


def known_violations() -> dict:
    """One concrete Violated instance per (mechanism, property) cell that the
    comparison matrix marks as violated."""
    lemma5 = PairInstance(TxSet([_t("f1", 1, {"k1"}), _t("f2", 3, {"k2"})]),
                          _t("x1", 2, {"k1"}), _t("x2", 1, {"k2"}))
    # A cheap transaction on a hot key raises the makespan more than an
    # expensive one on a free key; isolation pricing cannot see that.
    isolation = PairInstance(TxSet([_t("f1", 3, {"k1"})]),
                             _t("x1", 2, {"k2"}), _t("x2", 1, {"k1"}))
    estimation = EstimationInstance(
        TxSet(), TxSet([_t("a1", 1, {"k1"}), _t("a2", 1, {"k2"})]),
        _t("x", 1, {"k1"}))
    table: dict[tuple[str, str], object] = {
        ("current", "scheduling_monotonicity"): isolation,
        ("weighted_area", "scheduling_monotonicity"): isolation,
        ("shapley", "scheduling_monotonicity"): lemma5,
        ("banzhaf", "scheduling_monotonicity"): lemma5,
        ("tpm", "scheduling_monotonicity"): lemma5,
        ("shapley", "bundling"): BundlingInstance(
            TxSet([_t("f4", 1, {"k1"})]),
            _t("x1", 1, {"k2"}), _t("x2", 1, {"k2"}), _t("x3", 2, {"k2"})),
        ("esm", "bundling"): BundlingInstance(
            TxSet([_t("f4", 1, {"k1"})]),
            _t("x1", 1, {"k1"}), _t("x2", 1, {"k1"}), _t("x3", 2, {"k1"})),
        ("shapley", "set_inclusion"): SetInclusionInstance(
            TxSet([_t("f1", 1, {"k1"})]),
            TxSet([_t("x2", 1, {"k2"}), _t("x3", 1, {"k2"})]),
            TxSet([_t("x2", 1, {"k2"}), _t("x3", 1, {"k2"}),
                   _t("x4", 1, {"k1"})])),
        ("banzhaf", "set_inclusion"): SetInclusionInstance(
            TxSet(),
            TxSet([_t("x1", 1, {"k1"}), _t("x2", 1, {"k1"})]),
            TxSet([_t("x1", 1, {"k1"}), _t("x2", 1, {"k1"}),
                   _t("x3", 1, {"k2"})])),
        ("xsm", "set_inclusion"): SetInclusionInstance(
            TxSet(),
            TxSet([_t("x1", 1, {"k1"})]),
            TxSet([_t("x1", 1, {"k1"}), _t("x2", 1, {"k2"})])),
        ("current", "efficiency"): EfficiencyInstance(
            TxSet([_t("f1", 1, {"k1"}), _t("f2", 1, {"k2"})])),
        ("weighted_area", "efficiency"): EfficiencyInstance(
            TxSet([_t("f1", 1, {"k1"})])),
        ("banzhaf", "efficiency"): EfficiencyInstance(
            TxSet([_t("f1", 1, {"k1"}), _t("f2", 1, {"k1"}),
                   _t("f3", 1, {"k2"})])),
        ("xsm", "efficiency"): EfficiencyInstance(
            TxSet([_t("f1", 1, {"k1"})])),
    }
    for mech in ("shapley", "banzhaf", "tpm", "esm", "xsm"):
        table[(mech, "easy_gas_estimation")] = estimation
    return table


# ---------------------------------------------------------------------------
# Counterexample fixtures with the published exact numbers


@dataclass(frozen=True)
class FixtureResult:
    fixture: str
    label: str
    computed: Fraction
    expected: Fraction

    @property
    def ok(self) -> bool:
        return self.computed == self.expected


def _fr(f, label, computed, expected) -> FixtureResult:
    return FixtureResult(f, label, Fraction(computed), Fraction(expected))


def _fixture_f1(env: PricingEnv) -> list[FixtureResult]:
    # Scheduling-monotonicity violation for Shapley, Banzhaf and TPM.
    base = TxSet([_t("f1", 1, {"k1"}), _t("f2", 3, {"k2"})])
    tx3, tx4 = _t("x1", 2, {"k1"}), _t("x2", 1, {"k2"})
    b3, b4 = base.with_txs(tx3), base.with_txs(tx4)
    return [
        _fr("F1", "v with tx3", env.value(b3), 3),
        _fr("F1", "v with tx4", env.value(b4), 4),
        _fr("F1", "shapley tx3", env.gas(b3, tx3, "shapley"), 1),
        _fr("F1", "shapley tx4", env.gas(b4, tx4, "shapley"), Fraction(5, 6)),
        _fr("F1", "banzhaf tx3", env.gas(b3, tx3, "banzhaf"), 1),
        _fr("F1", "banzhaf tx4", env.gas(b4, tx4, "banzhaf"), Fraction(3, 4)),
        _fr("F1", "tpm tx3", env.gas(b3, tx3, "tpm"), 1),
        _fr("F1", "tpm tx4", env.gas(b4, tx4, "tpm"), Fraction(4, 5)),
    ]


def _fixture_f2(env: PricingEnv) -> list[FixtureResult]:
    # Banzhaf inefficiency: per-tx 3/4, 3/4, 1/4; total 7/4 while v = 2.
    block = TxSet([_t("f1", 1, {"k1"}), _t("f2", 1, {"k1"}),
                   _t("f3", 1, {"k2"})])
    return [
        _fr("F2", "banzhaf f1", env.gas(block, block.get("f1"), "banzhaf"),
            Fraction(3, 4)),
        _fr("F2", "banzhaf f2", env.gas(block, block.get("f2"), "banzhaf"),
            Fraction(3, 4)),
        _fr("F2", "banzhaf f3", env.gas(block, block.get("f3"), "banzhaf"),
            Fraction(1, 4)),
        _fr("F2", "banzhaf total", env.block_gas(block, block, "banzhaf"),
            Fraction(7, 4)),
        _fr("F2", "v", env.value(block), 2),
    ]


def _fixture_f3(env: PricingEnv) -> list[FixtureResult]:
    # Shapley bundling violation: split 10/6 > 3/2 bundled.
    base = TxSet([_t("f4", 1, {"k1"})])
    tx1, tx2, tx3 = _t("x1", 1, {"k2"}), _t("x2", 1, {"k2"}), _t("x3", 2, {"k2"})
    split_block = base.with_txs(tx1, tx2)
    split = (env.gas(split_block, tx1, "shapley")
             + env.gas(split_block, tx2, "shapley"))
    bundled = env.gas(base.with_txs(tx3), tx3, "shapley")
    return [_fr("F3", "shapley split", split, Fraction(10, 6)),
            _fr("F3", "shapley bundled", bundled, Fraction(3, 2))]


def _fixture_f4(env: PricingEnv) -> list[FixtureResult]:
    # ESM bundling violation: split 1 + 1 = 2 > 3/2 bundled.
    base = TxSet([_t("f4", 1, {"k1"})])
    tx1, tx2, tx3 = _t("x1", 1, {"k1"}), _t("x2", 1, {"k1"}), _t("x3", 2, {"k1"})
    split_block = base.with_txs(tx1, tx2)
    split = (env.gas(split_block, tx1, "esm")
             + env.gas(split_block, tx2, "esm"))
    bundled = env.gas(base.with_txs(tx3), tx3, "esm")
    return [_fr("F4", "esm split", split, 2),
            _fr("F4", "esm bundled", bundled, Fraction(3, 2))]


def _fixture_f5(env: PricingEnv) -> list[FixtureResult]:
    # Shapley set-inclusion violation: 5/6 + 5/6 = 10/6 > 36/24.
    base = TxSet([_t("f1", 1, {"k1"})])
    sub = TxSet([_t("x2", 1, {"k2"}), _t("x3", 1, {"k2"})])
    sup = sub.with_txs(_t("x4", 1, {"k1"}))
    return [
        _fr("F5", "shapley subset total",
            env.block_gas(base.union(sub), sub, "shapley"), Fraction(10, 6)),
        _fr("F5", "shapley superset total",
            env.block_gas(base.union(sup), sup, "shapley"), Fraction(36, 24)),
    ]


def _fixture_f6(env: PricingEnv) -> list[FixtureResult]:
    # Banzhaf set-inclusion violation: 2 > 7/4.
    sub = TxSet([_t("x1", 1, {"k1"}), _t("x2", 1, {"k1"})])
    sup = sub.with_txs(_t("x3", 1, {"k2"}))
    return [
        _fr("F6", "banzhaf subset total",
            env.block_gas(sub, sub, "banzhaf"), 2),
        _fr("F6", "banzhaf superset total",
            env.block_gas(sup, sup, "banzhaf"), Fraction(7, 4)),
    ]


def _fixture_f7(env: PricingEnv) -> list[FixtureResult]:
    # XSM set-inclusion violation: 1/3 > 2/9.
    sub = TxSet([_t("x1", 1, {"k1"})])
    sup = sub.with_txs(_t("x2", 1, {"k2"}))
    return [
        _fr("F7", "xsm subset total",
            env.block_gas(sub, sub, "xsm"), Fraction(1, 3)),
        _fr("F7", "xsm superset total",
            env.block_gas(sup, sup, "xsm"), Fraction(2, 9)),
    ]


def _fixture_f8(env: PricingEnv) -> list[FixtureResult]:
    # Current GCM inefficiency: total 2 while v = 1.
    block = TxSet([_t("f1", 1, {"k1"}), _t("f2", 1, {"k2"})])
    return [
        _fr("F8", "current total", env.block_gas(block, block, "current"), 2),
        _fr("F8", "v", env.value(block), 1),
    ]


_FIXTURES = {
    "F1": (_fixture_f1, ("shapley", "banzhaf", "tpm")),
    "F2": (_fixture_f2, ("banzhaf",)),
    "F3": (_fixture_f3, ("shapley",)),
    "F4": (_fixture_f4, ("esm",)),
    "F5": (_fixture_f5, ("shapley",)),
    "F6": (_fixture_f6, ("banzhaf",)),
    "F7": (_fixture_f7, ("xsm",)),
    "F8": (_fixture_f8, ("current",)),
}


def run_fixture_suite(mech: str | None = None,
                      thread_counts: tuple = (2, 3)) -> list[FixtureResult]:
    """Replay the hard-coded counterexamples, at each thread count, and
    check the published exact rationals.  Raises FixtureMismatch on any
    deviation."""
    results: list[FixtureResult] = []
    per_thread: dict[str, list[FixtureResult]] = {}
    for n in thread_counts:
        env = PricingEnv(scheduler_cfg=SchedulerConfig(threads=n))
        for name, (fn, mechs) in sorted(_FIXTURES.items()):
            if mech is not None and mech not in mechs:
                continue
            got = fn(env)
            prev = per_thread.get(name)
            if prev is not None and [(r.label, r.computed) for r in prev] != \
                    [(r.label, r.computed) for r in got]:
                raise FixtureMismatch(
                    f"{name}: outcome differs between thread counts")
            per_thread[name] = got
            if n == thread_counts[0]:
                results.extend(got)
    bad = [r for r in results if not r.ok]
    if bad:
        lines = ", ".join(f"{r.fixture} {r.label}: computed "
                          f"{format_rational(r.computed)} != expected "
                          f"{format_rational(r.expected)}" for r in bad)
        raise FixtureMismatch(lines)
    return results


# ---------------------------------------------------------------------------
# Randomized search and the comparison matrix


def _env_pool(cfg: SamplerConfig) -> dict:
    return {n: PricingEnv(scheduler_cfg=SchedulerConfig(threads=n))
            for n in cfg.threads}


def search_counterexample(prop: str, mech: str, cfg: SamplerConfig,
                          budget: int, envs: dict | None = None) -> dict | None:
    """First Violated witness within the trial budget, else None."""
    envs = envs or _env_pool(cfg)
    rng = rng_for(cfg, "search", mech, prop)
    for _ in range(budget):
        threads = rng.choice(cfg.threads)
        inst = sample_instance(prop, rng, cfg)
        outcome = check_property(prop, mech, inst, envs[threads])
        if outcome.verdict == VIOLATED:
            return {"property": prop, "mechanism": mech, "threads": threads,
                    "instance": outcome.witness, "expected": outcome.details}
    return None


@dataclass(frozen=True)
class MatrixCell:
    symbol: str
    trials: int
    strict_count: int
    equal_count: int
    applicable: int
    witness: dict | None = None


def _classify(prop: str, counts: dict) -> str:
    if prop in ("efficiency", "easy_gas_estimation"):
        return "yes"
    if counts["strict_premise"] and counts["strict_premise_equal"] == 0:
        return "<"
    if counts["equal"] == counts["applicable"]:
        return "="
    return "<="


def evaluate_cell(prop: str, mech: str, cfg: SamplerConfig, budget: int,
                  envs: dict, known: dict | None = None) -> MatrixCell:
    known = known if known is not None else known_violations()
    seeded = known.get((mech, prop))
    counts = {"applicable": 0, "equal": 0, "strict": 0,
              "strict_premise": 0, "strict_premise_equal": 0}
    witness = None
    rng = rng_for(cfg, "matrix", mech, prop)
    if seeded is not None:
        threads = cfg.threads[0]
        outcome = check_property(prop, mech, seeded, envs[threads])
        if outcome.verdict == VIOLATED:
            witness = {"property": prop, "mechanism": mech,
                       "threads": threads, "instance": outcome.witness,
                       "expected": outcome.details}
            return MatrixCell("x", 1, 0, 0, 1, witness)
    for trial in range(budget):
        threads = rng.choice(cfg.threads)
        inst = sample_instance(prop, rng, cfg)
        outcome = check_property(prop, mech, inst, envs[threads])
        if outcome.verdict == NOT_APPLICABLE:
            continue
        counts["applicable"] += 1
        if outcome.verdict == VIOLATED:
            witness = {"property": prop, "mechanism": mech,
                       "threads": threads, "instance": outcome.witness,
                       "expected": outcome.details}
            return MatrixCell("x", trial + 1, counts["strict"],
                              counts["equal"], counts["applicable"], witness)
        if outcome.verdict == HOLDS_STRICT:
            counts["strict"] += 1
        else:
            counts["equal"] += 1
        if outcome.strict_premise:
            counts["strict_premise"] += 1
            if outcome.verdict == HOLDS_EQUAL:
                counts["strict_premise_equal"] += 1
    return MatrixCell(_classify(prop, counts), budget, counts["strict"],
                      counts["equal"], counts["applicable"], None)


@dataclass(frozen=True)
class MatrixReport:
    sampler: SamplerConfig
    budget: int
    cells: dict  # (mech, prop) -> MatrixCell
    expected: dict  # mech -> prop -> symbol
    mismatches: tuple

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def raise_on_mismatch(self) -> None:
        if self.mismatches:
            raise MatrixMismatch("; ".join(
                f"{mech}/{prop}: computed {got} != expected {want}"
                for mech, prop, got, want in self.mismatches))

    def to_dict(self) -> dict:
        return {
            "sampler": {"seed": self.sampler.seed,
                        "max_txs": self.sampler.max_txs,
                        "key_pool": self.sampler.key_pool,
                        "time_range": list(self.sampler.time_range),
                        "threads": ["unbounded" if t is None else t
                                    for t in self.sampler.threads]},
            "budget": self.budget,
            "note": ("violated cells carry concrete witnesses; satisfied "
                     "cells mean no violation within the trial budget, with "
                     "sampled strictness classification"),
            "cells": {f"{mech}/{prop}": {
                "symbol": cell.symbol, "trials": cell.trials,
                "strict": cell.strict_count, "equal": cell.equal_count,
                "applicable": cell.applicable, "witness": cell.witness}
                for (mech, prop), cell in sorted(self.cells.items())},
            "expected": self.expected,
            "mismatches": [list(m) for m in self.mismatches],
        }


def load_expected_matrix() -> dict:
    with resources.files("paragas.data").joinpath(
            "expected_matrix.json").open(encoding="utf-8") as fh:
        return json.load(fh)


def property_matrix(mechs: Iterable[str] = TABLE_MECHANISMS,
                    cfg: SamplerConfig | None = None,
                    budget: int = 2000) -> MatrixReport:
    cfg = cfg or SamplerConfig()
    envs = _env_pool(cfg)
    known = known_violations()
    expected = load_expected_matrix()["rows"]
    cells: dict[tuple[str, str], MatrixCell] = {}
    mismatches = []
    for mech in mechs:
        for prop in PROPERTIES:
            cell = evaluate_cell(prop, mech, cfg, budget, envs, known)
            cells[(mech, prop)] = cell
            want = expected.get(mech, {}).get(prop)
            if want is not None and cell.symbol != want:
                mismatches.append((mech, prop, cell.symbol, want))
    return MatrixReport(cfg, budget, cells, expected, tuple(mismatches))


_SYMBOL_TEXT = {"x": "✗", "<": "<", "<=": "≤", "=": "=", "yes": "✓"}


def render_matrix_text(report: MatrixReport) -> str:
    mechs = sorted({mech for mech, _ in report.cells})
    mechs = [m for m in TABLE_MECHANISMS if m in mechs] + \
        [m for m in mechs if m not in TABLE_MECHANISMS]
    width = max(len(p) for p in PROPERTIES) + 2
    header = ("violated cells carry witnesses; satisfied cells are "
              f"\"no violation in {report.budget} trials\" "
              f"(seed {report.sampler.seed})")
    lines = [header, "", " " * width + "  ".join(f"{m:>13}" for m in mechs)]
    for prop in PROPERTIES:
        row = [f"{prop:<{width}}"]
        for mech in mechs:
            cell = report.cells.get((mech, prop))
            row.append(f"{_SYMBOL_TEXT.get(cell.symbol, cell.symbol):>13}")
        lines.append("  ".join(row))
    notes = load_expected_matrix()["poly_time_notes"]
    lines.append("")
    lines.append("poly-time computability (documented, not tested):")
    for mech in mechs:
        lines.append(f"  {mech}: {notes.get(mech, 'n/a')}")
    if report.mismatches:
        lines.append("")
        lines.append("MISMATCHES vs expected matrix:")
        for mech, prop, got, want in report.mismatches:
            lines.append(f"  {mech}/{prop}: computed {got}, expected {want}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Monotonicity decomposition consistency (P3 vs P1 + P2)


@dataclass(frozen=True)
class LemmaReport:
    mechanism: str
    trials: int
    p3_violations: int
    decomposed: int
    inconsistencies: tuple

    @property
    def ok(self) -> bool:
        return not self.inconsistencies


def check_lemma_consistency(mech: str, cfg: SamplerConfig,
                            budget: int) -> LemmaReport:
    """On sampled (T, tx1, tx2) with t1 <= t2 and K1 ⊆ K2, every combined
    monotonicity violation must decompose through the intermediate
    transaction (t1, K2) into a key-monotonicity or a time-monotonicity
    violation, and strict component behavior must compose strictly."""
    envs = _env_pool(cfg)
    rng = rng_for(cfg, "lemma", mech)
    p3_violations = decomposed = 0
    inconsistencies = []
    for trial in range(budget):
        threads = rng.choice(cfg.threads)
        env = envs[threads]
        inst = sample_instance("key_time_monotonicity", rng, cfg)
        tx1, tx2 = inst.tx1, inst.tx2
        mid = Transaction("x3!", tx1.time, tx2.keys)
        gas1 = env.gas(inst.base.with_txs(tx1), tx1, mech)
        gas2 = env.gas(inst.base.with_txs(tx2), tx2, mech)
        gas_mid = env.gas(inst.base.with_txs(mid), mid, mech)
        if gas1 > gas2:
            p3_violations += 1
            if gas1 > gas_mid or gas_mid > gas2:
                decomposed += 1
            else:
                inconsistencies.append(
                    ("undecomposable_violation", trial,
                     instance_to_dict(inst)))
        # Strict composition: strict component behavior on both legs forces
        # a strict combined conclusion whenever tx1 and tx2 differ.
        leg1_strict = similar(tx1, mid) or gas1 < gas_mid
        leg2_strict = similar(mid, tx2) or gas_mid < gas2
        if (not similar(tx1, tx2)) and leg1_strict and leg2_strict \
                and not gas1 < gas2:
            inconsistencies.append(
                ("strictness_composition", trial, instance_to_dict(inst)))
    return LemmaReport(mech, budget, p3_violations, decomposed,
                       tuple(inconsistencies))
