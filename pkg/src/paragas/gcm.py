"""Gas computation mechanisms behind one uniform interface.

``gas(block, tx, mechanism, ctx)`` returns the exact rational amount of gas
charged to ``tx`` when the block ``block`` is executed.  Mechanisms that are
independent of the rest of the block (current, weighted area, constant)
ignore the subset-value table; the others require it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import factorial

from .core import Transaction, TxSet, WeightTable
from .scheduler import (InstanceTooLarge, SchedulerConfig, SubsetValueTable,
                        ValueOracle, subset_value_table)

MECHANISMS = ("current", "weighted_area", "shapley", "banzhaf",
              "banzhaf_normalized", "tpm", "esm", "xsm", "constant")

# Mechanisms in the main property comparison (in presentation order).
TABLE_MECHANISMS = ("current", "weighted_area", "shapley", "banzhaf",
                    "tpm", "esm", "xsm")

# Mechanisms whose gas for a transaction never depends on the rest of the block.
EASY_ESTIMATION = frozenset({"current", "weighted_area", "constant"})

PERMUTATION_CAP = 8


class TxNotInSet(ValueError):
    pass


class SubsetNotContained(ValueError):
    pass


class MissingVTable(ValueError):
    pass


class NormalizationUndefined(ValueError):
    pass


@dataclass
class GcmContext:
    weights: WeightTable = field(default_factory=WeightTable)
    scheduler_cfg: SchedulerConfig = field(default_factory=SchedulerConfig)
    vtable: SubsetValueTable | None = None
    constant: Fraction = Fraction(1)
    include_current_term: bool = True  # the "+1" term of the weighted area formula


def _require_member(block: TxSet, tx: Transaction) -> None:
    if tx.tx_id not in block or block.get(tx.tx_id) != tx:
        raise TxNotInSet(f"transaction {tx.tx_id!r} is not in the block")


def _require_vtable(block: TxSet, ctx: GcmContext) -> SubsetValueTable:
    if ctx.vtable is None or ctx.vtable.base != block:
        raise MissingVTable("a subset-value table for the block is required")
    return ctx.vtable


def gas_current(block: TxSet, tx: Transaction) -> Fraction:
    _require_member(block, tx)
    return tx.time


def gas_weighted_area(block: TxSet, tx: Transaction, weights: WeightTable,
                      include_current_term: bool = True) -> Fraction:
    _require_member(block, tx)
    area = sum((weights.get(k) for k in tx.keys), Fraction(0))
    base = Fraction(1) if include_current_term else Fraction(0)
    return tx.time * (base + area)


def gas_constant(block: TxSet, tx: Transaction, constant: Fraction) -> Fraction:
    _require_member(block, tx)
    if constant <= 0:
        raise ValueError(f"constant must be > 0, got {constant}")
    return Fraction(constant)


def _shapley_subset(block: TxSet, tx: Transaction,
                    vtable: SubsetValueTable) -> Fraction:
    n = len(block)
    others = sorted(block.ids - {tx.tx_id})
    total = Fraction(0)
    nfact = factorial(n)
    for mask in range(1 << len(others)):
        chosen = frozenset(others[i] for i in range(len(others))
                           if mask >> i & 1)
        marginal = vtable.value(chosen | {tx.tx_id}) - vtable.value(chosen)
        assert marginal >= 0, "marginal contribution negative: v not monotone"
        weight = Fraction(factorial(len(chosen))
                          * factorial(n - len(chosen) - 1), nfact)
        total += weight * marginal
    return total


def _shapley_permutation(block: TxSet, tx: Transaction,
                         vtable: SubsetValueTable) -> Fraction:
    n = len(block)
    if n > PERMUTATION_CAP:
        raise InstanceTooLarge(
            f"|T| = {n} exceeds the permutation formulation cap "
            f"{PERMUTATION_CAP}")
    total = Fraction(0)
    for order in permutations(sorted(block.ids)):
        preceding = frozenset()
        for tx_id in order:
            if tx_id == tx.tx_id:
                total += (vtable.value(preceding | {tx_id})
                          - vtable.value(preceding))
                break
            preceding = preceding | {tx_id}
    return total / factorial(n)


def gas_shapley(block: TxSet, tx: Transaction, vtable: SubsetValueTable,
                formulation: str = "subset") -> Fraction:
    _require_member(block, tx)
    if formulation == "subset":
        return _shapley_subset(block, tx, vtable)
    if formulation == "permutation":
        return _shapley_permutation(block, tx, vtable)
    raise ValueError(f"unknown Shapley formulation {formulation!r}")


def gas_banzhaf(block: TxSet, tx: Transaction, vtable: SubsetValueTable,
                normalized: bool = False) -> Fraction:
    _require_member(block, tx)
    others = sorted(block.ids - {tx.tx_id})
    total = Fraction(0)
    for mask in range(1 << len(others)):
        chosen = frozenset(others[i] for i in range(len(others))
                           if mask >> i & 1)
        marginal = vtable.value(chosen | {tx.tx_id}) - vtable.value(chosen)
        assert marginal >= 0, "marginal contribution negative: v not monotone"
        total += marginal
    raw = total / 2 ** (len(block) - 1)
    if not normalized:
        return raw
    raw_total = sum((gas_banzhaf(block, other, vtable) for other in block),
                    Fraction(0))
    v_block = vtable.value(block.ids)
    if raw_total == 0:
        if v_block == 0:
            return raw
        raise NormalizationUndefined(
            "raw Banzhaf total is 0 but v(T) > 0")
    return raw * v_block / raw_total


def gas_tpm(block: TxSet, tx: Transaction, v_block: Fraction) -> Fraction:
    _require_member(block, tx)
    return tx.time / block.total_time() * v_block


def gas_esm(block: TxSet, tx: Transaction, v_block: Fraction) -> Fraction:
    _require_member(block, tx)
    return v_block / len(block)


def gas_xsm(block: TxSet, tx: Transaction, v_block: Fraction) -> Fraction:
    _require_member(block, tx)
    return v_block / 3 ** len(block)


def gas(block: TxSet, tx: Transaction, mechanism: str,
        ctx: GcmContext) -> Fraction:
    if mechanism == "current":
        return gas_current(block, tx)
    if mechanism == "weighted_area":
        return gas_weighted_area(block, tx, ctx.weights,
                                 ctx.include_current_term)
    if mechanism == "constant":
        return gas_constant(block, tx, ctx.constant)
    vtable = _require_vtable(block, ctx)
    if mechanism == "shapley":
        return gas_shapley(block, tx, vtable)
    if mechanism == "banzhaf":
        return gas_banzhaf(block, tx, vtable)
    if mechanism == "banzhaf_normalized":
        return gas_banzhaf(block, tx, vtable, normalized=True)
    v_block = vtable.value(block.ids)
    if mechanism == "tpm":
        return gas_tpm(block, tx, v_block)
    if mechanism == "esm":
        return gas_esm(block, tx, v_block)
    if mechanism == "xsm":
        return gas_xsm(block, tx, v_block)
    raise ValueError(f"unknown mechanism {mechanism!r}")


def price_block(block: TxSet, mechanism: str,
                ctx: GcmContext) -> dict[str, Fraction]:
    """Per-transaction gas for a whole block."""
    return {tx.tx_id: gas(block, tx, mechanism, ctx) for tx in block}


def block_gas(block: TxSet, subset: TxSet, mechanism: str,
              ctx: GcmContext) -> Fraction:
    """Total gas of the transactions in ``subset`` within block ``block``."""
    for tx in subset:
        if tx.tx_id not in block or block.get(tx.tx_id) != tx:
            raise SubsetNotContained(
                f"transaction {tx.tx_id!r} is not in the block")
    return sum((gas(block, tx, mechanism, ctx) for tx in subset), Fraction(0))


class PricingEnv:
    """Shared pricing environment: weights, scheduler config and a makespan
    oracle reused across many blocks (property checks price thousands of
    closely related blocks)."""

    def __init__(self, weights: WeightTable | None = None,
                 scheduler_cfg: SchedulerConfig | None = None,
                 constant: Fraction = Fraction(1)):
        self.weights = weights or WeightTable()
        self.scheduler_cfg = scheduler_cfg or SchedulerConfig()
        self.constant = constant
        self.oracle = ValueOracle(self.scheduler_cfg)
        self._vtables: dict[TxSet, SubsetValueTable] = {}

    def vtable_for(self, block: TxSet, full: bool) -> SubsetValueTable:
        # TPM/ESM/XSM only read v(T); skip the 2^|T| table for them.
        cached = self._vtables.get(block)
        if cached is not None and (not full
                                   or len(cached.values) == 2 ** len(block)):
            return cached
        if full:
            vtable = subset_value_table(block, self.scheduler_cfg, self.oracle)
        else:
            vtable = SubsetValueTable(block,
                                      {block.ids: self.oracle.value(block)})
        if len(self._vtables) > 4096:  # blocks rarely repeat across trials
            self._vtables.clear()
        self._vtables[block] = vtable
        return vtable

    def context_for(self, block: TxSet, mechanism: str) -> GcmContext:
        vtable = None
        if mechanism not in EASY_ESTIMATION:
            full = mechanism in ("shapley", "banzhaf", "banzhaf_normalized")
            vtable = self.vtable_for(block, full)
        return GcmContext(weights=self.weights,
                          scheduler_cfg=self.scheduler_cfg,
                          vtable=vtable, constant=self.constant)

    def gas(self, block: TxSet, tx: Transaction, mechanism: str) -> Fraction:
        return gas(block, tx, mechanism, self.context_for(block, mechanism))

    def block_gas(self, block: TxSet, subset: TxSet,
                  mechanism: str) -> Fraction:
        return block_gas(block, subset, mechanism,
                         self.context_for(block, mechanism))

    def value(self, block: TxSet) -> Fraction:
        return self.oracle.value(block)
