"""A minimal posted-price fee market on top of a gas computation mechanism.

Users submit bids (a transaction plus a maximum price per gas unit), blocks
are built greedily under a gas limit, everyone included pays gas * base_fee,
and the base fee adjusts toward a gas target after every block.

For mechanisms whose gas depends on the rest of the block, the declared gas
of a bid is an estimate (the transaction priced alone in an otherwise empty
block) and the real gas is recomputed once on the final included set.  No
fixed point is attempted; the per-transaction gap between estimate and final
gas is reported instead.  The estimate never understates the final total, so
the gas limit still binds.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .core import MalformedDocument, Transaction, TxSet, format_rational, to_rational
from .gcm import PricingEnv
from .sampling import rng_for


@dataclass(frozen=True)
class Bid:
    tx: Transaction
    max_price_per_gas: Fraction
    declared_gas: Fraction

    def __post_init__(self):
        if self.max_price_per_gas < 0:
            raise ValueError("max_price_per_gas must be >= 0")
        if self.declared_gas <= 0:
            raise ValueError("declared_gas must be > 0")


def make_bid(tx: Transaction, max_price_per_gas, mech: str,
             env: PricingEnv) -> Bid:
    """Bid with the declared gas set to the single-transaction estimate."""
    declared = env.gas(TxSet([tx]), tx, mech)
    return Bid(tx, to_rational(max_price_per_gas), declared)


@dataclass(frozen=True)
class BaseFeeState:
    base_fee: Fraction = Fraction(1)
    target_gas: Fraction = Fraction(10)
    adjustment_denominator: int = 8
    min_base_fee: Fraction = Fraction(1, 1000)

    def __post_init__(self):
        if self.base_fee <= 0 or self.target_gas <= 0:
            raise ValueError("base_fee and target_gas must be > 0")
        if self.adjustment_denominator < 1:
            raise ValueError("adjustment_denominator must be >= 1")
        if self.min_base_fee <= 0:
            raise ValueError("min_base_fee must be > 0")


def base_fee_update(state: BaseFeeState, gas_used: Fraction) -> BaseFeeState:
    deviation = (gas_used - state.target_gas) \
        / (state.target_gas * state.adjustment_denominator)
    new_fee = max(state.base_fee * (1 + deviation), state.min_base_fee)
    return replace(state, base_fee=new_fee)


@dataclass(frozen=True)
class BlockResult:
    included: TxSet
    per_tx_gas: dict      # id -> final gas
    per_tx_fee: dict      # id -> gas * base_fee
    per_tx_gap: dict      # id -> declared_gas - final gas
    gas_used: Fraction
    makespan: Fraction
    base_fee: Fraction


def build_block(mempool: list, gas_limit: Fraction, mech: str,
                env: PricingEnv, state: BaseFeeState) -> BlockResult:
    if gas_limit <= 0:
        raise ValueError("gas_limit must be > 0")
    eligible = [b for b in mempool if b.max_price_per_gas >= state.base_fee]
    eligible.sort(key=lambda b: (-b.max_price_per_gas, b.tx.tx_id))
    chosen: list[Bid] = []
    declared_total = Fraction(0)
    for bid in eligible:
        if declared_total + bid.declared_gas <= gas_limit:
            chosen.append(bid)
            declared_total += bid.declared_gas
    included = TxSet(b.tx for b in chosen)
    gas_map = {b.tx.tx_id: env.gas(included, b.tx, mech) for b in chosen}
    fees = {tx_id: g * state.base_fee for tx_id, g in gas_map.items()}
    gaps = {b.tx.tx_id: b.declared_gas - gas_map[b.tx.tx_id] for b in chosen}
    gas_used = sum(gas_map.values(), Fraction(0))
    return BlockResult(included, gas_map, fees, gaps, gas_used,
                       env.value(included), state.base_fee)


# ---------------------------------------------------------------------------
# Seeded workload generation and simulation


@dataclass(frozen=True)
class WorkloadConfig:
    seed: int = 0
    bids_per_block: int = 8
    time_range: tuple[int, int] = (1, 4)
    key_pool: int = 5
    max_keys_per_tx: int = 2
    price_range: tuple[int, int] = (1, 4)  # numerators over price_denominator
    price_denominator: int = 2

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadConfig":
        known = {"seed", "bids_per_block", "time_range", "key_pool",
                 "max_keys_per_tx", "price_range", "price_denominator"}
        extra = set(data) - known
        if extra:
            raise MalformedDocument(
                f"unknown workload fields: {sorted(extra)}")
        kwargs = dict(data)
        for f in ("time_range", "price_range"):
            if f in kwargs:
                kwargs[f] = tuple(kwargs[f])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "WorkloadConfig":
        return cls.from_dict(json.loads(text))


def workload(cfg: WorkloadConfig, blocks: int, mech: str, env: PricingEnv):
    """Deterministic bid stream: one list of bids per block."""
    rng = rng_for(cfg, "workload")
    for block_index in range(blocks):
        bids = []
        for i in range(cfg.bids_per_block):
            keys = frozenset(rng.sample(
                [f"k{j}" for j in range(1, cfg.key_pool + 1)],
                rng.randint(1, cfg.max_keys_per_tx)))
            tx = Transaction(f"b{block_index}_{i}",
                             Fraction(rng.randint(*cfg.time_range)), keys)
            price = Fraction(rng.randint(*cfg.price_range),
                             cfg.price_denominator)
            bids.append(make_bid(tx, price, mech, env))
        yield bids


@dataclass(frozen=True)
class BlockRow:
    block_index: int
    base_fee: Fraction
    gas_used: Fraction
    gas_limit: Fraction
    makespan: Fraction
    included_count: int


CSV_COLUMNS = ("block_index", "base_fee", "gas_used", "gas_limit",
               "makespan", "included_count")


@dataclass(frozen=True)
class SimulationReport:
    mechanism: str
    rows: tuple
    blocks: tuple = ()  # BlockResult per block, same order as rows
    final_state: BaseFeeState = field(default_factory=BaseFeeState)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([row.block_index,
                             format_rational(row.base_fee),
                             format_rational(row.gas_used),
                             format_rational(row.gas_limit),
                             format_rational(row.makespan),
                             row.included_count])
        return out.getvalue()


def simulate(bid_stream, blocks: int, mech: str, env: PricingEnv,
             state0: BaseFeeState, gas_limit: Fraction) -> SimulationReport:
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    state = state0
    rows: list[BlockRow] = []
    results: list[BlockResult] = []
    stream = iter(bid_stream)
    for block_index in range(blocks):
        mempool = next(stream, [])
        result = build_block(mempool, gas_limit, mech, env, state)
        rows.append(BlockRow(block_index, state.base_fee, result.gas_used,
                             gas_limit, result.makespan, len(result.included)))
        results.append(result)
        state = base_fee_update(state, result.gas_used)
    return SimulationReport(mech, tuple(rows), tuple(results), state)
