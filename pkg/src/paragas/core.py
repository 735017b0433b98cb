"""Domain types: transactions, transaction sets, weights, block (de)serialization.

Every quantity (execution time, weight, gas) is an exact rational.  Nothing in
this package ever goes through floating point, so all comparisons are exact.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple


class BlockError(ValueError):
    """Base class for malformed transactions or blocks."""


class EmptyKeySet(BlockError):
    pass


class NonPositiveTime(BlockError):
    pass


class DuplicateId(BlockError):
    pass


class MalformedDocument(BlockError):
    pass


class NonPositiveWeight(BlockError):
    pass


_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def to_rational(value: int | str | Fraction) -> Fraction:
    """Parse an exact rational given as an int, Fraction or "p/q" string."""
    if isinstance(value, bool):
        raise MalformedDocument(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value.strip())
        if m is None or m.group(2) == "0":
            raise MalformedDocument(f"not a rational: {value!r}")
        return Fraction(int(m.group(1)), int(m.group(2) or 1))
    raise MalformedDocument(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a rational as "p" or "p/q" (never a decimal)."""
    return str(Fraction(value))


@dataclass(frozen=True)
class Transaction:
    """A transaction abstracted to (execution time, locked storage keys).

    Identity is carried by ``tx_id``: two distinct transactions may share the
    same (time, keys) tuple.
    """

    tx_id: str
    time: Fraction
    keys: frozenset[str]

    def tuple_key(self) -> tuple[Fraction, tuple[str, ...]]:
        return (self.time, tuple(sorted(self.keys)))


def make_transaction(tx_id: str, time: int | str | Fraction,
                     keys: Iterable[str]) -> Transaction:
    t = to_rational(time)
    if t <= 0:
        raise NonPositiveTime(f"transaction {tx_id!r}: time must be > 0, got {t}")
    key_set = frozenset(str(k) for k in keys)
    if not key_set:
        raise EmptyKeySet(f"transaction {tx_id!r}: key set must be non-empty")
    return Transaction(str(tx_id), t, key_set)


def similar(tx1: Transaction, tx2: Transaction) -> bool:
    """Whether the two transactions have equal (time, keys) tuples."""
    return tx1.time == tx2.time and tx1.keys == tx2.keys


class Dominance(NamedTuple):
    less_or_similar: bool
    similar: bool


def dominates(tx1: Transaction, tx2: Transaction) -> Dominance:
    """tx1 precedes tx2 in the (time, keys) preorder: t1 <= t2 and K1 <= K2."""
    return Dominance(
        less_or_similar=tx1.time <= tx2.time and tx1.keys <= tx2.keys,
        similar=similar(tx1, tx2),
    )


def concatenate(tx1: Transaction, tx2: Transaction, tx_id: str) -> Transaction:
    """Sequential composition: executes tx1 then tx2 atomically."""
    return Transaction(str(tx_id), tx1.time + tx2.time, tx1.keys | tx2.keys)


class TxSet:
    """An immutable set of transactions with distinct ids (a block)."""

    __slots__ = ("txs", "_by_id")

    def __init__(self, txs: Iterable[Transaction] = ()):
        ordered = tuple(sorted(txs, key=lambda tx: tx.tx_id))
        by_id: dict[str, Transaction] = {}
        for tx in ordered:
            if tx.tx_id in by_id:
                raise DuplicateId(f"duplicate transaction id {tx.tx_id!r}")
            by_id[tx.tx_id] = tx
        object.__setattr__(self, "txs", ordered)
        object.__setattr__(self, "_by_id", by_id)

    def __setattr__(self, name, value):
        raise AttributeError("TxSet is immutable")

    def __len__(self) -> int:
        return len(self.txs)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.txs)

    def __contains__(self, item) -> bool:
        if isinstance(item, Transaction):
            return self._by_id.get(item.tx_id) is item or \
                self._by_id.get(item.tx_id) == item
        return item in self._by_id

    def __eq__(self, other) -> bool:
        return isinstance(other, TxSet) and self.txs == other.txs

    def __hash__(self) -> int:
        return hash(self.txs)

    def __repr__(self) -> str:
        return f"TxSet({list(self.txs)!r})"

    def get(self, tx_id: str) -> Transaction:
        return self._by_id[tx_id]

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(self._by_id)

    def with_txs(self, *extra: Transaction) -> "TxSet":
        return TxSet(self.txs + extra)

    def union(self, other: "TxSet") -> "TxSet":
        return TxSet(self.txs + other.txs)

    def subset(self, ids: Iterable[str]) -> "TxSet":
        wanted = set(ids)
        missing = wanted - set(self._by_id)
        if missing:
            raise KeyError(f"unknown transaction ids: {sorted(missing)}")
        return TxSet(tx for tx in self.txs if tx.tx_id in wanted)

    def total_time(self) -> Fraction:
        return sum((tx.time for tx in self.txs), Fraction(0))

    def all_keys(self) -> frozenset[str]:
        keys: set[str] = set()
        for tx in self.txs:
            keys |= tx.keys
        return frozenset(keys)

    def shape_key(self) -> tuple:
        """Canonical multiset of (time, keys) tuples; ids do not matter for
        scheduling, so this is the memoization key for makespans."""
        return tuple(sorted(tx.tuple_key() for tx in self.txs))


def fresh_key(used: Iterable[str], prefix: str = "k") -> str:
    """Mint a storage key outside the given set (the key universe is unbounded)."""
    used = set(used)
    i = 0
    while f"{prefix}!{i}" in used:
        i += 1
    return f"{prefix}!{i}"


@dataclass(frozen=True)
class WeightTable:
    """Positive per-key weights; keys absent from the map get default_weight."""

    weights: Mapping[str, Fraction] = None  # type: ignore[assignment]
    default_weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "weights", dict(self.weights or {}))
        object.__setattr__(self, "default_weight",
                           to_rational(self.default_weight))
        if self.default_weight <= 0:
            raise NonPositiveWeight(f"default weight must be > 0, "
                                    f"got {self.default_weight}")
        for key, w in self.weights.items():
            w = to_rational(w)
            self.weights[key] = w
            if w <= 0:
                raise NonPositiveWeight(f"weight of {key!r} must be > 0, got {w}")

    def get(self, key: str) -> Fraction:
        return self.weights.get(key, self.default_weight)


_BLOCK_FIELDS = {"transactions", "weights", "default_weight"}
_TX_FIELDS = {"id", "time", "keys"}


def parse_block(document: str) -> tuple[TxSet, WeightTable]:
    """Parse the block JSON format; enforces all transaction invariants."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedDocument("block document must be a JSON object")
    unknown = set(data) - _BLOCK_FIELDS
    if unknown:
        raise MalformedDocument(f"unknown block fields: {sorted(unknown)}")
    raw_txs = data.get("transactions")
    if not isinstance(raw_txs, list):
        raise MalformedDocument('"transactions" must be a list')
    txs = []
    for entry in raw_txs:
        if not isinstance(entry, dict):
            raise MalformedDocument("transaction entries must be objects")
        unknown = set(entry) - _TX_FIELDS
        if unknown:
            raise MalformedDocument(f"unknown transaction fields: "
                                    f"{sorted(unknown)}")
        try:
            tx_id = entry["id"]
            time = entry["time"]
            keys = entry["keys"]
        except KeyError as exc:
            raise MalformedDocument(f"transaction missing field {exc}") from exc
        if not isinstance(tx_id, str) or not isinstance(keys, list):
            raise MalformedDocument(f"bad transaction entry: {entry!r}")
        txs.append(make_transaction(tx_id, time, keys))
    raw_weights = data.get("weights", {})
    if not isinstance(raw_weights, dict):
        raise MalformedDocument('"weights" must be an object')
    weights = WeightTable(
        weights={k: to_rational(v) for k, v in raw_weights.items()},
        default_weight=to_rational(data.get("default_weight", 1)),
    )
    return TxSet(txs), weights


def render_block(txs: TxSet, weights: WeightTable | None = None) -> str:
    """Inverse of parse_block (up to JSON formatting)."""
    doc: dict = {
        "transactions": [
            {"id": tx.tx_id, "time": format_rational(tx.time),
             "keys": sorted(tx.keys)}
            for tx in txs
        ],
    }
    if weights is not None:
        doc["weights"] = {k: format_rational(w)
                          for k, w in sorted(weights.weights.items())}
        doc["default_weight"] = format_rational(weights.default_weight)
    return json.dumps(doc, indent=2)
