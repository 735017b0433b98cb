"""Concurrent schedules under the simple lock-based execution policy.

A schedule assigns each transaction a start time; a transaction holds all its
storage keys for the duration [start, start + t).  Validity means conflicting
transactions never overlap and at most n run at any instant.  The exact
minimum makespan v(T) is found by depth-first branch and bound over *active*
schedules (every start coincides with time 0 or some completion); some optimal
schedule is always active, so the search is complete.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import Transaction, TxSet, concatenate, fresh_key

UNBOUNDED = None


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SchedulerConfig:
    threads: int | None = 2  # None means unbounded
    instance_cap: int = 12

    def __post_init__(self):
        if self.threads is not None and self.threads < 2:
            raise ValueError(f"thread count must be >= 2, got {self.threads}")

    def has_capacity(self, running: int) -> bool:
        return self.threads is None or running < self.threads


@dataclass(frozen=True)
class Schedule:
    txs: TxSet
    starts: dict  # tx_id -> Fraction start time

    def end(self, tx_id: str) -> Fraction:
        return self.starts[tx_id] + self.txs.get(tx_id).time

    def intervals(self) -> list[tuple[str, Fraction, Fraction]]:
        return sorted((tx_id, start, start + self.txs.get(tx_id).time)
                      for tx_id, start in self.starts.items())


def makespan(schedule: Schedule) -> Fraction:
    if not schedule.starts:
        return Fraction(0)
    return max(start + schedule.txs.get(tx_id).time
               for tx_id, start in schedule.starts.items())


@dataclass(frozen=True)
class Violation:
    kind: str  # "missing-tx" | "unknown-tx" | "conflict-overlap" | "concurrency-exceeded"
    detail: str


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[Violation, ...]

    def to_dict(self) -> dict:
        return {"valid": self.valid,
                "violations": [{"kind": v.kind, "detail": v.detail}
                               for v in self.violations]}


def validate_schedule(schedule: Schedule, txs: TxSet,
                      cfg: SchedulerConfig) -> ValidityReport:
    violations: list[Violation] = []
    for tx in txs:
        if tx.tx_id not in schedule.starts:
            violations.append(Violation("missing-tx", tx.tx_id))
    for tx_id in schedule.starts:
        if tx_id not in txs:
            violations.append(Violation("unknown-tx", tx_id))
    if violations:
        return ValidityReport(False, tuple(violations))

    items = [(tx, schedule.starts[tx.tx_id]) for tx in txs]
    # Conflict exclusion: shared keys require disjoint open intervals.
    for i, (tx1, s1) in enumerate(items):
        for tx2, s2 in items[i + 1:]:
            if tx1.keys & tx2.keys:
                if s1 < s2 + tx2.time and s2 < s1 + tx1.time:
                    violations.append(Violation(
                        "conflict-overlap", f"{tx1.tx_id},{tx2.tx_id}"))
    # Concurrency cap: sweep over start instants.
    if cfg.threads is not None:
        for tx, start in items:
            running = sum(1 for other, s in items
                          if s <= start < s + other.time)
            if running > cfg.threads:
                violations.append(Violation(
                    "concurrency-exceeded", f"t={start} running={running}"))
                break
    return ValidityReport(not violations, tuple(violations))


def greedy_schedule(txs: TxSet, cfg: SchedulerConfig) -> Schedule:
    """Deterministic list scheduling: longest time first (ties by id); at each
    event time start every eligible transaction in list order."""
    order = sorted(txs, key=lambda tx: (-tx.time, tx.tx_id))
    starts: dict[str, Fraction] = {}
    running: list[tuple[Fraction, Transaction]] = []  # (end, tx)
    pending = list(order)
    clock = Fraction(0)
    while pending:
        locked: set[str] = set()
        for end, tx in running:
            locked |= tx.keys
        started = True
        while started:
            started = False
            for tx in list(pending):
                if cfg.has_capacity(len(running)) and not (tx.keys & locked):
                    starts[tx.tx_id] = clock
                    running.append((clock + tx.time, tx))
                    locked |= tx.keys
                    pending.remove(tx)
                    started = True
        if pending:
            clock = min(end for end, _ in running)
            running = [(end, tx) for end, tx in running if end > clock]
    return Schedule(txs, starts)


def _search(txs: TxSet, cfg: SchedulerConfig,
            incumbent: Fraction, incumbent_starts: dict) -> Schedule:
    """Branch and bound over active schedules; returns an optimal schedule."""
    total = txs.total_time()
    best = [incumbent, dict(incumbent_starts)]

    def lower_bound(clock: Fraction, running: list, remaining: list) -> Fraction:
        lb = clock
        for end, _tx in running:
            if end > lb:
                lb = end
        if cfg.threads is not None:
            # All residual work happens after `clock` on at most n threads.
            work = sum((tx.time for tx in remaining), Fraction(0))
            work += sum((end - clock for end, _tx in running), Fraction(0))
            cand = clock + work / cfg.threads
            if cand > lb:
                lb = cand
        else:
            for tx in remaining:
                if clock + tx.time > lb:
                    lb = clock + tx.time
        # Per-key serialization: every remaining user of key k runs after the
        # running holder of k (if any) finishes.
        key_load: dict[str, Fraction] = {}
        key_base: dict[str, Fraction] = {}
        for tx in remaining:
            for k in tx.keys:
                key_load[k] = key_load.get(k, Fraction(0)) + tx.time
        for end, tx in running:
            for k in tx.keys:
                if k in key_load and end > key_base.get(k, clock):
                    key_base[k] = end
        for k, load in key_load.items():
            cand = key_base.get(k, clock) + load
            if cand > lb:
                lb = cand
        return lb

    def recurse(clock: Fraction, running: list, remaining: list,
                starts: dict, reached: Fraction) -> None:
        if not remaining:
            final = max(reached, max((end for end, _ in running),
                                     default=Fraction(0)))
            if final < best[0]:
                best[0] = final
                best[1] = dict(starts)
            return
        if lower_bound(clock, running, remaining) >= best[0]:
            return
        locked: set[str] = set()
        for end, tx in running:
            locked |= tx.keys
        eligible = [tx for tx in remaining
                    if not (tx.keys & locked)]

        def choose(idx: int, chosen: list, chosen_keys: set) -> None:
            if idx == len(eligible):
                if not chosen and not running:
                    return  # nothing runs: dead branch
                new_running = running + [(clock + tx.time, tx) for tx in chosen]
                new_remaining = [tx for tx in remaining if tx not in chosen]
                new_starts = dict(starts)
                for tx in chosen:
                    new_starts[tx.tx_id] = clock
                new_reached = max([reached] + [e for e, _ in new_running])
                if not new_remaining:
                    recurse(clock, new_running, new_remaining,
                            new_starts, new_reached)
                    return
                next_clock = min(e for e, _ in new_running)
                still = [(e, tx) for e, tx in new_running if e > next_clock]
                recurse(next_clock, still, new_remaining,
                        new_starts, new_reached)
                return
            tx = eligible[idx]
            if cfg.has_capacity(len(running) + len(chosen)) \
                    and not (tx.keys & chosen_keys):
                choose(idx + 1, chosen + [tx], chosen_keys | tx.keys)
            choose(idx + 1, chosen, chosen_keys)

        choose(0, [], set())

    recurse(Fraction(0), [], list(txs), {}, Fraction(0))
    return Schedule(txs, best[1])


def optimal_schedule(txs: TxSet, cfg: SchedulerConfig) -> Schedule:
    if len(txs) > cfg.instance_cap:
        raise InstanceTooLarge(
            f"|T| = {len(txs)} exceeds instance cap {cfg.instance_cap}")
    if not len(txs):
        return Schedule(txs, {})
    greedy = greedy_schedule(txs, cfg)
    return _search(txs, cfg, makespan(greedy), greedy.starts)


def optimal_makespan(txs: TxSet, cfg: SchedulerConfig) -> Fraction:
    """v(T): the exact minimum makespan over all valid schedules."""
    return makespan(optimal_schedule(txs, cfg))


class ValueOracle:
    """Memoized access to v(T); the makespan only depends on the multiset of
    (time, keys) tuples and the thread count, so results are shared across
    blocks."""

    def __init__(self, cfg: SchedulerConfig):
        self.cfg = cfg
        self._memo: dict[tuple, Fraction] = {}

    def value(self, txs: TxSet) -> Fraction:
        key = txs.shape_key()
        got = self._memo.get(key)
        if got is None:
            got = optimal_makespan(txs, self.cfg)
            self._memo[key] = got
        return got


@dataclass(frozen=True)
class SubsetValueTable:
    """v(S) for every subset S of a base set, keyed by frozenset of tx ids."""

    base: TxSet
    values: dict  # frozenset[str] -> Fraction

    def value(self, ids: frozenset) -> Fraction:
        return self.values[frozenset(ids)]


def subset_value_table(txs: TxSet, cfg: SchedulerConfig,
                       oracle: ValueOracle | None = None) -> SubsetValueTable:
    if len(txs) > cfg.instance_cap:
        raise InstanceTooLarge(
            f"|T| = {len(txs)} exceeds instance cap {cfg.instance_cap}")
    if oracle is None:
        oracle = ValueOracle(cfg)
    ids = sorted(txs.ids)
    values: dict[frozenset, Fraction] = {}
    for mask in range(1 << len(ids)):
        chosen = frozenset(ids[i] for i in range(len(ids)) if mask >> i & 1)
        values[chosen] = oracle.value(txs.subset(chosen))
    return SubsetValueTable(txs, values)


@dataclass(frozen=True)
class AxiomWitness:
    axiom: str
    detail: str


@dataclass(frozen=True)
class AxiomReport:
    trials: int
    passed: bool
    witnesses: tuple[AxiomWitness, ...]


def check_scheduler_axioms(value_fn: Callable[[TxSet], Fraction],
                           sampler: Callable[[int], tuple[TxSet, Transaction, Transaction]],
                           trials: int) -> AxiomReport:
    """Checks S1 (monotone in T), S2 (monotone under bundling), S3 (monotone
    under the (t, K) preorder) and S4 (empty set) on sampled instances.

    ``sampler(i)`` must return a deterministic (T, tx1, tx2) with tx1, tx2
    not in T and distinct ids.
    """
    witnesses: list[AxiomWitness] = []
    if value_fn(TxSet()) != 0:
        witnesses.append(AxiomWitness("S4", "v(empty) != 0"))
    for i in range(trials):
        base, tx1, tx2 = sampler(i)
        with_tx1 = base.with_txs(tx1)
        with_both = base.with_txs(tx1, tx2)
        # S1: T subset T' implies v(T) <= v(T')
        if not (value_fn(base) <= value_fn(with_tx1) <= value_fn(with_both)):
            witnesses.append(AxiomWitness(
                "S1", f"trial {i}: v not monotone under set growth"))
            break
        # S2: bundling two transactions never makes scheduling easier
        bundle_id = "bundle!" + tx1.tx_id + "+" + tx2.tx_id
        tx3 = concatenate(tx1, tx2, bundle_id)
        if value_fn(with_both) > value_fn(base.with_txs(tx3)):
            witnesses.append(AxiomWitness(
                "S2", f"trial {i}: v({{tx1,tx2}}) > v({{concat}})"))
            break
        # S3: replace tx1 by a dominating transaction (same time or larger,
        # superset of keys) and v must not decrease.
        bigger = Transaction("big!" + tx1.tx_id, tx1.time + tx2.time,
                             tx1.keys | tx2.keys |
                             {fresh_key(base.all_keys() | tx1.keys | tx2.keys)})
        if value_fn(with_tx1) > value_fn(base.with_txs(bigger)):
            witnesses.append(AxiomWitness(
                "S3", f"trial {i}: v decreased under dominating replacement"))
            break
    return AxiomReport(trials, not witnesses, tuple(witnesses))
