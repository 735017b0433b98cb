"""Gas computation mechanisms for parallel blockchain execution.

Exact (rational-arithmetic) tooling: a minimum-makespan scheduler under
lock-based conflicts, a family of gas computation mechanisms, a property
verification harness with known counterexamples, and a minimal fee market.
"""
from .core import (BlockError, DuplicateId, EmptyKeySet, MalformedDocument,
                   NonPositiveTime, NonPositiveWeight, Transaction, TxSet,
                   WeightTable, concatenate, dominates, format_rational,
                   make_transaction, parse_block, render_block, similar,
                   to_rational)
from .feemarket import (BaseFeeState, Bid, BlockResult, SimulationReport,
                        WorkloadConfig, base_fee_update, build_block,
                        make_bid, simulate, workload)
from .gcm import (EASY_ESTIMATION, MECHANISMS, TABLE_MECHANISMS, GcmContext,
                  PricingEnv, block_gas, gas, price_block)
from .properties import (PROPERTIES, CheckOutcome, FixtureMismatch,
                         MatrixMismatch, MatrixReport, check_lemma_consistency,
                         check_property, known_violations,
                         load_expected_matrix, property_matrix,
                         render_matrix_text, run_fixture_suite,
                         search_counterexample)
from .render import gantt_svg, gantt_text
from .sampling import SamplerConfig
from .scheduler import (UNBOUNDED, InstanceTooLarge, Schedule,
                        SchedulerConfig, SubsetValueTable, ValueOracle,
                        check_scheduler_axioms, greedy_schedule, makespan,
                        optimal_makespan, optimal_schedule,
                        subset_value_table, validate_schedule)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
