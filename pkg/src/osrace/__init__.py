"""Sound prediction of optimistic sync-reversal data races from execution traces."""
from .abstract import EisTables, earliest_successors, has_backward_cycle, precompute_eis
from .closure import Frontier, closure
from .detector import DetectOptions, PairVerdict, RaceReport, check_pair, detect_inc, osr_detect
from .generators import OvInstance, RandomTraceConfig, gen_ov_trace, gen_random_trace
from .graph import Witness, build_opt_graph, check_acyclic_and_linearize, validate_witness
from .index import TraceIndex, build_indices
from .oracle import OracleBudget, Outcome, oracle_osr_race, oracle_predictable_race
from .trace import Event, Trace, parse_trace, read_trace, validate

__version__ = "0.1.0"
