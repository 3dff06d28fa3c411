"""Exact pure-integer LP solver based on objective-level sweeps and projections."""

from .bench import GenSpec, RunReport, emit_report, generate, run_batch
from .errors import (
    Aborted,
    DomainTooLarge,
    InstanceError,
    IterationLimit,
    LpError,
    NumericalBreakdown,
    ParseError,
    PilpError,
    RelaxationInfeasible,
    UnboundedRelaxation,
)
from .lp import LpModel, LpSolution, LpStatus
from .model import (
    PartialCandidate,
    Problem,
    ReducedProblem,
    evaluate,
    is_feasible,
    parse_instance,
    reduce,
    serialize_instance,
)
from .oracle import branch_and_bound, brute_force
from .projection import Projection, build_projections, range_at
from .search import Outcome, SearchConfig, SearchStats, inspect_level, level_interval, solve

__version__ = "0.1.0"
