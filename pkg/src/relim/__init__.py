"""Symbolic round-elimination engine for locally checkable problems on trees."""

from .core import (
    Config,
    Constraint,
    Problem,
    config_in_constraint,
    expand_config,
    expansion,
    parse_problem,
    problems_isomorphic,
    rename_problem,
    serialize_problem,
)
from .diagram import Diagram, at_least_as_strong, build_diagram, is_right_closed, right_closed_sets
from .errors import (
    BlowupError,
    OperationCancelled,
    ParseError,
    PreconditionError,
    SequenceError,
)
from .roundelim import LiftedProblem, maximal_set_configs, re, rere, universal_membership
from .analysis import (
    FailureBound,
    Relaxation,
    SetProblem,
    Verdict,
    randomized_failure_bound,
    relaxes_to,
    simplify_subsumed,
    verify_speedup_target,
    zero_round_solvable_symmetric,
)
from .family import (
    FamilyParams,
    SequenceCertificate,
    build_sequence,
    expected_re_problem,
    kods_problem_statement,
    make_family_problem,
    make_mis_problem,
    make_plus_problem,
    rel_coverage_target,
    step_params,
)

__version__ = "0.1.0"
