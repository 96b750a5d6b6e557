"""Problem engines: instance handling, solvers, and fitness evaluation."""

from heurevo.engines.aco import ACO_DEFAULTS, AcoResult, aco_solve
from heurevo.engines.constructive import ConstructiveResult, constructive_tsp_solve
from heurevo.engines.evaluate import (
    PHASES,
    evaluate_heuristic,
    validate_heuristic_output,
)
from heurevo.engines.gls import GLS_DEFAULTS, GlsResult, gls_tsp_solve
from heurevo.engines.instances import (
    BppInstance,
    InstanceSet,
    MkpInstance,
    TspInstance,
    check_disjoint,
    euclidean_matrix,
    generate_instances,
    parse_instance,
)
from heurevo.engines.oracle import MAX_ORACLE_N, exact_tsp_oracle
from heurevo.engines.tsplib import load_tsplib

__all__ = [
    "ACO_DEFAULTS",
    "AcoResult",
    "BppInstance",
    "ConstructiveResult",
    "GLS_DEFAULTS",
    "GlsResult",
    "InstanceSet",
    "MAX_ORACLE_N",
    "MkpInstance",
    "PHASES",
    "TspInstance",
    "aco_solve",
    "check_disjoint",
    "constructive_tsp_solve",
    "euclidean_matrix",
    "evaluate_heuristic",
    "exact_tsp_oracle",
    "generate_instances",
    "gls_tsp_solve",
    "load_tsplib",
    "parse_instance",
    "validate_heuristic_output",
]
