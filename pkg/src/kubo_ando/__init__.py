"""Kubo-Ando operator connections, their Loewner measures, and order tests."""
from .catalog import Connection, parse_mean, power_mean, symmetric_catalog
from .errors import (
    BoundaryAmbiguityError,
    ConvergenceError,
    DomainError,
    InconsistencyError,
    InputError,
    KuboAndoError,
    PreconditionError,
    SearchFailureError,
    TheoremViolationError,
)
from .loewner import (
    BorelMeasure,
    arithmetic_measure,
    check_measure_matches,
    dirac,
    geometric_measure,
    harmonic_measure,
    measure_connection_eval,
    measure_eval_fn,
    restricted_fn,
    split_h,
)
from .matcore import Interval, apply_fn, loewner_leq, operator_norm, spectral_projection, sym_eig
from .means import (
    RepresentingFunction,
    check_symmetric,
    connection_eval,
    connection_eval_psd,
    make_power_fn,
    mixture,
    transpose_fn,
)
from .orderdet import (
    case2a_limit_scan,
    case2b_divergence_scan,
    norm_dominates,
    order_determination_check,
    prop2_criteria,
    prop3_limit_scan,
    prop4_norm,
    witness_search,
)

__version__ = "0.1.0"

__all__ = [
    "BorelMeasure",
    "BoundaryAmbiguityError",
    "Connection",
    "ConvergenceError",
    "DomainError",
    "InconsistencyError",
    "InputError",
    "Interval",
    "KuboAndoError",
    "PreconditionError",
    "RepresentingFunction",
    "SearchFailureError",
    "TheoremViolationError",
    "apply_fn",
    "arithmetic_measure",
    "case2a_limit_scan",
    "case2b_divergence_scan",
    "check_measure_matches",
    "check_symmetric",
    "connection_eval",
    "connection_eval_psd",
    "dirac",
    "geometric_measure",
    "harmonic_measure",
    "loewner_leq",
    "make_power_fn",
    "measure_connection_eval",
    "measure_eval_fn",
    "mixture",
    "norm_dominates",
    "operator_norm",
    "order_determination_check",
    "parse_mean",
    "power_mean",
    "prop2_criteria",
    "prop3_limit_scan",
    "prop4_norm",
    "restricted_fn",
    "spectral_projection",
    "split_h",
    "sym_eig",
    "symmetric_catalog",
    "transpose_fn",
    "witness_search",
]
