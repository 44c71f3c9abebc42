"""Stochastic-rounding error analysis: precision emulation, computation DAGs,
martingale-based probabilistic error bounds, and Monte Carlo validation."""

from .algorithms import (
    InvalidDegree,
    Polynomial,
    ShapeMismatch,
    evaluate_rn,
    evaluate_sr,
    fold_sum,
    horner,
    horner_dag,
    input_polynomial,
    karatsuba_dag,
    m_closed_form,
    recursive_sum_dag,
    round_dag_inputs,
    schoolbook_poly_mul,
    tree_sum,
    tree_sum_dag,
)
from .bounds import (
    Analysis,
    ConditionUndefined,
    InvalidLambda,
    ah_bound,
    azuma_generic,
    gamma,
)
from .dsl import (
    ArityError,
    DivisionUnsupported,
    DslError,
    ParseError,
    Program,
    SourceSpan,
    UndefinedIdentifier,
    lower,
    parse,
    pretty_print,
)
from .fp_core import (
    FpFormat,
    OutOfRange,
    RoundedValue,
    is_representable,
    neighbors,
    p_fraction,
    rn_round,
    sr_op,
    sr_round,
)
from .graph import (
    BiasedMultiplication,
    Dag,
    Node,
    NodeKind,
    Violation,
    analyze,
    validate_martingale_inducing,
)

__all__ = [
    "Analysis",
    "ArityError",
    "BiasedMultiplication",
    "ConditionUndefined",
    "Dag",
    "DivisionUnsupported",
    "DslError",
    "FpFormat",
    "InvalidDegree",
    "InvalidLambda",
    "Node",
    "NodeKind",
    "OutOfRange",
    "ParseError",
    "Polynomial",
    "Program",
    "RoundedValue",
    "ShapeMismatch",
    "SourceSpan",
    "UndefinedIdentifier",
    "Violation",
    "ah_bound",
    "analyze",
    "azuma_generic",
    "evaluate_rn",
    "evaluate_sr",
    "fold_sum",
    "gamma",
    "horner",
    "horner_dag",
    "input_polynomial",
    "is_representable",
    "karatsuba_dag",
    "lower",
    "m_closed_form",
    "neighbors",
    "p_fraction",
    "parse",
    "pretty_print",
    "recursive_sum_dag",
    "rn_round",
    "round_dag_inputs",
    "schoolbook_poly_mul",
    "sr_op",
    "sr_round",
    "tree_sum",
    "tree_sum_dag",
    "validate_martingale_inducing",
]
