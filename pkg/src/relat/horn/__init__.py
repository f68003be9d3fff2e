"""Horn theories, saturation and reflection."""

from .closure import Closure, Reason
from .ops import (
    Derivation,
    FuelExhausted,
    as_model,
    builtin_theory,
    capped_shortest_paths,
    check_derivation,
    close,
    derivation_error,
    entails,
    is_model,
    metric_to_structure,
    model,
    reflect,
    saturate,
    structure_to_metric,
    validate_theory,
)
from .theory import Atom, HornAxiom, HornTheory, IndexExpr, LimitRule, Relation, SideCondition, TheoryError
