"""Bell-test bounds for hidden-variable models with limited measurement independence.

Ensembles are plain dicts in the same JSON layout the command-line tool reads
and writes: {"atoms": [{"q": weight, "p": [4 floats] or {"alpha", "beta"},
"s": [a0, a1, b0, b1]}], "label": str}.
"""

from ._core import (
    QUANTUM_CH_BOUND,
    ComputationError,
    ValidationError,
    bound,
    bound_delta,
    build_attack,
    critical_threshold,
    ensemble_value,
    oracle_factorizable,
    oracle_general,
    simulate,
    validate,
)

__all__ = [
    "QUANTUM_CH_BOUND",
    "ComputationError",
    "ValidationError",
    "bound",
    "bound_delta",
    "build_attack",
    "critical_threshold",
    "ensemble_value",
    "oracle_factorizable",
    "oracle_general",
    "simulate",
    "validate",
]
