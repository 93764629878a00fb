"""torsionlab: exact bracket geometry of polynomial map pairs plus a numeric
verifier for the associated weighted inequalities."""

from .geometry import (
    PolyMap,
    PolyVectorField,
    WordTable,
    build_word_table,
    hodge_star_field,
    lie_bracket,
    lie_series_flow,
    nilpotency_step,
)
from .polycore import PolyMatrix, RatPoly
from .polytope import (
    LambdaEntry,
    Polytope2D,
    extreme_and_minimal,
    lambda_table,
    newton_polytope,
    polytope_via_J,
    weight_spec,
)
from .torsion import (
    IterFlowMap,
    TorsionProfile,
    iter_flow,
    jacobian_derivative,
    psi_flow,
    psi_tilde_flow,
    torsion_profile,
    weight_transform,
)

__all__ = [
    "RatPoly", "PolyMatrix", "PolyMap", "PolyVectorField", "WordTable",
    "hodge_star_field", "lie_bracket", "build_word_table", "nilpotency_step",
    "lie_series_flow", "iter_flow", "psi_flow", "psi_tilde_flow",
    "jacobian_derivative", "torsion_profile", "weight_transform",
    "TorsionProfile", "IterFlowMap", "LambdaEntry", "Polytope2D",
    "lambda_table", "newton_polytope", "extreme_and_minimal", "weight_spec",
    "polytope_via_J",
]
