"""Local solutions of linear q-difference equations at z = 0.

Operators are written in ``z`` and the shift ``S`` (``S f(z) = f(qz)``),
e.g. ``parse("q*z*S^2 - S + 1", NumericContext(2))``.  The solver builds
a basis of formal solutions from the Newton polygon: power series and
q-logarithm chains for the horizontal segment, theta-prefactored series
for the other slopes.
"""

from .classify import NewtonPolygon, Segment, is_regular_singular, newton_polygon
from .errors import (
    DivergentProductError,
    InvalidConfiguration,
    OperatorError,
    ParseError,
    QDiffError,
    RecurrenceError,
    ResonanceError,
    SeriesError,
    ThetaZeroError,
    TruncationDominated,
)
from .frobenius import SolutionBasis, SolutionForm, characteristic, solve, solve_horizontal, theta_transform
from .numctx import NumericContext
from .operator import DifferenceOperator, companion, parse, print_operator, wronskian_matrix
from .series import PuiseuxSeries
from .special import q_character, q_log, q_pochhammer, theta, theta_triple_product
from .verify import apply_operator, eval_solution, growth_classify

__version__ = "0.1.0"

__all__ = [
    "NumericContext",
    "PuiseuxSeries",
    "DifferenceOperator",
    "parse",
    "print_operator",
    "companion",
    "wronskian_matrix",
    "newton_polygon",
    "is_regular_singular",
    "NewtonPolygon",
    "Segment",
    "characteristic",
    "solve",
    "solve_horizontal",
    "theta_transform",
    "SolutionForm",
    "SolutionBasis",
    "apply_operator",
    "growth_classify",
    "eval_solution",
    "theta",
    "theta_triple_product",
    "q_log",
    "q_character",
    "q_pochhammer",
    "QDiffError",
    "InvalidConfiguration",
    "ParseError",
    "OperatorError",
    "ThetaZeroError",
    "DivergentProductError",
    "ResonanceError",
    "RecurrenceError",
    "SeriesError",
    "TruncationDominated",
]
