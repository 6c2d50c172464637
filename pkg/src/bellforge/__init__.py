"""Multi-party Bell inequalities from U(c) extensions: exact facet certification
and see-saw quantum violation search."""

from ._accel import BACKEND
from .core import (
    BellForgeError,
    BellInequality,
    FormatError,
    GuardError,
    Scenario,
    ShapeError,
    Vertex,
    algebraic_max,
    chsh,
    classical_max,
    evaluate,
)
from .polytope import (
    TightnessReport,
    check_tightness,
    check_validity,
    enumerate_vertices,
    rank_exact,
)

__version__ = "0.1.0"
