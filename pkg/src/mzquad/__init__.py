"""Positive-weight quadrature on triangles and polygons, with empirical
Marcinkiewicz-Zygmund checks."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    InputError,
    MZQuadError,
    NumericalError,
    OracleBudgetExceeded,
)
from .geometry import Polygon, Triangle  # noqa: F401
from .mesh import Mesh, ScatteredSet, refine_uniform, triangulate  # noqa: F401
from .oracle import OracleConfig, integrate  # noqa: F401
from .poly_rule import apply_polygon_rule, polygon_weights  # noqa: F401
from .tri_rule import apply_rule, triangle_weights  # noqa: F401
