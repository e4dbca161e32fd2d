"""Rewrite elliptic first-order systems in the plane as Vekua equations over
the algebra with structure polynomial X^2 + beta*X + alpha."""

from .coeffexpr import (
    DomainError, EvalError, Expr, Jet2, ParseError, UnknownIdentifier, eval_jet, evaluate,
    fd_partials, parse_expr,
)
from .ellsys import (
    Classification, EllipticSystem, NonPositiveLeadingCoefficient, NotElliptic, Region,
    SolutionPair, classify, delta, make_constant_structure_family, structure_params,
)
from .gcnum import (
    GC, DegenerateElement, StructureParams, discriminant, gc_add, gc_conj, gc_inv, gc_mul,
    is_elliptic,
)
from .rewrite import (
    CanonicalPoint, IntermediateSystem, StageError, VekuaPointData, assemble_vekua,
    push_forward_solution, rewrite_at, row_reduce, substitute,
)
from .verify import GridReport, cr_residual, grid_verify, manufacture_rhs, vekua_residual

__version__ = "0.1.0"
