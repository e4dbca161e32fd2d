"""Rewriting an elliptic system as a Vekua equation

    d_zbar W + A W + B conj(W) = F,   d_zbar = (d_x + i d_y) / 2,

over the algebra with i^2 = -beta*i - alpha.

The pipeline is: substitute U = a22*u, V = v - a12*u; add beta times the
first line to the second; scale the first line by alpha; read off A, B, F.
Everything is evaluated pointwise from coefficient jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coeffexpr import EvalError, evaluate
from .ellsys import (
    EPS_POS, CoefficientJets, EllipticSystem, NonPositiveLeadingCoefficient, NotElliptic,
    PointEvalError, SolutionPair,
)
from .gcnum import GC, StructureParams, discriminant, is_elliptic


class StageError(Exception):
    """An error raised inside one stage of :func:`rewrite_at`."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class IntermediateSystem:
    """Point values of the system after the substitution.

    Line 1: -V_y + inv_alpha_coeff*U_x + a_star*U + b_star*V = f1
    Line 2:  V_x + mixed_coeff*U_x + U_y + c_star*U + d_star*V = f2
    """

    a_star: float
    b_star: float
    c_star: float
    d_star: float
    inv_alpha_coeff: float
    mixed_coeff: float
    f1: float
    f2: float


@dataclass(frozen=True)
class CanonicalPoint:
    """Coefficients of

    -alpha*V_y + U_x + a*U + b*V = f
    V_x - beta*V_y + U_y + c*U + d*V = g
    """

    a: float
    b: float
    c: float
    d: float
    f: float
    g: float


@dataclass(frozen=True)
class VekuaPointData:
    s: StructureParams
    A: GC
    B: GC
    F: GC
    a22: float
    a12: float
    x: float | None = None
    y: float | None = None


def _structure(c: CoefficientJets, point) -> StructureParams:
    a11 = c.a11.value
    if a11 <= EPS_POS:
        raise NonPositiveLeadingCoefficient(f"a11 = {a11!r} <= 0", point)
    return StructureParams(c.a22.value / a11, 0.0 - (c.a21.value + c.a12.value) / a11)


def substitute_jets(c: CoefficientJets, point=None) -> IntermediateSystem:
    a11, a22, a12, a21 = c.a11.value, c.a22.value, c.a12.value, c.a21.value
    if a22 <= EPS_POS:
        raise NonPositiveLeadingCoefficient(f"a22 = {a22!r} <= 0", point)
    b1, b2 = c.b1.value, c.b2.value
    # u = U/a22 and v = V + a12*U/a22; the product rule brings in the
    # first derivatives of a12 and a22.
    inv = 1.0 / a22
    dx22 = c.a22.dx * inv * inv
    a_star = (c.a1.value - c.a12.dy + b1 * a12) * inv - a11 * dx22
    c_star = ((c.a2.value + c.a12.dx + b2 * a12) * inv - c.a22.dy * inv
              - (a12 + a21) * dx22)
    return IntermediateSystem(
        a_star=a_star,
        b_star=b1,
        c_star=c_star,
        d_star=b2,
        inv_alpha_coeff=a11 * inv,
        mixed_coeff=(a21 + a12) * inv,
        f1=c.f1.value,
        f2=c.f2.value,
    )


def substitute(sys: EllipticSystem, x: float, y: float) -> IntermediateSystem:
    return substitute_jets(sys.jets_at(x, y), (x, y))


def _require_elliptic(s: StructureParams):
    if not is_elliptic(s) or s.alpha <= EPS_POS:
        raise NotElliptic(f"structure {s} has discriminant {discriminant(s)!r} <= 0")


def row_reduce(inter: IntermediateSystem, s: StructureParams) -> CanonicalPoint:
    _require_elliptic(s)
    al, be = s.alpha, s.beta
    return CanonicalPoint(
        a=al * inter.a_star,
        b=al * inter.b_star,
        c=inter.c_star + be * inter.a_star,
        d=inter.d_star + be * inter.b_star,
        f=al * inter.f1,
        g=inter.f2 + be * inter.f1,
    )


def line2_ux_residual(inter: IntermediateSystem, s: StructureParams) -> float:
    """U_x coefficient of line 2 after adding beta times line 1; zero up to rounding."""
    return s.beta * inter.inv_alpha_coeff + inter.mixed_coeff


def assemble_vekua(cp: CanonicalPoint, s: StructureParams) -> tuple[GC, GC, GC]:
    """A, B and F of the Vekua form of a canonical system.

    Matching d_zbar W + A W + B conj(W) against half the canonical system
    gives F = (f + i g) / 2; with F = f + i g the equation does not hold.
    """
    _require_elliptic(s)
    al, be = s.alpha, s.beta
    bo = cp.b / al
    bbo = be * cp.b / al
    A = GC(0.25 * (cp.a - bbo + cp.d), 0.25 * (cp.c - bo))
    B = GC(0.25 * (cp.a + bbo - cp.d), 0.25 * (cp.c + bo))
    F = GC(0.5 * cp.f, 0.5 * cp.g)
    return A, B, F


def rewrite_jets(c: CoefficientJets, point=None) -> VekuaPointData:
    stage = "structure_params"
    try:
        s = _structure(c, point)
        stage = "substitute"
        inter = substitute_jets(c, point)
        stage = "row_reduce"
        cp = row_reduce(inter, s)
        stage = "assemble_vekua"
        A, B, F = assemble_vekua(cp, s)
    except (NotElliptic, EvalError, ArithmeticError) as exc:
        raise StageError(stage, exc) from exc
    for name, z in (("A", A), ("B", B), ("F", F)):
        if not (math.isfinite(z.re) and math.isfinite(z.im)):
            raise StageError("assemble_vekua", EvalError(f"non-finite {name} at {point}"))
    x, y = point if point is not None else (None, None)
    return VekuaPointData(s, A, B, F, a22=c.a22.value, a12=c.a12.value, x=x, y=y)


def rewrite_at(sys: EllipticSystem, x: float, y: float) -> VekuaPointData:
    try:
        c = sys.jets_at(x, y)
    except PointEvalError as exc:
        raise StageError("evaluate", exc) from exc
    return rewrite_jets(c, (x, y))


def push_forward_solution(p: SolutionPair, sys: EllipticSystem, x: float, y: float) -> GC:
    """W = U + iV with U = a22*u and V = v - a12*u at (x, y)."""
    try:
        u = evaluate(p.u, x, y)
        v = evaluate(p.v, x, y)
    except EvalError as exc:
        raise PointEvalError(str(exc), (x, y), "solution") from exc
    a22 = sys.value_at("a22", x, y)
    a12 = sys.value_at("a12", x, y)
    return GC(a22 * u, v - a12 * u)

