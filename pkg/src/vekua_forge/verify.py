"""Residual checks for the rewriting, using manufactured solutions.

Given a pair (u, v), the right-hand sides f1, f2 are chosen so that the pair
solves the system exactly.  The Vekua residual of W = a22*u + i(v - a12*u)
must then vanish at every point, which checks every stage of the rewriting
at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import rewrite
from .coeffexpr import EvalError, Jet2, eval_jet
from .ellsys import (
    CoefficientJets, EllipticSystem, NotElliptic, PointEvalError, Region, SolutionPair,
    map_nodes,
)
from .gcnum import GC, I, StructureParams, gc_conj, gc_mul

DEFAULT_TOL = 1e-10
FD_TOL = 1e-5


def _pair_jets(p: SolutionPair, x: float, y: float) -> tuple[Jet2, Jet2]:
    try:
        return eval_jet(p.u, x, y), eval_jet(p.v, x, y)
    except EvalError as exc:
        raise PointEvalError(str(exc), (x, y), "solution") from exc


def cr_residual(p: SolutionPair, s: StructureParams, x: float, y: float) -> GC:
    """Components of 2*d_zbar(u + iv): (u_x - alpha v_y, u_y + v_x - beta v_y)."""
    u, v = _pair_jets(p, x, y)
    return GC(u.dx - s.alpha * v.dy, u.dy + v.dx - s.beta * v.dy)


def _lhs(c: CoefficientJets, u: Jet2, v: Jet2) -> tuple[float, float]:
    f1 = (-v.dy + c.a11.value * u.dx + c.a12.value * u.dy
          + c.a1.value * u.value + c.b1.value * v.value)
    f2 = (v.dx + c.a21.value * u.dx + c.a22.value * u.dy
          + c.a2.value * u.value + c.b2.value * v.value)
    return f1, f2


def manufacture_rhs(sys: EllipticSystem, p: SolutionPair, x: float, y: float) -> tuple[float, float]:
    """Right-hand sides for which (u, v) is an exact solution at (x, y)."""
    u, v = _pair_jets(p, x, y)
    return _lhs(sys.jets_at(x, y), u, v)


@dataclass(frozen=True)
class PointResidual:
    residual: GC
    W: GC
    data: rewrite.VekuaPointData


def residual_at(
    sys: EllipticSystem, p: SolutionPair, x: float, y: float, manufacture: bool = True
) -> PointResidual:
    """Vekua residual at one point, with W and the rewriting data.

    With ``manufacture=False`` the system's own f1, f2 are kept, so the
    residual measures how far (u, v) is from solving that system.
    """
    c = sys.jets_at(x, y)
    u, v = _pair_jets(p, x, y)
    if manufacture:
        f1, f2 = _lhs(c, u, v)
        c = c._replace(f1=Jet2(f1), f2=Jet2(f2))
    data = rewrite.rewrite_jets(c, (x, y))
    s = data.s
    U = c.a22 * u
    V = v - c.a12 * u
    W = GC(U.value, V.value)
    Wx = GC(U.dx, V.dx)
    Wy = GC(U.dy, V.dy)
    dzbar = (Wx + gc_mul(I, Wy, s)).scale(0.5)
    r = dzbar + gc_mul(data.A, W, s) + gc_mul(data.B, gc_conj(W), s) - data.F
    return PointResidual(r, W, data)


def vekua_residual(sys: EllipticSystem, p: SolutionPair, x: float, y: float) -> GC:
    return residual_at(sys, p, x, y).residual


@dataclass
class GridReport:
    """Residuals over a grid, normalised by ``1 + solution_scale``.

    ``solution_scale`` is the largest component of W over evaluated nodes.
    """

    max_abs_residual: float
    mean_abs_residual: float
    worst_point: tuple[float, float] | None
    points_evaluated: int
    tolerance: float
    passed: bool
    solution_scale: float = 0.0
    raw_max_abs_residual: float = 0.0
    skipped: list[tuple[tuple[float, float], str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        def clean(v):
            return v if isinstance(v, float) and math.isfinite(v) else None

        return {
            "max_abs_residual": clean(self.max_abs_residual),
            "mean_abs_residual": clean(self.mean_abs_residual),
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "points_evaluated": self.points_evaluated,
            "points_skipped": len(self.skipped),
            "tolerance": self.tolerance,
            "pass": self.passed,
            "solution_scale": clean(self.solution_scale),
            "raw_max_abs_residual": clean(self.raw_max_abs_residual),
            "skipped": [{"x": px, "y": py, "reason": why} for (px, py), why in self.skipped],
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: max residual {self.max_abs_residual:.3e} (tolerance {self.tolerance:.3e})",
            f"  mean residual   {self.mean_abs_residual:.3e}",
            f"  worst point     {self.worst_point}",
            f"  solution scale  {self.solution_scale:.3e}",
            f"  points          {self.points_evaluated} evaluated, {len(self.skipped)} skipped",
        ]
        for (px, py), why in self.skipped[:10]:
            lines.append(f"    skipped ({px!r}, {py!r}): {why}")
        return "\n".join(lines)


def _safe_residual(sys, p, manufacture):
    def run(x, y):
        try:
            return residual_at(sys, p, x, y, manufacture)
        except (rewrite.StageError, NotElliptic, EvalError, ArithmeticError) as exc:
            return exc
    return run


def grid_verify(
    sys: EllipticSystem,
    p: SolutionPair,
    r: Region,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> GridReport:
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    results = map_nodes(_safe_residual(sys, p, True), r, workers)
    skipped = []
    raw = []
    scale = 0.0
    for node, res in zip(r.nodes(), results):
        if isinstance(res, Exception):
            skipped.append((node, str(res)))
            continue
        z = res.residual
        raw.append((max(abs(z.re), abs(z.im)), node))
        scale = max(scale, abs(res.W.re), abs(res.W.im))
    if not raw:
        return GridReport(math.inf, math.inf, None, 0, tol, False, 0.0, math.inf, skipped)
    norm = 1.0 + scale
    worst_raw, worst = max(raw, key=lambda t: t[0])
    if not math.isfinite(worst_raw):
        worst_raw = math.inf
    max_res = worst_raw / norm
    mean_res = sum(t[0] for t in raw) / len(raw) / norm
    return GridReport(
        max_abs_residual=max_res,
        mean_abs_residual=mean_res,
        worst_point=worst,
        points_evaluated=len(raw),
        tolerance=tol,
        passed=max_res <= tol,
        solution_scale=scale,
        raw_max_abs_residual=worst_raw,
        skipped=skipped,
    )
