"""First-order systems of the form

    -v_y + a11 u_x + a12 u_y + a1 u + b1 v = f1
     v_x + a21 u_x + a22 u_y + a2 u + b2 v = f2

together with their ellipticity test and structure parameters.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Iterator, NamedTuple, TypeVar, Union

from .coeffexpr import (
    EvalError, Expr, Jet2, Mul, Neg, Num, Sub, eval_jet, evaluate, num, parse_expr,
)
from .gcnum import StructureParams, discriminant

EPS_POS = 1e-12

COEFFICIENT_NAMES = ("a11", "a12", "a21", "a22", "a1", "a2", "b1", "b2", "f1", "f2")
REQUIRED = ("a11", "a22")

ExprLike = Union[Expr, str, float, int]
T = TypeVar("T")


class NotElliptic(ValueError):
    """Ellipticity conditions fail; ``point`` is the offending location if known."""

    def __init__(self, message: str, point: tuple[float, float] | None = None):
        if point is not None:
            message = f"{message} at ({point[0]!r}, {point[1]!r})"
        super().__init__(message)
        self.point = point


class NonPositiveLeadingCoefficient(NotElliptic):
    pass


class PointEvalError(EvalError):
    """An expression failed to evaluate at a specific point."""

    def __init__(self, message: str, point: tuple[float, float], field: str | None = None):
        where = f" in {field}" if field else ""
        super().__init__(f"{message}{where} at ({point[0]!r}, {point[1]!r})")
        self.point = point
        self.field = field


def as_expr(e: ExprLike) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, str):
        return parse_expr(e)
    return num(e)


class CoefficientJets(NamedTuple):
    a11: Jet2
    a12: Jet2
    a21: Jet2
    a22: Jet2
    a1: Jet2
    a2: Jet2
    b1: Jet2
    b2: Jet2
    f1: Jet2
    f2: Jet2


@dataclass(frozen=True)
class EllipticSystem:
    a11: Expr
    a12: Expr
    a21: Expr
    a22: Expr
    a1: Expr
    a2: Expr
    b1: Expr
    b2: Expr
    f1: Expr
    f2: Expr

    @classmethod
    def build(cls, a11: ExprLike, a22: ExprLike, **rest: ExprLike) -> EllipticSystem:
        """Build from expressions or strings; omitted coefficients are zero."""
        unknown = set(rest) - set(COEFFICIENT_NAMES)
        if unknown:
            raise TypeError(f"unknown coefficients {sorted(unknown)}")
        kw = {name: as_expr(rest.get(name, 0.0)) for name in COEFFICIENT_NAMES}
        kw["a11"] = as_expr(a11)
        kw["a22"] = as_expr(a22)
        return cls(**kw)

    def replace(self, **changes: ExprLike) -> EllipticSystem:
        kw = self.as_dict()
        kw.update({k: as_expr(v) for k, v in changes.items()})
        return EllipticSystem(**kw)

    def as_dict(self) -> dict[str, Expr]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def jets_at(self, x: float, y: float) -> CoefficientJets:
        jets = []
        for name in COEFFICIENT_NAMES:
            try:
                jets.append(eval_jet(getattr(self, name), x, y))
            except EvalError as exc:
                raise PointEvalError(str(exc), (x, y), name) from exc
        return CoefficientJets(*jets)

    def value_at(self, name: str, x: float, y: float) -> float:
        try:
            return evaluate(getattr(self, name), x, y)
        except EvalError as exc:
            raise PointEvalError(str(exc), (x, y), name) from exc


@dataclass(frozen=True)
class SolutionPair:
    u: Expr
    v: Expr

    @classmethod
    def build(cls, u: ExprLike, v: ExprLike) -> SolutionPair:
        return cls(as_expr(u), as_expr(v))


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = 20
    ny: int = 20

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"empty region {self}")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per direction")

    @staticmethod
    def _axis(lo: float, hi: float, n: int) -> list[float]:
        step = (hi - lo) / (n - 1)
        return [lo + k * step for k in range(n - 1)] + [hi]

    def nodes(self) -> Iterator[tuple[float, float]]:
        """Grid nodes, x varying fastest, endpoints included."""
        xs = self._axis(self.x_min, self.x_max, self.nx)
        for y in self._axis(self.y_min, self.y_max, self.ny):
            for x in xs:
                yield x, y

    def __len__(self):
        return self.nx * self.ny


def map_nodes(fn: Callable[[float, float], T], r: Region, workers: int = 1) -> list[T]:
    """Apply ``fn(x, y)`` to every node of ``r``; results keep grid order."""
    nodes = list(r.nodes())
    if workers <= 1:
        return [fn(x, y) for x, y in nodes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: fn(*p), nodes))


def delta(sys: EllipticSystem, x: float, y: float) -> float:
    a11 = sys.value_at("a11", x, y)
    a22 = sys.value_at("a22", x, y)
    s = sys.value_at("a12", x, y) + sys.value_at("a21", x, y)
    return a11 * a22 - 0.25 * s * s


def structure_params(sys: EllipticSystem, x: float, y: float) -> StructureParams:
    a11 = sys.value_at("a11", x, y)
    if a11 <= EPS_POS:
        raise NonPositiveLeadingCoefficient(f"a11 = {a11!r} <= 0", (x, y))
    a22 = sys.value_at("a22", x, y)
    s = sys.value_at("a12", x, y) + sys.value_at("a21", x, y)
    return StructureParams(a22 / a11, 0.0 - s / a11)


@dataclass(frozen=True)
class Classification:
    elliptic: bool
    witness: tuple[float, float] | None = None
    reason: str | None = None

    def __bool__(self):
        return self.elliptic

    def __str__(self):
        if self.elliptic:
            return "Elliptic"
        x, y = self.witness
        return f"NotElliptic at ({x!r}, {y!r}): {self.reason}"


def check_point(sys: EllipticSystem, x: float, y: float) -> str | None:
    """Return the first failed ellipticity condition at (x, y), or None."""
    a11 = sys.value_at("a11", x, y)
    if a11 <= EPS_POS:
        return "a11 <= 0"
    a22 = sys.value_at("a22", x, y)
    if a22 <= EPS_POS:
        return "a22 <= 0"
    s = sys.value_at("a12", x, y) + sys.value_at("a21", x, y)
    if not a11 * a22 - 0.25 * s * s > 0.0:
        return "delta <= 0"
    return None


def classify(sys: EllipticSystem, r: Region) -> Classification:
    for x, y in r.nodes():
        reason = check_point(sys, x, y)
        if reason is not None:
            return Classification(False, (x, y), reason)
    return Classification(True)


def make_constant_structure_family(
    alpha0: float, beta0: float, lam: ExprLike = "1", mu: ExprLike = "0"
) -> EllipticSystem:
    """System with a11 = lam, a22 = alpha0*lam, a12 = mu, a21 = -beta0*lam - mu.

    Wherever lam > 0 its structure parameters are exactly (alpha0, beta0).
    Lower-order coefficients and right-hand sides are zero.
    """
    s = StructureParams(float(alpha0), float(beta0))
    if not discriminant(s) > 0.0:
        raise NotElliptic(f"4*alpha0 - beta0^2 = {discriminant(s)!r} <= 0")
    lam = as_expr(lam)
    mu = as_expr(mu)
    a21 = _minus(_scaled(-s.beta, lam), mu)
    return EllipticSystem.build(a11=lam, a22=_scaled(s.alpha, lam), a12=mu, a21=a21)


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.v == 0.0


def _scaled(c: float, e: Expr) -> Expr:
    if c == 0.0 or _is_zero(e):
        return Num(0.0)
    if c == 1.0:
        return e
    return Mul(num(c), e)


def _neg(e: Expr) -> Expr:
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def _minus(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    return Sub(a, b)


__all__ = [
    "EPS_POS", "COEFFICIENT_NAMES", "NotElliptic", "NonPositiveLeadingCoefficient",
    "PointEvalError", "CoefficientJets", "EllipticSystem", "SolutionPair", "Region",
    "Classification", "as_expr", "delta", "structure_params", "check_point", "classify", "map_nodes",
    "make_constant_structure_family",
]
