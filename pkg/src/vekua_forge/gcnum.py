"""Arithmetic in the algebra R[X] / (X^2 + beta*X + alpha).

The imaginary unit satisfies ``i^2 = -beta*i - alpha``.  The structure
parameters may vary from point to point, so they are passed to each
operation instead of being stored on the values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS_DET = 1e-12


class DegenerateElement(ArithmeticError):
    """Raised when inverting an element with (numerically) zero norm."""


@dataclass(frozen=True)
class StructureParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError(f"non-finite structure parameters {self!r}")


CLASSICAL = StructureParams(1.0, 0.0)


@dataclass(frozen=True)
class GC:
    """An element ``re + i*im``; equality is componentwise."""

    re: float
    im: float

    def __add__(self, other: GC) -> GC:
        return GC(self.re + other.re, self.im + other.im)

    def __sub__(self, other: GC) -> GC:
        return GC(self.re - other.re, self.im - other.im)

    def __neg__(self) -> GC:
        return GC(-self.re, -self.im)

    def scale(self, c: float) -> GC:
        return GC(c * self.re, c * self.im)

    def __iter__(self):
        yield self.re
        yield self.im


ZERO = GC(0.0, 0.0)
ONE = GC(1.0, 0.0)
I = GC(0.0, 1.0)


def gc_add(a: GC, b: GC) -> GC:
    return GC(a.re + b.re, a.im + b.im)


def gc_mul(a: GC, b: GC, s: StructureParams) -> GC:
    u1, v1 = a.re, a.im
    u2, v2 = b.re, b.im
    vv = v1 * v2
    return GC(u1 * u2 - s.alpha * vv, u1 * v2 + u2 * v1 - s.beta * vv)


def gc_conj(w: GC) -> GC:
    return GC(w.re, -w.im)


def norm_form(w: GC, s: StructureParams) -> float:
    """Determinant ``u^2 - beta*u*v + alpha*v^2`` of multiplication by w."""
    u, v = w.re, w.im
    return u * u - s.beta * u * v + s.alpha * v * v


def gc_inv(w: GC, s: StructureParams) -> GC:
    u, v = w.re, w.im
    det = norm_form(w, s)
    if abs(det) < EPS_DET * (u * u + v * v + 1.0):
        raise DegenerateElement(f"{w} is not invertible for {s} (det={det:g})")
    return GC((u - s.beta * v) / det, -v / det)


def discriminant(s: StructureParams) -> float:
    return 4.0 * s.alpha - s.beta * s.beta


def is_elliptic(s: StructureParams) -> bool:
    return discriminant(s) > 0.0
