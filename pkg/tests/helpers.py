"""Random generators shared by the test modules."""

import random

from vekua_forge.coeffexpr import eval_jet

from vekua_forge.coeffexpr import parse_expr
from vekua_forge.ellsys import EllipticSystem, SolutionPair, make_constant_structure_family


def _c(rng, lo=-2.0, hi=2.0):
    return f"{rng.uniform(lo, hi):.6f}"


def random_expr_text(rng: random.Random, depth: int = 3) -> str:
    """Random expression over the full grammar.

    Arguments of log, sqrt, tan and division are shifted into safe ranges so
    most points are valid; abs kinks are handled by the caller.
    """
    if depth == 0 or rng.random() < 0.2:
        return rng.choice(["x", "y", _c(rng, 0.1, 2.0), "x", "y"])
    a = random_expr_text(rng, depth - 1)
    kind = rng.randrange(14)
    if kind == 0:
        return f"({a} + {random_expr_text(rng, depth - 1)})"
    if kind == 1:
        return f"({a} - {random_expr_text(rng, depth - 1)})"
    if kind == 2:
        return f"({a} * {random_expr_text(rng, depth - 1)})"
    if kind == 3:
        return f"({a} / (2 + sin({random_expr_text(rng, depth - 1)})))"
    if kind == 4:
        return f"-{a}"
    if kind == 5:
        if rng.random() < 0.7:
            return f"({a})^{rng.choice([0, 1, 2, 3])}"
        return f"(2 + sin({a}))^{rng.choice([-1, -2])}"
    if kind == 6:
        return f"(1.5 + cos({a}))^{rng.choice(['0.5', '1.5', '-0.7', 'sin(y)', 'x'])}"
    if kind == 7:
        return f"sin({a})"
    if kind == 8:
        return f"cos({a})"
    if kind == 9:
        return f"tan(0.6*tanh({a}))"
    if kind == 10:
        return f"exp(sin({a}))"
    if kind == 11:
        return f"log(1 + ({a})^2)"
    if kind == 12:
        return f"sqrt(2 + cos({a}))"
    return f"abs({a})" if rng.random() < 0.5 else f"tanh({a})"


def random_poly_text(rng: random.Random, degree: int = 3) -> str:
    terms = []
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if rng.random() < 0.7:
                terms.append(f"{_c(rng)}*x^{i}*y^{j}")
    return " + ".join(terms) or "0"


def random_solution(rng: random.Random, degree: int = 3) -> SolutionPair:
    return SolutionPair.build(random_poly_text(rng, degree), random_poly_text(rng, degree))


def _lower(rng):
    choices = [
        lambda: _c(rng),
        lambda: f"{_c(rng)}*x + {_c(rng)}*y",
        lambda: f"{_c(rng)}*sin({_c(rng)}*x*y)",
        lambda: f"{_c(rng)}*exp({_c(rng, -1, 1)}*y)",
        lambda: "0",
    ]
    return rng.choice(choices)()


def constant_system(rng: random.Random) -> EllipticSystem:
    """Constant principal part, constant lower order."""
    a11 = rng.uniform(0.5, 3.0)
    a22 = rng.uniform(0.5, 3.0)
    bound = 2.0 * (a11 * a22) ** 0.5 * 0.95
    s = rng.uniform(-bound, bound)
    a12 = rng.uniform(-2, 2)
    return EllipticSystem.build(
        a11=repr(a11), a22=repr(a22), a12=repr(a12), a21=repr(s - a12),
        a1=_c(rng), a2=_c(rng), b1=_c(rng), b2=_c(rng),
    )


def variable_system(rng: random.Random) -> EllipticSystem:
    """Variable a11, a12, a21, a22 and lower-order terms, elliptic on [-1, 1]^2."""
    a11 = f"{_c(rng, 1.0, 2.0)} + {_c(rng, -0.5, 0.5)}*sin({_c(rng)}*x + {_c(rng)}*y)"
    a22 = f"{_c(rng, 1.0, 2.0)} + {_c(rng, 0, 0.5)}*x^2 + {_c(rng, -0.4, 0.4)}*cos(x*y)"
    a12 = f"{_c(rng, -0.3, 0.3)}*cos({_c(rng)}*x - y) + {_c(rng, -0.1, 0.1)}*y"
    a21 = f"{_c(rng, -0.3, 0.3)}*x*y + {_c(rng, -0.1, 0.1)}*tanh(x)"
    return EllipticSystem.build(
        a11=a11, a22=a22, a12=a12, a21=a21,
        a1=_lower(rng), a2=_lower(rng), b1=_lower(rng), b2=_lower(rng),
        f1=_lower(rng), f2=_lower(rng),
    )


def family_system(rng: random.Random, with_lower: bool = True) -> EllipticSystem:
    beta0 = rng.uniform(-3, 3)
    alpha0 = beta0 * beta0 / 4 + rng.uniform(0.1, 3)
    lam = rng.choice(["exp(x)", "1 + x^2 + y^2", "2 + sin(x*y)", f"{_c(rng, 0.5, 2)}"])
    mu = rng.choice(["y", "0", "sin(x)", "x*y - 1", f"{_c(rng)}"])
    fam = make_constant_structure_family(alpha0, beta0, lam, mu)
    if with_lower:
        fam = fam.replace(a1=_lower(rng), a2=_lower(rng), b1=_lower(rng), b2=_lower(rng))
    return fam


def any_system(rng: random.Random, k: int) -> EllipticSystem:
    return (constant_system, variable_system, family_system)[k % 3](rng)


def expr(text):
    return parse_expr(text)


def classical_residual(sys, pair, x, y) -> complex:
    """Textbook Vekua residual in Python complex arithmetic.

    Only valid for a11 = a22 = 1, a12 = a21 = 0, where W = u + iv and the
    right-hand sides are manufactured from (u, v).
    """
    u, v = eval_jet(pair.u, x, y), eval_jet(pair.v, x, y)
    a, b = sys.value_at("a1", x, y), sys.value_at("b1", x, y)
    c, d = sys.value_at("a2", x, y), sys.value_at("b2", x, y)
    f = -v.dy + u.dx + a * u.value + b * v.value
    g = v.dx + u.dy + c * u.value + d * v.value
    w = complex(u.value, v.value)
    dzbar = 0.5 * (complex(u.dx, v.dx) + 1j * complex(u.dy, v.dy))
    A = complex(a + d, c - b) / 4
    B = complex(a - d, c + b) / 4
    return dzbar + A * w + B * w.conjugate() - complex(f, g) / 2


# (criterion, PASS/FAIL, detail) lines collected by test_acceptance
ACCEPTANCE_LOG: list[str] = []
