import random

import numpy as np
import pytest
import sympy as sp

from helpers import any_system, variable_system
from vekua_forge.ellsys import EllipticSystem, SolutionPair
from vekua_forge.gcnum import GC, StructureParams, gc_conj, gc_mul
from vekua_forge.rewrite import (
    CanonicalPoint, IntermediateSystem, StageError, assemble_vekua, line2_ux_residual,
    push_forward_solution, rewrite_at, row_reduce, substitute,
)
from vekua_forge.verify import vekua_residual

X, Y = sp.symbols("x y")
Ux, Uy, Vx, Vy, Us, Vs = sp.symbols("Ux Uy Vx Vy Us Vs")


def sympy_intermediate(sys: EllipticSystem, x: float, y: float) -> dict:
    """Expand u = U/a22, v = V + a12 U/a22 symbolically and read off coefficients."""
    c = {k: sp.sympify(str(e).replace("^", "**"), locals={"abs": sp.Abs})
         for k, e in sys.as_dict().items()}
    U = sp.Function("U")(X, Y)
    V = sp.Function("V")(X, Y)
    u = U / c["a22"]
    v = V + c["a12"] * U / c["a22"]
    l1 = -sp.diff(v, Y) + c["a11"] * sp.diff(u, X) + c["a12"] * sp.diff(u, Y) + c["a1"] * u + c["b1"] * v
    l2 = sp.diff(v, X) + c["a21"] * sp.diff(u, X) + c["a22"] * sp.diff(u, Y) + c["a2"] * u + c["b2"] * v
    reps = {sp.Derivative(U, X): Ux, sp.Derivative(U, Y): Uy,
            sp.Derivative(V, X): Vx, sp.Derivative(V, Y): Vy}
    out = {}
    for name, line in (("l1", l1), ("l2", l2)):
        line = sp.expand(line.subs(reps).subs({U: Us, V: Vs}))
        for sym in (Ux, Uy, Vx, Vy, Us, Vs):
            out[f"{name}_{sym}"] = float(sp.diff(line, sym).subs({X: x, Y: y}).evalf(30))
    return out


@pytest.mark.parametrize("seed", range(8))
def test_starred_coefficients_match_symbolic_expansion(seed):
    rng = random.Random(seed)
    sys = variable_system(rng) if seed % 2 else any_system(rng, seed)
    x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
    ref = sympy_intermediate(sys, x, y)
    got = substitute(sys, x, y)
    tol = 1e-12
    assert ref["l1_Vy"] == pytest.approx(-1, abs=tol) and ref["l1_Vx"] == pytest.approx(0, abs=tol)
    assert ref["l1_Uy"] == pytest.approx(0, abs=tol)
    assert ref["l2_Vx"] == pytest.approx(1, abs=tol) and ref["l2_Vy"] == pytest.approx(0, abs=tol)
    assert ref["l2_Uy"] == pytest.approx(1, abs=tol)
    assert got.inv_alpha_coeff == pytest.approx(ref["l1_Ux"], rel=tol, abs=tol)
    assert got.mixed_coeff == pytest.approx(ref["l2_Ux"], rel=tol, abs=tol)
    assert got.a_star == pytest.approx(ref["l1_Us"], rel=1e-11, abs=tol)
    assert got.b_star == pytest.approx(ref["l1_Vs"], rel=tol, abs=tol)
    assert got.c_star == pytest.approx(ref["l2_Us"], rel=1e-11, abs=tol)
    assert got.d_star == pytest.approx(ref["l2_Vs"], rel=tol, abs=tol)


def test_substitute_constant_coefficients():
    inter = substitute(EllipticSystem.build(a11="1", a22="2"), 0.3, 0.8)
    assert (inter.a_star, inter.b_star, inter.c_star, inter.d_star) == (0, 0, 0, 0)
    assert inter.inv_alpha_coeff == 0.5 and inter.mixed_coeff == 0


def test_substitute_variable_a22():
    inter = substitute(EllipticSystem.build(a11="1", a22="1 + x^2"), 1, 0)
    assert inter.a_star == -0.5
    assert (inter.b_star, inter.c_star, inter.d_star) == (0, 0, 0)


def test_substitute_variable_a12():
    inter = substitute(EllipticSystem.build(a11="1", a22="1", a12="y", a21="-y"), 0.4, 0.7)
    assert inter.a_star == -1
    assert (inter.b_star, inter.c_star, inter.d_star) == (0, 0, 0)


def test_substitute_rejects_nonpositive_a22():
    from vekua_forge.ellsys import NonPositiveLeadingCoefficient

    with pytest.raises(NonPositiveLeadingCoefficient):
        substitute(EllipticSystem.build(a11="1", a22="x"), 0, 0)


def test_row_reduce_examples():
    inter = IntermediateSystem(1, 2, 3, 4, 1.0, 0.0, 5, 6)
    cp = row_reduce(inter, StructureParams(1, 0))
    assert (cp.a, cp.b, cp.c, cp.d, cp.f, cp.g) == (1, 2, 3, 4, 5, 6)
    inter = IntermediateSystem(1, 2, 3, 4, 0.5, -0.5, 5, 6)
    cp = row_reduce(inter, StructureParams(2, 1))
    assert (cp.a, cp.b, cp.c, cp.d, cp.f, cp.g) == (2, 4, 4, 6, 10, 11)
    cp = row_reduce(IntermediateSystem(0, 0, 0, 0, 0.5, -0.5, 3, 7), StructureParams(2, 1))
    assert (cp.a, cp.b, cp.c, cp.d, cp.f, cp.g) == (0, 0, 0, 0, 6, 10)


def test_row_reduce_rejects_non_elliptic():
    from vekua_forge.ellsys import NotElliptic

    with pytest.raises(NotElliptic):
        row_reduce(IntermediateSystem(0, 0, 0, 0, 1, -2, 0, 0), StructureParams(1, 2))


def test_principal_part_cancels():
    rng = random.Random(5)
    for k in range(100):
        sys = any_system(rng, k)
        x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
        data = rewrite_at(sys, x, y)
        inter = substitute(sys, x, y)
        assert abs(line2_ux_residual(inter, data.s)) <= 1e-14 * (1 + abs(inter.mixed_coeff))


def oracle_AB(cp: CanonicalPoint, s: StructureParams):
    """Solve A*W + B*conj(W) = ((aU + bV) + i(cU + dV)) / 2 for W = 1 and W = i."""
    rows, rhs = [], []
    for U, V in ((1.0, 0.0), (0.0, 1.0)):
        W = GC(U, V)
        # unknown vector (A_re, A_im, B_re, B_im); each product is linear in it
        cols = []
        for basis in np.eye(4):
            A, B = GC(basis[0], basis[1]), GC(basis[2], basis[3])
            z = gc_mul(A, W, s) + gc_mul(B, gc_conj(W), s)
            cols.append((z.re, z.im))
        cols = np.array(cols).T
        rows.extend(cols)
        rhs.extend([0.5 * (cp.a * U + cp.b * V), 0.5 * (cp.c * U + cp.d * V)])
    sol = np.linalg.solve(np.array(rows), np.array(rhs))
    return GC(*sol[:2]), GC(*sol[2:])


def test_assemble_examples():
    A, B, F = assemble_vekua(CanonicalPoint(1, 2, 3, 4, 2, 4), StructureParams(1, 0))
    assert (A, B, F) == (GC(1.25, 0.25), GC(-0.75, 1.25), GC(1, 2))
    for s in (StructureParams(1, 0), StructureParams(3, -1.5)):
        A, B, _ = assemble_vekua(CanonicalPoint(2, 0, 0, 2, 0, 0), s)
        assert (A, B) == (GC(1, 0), GC(0, 0))
    A, B, _ = assemble_vekua(CanonicalPoint(0, 2, 0, 0, 0, 0), StructureParams(2, 1))
    assert (A, B) == (GC(-0.25, -0.25), GC(0.25, 0.25))


def test_assemble_matches_linear_solve_oracle():
    rng = np.random.default_rng(6)
    for _ in range(200):
        beta = rng.uniform(-3, 3)
        s = StructureParams(beta**2 / 4 + rng.uniform(0.05, 4), beta)
        cp = CanonicalPoint(*rng.uniform(-5, 5, 6))
        A, B, _ = assemble_vekua(cp, s)
        A2, B2 = oracle_AB(cp, s)
        for got, want in ((A, A2), (B, B2)):
            assert got.re == pytest.approx(want.re, abs=1e-12)
            assert got.im == pytest.approx(want.im, abs=1e-12)


def test_classical_reduction_formulas():
    rng = random.Random(8)
    for _ in range(100):
        a, b, c, d = (rng.uniform(-5, 5) for _ in range(4))
        A, B, _ = assemble_vekua(CanonicalPoint(a, b, c, d, 0, 0), StructureParams(1, 0))
        ref_A = complex(a + d, c - b) / 4
        ref_B = complex(a - d, c + b) / 4
        assert abs(A.re - ref_A.real) <= 1e-14 * (1 + abs(ref_A))
        assert abs(A.im - ref_A.imag) <= 1e-14 * (1 + abs(ref_A))
        assert abs(B.re - ref_B.real) <= 1e-14 * (1 + abs(ref_B))
        assert abs(B.im - ref_B.imag) <= 1e-14 * (1 + abs(ref_B))


def test_rewrite_at_examples():
    d = rewrite_at(EllipticSystem.build(a11="1", a22="1"), 0.1, 0.2)
    assert d.s == StructureParams(1, 0)
    assert d.A == d.B == d.F == GC(0, 0)
    d = rewrite_at(EllipticSystem.build(a11="1", a22="2"), 0.1, 0.2)
    assert d.s == StructureParams(2, 0)
    assert d.A == d.B == d.F == GC(0, 0)
    sys = EllipticSystem.build(a11="1", a22="4", a12="3", a21="0", a1="1", b2="x")
    d = rewrite_at(sys, 0.5, 0.5)
    assert d.s == StructureParams(4, -3)
    cp = row_reduce(substitute(sys, 0.5, 0.5), d.s)
    assert (d.A, d.B, d.F) == assemble_vekua(cp, d.s)
    assert (d.a22, d.a12) == (4, 3)


def test_rewrite_at_annotates_stage():
    with pytest.raises(StageError) as info:
        rewrite_at(EllipticSystem.build(a11="x", a22="1"), -1, 0)
    assert info.value.stage == "structure_params"
    with pytest.raises(StageError) as info:
        rewrite_at(EllipticSystem.build(a11="1", a22="x"), -1, 0)
    assert info.value.stage == "substitute"
    with pytest.raises(StageError) as info:
        rewrite_at(EllipticSystem.build(a11="1", a22="1", a12="3"), 0, 0)
    assert info.value.stage == "row_reduce"
    with pytest.raises(StageError) as info:
        rewrite_at(EllipticSystem.build(a11="1", a22="1", a1="log(x)"), 0, 0)
    assert info.value.stage == "evaluate"


def test_push_forward_examples():
    sys = EllipticSystem.build(a11="1", a22="2")
    assert push_forward_solution(SolutionPair.build("x", "y"), sys, 3, 5) == GC(6, 5)
    assert push_forward_solution(SolutionPair.build("0", "0"), sys, 3, 5) == GC(0, 0)
    sys = EllipticSystem.build(a11="1", a22="1 + x^2", a12="y")
    assert push_forward_solution(SolutionPair.build("1", "0"), sys, 1, 2) == GC(2, -2)


def test_linear_in_lower_order_terms():
    rng = random.Random(9)
    lower = ("a1", "a2", "b1", "b2", "f1", "f2")
    for _ in range(30):
        base = variable_system(rng)
        c1 = {k: rng.uniform(-2, 2) for k in lower}
        c2 = {k: rng.uniform(-2, 2) for k in lower}
        x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
        zero = base.replace(**{k: 0 for k in lower})
        d0 = rewrite_at(zero, x, y)
        d1 = rewrite_at(base.replace(**c1), x, y)
        d2 = rewrite_at(base.replace(**c2), x, y)
        d12 = rewrite_at(base.replace(**{k: c1[k] + c2[k] for k in lower}), x, y)
        for name in ("A", "B", "F"):
            z0, z1, z2, z12 = (getattr(d, name) for d in (d0, d1, d2, d12))
            want = z1 + z2 - z0
            scale = 1 + max(abs(v) for z in (z0, z1, z2) for v in z)
            assert abs(z12.re - want.re) <= 1e-12 * scale
            assert abs(z12.im - want.im) <= 1e-12 * scale


def test_intro_special_case_lands_on_classical_algebra():
    # a11 = a22 and a21 = -a12 with variable coefficients
    sys = EllipticSystem.build(
        a11="2 + sin(x*y)", a22="2 + sin(x*y)", a12="x - y^2", a21="y^2 - x", a1="x", b2="1"
    )
    pair = SolutionPair.build("x^2*y - y", "x + 3*y^3")
    rng = random.Random(10)
    for _ in range(20):
        x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
        d = rewrite_at(sys, x, y)
        assert d.s == StructureParams(1, 0)
        r = vekua_residual(sys, pair, x, y)
        assert abs(r.re) <= 1e-12 and abs(r.im) <= 1e-12
