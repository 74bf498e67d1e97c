import random

import pytest
import sympy
from hypothesis import given

from magint.diffop import (
    P2, PT, AntilinearMap, DiffOperator, PhasePolynomial, adjoint, anticommutator, apply_antilinear,
    classical_limit, commutator, compose, from_hbar_grades, from_momentum_polynomial, hbar_grade, poisson,
)
from magint.kernel.atoms import HBAR, X1, X2
from magint.kernel.expr import normalize, to_expr
from magint.kernel.rational import RationalNF
from magint.kernel.scalar import I
from magint.parser import parse_expr, render
from magint.systems import builtin, reality_bindings, specialize

from strategies import operators, poly_operators

HB = RationalNF.symbol(HBAR)


def nf(text):
    return normalize(parse_expr(text))


def op(terms):
    return DiffOperator({a: nf(c) if isinstance(c, str) else c for a, c in terms.items()})


def p(j):
    return DiffOperator.momentum(j)


def phase(text):
    from magint.diffop import phase_from_nf
    from magint.parser import Context, parse_phase
    return phase_from_nf(normalize(parse_phase(text, Context(classical=True, strict=False))))


# -- construction and composition -------------------------------------------------------

def test_momentum_polynomial_examples():
    assert from_momentum_polynomial({(1, 0, 0): 1}) == op({(1, 0, 0): "-I*hbar"})
    sym = from_momentum_polynomial({(1, 0, 0): nf("x1^2")}, "symmetrized")
    assert sym == op({(1, 0, 0): "-I*hbar*x1^2", (0, 0, 0): "-I*hbar*x1"})
    L3 = from_momentum_polynomial({(0, 1, 0): nf("x1"), (1, 0, 0): nf("-x2")})
    assert L3 == op({(0, 1, 0): "-I*hbar*x1", (1, 0, 0): "I*hbar*x2"})


def test_compose_examples():
    d1 = DiffOperator.derivative((1, 0, 0))
    x1 = DiffOperator.scalar(nf("x1"))
    assert compose(d1, x1) == op({(1, 0, 0): "x1", (0, 0, 0): "1"})
    assert compose(p(2), p(2)) == op({(0, 0, 2): "-hbar^2"})


def test_x2_tilde_squared_is_the_second_cylindrical_integral():
    s = builtin("new-complex")
    X2t = s.integrals["X2t"]
    # the gauge makes X~2 the bare momentum p3, so X2 = X~2^2 = p3^2
    assert X2t == p(2)
    X2 = compose(X2t, X2t)
    assert X2 == op({(0, 0, 2): "-hbar^2"})
    assert commutator(s.H, X2).is_zero()


def test_commutator_examples():
    assert commutator(p(0), DiffOperator.scalar(nf("x1"))) == op({(0, 0, 0): "-I*hbar"})
    s = builtin("new-complex")
    Y1, Y2, X2t = (s.integrals[k] for k in ("Y1", "Y2", "X2t"))
    assert commutator(Y2, X2t) == Y1.scale(HB)


def test_r1_r2_commutator():
    s = builtin("new-complex")
    R1, R2 = s.operator("R1"), s.operator("R2")
    X2t = s.integrals["X2t"]
    b, w1 = nf("b"), nf("w1")
    rhs = (s.H.scale(nf("4*I") * b) - compose(X2t, X2t).scale(nf("6*I") * b) + X2t.scale(nf("4*I") * w1))
    assert commutator(R1, R2) == rhs.scale(nf("I") * HB)


def test_anticommutator():
    x1 = DiffOperator.scalar(nf("x1"))
    assert anticommutator(p(0), x1) == op({(1, 0, 0): "-2*I*hbar*x1", (0, 0, 0): "-I*hbar"})


# -- adjoints and antilinear maps -------------------------------------------------------------

def test_momentum_is_symmetric():
    assert adjoint(p(0)) == p(0)


def _to_sympy(rnf, syms):
    text = render(to_expr(rnf)).replace("^", "**")
    return sympy.sympify(text, locals=syms)


def test_adjoint_of_new_system_hamiltonian_matches_integration_by_parts_rule():
    s = builtin("new-complex")
    Hd = adjoint(s.H)
    x1, x2, x3 = sympy.symbols("x1 x2 x3", real=True)
    b, w1, hbar = sympy.symbols("b w1 hbar")
    syms = {"x1": x1, "x2": x2, "x3": x3, "b": b, "w1": w1, "hbar": hbar, "I": sympy.I,
            "b_bar": sympy.conjugate(b), "w1_bar": sympy.conjugate(w1)}
    xs = (x1, x2, x3)
    h = sympy.exp(-x1**2 - x2**2 - x3**2) * (x1 + 2 * x2 + x3**2)

    def apply(D, rule):
        out = 0
        for alpha, c in D.terms.items():
            cs = _to_sympy(c, syms)
            if rule:
                cs = sympy.conjugate(cs)
                f = cs * h
                for k, n in enumerate(alpha):
                    f = sympy.diff(f, xs[k], n)
                out += (-1) ** sum(alpha) * f
            else:
                f = h
                for k, n in enumerate(alpha):
                    f = sympy.diff(f, xs[k], n)
                out += cs * f
        return out

    independent = apply(s.H, rule=True)
    computed = apply(Hd, rule=False)
    rng = random.Random(3)
    for _ in range(5):
        pt = {x1: rng.uniform(-1, 1), x2: rng.uniform(0.5, 1), x3: rng.uniform(-1, 1),
              b: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), w1: complex(rng.uniform(-1, 1), 0.3), hbar: 0.7}
        a = complex(independent.subs(pt).evalf())
        c = complex(computed.subs(pt).evalf())
        assert abs(a - c) < 1e-10 * max(1, abs(a))
    # and the rule-of-thumb form: conjugated parameters with z and zb swapped
    swapped = nf("b_bar/(2*(x1 + I*x2)^2)")
    assert Hd.coefficient((0, 0, 1)) == swapped * nf("I*hbar")


@given(operators)
def test_adjoint_is_involution(A):
    assert adjoint(adjoint(A)) == A


@given(poly_operators, poly_operators)
def test_adjoint_is_anti_homomorphism(A, B):
    assert adjoint(compose(A, B)) == compose(adjoint(B), adjoint(A))


def test_reflection_of_x2_d2():
    A = op({(0, 1, 0): "x2"})
    assert apply_antilinear(P2, A) == A


def test_new_system_is_p2_pseudo_hermitian():
    s = builtin("new-complex")
    sp = specialize(s, reality_bindings(s, {"b": "real", "w1": "real"}))
    assert apply_antilinear(P2, sp.H) == adjoint(sp.H)
    assert sp.H != adjoint(sp.H)


def test_constant_field_imaginary_b_is_pt_symmetric():
    s = builtin("constant-B-landau")
    sp = specialize(s, reality_bindings(s, {"b": "imag"}))
    assert apply_antilinear(PT, sp.H) == sp.H
    assert apply_antilinear(AntilinearMap("P", (-1, -1, -1)), sp.H) == sp.H


@given(operators)
def test_antilinear_maps_are_involutions(A):
    for M in (P2, PT):
        assert apply_antilinear(M, apply_antilinear(M, A)) == A


# -- classical limit and Poisson brackets ------------------------------------------------------

def test_classical_limit_examples():
    assert classical_limit(op({(0, 0, 2): "-hbar^2"})) == phase("p3^2")
    s = builtin("new-complex")
    X1 = classical_limit(s.integrals["X1"])
    expected = phase("(x1*p2 - x2*p1)^2 - b*(x1 + I*x2)/(x1 - I*x2)*(p3 - b/(2*(x1 - I*x2)^2))"
                     " - b^2*(x1 + I*x2)/(2*(x1 - I*x2)^3) + w1*(x1 + I*x2)/(x1 - I*x2)")
    assert X1 == expected
    c = DiffOperator.scalar(nf("x1^2*x3"))
    sym = compose(c, p(0)) + compose(p(0), c)
    assert classical_limit(sym.scale(nf("1/2")) - compose(c, p(0))).is_zero()


def test_poisson_examples():
    L3 = phase("x1*p2 - x2*p1")
    assert poisson(L3, phase("p1")) == phase("p2")
    s = builtin("new-complex")
    Hc = classical_limit(s.H)
    assert poisson(Hc, classical_limit(s.integrals["X1"])).is_zero()


@given(poly_operators)
def test_poisson_antisymmetric_self_bracket(A):
    f = classical_limit(_momentum_op(A))
    assert poisson(f, f).is_zero()


@given(poly_operators, poly_operators, poly_operators)
def test_operator_jacobi(A, B, C):
    total = (commutator(commutator(A, B), C) + commutator(commutator(B, C), A) + commutator(commutator(C, A), B))
    assert total.is_zero()


@given(poly_operators, poly_operators, poly_operators)
def test_poisson_jacobi(A, B, C):
    f, g, h = (classical_limit(_momentum_op(X)) for X in (A, B, C))
    total = poisson(poisson(f, g), h) + poisson(poisson(g, h), f) + poisson(poisson(h, f), g)
    assert total.is_zero()


@given(poly_operators, poly_operators)
def test_commutator_antisymmetric(A, B):
    assert (commutator(A, B) + commutator(B, A)).is_zero()


@given(poly_operators, poly_operators, poly_operators)
def test_compose_associative(A, B, C):
    assert compose(compose(A, B), C) == compose(A, compose(B, C))


def _momentum_op(A):
    """Rewrite d^alpha coefficients as p^alpha coefficients with hbar-free coefficients."""
    out = DiffOperator({})
    for alpha, c in A.terms.items():
        mono = DiffOperator.scalar(c)
        for k, n in enumerate(alpha):
            for _ in range(n):
                mono = compose(mono, p(k))
        out = out + mono
    return out


@given(poly_operators, poly_operators)
def test_correspondence(A, B):
    A, B = _momentum_op(A), _momentum_op(B)
    lhs = classical_limit(commutator(A, B).scale(RationalNF.const(1) / (nf("I") * HB)))
    assert lhs == poisson(classical_limit(A), classical_limit(B))


# -- hbar grading -------------------------------------------------------------------------------

def test_hbar_grade_of_momentum():
    grades = hbar_grade(p(0))
    assert list(grades) == [1]
    assert grades[1] == op({(1, 0, 0): "-I"})


@given(operators)
def test_hbar_grades_sum_back(A):
    A = A.scale(nf("1 + hbar + hbar^2*x1"))
    assert from_hbar_grades(hbar_grade(A, "momentum")) == A
    total = DiffOperator({})
    for k, G in hbar_grade(A).items():
        total = total + G.scale(HB ** k)
    assert total == A


def test_x1_r1_hbar_cubed_part():
    s = builtin("new-complex")
    X1, Y1, R1 = s.integrals["X1"], s.integrals["Y1"], s.operator("R1")
    D = commutator(X1, R1) - anticommutator(X1, Y1).scale(nf("2*I*hbar"))
    grades = {k: G for k, G in hbar_grade(D, "momentum").items() if not G.is_zero()}
    assert list(grades) == [3]
    assert grades[3] == Y1.scale(RationalNF.const(-I))


@pytest.mark.parametrize("name,integral", [("new-complex", "X1"), ("constant-B-symmetric", "X1t")])
def test_l3_squared_integral_has_no_quantum_correction_when_rotation_leaves_b3_fixed(name, integral):
    s = builtin(name)
    X = s.integrals[integral]
    if integral == "X1t":
        X = compose(X, X)
    B3 = s.B[2]
    from magint.kernel.rational import diff_nf
    x1, x2 = nf("x1"), nf("x2")
    correction = (x1 * diff_nf(B3, X2) - x2 * diff_nf(B3, X1)) * nf("-hbar^2/2")
    assert correction.is_zero()
    grades = hbar_grade(commutator(s.H, X), "momentum")
    assert all(G.is_zero() for G in grades.values())
    assert poisson(classical_limit(s.H), classical_limit(X)).is_zero()


def test_phase_polynomial_has_no_zero_terms():
    f = PhasePolynomial({(1, 0, 0): nf("0"), (0, 1, 0): nf("x1")})
    assert list(f.terms) == [(0, 1, 0)]
