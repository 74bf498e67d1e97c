import cmath
import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from magint.kernel.atoms import PHI, R, U, X1, X2, X3, Z, parameter
from magint.kernel.expr import (
    CyclicBinding, DivisionByZero, MissingBinding, Num, add, conjugate, diff, eval_numeric, mul, normalize,
    power, substitute, sym, to_expr,
)
from magint.kernel.rational import NF_ZERO, RationalNF, UnsupportedNode, func, ufunc
from magint.kernel.scalar import I, Scalar
from magint.parser import Context, parse_expr, render

from strategies import VARS, polys, rationals


def p(text, **kw):
    return parse_expr(text, Context(strict=False, **kw))


def nf(text, **kw):
    return normalize(p(text, **kw))


# -- Scalar -----------------------------------------------------------------------------

def test_scalar_exact_and_reduced():
    a = Scalar(6, -4) / Scalar(4)
    assert (a.re, a.im) == (sympy.Rational(3, 2), sympy.Rational(-1))
    assert a.re.denominator > 0
    third = Scalar(1) / Scalar(3)
    assert third * Scalar(3) == Scalar(1)
    assert I * I == Scalar(-1)


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_scalar_lowest_terms(a, b):
    s = Scalar(a, b)
    for part in (s.re, s.im):
        assert part.denominator > 0
        assert sympy.gcd(int(part.numerator), int(part.denominator)) == 1


# -- normalize --------------------------------------------------------------------------

def test_normalize_cancels_gaussian_factor():
    f = nf("(x1 - I*x2)^2*(x1 + I*x2)/(x1^2 + x2^2)")
    assert (f - nf("x1 - I*x2")).is_zero()
    assert f.is_poly()


def test_normalize_zero_form():
    f = nf("(x1 + x2) - (x2 + x1)")
    assert f.is_zero()
    assert f.num.is_zero() and f.den.is_const() and f.den.const_value() == Scalar(1)
    assert f == NF_ZERO


def test_normalize_new_system_potential_common_denominator():
    w = nf("w1/(2*(x1 - I*x2)^2) - b^2/(8*(x1 - I*x2)^4)")
    common = nf("(4*w1*(x1 - I*x2)^2 - b^2)/(8*(x1 - I*x2)^4)")
    assert (w - common).is_zero()
    # independent oracle
    x1, x2, w1, b = sympy.symbols("x1 x2 w1 b")
    zb = x1 - sympy.I * x2
    assert sympy.simplify(w1 / (2 * zb**2) - b**2 / (8 * zb**4) - (4 * w1 * zb**2 - b**2) / (8 * zb**4)) == 0


def test_normalize_denominator_is_monic():
    f = nf("3/(2*x1 + 4*x2)")
    _, lc = f.den.canonical_leading()
    assert lc == Scalar(1)


def test_unsupported_nodes_rejected():
    from magint.kernel.expr import Func, UFunc
    with pytest.raises(UnsupportedNode):
        Func("tan", sym(X1))
    with pytest.raises(UnsupportedNode):
        UFunc("m", [parameter("b")], (0,))


# -- diff -------------------------------------------------------------------------------

def test_diff_log():
    assert (normalize(diff(p("ln(r)"), R)) - nf("1/r")).is_zero()


def test_diff_field_component():
    d = diff(p("-b/(2*(x1 - I*x2)^2)"), X2)
    assert (normalize(d) - nf("-I*b/(x1 - I*x2)^3")).is_zero()


def test_diff_uninterpreted():
    ctx = dict(ufuncs={"mu": ((Z,), "complex")})
    d = diff(p("mu(Z)*r^2", **ctx), Z)
    expected = ufunc("mu", (Z,), (1,)) * normalize(mul(sym(R), sym(R)))
    assert (normalize(d) - expected).is_zero()


def test_diff_unrelated_symbol_is_zero():
    assert normalize(diff(p("b*x1^2"), X3)).is_zero()


# -- substitute -------------------------------------------------------------------------

def test_substitute_reflection():
    e = substitute(p("x1*x2"), {X2: mul(Num(-1), sym(X2))})
    assert (normalize(e) - nf("-x1*x2")).is_zero()


def test_substitute_cosine_is_even():
    e = substitute(p("(u + 1/u)/2"), {U: power(sym(U), -1)})
    assert (normalize(e) - nf("(u + 1/u)/2")).is_zero()


def test_substitute_complex_coordinates():
    z, zb = parameter("z"), parameter("zb")
    e = substitute(mul(sym(z), sym(zb)), {z: p("x1 + I*x2"), zb: p("x1 - I*x2")})
    assert (normalize(e) - nf("x1^2 + x2^2")).is_zero()


def test_substitute_cycle_rejected():
    a, b = parameter("a"), parameter("b")
    with pytest.raises(CyclicBinding):
        substitute(sym(a), {a: sym(b), b: sym(a)})


# -- conjugate --------------------------------------------------------------------------

def test_conjugate_complex_parameter_and_phase():
    e = conjugate(p("I*b*u"))
    bbar = parameter("b_bar")
    expected = mul(Num(-I), sym(bbar), power(sym(U), -1))
    assert (normalize(e) - normalize(expected)).is_zero()


def test_conjugate_real_parameter():
    beta = parameter("beta", "real")
    e = conjugate(mul(Num(I), sym(beta)))
    assert (normalize(e) - normalize(mul(Num(-I), sym(beta)))).is_zero()


def test_conjugate_coordinates_fixed():
    assert (normalize(conjugate(p("x1 - I*x2"))) - nf("x1 + I*x2")).is_zero()


@given(st.one_of(polys, rationals))
def test_conjugate_is_involution(e):
    assert (normalize(conjugate(conjugate(e))) - normalize(e)).is_zero()


# -- eval_numeric -----------------------------------------------------------------------

def test_eval_numeric_examples():
    assert eval_numeric(p("x1 - I*x2"), {"x1": 1, "x2": 2}) == 1 - 2j
    assert eval_numeric(p("b/(2*(x1 - I*x2)^2)"), {"x1": 1, "x2": 0, "b": 2}) == pytest.approx(1)
    assert eval_numeric(p("u"), {"phi": 0.3}) == pytest.approx(cmath.exp(0.3j))


def test_eval_numeric_errors():
    with pytest.raises(DivisionByZero):
        eval_numeric(p("1/x1"), {"x1": 0})
    with pytest.raises(MissingBinding):
        eval_numeric(p("x1 + b"), {"x1": 1})


def test_eval_numeric_uninterpreted_table():
    e = p("mu(Z)^2", ufuncs={"mu": ((Z,), "complex")})
    assert eval_numeric(e, {"Z": 3.0}, {"mu": lambda d, z: z}) == pytest.approx(9)


def test_exp_atom_derivative():
    f = func("exp", nf("b*x1"))
    from magint.kernel.rational import diff_nf
    assert (diff_nf(f, X1) - f * nf("b")).is_zero()


# -- properties -------------------------------------------------------------------------

@given(rationals, rationals, rationals)
def test_ring_axioms(a, b, c):
    A, B, C = normalize(a), normalize(b), normalize(c)
    assert ((A + B) + C - (A + (B + C))).is_zero()
    assert ((A * B) * C - A * (B * C)).is_zero()
    assert (A + B - (B + A)).is_zero()
    assert (A * B - B * A).is_zero()
    assert (A * (B + C) - (A * B + A * C)).is_zero()


@given(rationals, rationals, st.sampled_from(VARS))
def test_diff_is_derivation(a, b, v):
    lhs = normalize(diff(mul(a, b), v))
    rhs = normalize(add(mul(diff(a, v), b), mul(a, diff(b, v))))
    assert (lhs - rhs).is_zero()


@given(st.one_of(polys, rationals))
def test_normalize_idempotent(e):
    f = normalize(e)
    g = normalize(parse_expr(render(to_expr(f)), Context(strict=False)))
    assert g == f


@given(rationals, st.integers(0, 2 ** 31))
def test_eval_agrees_with_normal_form(e, seed):
    rng = random.Random(seed)
    point = {v.name: complex(rng.uniform(-2, 2), 0 if v.kind == "coordinate" else rng.uniform(-2, 2)) for v in VARS}
    a = eval_numeric(e, point)
    b = eval_numeric(to_expr(normalize(e)), point)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_rational_invariants_gcd():
    f = nf("(x1^2 - x2^2)/(x1 + x2)")
    assert f == nf("x1 - x2")
    assert RationalNF.const(0) == NF_ZERO
    assert PHI.kind == "coordinate"
