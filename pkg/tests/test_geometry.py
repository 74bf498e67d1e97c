import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magint.diffop import to_diffop
from magint.geometry import (
    AuxFunctions, MagneticField, VectorField, closure, curl, div, field_from_aux, gauge_conjugate, gauge_shift,
    grad, hamiltonian_recipe, to_cartesian, to_cylindrical,
)
from magint.kernel.atoms import parameter
from magint.kernel.expr import eval_numeric, normalize, to_expr
from magint.kernel.rational import subst_nf
from magint.parser import parse_expr
from magint.systems import BUILTIN_NAMES, builtin

from strategies import coefficients, poly_coefficients


def nf(text):
    return normalize(parse_expr(text))


def field(*texts, frame="cartesian"):
    return VectorField(tuple(nf(t) for t in texts), frame)


def bfield(*texts, frame="cartesian"):
    return MagneticField(tuple(nf(t) for t in texts), frame)


def test_curl_landau_gauge():
    assert curl(field("0", "b*x1", "0")) == bfield("0", "0", "b")


def test_curl_new_system_gauge():
    B = curl(field("0", "0", "-b/(2*(x1 - I*x2)^2)"))
    assert B == bfield("-I*b/(x1 - I*x2)^3", "-b/(x1 - I*x2)^3", "0")


def test_curl_of_gradient_vanishes():
    assert curl(grad(nf("x1^2*x2"))) == bfield("0", "0", "0")


@pytest.mark.parametrize("name,expected", [
    ("new-complex", ("-I*b/(x1 - I*x2)^3", "-b/(x1 - I*x2)^3", "0")),
    ("constant-B-landau", ("0", "0", "b")),
    ("constant-B-symmetric", ("0", "0", "b")),
    ("inverse-square-B", ("4*b/x2^3", "0", "0")),
])
def test_builtin_fields(name, expected):
    assert builtin(name).B == bfield(*expected)


def test_constant_field_in_cylindrical_form():
    assert to_cylindrical(bfield("0", "0", "b")) == bfield("0", "0", "b*r", frame="cylindrical")


def test_appendix_field_converts_to_new_system():
    aux = AuxFunctions(rho=nf("rho3*r^2 + rho1 + rho2/r"), sigma=nf("sigma3 + sigma1/r^2"),
                       psi=nf("psi3*(u + 1/u) + I*psi2*u + rho2"), tau=nf("sigma1 - tau2*u^2"), mu=nf("rho3"))
    _, B = field_from_aux(aux)
    assert B == bfield("-I*tau2*u^2/r^2", "-tau2*u^2/r^3", "0", frame="cylindrical")
    cart = to_cartesian(B)
    target = builtin("new-complex").B
    target = MagneticField(tuple(subst_nf(c, {parameter("b"): nf("tau2")}) for c in target.components))
    assert cart == target
    # numeric cross-check of the conversion at random points
    rng = random.Random(11)
    for _ in range(10):
        x1, x2, x3 = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)
        tau2 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        import cmath
        r, phi = abs(complex(x1, x2)), cmath.phase(complex(x1, x2))
        br = eval_numeric(to_expr(B[0]), {"r": r, "phi": phi, "tau2": tau2})
        bphi = eval_numeric(to_expr(B[1]), {"r": r, "phi": phi, "tau2": tau2})
        c, s = x1 / r, x2 / r
        b1 = c * br / r - s * bphi
        got = eval_numeric(to_expr(target[0]), {"x1": x1, "x2": x2, "x3": x3, "tau2": tau2})
        assert abs(b1 - got) < 1e-10 * max(1.0, abs(got))


def test_constant_field_from_aux():
    aux = AuxFunctions(rho=nf("0"), sigma=nf("0"), psi=nf("0"), tau=nf("0"), mu=nf("mu2"))
    _, B = field_from_aux(aux)
    assert B == bfield("0", "0", "r*mu2", frame="cylindrical")


def test_symbolic_aux_field():
    s, B = field_from_aux(AuxFunctions())
    assert s["s2_r"].is_zero()
    assert closure(B).is_zero()
    assert len(B[2].atoms()) >= 3


def test_aux_rejects_two_variable_dependence():
    with pytest.raises(ValueError):
        AuxFunctions(rho=nf("r*Z")).resolved()


def test_gauge_shift_landau_to_symmetric():
    A = gauge_shift(field("0", "b*x1", "0"), nf("-b*x1*x2/2"))
    assert A == field("-b*x2/2", "b*x1/2", "0")


def test_gauge_shift_zero_is_identity():
    A = builtin("new-complex").A
    assert gauge_shift(A, nf("0")) == A
    H = builtin("new-complex").H
    assert gauge_conjugate(H, nf("0")) == H


def _hamiltonian(A, W):
    return to_diffop(hamiltonian_recipe(A.exprs(), to_expr(W)))


@settings(max_examples=200)
@given(st.tuples(poly_coefficients, poly_coefficients, poly_coefficients), poly_coefficients, poly_coefficients)
def test_gauge_conjugation_matches_shift(comps, W, chi):
    A = VectorField(comps)
    lhs = gauge_conjugate(_hamiltonian(A, W), chi)
    rhs = _hamiltonian(gauge_shift(A, chi), W)
    assert lhs == rhs


@settings(max_examples=200)
@given(st.tuples(coefficients, coefficients, coefficients))
def test_div_curl_vanishes(comps):
    assert div(curl(VectorField(comps))).is_zero()


@settings(max_examples=200)
@given(st.tuples(coefficients, coefficients, coefficients), coefficients)
def test_curl_is_gauge_invariant(comps, chi):
    A = VectorField(comps)
    assert curl(gauge_shift(A, chi)) == curl(A)


@settings(max_examples=200)
@given(st.tuples(coefficients, coefficients, coefficients))
def test_cylindrical_round_trip(comps):
    A = VectorField(comps)
    assert to_cartesian(to_cylindrical(A)) == A
    B = curl(A)
    assert to_cartesian(to_cylindrical(B)) == B


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_corpus_round_trip(name):
    s = builtin(name)
    assert to_cartesian(to_cylindrical(s.A)) == s.A
    assert to_cartesian(to_cylindrical(s.B)) == s.B
    assert to_cartesian(to_cylindrical(s.W)) == s.W


_consts = st.sampled_from(["0", "1", "c1", "2*c2", "I*c3"])


@given(_consts, _consts, _consts, _consts, _consts)
def test_aux_field_is_closed(a, b, c, d, e):
    aux = AuxFunctions(rho=nf(f"{a}*r^2 + {b}/r"), sigma=nf(f"{c} + {d}/r^2"),
                       psi=nf(f"{e}*(u + 1/u)"), tau=nf(f"{a} - {b}*u^2"), mu=nf(f"{c}*Z^2 + {d}"))
    _, B = field_from_aux(aux)
    assert closure(B).is_zero()
