import pytest

from magint.diffop import DiffOperator, commutator, compose
from magint.kernel.expr import Num, normalize
from magint.parser import SystemFileError, parse_expr, parse_system
from magint.systems import (
    BUILTIN_NAMES, UnknownSystem, available, builtin, golden_text, load, reality_bindings, specialize,
    value_bindings,
)


def nf(text):
    return normalize(parse_expr(text))


def op(terms):
    return DiffOperator({a: nf(c) for a, c in terms.items()})


def test_available_lists_every_builtin():
    assert available() == BUILTIN_NAMES
    for name in BUILTIN_NAMES:
        assert builtin(name).name == name


def test_unknown_system_names_alternatives():
    with pytest.raises(UnknownSystem) as info:
        builtin("nope")
    assert "new-complex" in str(info.value)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_hamiltonian_has_magnetic_shape(name):
    H = builtin(name).H
    # the principal part is -hbar^2/2 times the Laplacian
    for k in range(3):
        alpha = tuple(2 if j == k else 0 for j in range(3))
        assert H.coefficient(alpha) == nf("-hbar^2/2")
    assert H.degree() == 2


def test_new_system_hamiltonian_explicit():
    H = builtin("new-complex").H
    expected = op({
        (2, 0, 0): "-hbar^2/2", (0, 2, 0): "-hbar^2/2", (0, 0, 2): "-hbar^2/2",
        (0, 0, 1): "I*hbar*b/(2*(x1 - I*x2)^2)",
        (0, 0, 0): "w1/(2*(x1 - I*x2)^2)",
    })
    assert H == expected


def test_magnetic_momenta_commute_when_b3_vanishes():
    s = builtin("new-complex")
    p1, p2 = s.operator("pAz"), s.operator("pAzb")
    assert commutator(p1, p2).is_zero()


def test_landau_free_limit():
    s = builtin("constant-B-landau")
    free = specialize(s, value_bindings(s, {"b": 0}))
    lap = op({(2, 0, 0): "-hbar^2/2", (0, 2, 0): "-hbar^2/2", (0, 0, 2): "-hbar^2/2"})
    assert free.H == lap
    assert free.integrals["Y1"] == DiffOperator.momentum(0)


def test_inverse_square_potential():
    s = builtin("inverse-square-B")
    assert s.W == nf("-(2*b^2 + 4*w0*x2^2)/x2^4")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_load_is_structural(name):
    a = load(parse_system(golden_text(name)))
    b = builtin(name)
    assert a.H == b.H
    assert a.integrals == b.integrals
    assert a.A == b.A and a.W == b.W


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_displayed_relations_hold(name):
    s = builtin(name)
    for key, pair in s.relations.items():
        lhs, rhs = s.identity_operators(pair)
        assert lhs == rhs, key


def test_x2_from_x2_tilde():
    s = builtin("constant-B-symmetric")
    X2t = s.integrals["X2t"]
    assert commutator(s.H, compose(X2t, X2t)).is_zero()


CYLINDRICAL_FILE = """\
[system]
name = cyl-constant
coordinates = cylindrical

[params]
b = real

[potential]
A_r = 0
A_phi = b*r^2/2
A_Z = 0
W = 0

[integrals]
X2t = pAZ
"""


def test_cylindrical_file_matches_symmetric_gauge():
    s = load(parse_system(CYLINDRICAL_FILE))
    assert s.frame == "cylindrical"
    assert s.B[2] == normalize(parse_expr("b", _real_b_context()))
    sym = builtin("constant-B-symmetric")
    b = sym.params["b"]
    ref = specialize(sym, {b: parse_expr("b", _real_b_context())})
    assert s.H == ref.H
    assert commutator(s.H, s.integrals["X2t"]).is_zero()


def _real_b_context():
    from magint.parser import Context
    from magint.kernel.atoms import parameter
    return Context(params={"b": parameter("b", "real")})


def test_undeclared_parameter_in_integral():
    text = golden_text("constant-B-landau").replace("Y1 = pA1 + b*x2", "Y1 = pA1 + c*x2")
    with pytest.raises(SystemFileError) as info:
        parse_system(text)
    assert any("'c'" in d.message for d in info.value.diagnostics)


def test_reality_bindings():
    s = builtin("constant-B-landau")
    sp = specialize(s, reality_bindings(s, {"b": "imag"}))
    assert sp.params["b"].reality == "real"
    assert sp.A[1] == nf("I*x1") * normalize(parse_expr("b", _real_b_context()))
    with pytest.raises(KeyError):
        reality_bindings(s, {"zz": "real"})
    with pytest.raises(ValueError):
        reality_bindings(s, {"b": "sideways"})
    assert specialize(s, {}) is s


def test_value_bindings_accepts_exprs():
    s = builtin("constant-B-landau")
    sp = specialize(s, value_bindings(s, {"b": Num(2)}))
    assert sp.B[2] == nf("2")


# -- negative controls: forms that do not commute -----------------------------------------

def _operator(s, text):
    from magint.diffop import to_diffop
    from magint.parser import parse_operator
    return to_diffop(parse_operator(text, s.source.context), s.chart)


@pytest.mark.parametrize("name", ["constant-B-landau", "constant-B-symmetric"])
@pytest.mark.parametrize("text", ["pA1 - b*x2", "pA2 + b*x1", "LA3 + b*(x1^2 + x2^2)/2"])
def test_opposite_sign_constant_field_integrals_fail(name, text):
    s = builtin(name)
    assert not commutator(s.H, _operator(s, text)).is_zero()


def test_unit_weight_w3_integral_fails():
    s = builtin("constant-B-W3")
    assert not commutator(s.H, _operator(s, "pA3^2 + W3(x3)")).is_zero()
    assert commutator(s.H, _operator(s, "pA3^2 + 2*W3(x3)")).is_zero()


def test_shifted_nonpolynomial_integral_fails():
    from magint.diffop import classical_limit, poisson_nf
    from magint.parser import parse_phase
    s = builtin("constant-B-landau")
    h = classical_limit(s.H).to_nf()
    ctx = s.source.context
    bad = normalize(parse_phase("(pA2 + b*x1)*sin(b*x3/pA3) - (pA1 - b*x2)*cos(b*x3/pA3)", ctx))
    good = normalize(s.classical_integrals["X5"][0])
    assert not poisson_nf(h, bad).is_zero()
    assert poisson_nf(h, good).is_zero()
