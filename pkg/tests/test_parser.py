import pytest
from hypothesis import given
from hypothesis import strategies as st

from magint.diffop import OpAtom, to_diffop
from magint.kernel.atoms import Z
from magint.kernel.expr import Num, UFunc, normalize, to_expr
from magint.parser import (
    Context, ExprSyntaxError, ParseError, SystemFileError, UnknownIdentifier, parse_expr, parse_operator,
    parse_system, render, render_op,
)
from magint.systems import BUILTIN_NAMES, builtin, golden_text

from strategies import polys, rationals


def nf(text):
    return normalize(parse_expr(text))


def test_parse_new_system_potential():
    e = parse_expr("w1/(2*(x1 - I*x2)^2) - b^2/(8*(x1 - I*x2)^4)")
    assert (normalize(e) - builtin("new-complex").W).is_zero()


def test_syntax_error_span():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("((x")
    assert (info.value.span.line, info.value.span.column) == (1, 4)


def test_unknown_identifier_suggests():
    with pytest.raises(UnknownIdentifier) as info:
        parse_expr("x4 + 1", Context())
    assert "x3" in info.value.suggestions


def test_declared_uninterpreted_function():
    e = parse_expr("mu(Z)", Context(ufuncs={"mu": ((Z,), "complex")}))
    assert isinstance(e, UFunc)
    assert e.name == "mu" and tuple(e.args) == (Z,) and tuple(e.deriv) == (0,)


def test_power_is_right_associative_and_integer():
    assert (nf("x1^2^3") - nf("x1^8")).is_zero()
    with pytest.raises(ParseError):
        parse_expr("x1^x2")


def test_precedence_and_unary_minus():
    assert (nf("-x1^2") - nf("-(x1^2)")).is_zero()
    assert (nf("1 + 2*x1/4") - nf("1 + x1/2")).is_zero()


def test_render_examples():
    assert render(parse_expr("x1 - I*x2")) == "x1 - I*x2"
    assert render(Num(0)) == "0"


def test_render_inverse_square_potential():
    text = render(to_expr(builtin("inverse-square-B").W))
    assert text == "(-4*x2^2*w0 - 2*b^2)/x2^4"
    assert (nf(text) - nf("-(2*b^2 + 4*w0*x2^2)/x2^4")).is_zero()


def test_momenta_only_in_operators():
    with pytest.raises(ParseError):
        parse_expr("p1*x1", Context())
    op = parse_operator("x1*p2 - x2*p1", Context(operators=True, vector_potential=(Num(0),) * 3))
    assert to_diffop(op).degree() == 1


# -- system files ---------------------------------------------------------------------------

def test_builtin_new_complex_file():
    sf = parse_system(golden_text("new-complex"))
    assert sf.name == "new-complex"
    assert [k for k, _ in sf.integrals] == ["Y1", "Y2", "X2t", "X1"]
    assert (normalize(sf.A[2]) - nf("-b/(2*(x1 - I*x2)^2)")).is_zero()


def test_missing_vector_potential_component():
    text = golden_text("new-complex").replace("A2 = 0\n", "")
    with pytest.raises(SystemFileError) as info:
        parse_system(text)
    msgs = [d.message for d in info.value.diagnostics]
    assert any("vector_potential requires 3 components" in m for m in msgs)


def test_real_parameter_declaration():
    text = golden_text("constant-B-landau").replace("b = complex", "b = real")
    sf = parse_system(text)
    assert sf.params == [("b", "real")]
    assert sf.context.params["b"].reality == "real"


def test_undeclared_parameter_is_named():
    text = golden_text("new-complex").replace("w1 = complex\n", "")
    with pytest.raises(SystemFileError) as info:
        parse_system(text)
    first = info.value.diagnostics[0]
    assert "'w1'" in first.message
    assert first.span.line == 20


def test_invalid_utf8_is_a_diagnostic():
    with pytest.raises(SystemFileError):
        parse_system(b"\xff\xfe[system]")


@given(st.binary(max_size=200))
def test_system_parser_never_panics_on_bytes(data):
    try:
        parse_system(data)
    except SystemFileError as exc:
        assert exc.diagnostics


@given(st.text(alphabet="x123+-*/^()I b", max_size=30))
def test_expression_parser_never_panics(text):
    try:
        parse_expr(text)
    except ParseError:
        pass


# -- round trips ------------------------------------------------------------------------------

def _corpus():
    for name in BUILTIN_NAMES:
        sf = parse_system(golden_text(name))
        for a in sf.A:
            yield name, a
        yield name, sf.W
        for k, ph in sf.phase.items():
            yield name, ph


@pytest.mark.parametrize("name,expr", list(_corpus()))
def test_expression_round_trip_on_corpus(name, expr):
    ctx = parse_system(golden_text(name)).context
    again = parse_expr(render(expr), Context(coordinates=ctx.coordinates, params=ctx.params, ufuncs=ctx.ufuncs,
                                             strict=False, classical=True))
    assert (normalize(again) - normalize(expr)).is_zero()


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_operator_round_trip_on_corpus(name):
    sf = parse_system(golden_text(name))
    for key, atom in {**sf.ops, **sf.view_ops}.items():
        recipe = atom.recipe if isinstance(atom, OpAtom) else atom
        text = render_op(recipe)
        again = parse_operator(text, sf.context)
        assert to_diffop(again, sf.context.chart) == to_diffop(recipe, sf.context.chart), key


@given(st.one_of(polys, rationals))
def test_render_parse_round_trip(e):
    assert (normalize(parse_expr(render(e))) - normalize(e)).is_zero()
