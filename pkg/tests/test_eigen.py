import pytest

from magint.kernel.expr import DivisionByZero, normalize
from magint.kernel.rational import RationalNF
from magint.parser import parse_expr
from magint.systems import builtin
from magint.verify.eigen import (
    eigen_suite, eigenfunction_residual, hermite_coefficients, landau_state, new_system_state,
    printed_exponent_coefficient, solve_exponent_coefficient,
)
from magint.verify.report import INFO, PASS


def nf(text):
    return normalize(parse_expr(text))


def test_hermite_coefficients():
    assert hermite_coefficients(0) == [1]
    assert hermite_coefficients(1) == [0, 2]
    assert hermite_coefficients(2) == [-2, 0, 4]
    assert hermite_coefficients(3) == [0, -12, 0, 8]
    with pytest.raises(ValueError):
        hermite_coefficients(-1)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_landau_levels_are_exact(n):
    s = builtin("constant-B-landau")
    psi, E = landau_state(s, n)
    assert eigenfunction_residual(s.H, psi, E).is_zero()
    assert (E - nf(f"lambda3^2/2 + hbar*b*({n} + 1/2)")).is_zero()


def test_landau_center_sign():
    s = builtin("constant-B-landau")
    psi, E = landau_state(s, 0, center="printed")
    res = eigenfunction_residual(s.H, psi, E)
    assert res == nf("2*x1*b*lambda2")


def test_exponent_coefficient_is_determined():
    s = builtin("new-complex")
    a = solve_exponent_coefficient(s)
    assert (a - nf("(lambda3*b - w1)/(4*C*hbar^2)")).is_zero()
    psi, E = new_system_state(s, a)
    assert eigenfunction_residual(s.H, psi, E).is_zero()


def test_printed_sign_leaves_a_residual():
    s = builtin("new-complex")
    pa = printed_exponent_coefficient(s)
    psi, E = new_system_state(s, pa)
    res = eigenfunction_residual(s.H, psi, E)
    assert not res.is_zero()
    assert (res - nf("(w1 - lambda3*b)/(x1 - I*x2)^2")).is_zero()


def test_zero_candidate_is_rejected():
    s = builtin("constant-B-landau")
    with pytest.raises(DivisionByZero):
        eigenfunction_residual(s.H, RationalNF.const(0), nf("1"))


def test_eigen_suite_reports():
    rep = eigen_suite(builtin("new-complex"))
    assert rep.ok
    assert rep.by_id("separated:solved").verdict == PASS
    assert rep.by_id("separated:solved").numeric_max < 1e-9
    assert rep.by_id("separated:printed").verdict == INFO
    rep = eigen_suite(builtin("constant-B-landau"))
    assert [c.check_id for c in rep.checks][:4] == [f"landau:n={n}" for n in range(4)]
    assert all(c.numeric_max < 1e-9 for c in rep.checks[:4])


def test_eigen_suite_unknown_system():
    with pytest.raises(KeyError):
        eigen_suite(builtin("inverse-square-B"))
