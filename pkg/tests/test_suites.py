import pytest

from magint.diffop import from_momentum_polynomial
from magint.kernel.expr import normalize
from magint.parser import parse_expr
from magint.systems import BUILTIN_NAMES, builtin
from magint.verify.report import FAIL, INFO, PASS
from magint.verify.suites import (
    ClosureFailure, Settings, adjoint_classify, algebra_closure, algebra_report, check_commutes,
    dependence_check, integrability_suite,
)


def nf(text):
    return normalize(parse_expr(text))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_integrability_every_builtin(name):
    rep = integrability_suite(builtin(name), classical=True)
    assert rep.ok, rep.to_text()
    for c in rep.checks:
        assert c.symbolic_zero is True
        assert c.numeric_max is not None and c.numeric_max < 1e-9


def test_integrability_covers_every_integral():
    s = builtin("new-complex")
    rep = integrability_suite(s)
    ids = [c.check_id for c in rep.checks]
    assert ids[:4] == ["[Y1,H]", "[Y2,H]", "[X2t,H]", "[X1,H]"]
    assert "X1_X2t" in ids and "pA1_pA2" in ids


def test_commutator_with_rotation_is_not_zero():
    s = builtin("new-complex")
    L3 = from_momentum_polynomial({(0, 1, 0): nf("x1"), (1, 0, 0): nf("-x2")})
    res = check_commutes(s.H, L3)
    assert not res.zero
    assert res.witness.startswith("coefficient of")


def test_settings_validation():
    with pytest.raises(ValueError):
        Settings(tol=0)
    with pytest.raises(ValueError):
        Settings(samples=0)


def test_algebra_report_new_system():
    rep = algebra_report(builtin("new-complex"))
    assert rep.ok, rep.to_text()
    ids = [c.check_id for c in rep.checks]
    expected = ["Y1_Y2", "Y1_X2t", "Y2_X2t", "X1_X2t", "Y1_R1", "Y2_R1", "X2t_R1", "Y1_R2", "Y2_R2", "X2t_R2",
                "X1_R1", "X1_R2", "R1_R2"]
    assert ids[:len(expected)] == expected
    for c in rep.checks[:len(expected)]:
        assert c.symbolic_zero is True


def test_algebra_table_closes():
    table = algebra_closure(builtin("new-complex"))
    assert table.generators == ("Y1", "Y2", "X2t", "X1", "R1", "R2")
    assert table.antisymmetric()
    assert table.closed()


def test_algebra_closure_strict_raises_on_missing_relation():
    s = builtin("new-complex")
    s2 = type(s)(**{**s.__dict__, "algebra": {}})
    with pytest.raises(ClosureFailure):
        algebra_closure(s2, ("Y2", "X2t"), strict=True)


def test_hbar_cubed_checks():
    rep = algebra_report(builtin("new-complex"))
    for key in ("hbar3:[X1,R1]", "hbar3:[X1,R2]"):
        c = rep.by_id(key)
        assert c.verdict == PASS and c.symbolic_zero


def test_classical_table():
    rep = algebra_report(builtin("new-complex"))
    assert rep.by_id("classical:table").verdict == PASS
    info = rep.by_id("classical:quantum-corrections")
    assert info.verdict == INFO
    assert "[R1,X1]:hbar^3" in info.witness


def test_adjoint_new_system():
    rep = adjoint_classify(builtin("new-complex"), reality={"b": "real", "w1": "real"})
    assert rep.ok, rep.to_text()
    assert rep.by_id("P2:pseudo-hermiticity").detail["holds"]
    assert not rep.by_id("hermiticity").detail["holds"]


@pytest.mark.parametrize("name", ["constant-B-landau", "constant-B-symmetric"])
def test_adjoint_constant_field_imaginary(name):
    rep = adjoint_classify(builtin(name), reality={"b": "imag"})
    assert rep.ok, rep.to_text()
    for key in ("P:symmetry", "T:symmetry", "PT:symmetry"):
        assert rep.by_id(key).detail["holds"]
    assert not rep.by_id("hermiticity").detail["holds"]


def test_adjoint_constant_field_complex():
    rep = adjoint_classify(builtin("constant-B-landau"))
    assert rep.ok, rep.to_text()
    assert rep.by_id("P:symmetry").detail["holds"]


def test_adjoint_inverse_square_real_is_pt_symmetric():
    rep = adjoint_classify(builtin("inverse-square-B"), reality={"b": "real", "w0": "real"})
    assert rep.ok
    assert rep.by_id("PT:symmetry").detail["holds"]


def test_adjoint_inverse_square_imaginary_p_claim_does_not_hold():
    # The exact computation contradicts P-pseudo-Hermiticity here; PT-pseudo-Hermiticity holds instead.
    rep = adjoint_classify(builtin("inverse-square-B"), reality={"b": "imag", "w0": "imag"})
    claim = rep.by_id("claim:P:pseudo-hermiticity")
    assert claim.verdict == FAIL
    assert claim.symbolic_zero is False
    assert rep.by_id("PT:pseudo-hermiticity").detail["holds"]
    assert not rep.ok


def test_adjoint_numeric_agrees_with_symbolic():
    rep = adjoint_classify(builtin("new-complex"))
    for c in rep.checks:
        if c.numeric_max is not None and c.check_id.count(":") == 1 and not c.check_id.startswith("claim"):
            assert (c.numeric_max < 1e-9) == c.symbolic_zero, c.check_id


def test_dependence_relation():
    rep = dependence_check(builtin("inverse-square-B"))
    printed = rep.by_id("relation:classical")
    assert printed.verdict == FAIL and printed.symbolic_zero is False
    corrected = rep.by_id("relation_corrected:classical")
    assert corrected.verdict == PASS and corrected.symbolic_zero
    quantum = rep.by_id("relation_corrected:quantum")
    assert quantum.verdict == INFO
    assert set(quantum.detail) == {"hbar^1", "hbar^2"}


def test_dependence_with_values():
    rep = dependence_check(builtin("inverse-square-B"), values={"b": 1, "w0": 2})
    assert rep.by_id("relation_corrected:classical").verdict == PASS


def test_report_rendering_roundtrip():
    import json
    rep = integrability_suite(builtin("constant-B-landau"), Settings(samples=10))
    doc = json.loads(rep.to_json())
    assert doc["ok"] is True
    assert doc["system"] == "constant-B-landau"
    assert [r["check_id"] for r in doc["checks"]] == [c.check_id for c in rep.checks]
    assert "all checks pass" in rep.to_text()


def test_no_numeric_setting():
    rep = integrability_suite(builtin("constant-B-landau"), Settings(numeric=False))
    assert all(c.numeric_max is None for c in rep.checks)
    assert rep.ok
