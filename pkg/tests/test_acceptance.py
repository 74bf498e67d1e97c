"""Acceptance criteria 1 to 10, one PASS/FAIL line each.

The lines are printed in the "acceptance criteria" section of the pytest
terminal summary. Criteria are asserted literally; a failing line carries the
first mismatching item.
"""
import time

import pytest
from hypothesis import settings

import test_diffop
import test_geometry
import test_kernel
import test_parser
from conftest import PROFILE
from magint.geometry import MagneticField, to_cylindrical
from magint.kernel.expr import normalize
from magint.parser import parse_expr
from magint.systems import BUILTIN_NAMES, builtin
from magint.verify.classical import TARGET_DRIFT, classical_conservation
from magint.verify.determining import compatibility_replay
from magint.verify.eigen import eigen_suite, eigenfunction_residual, landau_state
from magint.verify.report import FAIL, PASS
from magint.verify.suites import (
    Settings, adjoint_classify, algebra_closure, algebra_report, default_generators, dependence_check,
    integrability_suite,
)

TOL = 1e-9
SAMPLES = 100
SETTINGS = Settings(tol=TOL, samples=SAMPLES, seed=0)


def nf(text):
    return normalize(parse_expr(text))


def _failed(rep, ids=None):
    rows = rep.checks if ids is None else [rep.by_id(i) for i in ids]
    return [f"{c.check_id} ({c.witness or c.citation})" for c in rows if c.verdict == FAIL]


def test_criterion_01_integrability(acceptance):
    with acceptance(1, "integrability suites on every builtin system") as notes:
        t0 = time.perf_counter()
        worst = 0.0
        count = 0
        for name in BUILTIN_NAMES:
            rep = integrability_suite(builtin(name), SETTINGS)
            bad = _failed(rep)
            assert not bad, f"{name}: {bad[0]}"
            for c in rep.checks:
                assert c.symbolic_zero is True, f"{name}: {c.check_id} not an exact zero"
                assert c.numeric_max < TOL, f"{name}: {c.check_id} numeric {c.numeric_max:.2e}"
                worst = max(worst, c.numeric_max)
                count += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 120.0, f"runtime {elapsed:.1f} s"
        notes.append(f"{count} commutators exact, max numeric residual {worst:.1e}, {elapsed:.1f} s")


def test_criterion_02_algebra_closure(acceptance):
    with acceptance(2, "algebra relations of the new system") as notes:
        s = builtin("new-complex")
        for v in ("R1", "R2"):
            assert v in s.views and v in default_generators(s), f"{v} is not computed from a commutator"
        rep = algebra_report(s, SETTINGS)
        ids = list(s.algebra)
        bad = _failed(rep, ids)
        assert not bad, bad[0]
        assert all(rep.by_id(i).symbolic_zero for i in ids)
        assert ids[0] == "Y1_Y2" and ids[-1] == "R1_R2"
        assert algebra_closure(s).closed()
        notes.append(f"{len(ids)} relations exact, table closed")


def test_criterion_03_hbar_grading(acceptance):
    with acceptance(3, "hbar^3 parts and the classical Poisson table"):
        rep = algebra_report(builtin("new-complex"), SETTINGS)
        bad = _failed(rep, ["hbar3:[X1,R1]", "hbar3:[X1,R2]", "classical:table"])
        assert not bad, bad[0]


def test_criterion_04_geometry(acceptance):
    with acceptance(4, "curl of each builtin gauge and div(curl) = 0") as notes:
        expected = {
            "new-complex": ("-I*b/(x1 - I*x2)^3", "-b/(x1 - I*x2)^3", "0"),
            "constant-B-landau": ("0", "0", "b"),
            "constant-B-symmetric": ("0", "0", "b"),
            "inverse-square-B": ("4*b/x2^3", "0", "0"),
        }
        for name, comps in expected.items():
            B = builtin(name).B
            assert B == MagneticField(tuple(nf(c) for c in comps)), f"{name}: B = {B}"
        assert to_cylindrical(builtin("constant-B-symmetric").B)[2] == nf("b*r")
        test_geometry.test_div_curl_vanishes()
        notes.append("4 fields exact, 200 random fields divergence-free")


ADJOINT_SCENARIOS = [
    ("new-complex", {"b": "real", "w1": "real"}, "P2-pseudo-Hermitian and not Hermitian"),
    ("constant-B-landau", {"b": "imag"}, "P, T, PT-symmetric and not Hermitian"),
    ("inverse-square-B", {"b": "imag", "w0": "imag"}, "P-pseudo-Hermitian"),
]


def test_criterion_05_adjoint_matrix(acceptance):
    with acceptance(5, "adjoint classification matrix") as notes:
        bad = []
        for name, reality, label in ADJOINT_SCENARIOS:
            rep = adjoint_classify(builtin(name), reality=reality, settings=SETTINGS)
            claims = [c for c in rep.checks if c.check_id.startswith("claim:")]
            assert claims, f"{name}: no claims"
            fails = [c for c in claims if c.verdict != PASS]
            if fails:
                scen = ",".join(f"{k}={v}" for k, v in reality.items())
                bad.append(f"{name} ({scen}) {label}: {fails[0].check_id} {fails[0].witness}")
            else:
                notes.append(f"{name} {label}")
        assert not bad, "; ".join(bad)


REPLAY_ITEMS = [
    "common:mu3", "common:mu2:pair", "common:mu2:k3", "common:mu2:k1k2", "common:rho3:printed", "k40:sigma3",
    "k40:k3mu1", "k4:rho:solves", "k4:forms:r,phi", "k4:forms:r,Z", "k4:forms:phi,Z", "k4:m:printed",
    "k4:field",
]


def test_criterion_06_appendix_replay(acceptance):
    with acceptance(6, "appendix compatibility replay of the printed conditions"):
        rep = compatibility_replay("all")
        bad = [c.check_id for c in rep.checks if c.check_id in REPLAY_ITEMS and c.verdict != PASS]
        assert len([c for c in rep.checks if c.check_id in REPLAY_ITEMS]) == len(REPLAY_ITEMS)
        assert not bad, "not reproduced: " + ", ".join(bad)


def test_criterion_07_eigenfunctions(acceptance):
    with acceptance(7, "Landau levels and the separated solution of the new system") as notes:
        s = builtin("constant-B-landau")
        for n in range(4):
            psi, E = landau_state(s, n)
            assert eigenfunction_residual(s.H, psi, E).is_zero(), f"Landau level {n}"
            assert (E - nf(f"lambda3^2/2 + hbar*b*({n} + 1/2)")).is_zero()
        rep = eigen_suite(builtin("new-complex"), SETTINGS)
        bad = _failed(rep)
        assert not bad, bad[0]
        printed = rep.by_id("separated:printed")
        assert printed.symbolic_zero is False
        notes.append("1/zb coefficient is (lambda3*b - w1)/(4*C*hbar^2); the opposite sign leaves a residual")


def test_criterion_08_dependence(acceptance):
    with acceptance(8, "dependence relation as a classical identity"):
        rep = dependence_check(builtin("inverse-square-B"), SETTINGS)
        quantum = rep.by_id("relation:quantum")
        assert quantum.detail and all(k.startswith("hbar^") for k in quantum.detail)
        c = rep.by_id("relation:classical")
        assert c.symbolic_zero, "printed relation is not a classical identity; residual " + c.witness


DRIFT_NAMES = ("H", "Y1", "Y2", "X1t", "X2t", "X5")


def test_criterion_09_classical_conservation(acceptance):
    with acceptance(9, "classical drift with b = 1 over t = 100") as notes:
        table = classical_conservation(builtin("constant-B-landau"), DRIFT_NAMES, {"b": 1}, t_end=100.0)
        for n in DRIFT_NAMES:
            d, bound = table.final()[n], table.bound(n)
            assert bound <= TARGET_DRIFT
            assert d <= bound, f"{n}: drift {d:.2e} above bound {bound:.2e}"
        notes.append("max drift " + f"{max(table.final().values()):.1e}")


PROPERTIES = [
    test_kernel.test_ring_axioms,
    test_kernel.test_diff_is_derivation,
    test_diffop.test_operator_jacobi,
    test_diffop.test_poisson_jacobi,
    test_diffop.test_adjoint_is_anti_homomorphism,
    test_parser.test_render_parse_round_trip,
]


def test_criterion_10_properties(acceptance):
    with acceptance(10, "kernel and operator properties at 1000 cases each") as notes:
        settings.load_profile("magint")
        try:
            assert settings.default.max_examples == 1000 and settings.default.derandomize
            for prop in PROPERTIES:
                prop()
        finally:
            settings.load_profile(PROFILE)
        corpus = list(test_parser._corpus())
        for name, expr in corpus:
            test_parser.test_expression_round_trip_on_corpus(name, expr)
        for name in BUILTIN_NAMES:
            test_parser.test_operator_round_trip_on_corpus(name)
        notes.append(f"{len(PROPERTIES)} properties, {len(corpus)} corpus expressions round-trip")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_every_builtin_has_integrals(name):
    assert builtin(name).integrals
