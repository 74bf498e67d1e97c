import numpy as np
import pytest

from magint.diffop import classical_limit
from magint.systems import builtin
from magint.verify.classical import (
    TARGET_DRIFT, StepFailure, classical_conservation, compile_flow, conservation_report, hamilton_source,
    initial_state, integrate,
)


@pytest.fixture(scope="module")
def landau_table():
    return classical_conservation(builtin("constant-B-landau"), params={"b": 1})


def test_drifts_within_calibrated_bound(landau_table):
    t = landau_table
    assert t.names == ("H", "Y1", "Y2", "X1t", "X2t", "X5")
    for n in t.names:
        assert t.final()[n] <= t.bound(n) <= TARGET_DRIFT, n


def test_step_halving_shows_fourth_order(landau_table):
    order = landau_table.observed_order("H")
    assert order is not None and order > 3.5


def test_conservation_report_passes():
    rep = conservation_report(builtin("constant-B-landau"), params={"b": 1}, t_end=20.0)
    assert rep.ok, rep.to_text()
    assert {c.check_id for c in rep.checks} >= {"drift:H", "drift:X5"}


def test_free_motion():
    s = builtin("constant-B-landau")
    y0 = np.array([0.1, -0.2, 0.3, 0.5, -0.25, 0.75])
    table = classical_conservation(s, ["H", "Y1"], {"b": 0}, t_end=2.0, step=0.01, halvings=0, y0=y0)
    assert table.final()["H"] < 1e-13
    from magint.systems import specialize, value_bindings
    sp = specialize(s, value_bindings(s, {"b": 0}))
    h = classical_limit(sp.H).to_nf()
    flow = compile_flow(hamilton_source(h, {"H": h}))
    y, _, _, _ = integrate(flow, y0, 0.01, 2.0, 1)
    assert np.allclose(y[:3], y0[:3] + 2.0 * y0[3:], atol=1e-12)
    assert np.allclose(y[3:], y0[3:], atol=1e-12)


def test_guarded_integral_rejects_vanishing_p3():
    s = builtin("constant-B-landau")
    with pytest.raises(StepFailure):
        classical_conservation(s, ["X5"], {"b": 1}, y0=[0.1, 0.2, 0.3, 0.4, 0.5, 0.0])


def test_guarded_initial_state_avoids_small_p3():
    for seed in range(20):
        assert abs(initial_state(seed, True)[5]) > 0.1


def test_unknown_integral():
    with pytest.raises(KeyError):
        classical_conservation(builtin("constant-B-landau"), ["nope"], {"b": 1}, t_end=1.0)


def test_numba_and_numpy_flows_agree():
    s = builtin("constant-B-landau")
    from magint.systems import specialize, value_bindings
    sp = specialize(s, value_bindings(s, {"b": 1}))
    h = classical_limit(sp.H).to_nf()
    src = hamilton_source(h, {"H": h})
    y0 = initial_state(3, False)
    a = integrate(compile_flow(src, use_numba=True), y0, 0.01, 5.0, 1)
    b = integrate(compile_flow(src, use_numba=False), y0, 0.01, 5.0, 1)
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-12, atol=1e-12)


def test_same_seed_same_drifts():
    s = builtin("constant-B-landau")
    a = classical_conservation(s, ["H"], {"b": 1}, t_end=5.0, halvings=0, seed=4)
    b = classical_conservation(s, ["H"], {"b": 1}, t_end=5.0, halvings=0, seed=4)
    assert a.drifts == b.drifts
