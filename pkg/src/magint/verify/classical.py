"""Classical conservation of integrals along numerically integrated trajectories.

Hamilton's equations are generated as Python source from the exact classical
limits, compiled with numba when available, and integrated with a fixed-step
RK4 scheme. A step-halving study calibrates the drift bound.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..diffop import classical_limit
from ..kernel.atoms import CARTESIAN, MOMENTA
from ..kernel.expr import Func, IntPower, Num, Product, Sum, Sym, UFunc, normalize, to_expr
from ..kernel.rational import RationalNF, diff_nf
from ..systems import SystemDef, specialize, value_bindings
from ._kernels import USE_NUMBA, maybe_njit
from .report import FAIL, INFO, PASS, Check, Report

TARGET_DRIFT = 1e-8
P3_GUARD = 0.1
STATE = tuple(CARTESIAN) + tuple(MOMENTA)


class StepFailure(RuntimeError):
    """The integrator left the domain or produced non-finite values."""


@dataclass
class DriftTable:
    """Relative drift of each integral for each step size of a study."""

    system: str
    names: tuple
    t_end: float
    steps: list = field(default_factory=list)
    drifts: list = field(default_factory=list)      # one dict per step size
    initial: dict = field(default_factory=dict)
    retries: int = 0

    def final(self) -> dict:
        return self.drifts[-1]

    def observed_order(self, name: str) -> float | None:
        """``log2`` of the drift ratio between the last two halvings, when above roundoff."""
        if len(self.drifts) < 2:
            return None
        a, b = self.drifts[-2][name], self.drifts[-1][name]
        if a <= 1e-13 or b <= 1e-15:
            return None
        return math.log2(a / b)

    def bound(self, name: str) -> float:
        """Calibrated bound for the finest step.

        Assuming fourth-order convergence, the finest drift is predicted from the
        previous one as ``d / 16``. The bound is four times that prediction, floored
        by a roundoff allowance and capped by the target.
        """
        steps = max(1.0, self.t_end / self.steps[-1])
        roundoff = 1e-14 * steps
        if len(self.drifts) < 2:
            return TARGET_DRIFT
        predicted = self.drifts[-2][name] / 16.0
        return min(TARGET_DRIFT, max(4.0 * predicted, roundoff))


# -- code generation ------------------------------------------------------------------

_PY_FUNCS = {"exp": "math.exp", "ln": "math.log", "sin": "math.sin", "cos": "math.cos"}


def _num_text(v) -> str:
    if v.im:
        raise ValueError("complex coefficient in a real trajectory; choose real parameter values")
    q = Fraction(int(v.re.numerator), int(v.re.denominator))
    return repr(float(q)) if q.denominator != 1 else f"{q.numerator}.0"


def py_source(e) -> str:
    """A real-valued Python expression for ``e`` in the state variable names."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Sym):
        if e.symbol not in STATE:
            raise ValueError(f"unbound symbol {e.symbol.name}; provide a value")
        return e.symbol.name
    if isinstance(e, Sum):
        return "(" + " + ".join(py_source(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(py_source(t) for t in e.factors) + ")"
    if isinstance(e, IntPower):
        base = py_source(e.base)
        if e.exp < 0:
            return f"(1.0 / {base} ** {-e.exp})"
        return f"({base} ** {e.exp})"
    if isinstance(e, Func):
        return f"{_PY_FUNCS[e.name]}({py_source(e.arg)})"
    if isinstance(e, UFunc):
        raise ValueError(f"uninterpreted function {e.name} cannot be integrated")
    raise TypeError(f"unsupported node {type(e).__name__}")


def _unpack(var: str = "y") -> str:
    return "\n".join(f"    {s.name} = {var}[{k}]" for k, s in enumerate(STATE))


def hamilton_source(h: RationalNF, integrals: dict) -> str:
    """Source of ``rhs``, ``invariants`` and ``rk4`` for the Hamiltonian ``h``."""
    lines = ["def rhs(y, out):", _unpack()]
    for k in range(3):
        lines.append(f"    out[{k}] = {py_source(to_expr(diff_nf(h, MOMENTA[k])))}")
    for k in range(3):
        lines.append(f"    out[{k + 3}] = -{py_source(to_expr(diff_nf(h, CARTESIAN[k])))}")
    lines += ["", "", "def invariants(y, out):", _unpack()]
    for k, f in enumerate(integrals.values()):
        lines.append(f"    out[{k}] = {py_source(to_expr(f))}")
    lines += ["", "", _RK4]
    return "\n".join(lines)


_RK4 = """def rk4(y0, h, nsteps, every, nint):
    n = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    nrec = nsteps // every + 1
    rec = np.empty((nrec, nint))
    row = np.empty(nint)
    invariants(y, row)
    rec[0, :] = row
    r = 1
    for step in range(1, nsteps + 1):
        rhs(y, k1)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        rhs(tmp, k2)
        for i in range(n):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        rhs(tmp, k3)
        for i in range(n):
            tmp[i] = y[i] + h * k3[i]
        rhs(tmp, k4)
        for i in range(n):
            y[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
        if step % every == 0:
            invariants(y, row)
            rec[r, :] = row
            r += 1
    return y, rec
"""


def compile_flow(source: str, use_numba: bool | None = None) -> dict:
    """Execute generated source and compile its functions."""
    ns = {"math": math, "np": np}
    exec(compile(source, "<hamilton>", "exec"), ns)
    jit = USE_NUMBA if use_numba is None else use_numba
    if jit:
        for name in ("rhs", "invariants", "rk4"):
            ns[name] = maybe_njit(ns[name])
    return ns


# -- conservation study -----------------------------------------------------------------

def _rational_value(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v).limit_denominator(10 ** 12)


def _specialized(s: SystemDef, params: dict) -> SystemDef:
    vals = {k: Num(_rational_value(v)) for k, v in params.items()}
    return specialize(s, value_bindings(s, vals))


def _integral_nfs(s: SystemDef, names) -> dict:
    out = {"H": classical_limit(s.H).to_nf()}
    for n in names:
        if n == "H":
            continue
        if n in s.integrals:
            out[n] = classical_limit(s.integrals[n]).to_nf()
        elif n in s.classical_integrals:
            out[n] = normalize(s.classical_integrals[n][0])
        else:
            raise KeyError(f"{s.name} has no integral {n!r}")
    return out


def initial_state(seed: int, guard: bool) -> np.ndarray:
    """Seeded start point in ``[-1, 1]^6``; with ``guard`` the third momentum avoids zero."""
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        y = rng.uniform(-1.0, 1.0, 6)
        if not guard or abs(y[5]) > P3_GUARD:
            return y
    raise StepFailure("no admissible initial state")


def _drifts(rec: np.ndarray, names) -> dict:
    ref = rec[0]
    out = {}
    for k, n in enumerate(names):
        scale = max(abs(ref[k]), 1.0)
        out[n] = float(np.max(np.abs(rec[:, k] - ref[k])) / scale)
    return out


def integrate(flow: dict, y0: np.ndarray, step: float, t_end: float, nint: int, retries: int = 3):
    """Run RK4, halving the step on non-finite output."""
    h = step
    for attempt in range(retries + 1):
        nsteps = max(1, int(round(t_end / h)))
        every = max(1, nsteps // 200)
        y, rec = flow["rk4"](np.asarray(y0, dtype=np.float64), t_end / nsteps, nsteps, every, nint)
        if np.all(np.isfinite(rec)) and np.all(np.isfinite(y)):
            return y, rec, t_end / nsteps, attempt
        h /= 2.0
    raise StepFailure(f"non-finite trajectory after {retries} step halvings")


def classical_conservation(s: SystemDef, names=None, params: dict | None = None, t_end: float = 100.0,
                           step: float = 0.02, halvings: int = 2, seed: int = 0,
                           use_numba: bool | None = None, y0=None) -> DriftTable:
    """Drift of the named integrals along one trajectory, for ``step`` and its halvings.

    ``y0`` is ``(x1, x2, x3, p1, p2, p3)``; a seeded point is drawn when omitted.
    Integrals with a guard (such as ``p3 != 0``) reject start points with
    ``|p3| <= P3_GUARD``.
    """
    sp = _specialized(s, params or {})
    names = tuple(names) if names is not None else ("H",) + tuple(sp.integrals) + tuple(sp.classical_integrals)
    nfs = _integral_nfs(sp, names)
    nfs = {n: nfs[n] for n in names}
    h = classical_limit(sp.H).to_nf()
    flow = compile_flow(hamilton_source(h, nfs), use_numba)
    guarded = any(n in sp.classical_integrals and sp.classical_integrals[n][1] for n in names)
    if y0 is None:
        y0 = initial_state(seed, guarded)
    else:
        y0 = np.asarray(y0, dtype=np.float64)
        if y0.shape != (6,):
            raise ValueError("initial state needs six components")
        if guarded and abs(y0[5]) <= P3_GUARD:
            raise StepFailure("third momentum too close to zero for a guarded integral")
    table = DriftTable(sp.name, names, t_end)
    for k in range(halvings + 1):
        _, rec, used, tries = integrate(flow, y0, step / 2 ** k, t_end, len(names))
        table.retries += tries
        table.steps.append(used)
        table.drifts.append(_drifts(rec, names))
        if k == 0:
            table.initial = dict(zip(names, rec[0].tolist()))
    return table


def conservation_report(s: SystemDef, names=None, params: dict | None = None, t_end: float = 100.0,
                        step: float = 0.02, halvings: int = 2, seed: int = 0) -> Report:
    """Report rows: one per integral, pass when the finest drift is within the calibrated bound."""
    t0 = time.perf_counter()
    table = classical_conservation(s, names, params, t_end, step, halvings, seed)
    rep = Report(s.name, "classical conservation", seed, TARGET_DRIFT, 1)
    for n in table.names:
        d = table.final()[n]
        bound = table.bound(n)
        ok = d <= bound
        history = ", ".join(f"h={h:.4g}: {dd[n]:.3e}" for h, dd in zip(table.steps, table.drifts))
        order = table.observed_order(n)
        w = history + (f"; order {order:.2f}" if order is not None else "") + f"; bound {bound:.3e}"
        cite = s.citation(n) if n != "H" else s.citation("H")
        rep.add(Check(f"drift:{n}", cite + f" (drift over t = {t_end:g})", None, d, PASS if ok else FAIL, w))
    if table.retries:
        rep.add(Check("retries", "step halvings after non-finite output", None, None, INFO, str(table.retries)))
    rep.elapsed = time.perf_counter() - t0
    return rep


__all__ = [
    "StepFailure", "DriftTable", "classical_conservation", "conservation_report", "hamilton_source",
    "compile_flow", "py_source", "initial_state", "integrate", "TARGET_DRIFT",
]
