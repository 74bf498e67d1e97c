"""Eigenfunction residuals for the separated solutions of the Schroedinger equation."""
from __future__ import annotations

import time

from ..diffop import DiffOperator
from ..kernel.atoms import HBAR, X1, X2, X3, parameter
from ..kernel.expr import DivisionByZero, normalize, to_expr
from ..kernel.rational import RationalNF, diff_nf, func, nf_text, subst_nf
from ..kernel.scalar import I
from ..systems import SystemDef
from .numeric import eigen_claim
from .report import FAIL, INFO, PASS, Check, Report, decide
from .suites import Settings, _settings

LANDAU_LEVELS = (0, 1, 2, 3)


def _nf(x) -> RationalNF:
    return x if isinstance(x, RationalNF) else normalize(x)


def eigenfunction_residual(H: DiffOperator, psi, E) -> RationalNF:
    """``((H - E) psi) / psi``; zero exactly when ``psi`` is an eigenfunction."""
    psi, E = _nf(psi), _nf(E)
    if psi.is_zero():
        raise DivisionByZero("eigenfunction candidate is identically zero")
    return (H.apply(psi) - E * psi) / psi


def hermite_coefficients(n: int) -> list:
    """Integer coefficients of the physicists' Hermite polynomial ``H_n``, lowest degree first."""
    if n < 0:
        raise ValueError("Hermite index must be nonnegative")
    prev, cur = [1], [0, 2]
    if n == 0:
        return prev
    for k in range(1, n):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= 2 * k * c
        prev, cur = cur, nxt
    return cur


def scaled_hermite(n: int, xi: RationalNF, s: RationalNF) -> RationalNF:
    """``s^(-n/2) H_n(sqrt(s) xi)``, a polynomial in ``xi`` with coefficients rational in ``s``."""
    out = RationalNF.const(0)
    for k, c in enumerate(hermite_coefficients(n)):
        if c:
            out = out + RationalNF.const(c) * s ** ((k - n) // 2) * xi ** k
    return out


def _sym(name: str) -> RationalNF:
    return RationalNF.symbol(parameter(name))


def _coords():
    return tuple(RationalNF.symbol(v) for v in (X1, X2, X3))


def landau_state(s: SystemDef, n: int, center: str = "resolved") -> tuple:
    """``(psi, E)`` of level ``n`` in the Landau gauge ``A = (0, b x1, 0)``.

    The phase ``exp(I (lambda2 x2 + lambda3 x3)/hbar)`` makes ``p2`` act as
    ``lambda2``, so the oscillator is centred at ``x1 = -lambda2/b``
    (``center="resolved"``). ``center="printed"`` uses ``+lambda2/b``.
    """
    b = RationalNF.symbol(s.params["b"])
    hb = RationalNF.symbol(HBAR)
    l2, l3 = _sym("lambda2"), _sym("lambda3")
    x, y, z = _coords()
    shift = l2 / b
    xi = x + shift if center == "resolved" else x - shift
    two = RationalNF.const(2)
    phase = (l2 * y + l3 * z).scale(I) / hb - b * xi * xi / (two * hb)
    psi = scaled_hermite(n, xi, b / hb) * func("exp", phase)
    E = l3 * l3 / two + hb * b * (RationalNF.const(n) + RationalNF.const(1) / two)
    return psi, E


def new_system_state(s: SystemDef, a=None) -> tuple:
    """``(psi, E)`` of the separated solution in ``z = x1 + I x2``, ``zb = x1 - I x2``.

    ``a`` is the coefficient of ``1/zb`` in the exponent; a free symbol when omitted.
    """
    hb = RationalNF.symbol(HBAR)
    C, l3, E = _sym("C"), _sym("lambda3"), _sym("E")
    x, y, x3 = _coords()
    z, zb = x + y.scale(I), x - y.scale(I)
    two, four = RationalNF.const(2), RationalNF.const(4)
    a = _sym("a") if a is None else _nf(a)
    arg = C * z + (l3 * l3 - two * E) / (four * C * hb * hb) * zb + a / zb + (l3 * x3).scale(I) / hb
    return func("exp", arg), E


def solve_exponent_coefficient(s: SystemDef) -> RationalNF:
    """The ``1/zb`` coefficient making the separated solution exact."""
    psi, E = new_system_state(s)
    res = eigenfunction_residual(s.H, psi, E)
    a = parameter("a")
    c1 = diff_nf(res, a)
    if c1.is_zero() or not diff_nf(c1, a).is_zero():
        raise ValueError("residual is not linear in the exponent coefficient")
    c0 = subst_nf(res, {a: RationalNF.const(0)})
    return -c0 / c1


def printed_exponent_coefficient(s: SystemDef) -> RationalNF:
    b, w1 = (RationalNF.symbol(s.params[k]) for k in ("b", "w1"))
    hb = RationalNF.symbol(HBAR)
    return (w1 - _sym("lambda3") * b) / (RationalNF.const(4) * _sym("C") * hb * hb)


def _numeric(s, psi, E, st, k):
    if not st.numeric:
        return None
    return eigen_claim(s.H, to_expr(psi), to_expr(E), st.samples, st.seed + k).max_residual


def _landau_checks(s: SystemDef, st: Settings) -> list:
    out = []
    for n in LANDAU_LEVELS:
        psi, E = landau_state(s, n)
        res = eigenfunction_residual(s.H, psi, E)
        zero = res.is_zero()
        num = _numeric(s, psi, E, st, n)
        out.append(Check(f"landau:n={n}", f"constant field: Landau level {n} with E = lambda3^2/2 + hbar*b*({n}+1/2)",
                         zero, num, decide(zero, num, st.tol), "" if zero else nf_text(res)))
    psi, E = landau_state(s, 0, center="printed")
    res = eigenfunction_residual(s.H, psi, E)
    out.append(Check("landau:printed-center", "constant field: oscillator centred at +lambda2/b", res.is_zero(),
                     None, INFO, "residual " + nf_text(res)))
    return out


def _new_system_checks(s: SystemDef, st: Settings) -> list:
    out = []
    a = solve_exponent_coefficient(s)
    psi, E = new_system_state(s, a)
    res = eigenfunction_residual(s.H, psi, E)
    zero = res.is_zero()
    num = _numeric(s, psi, E, st, 0)
    out.append(Check("separated:solved", "new system: separated solution with the 1/zb coefficient fixed by the "
                     "residual", zero, num, decide(zero, num, st.tol), "a = " + nf_text(a)))
    b, w1 = (RationalNF.symbol(s.params[k]) for k in ("b", "w1"))
    hb = RationalNF.symbol(HBAR)
    expected = (_sym("lambda3") * b - w1) / (RationalNF.const(4) * _sym("C") * hb * hb)
    ok = (a - expected).is_zero()
    out.append(Check("separated:coefficient", "new system: 1/zb coefficient equals (lambda3*b - w1)/(4*C*hbar^2)",
                     ok, None, PASS if ok else FAIL, "a = " + nf_text(a)))
    pa = printed_exponent_coefficient(s)
    psi, E = new_system_state(s, pa)
    res = eigenfunction_residual(s.H, psi, E)
    out.append(Check("separated:printed", "new system: 1/zb coefficient (w1 - lambda3*b)/(4*C*hbar^2)",
                     res.is_zero(), None, INFO, "residual " + nf_text(res)))
    return out


EIGEN_SYSTEMS = {"constant-B-landau": _landau_checks, "new-complex": _new_system_checks}


def eigen_suite(s: SystemDef, settings: Settings | None = None) -> Report:
    """Eigenfunction checks for the systems with separated solutions."""
    if s.name not in EIGEN_SYSTEMS:
        raise KeyError(f"no eigenfunction checks for {s.name}; available: {', '.join(sorted(EIGEN_SYSTEMS))}")
    st = _settings(settings)
    t0 = time.perf_counter()
    rep = Report(s.name, "eigenfunctions", st.seed, st.tol, st.samples)
    for c in EIGEN_SYSTEMS[s.name](s, st):
        rep.add(c)
    rep.elapsed = time.perf_counter() - t0
    return rep


__all__ = [
    "eigenfunction_residual", "hermite_coefficients", "scaled_hermite", "landau_state", "new_system_state",
    "solve_exponent_coefficient", "printed_exponent_coefficient", "eigen_suite", "EIGEN_SYSTEMS", "LANDAU_LEVELS",
]
