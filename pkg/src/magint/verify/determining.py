"""Determining equations and the replay of the first-order compatibility analysis.

The commutator of an integral ansatz with the Hamiltonian is split into the
coefficients of each derivative. For the first-order integral

    Y = K . p^A + m,   K = k + (k4, k5, k6) x x,

the first-order coefficients of ``[Y, H]`` are linear in the derivatives of
``m``. Solving them and demanding equal mixed partials gives three
compatibility conditions, which are then differentiated, specialized and
compared with the printed conditions of each branch.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..diffop import (
    CYLINDRICAL_CHART, Chart, DiffOperator, OpExpr, OpMul, comm, commutator, op_prod, op_scale, op_sum,
    to_diffop, cylindrical_cartesian_momenta,
)
from ..geometry import (
    AuxFunctions, aux_vector_potential, cartesian_components_in_cylindrical, cylindrical_hamiltonian_recipe,
    field_from_aux,
)
from ..kernel.atoms import PHI, R, TABLE, U, Z, Symbol, UFuncAtom, parameter
from ..kernel.expr import I as I_E, Sym, UFunc, normalize, power, rational, to_expr
from ..kernel.poly import Poly
from ..kernel.rational import NF_ZERO, RationalNF, diff_nf, func, nf_text, subst_nf, ufunc
from ..kernel.scalar import I
from ..parser import Context, parse_expr
from .report import FAIL, INFO, PASS, Check, Report

CYL = (R, PHI, Z)
AUX_NAMES = ("rho", "sigma", "psi", "tau", "mu")
BRANCHES = ("common", "k40", "k4")
BRANCH_ALIASES = {"k4=k5=0": "k40", "k4!=0": "k4", "k4<>0": "k4"}


class ReplayMismatch(AssertionError):
    """A printed condition that the extraction does not reproduce."""

    def __init__(self, check_id: str, expected: str, computed: str):
        self.check_id = check_id
        self.expected = expected
        self.computed = computed
        super().__init__(f"{check_id}: expected {expected}, computed {computed}")


# -- determining equations ---------------------------------------------------------

@dataclass(frozen=True)
class DeterminingEquationSet:
    """Coefficients of each derivative of a commutator, highest order first."""

    chart: Chart
    entries: tuple
    conditions: dict = field(default_factory=dict)

    def reconstruct(self) -> DiffOperator:
        return DiffOperator(dict(self.entries), self.chart)

    def coefficient(self, alpha: tuple) -> RationalNF:
        for a, c in self.entries:
            if a == tuple(alpha):
                return c
        return NF_ZERO

    def order(self, k: int) -> list:
        return [(a, c) for a, c in self.entries if sum(a) == k]

    def orders(self) -> list:
        return sorted({sum(a) for a, _ in self.entries}, reverse=True)

    def exprs(self) -> list:
        return [(a, to_expr(c)) for a, c in self.entries]

    def is_solved(self) -> bool:
        return not self.entries

    def with_conditions(self, conditions: dict) -> "DeterminingEquationSet":
        return DeterminingEquationSet(self.chart, self.entries, {**self.conditions, **conditions})

    def __len__(self):
        return len(self.entries)


def _order_key(item):
    a, _ = item
    return (-sum(a), tuple(-k for k in a))


def determining_equations(H, X, chart: Chart | None = None) -> DeterminingEquationSet:
    """Coefficient equations of ``[X, H] = 0``.

    ``H`` and ``X`` are operators or recipes. Recipes are expanded in ``chart``
    (their own chart when omitted).
    """
    if isinstance(H, DiffOperator) and isinstance(X, DiffOperator):
        C = commutator(X, H)
    else:
        C = to_diffop(comm(X, H), chart)
    entries = tuple(sorted(((a, c) for a, c in C.terms.items() if not c.is_zero()), key=_order_key))
    return DeterminingEquationSet(C.chart, entries)


# -- the cylindrical ansatz ----------------------------------------------------------

def _k(i: int) -> Symbol:
    return parameter(f"k{i}")


def y_ansatz(aux: AuxFunctions | None = None) -> OpExpr:
    """``Y = sum_j K_j p_j^A + m(r, phi, Z)`` in the cylindrical chart."""
    aux = aux or AuxFunctions()
    A = cartesian_components_in_cylindrical(aux_vector_potential(aux).components)
    p = cylindrical_cartesian_momenta()
    u, r = Sym(U), Sym(R)
    x = (r * (u + power(u, -1)) * rational(1, 2), r * (u - power(u, -1)) * (-I_E * rational(1, 2)), Sym(Z))
    k = [Sym(_k(i)) for i in range(1, 7)]
    K = (k[0] + k[4] * x[2] - k[5] * x[1], k[1] - k[3] * x[2] + k[5] * x[0], k[2] + k[3] * x[1] - k[4] * x[0])
    parts = [op_prod(OpMul(K[j]), op_sum(p[j], OpMul(A[j]))) for j in range(3)]
    return op_sum(*parts, OpMul(UFunc("m", CYL)))


def cylindrical_hamiltonian(aux: AuxFunctions | None = None, W=None) -> OpExpr:
    aux = aux or AuxFunctions()
    W = UFunc("W", CYL) if W is None else W
    return cylindrical_hamiltonian_recipe(aux_vector_potential(aux).components, W)


def cylindrical_integral(i: int, aux: AuxFunctions | None = None, m: str | None = None) -> OpExpr:
    """``X_i`` built from the auxiliary-function solution of the second-order equations."""
    from ..diffop import OpMom, acomm
    aux = aux or AuxFunctions()
    A = aux_vector_potential(aux).components
    s, _ = field_from_aux(aux)
    pA = [op_sum(OpMom(j, CYLINDRICAL_CHART), OpMul(to_expr(A[j]))) for j in range(3)]
    lead = op_prod(pA[1], pA[1]) if i == 1 else op_prod(pA[2], pA[2])
    keys = (f"s{i}_r", f"s{i}_phi", f"s{i}_Z")
    sym_part = op_sum(*[acomm(OpMul(to_expr(s[key])), pA[j]) for j, key in enumerate(keys)])
    return op_sum(lead, op_scale(rational(1, 2), sym_part), OpMul(UFunc(m or f"m{i}", CYL)))


# -- first-order solve and compatibility --------------------------------------------

def _m_derivative_atoms(name: str = "m") -> list:
    return [TABLE.index(UFuncAtom(name, CYL, d, "complex")) for d in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]


def _linear_parts(f: RationalNF, idx: list):
    """``f = c0 + sum_j c_j * atom_j`` with the ``c`` free of the atoms."""
    if f.den.variables() & set(idx):
        raise ValueError("unknown appears in a denominator")
    num = f.num
    cs = []
    for i in idx:
        by_power = num.coeffs_in(i)
        if any(k > 1 for k in by_power):
            raise ValueError("equation is not linear in the unknowns")
        cs.append(RationalNF.make(by_power.get(1, Poly({})), f.den))
        num = by_power.get(0, Poly({}))
    return RationalNF.make(num, f.den), cs


def _solve_linear(rows: list) -> list:
    """Gaussian elimination for ``c0 + sum_j c_j x_j = 0`` over rational functions."""
    n = len(rows[0][1])
    M = [list(cs) + [-c0] for c0, cs in rows]
    piv_rows = []
    for col in range(n):
        p = next((i for i in range(len(M)) if i not in piv_rows and not M[i][col].is_zero()), None)
        if p is None:
            raise ValueError("first-order equations do not determine the gradient")
        piv_rows.append(p)
        inv = M[p][col].inverse()
        M[p] = [v * inv for v in M[p]]
        for i in range(len(M)):
            if i != p and not M[i][col].is_zero():
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[p])]
    return [M[piv_rows[col]][n] for col in range(n)]


def solve_gradient(C: DiffOperator, name: str = "m") -> list:
    """``(d_r m, d_phi m, d_Z m)`` from the first-order coefficients of ``C``."""
    idx = _m_derivative_atoms(name)
    rows = [_linear_parts(C.coefficient(a), idx) for a in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    return _solve_linear(rows)


def compatibility_conditions(grad: list) -> dict:
    """Mixed-partial conditions ``d_a(d_b m) - d_b(d_a m)``."""
    gr, gp, gz = grad
    return {
        "r,phi": diff_nf(gr, PHI) - diff_nf(gp, R),
        "r,Z": diff_nf(gr, Z) - diff_nf(gz, R),
        "phi,Z": diff_nf(gp, Z) - diff_nf(gz, PHI),
    }


def numerator(f: RationalNF) -> RationalNF:
    """``f`` times its denominator, which must be a single monomial."""
    if len(f.den.terms) != 1:
        raise ValueError("denominator is not a monomial")
    return RationalNF(f.num)


def substitute_functions(f: RationalNF, mapping: dict, values: dict | None = None) -> RationalNF:
    """Replace uninterpreted functions (and their derivatives) by expressions."""
    def hook(a):
        if isinstance(a, UFuncAtom) and a.name in mapping:
            g = mapping[a.name]
            for v, n in zip(a.args, a.deriv):
                for _ in range(n):
                    g = diff_nf(g, v)
            return g
        return None
    out = subst_nf(f, {}, hook) if mapping else f
    return subst_nf(out, values) if values else out


@dataclass
class Extraction:
    """The first-order solve for ``m`` and the three compatibility conditions."""

    equations: DeterminingEquationSet
    gradient: list
    conditions: dict


_EXTRACTION = {}


def extract(aux: AuxFunctions | None = None) -> Extraction:
    """Run the pipeline for the ansatz with uninterpreted auxiliary functions."""
    key = id(aux) if aux is not None else None
    if key in _EXTRACTION:
        return _EXTRACTION[key]
    Y, H = y_ansatz(aux), cylindrical_hamiltonian(aux)
    eqs = determining_equations(H, Y, CYLINDRICAL_CHART)
    grad = solve_gradient(eqs.reconstruct())
    conds = compatibility_conditions(grad)
    out = Extraction(eqs.with_conditions(conds), grad, conds)
    if aux is None:
        _EXTRACTION[key] = out
    return out


# -- comparison helpers ----------------------------------------------------------------

_AUX_CONSTANT_PREFIXES = ("rho", "sigma", "psi", "tau", "mu")


def _nonvanishing_factor(q: RationalNF) -> bool:
    """Monomial in ``r`` and ``u`` times a nonzero constant."""
    for p in (q.num, q.den):
        if len(p.terms) != 1:
            return False
    allowed = {TABLE.index(R), TABLE.index(U)}
    return (q.num.variables() | q.den.variables()) <= allowed


def _free_of_unknowns(q: RationalNF) -> bool:
    """No uninterpreted functions and no auxiliary integration constants."""
    for a in q.atoms():
        if isinstance(a, UFuncAtom):
            return False
        if isinstance(a, Symbol) and a.name.startswith(_AUX_CONSTANT_PREFIXES):
            return False
    return not q.is_zero()


def _factor_text(q: RationalNF) -> str:
    return "factor " + nf_text(q)


def proportional_check(check_id: str, citation: str, computed: RationalNF, printed: RationalNF) -> Check:
    """``computed = c r^a u^b * printed`` with a nonzero constant ``c``."""
    if printed.is_zero():
        ok = computed.is_zero()
        return Check(check_id, citation, ok, None, PASS if ok else FAIL, "" if ok else nf_text(computed)[:240])
    q = computed / printed
    ok = _nonvanishing_factor(q)
    w = _factor_text(q) if ok else "ratio " + nf_text(q)[:240]
    return Check(check_id, citation, ok, None, PASS if ok else FAIL, w)


def multiple_check(check_id: str, citation: str, computed: RationalNF, target: RationalNF) -> Check:
    """``computed`` is ``target`` times a factor free of unknowns, so it forces ``target = 0``."""
    q = computed / target
    ok = _free_of_unknowns(q)
    w = _factor_text(q) if ok else "ratio " + nf_text(q)[:240]
    return Check(check_id, citation, ok, None, PASS if ok else FAIL, w)


def zero_check(check_id: str, citation: str, value: RationalNF) -> Check:
    ok = value.is_zero()
    return Check(check_id, citation, ok, None, PASS if ok else FAIL, "" if ok else nf_text(value)[:240])


_CTX = Context(strict=False, ufuncs={
    "mu": ((Z,), "complex"), "rho": ((R,), "complex"), "sigma": ((R,), "complex"),
    "psi": ((PHI,), "complex"), "tau": ((PHI,), "complex"),
})


def printed(text: str) -> RationalNF:
    """A printed display, with ``sin(phi)``, ``cos(phi)`` and ``exp(k*I*phi)`` written via ``u``."""
    t = text.replace("sin(phi)", "((u - 1/u)/(2*I))").replace("cos(phi)", "((u + 1/u)/2)")
    for k in range(1, 5):
        t = t.replace(f"exp({k}*I*phi)", f"u^{k}")
    t = t.replace("exp(I*phi)", "u")
    return normalize(parse_expr(t, _CTX))


def _p(name: str) -> RationalNF:
    return RationalNF.symbol(parameter(name))


def _r():
    return RationalNF.symbol(R)


def _u():
    return RationalNF.symbol(U)


def _z():
    return RationalNF.symbol(Z)


def _group(f: RationalNF, powers: dict) -> RationalNF:
    """Terms of a polynomial ``f`` with the given exponents on the listed atoms, atoms removed."""
    idx = {TABLE.index(a): e for a, e in powers.items()}
    out = {}
    for m, c in f.num.terms.items():
        if all((m[i] if i < len(m) else 0) == e for i, e in idx.items()):
            rest = list(m)
            for i in idx:
                if i < len(rest):
                    rest[i] = 0
            while rest and not rest[-1]:
                rest.pop()
            out[tuple(rest)] = c
    return RationalNF.make(Poly(out), f.den)


def _dz(f, n=1):
    for _ in range(n):
        f = diff_nf(f, Z)
    return f


def _dr(f, n=1):
    for _ in range(n):
        f = diff_nf(f, R)
    return f


# -- branch replays ----------------------------------------------------------------------

CITE = {
    "common": "first-order equations for Y: compatibility conditions before the case split",
    "k40": "first-order equations for Y: branch k4 = k5 = 0",
    "k4": "first-order equations for Y: branch k4 != 0",
}


def _mu_linear():
    return _p("mu1") * _z() + _p("mu2")


def _common_checks(ex: Extraction) -> list:
    c = ex.conditions
    cite = CITE["common"]
    out = []
    mu3 = printed("(k4*sin(phi)*r - k5*cos(phi)*r + k3)*r^4*diff(mu(Z), Z, 3)")
    got = _dz(numerator(c["r,phi"]), 2)
    out.append(proportional_check("mu3", cite + ": d_Z^2 of the (r,phi) condition", got, mu3))
    mu3_ = ufunc("mu", (Z,), (3,))
    out.append(multiple_check("mu3:conclusion", cite + ": the (r,phi) condition forces mu''' = 0", got, mu3_))
    pair = printed("((k4*Z - k2)*diff(mu(Z), Z, 3) + 4*k4*diff(mu(Z), Z, 2))*cos(phi)"
                   " + ((k5*Z + k1)*diff(mu(Z), Z, 3) + 4*k5*diff(mu(Z), Z, 2))*sin(phi)")
    got = _dz(numerator(c["r,Z"]), 2)
    out.append(proportional_check("mu2:pair", cite + ": d_Z^2 of the (r,Z) condition", got, pair))
    zero45 = {_k(4): NF_ZERO, _k(5): NF_ZERO}
    got = subst_nf(_dz(numerator(c["r,phi"])), zero45)
    out.append(proportional_check("mu2:k3", cite + ": d_Z of the (r,phi) condition at k4 = k5 = 0", got,
                                  printed("-2*k3*diff(mu(Z), Z, 2)*r^4")))
    got = subst_nf(_dz(numerator(c["r,Z"])), zero45)
    out.append(proportional_check("mu2:k1k2", cite + ": d_Z of the (r,Z) condition at k4 = k5 = 0", got,
                                  printed("(k1*sin(phi) - k2*cos(phi))*diff(mu(Z), Z, 2)*r^4")))
    lin = {"mu": _mu_linear()}
    got = _dr(_dz(substitute_functions(numerator(c["r,phi"]), lin)))
    rho_printed = printed("(diff(rho(r), r, 3)*r^2 + 2*diff(rho(r), r, 2)*r - 2*rho(r))*(k4*sin(phi) - k5*cos(phi))")
    rho_fixed = printed("(diff(rho(r), r, 3)*r^2 + 2*diff(rho(r), r, 2)*r - 2*diff(rho(r), r))*(k4*sin(phi) - k5*cos(phi))")
    out.append(proportional_check("rho3:printed", cite + ": d_r d_Z of the (r,phi) condition, as printed",
                                  got, rho_printed))
    out.append(proportional_check("rho3:corrected", cite + ": d_r d_Z of the (r,phi) condition with rho' "
                                  "in the last term", got, rho_fixed))
    return out


def _k40_checks(ex: Extraction) -> list:
    cite = CITE["k40"]
    r = _r()
    rho = (_p("rho1") * r + _p("rho2") * func("ln", r) * r + _p("rho3") * r ** 3 + _p("rho4")) / r
    sigma = (_p("k2") * _p("mu1") * r * r / (RationalNF.const(2) * _p("k1")) + _p("sigma1") / (RationalNF.const(2) * r)
             + _p("sigma2") / (RationalNF.const(6) * r * r) + _p("sigma3") * r + _p("sigma4"))
    zero45 = {_k(4): NF_ZERO, _k(5): NF_ZERO}
    forms = {"mu": _mu_linear(), "rho": rho, "sigma": sigma}
    conds = {n: numerator(substitute_functions(c, forms, zero45)) for n, c in ex.conditions.items()}
    out = []
    drop = {parameter("sigma3"): NF_ZERO, parameter("mu1"): NF_ZERO}
    for n, c in conds.items():
        out.append(zero_check(f"forms:{n}", cite + f": rho and sigma annihilate d_r^2 of the ({n}) condition "
                              "up to the sigma3 and mu1 terms", subst_nf(_dr(c, 2), drop)))
    s3 = _group(conds["phi,Z"], {R: 3})
    out.append(multiple_check("sigma3", cite + ": the r^3 terms force sigma3 = 0", s3, _p("sigma3")))
    km = _group(conds["r,phi"], {R: 4})
    out.append(multiple_check("k3mu1", cite + ": the r^4 terms force k3*mu1 = 0", km, _p("k3") * _p("mu1")))
    extra = _group(conds["r,Z"], {R: 4})
    out.append(Check("mu1:extra", cite + ": r^4 terms of the (r,Z) condition", None, None, INFO,
                     nf_text(extra)))
    return out


def final_aux() -> tuple:
    """Auxiliary functions and constant constraints of the branch ``k4 != 0``."""
    u, r = _u(), _r()
    aux = {
        "mu": _p("rho3"),
        "rho": _p("rho3") * r * r + _p("rho1") + _p("rho2") / r,
        "sigma": _p("sigma3") + _p("sigma1") / (r * r),
        "psi": _p("psi3") * (u + u.inverse()) + _p("psi2") * u.scale(I) + _p("rho2"),
        "tau": _p("sigma1") - _p("tau2") * u * u,
    }
    constraints = {_k(6): NF_ZERO, _k(1): _p("k2").scale(I), _k(5): _p("k4").scale(-I)}
    return aux, constraints


def _k4_checks(ex: Extraction) -> list:
    cite = CITE["k4"]
    r = _r()
    rho = _p("rho3") * r * r + _p("rho1") + _p("rho2") / r
    sigma = _p("sigma3") + _p("sigma1") / (r * r)
    out = []
    rho_fixed = printed("diff(rho(r), r, 3)*r^2 + 2*diff(rho(r), r, 2)*r - 2*diff(rho(r), r)")
    out.append(zero_check("rho:solves", cite + ": rho = rho3 r^2 + rho1 + rho2/r solves the corrected rho''' "
                          "condition", substitute_functions(rho_fixed, {"rho": rho})))
    lin = {"mu": _mu_linear()}
    forms = {"rho": rho, "sigma": sigma}
    mu1 = parameter("mu1")
    for n, c in ex.conditions.items():
        d = _dr(_dz(substitute_functions(numerator(c), lin)))
        d = substitute_functions(d, forms)
        out.append(zero_check(f"forms:{n}", cite + f": rho and sigma annihilate d_r d_Z of the ({n}) condition "
                              "once mu1 = 0", subst_nf(d, {mu1: NF_ZERO})))
        if not d.is_zero():
            out.append(multiple_check(f"mu1:{n}", cite + f": the ({n}) condition forces mu1 = 0", d, _p("mu1")))
    aux, cons = final_aux()
    for n, c in ex.conditions.items():
        out.append(zero_check(f"solved:{n}", cite + f": the final auxiliary functions solve the ({n}) condition",
                              subst_nf(substitute_functions(c, aux), cons)))
    grad = [subst_nf(substitute_functions(g, aux), cons) for g in ex.gradient]
    m_printed = printed("tau2*(2*I*k4*r*exp(I*phi) + I*k3*exp(2*I*phi))/(2*r^2)")
    m_fixed = printed("tau2*(2*I*k4*r*exp(I*phi) + k3*exp(2*I*phi))/(2*r^2)")
    for label, m in (("printed", m_printed), ("corrected", m_fixed)):
        res = [diff_nf(m, v) - g for v, g in zip(CYL, grad)]
        bad = [f"d_{v.name}: {nf_text(x)}" for v, x in zip(CYL, res) if not x.is_zero()]
        ok = not bad
        what = "as printed" if label == "printed" else "with k3 in place of I*k3"
        out.append(Check(f"m:{label}", cite + f": m solves the first-order equations, {what}", ok, None,
                         PASS if ok else FAIL, "; ".join(bad)))
    _, B = field_from_aux(AuxFunctions(**aux))
    Bp = (printed("-I*tau2*exp(2*I*phi)/r^2"), printed("-tau2*exp(2*I*phi)/r^3"), RationalNF.const(0))
    diffs = [b - p for b, p in zip(B.components, Bp)]
    ok = all(d.is_zero() for d in diffs)
    w = "" if ok else "; ".join(nf_text(d) for d in diffs)
    out.append(Check("field", cite + ": the auxiliary functions give B^r = -I tau2 u^2/r^2, "
                     "B^phi = -tau2 u^2/r^3, B^Z = 0", ok, None, PASS if ok else FAIL, w))
    return out


_BRANCH_CHECKS = {"common": _common_checks, "k40": _k40_checks, "k4": _k4_checks}


def branch_name(config: str) -> str:
    name = BRANCH_ALIASES.get(config, config)
    if name not in BRANCHES and name != "all":
        raise KeyError(f"unknown branch {config!r}; choose from {', '.join(BRANCHES + ('all',))}")
    return name


def compatibility_replay(config: str = "all", strict: bool = False) -> Report:
    """Replay the compatibility analysis for a branch (``common``, ``k40``, ``k4`` or ``all``).

    With ``strict`` the first mismatch raises :class:`ReplayMismatch`.
    """
    name = branch_name(config)
    branches = BRANCHES if name == "all" else (name,)
    t0 = time.perf_counter()
    ex = extract()
    rep = Report("Y ansatz", f"determining equations ({name})", 0, 0.0, 0)
    for b in branches:
        for c in _BRANCH_CHECKS[b](ex):
            if strict and c.verdict == FAIL:
                raise ReplayMismatch(c.check_id, c.citation, c.witness)
            if name == "all":
                c.check_id = f"{b}:{c.check_id}"
            rep.add(c)
    rep.elapsed = time.perf_counter() - t0
    return rep


__all__ = [
    "DeterminingEquationSet", "determining_equations", "ReplayMismatch", "compatibility_replay", "extract",
    "Extraction", "solve_gradient", "compatibility_conditions", "numerator", "substitute_functions",
    "y_ansatz", "cylindrical_hamiltonian", "cylindrical_integral", "final_aux", "printed", "BRANCHES",
    "proportional_check", "multiple_check",
]
