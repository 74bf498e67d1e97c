"""Commutator suites, algebra tables, adjoint classification and dependence."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..diffop import (
    CARTESIAN_CHART, STANDARD_MAPS, DiffOperator, OpAtom, OpMul, OpProd, OpSum, adjoint, apply_antilinear,
    anticommutator, classical_limit, commutator, hbar_grade, momentum_form, op_prod, poisson_nf,
    render_operator, to_diffop,
)
from ..kernel.atoms import HBAR
from ..kernel.expr import normalize, to_expr
from ..kernel.rational import NF_ZERO, RationalNF
from ..kernel.scalar import I
from ..parser import render
from ..systems import SystemDef, reality_bindings, specialize
from .numeric import coefficient_values, expr_claim, operator_claim, poisson_claim
from .report import FAIL, INFO, PASS, Check, Report, decide

DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 100


@dataclass
class Settings:
    tol: float = DEFAULT_TOL
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    numeric: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")


def _settings(settings):
    return settings if settings is not None else Settings()


def witness_text(D: DiffOperator, limit: int = 240) -> str:
    """The leading nonzero term of a residual, rendered."""
    if D.is_zero():
        return ""
    alpha, c = D.sorted_terms()[0]
    d = "*".join(f"d_{D.chart.coords[k].name}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(alpha) if e)
    text = render(to_expr(c))
    if len(text) > limit:
        text = text[:limit] + " ..."
    return f"coefficient of {d or '1'}: {text}"


# -- commutators -------------------------------------------------------------------------

@dataclass
class CommuteResult:
    residual: DiffOperator
    zero: bool
    witness: str = ""


def check_commutes(A: DiffOperator, B: DiffOperator) -> CommuteResult:
    """``[A, B]`` normal-ordered; zero iff its term map is empty."""
    R = commutator(A, B)
    return CommuteResult(R, R.is_zero(), witness_text(R))


def _cartesian(s: SystemDef, D: DiffOperator) -> DiffOperator:
    return s._to_cartesian(D)


def claim_check(s: SystemDef, check_id: str, citation: str, lhs, rhs, st: Settings, seed_offset: int = 0) -> Check:
    """Symbolic and numeric verification of the operator identity ``lhs == rhs``."""
    L = _cartesian(s, to_diffop(lhs, s.chart))
    R = _cartesian(s, to_diffop(rhs, s.chart))
    res = L - R
    zero = res.is_zero()
    num = None
    if st.numeric:
        if s.chart == CARTESIAN_CHART:
            nr = operator_claim(lhs, rhs, st.samples, st.seed + seed_offset)
        else:
            nr = operator_claim(L, R, st.samples, st.seed + seed_offset)
        num = nr.max_residual
    return Check(check_id, citation, zero, num, decide(zero, num, st.tol), witness_text(res))


def integrability_suite(s: SystemDef, settings: Settings | None = None, classical: bool = False) -> Report:
    """``[X, H] = 0`` for every declared integral plus the system's expected identities."""
    st = _settings(settings)
    t0 = time.perf_counter()
    rep = Report(s.name, "integrability", st.seed, st.tol, st.samples)
    H = s.recipe("H")
    k = 0
    for name in s.integrals:
        X = s.recipe(name)
        rep.add(claim_check(s, f"[{name},H]", s.citation(name), op_prod(X, H), op_prod(H, X), st, k))
        k += 1
    for name, (lhs, rhs) in s.expected.items():
        rep.add(claim_check(s, name, s.citation(name), lhs, rhs, st, k))
        k += 1
    if classical:
        for c in classical_checks(s, st):
            rep.add(c)
    rep.elapsed = time.perf_counter() - t0
    return rep


def classical_hamiltonian(s: SystemDef) -> RationalNF:
    return classical_limit(s.H).to_nf()


def classical_checks(s: SystemDef, st: Settings) -> list:
    """``{H, X} = 0`` for the classical limit of every integral and every classical-only integral."""
    h = classical_hamiltonian(s)
    out = []
    items = [(n, classical_limit(D).to_nf()) for n, D in s.integrals.items()]
    items += [(n, normalize(e)) for n, (e, _) in s.classical_integrals.items()]
    for k, (name, f) in enumerate(items):
        br = poisson_nf(h, f)
        zero = br.is_zero()
        num = None
        if st.numeric:
            num = poisson_claim(to_expr(h), to_expr(f), st.samples, st.seed + 100 + k).max_residual
        w = "" if zero else "bracket: " + render(to_expr(br))[:240]
        out.append(Check(f"{{{name},H}}", s.citation(name) + " (classical)", zero, num, decide(zero, num, st.tol), w))
    return out


# -- algebra --------------------------------------------------------------------------------

class ClosureFailure(AssertionError):
    def __init__(self, cell, residual: DiffOperator):
        self.cell = cell
        self.residual = residual
        super().__init__(f"commutator {cell} not closed: {witness_text(residual)}")


@dataclass
class Cell:
    left: str
    right: str
    expression: str
    relation: str | None
    residual: DiffOperator


@dataclass
class AlgebraTable:
    generators: tuple
    commutators: dict          # (a, b) -> DiffOperator
    cells: dict                # (a, b) -> Cell
    notes: list = field(default_factory=list)

    def antisymmetric(self) -> bool:
        for (a, b), C in self.commutators.items():
            if not (C + self.commutators[(b, a)]).is_zero():
                return False
        return True

    def closed(self) -> bool:
        return all(c.residual.is_zero() for c in self.cells.values())

    def failures(self) -> list:
        return [c for c in self.cells.values() if not c.residual.is_zero()]


def _comm_names(x):
    """``(a, b)`` when the recipe is ``comm(a, b)`` of named operators."""
    if isinstance(x, OpSum) and len(x.items) == 2:
        p, q = x.items
        if isinstance(p, OpProd) and len(p.items) == 2 and all(isinstance(i, OpAtom) for i in p.items):
            a, b = p.items
            if isinstance(q, OpProd) and len(q.items) == 3 and q.items[1:] == (b, a):
                return a.name, b.name
    return None


def _view_definition(recipe):
    """``(a, b, c)`` when the view is ``c * comm(a, b)`` or ``comm(a, b) * c``."""
    if isinstance(recipe, OpAtom):
        recipe = recipe.recipe
    if isinstance(recipe, OpProd) and len(recipe.items) == 2:
        x, y = recipe.items
        for scal, body in ((x, y), (y, x)):
            if isinstance(scal, OpMul):
                names = _comm_names(body)
                if names:
                    return names[0], names[1], scal.coeff
    names = _comm_names(recipe)
    if names:
        return names[0], names[1], None
    return None


def default_generators(s: SystemDef) -> tuple:
    names = list(s.integrals)
    for v in s.views:
        if _view_definition(s.recipes[v]) is not None:
            names.append(v)
    return tuple(names)


def algebra_closure(s: SystemDef, generators=None, strict: bool = False) -> AlgebraTable:
    """Pairwise commutators of the generators, each matched against a displayed relation.

    A cell is expressed by an ``[algebra]`` relation ``comm(a, b) == rhs``
    (or its reverse), by a view defined as ``c * comm(a, b)``, or is
    expected to vanish.  The residual is ``[a, b] - expression``.
    """
    gens = tuple(generators) if generators is not None else default_generators(s)
    for g in gens:
        s.recipe(g)
    rels = {}
    for name, (lhs, rhs) in s.algebra.items():
        names = _comm_names(lhs)
        if names:
            rels[names] = (name, rhs, 1)
            rels.setdefault((names[1], names[0]), (name, rhs, -1))
    views = {}
    for v in s.views:
        d = _view_definition(s.recipes[v])
        if d is not None:
            a, b, c = d
            views[(a, b)] = (v, c, 1)
            views.setdefault((b, a), (v, c, -1))
    ops = {g: s.operator(g) for g in gens}
    comms, cells = {}, {}
    for i, a in enumerate(gens):
        for b in gens:
            comms[(a, b)] = commutator(ops[a], ops[b]) if a != b else DiffOperator({}, CARTESIAN_CHART)
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            C = comms[(a, b)]
            if (a, b) in rels:
                name, rhs, sign = rels[(a, b)]
                E = s._to_cartesian(to_diffop(rhs, s.chart))
                expr = ("" if sign > 0 else "-") + f"({name} rhs)"
                E = E if sign > 0 else E.scale(RationalNF.const(-1))
                cells[(a, b)] = Cell(a, b, expr, name, C - E)
            elif (a, b) in views:
                v, c, sign = views[(a, b)]
                Vop = s.operator(v)
                inv = normalize(c).inverse() if c is not None else RationalNF.const(1)
                E = Vop.scale(inv if sign > 0 else -inv)
                expr = ("" if sign > 0 else "-") + f"({render(to_expr(inv))})*{v}"
                cells[(a, b)] = Cell(a, b, expr, None, C - E)
            else:
                cells[(a, b)] = Cell(a, b, "0", None, C)
            if strict and not cells[(a, b)].residual.is_zero():
                raise ClosureFailure((a, b), cells[(a, b)].residual)
    return AlgebraTable(gens, comms, cells)


def algebra_report(s: SystemDef, settings: Settings | None = None, generators=None) -> Report:
    """Displayed relations, table antisymmetry, hbar grades and the classical table."""
    st = _settings(settings)
    t0 = time.perf_counter()
    rep = Report(s.name, "algebra", st.seed, st.tol, st.samples)
    for k, (name, (lhs, rhs)) in enumerate(s.algebra.items()):
        rep.add(claim_check(s, name, s.citation(name), lhs, rhs, st, k))
    table = algebra_closure(s, generators)
    rep.add(Check("table:antisymmetry", "commutator table is antisymmetric", table.antisymmetric(), None,
                  PASS if table.antisymmetric() else FAIL))
    fails = table.failures()
    rep.add(Check("table:closure", "every commutator of the generators is expressed in the algebra",
                  not fails, None, PASS if not fails else FAIL,
                  "; ".join(f"[{c.left},{c.right}] {witness_text(c.residual)}" for c in fails)[:600]))
    for c in hbar_checks(s, table):
        rep.add(c)
    for c in classical_table_checks(s, table):
        rep.add(c)
    rep.elapsed = time.perf_counter() - t0
    return rep


def hbar_checks(s: SystemDef, table: AlgebraTable) -> list:
    """``[X1, R1] - 2*I*hbar*{X1, Y1}`` is purely of hbar order 3 and equals ``-I*hbar^3*Y1``.

    The same holds for ``[X1, R2]`` with ``{Y2, X1}``. The anticommutators are kept
    whole, so the remainder is the part that has no classical counterpart.
    """
    out = []
    pairs = (("X1", "R1", "X1", "Y1"), ("X1", "R2", "Y2", "X1"))
    for a, b, p, q in pairs:
        names = {a, b, p, q}
        if not names <= set(table.generators) | set(s.integrals):
            continue
        ac = anticommutator(s.operator(p), s.operator(q))
        D = table.commutators[(a, b)] - ac.scale(RationalNF.const(2 * I) * RationalNF.symbol(HBAR))
        y = q if p == "X1" else p
        grades = {k: G for k, G in hbar_grade(D, "momentum").items() if not G.is_zero()}
        g3 = grades.pop(3, DiffOperator({}, CARTESIAN_CHART))
        res = g3 - s.operator(y).scale(RationalNF.const(-I))
        ok = res.is_zero() and not grades
        w = witness_text(res) if not res.is_zero() else ""
        if grades:
            w += (" ; " if w else "") + "other orders " + ", ".join(f"hbar^{k}" for k in sorted(grades))
        out.append(Check(f"hbar3:[{a},{b}]", f"[{a},{b}] - 2*I*hbar*{{{p},{q}}} equals -I*hbar^3*{y}",
                         ok, None, PASS if ok else FAIL, w))
    return out


def classical_table_checks(s: SystemDef, table: AlgebraTable) -> list:
    """Poisson brackets of classical limits equal the hbar^1 grade divided by ``I``."""
    out = []
    cls = {g: classical_limit(s.operator(g)) for g in table.generators}
    bad = []
    extra = []
    for i, a in enumerate(table.generators):
        for b in table.generators[i + 1:]:
            pb = poisson_nf(cls[a].to_nf(), cls[b].to_nf())
            grades = hbar_grade(table.commutators[(a, b)], "momentum")
            g1 = grades.get(1, DiffOperator({}, CARTESIAN_CHART))
            g1_nf = _momentum_nf(g1).scale(-I)
            if not (pb - g1_nf).is_zero():
                bad.append(f"{{{a},{b}}}")
            if any(k < 1 for k, D in grades.items() if not D.is_zero()):
                extra.append(f"[{a},{b}]")
    ok = not bad and not extra
    w = ""
    if bad:
        w += "mismatch at " + ", ".join(bad)
    if extra:
        w += (" ; " if w else "") + "hbar^0 parts at " + ", ".join(extra)
    out.append(Check("classical:table", "classical Poisson table equals the hbar^1 grade over I*hbar",
                     ok, None, PASS if ok else FAIL, w))
    higher = []
    for (a, b), C in sorted(table.commutators.items()):
        if a < b:
            for k, D in hbar_grade(C, "momentum").items():
                if k >= 2 and not D.is_zero():
                    higher.append(f"[{a},{b}]:hbar^{k}")
    out.append(Check("classical:quantum-corrections", "commutators with hbar^2 and higher corrections",
                     None, None, INFO, ", ".join(higher)))
    return out


def _momentum_nf(D: DiffOperator) -> RationalNF:
    from ..kernel.atoms import MOMENTA
    out = NF_ZERO
    ps = [RationalNF.symbol(p) for p in MOMENTA]
    for alpha, c in momentum_form(D).items():
        t = c
        for k in range(3):
            if alpha[k]:
                t = t * ps[k] ** alpha[k]
        out = out + t
    return out


# -- adjoint classification ------------------------------------------------------------------

RELATIONS = ("symmetry", "pseudo-hermiticity")

# Statements about the builtin systems: (system, scenario) -> [(map, relation, holds, citation)].
ADJOINT_CLAIMS = {
    ("new-complex", (("b", "real"), ("w1", "real"))): [
        ("P2", "pseudo-hermiticity", True, "new system: P2-pseudo-Hermitian"),
        ("-", "hermiticity", False, "new system: not Hermitian"),
        ("P", "symmetry", False, "new system: not P-invariant"),
        ("T", "symmetry", False, "new system: not T-invariant"),
        ("PT", "pseudo-hermiticity", True, "new system: PT-self-adjoint"),
        ("P", "pseudo-hermiticity", False, "new system: not P-self-adjoint"),
        ("T", "pseudo-hermiticity", False, "new system: not T-self-adjoint"),
    ],
    ("constant-B", (("b", "complex"),)): [
        ("P", "symmetry", True, "constant field, complex b: P-symmetric"),
        ("P", "pseudo-hermiticity", False, "constant field, complex b: not P-self-adjoint"),
        ("T", "symmetry", False, "constant field, complex b: not T-symmetric"),
        ("PT", "symmetry", False, "constant field, complex b: not PT-symmetric"),
    ],
    ("constant-B", (("b", "imag"),)): [
        ("P", "symmetry", True, "constant field, imaginary b: P-symmetric"),
        ("T", "symmetry", True, "constant field, imaginary b: T-symmetric"),
        ("PT", "symmetry", True, "constant field, imaginary b: PT-symmetric"),
        ("-", "hermiticity", False, "constant field, imaginary b: not Hermitian"),
        ("P", "pseudo-hermiticity", False, "constant field, imaginary b: not P-pseudo-Hermitian"),
        ("T", "pseudo-hermiticity", False, "constant field, imaginary b: not T-pseudo-Hermitian"),
        ("PT", "pseudo-hermiticity", False, "constant field, imaginary b: not PT-pseudo-Hermitian"),
    ],
    ("inverse-square-B", (("b", "real"), ("w0", "real"))): [
        ("PT", "symmetry", True, "inverse-square field, real constants: PT-symmetric"),
    ],
    ("inverse-square-B", (("b", "imag"), ("w0", "imag"))): [
        ("P", "pseudo-hermiticity", True, "inverse-square field, imaginary constants: P-pseudo-Hermitian"),
    ],
}


def _claim_key(s: SystemDef, reality: dict):
    family = "constant-B" if s.name in ("constant-B-landau", "constant-B-symmetric") else s.name
    full = {n: "complex" for n in s.params}
    full.update(reality)
    return (family, tuple(sorted(full.items())))


def adjoint_classify(s: SystemDef, maps=None, reality: dict | None = None,
                     settings: Settings | None = None) -> Report:
    """Decide ``M H M^-1 = H``, ``M H M^-1 = H^dagger`` and ``H = H^dagger`` exactly."""
    st = _settings(settings)
    t0 = time.perf_counter()
    reality = dict(reality or {})
    sp = specialize(s, reality_bindings(s, reality)) if reality else s
    maps = list(maps) if maps is not None else list(STANDARD_MAPS.values())
    scen = ", ".join(f"{k}={v}" for k, v in sorted(reality.items())) or "parameters complex"
    rep = Report(s.name, f"adjoint classification ({scen})", st.seed, st.tol, st.samples)
    H = sp.H
    Hd = adjoint(H)
    outcomes = {}

    def row(check_id, citation, res, k):
        zero = res.is_zero()
        num = coefficient_values(res, st.samples, st.seed + k).max_residual if st.numeric else None
        outcomes[check_id] = zero
        c = Check(check_id, citation, zero, num, INFO, witness_text(res))
        c.detail = {"holds": zero}
        return rep.add(c)

    row("hermiticity", "H = H^dagger", H - Hd, 0)
    for k, M in enumerate(maps):
        MH = apply_antilinear(M, H)
        row(f"{M.name}:symmetry", f"{M.name} H {M.name}^-1 = H", MH - H, 2 * k + 1)
        row(f"{M.name}:pseudo-hermiticity", f"{M.name} H {M.name}^-1 = H^dagger", MH - Hd, 2 * k + 2)
    # consistency: pseudo-Hermitian and Hermitian imply symmetric
    consistent = all(not (outcomes[f"{M.name}:pseudo-hermiticity"] and outcomes["hermiticity"])
                     or outcomes[f"{M.name}:symmetry"] for M in maps)
    rep.add(Check("consistency", "pseudo-Hermitian and Hermitian imply symmetric", consistent, None,
                  PASS if consistent else FAIL))
    for c in rep.checks:
        if c.verdict == INFO and c.numeric_max is not None:
            if (c.numeric_max < st.tol) != bool(c.symbolic_zero):
                c.verdict = FAIL
                c.witness = (c.witness + "; numeric disagrees with symbolic").lstrip("; ")
    for mname, rel, holds, cite in ADJOINT_CLAIMS.get(_claim_key(s, reality), []):
        key = "hermiticity" if rel == "hermiticity" else f"{mname}:{rel}"
        if key not in outcomes:
            continue
        got = outcomes[key]
        src = next(c for c in rep.checks if c.check_id == key)
        ok = got == holds and src.verdict != FAIL
        rep.add(Check(f"claim:{key}", cite, src.symbolic_zero, src.numeric_max, PASS if ok else FAIL,
                      "" if ok else f"expected {'holds' if holds else 'fails'}, computed {'holds' if got else 'fails'}"))
    rep.notes.append(classification_line(outcomes, maps))
    rep.elapsed = time.perf_counter() - t0
    return rep


def classification_line(outcomes: dict, maps) -> str:
    sym = [M.name for M in maps if outcomes.get(f"{M.name}:symmetry")]
    pse = [M.name for M in maps if outcomes.get(f"{M.name}:pseudo-hermiticity")]
    parts = [
        "symmetric under " + (", ".join(sym) if sym else "none of the maps"),
        "pseudo-Hermitian with respect to " + (", ".join(pse) if pse else "none of the maps"),
        "Hermitian" if outcomes.get("hermiticity") else "not Hermitian",
    ]
    return "; ".join(parts)


# -- dependence -----------------------------------------------------------------------------------

def _classical_eval(x, cls: dict) -> RationalNF:
    """A relation recipe evaluated with every named operator replaced by its classical limit."""
    from ..kernel.expr import free_symbols
    if isinstance(x, OpAtom):
        return cls[x.name]
    if isinstance(x, OpMul):
        if HBAR in free_symbols(x.coeff):
            raise ValueError("hbar in a classical relation")
        return normalize(x.coeff)
    if isinstance(x, OpSum):
        out = NF_ZERO
        for it in x.items:
            out = out + _classical_eval(it, cls)
        return out
    if isinstance(x, OpProd):
        out = RationalNF.const(1)
        for it in x.items:
            out = out * _classical_eval(it, cls)
        return out
    raise TypeError(type(x).__name__)


def dependence_check(s: SystemDef, settings: Settings | None = None, reality: dict | None = None,
                     values: dict | None = None) -> Report:
    """Classical identity check and hbar-graded quantum residual of each dependence relation.

    The quantum relation uses the written left-to-right operator ordering and
    is reported, not asserted.
    """
    st = _settings(settings)
    t0 = time.perf_counter()
    sp = s
    if reality:
        sp = specialize(sp, reality_bindings(sp, reality))
    if values:
        from ..systems import value_bindings
        sp = specialize(sp, value_bindings(sp, values))
    rep = Report(sp.name, "dependence", st.seed, st.tol, st.samples)
    cls = {"H": classical_limit(sp.H).to_nf()}
    for n, D in sp.integrals.items():
        cls[n] = classical_limit(D).to_nf()
    for k, (name, (lhs, rhs)) in enumerate(sp.dependence.items()):
        lc, rc = _classical_eval(lhs, cls), _classical_eval(rhs, cls)
        res = lc - rc
        zero = res.is_zero()
        num = None
        if st.numeric:
            num = expr_claim(to_expr(lc), to_expr(rc), st.samples, st.seed + k).max_residual
        w = "" if zero else render(to_expr(res))[:240]
        rep.add(Check(f"{name}:classical", sp.citation(name) + " (classical identity)", zero, num,
                      decide(zero, num, st.tol), w))
        Q = sp._to_cartesian(to_diffop(lhs, sp.chart)) - sp._to_cartesian(to_diffop(rhs, sp.chart))
        grades = hbar_grade(Q, "momentum")
        detail = {f"hbar^{g}": render_operator(D) for g, D in grades.items() if not D.is_zero()}
        c = Check(f"{name}:quantum", sp.citation(name) + " (quantum residual, left-to-right ordering)",
                  None, None, INFO, "grades: " + (", ".join(detail) or "none"))
        c.detail = detail
        rep.add(c)
    rep.elapsed = time.perf_counter() - t0
    return rep


__all__ = [
    "Settings", "check_commutes", "CommuteResult", "claim_check", "integrability_suite", "classical_checks",
    "AlgebraTable", "Cell", "ClosureFailure", "algebra_closure", "algebra_report", "adjoint_classify",
    "ADJOINT_CLAIMS", "dependence_check", "classical_hamiltonian", "witness_text", "DEFAULT_TOL",
    "DEFAULT_SAMPLES",
]

