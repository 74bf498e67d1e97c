"""Normal-ordered differential operators and phase-space polynomials.

A :class:`DiffOperator` is ``sum_alpha c_alpha(x) d^alpha`` with every
coefficient to the left of every derivative.  Coefficients are kept as
canonical :class:`RationalNF` values, so an operator is zero exactly when
its term map is empty.

Operators are usually built from :class:`OpExpr` recipes (products and sums
of multiplication operators and momenta ``-I*hbar*d_j``).  A recipe is
turned into a normal-ordered operator by :func:`to_diffop`; the numeric
oracle in :mod:`magint.verify.numeric` evaluates the same recipe directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .kernel.atoms import CARTESIAN, CYL_MOMENTA, CYLINDRICAL, HBAR, MOMENTA, R, U, Symbol
from .kernel.expr import Expr, as_expr, normalize, to_expr
from .kernel.rational import (
    NF_ONE, NF_ZERO, RationalNF, conj_nf, diff_nf, hbar_split, subst_nf,
)
from .kernel.scalar import I, Scalar


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple
    momenta: tuple

    def index(self, s: Symbol) -> int:
        return self.coords.index(s)


CARTESIAN_CHART = Chart("cartesian", CARTESIAN, MOMENTA)
CYLINDRICAL_CHART = Chart("cylindrical", CYLINDRICAL, CYL_MOMENTA)
CHARTS = {c.name: c for c in (CARTESIAN_CHART, CYLINDRICAL_CHART)}

ZERO3 = (0, 0, 0)
HBAR_NF = RationalNF.symbol(HBAR)
MINUS_I_HBAR = HBAR_NF.scale(-I)
HALF = NF_ONE / 2


def _as_nf(c) -> RationalNF:
    if isinstance(c, RationalNF):
        return c
    if isinstance(c, Expr):
        return normalize(c)
    if isinstance(c, Symbol):
        return RationalNF.symbol(c)
    return RationalNF.const(c)


def _sub_index(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _add_index(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _below(alpha):
    for g0 in range(alpha[0] + 1):
        for g1 in range(alpha[1] + 1):
            for g2 in range(alpha[2] + 1):
                yield (g0, g1, g2)


def _binom(alpha, gamma) -> int:
    return comb(alpha[0], gamma[0]) * comb(alpha[1], gamma[1]) * comb(alpha[2], gamma[2])


class _Derivs:
    """Memoized partial derivatives of one coefficient in a chart."""

    __slots__ = ("chart", "cache")

    def __init__(self, chart: Chart, f: RationalNF):
        self.chart = chart
        self.cache = {ZERO3: f}

    def get(self, gamma) -> RationalNF:
        d = self.cache.get(gamma)
        if d is not None:
            return d
        k = next(i for i in range(3) if gamma[i])
        prev = list(gamma)
        prev[k] -= 1
        d = diff_nf(self.get(tuple(prev)), self.chart.coords[k])
        self.cache[gamma] = d
        return d


class DiffOperator:
    """Finite map ``alpha -> coefficient`` in a fixed chart."""

    __slots__ = ("chart", "terms")

    def __init__(self, terms: dict | None = None, chart: Chart = CARTESIAN_CHART):
        self.chart = chart
        self.terms = {a: c for a, c in (terms or {}).items() if not c.is_zero()}

    # -- construction ---------------------------------------------------------
    @staticmethod
    def scalar(c, chart: Chart = CARTESIAN_CHART) -> "DiffOperator":
        return DiffOperator({ZERO3: _as_nf(c)}, chart)

    @staticmethod
    def derivative(alpha, chart: Chart = CARTESIAN_CHART) -> "DiffOperator":
        return DiffOperator({tuple(alpha): NF_ONE}, chart)

    @staticmethod
    def momentum(j: int, chart: Chart = CARTESIAN_CHART) -> "DiffOperator":
        alpha = [0, 0, 0]
        alpha[j] = 1
        return DiffOperator({tuple(alpha): MINUS_I_HBAR}, chart)

    # -- structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def coefficient(self, alpha) -> RationalNF:
        return self.terms.get(tuple(alpha), NF_ZERO)

    def coefficient_expr(self, alpha) -> Expr:
        return to_expr(self.coefficient(alpha))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def __eq__(self, other):
        return isinstance(other, DiffOperator) and self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart.name, frozenset(self.terms.items())))

    def _check(self, other):
        if self.chart != other.chart:
            raise ValueError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")

    # -- linear structure -----------------------------------------------------
    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        if not isinstance(other, DiffOperator):
            other = DiffOperator.scalar(other, self.chart)
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOperator(out, self.chart)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return DiffOperator({a: -c for a, c in self.terms.items()}, self.chart)

    def __sub__(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator.scalar(other, self.chart)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DiffOperator":
        c = _as_nf(c)
        if c.is_zero():
            return DiffOperator({}, self.chart)
        return DiffOperator({a: v * c for a, v in self.terms.items()}, self.chart)

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        # scalar on the left is a multiplication operator; it commutes with nothing
        # else but for a pure scalar the two readings agree
        return DiffOperator.scalar(other, self.chart) * self

    def __matmul__(self, other):
        return compose(self, other)

    def __pow__(self, n: int):
        out = DiffOperator.scalar(NF_ONE, self.chart)
        for _ in range(n):
            out = compose(out, self)
        return out

    def map_coefficients(self, fn) -> "DiffOperator":
        return DiffOperator({a: fn(c) for a, c in self.terms.items()}, self.chart)

    def substitute(self, sym_map: dict) -> "DiffOperator":
        nf_map = {k: _as_nf(v) for k, v in sym_map.items()}
        return self.map_coefficients(lambda c: subst_nf(c, nf_map))

    def apply(self, f) -> RationalNF:
        """Act on a scalar function given as an expression or normal form."""
        d = _Derivs(self.chart, _as_nf(f))
        out = NF_ZERO
        for a, c in self.terms.items():
            out = out + c * d.get(a)
        return out

    def symbols(self) -> set:
        out = set()
        for c in self.terms.values():
            out |= c.symbols()
        return out

    def __repr__(self):
        return f"DiffOperator[{self.chart.name}]({render_operator(self)})"


def compose(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    """Normal-ordered product ``A B`` via the generalized Leibniz rule."""
    A._check(B)
    chart = A.chart
    out: dict = {}
    derivs = {beta: _Derivs(chart, b) for beta, b in B.terms.items()}
    for alpha, a in A.terms.items():
        for gamma in _below(alpha):
            k = _binom(alpha, gamma)
            rest = _sub_index(alpha, gamma)
            for beta, d in derivs.items():
                db = d.get(gamma)
                if db.is_zero():
                    continue
                term = a * db
                if k != 1:
                    term = term.scale(Scalar(k))
                key = _add_index(rest, beta)
                out[key] = out[key] + term if key in out else term
    return DiffOperator(out, chart)


def commutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    return compose(A, B) - compose(B, A)


def anticommutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    return compose(A, B) + compose(B, A)


def adjoint(A: DiffOperator) -> DiffOperator:
    """Formal adjoint on scalar functions over R^3 (Cartesian chart only)."""
    if A.chart != CARTESIAN_CHART:
        raise ValueError("the formal adjoint is defined in the Cartesian chart")
    out = DiffOperator({}, A.chart)
    for alpha, c in A.terms.items():
        sign = -1 if sum(alpha) % 2 else 1
        cc = conj_nf(c)
        if sign < 0:
            cc = -cc
        out = out + compose(DiffOperator.derivative(alpha), DiffOperator.scalar(cc))
    return out


def conjugate_coefficients(A: DiffOperator) -> DiffOperator:
    return A.map_coefficients(conj_nf)


# -- antilinear and coordinate maps ------------------------------------------------

@dataclass(frozen=True)
class AntilinearMap:
    """Coordinate reflection, optionally composed with complex conjugation."""

    name: str
    coordinate_signs: tuple = (1, 1, 1)
    includes_conjugation: bool = False


P = AntilinearMap("P", (-1, -1, -1), False)
P2 = AntilinearMap("P2", (1, -1, 1), False)
T = AntilinearMap("T", (1, 1, 1), True)
PT = AntilinearMap("PT", (-1, -1, -1), True)
P2T = AntilinearMap("P2T", (1, -1, 1), True)
STANDARD_MAPS = {m.name: m for m in (P, P2, T, PT, P2T)}


def apply_antilinear(M: AntilinearMap, A: DiffOperator) -> DiffOperator:
    """``M A M^{-1}`` for a Cartesian operator."""
    if A.chart != CARTESIAN_CHART:
        raise ValueError("antilinear maps act on Cartesian operators")
    flips = {s: RationalNF.symbol(s).scale(Scalar(-1))
             for s, sg in zip(CARTESIAN, M.coordinate_signs) if sg < 0}
    out = {}
    for alpha, c in A.terms.items():
        c2 = subst_nf(c, flips) if flips else c
        if M.includes_conjugation:
            c2 = conj_nf(c2)
        sign = 1
        for k in range(3):
            if M.coordinate_signs[k] < 0 and alpha[k] % 2:
                sign = -sign
        out[alpha] = c2 if sign > 0 else -c2
    return DiffOperator(out, A.chart)


# -- hbar structure -----------------------------------------------------------------

def momentum_form(A: DiffOperator) -> dict:
    """Coefficients with respect to ``p^alpha = (-I*hbar*d)^alpha``."""
    out = {}
    for alpha, c in A.terms.items():
        n = sum(alpha)
        out[alpha] = c / (MINUS_I_HBAR ** n) if n else c
    return out


def hbar_grade(A: DiffOperator, form: str = "derivative") -> dict:
    """Split ``A`` by exact power of hbar.

    ``form="derivative"`` grades the coefficients of ``d^alpha``;
    ``form="momentum"`` grades the coefficients of ``p^alpha`` and returns,
    for each power k, the operator whose momentum-form coefficients are the
    hbar^k parts (so that ``A = sum_k hbar^k * grade[k]``).
    """
    out: dict = {}
    if form == "derivative":
        for alpha, c in A.terms.items():
            for k, ck in hbar_split(c).items():
                out.setdefault(k, {})[alpha] = ck
        return {k: DiffOperator(t, A.chart) for k, t in sorted(out.items())}
    if form != "momentum":
        raise ValueError(f"unknown grading form {form!r}")
    graded: dict = {}
    for alpha, c in momentum_form(A).items():
        for k, ck in hbar_split(c).items():
            graded.setdefault(k, {})[alpha] = ck
    result = {}
    for k, t in sorted(graded.items()):
        op = DiffOperator({}, A.chart)
        for alpha, ck in t.items():
            op = op + _momentum_monomial(alpha, A.chart).scale(ck)
        result[k] = op
    return result


def _momentum_monomial(alpha, chart):
    # p^alpha = (-I hbar)^|alpha| d^alpha exactly, since constant coefficients commute
    n = sum(alpha)
    return DiffOperator({tuple(alpha): MINUS_I_HBAR ** n if n else NF_ONE}, chart)


def from_hbar_grades(grades: dict, chart: Chart = CARTESIAN_CHART) -> DiffOperator:
    out = DiffOperator({}, chart)
    for k, op in grades.items():
        out = out + op.scale(HBAR_NF ** k)
    return out


# -- classical objects ------------------------------------------------------------

class ClassicalLimitError(ValueError):
    """Negative powers of hbar survive in the momentum-form coefficients."""


class PhasePolynomial:
    """``sum_alpha c_alpha(x) p^alpha`` with momentum-free coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, terms: dict | None = None, chart: Chart = CARTESIAN_CHART):
        self.chart = chart
        self.terms = {a: c for a, c in (terms or {}).items() if not c.is_zero()}

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, PhasePolynomial) and self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, PhasePolynomial):
            other = PhasePolynomial({ZERO3: _as_nf(other)}, self.chart)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return PhasePolynomial(out, self.chart)

    __radd__ = __add__

    def __neg__(self):
        return PhasePolynomial({a: -c for a, c in self.terms.items()}, self.chart)

    def __sub__(self, other):
        if not isinstance(other, PhasePolynomial):
            other = PhasePolynomial({ZERO3: _as_nf(other)}, self.chart)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PhasePolynomial":
        c = _as_nf(c)
        return PhasePolynomial({a: v * c for a, v in self.terms.items()}, self.chart)

    def __mul__(self, other):
        if not isinstance(other, PhasePolynomial):
            return self.scale(other)
        out = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                k = _add_index(a, b)
                t = c * d
                out[k] = out[k] + t if k in out else t
        return PhasePolynomial(out, self.chart)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PhasePolynomial({ZERO3: NF_ONE}, self.chart)
        for _ in range(n):
            out = out * self
        return out

    def substitute(self, sym_map: dict) -> "PhasePolynomial":
        nf_map = {k: _as_nf(v) for k, v in sym_map.items()}
        return PhasePolynomial({a: subst_nf(c, nf_map) for a, c in self.terms.items()}, self.chart)

    def to_nf(self) -> RationalNF:
        """The same function as a rational expression in the momentum symbols."""
        out = NF_ZERO
        ps = [RationalNF.symbol(p) for p in self.chart.momenta]
        for a, c in self.terms.items():
            t = c
            for k in range(3):
                if a[k]:
                    t = t * ps[k] ** a[k]
            out = out + t
        return out

    def __repr__(self):
        return f"PhasePolynomial({render_phase(self)})"


def classical_limit(A: DiffOperator) -> PhasePolynomial:
    """Leading classical symbol: ``-I*hbar*d_j -> p_j``, then ``hbar -> 0``."""
    out = {}
    for alpha, c in momentum_form(A).items():
        grades = hbar_split(c)
        bad = [k for k, v in grades.items() if k < 0 and not v.is_zero()]
        if bad:
            raise ClassicalLimitError(f"coefficient of p^{alpha} has hbar^{min(bad)}")
        if 0 in grades:
            out[alpha] = grades[0]
    return PhasePolynomial(out, A.chart)


def poisson(f: PhasePolynomial, g: PhasePolynomial) -> PhasePolynomial:
    """``sum_j df/dx_j dg/dp_j - df/dp_j dg/dx_j``."""
    if f.chart != g.chart:
        raise ValueError("chart mismatch")
    chart = f.chart
    out: dict = {}

    def acc(k, t):
        if not t.is_zero():
            out[k] = out[k] + t if k in out else t

    for a, c in f.terms.items():
        for b, d in g.terms.items():
            for j in range(3):
                x = chart.coords[j]
                if b[j]:
                    dc = diff_nf(c, x)
                    if not dc.is_zero():
                        bb = list(b)
                        bb[j] -= 1
                        acc(_add_index(a, tuple(bb)), (dc * d).scale(Scalar(b[j])))
                if a[j]:
                    dd = diff_nf(d, x)
                    if not dd.is_zero():
                        aa = list(a)
                        aa[j] -= 1
                        acc(_add_index(tuple(aa), b), (c * dd).scale(Scalar(-a[j])))
    return PhasePolynomial(out, chart)


def poisson_nf(f: RationalNF, g: RationalNF, chart: Chart = CARTESIAN_CHART) -> RationalNF:
    """Poisson bracket of general phase-space functions in the momentum symbols."""
    out = NF_ZERO
    for x, p in zip(chart.coords, chart.momenta):
        fx, fp = diff_nf(f, x), diff_nf(f, p)
        gx, gp = diff_nf(g, x), diff_nf(g, p)
        if not fx.is_zero() and not gp.is_zero():
            out = out + fx * gp
        if not fp.is_zero() and not gx.is_zero():
            out = out - fp * gx
    return out


def phase_from_nf(f: RationalNF, chart: Chart = CARTESIAN_CHART) -> PhasePolynomial:
    """Split a polynomial-in-momenta normal form into a :class:`PhasePolynomial`."""
    from .kernel.atoms import TABLE

    idx = [TABLE.index(p) for p in chart.momenta]
    if any(f.den.degree_in(i) > 0 for i in idx):
        raise ValueError("momenta in a denominator")
    out: dict = {}
    for m, c in f.num.terms.items():
        alpha = tuple(m[i] if i < len(m) else 0 for i in idx)
        rest = list(m)
        for i in idx:
            if i < len(rest):
                rest[i] = 0
        while rest and not rest[-1]:
            rest.pop()
        from .kernel.poly import Poly
        term = RationalNF.make(Poly({tuple(rest): c}), f.den)
        out[alpha] = out[alpha] + term if alpha in out else term
    return PhasePolynomial(out, chart)


# -- recipes ------------------------------------------------------------------------

class OpExpr:
    """Recipe tree for an operator; immutable, structurally hashable."""

    __slots__ = ("_h",)

    def __add__(self, o):
        return op_sum(self, as_op(o))

    def __radd__(self, o):
        return op_sum(as_op(o), self)

    def __sub__(self, o):
        return op_sum(self, op_scale(-1, as_op(o)))

    def __rsub__(self, o):
        return op_sum(as_op(o), op_scale(-1, self))

    def __neg__(self):
        return op_scale(-1, self)

    def __mul__(self, o):
        return op_prod(self, as_op(o))

    def __rmul__(self, o):
        return op_prod(as_op(o), self)

    def __truediv__(self, o):
        o = as_expr(o) if not isinstance(o, OpExpr) else o
        if isinstance(o, OpExpr):
            if not isinstance(o, OpMul):
                raise TypeError("division by a differential operator")
            o = o.coeff
        return op_prod(OpMul(1 / o), self)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative operator power")
        if n == 0:
            return OpMul(as_expr(1))
        return op_prod(*([self] * n))

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_h", h)
            return h

    def __repr__(self):
        from .parser import render_op
        return f"OpExpr({render_op(self)})"


class OpMul(OpExpr):
    """Multiplication by a function."""

    __slots__ = ("coeff",)

    def __init__(self, coeff):
        object.__setattr__(self, "coeff", as_expr(coeff))

    def _key(self):
        return (self.coeff,)


class OpMom(OpExpr):
    """Chart momentum ``-I*hbar*d_j``."""

    __slots__ = ("index", "chart")

    def __init__(self, index: int, chart: Chart = CARTESIAN_CHART):
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "chart", chart)

    def _key(self):
        return (self.index, self.chart.name)


class OpSum(OpExpr):
    __slots__ = ("items",)

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))

    def _key(self):
        return self.items


class OpProd(OpExpr):
    """Ordered composition, leftmost acts last."""

    __slots__ = ("items",)

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))

    def _key(self):
        return self.items


class OpAtom(OpExpr):
    """A named operator with a fixed normal-ordered value and its recipe."""

    __slots__ = ("name", "recipe")

    def __init__(self, name: str, recipe: OpExpr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "recipe", recipe)

    def _key(self):
        return (self.name, self.recipe)


def as_op(x) -> OpExpr:
    if isinstance(x, OpExpr):
        return x
    return OpMul(as_expr(x))


def op_sum(*items) -> OpExpr:
    flat = []
    for it in items:
        it = as_op(it)
        if isinstance(it, OpSum):
            flat.extend(it.items)
        else:
            flat.append(it)
    return flat[0] if len(flat) == 1 else OpSum(flat)


def op_prod(*items) -> OpExpr:
    flat = []
    for it in items:
        it = as_op(it)
        if isinstance(it, OpProd):
            flat.extend(it.items)
        else:
            flat.append(it)
    return flat[0] if len(flat) == 1 else OpProd(flat)


def op_scale(c, x: OpExpr) -> OpExpr:
    return op_prod(OpMul(as_expr(c)), x)


def comm(a, b) -> OpExpr:
    a, b = as_op(a), as_op(b)
    return op_sum(op_prod(a, b), op_scale(-1, op_prod(b, a)))


def acomm(a, b) -> OpExpr:
    a, b = as_op(a), as_op(b)
    return op_sum(op_prod(a, b), op_prod(b, a))


def sym(a, b) -> OpExpr:
    """``(a b + b a)/2``."""
    from .kernel.expr import rational
    return op_scale(rational(1, 2), acomm(a, b))


def op_free_symbols(x: OpExpr) -> set:
    from .kernel.expr import free_symbols
    if isinstance(x, OpMul):
        return free_symbols(x.coeff)
    if isinstance(x, OpMom):
        return {HBAR}
    if isinstance(x, OpAtom):
        return op_free_symbols(x.recipe)
    out = set()
    for it in x.items:
        out |= op_free_symbols(it)
    return out


def op_chart(x: OpExpr):
    if isinstance(x, OpMom):
        return x.chart
    if isinstance(x, OpAtom):
        return op_chart(x.recipe)
    if isinstance(x, (OpSum, OpProd)):
        for it in x.items:
            c = op_chart(it)
            if c is not None:
                return c
    return None


def op_substitute(x: OpExpr, bindings: dict) -> OpExpr:
    """Substitute symbols inside every coefficient of a recipe."""
    from .kernel.expr import substitute
    if not bindings:
        return x
    if isinstance(x, OpMul):
        return OpMul(substitute(x.coeff, bindings))
    if isinstance(x, OpMom):
        return x
    if isinstance(x, OpAtom):
        return OpAtom(x.name, op_substitute(x.recipe, bindings))
    items = [op_substitute(it, bindings) for it in x.items]
    return OpSum(items) if isinstance(x, OpSum) else OpProd(items)


_DIFFOP_CACHE: dict = {}


def to_diffop(x: OpExpr, chart: Chart | None = None) -> DiffOperator:
    """Normal-order a recipe."""
    if chart is None:
        chart = op_chart(x) or CARTESIAN_CHART
    key = (x, chart.name)
    hit = _DIFFOP_CACHE.get(key)
    if hit is not None:
        return hit
    if isinstance(x, OpMul):
        out = DiffOperator.scalar(normalize(x.coeff), chart)
    elif isinstance(x, OpMom):
        if x.chart != chart:
            raise ValueError("momentum from a different chart")
        out = DiffOperator.momentum(x.index, chart)
    elif isinstance(x, OpAtom):
        out = to_diffop(x.recipe, chart)
    elif isinstance(x, OpSum):
        out = DiffOperator({}, chart)
        for it in x.items:
            out = out + to_diffop(it, chart)
    elif isinstance(x, OpProd):
        out = None
        # multiply from the right so that scalars on the left stay cheap
        for it in reversed(x.items):
            d = to_diffop(it, chart)
            out = d if out is None else compose(d, out)
    else:
        raise TypeError(type(x).__name__)
    _DIFFOP_CACHE[key] = out
    return out


# -- Cartesian operators in the cylindrical chart -------------------------------------

def cylindrical_cartesian_momenta() -> tuple:
    """``p1, p2, p3`` written in the cylindrical chart."""
    from .kernel.expr import I as IE, Sym, power, rational
    u = Sym(U)
    r = Sym(R)
    cos = (u + power(u, -1)) * rational(1, 2)
    sin = (u - power(u, -1)) * (-IE * rational(1, 2))
    pr, pphi, pz = (OpMom(k, CYLINDRICAL_CHART) for k in range(3))
    p1 = op_sum(op_prod(OpMul(cos), pr), op_prod(OpMul(-sin / r), pphi))
    p2 = op_sum(op_prod(OpMul(sin), pr), op_prod(OpMul(cos / r), pphi))
    return p1, p2, pz


# -- rendering ---------------------------------------------------------------------------

def _dname(alpha, chart) -> str:
    parts = []
    for k, e in enumerate(alpha):
        if e:
            nm = f"d_{chart.coords[k].name}"
            parts.append(nm if e == 1 else f"{nm}^{e}")
    return "*".join(parts)


def render_operator(A: DiffOperator) -> str:
    from .parser import render
    if A.is_zero():
        return "0"
    parts = []
    for alpha, c in A.sorted_terms():
        cs = render(to_expr(c))
        d = _dname(alpha, A.chart)
        parts.append(f"({cs})*{d}" if d else f"({cs})")
    return " + ".join(parts)


def render_phase(f: PhasePolynomial) -> str:
    from .parser import render
    if f.is_zero():
        return "0"
    parts = []
    for alpha in sorted(f.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        cs = render(to_expr(f.terms[alpha]))
        ps = []
        for k, e in enumerate(alpha):
            if e:
                nm = f.chart.momenta[k].name
                ps.append(nm if e == 1 else f"{nm}^{e}")
        parts.append(f"({cs})" + ("*" + "*".join(ps) if ps else ""))
    return " + ".join(parts)


__all__ = [
    "Chart", "CARTESIAN_CHART", "CYLINDRICAL_CHART", "DiffOperator", "compose",
    "commutator", "anticommutator", "adjoint", "AntilinearMap", "apply_antilinear",
    "P", "P2", "T", "PT", "P2T", "STANDARD_MAPS", "hbar_grade", "momentum_form",
    "classical_limit", "PhasePolynomial", "poisson", "poisson_nf", "phase_from_nf",
    "OpExpr", "OpMul", "OpMom", "OpSum", "OpProd", "OpAtom", "as_op", "op_sum", "op_prod",
    "op_scale", "comm", "acomm", "sym", "to_diffop", "ClassicalLimitError",
    "from_momentum_polynomial", "cylindrical_cartesian_momenta", "render_operator",
]


def from_momentum_polynomial(spec: dict, ordering: str = "left", chart: Chart = CARTESIAN_CHART) -> DiffOperator:
    """Build an operator from ``{alpha: coefficient}`` meaning ``sum c_alpha p^alpha``.

    ``ordering="symmetrized"`` uses ``(c p + p c)/2`` for first-order terms;
    higher-order terms keep coefficients on the left.
    """
    if ordering not in ("left", "symmetrized"):
        raise ValueError(f"unknown ordering {ordering!r}")
    out = DiffOperator({}, chart)
    for alpha, c in spec.items():
        alpha = tuple(alpha)
        c_nf = _as_nf(c)
        mono = _momentum_monomial(alpha, chart)
        if ordering == "symmetrized" and sum(alpha) == 1:
            cop = DiffOperator.scalar(c_nf, chart)
            out = out + (compose(cop, mono) + compose(mono, cop)).scale(HALF)
        else:
            out = out + mono.scale(c_nf)
    return out

