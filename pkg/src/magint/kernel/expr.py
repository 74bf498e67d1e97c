"""Immutable expression trees.

Trees keep the shape in which an expression was written; :func:`normalize`
maps them to the canonical :class:`RationalNF` used for exact zero tests,
and :func:`to_expr` maps a normal form back to a tree.
"""
from __future__ import annotations

import cmath
from fractions import Fraction

from .atoms import PHI, TABLE, U, FuncAtom, Symbol, UFuncAtom
from .poly import canon_key
from .rational import (
    FUNC_NAMES, NF_ONE, NF_ZERO, RationalNF, UnsupportedNode, conj_symbol,
    conj_ufunc_name, func, ufunc,
)
from .scalar import I as I_SCALAR
from .scalar import ONE, ZERO, Scalar, as_scalar


class Expr:
    __slots__ = ("_hash",)

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Expr) and type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _init(self, **fields):
        for k, v in fields.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_hash", None)

    # -- operators ------------------------------------------------------------
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return add(self, neg(as_expr(o)))

    def __rsub__(self, o):
        return add(as_expr(o), neg(self))

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return mul(self, power(as_expr(o), -1))

    def __rtruediv__(self, o):
        return mul(as_expr(o), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __repr__(self):
        from ..parser import render
        return f"Expr({render(self)})"

    def __str__(self):
        from ..parser import render
        return render(self)


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self._init(value=as_scalar(value))

    def _key(self):
        return (self.value,)


class Sym(Expr):
    __slots__ = ("symbol",)

    def __init__(self, symbol: Symbol):
        self._init(symbol=symbol)

    def _key(self):
        return (self.symbol,)


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self._init(terms=tuple(terms))

    def _key(self):
        return self.terms


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self._init(factors=tuple(factors))

    def _key(self):
        return self.factors


class IntPower(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        self._init(base=base, exp=int(exp))

    def _key(self):
        return (self.base, self.exp)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNC_NAMES:
            raise UnsupportedNode(f"unknown function {name}")
        self._init(name=name, arg=arg)

    def _key(self):
        return (self.name, self.arg)


class UFunc(Expr):
    __slots__ = ("name", "args", "deriv", "reality")

    def __init__(self, name: str, args, deriv=None, reality: str = "complex"):
        args = tuple(args)
        deriv = tuple(deriv) if deriv is not None else (0,) * len(args)
        if len(deriv) != len(args):
            raise ValueError("derivative index length must match argument count")
        for a in args:
            if not isinstance(a, Symbol) or a.kind != "coordinate":
                raise UnsupportedNode(f"{name}: arguments must be coordinate symbols")
        self._init(name=name, args=args, deriv=deriv, reality=reality)

    def _key(self):
        return (self.name, self.args, self.deriv, self.reality)


ZERO_E = Num(0)
ONE_E = Num(1)
I_E = Num(I_SCALAR)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Symbol):
        return Sym(v)
    if isinstance(v, RationalNF):
        return to_expr(v)
    return Num(v)


def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


def add(*xs) -> Expr:
    flat = []
    const = ZERO
    for x in xs:
        x = as_expr(x)
        items = x.terms if isinstance(x, Sum) else (x,)
        for t in items:
            if isinstance(t, Num):
                const = const + t.value
            else:
                flat.append(t)
    if const:
        flat.append(Num(const))
    if not flat:
        return ZERO_E
    if len(flat) == 1:
        return flat[0]
    return Sum(flat)


def mul(*xs) -> Expr:
    flat = []
    const = ONE
    for x in xs:
        x = as_expr(x)
        items = x.factors if isinstance(x, Product) else (x,)
        for t in items:
            if isinstance(t, Num):
                const = const * t.value
            else:
                flat.append(t)
    if not const:
        return ZERO_E
    if not const.is_one():
        flat.insert(0, Num(const))
    if not flat:
        return ONE_E
    if len(flat) == 1:
        return flat[0]
    return Product(flat)


def neg(x: Expr) -> Expr:
    return mul(Num(-1), x)


def power(base: Expr, n: int) -> Expr:
    base = as_expr(base)
    if n == 0:
        return ONE_E
    if n == 1:
        return base
    if isinstance(base, Num):
        return Num(base.value ** n)
    if isinstance(base, IntPower):
        return power(base.base, base.exp * n)
    return IntPower(base, n)


def sym(s: Symbol) -> Expr:
    return Sym(s)


# -- traversal ------------------------------------------------------------------

def children(e: Expr):
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, IntPower):
        return (e.base,)
    if isinstance(e, Func):
        return (e.arg,)
    return ()


def free_symbols(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Sym):
            out.add(x.symbol)
        elif isinstance(x, UFunc):
            out.update(x.args)
        else:
            stack.extend(children(x))
    return out


def ufuncs(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, UFunc):
            out.add(x)
        else:
            stack.extend(children(x))
    return out


# -- differentiation ------------------------------------------------------------

def diff(e: Expr, v: Symbol) -> Expr:
    """Exact partial derivative (chain and product rules, no canonicalization)."""
    if isinstance(e, Num):
        return ZERO_E
    if isinstance(e, Sym):
        if e.symbol == v:
            return ONE_E
        if e.symbol == U and v == PHI:
            return mul(I_E, e)
        return ZERO_E
    if isinstance(e, Sum):
        return add(*(diff(t, v) for t in e.terms))
    if isinstance(e, Product):
        parts = []
        fs = e.factors
        for k, f in enumerate(fs):
            d = diff(f, v)
            if _is_num(d, 0):
                continue
            parts.append(mul(*fs[:k], d, *fs[k + 1:]))
        return add(*parts)
    if isinstance(e, IntPower):
        d = diff(e.base, v)
        if _is_num(d, 0):
            return ZERO_E
        return mul(Num(e.exp), power(e.base, e.exp - 1), d)
    if isinstance(e, Func):
        d = diff(e.arg, v)
        if _is_num(d, 0):
            return ZERO_E
        if e.name == "exp":
            return mul(e, d)
        if e.name == "ln":
            return mul(d, power(e.arg, -1))
        if e.name == "sin":
            return mul(Func("cos", e.arg), d)
        return mul(Num(-1), Func("sin", e.arg), d)
    if isinstance(e, UFunc):
        parts = []
        for k, a in enumerate(e.args):
            if a == v or (a == PHI and v == U):
                dv = list(e.deriv)
                dv[k] += 1
                t = UFunc(e.name, e.args, dv, e.reality)
                if a != v:
                    t = mul(Num(-I_SCALAR), t, power(Sym(U), -1))
                parts.append(t)
        return add(*parts)
    raise UnsupportedNode(type(e).__name__)


# -- substitution ---------------------------------------------------------------

class CyclicBinding(ValueError):
    """The binding graph has a cycle through two or more symbols."""


def _check_acyclic(bindings: dict):
    graph = {s: {t for t in free_symbols(e) if t in bindings and t != s} for s, e in bindings.items()}
    state = {}

    def visit(s, path):
        st = state.get(s)
        if st == 1:
            raise CyclicBinding(" -> ".join(x.name for x in path + [s]))
        if st == 2:
            return
        state[s] = 1
        for t in graph[s]:
            visit(t, path + [s])
        state[s] = 2

    for s in graph:
        visit(s, [])


def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution of symbols by expressions.

    A symbol may refer to itself (``u -> 1/u``); longer cycles are rejected.
    """
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    _check_acyclic(bindings)
    memo = {}

    def go(x):
        r = memo.get(x)
        if r is not None:
            return r
        if isinstance(x, Sym):
            r = bindings.get(x.symbol, x)
        elif isinstance(x, Num):
            r = x
        elif isinstance(x, Sum):
            r = add(*(go(t) for t in x.terms))
        elif isinstance(x, Product):
            r = mul(*(go(t) for t in x.factors))
        elif isinstance(x, IntPower):
            r = power(go(x.base), x.exp)
        elif isinstance(x, Func):
            r = Func(x.name, go(x.arg))
        elif isinstance(x, UFunc):
            new_args = []
            for a in x.args:
                img = bindings.get(a)
                if img is None:
                    new_args.append(a)
                elif isinstance(img, Sym) and img.symbol.kind == "coordinate":
                    new_args.append(img.symbol)
                else:
                    raise UnsupportedNode(f"cannot substitute {img} into argument {a.name} of {x.name}")
            r = UFunc(x.name, new_args, x.deriv, x.reality)
        else:
            raise UnsupportedNode(type(x).__name__)
        memo[x] = r
        return r

    return go(e)


# -- conjugation ----------------------------------------------------------------

def conjugate(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(e.value.conjugate())
    if isinstance(e, Sym):
        s = e.symbol
        if s.reality == "unit":
            return power(e, -1)
        if s.reality == "complex":
            return Sym(conj_symbol(s))
        return e
    if isinstance(e, Sum):
        return add(*(conjugate(t) for t in e.terms))
    if isinstance(e, Product):
        return mul(*(conjugate(t) for t in e.factors))
    if isinstance(e, IntPower):
        return power(conjugate(e.base), e.exp)
    if isinstance(e, Func):
        return Func(e.name, conjugate(e.arg))
    if isinstance(e, UFunc):
        if e.reality == "real":
            return e
        return UFunc(conj_ufunc_name(e.name), e.args, e.deriv, e.reality)
    raise UnsupportedNode(type(e).__name__)


# -- numeric evaluation ---------------------------------------------------------

class DivisionByZero(ZeroDivisionError):
    def __init__(self, subexpr):
        super().__init__(f"division by zero in {subexpr}")
        self.subexpr = subexpr


class MissingBinding(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"no value bound for {self.name}"


def _lookup(point: dict, s: Symbol):
    if s in point:
        return complex(point[s])
    if s.name in point:
        return complex(point[s.name])
    if s == U:
        for key in (PHI, "phi"):
            if key in point:
                return cmath.exp(1j * complex(point[key]))
    raise MissingBinding(s.name)


def eval_numeric(e: Expr, point: dict, ufunc_table: dict | None = None) -> complex:
    """Double-precision value of ``e``.

    ``ufunc_table`` maps a function name to ``callable(deriv, *args)``
    returning the value of the indicated partial derivative.
    """
    ufunc_table = ufunc_table or {}
    memo = {}

    def go(x):
        r = memo.get(x)
        if r is not None:
            return r
        if isinstance(x, Num):
            r = complex(x.value)
        elif isinstance(x, Sym):
            r = _lookup(point, x.symbol)
        elif isinstance(x, Sum):
            r = sum((go(t) for t in x.terms), 0j)
        elif isinstance(x, Product):
            r = 1 + 0j
            for t in x.factors:
                r *= go(t)
        elif isinstance(x, IntPower):
            b = go(x.base)
            if b == 0 and x.exp < 0:
                raise DivisionByZero(x)
            r = b ** x.exp
        elif isinstance(x, Func):
            a = go(x.arg)
            if x.name == "ln" and a == 0:
                raise DivisionByZero(x)
            r = {"exp": cmath.exp, "ln": cmath.log, "sin": cmath.sin, "cos": cmath.cos}[x.name](a)
        elif isinstance(x, UFunc):
            f = ufunc_table.get(x.name)
            if f is None:
                raise MissingBinding(x.name)
            r = complex(f(x.deriv, *(_lookup(point, a) for a in x.args)))
        else:
            raise UnsupportedNode(type(x).__name__)
        memo[x] = r
        return r

    return go(e)


# -- normal form bridge -----------------------------------------------------------

def normalize(e: Expr) -> RationalNF:
    """Canonical rational normal form; exp/ln/sin/cos become opaque atoms."""
    memo = {}

    def go(x):
        r = memo.get(x)
        if r is not None:
            return r
        if isinstance(x, Num):
            r = RationalNF.const(x.value)
        elif isinstance(x, Sym):
            r = RationalNF.symbol(x.symbol)
        elif isinstance(x, Sum):
            r = NF_ZERO
            for t in x.terms:
                r = r + go(t)
        elif isinstance(x, Product):
            r = NF_ONE
            for t in x.factors:
                r = r * go(t)
        elif isinstance(x, IntPower):
            b = go(x.base)
            if b.is_zero() and x.exp < 0:
                raise DivisionByZero(x)
            r = b ** x.exp
        elif isinstance(x, Func):
            r = func(x.name, go(x.arg))
        elif isinstance(x, UFunc):
            r = ufunc(x.name, x.args, x.deriv, x.reality)
        else:
            raise UnsupportedNode(type(x).__name__)
        memo[x] = r
        return r

    return go(as_expr(e))


def _atom_expr(a) -> Expr:
    if isinstance(a, Symbol):
        return Sym(a)
    if isinstance(a, UFuncAtom):
        return UFunc(a.name, a.args, a.deriv, a.reality)
    if isinstance(a, FuncAtom):
        return Func(a.fname, to_expr(a.arg))
    raise UnsupportedNode(repr(a))


def poly_to_expr(p) -> Expr:
    if p.is_zero():
        return ZERO_E
    order = TABLE.canonical_order()
    terms = []
    for m in sorted(p.terms, key=lambda t: canon_key(t, order), reverse=True):
        c = p.terms[m]
        factors = [Num(c)] if not c.is_one() else []
        for j in sorted((j for j, e in enumerate(m) if e), key=order.index):
            factors.append(power(_atom_expr(TABLE.atom(j)), m[j]))
        terms.append(mul(*factors))
    if len(terms) == 1:
        return terms[0]
    return Sum(terms)


def to_expr(f: RationalNF) -> Expr:
    n = poly_to_expr(f.num)
    if f.den.is_one():
        return n
    d = f.den
    if len(d.terms) == 1:
        (m, c), = d.terms.items()
        factors = [n]
        if not c.is_one():
            factors.append(Num(c.inverse()))
        for j in sorted((j for j, e in enumerate(m) if e), key=TABLE.canonical_order().index):
            factors.append(power(_atom_expr(TABLE.atom(j)), -m[j]))
        return _quotient(factors)
    return _quotient([n, IntPower(poly_to_expr(d), -1)])


def _quotient(factors):
    # keep the numerator as a single factor so that rendering shows n/d
    flat = [f for f in factors if not _is_num(f, 1)]
    if len(flat) == 1:
        return flat[0]
    return Product(flat)


def rational(p: int, q: int = 1) -> Expr:
    return Num(Scalar(Fraction(p, q)))


I = I_E  # noqa: E741

__all__ = [
    "Expr", "Num", "Sym", "Sum", "Product", "IntPower", "Func", "UFunc", "as_expr",
    "add", "mul", "neg", "power", "sym", "diff", "substitute", "conjugate",
    "eval_numeric", "normalize", "to_expr", "free_symbols", "ufuncs", "CyclicBinding",
    "DivisionByZero", "MissingBinding", "I", "rational", "ZERO_E", "ONE_E",
]
