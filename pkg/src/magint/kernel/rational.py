"""Canonical rational functions over Q(i) in the atom variables.

A :class:`RationalNF` is ``num/den`` with ``gcd(num, den) = 1`` and the
denominator's leading coefficient (canonical atom order) equal to one.
Atoms are interned in :data:`magint.kernel.atoms.TABLE`.
"""
from __future__ import annotations

from .atoms import HBAR, PHI, TABLE, U, FuncAtom, Symbol, UFuncAtom
from .poly import EMPTY, Poly, canon_key, gcd, mono_var
from .scalar import I, ONE, ZERO, Scalar, as_scalar

FUNC_NAMES = ("exp", "ln", "sin", "cos")


class UnsupportedNode(ValueError):
    """An expression node that the rational normal form cannot represent."""


class RationalNF:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None):
        # trusted constructor: callers guarantee the invariants
        self.num = num
        self.den = den if den is not None else _ONE_POLY
        self._hash = None

    # -- construction -------------------------------------------------------
    @staticmethod
    def make(num: Poly, den: Poly) -> "RationalNF":
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            return NF_ZERO
        if den.is_const():
            c = den.const_value()
            return RationalNF(num.scale(c.inverse()) if not c.is_one() else num)
        g = gcd(num, den)
        if not g.is_const():
            num = num.exact_div(g)
            den = den.exact_div(g)
        return RationalNF._lc_normalized(num, den)

    @staticmethod
    def _lc_normalized(num: Poly, den: Poly) -> "RationalNF":
        if den.is_const():
            c = den.const_value()
            return RationalNF(num.scale(c.inverse()) if not c.is_one() else num)
        _, lc = den.canonical_leading()
        if not lc.is_one():
            inv = lc.inverse()
            num, den = num.scale(inv), den.scale(inv)
        return RationalNF(num, den)

    @staticmethod
    def const(c) -> "RationalNF":
        c = as_scalar(c)
        return RationalNF(Poly.const(c)) if c else NF_ZERO

    @staticmethod
    def atom(a) -> "RationalNF":
        return RationalNF(Poly.var(TABLE.index(a)))

    @staticmethod
    def symbol(s: Symbol) -> "RationalNF":
        return RationalNF.atom(s)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num.terms

    def is_poly(self) -> bool:
        return self.den.is_one()

    def is_const(self) -> bool:
        return self.den.is_one() and self.num.is_const()

    def const_value(self):
        return self.num.const_value() if self.is_const() else None

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, RationalNF):
            if isinstance(other, (int, Scalar)):
                return self.is_const() and self.const_value() == other
            return NotImplemented
        return self.num.terms == other.num.terms and self.den.terms == other.den.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.terms.items()), frozenset(self.den.terms.items())))
        return self._hash

    def key(self):
        return (frozenset(self.num.terms.items()), frozenset(self.den.terms.items()))

    # -- field operations ---------------------------------------------------
    def __add__(self, other) -> "RationalNF":
        if not isinstance(other, RationalNF):
            other = RationalNF.const(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        d1, d2 = self.den, other.den
        if d1.is_one() and d2.is_one():
            return RationalNF(self.num + other.num)
        if d1 == d2:
            return RationalNF.make(self.num + other.num, d1)
        if d1.is_one():
            return RationalNF(self.num * d2 + other.num, d2)
        if d2.is_one():
            return RationalNF(self.num + other.num * d1, d1)
        g = gcd(d1, d2)
        if g.is_const():
            return RationalNF._lc_normalized(self.num * d2 + other.num * d1, d1 * d2)
        d1g, d2g = d1.exact_div(g), d2.exact_div(g)
        n = self.num * d2g + other.num * d1g
        if n.is_zero():
            return NF_ZERO
        t = gcd(n, g)
        if not t.is_const():
            n = n.exact_div(t)
            d2 = d2.exact_div(t)
        return RationalNF._lc_normalized(n, d1g * d2)

    __radd__ = __add__

    def __neg__(self):
        return RationalNF(-self.num, self.den)

    def __sub__(self, other) -> "RationalNF":
        if not isinstance(other, RationalNF):
            other = RationalNF.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return RationalNF.const(other) - self

    def scale(self, c: Scalar) -> "RationalNF":
        if not c:
            return NF_ZERO
        return RationalNF(self.num.scale(c), self.den)

    def __mul__(self, other) -> "RationalNF":
        if not isinstance(other, RationalNF):
            if isinstance(other, (int, Scalar)):
                return self.scale(as_scalar(other))
            other = RationalNF.const(other)
        if self.is_zero() or other.is_zero():
            return NF_ZERO
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if d1.is_one() and d2.is_one():
            return RationalNF(n1 * n2)
        if n2.is_const():
            return RationalNF(n1.scale(n2.const_value()), d1) if d2.is_one() else RationalNF.make(n1 * n2, d1 * d2)
        if n1.is_const() and d1.is_one():
            return RationalNF(n2.scale(n1.const_value()), d2)
        g1 = gcd(n1, d2) if not d2.is_one() else None
        g2 = gcd(n2, d1) if not d1.is_one() else None
        if g1 is not None and not g1.is_const():
            n1, d2 = n1.exact_div(g1), d2.exact_div(g1)
        if g2 is not None and not g2.is_const():
            n2, d1 = n2.exact_div(g2), d1.exact_div(g2)
        return RationalNF._lc_normalized(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "RationalNF":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalNF._lc_normalized(self.den, self.num)

    def __truediv__(self, other) -> "RationalNF":
        if not isinstance(other, RationalNF):
            other = RationalNF.const(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalNF.const(other) / self

    def __pow__(self, n: int) -> "RationalNF":
        if n == 0:
            return NF_ONE
        if n < 0:
            return self.inverse() ** (-n)
        if n == 1:
            return self
        return RationalNF(self.num ** n, self.den ** n)

    # -- structure ----------------------------------------------------------
    def atoms(self) -> set:
        return self.num.variables() | self.den.variables()

    def symbols(self) -> set:
        """Every :class:`Symbol` the value depends on, including inside atoms."""
        out = set()
        for i in self.atoms():
            out |= _atom_symbols(TABLE.atom(i))
        return out

    def degree_in(self, s: Symbol) -> int:
        return self.num.degree_in(TABLE.index(s))

    def __repr__(self):
        return f"RationalNF({nf_text(self)})"

    def __str__(self):
        return nf_text(self)


_ONE_POLY = Poly({EMPTY: ONE})
NF_ZERO = RationalNF(Poly())
NF_ONE = RationalNF(Poly({EMPTY: ONE}))
NF_I = RationalNF(Poly({EMPTY: I}))


def _atom_symbols(a) -> set:
    if isinstance(a, Symbol):
        return {a}
    if isinstance(a, UFuncAtom):
        return set(a.args)
    if isinstance(a, FuncAtom):
        return a.arg.symbols()
    return set()


# -- atoms --------------------------------------------------------------------

def ufunc(name: str, args: tuple, deriv: tuple | None = None, reality: str = "complex") -> RationalNF:
    args = tuple(args)
    deriv = tuple(deriv) if deriv is not None else (0,) * len(args)
    if len(deriv) != len(args):
        raise ValueError("derivative index length must match argument count")
    for a in args:
        if not isinstance(a, Symbol) or a.kind != "coordinate":
            raise UnsupportedNode(f"uninterpreted function {name} needs coordinate-symbol arguments")
    return RationalNF.atom(UFuncAtom(name, args, deriv, reality))


def func(name: str, arg: RationalNF) -> RationalNF:
    if name not in FUNC_NAMES:
        raise UnsupportedNode(f"unknown function {name}")
    if arg.is_zero():
        if name in ("exp", "cos"):
            return NF_ONE
        if name == "sin":
            return NF_ZERO
        raise ZeroDivisionError("ln(0)")
    if name == "ln" and arg.is_const() and arg.const_value().is_one():
        return NF_ZERO
    return RationalNF.atom(FuncAtom(name, arg, arg.key(), nf_text(arg)))


# -- differentiation ------------------------------------------------------------

_DATOM: dict = {}


def _atom_derivative(j: int, v: Symbol):
    key = (j, v)
    if key in _DATOM:
        return _DATOM[key]
    a = TABLE.atom(j)
    d = None
    if isinstance(a, Symbol):
        if a == v:
            d = NF_ONE
        elif a == U and v == PHI:
            d = NF_I * RationalNF.symbol(U)
    elif isinstance(a, UFuncAtom):
        d = NF_ZERO
        for k, arg in enumerate(a.args):
            if arg == v or (arg == PHI and v == U):
                dv = list(a.deriv)
                dv[k] += 1
                t = ufunc(a.name, a.args, tuple(dv), a.reality)
                if arg != v:
                    t = t * (-NF_I) / RationalNF.symbol(U)
                d = d + t
        if d.is_zero():
            d = None
    elif isinstance(a, FuncAtom):
        da = diff_nf(a.arg, v)
        if not da.is_zero():
            self_nf = RationalNF(Poly.var(j))
            if a.fname == "exp":
                d = self_nf * da
            elif a.fname == "ln":
                d = da / a.arg
            elif a.fname == "sin":
                d = func("cos", a.arg) * da
            else:
                d = -(func("sin", a.arg) * da)
    _DATOM[key] = d
    return d


def _poly_derivative(p: Poly, v: Symbol):
    """dp/dv as a Poly when possible, else as a RationalNF."""
    out_poly = Poly()
    out_rat = None
    for j in p.variables():
        d = _atom_derivative(j, v)
        if d is None:
            continue
        pj = p.derivative(j)
        if d.is_poly():
            out_poly = out_poly + pj * d.num
        else:
            t = RationalNF.make(pj * d.num, d.den)
            out_rat = t if out_rat is None else out_rat + t
    if out_rat is None:
        return out_poly, None
    return None, out_rat + RationalNF(out_poly)


def diff_nf(f: RationalNF, v: Symbol) -> RationalNF:
    """Exact partial derivative of ``f`` with respect to ``v``.

    ``u = exp(I*phi)`` is tied to ``phi``: d/dphi acts on u as ``I*u`` and
    d/du acts on functions of phi through ``dphi/du = -I/u``.
    """
    if f.is_zero():
        return f
    dn_p, dn_r = _poly_derivative(f.num, v)
    if f.den.is_one():
        return dn_r if dn_r is not None else RationalNF(dn_p)
    dd_p, dd_r = _poly_derivative(f.den, v)
    if dd_r is None and dd_p.is_zero():
        if dn_r is not None:
            return dn_r / RationalNF(f.den)
        return RationalNF.make(dn_p, f.den)
    if dn_r is None and dd_r is None:
        # (n' d - n d') / d^2 ; cancel common factor of d and d' first
        g = gcd(f.den, dd_p)
        d_red = f.den.exact_div(g) if not g.is_const() else f.den
        dd_red = dd_p.exact_div(g) if not g.is_const() else dd_p
        numer = dn_p * d_red - f.num * dd_red
        return RationalNF.make(numer, f.den * d_red)
    dn = dn_r if dn_r is not None else RationalNF(dn_p)
    dd = dd_r if dd_r is not None else RationalNF(dd_p)
    den = RationalNF(f.den)
    return dn / den - RationalNF(f.num) * dd / (den * den)


# -- substitution ---------------------------------------------------------------

class UnsupportedSubstitution(ValueError):
    """Substitution would put a non-symbol into an uninterpreted function."""


def _poly_subst(p: Poly, amap: dict) -> RationalNF:
    if not any(j in amap for j in p.variables()):
        return RationalNF(p)
    powers: dict = {}
    # collect terms with polynomial images directly, others as fractions
    acc_poly = Poly()
    acc_rat = None
    for m, c in p.terms.items():
        poly_part = {tuple(m_keep(m, amap)): c}
        term = RationalNF(Poly(poly_part))
        for j, e in enumerate(m):
            if e and j in amap:
                key = (j, e)
                pw = powers.get(key)
                if pw is None:
                    pw = amap[j] ** e
                    powers[key] = pw
                term = term * pw
        if term.is_poly():
            acc_poly = acc_poly + term.num
        else:
            acc_rat = term if acc_rat is None else acc_rat + term
    if acc_rat is None:
        return RationalNF(acc_poly)
    return acc_rat + RationalNF(acc_poly)


def m_keep(m: tuple, amap: dict) -> tuple:
    out = [0 if j in amap else e for j, e in enumerate(m)]
    while out and not out[-1]:
        out.pop()
    return tuple(out)


def _build_atom_map(f: RationalNF, sym_map: dict, atom_hook=None) -> dict:
    amap = {}
    for j in f.atoms():
        a = TABLE.atom(j)
        img = atom_hook(a) if atom_hook is not None else None
        if img is not None:
            amap[j] = img
            continue
        if isinstance(a, Symbol):
            if a in sym_map:
                amap[j] = sym_map[a]
        elif isinstance(a, UFuncAtom):
            if any(s in sym_map for s in a.args):
                new_args = []
                for s in a.args:
                    if s in sym_map:
                        t = _as_symbol(sym_map[s])
                        if t is None:
                            raise UnsupportedSubstitution(
                                f"cannot substitute a non-symbol into argument {s} of {a.name}")
                        new_args.append(t)
                    else:
                        new_args.append(s)
                amap[j] = ufunc(a.name, tuple(new_args), a.deriv, a.reality)
        elif isinstance(a, FuncAtom):
            new_arg = subst_nf(a.arg, sym_map, atom_hook)
            if new_arg != a.arg:
                amap[j] = func(a.fname, new_arg)
    return amap


def _as_symbol(nf: RationalNF):
    if not nf.den.is_one() or len(nf.num.terms) != 1:
        return None
    (m, c), = nf.num.terms.items()
    if not c.is_one() or sum(m) != 1:
        return None
    a = TABLE.atom(len(m) - 1)
    return a if isinstance(a, Symbol) else None


def subst_nf(f: RationalNF, sym_map: dict, atom_hook=None) -> RationalNF:
    """Simultaneous substitution ``Symbol -> RationalNF``."""
    if f.is_zero():
        return f
    amap = _build_atom_map(f, sym_map, atom_hook)
    if not amap:
        return f
    n = _poly_subst(f.num, amap)
    if f.den.is_one():
        return n
    return n / _poly_subst(f.den, amap)


# -- conjugation ----------------------------------------------------------------

def conj_symbol(s: Symbol) -> Symbol:
    if s.reality != "complex":
        return s
    name = s.name[:-4] if s.name.endswith("_bar") else s.name + "_bar"
    return Symbol(name, s.kind, "complex")


def conj_ufunc_name(name: str) -> str:
    return name[:-4] if name.endswith("_bar") else name + "_bar"


def _conj_atom(a):
    if isinstance(a, Symbol):
        if a.reality == "unit":
            return RationalNF.symbol(a).inverse()
        if a.reality == "complex":
            return RationalNF.symbol(conj_symbol(a))
        return None
    if isinstance(a, UFuncAtom):
        if a.reality == "real":
            return None
        return ufunc(conj_ufunc_name(a.name), a.args, a.deriv, a.reality)
    if isinstance(a, FuncAtom):
        return func(a.fname, conj_nf(a.arg))
    return None


def conj_nf(f: RationalNF) -> RationalNF:
    """Complex conjugate with coordinates real and ``u -> 1/u``."""
    if f.is_zero():
        return f
    amap = {}
    for j in f.atoms():
        img = _conj_atom(TABLE.atom(j))
        if img is not None:
            amap[j] = img
    num = _poly_subst(f.num.conj_coeffs(), amap)
    if f.den.is_one():
        return num
    return num / _poly_subst(f.den.conj_coeffs(), amap)


# -- hbar grading ---------------------------------------------------------------

def hbar_split(f: RationalNF) -> dict:
    """Split ``f`` by exact power of hbar: {k: f_k} with f = sum f_k hbar^k.

    Requires the denominator to be a monomial times an hbar-free polynomial.
    """
    h = TABLE.index(HBAR)
    dk = f.den.degree_in(h)
    den = f.den
    shift = 0
    if dk > 0:
        coeffs = den.coeffs_in(h)
        if len(coeffs) != 1:
            raise ValueError("hbar appears non-monomially in a denominator")
        (shift, den), = coeffs.items()
    out = {}
    for k, c in f.num.coeffs_in(h).items():
        out[k - shift] = RationalNF.make(c, den)
    return out


# -- text -----------------------------------------------------------------------

def atom_name(a) -> str:
    if isinstance(a, Symbol):
        return a.name
    if isinstance(a, UFuncAtom):
        head = a.name
        if any(a.deriv):
            head += "_d" + "".join(str(d) for d in a.deriv)
        return f"{head}({', '.join(s.name for s in a.args)})"
    if isinstance(a, FuncAtom):
        return f"{a.fname}({a.text})"
    return repr(a)


def poly_text(p: Poly) -> str:
    if p.is_zero():
        return "0"
    order = TABLE.canonical_order()
    parts = []
    for m in sorted(p.terms, key=lambda t: canon_key(t, order), reverse=True):
        c = p.terms[m]
        factors = []
        for j in sorted((j for j, e in enumerate(m) if e), key=order.index):
            e = m[j]
            nm = atom_name(TABLE.atom(j))
            factors.append(nm if e == 1 else f"{nm}^{e}")
        if not factors:
            parts.append(str(c))
        elif c.is_one():
            parts.append("*".join(factors))
        elif c == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts)


def nf_text(f: RationalNF) -> str:
    if f.den.is_one():
        return poly_text(f.num)
    return f"({poly_text(f.num)})/({poly_text(f.den)})"


def symbol_nf(s: Symbol) -> RationalNF:
    return RationalNF.symbol(s)


def var_index(s) -> int:
    return TABLE.index(s)


def monomial_nf(s: Symbol, e: int) -> RationalNF:
    if e >= 0:
        return RationalNF(Poly({mono_var(TABLE.index(s), e): ONE}))
    return RationalNF(Poly({EMPTY: ONE}), Poly({mono_var(TABLE.index(s), -e): ONE}))


__all__ = [
    "RationalNF", "NF_ZERO", "NF_ONE", "NF_I", "ufunc", "func", "diff_nf", "subst_nf",
    "conj_nf", "conj_symbol", "hbar_split", "nf_text", "UnsupportedNode",
    "UnsupportedSubstitution", "ZERO",
]
