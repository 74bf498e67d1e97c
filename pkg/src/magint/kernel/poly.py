"""Sparse multivariate polynomials over Q(i).

Monomials are exponent tuples indexed by atom id with trailing zeros
stripped, so that a polynomial never needs to know the full variable list.
Python tuple comparison on stripped tuples is lexicographic order with
implicit zero padding, which is a valid monomial order for division.
"""
from __future__ import annotations

import random
from operator import add

from .atoms import TABLE
from .scalar import ONE, ZERO, Scalar, as_scalar

EMPTY = ()


def _strip(m: tuple) -> tuple:
    n = len(m)
    while n and not m[n - 1]:
        n -= 1
    return m[:n]


def mono_mul(a: tuple, b: tuple) -> tuple:
    la, lb = len(a), len(b)
    if not lb:
        return a
    if not la:
        return b
    if la == lb:
        return tuple(map(add, a, b))
    if la > lb:
        return tuple(map(add, a, b)) + a[lb:]
    return tuple(map(add, a, b)) + b[la:]


def mono_div(a: tuple, b: tuple):
    """a / b, or None if b does not divide a."""
    if len(b) > len(a):
        return None
    out = list(a)
    for k, e in enumerate(b):
        d = out[k] - e
        if d < 0:
            return None
        out[k] = d
    return _strip(tuple(out))


def mono_var(i: int, e: int = 1) -> tuple:
    return (0,) * i + (e,) if e else EMPTY


def mono_gcd(a: tuple, b: tuple) -> tuple:
    return _strip(tuple(map(min, a, b)))


def canon_key(m: tuple, order) -> tuple:
    n = len(m)
    return tuple(m[i] if i < n else 0 for i in order)


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    # -- construction -------------------------------------------------------
    @staticmethod
    def const(c) -> "Poly":
        c = as_scalar(c)
        return Poly({EMPTY: c}) if c else Poly()

    @staticmethod
    def var(i: int) -> "Poly":
        return Poly({mono_var(i): ONE})

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        t = self.terms
        return not t or (len(t) == 1 and EMPTY in t)

    def const_value(self) -> Scalar:
        return self.terms.get(EMPTY, ZERO) if self.is_const() else None

    def is_one(self) -> bool:
        t = self.terms
        return len(t) == 1 and EMPTY in t and t[EMPTY].is_one()

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = -c
            else:
                v = v - c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out)

    def scale(self, c: Scalar) -> "Poly":
        if not c:
            return Poly()
        if c.is_one():
            return self
        return Poly({m: v * c for m, v in self.terms.items()})

    def mul_term(self, mono: tuple, c: Scalar) -> "Poly":
        if not c:
            return Poly()
        return Poly({mono_mul(m, mono): v * c for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.terms, other.terms
        if not a or not b:
            return Poly()
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (m2, c2), = b.items()
            if not m2:
                return Poly({m: c * c2 for m, c in a.items()}) if not c2.is_one() else Poly(dict(a))
            return Poly({mono_mul(m, m2): c * c2 for m, c in a.items()})
        out = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = mono_mul(m1, m2)
                v = get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return Poly({m: c for m, c in out.items() if c})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(ONE)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj_coeffs(self) -> "Poly":
        return Poly({m: c.conjugate() for m, c in self.terms.items()})

    # -- structure ----------------------------------------------------------
    def variables(self) -> set:
        vs = set()
        for m in self.terms:
            for k, e in enumerate(m):
                if e:
                    vs.add(k)
        return vs

    def degree_in(self, i: int) -> int:
        return max((m[i] if i < len(m) else 0) for m in self.terms) if self.terms else -1

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def coeffs_in(self, i: int) -> dict:
        """Coefficients as a polynomial in atom ``i``: {power: Poly free of i}."""
        out: dict = {}
        for m, c in self.terms.items():
            if i < len(m) and m[i]:
                k = m[i]
                rest = list(m)
                rest[i] = 0
                rest = _strip(tuple(rest))
            else:
                k, rest = 0, m
            out.setdefault(k, {})[rest] = c
        return {k: Poly(t) for k, t in out.items()}

    def split_vars(self, vs: set) -> dict:
        """Group terms by their exponents on ``vs``: {sub-monomial: Poly free of vs}."""
        out: dict = {}
        for m, c in self.terms.items():
            key = tuple((k, m[k]) for k in sorted(vs) if k < len(m) and m[k])
            rest = list(m)
            for k in vs:
                if k < len(rest):
                    rest[k] = 0
            out.setdefault(key, {})[_strip(tuple(rest))] = c
        return {k: Poly(t) for k, t in out.items()}

    def min_monomial(self) -> tuple:
        it = iter(self.terms)
        g = next(it)
        for m in it:
            g = mono_gcd(g, m)
            if not g:
                break
        return g

    def div_monomial(self, mono: tuple) -> "Poly":
        if not mono:
            return self
        return Poly({mono_div(m, mono): c for m, c in self.terms.items()})

    def leading(self):
        m = max(self.terms)
        return m, self.terms[m]

    def canonical_leading(self):
        order = TABLE.canonical_order()
        m = max(self.terms, key=lambda t: canon_key(t, order))
        return m, self.terms[m]

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        _, c = self.leading()
        return self.scale(c.inverse())

    def derivative(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            if i < len(m) and m[i]:
                e = m[i]
                nm = list(m)
                nm[i] = e - 1
                out[_strip(tuple(nm))] = c * e
        return Poly({m: c for m, c in out.items() if c})

    # -- division -----------------------------------------------------------
    def exact_div(self, other: "Poly") -> "Poly":
        q = self.try_div(other)
        if q is None:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def try_div(self, other: "Poly"):
        if not other.terms:
            raise ZeroDivisionError("division by zero polynomial")
        if len(other.terms) == 1:
            (m2, c2), = other.terms.items()
            inv = c2.inverse()
            out = {}
            for m, c in self.terms.items():
                q = mono_div(m, m2)
                if q is None:
                    return None
                out[q] = c * inv
            return Poly(out)
        lm, lc = other.leading()
        inv = lc.inverse()
        rem = dict(self.terms)
        quot = {}
        rest = [(m, c) for m, c in other.terms.items() if m != lm]
        while rem:
            m = max(rem)
            c = rem[m]
            qm = mono_div(m, lm)
            if qm is None:
                return None
            qc = c * inv
            quot[qm] = qc
            del rem[m]
            for m2, c2 in rest:
                t = mono_mul(m2, qm)
                v = rem.get(t)
                if v is None:
                    rem[t] = -(c2 * qc)
                else:
                    v = v - c2 * qc
                    if v:
                        rem[t] = v
                    else:
                        del rem[t]
        return Poly(quot)

    # -- misc ---------------------------------------------------------------
    def eval_mod(self, values: dict, p: int, ival: int):
        """Evaluate modulo p with I -> ival; ``values`` maps atom id -> int."""
        total = 0
        for m, c in self.terms.items():
            cr = _mod_q(c.re, p)
            ci = _mod_q(c.im, p)
            if cr is None or ci is None:
                return None
            t = (cr + ci * ival) % p
            for k, e in enumerate(m):
                if e:
                    t = t * pow(values[k], e, p) % p
            total = (total + t) % p
        return total

    def __repr__(self):
        return f"Poly({self.terms!r})"


def _mod_q(q, p):
    d = int(q.denominator) % p
    if d == 0:
        return None
    return int(q.numerator) * pow(d, -1, p) % p


# -- gcd ------------------------------------------------------------------------

_P = 1000000009  # prime, p % 4 == 1
_I_MOD = None


def _i_mod():
    global _I_MOD
    if _I_MOD is None:
        for c in range(2, 200):
            r = pow(c, (_P - 1) // 4, _P)
            if r * r % _P == _P - 1:
                _I_MOD = r
                break
    return _I_MOD


def _univariate_mod(poly: Poly, var: int, values: dict, p: int, ival: int):
    coeffs = poly.coeffs_in(var)
    deg = max(coeffs)
    out = [0] * (deg + 1)
    for k, c in coeffs.items():
        v = c.eval_mod(values, p, ival)
        if v is None:
            return None
        out[k] = v
    return out


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _gcd_mod_degree(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b):
            f = a[-1] * inv % p
            s = len(a) - len(b)
            for k, c in enumerate(b):
                a[s + k] = (a[s + k] - f * c) % p
            _trim(a)
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def _coprime_modular(f: Poly, g: Poly, vs: set, rng: random.Random) -> bool:
    """Sound test: True only if gcd(f, g) is certainly a constant."""
    ival = _i_mod()
    p = _P
    for x in vs:
        values = {k: rng.randrange(1, p) for k in vs}
        fu = _univariate_mod(f, x, values, p, ival)
        gu = _univariate_mod(g, x, values, p, ival)
        if fu is None or gu is None:
            return False
        # images must keep their x-degree, otherwise the test proves nothing
        if not fu or fu[-1] == 0 or f.degree_in(x) != len(fu) - 1:
            return False
        if _gcd_mod_degree(fu, gu, p) != 0:
            return False
    return True


_RNG = random.Random(20240517)


def gcd(f: Poly, g: Poly) -> Poly:
    """Monic (under the internal lex order) gcd over Q(i)."""
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if f.is_const() or g.is_const():
        return Poly.const(ONE)
    mf, mg = f.min_monomial(), g.min_monomial()
    m = mono_gcd(mf, mg)
    if mf:
        f = f.div_monomial(mf)
    if mg:
        g = g.div_monomial(mg)
    h = _gcd_nomono(f, g)
    if m:
        h = h.mul_term(m, ONE)
    return h


def _content_over(f: Poly, vs: set, g: Poly) -> Poly:
    """gcd(f, g) where g is free of the variables ``vs``."""
    h = g
    parts = sorted(f.split_vars(vs).values(), key=len)
    for c in parts:
        h = gcd(h, c)
        if h.is_const():
            return h
    return h


def _gcd_nomono(f: Poly, g: Poly) -> Poly:
    if f.is_const() or g.is_const():
        return Poly.const(ONE)
    if len(f) == 1 or len(g) == 1:
        # a monomial content has been removed already
        return Poly.const(ONE)
    vf, vg = f.variables(), g.variables()
    if vf != vg:
        extra_f = vf - vg
        if extra_f:
            g2 = _content_over(f, extra_f, g)
            if g2.is_const():
                return Poly.const(ONE)
            return gcd(g2, g)
        extra_g = vg - vf
        g2 = _content_over(g, extra_g, f)
        if g2.is_const():
            return Poly.const(ONE)
        return gcd(g2, f)
    if f == g:
        return f.monic()
    if len(vf) == 1:
        (x,) = vf
        return _gcd_univariate(f, g, x)
    q = f.try_div(g) if len(g) <= len(f) else None
    if q is not None:
        return g.monic()
    q = g.try_div(f) if len(f) <= len(g) else None
    if q is not None:
        return f.monic()
    if _coprime_modular(f, g, vf, _RNG):
        return Poly.const(ONE)
    return _gcd_recursive(f, g, vf)


def _gcd_univariate(f: Poly, g: Poly, x: int) -> Poly:
    a = f.monic()
    b = g.monic()
    if a.degree_in(x) < b.degree_in(x):
        a, b = b, a
    while not b.is_zero():
        r = _rem_univariate(a, b, x)
        a, b = b, r.monic()
    return a.monic()


def _rem_univariate(a: Poly, b: Poly, x: int) -> Poly:
    db = b.degree_in(x)
    bc = b.coeffs_in(x)
    lcb = bc[db].const_value().inverse()
    r = a
    while not r.is_zero():
        dr = r.degree_in(x)
        if dr < db:
            break
        lcr = r.coeffs_in(x)[dr].const_value()
        r = r - b.mul_term(mono_var(x, dr - db), lcr * lcb)
    return r


def _content(coeffs: list) -> Poly:
    coeffs = sorted(coeffs, key=len)
    h = coeffs[0]
    for c in coeffs[1:]:
        if h.is_const():
            break
        h = gcd(h, c)
    return h


def _gcd_recursive(f: Poly, g: Poly, vs: set) -> Poly:
    x = min(vs, key=lambda k: (max(f.degree_in(k), g.degree_in(k)), k))
    F = f.coeffs_in(x)
    G = g.coeffs_in(x)
    cf = _content(list(F.values()))
    cg = _content(list(G.values()))
    c = gcd(cf, cg)
    if not cf.is_const():
        f = f.exact_div(cf)
    if not cg.is_const():
        g = g.exact_div(cg)
    a, b = f, g
    if a.degree_in(x) < b.degree_in(x):
        a, b = b, a
    while True:
        r = _prem(a, b, x)
        if r.is_zero():
            break
        if r.degree_in(x) == 0:
            b = Poly.const(ONE)
            break
        cr = _content(list(r.coeffs_in(x).values()))
        if not cr.is_const():
            r = r.exact_div(cr)
        else:
            r = r.monic()
        a, b = b, r
    if b.degree_in(x) > 0:
        cb = _content(list(b.coeffs_in(x).values()))
        if not cb.is_const():
            b = b.exact_div(cb)
    else:
        b = Poly.const(ONE)
    return (b * c).monic()


def _prem(a: Poly, b: Poly, x: int) -> Poly:
    db = b.degree_in(x)
    bc = b.coeffs_in(x)
    lcb = bc[db]
    r = a
    while not r.is_zero():
        dr = r.degree_in(x)
        if dr < db:
            break
        lcr = r.coeffs_in(x)[dr]
        r = r * lcb - (b * lcr).mul_term(mono_var(x, dr - db), ONE)
    return r
