"""Random-point numeric oracle.

Operator claims are checked without the symbolic normal-ordering code: a
recipe is evaluated on truncated Taylor jets at each sample point.  Applying
the operator ``R`` from the left to the constant-term row gives
``c_beta * beta!`` for every coefficient of ``R = sum c_beta d^beta``, so all
coefficients of ``lhs - rhs`` are read off one row per point.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..diffop import CARTESIAN_CHART, DiffOperator, OpAtom, OpExpr, OpMom, OpMul, OpProd, OpSum
from ..kernel.atoms import CARTESIAN, HBAR, Symbol
from ..kernel.expr import (
    Expr, Func, IntPower, Num, Product, Sum, Sym, UFunc, add, as_expr, diff, eval_numeric, mul, power, to_expr,
)
from ..kernel.expr import DivisionByZero
from ..kernel.scalar import Scalar
from ._kernels import PairTable

POLE_GUARD = 1e-3
MAX_REJECTIONS = 200
COORD_RANGE = 2.0


class SamplingExhausted(RuntimeError):
    """Too many candidate points fell near a pole."""


@dataclass
class NumericResult:
    max_residual: float
    samples: int
    seed: int
    witness: dict = field(default_factory=dict)

    def below(self, tol: float) -> bool:
        return self.max_residual < tol


# -- jet spaces ------------------------------------------------------------------------

class JetSpace:
    """Taylor coefficients in ``x - x0`` over the monomials of degree <= order."""

    def __init__(self, order: int, nvars: int = 3):
        self.order = order
        self.nvars = nvars
        monos = [m for d in range(order + 1) for m in _monomials(nvars, d)]
        self.monos = monos
        self.index = {m: k for k, m in enumerate(monos)}
        self.m = len(monos)
        I, J, K = [], [], []
        for a, ma in enumerate(monos):
            for b, mb in enumerate(monos):
                mc = tuple(x + y for x, y in zip(ma, mb))
                if sum(mc) <= order:
                    I.append(a)
                    J.append(b)
                    K.append(self.index[mc])
        self.pairs = PairTable(I, J, K, self.m)
        self.factorial = np.array([math.prod(math.factorial(e) for e in mm) for mm in monos], dtype=float)
        # row-vector derivative maps: (v d_j)[m + e_j] = v[m] * (m_j + 1)
        self.dsrc, self.ddst, self.dfac = [], [], []
        for j in range(nvars):
            src, dst, fac = [], [], []
            for k, mm in enumerate(monos):
                up = list(mm)
                up[j] += 1
                up = tuple(up)
                if up in self.index:
                    src.append(k)
                    dst.append(self.index[up])
                    fac.append(mm[j] + 1)
            self.dsrc.append(np.array(src, dtype=np.int64))
            self.ddst.append(np.array(dst, dtype=np.int64))
            self.dfac.append(np.array(fac, dtype=float))

    def const(self, values, n):
        out = np.zeros((n, self.m), dtype=np.complex128)
        out[:, 0] = values
        return out

    def variable(self, j, x0):
        out = self.const(x0, len(x0))
        if self.order >= 1:
            e = [0] * self.nvars
            e[j] = 1
            out[:, self.index[tuple(e)]] = 1.0
        return out

    def mul(self, a, b):
        return self.pairs.mul(a, b)

    def row_derivative(self, v, j):
        out = np.zeros_like(v)
        out[:, self.ddst[j]] = v[:, self.dsrc[j]] * self.dfac[j]
        return out

    def powers(self, h):
        out = [self.const(1.0, h.shape[0]), h]
        for _ in range(2, self.order + 1):
            out.append(self.mul(out[-1], h))
        return out


def _monomials(nvars, degree):
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _monomials(nvars - 1, degree - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def jet_space(order: int, nvars: int = 3) -> JetSpace:
    return JetSpace(order, nvars)


# -- concrete stand-ins for uninterpreted functions ------------------------------------

def ufunc_models(exprs, rng) -> dict:
    """Random concrete functions for every uninterpreted function name."""
    from ..kernel.expr import ufuncs
    seen = {}
    for e in exprs:
        for f in sorted(ufuncs(e), key=lambda f: (f.name, tuple(a.name for a in f.args))):
            if f.name not in seen:
                seen[f.name] = (f.args, f.reality)
    models = {}
    for name in sorted(seen):
        args, reality = seen[name]
        models[name] = _model_expr(args, reality, rng)
    return models


def _model_expr(args, reality, rng):
    def coef():
        re = rng.uniform(-1.0, 1.0)
        im = 0.0 if reality == "real" else rng.uniform(-1.0, 1.0)
        return Num(Scalar(_rational(re), _rational(im)))

    terms = [coef()]
    lin = add(*[mul(coef(), Sym(a)) for a in args])
    terms.append(mul(coef(), Func("exp", mul(as_expr(_rational(0.5)), lin))))
    for a in args:
        terms.append(mul(coef(), power(Sym(a), 2)))
        terms.append(mul(coef(), power(add(Sym(a), as_expr(3)), -1)))
    return add(*terms)


def _rational(x: float):
    from fractions import Fraction
    return Fraction(x).limit_denominator(1000)


def concretize(e: Expr, models: dict) -> Expr:
    """Replace uninterpreted functions by their models, differentiating as indexed."""
    memo = {}

    def go(x):
        r = memo.get(x)
        if r is not None:
            return r
        if isinstance(x, UFunc):
            r = models[x.name]
            for v, k in zip(x.args, x.deriv):
                for _ in range(k):
                    r = diff(r, v)
        elif isinstance(x, Sum):
            r = add(*[go(t) for t in x.terms])
        elif isinstance(x, Product):
            r = mul(*[go(t) for t in x.factors])
        elif isinstance(x, IntPower):
            r = power(go(x.base), x.exp)
        elif isinstance(x, Func):
            r = Func(x.name, go(x.arg))
        else:
            r = x
        memo[x] = r
        return r

    return go(e)


def _concretize_op(x, models):
    if isinstance(x, DiffOperator):
        return {a: concretize(to_expr(c), models) for a, c in x.terms.items()}
    if not models:
        return x
    if isinstance(x, OpMul):
        return OpMul(concretize(x.coeff, models))
    if isinstance(x, OpMom):
        return x
    if isinstance(x, OpAtom):
        return OpAtom(x.name, _concretize_op(x.recipe, models))
    items = [_concretize_op(it, models) for it in x.items]
    return OpSum(items) if isinstance(x, OpSum) else OpProd(items)


# -- parameter values and sampling -----------------------------------------------------

def parameter_values(symbols, rng, fixed: dict | None = None) -> dict:
    """Random values: complex parameters complex, ``name_bar`` the conjugate of ``name``."""
    fixed = fixed or {}
    out = {}
    syms = sorted((s for s in symbols if s.kind in ("parameter", "hbar")), key=lambda s: (s.name.endswith("_bar"), s.name))
    for s in syms:
        if s.name in fixed:
            out[s] = complex(fixed[s.name])
            continue
        if s.kind == "hbar":
            out[s] = complex(rng.uniform(0.5, 1.5))
        elif s.reality == "real":
            out[s] = complex(rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0)))
        elif s.name.endswith("_bar"):
            base = Symbol(s.name[:-4], s.kind, s.reality)
            out[s] = out[base].conjugate() if base in out else complex(rng.uniform(0.5, 1.5))
        else:
            out[s] = complex(cmath.rect(rng.uniform(0.5, 1.5), rng.uniform(0.0, 2 * math.pi)))
    return out


def _denominators(exprs) -> list:
    """``(base, power)`` for every reciprocal power and logarithm argument."""
    found = {}

    def go(x):
        if isinstance(x, IntPower):
            if x.exp < 0:
                found[x.base] = max(found.get(x.base, 0), -x.exp)
            go(x.base)
        elif isinstance(x, Sum):
            for t in x.terms:
                go(t)
        elif isinstance(x, Product):
            for t in x.factors:
                go(t)
        elif isinstance(x, Func):
            if x.name == "ln":
                found[x.arg] = max(found.get(x.arg, 0), 1)
            go(x.arg)

    for e in exprs:
        go(e)
    return sorted(found.items(), key=lambda kv: repr(kv[0]))


def sample_points(exprs, n: int, rng, params: dict) -> np.ndarray:
    """``n`` real coordinate points with every denominator above the pole guard."""
    dens = _denominators(exprs)
    pts = []
    rejected = 0
    while len(pts) < n:
        x = rng.uniform(-COORD_RANGE, COORD_RANGE, size=3)
        if _admissible(x, dens, params):
            pts.append(x)
        else:
            rejected += 1
            if rejected > MAX_REJECTIONS + 10 * n:
                raise SamplingExhausted(f"pole avoidance rejected {rejected} candidate points")
    return np.array(pts)


def _admissible(x, dens, params) -> bool:
    point = dict(params)
    point.update({c: x[k] for k, c in enumerate(CARTESIAN)})
    return _admissible_point(point, dens)


# -- jet evaluation --------------------------------------------------------------------

class _Evaluator:
    def __init__(self, space: JetSpace, pts: np.ndarray, params: dict, variables=CARTESIAN):
        self.S = space
        self.pts = pts
        self.n = len(pts)
        self.params = params
        self.variables = tuple(variables)
        self.memo = {}

    def jet(self, e: Expr):
        r = self.memo.get(e)
        if r is not None:
            return r
        S, n = self.S, self.n
        if isinstance(e, Num):
            r = S.const(complex(e.value), n)
        elif isinstance(e, Sym):
            s = e.symbol
            if s in self.variables:
                j = self.variables.index(s)
                r = S.variable(j, self.pts[:, j])
            elif s in self.params:
                r = S.const(self.params[s], n)
            else:
                raise ValueError(f"no numeric value for {s.name}")
        elif isinstance(e, Sum):
            r = sum((self.jet(t) for t in e.terms[1:]), self.jet(e.terms[0]))
        elif isinstance(e, Product):
            r = self.jet(e.factors[0])
            for t in e.factors[1:]:
                r = S.mul(r, self.jet(t))
        elif isinstance(e, IntPower):
            b = self.jet(e.base)
            if e.exp < 0:
                b = self._series(b, "recip")
            r = self._pow(b, abs(e.exp))
        elif isinstance(e, Func):
            r = self._series(self.jet(e.arg), e.name)
        else:
            raise ValueError(f"cannot evaluate {type(e).__name__} on jets")
        self.memo[e] = r
        return r

    def _pow(self, b, k):
        out = None
        base = b
        while k:
            if k & 1:
                out = base if out is None else self.S.mul(out, base)
            k >>= 1
            if k:
                base = self.S.mul(base, base)
        return out if out is not None else self.S.const(1.0, self.n)

    def _series(self, g, kind):
        a0 = g[:, 0].copy()
        h = g.copy()
        h[:, 0] = 0
        hp = self.S.powers(h)
        N = self.S.order
        if kind == "recip":
            coeffs = [(-1) ** k / a0 ** (k + 1) for k in range(N + 1)]
        elif kind == "exp":
            e0 = np.exp(a0)
            coeffs = [e0 / math.factorial(k) for k in range(N + 1)]
        elif kind == "ln":
            coeffs = [np.log(a0)] + [(-1) ** (k + 1) / (k * a0 ** k) for k in range(1, N + 1)]
        elif kind in ("sin", "cos"):
            s0, c0 = np.sin(a0), np.cos(a0)
            coeffs = []
            for k in range(N + 1):
                # k-th derivative of sin / cos at a0 over k!
                if kind == "sin":
                    d = (s0, c0, -s0, -c0)[k % 4]
                else:
                    d = (c0, -s0, -c0, s0)[k % 4]
                coeffs.append(d / math.factorial(k))
        else:
            raise ValueError(kind)
        out = np.zeros_like(g)
        for k in range(N + 1):
            out += coeffs[k][:, None] * hp[k] if np.ndim(coeffs[k]) else coeffs[k] * hp[k]
        return out

    # operators act on row vectors from the right: v -> v * X
    def row(self, v, x):
        if isinstance(x, OpMul):
            return self.S.pairs.left(v, self.jet(x.coeff))
        if isinstance(x, OpMom):
            if x.chart != CARTESIAN_CHART:
                raise ValueError("the numeric oracle works in the Cartesian chart")
            return (-1j * self.params[HBAR]) * self.S.row_derivative(v, x.index)
        if isinstance(x, OpAtom):
            return self.row(v, x.recipe)
        if isinstance(x, OpSum):
            out = None
            for it in x.items:
                t = self.row(v, it)
                out = t if out is None else out + t
            return out
        if isinstance(x, OpProd):
            for it in x.items:
                v = self.row(v, it)
            return v
        if isinstance(x, dict):  # concretized normal-ordered operator
            out = np.zeros_like(v)
            for alpha, c in x.items():
                t = self.S.pairs.left(v, self.jet(c))
                for j in range(3):
                    for _ in range(alpha[j]):
                        t = self.S.row_derivative(t, j)
                out += t
            return out
        raise TypeError(type(x).__name__)


def derivative_count(x) -> int:
    if isinstance(x, OpMul):
        return 0
    if isinstance(x, OpMom):
        return 1
    if isinstance(x, OpAtom):
        return derivative_count(x.recipe)
    if isinstance(x, OpSum):
        return max(derivative_count(it) for it in x.items)
    if isinstance(x, OpProd):
        return sum(derivative_count(it) for it in x.items)
    if isinstance(x, (DiffOperator, dict)):
        return max((sum(a) for a in (x.terms if isinstance(x, DiffOperator) else x)), default=0)
    raise TypeError(type(x).__name__)


def _op_exprs(x, out):
    if isinstance(x, OpMul):
        out.append(x.coeff)
    elif isinstance(x, OpAtom):
        _op_exprs(x.recipe, out)
    elif isinstance(x, (OpSum, OpProd)):
        for it in x.items:
            _op_exprs(it, out)
    elif isinstance(x, DiffOperator):
        out.extend(to_expr(c) for c in x.terms.values())
    elif isinstance(x, dict):
        out.extend(x.values())
    return out


def _symbols_of(exprs):
    from ..kernel.expr import free_symbols
    out = set()
    for e in exprs:
        out |= free_symbols(e)
    return out


def _setup(objs, n, seed, fixed):
    rng = np.random.default_rng(seed)
    exprs = []
    for o in objs:
        if isinstance(o, Expr):
            exprs.append(o)
        else:
            _op_exprs(o, exprs)
    models = ufunc_models(exprs, rng)
    if models:
        exprs = [concretize(e, models) for e in exprs]
    syms = _symbols_of(exprs) | {HBAR}
    params = parameter_values(syms, rng, fixed)
    pts = sample_points(exprs, n, rng, params)
    return rng, models, params, pts


def _witness(pts, k, params):
    w = {c.name: round(float(pts[k, j]), 6) for j, c in enumerate(CARTESIAN)}
    for s, v in sorted(params.items(), key=lambda kv: kv[0].name):
        w[s.name] = [round(v.real, 6), round(v.imag, 6)]
    return w


def operator_claim(lhs, rhs, n: int = 100, seed: int = 0, fixed: dict | None = None,
                   chunk: int = 25) -> NumericResult:
    """Max relative residual of ``lhs - rhs`` over all coefficients at ``n`` points.

    ``lhs`` and ``rhs`` are recipes or normal-ordered Cartesian operators.
    Each point's residual is scaled by ``max(1, |lhs|, |rhs|)``, where a sum is
    measured by its largest summand so that cancellations are judged against the
    size of the cancelling terms.
    """
    rng, models, params, pts = _setup([lhs, rhs], n, seed, fixed)
    lhs_c = _concretize_op(lhs, models) if models or isinstance(lhs, DiffOperator) else lhs
    rhs_c = _concretize_op(rhs, models) if models or isinstance(rhs, DiffOperator) else rhs
    order = max(derivative_count(lhs_c), derivative_count(rhs_c))
    S = jet_space(order)
    worst, where = 0.0, 0
    for s0 in range(0, n, chunk):
        block = pts[s0:s0 + chunk]
        ev = _Evaluator(S, block, params)
        e0 = S.const(1.0, len(block))
        L, sl = _row_and_size(ev, e0, lhs_c)
        R, sr = _row_and_size(ev, e0, rhs_c)
        scale = np.maximum(1.0, np.maximum(sl, sr))
        rel = np.abs(L - R).max(axis=1) / scale
        k = int(np.argmax(rel))
        if rel[k] > worst or s0 == 0:
            worst, where = float(rel[k]), s0 + k
    return NumericResult(worst, n, seed, _witness(pts, where, params))


def _row_and_size(ev, e0, x):
    """Coefficient row of ``x`` and its per-point magnitude."""
    S = ev.S
    if isinstance(x, OpSum):
        parts = [ev.row(e0, it) / S.factorial for it in x.items]
        size = np.max([np.abs(p).max(axis=1) for p in parts], axis=0)
        return sum(parts[1:], parts[0]), size
    row = ev.row(e0, x) / S.factorial
    return row, np.abs(row).max(axis=1)


def apply_to_function(op, f: Expr, pts: np.ndarray, params: dict, models: dict | None = None):
    """Values of ``(op f)(x)`` and ``f(x)`` at the points via jets."""
    models = models or {}
    op_c = _concretize_op(op, models) if models or isinstance(op, DiffOperator) else op
    S = jet_space(derivative_count(op_c))
    ev = _Evaluator(S, pts, params)
    row = ev.row(S.const(1.0, len(pts)), op_c)
    fj = ev.jet(concretize(f, models) if models else f)
    return (row * fj).sum(axis=1), fj[:, 0]


def eigen_claim(op, psi: Expr, energy: Expr, n: int = 100, seed: int = 0,
                fixed: dict | None = None) -> NumericResult:
    """Max of ``|(op psi)/psi - E|`` scaled by ``max(1, |E|)``."""
    rng, models, params, pts = _setup([op, psi, energy], n, seed, fixed)
    hv, pv = apply_to_function(op, psi, pts, params, models)
    ev = np.array([eval_numeric(concretize(energy, models), {**params, **{c: p[j] for j, c in enumerate(CARTESIAN)}})
                   for p in pts])
    rel = np.abs(hv / pv - ev) / np.maximum(1.0, np.abs(ev))
    k = int(np.argmax(rel))
    return NumericResult(float(rel[k]), n, seed, _witness(pts, k, params))


def expr_claim(lhs: Expr, rhs: Expr, n: int = 100, seed: int = 0, fixed: dict | None = None,
               extra_symbols=()) -> NumericResult:
    """Max relative difference of two expressions at random points.

    Momentum symbols in phase-space expressions are sampled like coordinates.
    """
    rng = np.random.default_rng(seed)
    exprs = [as_expr(lhs), as_expr(rhs)]
    models = ufunc_models(exprs, rng)
    if models:
        exprs = [concretize(e, models) for e in exprs]
    syms = _symbols_of(exprs) | {HBAR} | set(extra_symbols)
    params = parameter_values(syms, rng, fixed)
    moms = sorted((s for s in syms if s.kind == "momentum"), key=lambda s: s.name)
    dens = _denominators(exprs)
    worst, wpoint = 0.0, {}
    got, rejected = 0, 0
    while got < n:
        point = dict(params)
        x = rng.uniform(-COORD_RANGE, COORD_RANGE, size=3 + len(moms))
        point.update({c: x[j] for j, c in enumerate(CARTESIAN)})
        point.update({p: x[3 + j] for j, p in enumerate(moms)})
        if not _admissible_point(point, dens):
            rejected += 1
            if rejected > MAX_REJECTIONS + 10 * n:
                raise SamplingExhausted(f"pole avoidance rejected {rejected} candidate points")
            continue
        a = eval_numeric(exprs[0], point)
        b = eval_numeric(exprs[1], point)
        rel = abs(a - b) / max(1.0, abs(a), abs(b))
        if rel > worst or not wpoint:
            worst = rel
            wpoint = {s.name: (round(complex(v).real, 6) if complex(v).imag == 0 else
                               [round(complex(v).real, 6), round(complex(v).imag, 6)])
                      for s, v in sorted(point.items(), key=lambda kv: kv[0].name)}
        got += 1
    return NumericResult(float(worst), n, seed, wpoint)


def _admissible_point(point, dens) -> bool:
    """Every denominator ``|base|^power`` must exceed the pole guard."""
    for base, k in dens:
        try:
            v = eval_numeric(base, point)
        except (DivisionByZero, ValueError, OverflowError):
            return False
        if not cmath.isfinite(v) or not abs(v) ** k > POLE_GUARD:
            return False
    return True


def poisson_claim(f: Expr, g: Expr, n: int = 100, seed: int = 0, fixed: dict | None = None) -> NumericResult:
    """Max relative size of the Poisson bracket ``{f, g}`` at random phase-space points.

    Gradients come from first-order jets in ``(x1, x2, x3, p1, p2, p3)``, and
    each bracket is scaled by ``max(1, sum |df/dx dg/dp| + |df/dp dg/dx|)``.
    """
    from ..kernel.atoms import MOMENTA
    rng = np.random.default_rng(seed)
    exprs = [as_expr(f), as_expr(g)]
    models = ufunc_models(exprs, rng)
    if models:
        exprs = [concretize(e, models) for e in exprs]
    params = parameter_values(_symbols_of(exprs) | {HBAR}, rng, fixed)
    variables = CARTESIAN + MOMENTA
    dens = _denominators(exprs)
    pts = []
    rejected = 0
    while len(pts) < n:
        x = rng.uniform(-COORD_RANGE, COORD_RANGE, size=6)
        if _admissible_point({**params, **dict(zip(variables, x))}, dens):
            pts.append(x)
        else:
            rejected += 1
            if rejected > MAX_REJECTIONS + 10 * n:
                raise SamplingExhausted(f"pole avoidance rejected {rejected} candidate points")
    pts = np.array(pts)
    S = jet_space(1, 6)
    ev = _Evaluator(S, pts, params, variables)
    fj, gj = ev.jet(exprs[0]), ev.jet(exprs[1])
    grad = [S.index[tuple(1 if k == j else 0 for k in range(6))] for j in range(6)]
    br = np.zeros(len(pts), dtype=np.complex128)
    size = np.zeros(len(pts))
    for j in range(3):
        a = fj[:, grad[j]] * gj[:, grad[3 + j]]
        b = fj[:, grad[3 + j]] * gj[:, grad[j]]
        br += a - b
        size += np.abs(a) + np.abs(b)
    rel = np.abs(br) / np.maximum(1.0, size)
    k = int(np.argmax(rel))
    w = {v.name: round(float(pts[k, j]), 6) for j, v in enumerate(variables)}
    for s_, v in sorted(params.items(), key=lambda kv: kv[0].name):
        w[s_.name] = [round(v.real, 6), round(v.imag, 6)]
    return NumericResult(float(rel[k]), n, seed, w)


def coefficient_values(D: DiffOperator, n: int = 100, seed: int = 0, fixed: dict | None = None) -> NumericResult:
    """Max absolute value of every coefficient of ``D`` at random points."""
    exprs = [to_expr(c) for _, c in D.sorted_terms()]
    if not exprs:
        return NumericResult(0.0, n, seed, {})
    rng, models, params, pts = _setup(exprs, n, seed, fixed)
    exprs = [concretize(e, models) for e in exprs] if models else exprs
    worst, where = 0.0, 0
    for k, p in enumerate(pts):
        point = {**params, **{c: p[j] for j, c in enumerate(CARTESIAN)}}
        m = max(abs(eval_numeric(e, point)) for e in exprs)
        if m > worst:
            worst, where = m, k
    return NumericResult(float(worst), n, seed, _witness(pts, where, params))


def numeric_oracle(claim, n: int = 100, tol: float = 1e-9, seed: int = 0, fixed: dict | None = None) -> NumericResult:
    """Dispatch on the claim type.

    A ``(lhs, rhs)`` pair of recipes or operators is checked on jets, a
    :class:`DiffOperator` residual by evaluating its coefficients, and an
    :class:`Expr` residual by direct evaluation.
    """
    if isinstance(claim, tuple):
        return operator_claim(claim[0], claim[1], n, seed, fixed)
    if isinstance(claim, DiffOperator):
        return coefficient_values(claim, n, seed, fixed)
    if isinstance(claim, OpExpr):
        return operator_claim(claim, OpMul(0), n, seed, fixed)
    return expr_claim(as_expr(claim), as_expr(0), n, seed, fixed)


__all__ = [
    "NumericResult", "SamplingExhausted", "JetSpace", "jet_space", "operator_claim", "expr_claim",
    "eigen_claim", "poisson_claim", "coefficient_values", "numeric_oracle", "parameter_values", "sample_points",
    "concretize", "ufunc_models", "apply_to_function", "derivative_count", "POLE_GUARD",
]

