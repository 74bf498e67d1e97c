"""Text grammar for expressions, operators and system-definition files.

Expressions::

    expr   := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
            | expr '^' int | atom
    atom   := integer | identifier | identifier '(' args ')' | '(' expr ')'

``^`` binds tightest and is right-associative; exponents are integers.
``I`` is the imaginary unit, ``hbar`` the reduced Planck constant, and
``u`` stands for ``exp(I*phi)`` (the angle itself never appears).
``diff(e, x, n, ...)`` differentiates, which is also how derivatives of
uninterpreted functions are written.

Operator strings may also use momenta ``p1 p2 p3`` (``pr pphi pZ`` in the
cylindrical chart), magnetic momenta ``pA1 pA2 pA3`` (``pAr pAphi pAZ``),
angular momenta ``L1 L2 L3`` / ``LA1 LA2 LA3`` and the combinators
``comm(a, b)``, ``acomm(a, b)`` and ``sym(a, b) = (a b + b a)/2``.
Products are compositions, read right to left.
"""
from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

from .diffop import (
    CARTESIAN_CHART, CYLINDRICAL_CHART, OpAtom, OpExpr, OpMom, OpMul, OpProd, OpSum, acomm,
    as_op, comm, op_prod, op_scale, op_sum, sym,
)
from .kernel.atoms import HBAR, PHI, R, U, X1, X2, X3, Z, parameter
from .kernel.expr import (
    Expr, Func, IntPower, Num, Product, Sum, Sym, UFunc, as_expr, diff, power,
)
from .kernel.expr import I as I_E
from .kernel.scalar import Scalar


# -- diagnostics ---------------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0

    def __str__(self):
        return f"line {self.line}, col {self.column}"


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class ExprSyntaxError(ParseError):
    """Malformed input text."""


class UnknownIdentifier(ParseError):
    def __init__(self, name: str, span: SourceSpan | None, suggestions: list):
        self.name = name
        self.suggestions = suggestions
        hint = f" (did you mean: {', '.join(suggestions)})" if suggestions else ""
        super().__init__(f"unknown identifier '{name}'{hint}", span)


@dataclass(frozen=True)
class Diagnostic:
    span: SourceSpan
    message: str

    def __str__(self):
        return f"{self.span}: {self.message}"


class SystemFileError(ParseError):
    def __init__(self, diagnostics: list):
        self.diagnostics = list(diagnostics)
        ValueError.__init__(self, "\n".join(str(d) for d in self.diagnostics))
        self.message = str(self)
        self.span = self.diagnostics[0].span if self.diagnostics else None


# -- tokens --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(==|[-+*/^(),=]))")


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, eof
    text: str
    pos: int


def tokenize(text: str, line: int = 1, col0: int = 1):
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", SourceSpan(line, col0 + pos, 1))
        start = m.start(m.lastindex)
        kind = {1: "num", 2: "ident", 3: "op"}[m.lastindex]
        tokens.append(Token(kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(Token("eof", "", n))
    return tokens


# -- context -------------------------------------------------------------------

FUNCTIONS = ("exp", "ln", "sin", "cos")
CART_COORDS = {"x1": X1, "x2": X2, "x3": X3}
CYL_COORDS = {"r": R, "u": U, "Z": Z}
RESERVED = {"I", "hbar", "diff", "comm", "acomm", "sym", "phi"} | set(FUNCTIONS)


@dataclass
class Context:
    """Identifier environment for parsing.

    ``strict=False`` declares unknown identifiers on the fly as complex
    parameters, which is convenient for interactive use.
    """

    coordinates: dict = field(default_factory=lambda: {**CART_COORDS, **CYL_COORDS})
    params: dict = field(default_factory=dict)
    ufuncs: dict = field(default_factory=dict)  # name -> (arg symbols, reality)
    operators: bool = False
    chart: object = CARTESIAN_CHART
    vector_potential: tuple | None = None
    named_ops: dict = field(default_factory=dict)
    classical: bool = False
    strict: bool = True

    def known(self):
        names = set(self.coordinates) | set(self.params) | set(self.ufuncs) | set(self.named_ops)
        names |= {"I", "hbar"} | set(FUNCTIONS)
        if self.operators or self.classical:
            names |= set(_momentum_tokens(self.chart))
        return sorted(names)


def _momentum_tokens(chart):
    if chart == CYLINDRICAL_CHART:
        return ["pr", "pphi", "pZ", "pAr", "pAphi", "pAZ"]
    return ["p1", "p2", "p3", "pA1", "pA2", "pA3", "L1", "L2", "L3", "LA1", "LA2", "LA3"]


# -- parser --------------------------------------------------------------------

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25


class _Parser:
    def __init__(self, text: str, ctx: Context, line: int = 1, col0: int = 1):
        self.text = text
        self.ctx = ctx
        self.line = line
        self.col0 = col0
        self.tokens = tokenize(text, line, col0)
        self.i = 0

    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.line, self.col0 + tok.pos, max(len(tok.text), 0))

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind != "op":
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise ExprSyntaxError(f"expected '{text}' but found {what}", self.span(t))
        return t

    def parse(self):
        v = self.expr(0)
        t = self.peek()
        if t.kind != "eof":
            raise ExprSyntaxError(f"unexpected {t.text!r}", self.span(t))
        return v

    def expr(self, rbp: int):
        t = self.next()
        left = self.prefix(t)
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in _INFIX:
                break
            bp = _INFIX[t.text]
            if bp <= rbp:
                break
            self.next()
            if t.text == "^":
                n = self.integer_exponent()
                left = _pow(left, n, self.span(t))
                continue
            right = self.expr(bp)
            left = self.binary(t, left, right)
        return left

    def integer_exponent(self) -> int:
        # right-associative: 2^3^2 is 2^(3^2)
        n = self._integer_atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.next()
            m = self.integer_exponent()
            if m < 0:
                raise ExprSyntaxError("exponents must be integers", self.span(t))
            n = n ** m
        return n

    def _integer_atom(self) -> int:
        t = self.next()
        sign = 1
        if t.kind == "op" and t.text == "-":
            sign = -1
            t = self.next()
        if t.kind == "num":
            return sign * int(t.text)
        if t.kind == "op" and t.text == "(":
            n = self.integer_exponent()
            self.expect(")")
            return sign * n
        raise ExprSyntaxError("exponents must be integer literals", self.span(t))

    def binary(self, tok, a, b):
        op = tok.text
        if op == "+":
            return _add(a, b)
        if op == "-":
            return _add(a, _neg(b))
        if op == "*":
            return _mul(a, b)
        if isinstance(b, OpExpr):
            raise ExprSyntaxError("division by an operator", self.span(tok))
        if isinstance(b, Num) and not b.value:
            raise ExprSyntaxError("division by zero", self.span(tok))
        return _mul(a, power(b, -1))

    def prefix(self, t: Token):
        if t.kind == "num":
            return Num(int(t.text))
        if t.kind == "op":
            if t.text == "(":
                v = self.expr(0)
                self.expect(")")
                return v
            if t.text == "-":
                return _neg(self.expr(_UNARY_BP))
            if t.text == "+":
                return self.expr(_UNARY_BP)
            raise ExprSyntaxError(f"unexpected {t.text!r}", self.span(t))
        if t.kind == "eof":
            raise ExprSyntaxError("unexpected end of input", self.span(t))
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "(":
            return self.call(t)
        return self.identifier(t)

    def args(self):
        self.expect("(")
        out = []
        if self.peek().text == ")":
            self.next()
            return out
        while True:
            start = self.peek()
            out.append((self.expr(0), start))
            t = self.next()
            if t.text == ")":
                return out
            if t.text != ",":
                what = "end of input" if t.kind == "eof" else repr(t.text)
                raise ExprSyntaxError(f"expected ',' or ')' but found {what}", self.span(t))

    def call(self, t: Token):
        name = t.text
        ctx = self.ctx
        if name in FUNCTIONS:
            args = self.args()
            if len(args) != 1:
                raise ExprSyntaxError(f"{name} takes one argument", self.span(t))
            a = args[0][0]
            if isinstance(a, OpExpr):
                raise ExprSyntaxError(f"{name} of an operator", self.span(t))
            return Func(name, a)
        if name in ("comm", "acomm", "sym"):
            if not ctx.operators:
                raise ExprSyntaxError(f"{name} is only allowed in operator strings", self.span(t))
            args = self.args()
            if len(args) != 2:
                raise ExprSyntaxError(f"{name} takes two arguments", self.span(t))
            return {"comm": comm, "acomm": acomm, "sym": sym}[name](args[0][0], args[1][0])
        if name == "diff":
            args = self.args()
            if len(args) < 2:
                raise ExprSyntaxError("diff needs an expression and a variable", self.span(t))
            e = args[0][0]
            if isinstance(e, OpExpr):
                raise ExprSyntaxError("diff of an operator", self.span(t))
            k = 1
            while k < len(args):
                v, vt = args[k]
                if not isinstance(v, Sym):
                    raise ExprSyntaxError("diff variables must be symbols", self.span(vt))
                n = 1
                if k + 1 < len(args) and isinstance(args[k + 1][0], Num):
                    n = args[k + 1][0].value
                    if not n.is_real or n.real.denominator != 1 or n.real < 0:
                        raise ExprSyntaxError("derivative order must be a nonnegative integer",
                                              self.span(args[k + 1][1]))
                    n = int(n.real)
                    k += 1
                for _ in range(n):
                    e = diff(e, v.symbol)
                k += 1
            return e
        if name in ctx.ufuncs:
            decl_args, reality = ctx.ufuncs[name]
            args = self.args()
            syms = []
            for a, at in args:
                if not isinstance(a, Sym) or a.symbol.kind != "coordinate":
                    raise ExprSyntaxError(f"arguments of {name} must be coordinates", self.span(at))
                syms.append(a.symbol)
            if decl_args is not None and tuple(syms) != tuple(decl_args):
                want = ", ".join(s.name for s in decl_args)
                raise ExprSyntaxError(f"{name} is declared as {name}({want})", self.span(t))
            return UFunc(name, syms, None, reality)
        if ctx.strict or name in RESERVED:
            raise UnknownIdentifier(name, self.span(t), _suggest(name, list(ctx.ufuncs) + list(FUNCTIONS)))
        args = self.args()
        syms = []
        for a, at in args:
            if not isinstance(a, Sym) or a.symbol.kind != "coordinate":
                raise ExprSyntaxError(f"arguments of {name} must be coordinates", self.span(at))
            syms.append(a.symbol)
        ctx.ufuncs[name] = (tuple(syms), "complex")
        return UFunc(name, syms)

    def identifier(self, t: Token):
        name = t.text
        ctx = self.ctx
        if name == "I":
            return I_E
        if name == "hbar":
            return Sym(HBAR)
        if name in ctx.coordinates:
            return Sym(ctx.coordinates[name])
        if name in ctx.params:
            return Sym(ctx.params[name])
        if name in ctx.named_ops:
            return ctx.named_ops[name]
        if ctx.operators or ctx.classical:
            v = _momentum_value(name, ctx)
            if v is not None:
                return v
        if name in _momentum_tokens(CARTESIAN_CHART) + _momentum_tokens(CYLINDRICAL_CHART):
            raise ExprSyntaxError(f"momentum '{name}' is only allowed in operator strings", self.span(t))
        if name == "phi":
            raise ExprSyntaxError("phi does not appear directly; use u = exp(I*phi)", self.span(t))
        if not ctx.strict and name not in RESERVED and name not in ctx.ufuncs:
            s = parameter(name, "complex")
            ctx.params[name] = s
            return Sym(s)
        raise UnknownIdentifier(name, self.span(t), _suggest(name, ctx.known()))


def _suggest(name, pool):
    return difflib.get_close_matches(name, pool, n=3, cutoff=0.5)


def _cart_A(ctx):
    A = ctx.vector_potential
    if A is None:
        raise ParseError("magnetic momenta need a vector potential")
    return A


def _momentum_value(name: str, ctx: Context):
    chart = ctx.chart
    if ctx.classical:
        names = [p.name for p in chart.momenta]
        if name in names:
            return Sym(chart.momenta[names.index(name)])
        if name.startswith("pA") and name[2:] in [n[1:] for n in names]:
            k = [n[1:] for n in names].index(name[2:])
            return Sym(chart.momenta[k]) + _cart_A(ctx)[k]
        if chart == CARTESIAN_CHART and re.fullmatch(r"LA?[123]", name):
            j = int(name[-1]) - 1
            ps = [Sym(p) for p in chart.momenta]
            if name.startswith("LA"):
                A = _cart_A(ctx)
                ps = [ps[k] + A[k] for k in range(3)]
            xs = [Sym(c) for c in chart.coords]
            k, l = (j + 1) % 3, (j + 2) % 3
            return xs[k] * ps[l] - xs[l] * ps[k]
        return None
    if chart == CARTESIAN_CHART:
        m = re.fullmatch(r"p([123])", name)
        if m:
            return OpMom(int(m.group(1)) - 1, chart)
        m = re.fullmatch(r"pA([123])", name)
        if m:
            k = int(m.group(1)) - 1
            return op_sum(OpMom(k, chart), OpMul(_cart_A(ctx)[k]))
        m = re.fullmatch(r"(LA?)([123])", name)
        if m:
            j = int(m.group(2)) - 1
            magnetic = m.group(1) == "LA"
            ps = []
            for k in range(3):
                p = OpMom(k, chart)
                if magnetic:
                    p = op_sum(p, OpMul(_cart_A(ctx)[k]))
                ps.append(p)
            xs = [Sym(c) for c in chart.coords]
            k, l = (j + 1) % 3, (j + 2) % 3
            return op_sum(op_prod(OpMul(xs[k]), ps[l]), op_scale(-1, op_prod(OpMul(xs[l]), ps[k])))
        return None
    table = {"pr": 0, "pphi": 1, "pZ": 2}
    if name in table:
        return OpMom(table[name], chart)
    if name.startswith("pA") and ("p" + name[2:]) in table:
        k = table["p" + name[2:]]
        return op_sum(OpMom(k, chart), OpMul(_cart_A(ctx)[k]))
    return None


def _is_op(x):
    return isinstance(x, OpExpr)


def _add(a, b):
    if _is_op(a) or _is_op(b):
        return op_sum(as_op(a), as_op(b))
    return a + b


def _neg(a):
    if _is_op(a):
        return op_scale(-1, a)
    return -a


def _mul(a, b):
    if _is_op(a) or _is_op(b):
        return op_prod(as_op(a), as_op(b))
    return a * b


def _pow(a, n, span):
    if _is_op(a):
        if n < 0:
            raise ExprSyntaxError("negative power of an operator", span)
        return a ** n
    if n < 0 and isinstance(a, Num) and not a.value:
        raise ExprSyntaxError("division by zero", span)
    return power(a, n)


def parse_expr(text: str, context: Context | None = None, *, line: int = 1, col: int = 1) -> Expr:
    """Parse a scalar expression.

    Without a context, unknown identifiers become complex parameters.
    """
    ctx = context if context is not None else Context(strict=False)
    if ctx.operators:
        ctx = _replace(ctx, operators=False)
    v = _Parser(text, ctx, line, col).parse()
    if isinstance(v, OpExpr):
        raise ExprSyntaxError("operator found in a scalar expression", SourceSpan(line, col, len(text)))
    return v


def parse_operator(text: str, context: Context | None = None, *, line: int = 1, col: int = 1) -> OpExpr:
    ctx = context if context is not None else Context(strict=False)
    ctx = _replace(ctx, operators=True, classical=False)
    return as_op(_Parser(text, ctx, line, col).parse())


def parse_phase(text: str, context: Context | None = None, *, line: int = 1, col: int = 1) -> Expr:
    """Parse a classical phase-space function (momenta become symbols)."""
    ctx = context if context is not None else Context(strict=False)
    ctx = _replace(ctx, operators=False, classical=True)
    v = _Parser(text, ctx, line, col).parse()
    return as_expr(v)


def _replace(ctx: Context, **kw) -> Context:
    from dataclasses import replace
    return replace(ctx, **kw)


# -- rendering -----------------------------------------------------------------

_P_SUM, _P_PROD, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _frac_text(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _num_text(v: Scalar):
    """(text, precedence, negative) for a numeric constant."""
    re_, im = v.real, v.imag
    if not im:
        neg = re_ < 0
        a = abs(re_)
        prec = _P_ATOM if a.denominator == 1 else _P_PROD
        return _frac_text(a), prec, neg
    if not re_:
        neg = im < 0
        a = abs(im)
        t = "I" if a == 1 else f"{_frac_text(a)}*I"
        return t, (_P_ATOM if a == 1 else _P_PROD), neg
    sign = "+" if im > 0 else "-"
    a = abs(im)
    it = "I" if a == 1 else f"{_frac_text(a)}*I"
    return f"{_frac_text(re_)} {sign} {it}", _P_SUM, False


def _wrap(text, prec, need):
    return f"({text})" if prec < need else text


def _split_sign(e: Expr):
    """(negative?, |e|) for sums: pulls a leading -1 out of a product."""
    if isinstance(e, Num):
        t, p, neg = _num_text(e.value)
        if neg:
            return True, Num(-e.value)
        return False, e
    if isinstance(e, Product) and isinstance(e.factors[0], Num):
        c = e.factors[0].value
        _, _, neg = _num_text(c)
        if neg:
            rest = e.factors[1:]
            if c == -1:
                return True, rest[0] if len(rest) == 1 else Product(rest)
            return True, Product((Num(-c),) + rest)
    return False, e


def _render(e: Expr):
    """(text, precedence)."""
    if isinstance(e, Num):
        t, p, neg = _num_text(e.value)
        if neg:
            return "-" + _wrap(t, p, _P_POW), _P_NEG
        return t, p
    if isinstance(e, Sym):
        return e.symbol.name, _P_ATOM
    if isinstance(e, Sum):
        parts = []
        for k, t in enumerate(e.terms):
            neg, mag = _split_sign(t)
            txt, p = _render(mag)
            txt = _wrap(txt, p, _P_PROD if neg or k else _P_SUM)
            if k == 0:
                parts.append(("-" + txt) if neg else txt)
            else:
                parts.append((" - " if neg else " + ") + txt)
        return "".join(parts), _P_SUM
    if isinstance(e, Product):
        neg, mag = _split_sign(e)
        if neg:
            t, p = _render(mag)
            return "-" + _wrap(t, p, _P_POW if isinstance(mag, Sum) else _P_PROD), _P_NEG
        numer, denom = [], []
        for f in e.factors:
            if isinstance(f, IntPower) and f.exp < 0:
                denom.append(power(f.base, -f.exp))
            elif isinstance(f, Num) and f.value.is_real and f.value.real.denominator != 1 and f.value.real.numerator == 1:
                denom.append(Num(f.value.real.denominator))
            else:
                numer.append(f)
        ntxt = _join_factors(numer) if numer else ("1", _P_ATOM)
        if not denom:
            return ntxt
        dtxt = _join_factors(denom)
        return f"{_wrap(ntxt[0], ntxt[1], _P_PROD)}/{_wrap(dtxt[0], dtxt[1], _P_POW)}", _P_PROD
    if isinstance(e, IntPower):
        if e.exp < 0:
            b = power(e.base, -e.exp)
            bt, bp = _render(b)
            return f"1/{_wrap(bt, bp, _P_POW)}", _P_PROD
        bt, bp = _render(e.base)
        return f"{_wrap(bt, bp, _P_ATOM)}^{e.exp}", _P_POW
    if isinstance(e, Func):
        return f"{e.name}({_render(e.arg)[0]})", _P_ATOM
    if isinstance(e, UFunc):
        head = f"{e.name}({', '.join(a.name for a in e.args)})"
        if not any(e.deriv):
            return head, _P_ATOM
        spec = []
        for a, d in zip(e.args, e.deriv):
            if d:
                spec.append(a.name if d == 1 else f"{a.name}, {d}")
        return f"diff({head}, {', '.join(spec)})", _P_ATOM
    raise TypeError(type(e).__name__)


def _join_factors(fs):
    if len(fs) == 1:
        return _render(fs[0])
    texts = []
    for f in fs:
        t, p = _render(f)
        texts.append(_wrap(t, p, _P_POW if isinstance(f, Num) else _P_PROD + 1))
    return "*".join(texts), _P_PROD


def render(e) -> str:
    """Deterministic text that parses back to an equal expression."""
    return _render(as_expr(e))[0]


def render_op(x: OpExpr) -> str:
    t, _ = _render_op(x)
    return t


def _render_op(x):
    if isinstance(x, OpMul):
        return _render(x.coeff)
    if isinstance(x, OpMom):
        return _momentum_tokens(x.chart)[x.index], _P_ATOM
    if isinstance(x, OpAtom):
        return x.name, _P_ATOM
    if isinstance(x, OpSum):
        parts = []
        for k, it in enumerate(x.items):
            t, p = _render_op(it)
            t = _wrap(t, p, _P_PROD if k else _P_SUM)
            parts.append(t if k == 0 else " + " + t)
        return "".join(parts), _P_SUM
    if isinstance(x, OpProd):
        texts = []
        for it in x.items:
            t, p = _render_op(it)
            texts.append(_wrap(t, p, _P_PROD + 1))
        return "*".join(texts), _P_PROD
    raise TypeError(type(x).__name__)


# -- system files --------------------------------------------------------------

SECTIONS = (
    "system", "params", "functions", "potential", "integrals", "views", "classical", "expected",
    "relations", "algebra", "dependence",
)
IDENTITY_SECTIONS = ("expected", "relations", "algebra", "dependence")


@dataclass
class SystemFile:
    name: str
    coordinates: str
    params: list                      # [(name, reality)]
    vector_potential: list            # 3 expression strings
    scalar_potential: str
    integrals: list                   # [(name, operator string)]
    expected: list = field(default_factory=list)     # [(name, identity string)]
    views: list = field(default_factory=list)        # [(name, operator string)]
    relations: list = field(default_factory=list)
    algebra: list = field(default_factory=list)
    dependence: list = field(default_factory=list)
    functions: list = field(default_factory=list)    # [(name, [arg names], reality)]
    classical: list = field(default_factory=list)    # [(name, phase string, guard or None)]
    citations: dict = field(default_factory=dict)    # name -> citation text
    # parsed forms, filled by parse_system
    context: Context | None = None
    A: tuple = ()
    W: Expr | None = None
    ops: dict = field(default_factory=dict)
    phase: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)    # section -> {name: (lhs, rhs)}
    view_ops: dict = field(default_factory=dict)
    cartesian_A: object = None


_HEADER = re.compile(r"^\[(\w+)\]$")


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def parse_system(text) -> SystemFile:
    """Parse and validate a system-definition file; raises :class:`SystemFileError`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SystemFileError([Diagnostic(SourceSpan(1, 1, 0), f"invalid UTF-8: {exc.reason}")])
    diags: list = []
    entries: dict = {s: [] for s in SECTIONS}
    section = None
    headers: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        m = _HEADER.match(stripped)
        if m:
            section = m.group(1)
            headers.setdefault(section, (lineno, line.index("[") + 1, len(stripped)))
            if section not in SECTIONS:
                diags.append(Diagnostic(SourceSpan(lineno, line.index("[") + 1, len(stripped)),
                                        f"unknown section [{section}]"))
                section = None
            continue
        if section is None:
            diags.append(Diagnostic(SourceSpan(lineno, 1, len(line)), "entry outside of a section"))
            continue
        if "=" not in line:
            diags.append(Diagnostic(SourceSpan(lineno, 1, len(line)), "expected 'key = value'"))
            continue
        k = line.index("=")
        key = line[:k].strip()
        value = line[k + 1:]
        vcol = k + 2 + (len(value) - len(value.lstrip()))
        value = value.strip()
        kcol = len(line[:k]) - len(line[:k].lstrip()) + 1
        entries[section].append((key, value, lineno, kcol, vcol))

    def one(section, key, default=None):
        for k, v, ln, kc, vc in entries[section]:
            if k == key:
                return v, ln, vc
        return default

    name = one("system", "name")
    coords = one("system", "coordinates")
    if name is None:
        diags.append(Diagnostic(SourceSpan(1, 1, 0), "[system] needs a name"))
    frame = coords[0] if coords else "cartesian"
    if frame not in ("cartesian", "cylindrical"):
        diags.append(Diagnostic(SourceSpan(coords[1], coords[2], len(frame)),
                                "coordinates must be 'cartesian' or 'cylindrical'"))
        frame = "cartesian"
    chart = CARTESIAN_CHART if frame == "cartesian" else CYLINDRICAL_CHART
    coord_map = dict(CART_COORDS) if frame == "cartesian" else dict(CYL_COORDS)

    params = []
    pmap = {}
    for k, v, ln, kc, vc in entries["params"]:
        if v not in ("real", "complex"):
            diags.append(Diagnostic(SourceSpan(ln, vc, len(v)), f"reality of '{k}' must be 'real' or 'complex'"))
            continue
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", k) or k in RESERVED or k in coord_map or k == "hbar":
            diags.append(Diagnostic(SourceSpan(ln, kc, len(k)), f"invalid parameter name '{k}'"))
            continue
        params.append((k, v))
        pmap[k] = parameter(k, v)

    functions = []
    fmap = {}
    for k, v, ln, kc, vc in entries["functions"]:
        m = re.fullmatch(r"([A-Za-z_]\w*)\s*\(([^)]*)\)\s*(real|complex)?", v)
        if not m or m.group(1) != k:
            diags.append(Diagnostic(SourceSpan(ln, vc, len(v)), f"expected '{k} = {k}(args) [real|complex]'"))
            continue
        argnames = [a.strip() for a in m.group(2).split(",") if a.strip()]
        bad = [a for a in argnames if a not in coord_map and a != "phi"]
        if bad:
            diags.append(Diagnostic(SourceSpan(ln, vc, len(v)), f"'{bad[0]}' is not a coordinate"))
            continue
        args = tuple(PHI if a == "phi" else coord_map[a] for a in argnames)
        reality = m.group(3) or "complex"
        functions.append((k, argnames, reality))
        fmap[k] = (args, reality)

    ctx = Context(coordinates=coord_map, params=pmap, ufuncs=fmap, chart=chart, strict=True)

    def parse_at(fn, value, ln, vc, c):
        try:
            return fn(value, c, line=ln, col=vc)
        except ParseError as exc:
            diags.append(Diagnostic(exc.span or SourceSpan(ln, vc, len(value)), exc.message))
            return None

    keys = ("A1", "A2", "A3") if frame == "cartesian" else ("A_r", "A_phi", "A_Z")
    pot = {k: (v, ln, vc) for k, v, ln, kc, vc in entries["potential"]}
    for k, v, ln, kc, vc in entries["potential"]:
        if k not in keys and k != "W":
            diags.append(Diagnostic(SourceSpan(ln, kc, len(k)), f"unknown potential component '{k}'"))
    vp_strings = []
    A_exprs = []
    missing = [k for k in keys if k not in pot]
    if missing:
        diags.append(Diagnostic(SourceSpan(*headers.get("potential", (1, 1, 0))),
                                f"vector_potential requires 3 components (missing {', '.join(missing)})"))
    for k in keys:
        if k in pot:
            v, ln, vc = pot[k]
            vp_strings.append(v)
            A_exprs.append(parse_at(parse_expr, v, ln, vc, ctx))
    W_expr = None
    w_string = "0"
    if "W" in pot:
        v, ln, vc = pot["W"]
        w_string = v
        W_expr = parse_at(parse_expr, v, ln, vc, ctx)
    else:
        W_expr = Num(0)

    sf = SystemFile(
        name=name[0] if name else "", coordinates=frame, params=params,
        vector_potential=vp_strings, scalar_potential=w_string, integrals=[], functions=functions,
    )
    for k, v, ln, kc, vc in entries["system"]:
        if k.startswith("cite."):
            sf.citations[k[5:]] = v

    if len(A_exprs) == 3 and all(a is not None for a in A_exprs):
        if frame == "cylindrical":
            from .geometry import VectorField, to_cartesian
            sf.A = tuple(A_exprs)
            cart = None
            try:
                cart = to_cartesian(VectorField(tuple(A_exprs), "cylindrical"))
            except ValueError as exc:
                diags.append(Diagnostic(SourceSpan(1, 1, 0), f"vector potential: {exc}"))
            ctx.vector_potential = tuple(A_exprs)
            sf.cartesian_A = cart
        else:
            sf.A = tuple(A_exprs)
            ctx.vector_potential = tuple(A_exprs)
    sf.W = W_expr

    seen = set()
    for section in ("integrals", "views"):
        for k, v, ln, kc, vc in entries[section]:
            if k in seen or k in pmap or k in coord_map or k == "H":
                diags.append(Diagnostic(SourceSpan(ln, kc, len(k)), f"duplicate or clashing name '{k}'"))
                continue
            seen.add(k)
            getattr(sf, section).append((k, v))
            if ctx.vector_potential is None:
                continue
            op = parse_at(parse_operator, v, ln, vc, ctx)
            if op is not None:
                atom = OpAtom(k, op)
                (sf.ops if section == "integrals" else sf.view_ops)[k] = atom
                ctx.named_ops[k] = atom

    for k, v, ln, kc, vc in entries["classical"]:
        guard = None
        m = re.match(r"^(.*?)\s+where\s+(.*)$", v)
        expr_text = v
        if m:
            expr_text, guard = m.group(1), m.group(2).strip()
        sf.classical.append((k, expr_text, guard))
        if ctx.vector_potential is None:
            continue
        ph = parse_at(parse_phase, expr_text, ln, vc, ctx)
        if ph is not None:
            sf.phase[k] = ph

    ctx_h = None
    if ctx.vector_potential is not None and W_expr is not None:
        ctx_h = _replace(ctx, named_ops={**ctx.named_ops, "H": OpAtom("H", _hamiltonian_recipe(ctx, W_expr))})
    for section in IDENTITY_SECTIONS:
        parsed = sf.identities.setdefault(section, {})
        for k, v, ln, kc, vc in entries[section]:
            if "==" not in v:
                diags.append(Diagnostic(SourceSpan(ln, vc, len(v)), "identity must have the form 'lhs == rhs'"))
                continue
            getattr(sf, section).append((k, v))
            lhs, rhs = v.split("==", 1)
            if ctx_h is None:
                continue
            a = parse_at(parse_operator, lhs.strip(), ln, vc, ctx_h)
            rcol = vc + v.index("==") + 2 + (len(rhs) - len(rhs.lstrip()))
            b = parse_at(parse_operator, rhs.strip(), ln, rcol, ctx_h)
            if a is not None and b is not None:
                parsed[k] = (a, b)

    if diags:
        raise SystemFileError(diags)
    sf.context = ctx
    return sf


def _hamiltonian_recipe(ctx: Context, W) -> OpExpr:
    from .geometry import cylindrical_hamiltonian_recipe, hamiltonian_recipe
    if ctx.chart != CARTESIAN_CHART:
        return cylindrical_hamiltonian_recipe(ctx.vector_potential, W)
    return hamiltonian_recipe(ctx.vector_potential, W)


__all__ = [
    "SourceSpan", "ParseError", "ExprSyntaxError", "UnknownIdentifier", "Diagnostic",
    "SystemFileError", "Context", "parse_expr", "parse_operator", "parse_phase", "render",
    "render_op", "SystemFile", "parse_system", "tokenize",
]
