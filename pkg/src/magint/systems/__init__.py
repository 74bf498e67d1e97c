"""Registry of builtin systems and loading of user system files.

Every builtin is defined by a golden ``.sys`` file shipped next to this
module; :func:`builtin` parses that file exactly like a user file would be.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib.resources import files

from ..diffop import (
    CARTESIAN_CHART, CYLINDRICAL_CHART, DiffOperator, OpAtom, OpExpr, op_substitute, to_diffop,
)
from ..geometry import (
    MagneticField, VectorField, curl, hamiltonian_recipe, operator_to_cartesian, scalar_to_cartesian,
)
from ..kernel.atoms import Symbol, parameter
from ..kernel.expr import Expr, Num, Sym, as_expr, normalize, substitute, to_expr
from ..kernel.expr import I as I_E
from ..parser import SystemFile, parse_system

BUILTIN_NAMES = (
    "new-complex",
    "constant-B-landau",
    "constant-B-symmetric",
    "constant-B-W3",
    "constant-B-W3-singular",
    "constant-B-W3-harmonic",
    "inverse-square-B",
)


class UnknownSystem(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"unknown system {self.name!r}; available: {', '.join(BUILTIN_NAMES)}"


@dataclass
class SystemDef:
    """A Hamiltonian with its declared integrals, all in the Cartesian chart.

    ``recipes`` keep the construction of every named operator (momentum
    products and their ordering); ``integrals`` hold the normal-ordered results.
    """

    name: str
    frame: str
    params: dict                       # name -> Symbol
    A: VectorField
    W: object                          # RationalNF
    H: DiffOperator
    H_recipe: OpExpr
    integrals: dict                    # name -> DiffOperator
    recipes: dict                      # name -> OpAtom (integrals and views)
    views: dict = field(default_factory=dict)
    classical_integrals: dict = field(default_factory=dict)   # name -> (Expr, guard text or None)
    expected: dict = field(default_factory=dict)             # name -> (lhs recipe, rhs recipe)
    relations: dict = field(default_factory=dict)
    algebra: dict = field(default_factory=dict)
    dependence: dict = field(default_factory=dict)
    citations: dict = field(default_factory=dict)
    chart: object = CARTESIAN_CHART
    source: SystemFile | None = None

    @property
    def B(self) -> MagneticField:
        return curl(self.A)

    def citation(self, key: str) -> str:
        return self.citations.get(key, f"{self.name}: {key}")

    def recipe(self, name: str) -> OpExpr:
        if name == "H":
            return OpAtom("H", self.H_recipe)
        try:
            return self.recipes[name]
        except KeyError:
            raise KeyError(f"{self.name} has no operator named {name!r}") from None

    def operator(self, name: str) -> DiffOperator:
        if name == "H":
            return self.H
        if name in self.integrals:
            return self.integrals[name]
        return self._to_cartesian(to_diffop(self.recipe(name), self.chart))

    def _to_cartesian(self, D: DiffOperator) -> DiffOperator:
        return operator_to_cartesian(D) if D.chart != CARTESIAN_CHART else D

    def identity_operators(self, pair) -> tuple:
        lhs, rhs = pair
        return (self._to_cartesian(to_diffop(lhs, self.chart)),
                self._to_cartesian(to_diffop(rhs, self.chart)))


def _nf_of(e):
    return normalize(as_expr(e))


def load(sf: SystemFile) -> SystemDef:
    """Materialize a parsed system file."""
    chart = CARTESIAN_CHART if sf.coordinates == "cartesian" else CYLINDRICAL_CHART
    params = {p.name: p for p in sf.context.params.values()}
    if chart == CARTESIAN_CHART:
        A = VectorField(tuple(_nf_of(a) for a in sf.A), "cartesian")
        W = _nf_of(sf.W)
    else:
        A = sf.cartesian_A
        W = scalar_to_cartesian(_nf_of(sf.W))
    H_recipe = hamiltonian_recipe(A.exprs(), to_expr(W))
    H = to_diffop(H_recipe, CARTESIAN_CHART)
    integrals = {}
    for k, atom in sf.ops.items():
        D = to_diffop(atom, chart)
        integrals[k] = operator_to_cartesian(D) if chart != CARTESIAN_CHART else D
    classical = {}
    for k, text, guard in sf.classical:
        classical[k] = (sf.phase[k], guard)
    return SystemDef(
        name=sf.name, frame=sf.coordinates, params=params, A=A, W=W, H=H, H_recipe=H_recipe,
        integrals=integrals, recipes={**sf.ops, **sf.view_ops}, views=dict(sf.view_ops),
        classical_integrals=classical,
        expected=dict(sf.identities.get("expected", {})),
        relations=dict(sf.identities.get("relations", {})),
        algebra=dict(sf.identities.get("algebra", {})),
        dependence=dict(sf.identities.get("dependence", {})),
        citations=dict(sf.citations), chart=chart, source=sf,
    )


def golden_text(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise UnknownSystem(name)
    return files(__name__).joinpath(f"{name}.sys").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def builtin(name: str) -> SystemDef:
    return load(parse_system(golden_text(name)))


def available() -> tuple:
    return BUILTIN_NAMES


# -- specialization ------------------------------------------------------------------

REALITY_MODES = ("real", "imag", "complex")


def reality_bindings(s: SystemDef, reality: dict) -> dict:
    """Symbol bindings for a reality scenario such as ``{"b": "imag"}``.

    ``real`` replaces a complex parameter by a real one of the same name;
    ``imag`` replaces it by ``I`` times a real one.
    """
    out = {}
    for name, mode in reality.items():
        if name not in s.params:
            raise KeyError(f"{s.name} has no parameter {name!r}")
        if mode not in REALITY_MODES:
            raise ValueError(f"reality must be one of {', '.join(REALITY_MODES)}")
        old = s.params[name]
        if mode == "complex":
            continue
        real = parameter(name, "real")
        out[old] = Sym(real) if mode == "real" else I_E * Sym(real)
    return out


def value_bindings(s: SystemDef, values: dict) -> dict:
    out = {}
    for name, v in values.items():
        if name not in s.params:
            raise KeyError(f"{s.name} has no parameter {name!r}")
        out[s.params[name]] = v if isinstance(v, Expr) else Num(v)
    return out


def specialize(s: SystemDef, bindings: dict, suffix: str = "") -> SystemDef:
    """Apply ``Symbol -> Expr`` bindings to every operator of the system."""
    if not bindings:
        return s
    nf_map = {k: _nf_of(v) for k, v in bindings.items()}

    def sub_ops(d):
        return {k: v.substitute(nf_map) for k, v in d.items()}

    def sub_pairs(d):
        return {k: (op_substitute(a, bindings), op_substitute(b, bindings)) for k, (a, b) in d.items()}

    params = {}
    for name, p in s.params.items():
        img = bindings.get(p)
        if img is None:
            params[name] = p
        elif isinstance(img, Sym):
            params[name] = img.symbol
        else:
            syms = [x for x in _free(img) if isinstance(x, Symbol) and x.kind == "parameter"]
            if syms:
                params[name] = syms[0]
    recipes = {k: op_substitute(v, bindings) for k, v in s.recipes.items()}
    A = VectorField(tuple(c.__class__ and _sub_nf(c, nf_map) for c in s.A.components), s.A.frame)
    W = _sub_nf(s.W, nf_map)
    return replace(
        s, name=s.name + suffix, params=params, A=A, W=W, H=s.H.substitute(nf_map),
        H_recipe=op_substitute(s.H_recipe, bindings), integrals=sub_ops(s.integrals),
        recipes=recipes, views={k: recipes[k] for k in s.views},
        classical_integrals={k: (substitute(e, bindings), g) for k, (e, g) in s.classical_integrals.items()},
        expected=sub_pairs(s.expected), relations=sub_pairs(s.relations),
        algebra=sub_pairs(s.algebra), dependence=sub_pairs(s.dependence),
    )


def _sub_nf(c, nf_map):
    from ..kernel.rational import subst_nf
    return subst_nf(c, nf_map)


def _free(e):
    from ..kernel.expr import free_symbols
    return free_symbols(e)


__all__ = [
    "SystemDef", "UnknownSystem", "BUILTIN_NAMES", "builtin", "load", "available", "golden_text",
    "specialize", "reality_bindings", "value_bindings", "REALITY_MODES",
]
