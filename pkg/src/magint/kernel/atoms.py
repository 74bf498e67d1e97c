"""Symbols and the process-wide atom table.

Every polynomial variable is an *atom*: a symbol, an uninterpreted function
application with a derivative index, or an opaque elementary function
(``exp``, ``ln``, ``sin``, ``cos``) of a normalized argument.  Atoms are
interned; the table is append-only and guarded by a lock.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

COORDINATE_ORDER = ("x1", "x2", "x3", "r", "u", "Z", "phi")
MOMENTUM_ORDER = ("p1", "p2", "p3", "pr", "pphi", "pZ")

KINDS = ("coordinate", "parameter", "hbar", "momentum")
REALITIES = ("real", "complex", "unit")


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str = "parameter"
    reality: str = "complex"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.reality not in REALITIES:
            raise ValueError(f"unknown reality {self.reality!r}")

    def sort_key(self):
        if self.kind == "coordinate":
            pos = COORDINATE_ORDER.index(self.name) if self.name in COORDINATE_ORDER else len(COORDINATE_ORDER)
            return (0, pos, self.name)
        if self.kind == "momentum":
            pos = MOMENTUM_ORDER.index(self.name) if self.name in MOMENTUM_ORDER else len(MOMENTUM_ORDER)
            return (1, pos, self.name)
        if self.kind == "hbar":
            return (2, 0, self.name)
        return (3, self.name, self.reality)

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.kind}, {self.reality})"

    def __str__(self):
        return self.name


def coordinate(name: str) -> Symbol:
    return Symbol(name, "coordinate", "unit" if name == "u" else "real")


def parameter(name: str, reality: str = "complex") -> Symbol:
    return Symbol(name, "parameter", reality)


def momentum(name: str) -> Symbol:
    return Symbol(name, "momentum", "real")


X1, X2, X3 = coordinate("x1"), coordinate("x2"), coordinate("x3")
R, U, Z, PHI = coordinate("r"), coordinate("u"), coordinate("Z"), coordinate("phi")
HBAR = Symbol("hbar", "hbar", "real")
CARTESIAN = (X1, X2, X3)
CYLINDRICAL = (R, PHI, Z)
MOMENTA = tuple(momentum(n) for n in ("p1", "p2", "p3"))
CYL_MOMENTA = tuple(momentum(n) for n in ("pr", "pphi", "pZ"))


@dataclass(frozen=True)
class UFuncAtom:
    name: str
    args: tuple
    deriv: tuple
    reality: str = "complex"

    def sort_key(self):
        return (4, self.name, tuple(a.name for a in self.args), self.deriv)


@dataclass(frozen=True)
class FuncAtom:
    fname: str
    arg: object = field(compare=False, hash=False)
    arg_key: object = None
    text: str = ""

    def sort_key(self):
        return (5, self.fname, self.text)


class AtomTable:
    def __init__(self):
        self._lock = threading.Lock()
        self._atoms: list = []
        self._index: dict = {}
        self._canon = None

    def index(self, atom) -> int:
        key = atom if not isinstance(atom, FuncAtom) else ("func", atom.fname, atom.arg_key)
        i = self._index.get(key)
        if i is not None:
            return i
        with self._lock:
            i = self._index.get(key)
            if i is None:
                i = len(self._atoms)
                self._atoms.append(atom)
                self._index[key] = i
                self._canon = None
        return i

    def atom(self, i: int):
        return self._atoms[i]

    def __len__(self):
        return len(self._atoms)

    def canonical_order(self) -> tuple:
        """Atom indices sorted by the global canonical order."""
        canon = self._canon
        if canon is None or len(canon) != len(self._atoms):
            with self._lock:
                atoms = list(self._atoms)
            canon = tuple(sorted(range(len(atoms)), key=lambda k: atoms[k].sort_key()))
            self._canon = canon
        return canon


TABLE = AtomTable()
