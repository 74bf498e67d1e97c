"""Vector calculus on R^3 in Cartesian and cylindrical form.

Cylindrical objects are differential-form components: a vector potential is
``A_r dr + A_phi dphi + A_Z dZ`` and a magnetic field is
``B^r dphi^dZ + B^phi dZ^dr + B^Z dr^dphi``.  Angles enter only through
``u = exp(I*phi)``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .diffop import (
    CARTESIAN_CHART, CYLINDRICAL_CHART, DiffOperator, OpExpr, OpMom, OpMul, commutator,
    compose, cylindrical_cartesian_momenta, op_prod, op_scale, op_sum,
)
from .kernel.atoms import PHI, R, TABLE, U, X1, X2, X3, Z, FuncAtom, UFuncAtom
from .kernel.expr import Sym, as_expr, normalize, power, rational, to_expr
from .kernel.expr import I as I_E
from .kernel.poly import Poly
from .kernel.rational import NF_ONE, NF_ZERO, RationalNF, diff_nf, subst_nf, ufunc
from .kernel.scalar import I

FRAMES = ("cartesian", "cylindrical")


class NotConvertible(ValueError):
    """An expression has no rational form in the target coordinates."""


def _nf(e) -> RationalNF:
    if isinstance(e, RationalNF):
        return e
    return normalize(as_expr(e))


@dataclass(frozen=True)
class VectorField:
    """Three components of a 1-form, in Cartesian or cylindrical frame."""

    components: tuple
    frame: str = "cartesian"

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        if len(self.components) != 3:
            raise ValueError("a vector field has 3 components")
        object.__setattr__(self, "components", tuple(_nf(c) for c in self.components))

    def __getitem__(self, k):
        return self.components[k]

    def exprs(self):
        return tuple(to_expr(c) for c in self.components)

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.frame == other.frame and self.components == other.components

    def __hash__(self):
        return hash((self.frame, self.components))


@dataclass(frozen=True)
class MagneticField:
    """Components of the 2-form ``B = dA``."""

    components: tuple
    frame: str = "cartesian"

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "components", tuple(_nf(c) for c in self.components))

    def __getitem__(self, k):
        return self.components[k]

    def exprs(self):
        return tuple(to_expr(c) for c in self.components)

    def __eq__(self, other):
        return isinstance(other, MagneticField) and self.frame == other.frame and self.components == other.components

    def __hash__(self):
        return hash((self.frame, self.components))


def _coords(frame):
    return (X1, X2, X3) if frame == "cartesian" else (R, PHI, Z)


# -- differential operators on fields -----------------------------------------------

def grad(f, frame: str = "cartesian") -> VectorField:
    """Exterior derivative of a function (1-form components)."""
    f = _nf(f)
    return VectorField(tuple(diff_nf(f, x) for x in _coords(frame)), frame)


def curl(A: VectorField) -> MagneticField:
    """``B = dA``: B^1 = d_2 A_3 - d_3 A_2 and cyclic (same formula in both frames)."""
    x = _coords(A.frame)
    a = A.components
    comps = (
        diff_nf(a[2], x[1]) - diff_nf(a[1], x[2]),
        diff_nf(a[0], x[2]) - diff_nf(a[2], x[0]),
        diff_nf(a[1], x[0]) - diff_nf(a[0], x[1]),
    )
    return MagneticField(comps, A.frame)


def div(B: MagneticField) -> RationalNF:
    """Coefficient of ``dB``; zero for every closed 2-form."""
    x = _coords(B.frame)
    return diff_nf(B[0], x[0]) + diff_nf(B[1], x[1]) + diff_nf(B[2], x[2])


def closure(B: MagneticField) -> RationalNF:
    return div(B)


# -- coordinate changes -------------------------------------------------------------

def _cos_nf():
    u = RationalNF.symbol(U)
    return (u + u.inverse()) / 2


def _sin_nf():
    u = RationalNF.symbol(U)
    return (u - u.inverse()) / RationalNF.const(2 * I)


def scalar_to_cylindrical(f) -> RationalNF:
    f = _nf(f)
    r = RationalNF.symbol(R)
    return subst_nf(f, {X1: r * _cos_nf(), X2: r * _sin_nf(), X3: RationalNF.symbol(Z)})


def _check_convertible(f: RationalNF):
    for j in f.atoms():
        a = TABLE.atom(j)
        if isinstance(a, FuncAtom) and (a.arg.symbols() & {R, U, PHI}):
            raise NotConvertible(f"{a.fname}(...) of the polar variables has no Cartesian rational form")
        if isinstance(a, UFuncAtom) and set(a.args) & {R, PHI, U}:
            raise NotConvertible(f"{a.name} depends on polar variables")


def _parity_poly(p: Poly, ir: int, iu: int):
    parities = set()
    for m in p.terms:
        a = m[ir] if ir < len(m) else 0
        b = m[iu] if iu < len(m) else 0
        parities.add((a + b) % 2)
    if len(parities) > 1:
        raise NotConvertible("mixed parity in r and u: the expression is not rational in x1, x2")
    return parities.pop() if parities else 0


def _poly_polar_to_cart(p: Poly, ir: int, iu: int, zmap) -> RationalNF:
    z = RationalNF.symbol(X1) + RationalNF.symbol(X2).scale(I)
    zb = RationalNF.symbol(X1) - RationalNF.symbol(X2).scale(I)
    out = NF_ZERO
    cache = {}
    for m, c in p.terms.items():
        a = m[ir] if ir < len(m) else 0
        b = m[iu] if iu < len(m) else 0
        rest = list(m)
        for k in (ir, iu):
            if k < len(rest):
                rest[k] = 0
        while rest and not rest[-1]:
            rest.pop()
        key = (a, b)
        zz = cache.get(key)
        if zz is None:
            zz = z ** ((a + b) // 2) * zb ** ((a - b) // 2)
            cache[key] = zz
        term = subst_nf(RationalNF(Poly({tuple(rest): c})), zmap) * zz
        out = out + term
    return out


def scalar_to_cartesian(f) -> RationalNF:
    """Rewrite a rational function of (r, u, Z) in (x1, x2, x3).

    Uses ``r*u = x1 + I*x2`` and ``r/u = x1 - I*x2``; each monomial
    ``r^a u^b`` needs ``a + b`` even (after clearing a common factor r).
    """
    f = _nf(f)
    _check_convertible(f)
    ir, iu = TABLE.index(R), TABLE.index(U)
    pn = _parity_poly(f.num, ir, iu)
    pd = _parity_poly(f.den, ir, iu)
    num, den = f.num, f.den
    if pn != pd:
        raise NotConvertible("numerator and denominator have different parity in r, u")
    if pn == 1:
        rp = Poly.var(ir)
        num, den = num * rp, den * rp
    zmap = {Z: RationalNF.symbol(X3)}
    n = _poly_polar_to_cart(num, ir, iu, zmap)
    d = _poly_polar_to_cart(den, ir, iu, zmap)
    return n / d


def to_cylindrical(F):
    """Convert a scalar, 1-form or 2-form from Cartesian to cylindrical form."""
    if isinstance(F, VectorField):
        if F.frame == "cylindrical":
            return F
        a1, a2, a3 = (scalar_to_cylindrical(c) for c in F.components)
        r = RationalNF.symbol(R)
        c, s = _cos_nf(), _sin_nf()
        return VectorField((c * a1 + s * a2, r * (c * a2 - s * a1), a3), "cylindrical")
    if isinstance(F, MagneticField):
        if F.frame == "cylindrical":
            return F
        b1, b2, b3 = (scalar_to_cylindrical(x) for x in F.components)
        r = RationalNF.symbol(R)
        c, s = _cos_nf(), _sin_nf()
        return MagneticField((r * (c * b1 + s * b2), c * b2 - s * b1, r * b3), "cylindrical")
    return scalar_to_cylindrical(F)


def to_cartesian(F):
    """Convert a scalar, 1-form or 2-form from cylindrical to Cartesian form."""
    if isinstance(F, VectorField):
        if F.frame == "cartesian":
            return F
        ar, aphi, az = F.components
        r = RationalNF.symbol(R)
        c, s = _cos_nf(), _sin_nf()
        comps = (c * ar - s * aphi / r, s * ar + c * aphi / r, az)
        return VectorField(tuple(scalar_to_cartesian(x) for x in comps), "cartesian")
    if isinstance(F, MagneticField):
        if F.frame == "cartesian":
            return F
        br, bphi, bz = F.components
        r = RationalNF.symbol(R)
        c, s = _cos_nf(), _sin_nf()
        comps = (c * br / r - s * bphi, s * br / r + c * bphi, bz / r)
        return MagneticField(tuple(scalar_to_cartesian(x) for x in comps), "cartesian")
    return scalar_to_cartesian(F)


# -- auxiliary functions ---------------------------------------------------------------

@dataclass(frozen=True)
class AuxFunctions:
    """rho(r), sigma(r), psi(phi), tau(phi), mu(Z) as expressions.

    Concrete choices must use ``u`` for the angle; uninterpreted defaults
    are single-variable functions.
    """

    rho: object = None
    sigma: object = None
    psi: object = None
    tau: object = None
    mu: object = None

    def resolved(self) -> dict:
        defaults = {
            "rho": ufunc("rho", (R,)), "sigma": ufunc("sigma", (R,)), "psi": ufunc("psi", (PHI,)),
            "tau": ufunc("tau", (PHI,)), "mu": ufunc("mu", (Z,)),
        }
        allowed = {"rho": {R}, "sigma": {R}, "psi": {PHI, U}, "tau": {PHI, U}, "mu": {Z}}
        out = {}
        for k, d in defaults.items():
            v = getattr(self, k)
            v = d if v is None else _nf(v)
            extra = v.symbols() - allowed[k] - _param_like(v)
            if extra:
                raise ValueError(f"{k} must depend on one variable only, found {sorted(s.name for s in extra)}")
            out[k] = v
        return out


def _param_like(v: RationalNF) -> set:
    return {s for s in v.symbols() if s.kind != "coordinate"}


def field_from_aux(aux: AuxFunctions):
    """(s-coefficients, cylindrical magnetic field) of a cylindrical-type pair."""
    f = aux.resolved()
    rho, sigma, psi, tau, mu = f["rho"], f["sigma"], f["psi"], f["tau"], f["mu"]
    r = RationalNF.symbol(R)
    d = diff_nf
    s = {
        "s1_r": d(psi, PHI),
        "s1_phi": -psi / r - r * r * mu + rho,
        "s1_Z": tau,
        "s2_r": NF_ZERO,
        "s2_phi": mu,
        "s2_Z": -tau / (r * r) + sigma,
    }
    two = RationalNF.const(2)
    Br = -(r * r) * d(mu, Z) / two + d(tau, PHI) / (two * r * r)
    Bphi = tau / r ** 3 + d(sigma, R) / two
    Bz = -psi / (two * r * r) + r * mu - d(rho, R) / two - d(d(psi, PHI), PHI) / (two * r * r)
    return s, MagneticField((Br, Bphi, Bz), "cylindrical")


def aux_vector_potential(aux: AuxFunctions) -> VectorField:
    """A cylindrical gauge whose curl is :func:`field_from_aux`'s field."""
    f = aux.resolved()
    r = RationalNF.symbol(R)
    two = RationalNF.const(2)
    psi = f["psi"]
    a_phi = r * r * f["mu"] / two - f["rho"] / two + (psi + diff_nf(diff_nf(psi, PHI), PHI)) / (two * r)
    a_z = f["tau"] / (two * r * r) - f["sigma"] / two
    return VectorField((NF_ZERO, a_phi, a_z), "cylindrical")


# -- gauge transformations -----------------------------------------------------------

def gauge_shift(A: VectorField, chi) -> VectorField:
    g = grad(chi, A.frame)
    return VectorField(tuple(a + b for a, b in zip(A.components, g.components)), A.frame)


def gauge_conjugate(H: DiffOperator, chi) -> DiffOperator:
    """``exp(-I*chi/hbar) H exp(I*chi/hbar)``, so that H[A] goes to H[A + grad chi].

    Expanded as ``sum_k (-I/hbar)^k ad_chi^k(H)/k!``; the series stops after
    ``degree(H)`` terms because each commutator with a function lowers the order.
    """
    from .kernel.atoms import HBAR
    chi_op = DiffOperator.scalar(_nf(chi), H.chart)
    factor = RationalNF.const(-I) / RationalNF.symbol(HBAR)
    out = H
    term = H
    k = 0
    while True:
        k += 1
        term = commutator(chi_op, term).scale(factor / k)
        if term.is_zero():
            break
        out = out + term
    return out


# -- Hamiltonians -------------------------------------------------------------------------

def hamiltonian_recipe(A, W, chart=CARTESIAN_CHART) -> OpExpr:
    """``(1/2) sum_j (p_j + A_j)^2 + W`` with Cartesian components ``A``."""
    parts = []
    for k in range(3):
        pa = op_sum(OpMom(k, chart), OpMul(as_expr(A[k])))
        parts.append(op_prod(pa, pa))
    return op_sum(op_scale(rational(1, 2), op_sum(*parts)), OpMul(as_expr(W)))


def cartesian_components_in_cylindrical(A_cyl) -> tuple:
    """Cartesian components of a 1-form given in cylindrical form, as (r, u, Z) expressions."""
    u = Sym(U)
    r = Sym(R)
    cos = (u + power(u, -1)) * rational(1, 2)
    sin = (u - power(u, -1)) * (-I_E * rational(1, 2))
    ar, aphi, az = (as_expr(a) if not isinstance(a, RationalNF) else to_expr(a) for a in A_cyl)
    return (cos * ar - sin * aphi / r, sin * ar + cos * aphi / r, az)


def cylindrical_hamiltonian_recipe(A_cyl, W) -> OpExpr:
    """The Hamiltonian in the cylindrical chart built from Cartesian momenta."""
    p = cylindrical_cartesian_momenta()
    A = cartesian_components_in_cylindrical(A_cyl)
    parts = []
    for k in range(3):
        pa = op_sum(p[k], OpMul(A[k]))
        parts.append(op_prod(pa, pa))
    W = to_expr(W) if isinstance(W, RationalNF) else as_expr(W)
    return op_sum(op_scale(rational(1, 2), op_sum(*parts)), OpMul(W))


def operator_to_cartesian(D: DiffOperator) -> DiffOperator:
    """Rewrite a cylindrical-chart operator in the Cartesian chart.

    Uses ``d_r^a = r^-a D(D-1)...(D-a+1)`` with ``D = x1 d_1 + x2 d_2``,
    ``d_phi = x1 d_2 - x2 d_1`` and ``d_Z = d_3``.
    """
    if D.chart == CARTESIAN_CHART:
        return D
    x1, x2 = RationalNF.symbol(X1), RationalNF.symbol(X2)
    Dr = DiffOperator({(1, 0, 0): x1, (0, 1, 0): x2})
    Dphi = DiffOperator({(0, 1, 0): x1, (1, 0, 0): -x2})
    one = DiffOperator.scalar(NF_ONE)
    out = DiffOperator({})
    r = RationalNF.symbol(R)
    for (a, b, c), coeff in D.terms.items():
        op = one
        for k in range(a):
            op = compose(op, Dr - DiffOperator.scalar(RationalNF.const(k)))
        for _ in range(b):
            op = compose(op, Dphi)
        if c:
            op = compose(op, DiffOperator.derivative((0, 0, c)))
        cc = scalar_to_cartesian(coeff / r ** a if a else coeff)
        out = out + DiffOperator.scalar(cc) * op
    return out


def operator_to_cylindrical(D: DiffOperator) -> DiffOperator:
    """Rewrite a Cartesian operator in the cylindrical chart."""
    if D.chart == CYLINDRICAL_CHART:
        return D
    c, s = _cos_nf(), _sin_nf()
    r = RationalNF.symbol(R)
    d1 = DiffOperator({(1, 0, 0): c, (0, 1, 0): -s / r}, CYLINDRICAL_CHART)
    d2 = DiffOperator({(1, 0, 0): s, (0, 1, 0): c / r}, CYLINDRICAL_CHART)
    d3 = DiffOperator.derivative((0, 0, 1), CYLINDRICAL_CHART)
    one = DiffOperator.scalar(NF_ONE, CYLINDRICAL_CHART)
    out = DiffOperator({}, CYLINDRICAL_CHART)
    for (a, b, cc), coeff in D.terms.items():
        op = one
        for _ in range(a):
            op = compose(op, d1)
        for _ in range(b):
            op = compose(op, d2)
        for _ in range(cc):
            op = compose(op, d3)
        out = out + DiffOperator.scalar(scalar_to_cylindrical(coeff), CYLINDRICAL_CHART) * op
    return out


__all__ = [
    "VectorField", "MagneticField", "AuxFunctions", "NotConvertible", "grad", "curl", "div",
    "closure", "to_cylindrical", "to_cartesian", "scalar_to_cartesian", "scalar_to_cylindrical",
    "field_from_aux", "aux_vector_potential", "gauge_shift", "gauge_conjugate",
    "hamiltonian_recipe", "cylindrical_hamiltonian_recipe", "cartesian_components_in_cylindrical",
    "operator_to_cartesian", "operator_to_cylindrical",
]
