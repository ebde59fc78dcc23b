"""Pointwise algebra of a 2x2 quasi-linear system ``(u, v)_t = V(u, v) (u, v)_x``.

``V = [[A, B], [C, D]]``. The discriminant ``Omega = (A - D)^2 + 4 B C`` decides
the type: hyperbolic for ``Omega > 0``, elliptic for ``Omega < 0``, parabolic on
the transition line ``Omega = 0``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import PointTypeError, SmallCoefficientError

__all__ = [
    "SystemDef", "Provenance", "PointType", "Classification", "Eigenstructure",
    "HodographCoefficients", "tolerance", "tolerance_scale", "discriminant",
    "discriminant_gradient", "classify", "char_speeds", "hodograph_speeds",
    "hodograph_pde_coefficients", "beltrami_dilation", "swap_variables",
]

DEFAULT_TOL_SCALE = 1e-9
ENTRY_NAMES = ("A", "B", "C", "D")


def tolerance_scale() -> float:
    """Relative tolerance factor; ``MIXOTYPE_TOL`` in the environment overrides it."""
    raw = os.environ.get("MIXOTYPE_TOL")
    if raw:
        value = float(raw)
        if not value > 0:
            raise ValueError("MIXOTYPE_TOL must be positive")
        return value
    return DEFAULT_TOL_SCALE


def tolerance(a, b, c, d, scale=None) -> float:
    """Scale-aware zero threshold for Omega at a point with entries a, b, c, d."""
    s = tolerance_scale() if scale is None else scale
    return s * (1.0 + abs(a) + abs(b) + abs(c) + abs(d)) ** 2


@dataclass(frozen=True)
class Provenance:
    kind: str = "matrix"            # "matrix", "hamiltonian" or "model"
    name: Optional[str] = None
    density: Optional[ex.Expr] = None

    def __str__(self):
        label = self.kind if self.name is None else f"{self.kind}:{self.name}"
        if self.density is not None:
            label += f" (h = {self.density})"
        return label


@dataclass(frozen=True)
class SystemDef:
    """Matrix entries as expressions of ``(u, v)`` plus an eager derivative cache.

    ``flux`` optionally gives ``(F, G)`` with ``u_t = F_x`` and ``v_t = G_x``; the
    evolution code uses it for a conservative discretisation. ``tl_indicator``
    optionally gives a cheaper scalar that is positive exactly where the system is
    hyperbolic (``u`` for dispersionless Boussinesq).
    """

    A: ex.Expr
    B: ex.Expr
    C: ex.Expr
    D: ex.Expr
    provenance: Provenance = field(default_factory=Provenance)
    flux: Optional[tuple] = None
    tl_indicator: Optional[ex.Expr] = None
    partials: dict = field(init=False, repr=False, compare=False)
    omega: ex.Expr = field(init=False, repr=False, compare=False)
    omega_u: ex.Expr = field(init=False, repr=False, compare=False)
    omega_v: ex.Expr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ENTRY_NAMES:
            object.__setattr__(self, name, ex.as_expr(getattr(self, name)))
        if self.flux is not None:
            object.__setattr__(self, "flux", tuple(ex.as_expr(f) for f in self.flux))
        if self.tl_indicator is not None:
            object.__setattr__(self, "tl_indicator", ex.as_expr(self.tl_indicator))
        partials = {}
        for name in ENTRY_NAMES:
            for var in ("u", "v"):
                partials[f"{name}_{var}"] = ex.differentiate(getattr(self, name), var)
        object.__setattr__(self, "partials", partials)
        a_d = self.A - self.D
        omega = a_d * a_d + 4 * (self.B * self.C)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega_u", ex.differentiate(omega, "u"))
        object.__setattr__(self, "omega_v", ex.differentiate(omega, "v"))

    @property
    def name(self):
        return self.provenance.name or self.provenance.kind

    def entries(self, p):
        """``(A, B, C, D)`` at ``p = (u, v)``."""
        return tuple(ex.evaluate(getattr(self, n), p) for n in ENTRY_NAMES)

    def entries_array(self, u, v):
        return tuple(ex.evaluate_array(getattr(self, n), u, v) for n in ENTRY_NAMES)

    def partial(self, name, p):
        """Value of a cached first partial such as ``'B_u'`` at ``p``."""
        return ex.evaluate(self.partials[name], p)

    def matrix(self, p) -> np.ndarray:
        a, b, c, d = self.entries(p)
        return np.array([[a, b], [c, d]])

    def tolerance(self, p, scale=None) -> float:
        return tolerance(*self.entries(p), scale=scale)


class PointType(enum.Enum):
    HYPERBOLIC = "Hyperbolic"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    DEGENERATE_DIAGONAL = "DegenerateDiagonal"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Classification:
    kind: PointType
    omega: float
    tol: float


@dataclass(frozen=True)
class Eigenstructure:
    lambda_plus: complex
    lambda_minus: complex
    mu_plus: Optional[complex]
    mu_minus: Optional[complex]
    omega: float
    eigenvector_on_tl: Optional[tuple] = None

    @property
    def on_transition(self):
        return self.eigenvector_on_tl is not None or self.lambda_plus == self.lambda_minus


@dataclass(frozen=True)
class HodographCoefficients:
    """Coefficients of ``c_vv f_vv + c_uv f_uv + c_uu f_uu + c_u f_u + c_v f_v = 0``.

    ``t_equation`` holds them for the hodograph time ``t(u, v)`` and ``q_equation``
    for a conserved density ``Q(u, v)``; both share the principal part.
    """

    t_equation: tuple
    q_equation: tuple
    symbol_discriminant: float


def discriminant(sys: SystemDef, p) -> float:
    a, b, c, d = sys.entries(p)
    return (a - d) ** 2 + 4.0 * b * c


def discriminant_gradient(sys: SystemDef, p):
    """``(Omega_u, Omega_v)`` at ``p``."""
    return ex.evaluate(sys.omega_u, p), ex.evaluate(sys.omega_v, p)


def _type_from_entries(a, b, c, d, tol):
    omega = (a - d) ** 2 + 4.0 * b * c
    if omega > tol:
        kind = PointType.HYPERBOLIC
    elif omega < -tol:
        kind = PointType.ELLIPTIC
    elif abs(b) <= tol and abs(c) <= tol:
        kind = PointType.DEGENERATE_DIAGONAL
    else:
        kind = PointType.PARABOLIC
    return kind, omega


def classify(sys: SystemDef, p, tol=None) -> Classification:
    a, b, c, d = sys.entries(p)
    if tol is None:
        tol = tolerance(a, b, c, d)
    elif not tol > 0:
        raise ValueError("tol must be positive")
    kind, omega = _type_from_entries(a, b, c, d, tol)
    return Classification(kind, omega, tol)


def _root(omega, tol):
    # Omega inside the tolerance band is treated as exactly zero
    if abs(omega) <= tol:
        return 0j
    return complex(math.sqrt(omega)) if omega > 0 else 1j * math.sqrt(-omega)


def tl_eigenvector(a, b, c, d):
    """Unit eigenvector of V for the double eigenvalue on the transition line.

    Solves ``(A - D) y1 + 2 B y2 = 0``; falls back to the C-row form when B is
    tiny. Returns None when V is (numerically) a multiple of the identity.
    """
    sigma = 0.5 * (a - d)
    cands = [(b, -sigma), (sigma, c)]
    y = max(cands, key=lambda w: math.hypot(*w))
    norm = math.hypot(*y)
    if norm == 0:
        return None
    return (y[0] / norm + 0.0, y[1] / norm + 0.0)


def char_speeds(sys: SystemDef, p, tol=None) -> Eigenstructure:
    a, b, c, d = sys.entries(p)
    if tol is None:
        tol = tolerance(a, b, c, d)
    omega = (a - d) ** 2 + 4.0 * b * c
    r = _root(omega, tol)
    lp = 0.5 * ((a + d) + r)
    lm = 0.5 * ((a + d) - r)
    if abs(b) > tol:
        mp = ((a - d) + r) / (2.0 * b)
        mm = ((a - d) - r) / (2.0 * b)
    else:
        mp = mm = None
    vec = tl_eigenvector(a, b, c, d) if abs(omega) <= tol else None
    return Eigenstructure(lp, lm, mp, mm, omega, vec)


def hodograph_speeds(sys: SystemDef, p, tol=None):
    """``(mu_plus, mu_minus) = (A - D +- sqrt(Omega)) / (2B)``."""
    a, b, c, d = sys.entries(p)
    if tol is None:
        tol = tolerance(a, b, c, d)
    if abs(b) <= tol:
        raise SmallCoefficientError(
            f"B = {b:.3e} vanishes at {tuple(p)}; use swap_variables() and the C entry")
    omega = (a - d) ** 2 + 4.0 * b * c
    r = _root(omega, tol)
    return ((a - d) + r) / (2.0 * b), ((a - d) - r) / (2.0 * b)


def hodograph_pde_coefficients(sys: SystemDef, p) -> HodographCoefficients:
    a, b, c, d = sys.entries(p)
    pa = {k: ex.evaluate(e, p) for k, e in sys.partials.items()}
    t_eq = (c, a - d, -b, -(pa["B_u"] + pa["D_v"]), pa["A_u"] + pa["C_v"])
    q_eq = (c, a - d, -b, -(pa["B_u"] - pa["A_v"]), -pa["D_u"] + pa["C_v"])
    symbol = t_eq[1] ** 2 - 4.0 * t_eq[0] * t_eq[2]
    return HodographCoefficients(t_eq, q_eq, symbol)


def beltrami_dilation(sys: SystemDef, p, tol=None):
    """Complex dilation ``mu = (1 + i lam) / (1 - i lam)`` and its modulus.

    ``lam = (A + D + sqrt(Omega)) / 2`` with the principal root. Only defined in the
    elliptic domain and on the transition line.
    """
    a, b, c, d = sys.entries(p)
    if tol is None:
        tol = tolerance(a, b, c, d)
    omega = (a - d) ** 2 + 4.0 * b * c
    if omega > tol:
        raise PointTypeError(f"point {tuple(p)} is hyperbolic (Omega = {omega:.6g})")
    lam = 0.5 * ((a + d) + _root(omega, tol))
    mu = (1 + 1j * lam) / (1 - 1j * lam)
    return mu, abs(mu)


def swap_variables(sys: SystemDef) -> SystemDef:
    """The same system written for ``(u', v') = (v, u)``.

    The new matrix is ``[[D, C], [B, A]]`` with ``u`` and ``v`` exchanged in every
    entry, so operations that need ``B != 0`` can run on the original ``C``.
    """
    sw = ex.swap_uv
    flux = None if sys.flux is None else (sw(sys.flux[1]), sw(sys.flux[0]))
    ind = None if sys.tl_indicator is None else sw(sys.tl_indicator)
    prov = sys.provenance
    density = None if prov.density is None else sw(prov.density)
    name = f"{prov.name or prov.kind}:swapped"
    return SystemDef(sw(sys.D), sw(sys.C), sw(sys.B), sw(sys.A),
                     Provenance(prov.kind, name, density), flux, ind)


def omega_array(sys: SystemDef, u, v):
    a, b, c, d = sys.entries_array(u, v)
    return (a - d) ** 2 + 4.0 * b * c
