"""Bundled systems and the Hamiltonian-density builder.

A Hamiltonian density ``h(u, v)`` generates ``u_t = (h_v)_x, v_t = (h_u)_x``,
i.e. ``A = D = h_uv``, ``B = h_vv``, ``C = h_uu`` and ``Omega = 4 h_uu h_vv``.

Named models are addressable by string id::

    dnls                      boussinesq               boussinesq:c=3
    toda                      power_wave:alpha=1/3     gas:P=(v-1)^4
    nlw:F2=v^2/2,F3=u^3/6     h1:F1=v^4/12             hamiltonian:h=v^2/2+u^3/6
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import expr as ex
from .charflow import DeltaT
from .errors import ModelError, NotOnTransitionLine
from .syscore import Provenance, SystemDef, tolerance

__all__ = [
    "HamiltonianDensity", "from_hamiltonian", "dnls", "boussinesq",
    "boussinesq_shifted", "gas_dynamics", "nonlinear_wave", "power_wave",
    "h1_family", "toda", "hamiltonian_delta_t", "exponent_prediction",
    "model_from_id", "MODEL_IDS",
]

MAX_ORDER = 5
PURE_U_ORDER = 6

DNLS_DENSITY = "v^2/2 + v*u^2/2"
DB_DENSITY = "v^2/2 + u^3/6"


@dataclass(frozen=True)
class HamiltonianDensity:
    """Density ``h`` with every partial derivative up to total order 5 cached.

    Pure ``u`` derivatives are cached up to order 6 for
    :func:`exponent_prediction`. ``d('uuv')`` returns the expression for
    ``h_uuv``; ``at('uuv', p)`` its value.
    """

    h: ex.Expr
    partials: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = ex.as_expr(self.h)
        object.__setattr__(self, "h", h)
        table = {"": h}
        # derivatives are taken u-first; mixed partials of smooth h commute
        for total in range(1, MAX_ORDER + 1):
            for nu in range(total, -1, -1):
                nv = total - nu
                key = "u" * nu + "v" * nv
                if nv > 0:
                    parent = "u" * nu + "v" * (nv - 1)
                    table[key] = ex.differentiate(table[parent], "v")
                else:
                    table[key] = ex.differentiate(table["u" * (nu - 1)], "u")
        table["u" * PURE_U_ORDER] = ex.differentiate(table["u" * (PURE_U_ORDER - 1)], "u")
        object.__setattr__(self, "partials", table)

    def d(self, name: str) -> ex.Expr:
        key = "".join(sorted(name))  # 'vu' -> 'uv'
        try:
            return self.partials[key]
        except KeyError:
            raise KeyError(f"derivative h_{name} is not cached") from None

    def at(self, name: str, p) -> float:
        return ex.evaluate(self.d(name), p)

    def __str__(self):
        return str(self.h)


def _density(h) -> HamiltonianDensity:
    return h if isinstance(h, HamiltonianDensity) else HamiltonianDensity(ex.as_expr(h))


def from_hamiltonian(h, name: Optional[str] = None, kind="hamiltonian",
                     tl_indicator=None) -> SystemDef:
    """System ``[[h_uv, h_vv], [h_uu, h_uv]]`` in conservation form ``(h_v, h_u)``."""
    dens = _density(h)
    prov = Provenance(kind, name, dens.h)
    return SystemDef(dens.d("uv"), dens.d("vv"), dens.d("uu"), dens.d("uv"),
                     prov, flux=(dens.d("v"), dens.d("u")), tl_indicator=tl_indicator)


def dnls() -> SystemDef:
    """Dispersionless NLS / one-layer Benney: ``u_t = u u_x + v_x, v_t = v u_x + u v_x``."""
    return from_hamiltonian(DNLS_DENSITY, "dnls", "model", tl_indicator=ex.V)


def boussinesq() -> SystemDef:
    """Dispersionless Boussinesq ``u_t = v_x, v_t = u u_x``; transition line ``u = 0``."""
    return from_hamiltonian(DB_DENSITY, "boussinesq", "model", tl_indicator=ex.U)


def boussinesq_shifted(c) -> SystemDef:
    """dB with ``F3 = u^3/6 + c^2 u^2/2``; the transition line moves to ``u = -c^2``."""
    c2 = ex.const(c) * ex.const(c)
    h = ex.parse(DB_DENSITY) + c2 * ex.U * ex.U / 2
    return from_hamiltonian(h, f"boussinesq:c={c}", "model", tl_indicator=ex.U + c2)


def gas_dynamics(P) -> SystemDef:
    """Isentropic gas dynamics with pressure ``P(rho)``, ``rho`` carried by ``v``.

    ``u_t = u u_x + P'(rho)/rho rho_x``, ``rho_t = (u rho)_x``; time runs backwards
    relative to the usual convention, which changes neither Omega nor the
    transition line ``P'(rho) = 0``.
    """
    P = ex.as_expr(P)
    if "u" in P.variables:
        raise ModelError("pressure must be a function of v (the density) only")
    dP = ex.differentiate(P, "v")
    return SystemDef(ex.U, dP / ex.V, ex.V, ex.U,
                     Provenance("model", f"gas:P={P}", None), tl_indicator=dP)


def nonlinear_wave(F2, F3) -> SystemDef:
    """``u_t = F2'(v)_x, v_t = F3'(u)_x``, i.e. matrix ``[[0, F2''(v)], [F3''(u), 0]]``."""
    F2, F3 = ex.as_expr(F2), ex.as_expr(F3)
    if "u" in F2.variables or "v" in F3.variables:
        raise ModelError("F2 must depend on v only and F3 on u only")
    return from_hamiltonian(F2 + F3, f"nlw:F2={F2},F3={F3}", "model")


def toda() -> SystemDef:
    """Dispersionless Toda ``u_tt = exp(u)_xx``; hyperbolic everywhere."""
    sys = nonlinear_wave("v^2/2", "exp(u)")
    return SystemDef(sys.A, sys.B, sys.C, sys.D,
                     Provenance("model", "toda", sys.provenance.density), sys.flux)


def h1_family(F1) -> SystemDef:
    """Density ``F1(v) + v u^2/2``: matrix ``[[u, F1''(v)], [v, u]]``."""
    F1 = ex.as_expr(F1)
    if "u" in F1.variables:
        raise ModelError("F1 must depend on v only")
    return from_hamiltonian(F1 + ex.V * ex.U * ex.U / 2, f"h1:F1={F1}", "model")


def _check_alpha(alpha) -> Fraction:
    a = Fraction(alpha)
    ok = a > 0 and (
        (a.denominator == 1 and a.numerator % 2 == 1)
        or (a.numerator == 1 and a.denominator % 2 == 1))
    if not ok:
        raise ModelError(f"alpha must be 2n+1 or 1/(2n+1), got {a}")
    return a


def power_wave(alpha) -> SystemDef:
    """``u_t = v_x, v_t = v^alpha u_x``; transition line ``v = 0``.

    ``alpha = 1`` is ``(log v)_tt = v_xx``.
    """
    a = _check_alpha(alpha)
    return SystemDef(ex.const(0), ex.const(1), ex.power(ex.V, a), ex.const(0),
                     Provenance("model", f"power_wave:alpha={a}", None), tl_indicator=ex.V)


def _tol_at(dens, p):
    return tolerance(dens.at("uv", p), dens.at("vv", p), dens.at("uu", p), dens.at("uv", p))


def _require_uu_branch(dens, p, tol):
    if abs(dens.at("uu", p)) > tol:
        raise NotOnTransitionLine(f"h_uu = {dens.at('uu', p):.3e} at {tuple(p)}")
    if abs(dens.at("vv", p)) <= tol:
        raise NotOnTransitionLine(f"h_vv vanishes at {tuple(p)}: not on the h_uu = 0 branch")


def hamiltonian_delta_t(h, p, tol=None) -> DeltaT:
    """Slope mismatch ``h_uuu / h_uuv`` on the branch ``h_uu = 0, h_vv != 0``."""
    dens = _density(h)
    if tol is None:
        tol = _tol_at(dens, p)
    _require_uu_branch(dens, p, tol)
    num, den = dens.at("uuu", p), dens.at("uuv", p)
    if abs(den) <= tol:
        if abs(num) <= tol:
            return DeltaT(math.nan, determined=False)
        return DeltaT(math.copysign(math.inf, num * (den or 1.0)), at_infinity=True)
    if abs(num) <= tol:
        return DeltaT(0.0)
    return DeltaT(num / den)


def exponent_prediction(h, p, tol=None) -> Optional[Fraction]:
    """Predicted contact law ``v - v0 ~ (u - u0)^e`` for characteristics at ``p``.

    ``e = m/2`` with ``m`` the order of the first pure-``u`` derivative (``m >= 3``)
    that does not vanish at ``p``; ``3/2`` in the generic case. Returns None when
    all of them vanish up to order 6 (the dNLS-like degenerate case).
    """
    dens = _density(h)
    if tol is None:
        tol = _tol_at(dens, p)
    _require_uu_branch(dens, p, tol)
    for m in range(3, PURE_U_ORDER + 1):
        if abs(dens.at("u" * m, p)) > tol:
            return Fraction(m, 2)
    return None


# --- model ids ---------------------------------------------------------------

MODEL_IDS = ("dnls", "boussinesq", "toda", "boussinesq:c=", "power_wave:alpha=",
             "gas:P=", "nlw:F2=,F3=", "h1:F1=", "hamiltonian:h=")


def _params(text, allowed):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ModelError(f"bad model parameter {item!r}; expected {', '.join(allowed)}")
        out[key] = value.strip()
    return out


def _number(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ModelError(f"not a number: {text!r}") from None


def model_from_id(model_id: str) -> SystemDef:
    """Build a bundled system from its string id (see module docstring)."""
    name, _, rest = model_id.strip().partition(":")
    name = name.strip()
    if name == "dnls" and not rest:
        return dnls()
    if name in ("boussinesq", "dB", "db"):
        p = _params(rest, ("c",))
        return boussinesq_shifted(_number(p["c"])) if "c" in p else boussinesq()
    if name == "toda" and not rest:
        return toda()
    if name == "power_wave":
        p = _params(rest, ("alpha",))
        if "alpha" not in p:
            raise ModelError("power_wave needs alpha=")
        try:
            return power_wave(Fraction(p["alpha"]))
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"bad alpha {p['alpha']!r}") from None
    if name == "gas":
        p = _params(rest, ("P",))
        if "P" not in p:
            raise ModelError("gas needs P=")
        return gas_dynamics(ex.parse(p["P"]))
    if name == "nlw":
        p = _params(rest, ("F2", "F3"))
        if set(p) != {"F2", "F3"}:
            raise ModelError("nlw needs F2= and F3=")
        return nonlinear_wave(ex.parse(p["F2"]), ex.parse(p["F3"]))
    if name == "h1":
        p = _params(rest, ("F1",))
        if "F1" not in p:
            raise ModelError("h1 needs F1=")
        return h1_family(ex.parse(p["F1"]))
    if name == "hamiltonian":
        p = _params(rest, ("h",))
        if "h" not in p:
            raise ModelError("hamiltonian needs h=")
        return from_hamiltonian(ex.parse(p["h"]))
    raise ModelError(f"unknown model id {model_id!r}")
