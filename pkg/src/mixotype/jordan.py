"""Jordan structure of the system matrix on the transition line.

On ``Omega = 0`` the matrix has the double eigenvalue ``lam = (A + D)/2`` and
``N = V - lam I`` satisfies ``N^2 = (Omega/4) I = 0``. A two-parameter family of
matrices ``P`` conjugates ``V`` to the block ``[[lam, 1], [0, lam]]``.

The off-diagonal root in ``P`` is taken as ``sigma = (A - D)/2``, which squares
to ``-BC`` on the line. Its sign is forced: the second row of ``P`` must be a
left null vector of ``N``, and only the signed value achieves that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import DegenerateDiagonal, NotOnTransitionLine, SmallCoefficientError
from .syscore import SystemDef, tolerance

__all__ = ["JordanData", "TransitionMatrix", "v0_on_transition",
           "conjugating_matrix", "integrating_factor_residual"]

NILPOTENT_REL = 1e-6


@dataclass(frozen=True)
class TransitionMatrix:
    matrix: np.ndarray
    lam: float
    sigma: float            # (A - D)/2, the signed square root of -BC
    sign: int               # sign convention used for sqrt(-BC): +1 or -1


@dataclass(frozen=True)
class JordanData:
    lam: float
    v0: np.ndarray
    p_matrix: np.ndarray
    branch: str             # "Cnonzero" or "Czero-Bnonzero"
    a: float
    b: float
    residual: float         # max |P V0 P^-1 - J| / max(1, |lam|)

    @property
    def jordan_block(self):
        return np.array([[self.lam, 1.0], [0.0, self.lam]])


def _inv2(m):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def v0_on_transition(sys: SystemDef, p, tol=None) -> TransitionMatrix:
    """``V(p)`` written as ``lam I + N`` with ``N`` nilpotent."""
    a, b, c, d = sys.entries(p)
    if tol is None:
        tol = tolerance(a, b, c, d)
    omega = (a - d) ** 2 + 4.0 * b * c
    if abs(omega) > tol:
        raise NotOnTransitionLine(f"Omega = {omega:.6g} at {tuple(p)} (tol {tol:.3g})")
    if abs(b) <= tol and abs(c) <= tol:
        raise DegenerateDiagonal(f"B and C both vanish at {tuple(p)}")
    lam = 0.5 * (a + d)
    n = np.array([[a - lam, b], [c, d - lam]])
    n2 = n @ n
    if np.max(np.abs(n2)) > NILPOTENT_REL * np.max(np.abs(n)) ** 2:
        raise NotOnTransitionLine(f"V - lam I is not nilpotent at {tuple(p)}")
    sigma = 0.5 * (a - d)
    return TransitionMatrix(np.array([[a, b], [c, d]]), lam, sigma, 1 if sigma >= 0 else -1)


def conjugating_matrix(sys: SystemDef, p, a: float, b: float, tol=None) -> JordanData:
    """Member ``P(a, b)`` of the conjugating family and the conjugation residual."""
    if a == 0:
        raise ValueError("free parameter a must be non-zero")
    tm = v0_on_transition(sys, p, tol)
    _, bb, cc, _ = sys.entries(p)
    if tol is None:
        tol = sys.tolerance(p)
    s = tm.sigma
    if abs(cc) > tol:
        branch = "Cnonzero"
        pm = a * np.array([[-b, 1.0 + s * b / cc], [cc, -s]])
    else:
        branch = "Czero-Bnonzero"
        pm = a * np.array([[1.0, b], [0.0, bb]])
    det = pm[0, 0] * pm[1, 1] - pm[0, 1] * pm[1, 0]
    if abs(det) <= 1e-12 * np.max(np.abs(pm)) ** 2:
        raise DegenerateDiagonal(f"P is singular at {tuple(p)}")
    conj = pm @ tm.matrix @ _inv2(pm)
    jb = np.array([[tm.lam, 1.0], [0.0, tm.lam]])
    resid = float(np.max(np.abs(conj - jb)) / max(1.0, abs(tm.lam)))
    return JordanData(tm.lam, tm.matrix, pm, branch, float(a), float(b), resid)


def integrating_factor_residual(sys: SystemDef, a, b, p, tol=None):
    """Residuals of the two compatibility conditions for Jordan-variable factors.

    ``r1 = (a b)_v - (a + a s b / C)_u`` and ``r2 = a_v - (a s)_u`` with
    ``s = +-sqrt(-BC)``, the sign matching ``(A - D)/2`` at ``p``. Both vanish
    when ``a``, ``b`` are valid integrating factors.
    """
    a, b = ex.as_expr(a), ex.as_expr(b)
    av, bv, cv, dv = sys.entries(p)
    if tol is None:
        tol = tolerance(av, bv, cv, dv)
    if abs(cv) <= tol:
        raise SmallCoefficientError(
            f"C = {cv:.3e} at {tuple(p)}: the conditions are written for C != 0")
    root = ex.func("sqrt", ex.neg(sys.B * sys.C))
    s = root if av - dv >= 0 else ex.neg(root)
    d = ex.differentiate
    r1 = d(a * b, "v") - d(a + a * s * b / sys.C, "u")
    r2 = d(a, "v") - d(a * s, "u")
    # evaluate() raises DomainError instead of ever returning NaN
    return ex.evaluate(r1, p), ex.evaluate(r2, p)
