"""Simple waves, the transition line, and crossing verdicts in the hodograph plane.

A simple wave of branch ``+`` or ``-`` is an integral curve of
``dv/du = -mu_pm``. It is traced in arc length along the direction field

    d1 = (2B, -(A - D) -+ r)      or the parallel      d2 = (A - D -+ r, 2C)

with ``r = sqrt(Omega)``. Whichever has the larger norm is used, so the trace
continues through points where ``B = 0``. Near the transition line the
arc-length field has a square-root singularity. The last stretch is therefore
integrated in the variable ``w = sqrt(Omega)``, in which it is regular.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import (ConvergenceError, DegenerateDiagonal, DegenerateTransitionPoint,
                     DomainError, FitError, NotOnTransitionLine, PointTypeError)
from .syscore import SystemDef, tolerance

__all__ = [
    "Bounds", "HodographCurve", "DeltaT", "CrossingVerdict", "VerdictKind",
    "trace_simple_wave", "trace_transition_line", "delta_t", "crossing_verdict",
    "contact_exponent", "verdict_tolerance",
]

LANDING_STEPS = 40
LANDING_REACH = 10        # start landing when the line is this many steps away
MAX_POINTS = 200_000
ACCEL_THRESHOLD = -0.05


@dataclass(frozen=True)
class Bounds:
    umin: float
    umax: float
    vmin: float
    vmax: float

    @classmethod
    def around(cls, p, half_width):
        return cls(p[0] - half_width, p[0] + half_width, p[1] - half_width, p[1] + half_width)

    def contains(self, p):
        return self.umin <= p[0] <= self.umax and self.vmin <= p[1] <= self.vmax

    def excess(self, p):
        """Largest signed distance outside the box (negative inside)."""
        return max(p[0] - self.umax, self.umin - p[0], p[1] - self.vmax, self.vmin - p[1])

    def exit_fraction(self, p, q):
        """Fraction of the segment p -> q that stays inside (1.0 if q is inside)."""
        frac = 1.0
        for i, (lo, hi) in enumerate(((self.umin, self.umax), (self.vmin, self.vmax))):
            dq = q[i] - p[i]
            if q[i] > hi and dq > 0:
                frac = min(frac, (hi - p[i]) / dq)
            elif q[i] < lo and dq < 0:
                frac = min(frac, (lo - p[i]) / dq)
        return max(frac, 0.0)


def _bounds(b) -> Bounds:
    return b if isinstance(b, Bounds) else Bounds(*b)


@dataclass(frozen=True)
class HodographCurve:
    points: np.ndarray          # shape (n, 2), columns u, v
    arc: np.ndarray             # cumulative arc length
    omega: np.ndarray
    branch: str                 # "plus", "minus" or "transition"
    step: float
    termination: str            # reached-bound | hit-transition-line | domain-error
                                # | step-underflow | closed-loop

    @property
    def u(self):
        return self.points[:, 0]

    @property
    def v(self):
        return self.points[:, 1]

    @property
    def end(self):
        return tuple(self.points[-1])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("s,u,v,omega\n")
        for s, (u, v), om in zip(self.arc, self.points, self.omega):
            out.write(f"{float(s)!r},{float(u)!r},{float(v)!r},{float(om)!r}\n")
        return out.getvalue()


def _make_curve(sys, pts, branch, step, termination):
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    om = np.array([_omega(sys, p) for p in pts])
    return HodographCurve(pts, arc, om, branch, step, termination)


# --- pointwise helpers -------------------------------------------------------

def _omega(sys, p):
    a, b, c, d = sys.entries(p)
    return (a - d) ** 2 + 4.0 * b * c


def _fd_gradient(sys, p, h=None):
    if h is None:
        h = 1e-7 * (1.0 + abs(p[0]) + abs(p[1]))
    gu = (_omega(sys, (p[0] + h, p[1])) - _omega(sys, (p[0] - h, p[1]))) / (2 * h)
    gv = (_omega(sys, (p[0], p[1] + h)) - _omega(sys, (p[0], p[1] - h))) / (2 * h)
    return gu, gv


def _gradient(sys, p):
    """Gradient of Omega; central differences where the exact one is undefined."""
    try:
        return ex.evaluate(sys.omega_u, p), ex.evaluate(sys.omega_v, p)
    except DomainError:
        return _fd_gradient(sys, p)


def _direction(sys, p, branch, r=None):
    """Unnormalised tangent of the simple wave of ``branch`` (+1/-1) at ``p``."""
    a, b, c, d = sys.entries(p)
    if r is None:
        omega = (a - d) ** 2 + 4.0 * b * c
        if omega < -tolerance(a, b, c, d):
            raise PointTypeError(f"point {tuple(p)} is elliptic")
        r = math.sqrt(max(omega, 0.0))
    d1 = (2.0 * b, -(a - d) - branch * r)
    d2 = ((a - d) - branch * r, 2.0 * c)
    n1, n2 = math.hypot(*d1), math.hypot(*d2)
    vec, n = (d1, n1) if n1 >= n2 else (d2, n2)
    if n == 0.0:
        raise DegenerateDiagonal(f"no characteristic direction at {tuple(p)}")
    return vec[0] / n, vec[1] / n


def _oriented(t, ref):
    return t if t[0] * ref[0] + t[1] * ref[1] >= 0 else (-t[0], -t[1])


# --- simple waves ------------------------------------------------------------

def _rk4(sys, p, h, branch, ref):
    def f(q):
        return _oriented(_direction(sys, q, branch), ref)
    k1 = f(p)
    k2 = f((p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]))
    k3 = f((p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]))
    k4 = f((p[0] + h * k3[0], p[1] + h * k3[1]))
    q = (p[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
         p[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))
    return q, k1


def _project(sys, p, iters=8):
    q = p
    for _ in range(iters):
        f = _omega(sys, q)
        if f == 0.0:
            break
        gu, gv = _gradient(sys, q)
        g2 = gu * gu + gv * gv
        if g2 == 0.0:
            break
        q2 = (q[0] - f * gu / g2, q[1] - f * gv / g2)
        try:
            f2 = _omega(sys, q2)
        except DomainError:
            break
        if f2 != 0.0 and (f2 > 0) != (f > 0) and abs(f2) >= 0.5 * abs(f):
            # Newton oscillates on non-smooth Omega (v^(1/3)); bisect the bracket
            m = _bisect(sys, q, f, q2, f2)
            return q if m is None else m
        if abs(f2) >= abs(f):
            break
        q = q2
    return q


def _land(sys, p, branch, ref, bounds):
    """Integrate from ``p`` to the transition line in ``w = sqrt(Omega)``.

    Along the wave ``dw/ds = (grad Omega . T) / (2w)``, so ``dp/dw = 2w T / (grad
    Omega . T)``. That field is regular at ``w = 0`` whenever the wave reaches the
    line. Returns the landing points, or None if the wave turns away.
    """
    w0 = math.sqrt(max(_omega(sys, p), 0.0))
    if w0 == 0.0:
        return [p]

    def f(q, w):
        t = _oriented(_direction(sys, q, branch, r=w), ref)
        gu, gv = _gradient(sys, q)
        rate = gu * t[0] + gv * t[1]
        if not rate < 0:
            raise FitError("wave does not approach the transition line")
        return 2 * w * t[0] / rate, 2 * w * t[1] / rate

    h = -w0 / LANDING_STEPS
    q, w, out = p, w0, []
    try:
        for i in range(LANDING_STEPS):
            if i < LANDING_STEPS - 1:
                k1 = f(q, w)
                k2 = f((q[0] + h / 2 * k1[0], q[1] + h / 2 * k1[1]), w + h / 2)
                k3 = f((q[0] + h / 2 * k2[0], q[1] + h / 2 * k2[1]), w + h / 2)
                k4 = f((q[0] + h * k3[0], q[1] + h * k3[1]), w + h)
                q = (q[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                     q[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))
            else:
                # Ralston's third-order rule keeps every stage off w = 0
                k1 = f(q, w)
                k2 = f((q[0] + h / 2 * k1[0], q[1] + h / 2 * k1[1]), w + h / 2)
                k3 = f((q[0] + 0.75 * h * k2[0], q[1] + 0.75 * h * k2[1]), w + 0.75 * h)
                q = (q[0] + h / 9 * (2 * k1[0] + 3 * k2[0] + 4 * k3[0]),
                     q[1] + h / 9 * (2 * k1[1] + 3 * k2[1] + 4 * k3[1]))
            w = w0 * (LANDING_STEPS - 1 - i) / LANDING_STEPS
            if not bounds.contains(q):
                return None
            out.append(q)
    except (FitError, DomainError, PointTypeError, ZeroDivisionError):
        return None
    out[-1] = _project(sys, out[-1])
    return out


def _hit_boundary(sys, p, h, sgn, t, bounds, iters=60):
    """Partial RK4 step from ``p`` that ends on the boundary (Illinois regula falsi)."""
    lo, flo = 0.0, bounds.excess(p)
    hi = h
    q_hi, _ = _rk4(sys, p, hi, sgn, t)
    fhi = bounds.excess(q_hi)
    side = 0
    for _ in range(iters):
        hb = hi - fhi * (hi - lo) / (fhi - flo)
        q, _ = _rk4(sys, p, hb, sgn, t)
        f = bounds.excess(q)
        if abs(f) <= 1e-14 * (1.0 + abs(q[0]) + abs(q[1])):
            return q
        if f > 0:
            hi, fhi, q_hi = hb, f, q
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = hb, f
            if side == -1:
                fhi *= 0.5
            side = -1
    return q


def trace_simple_wave(sys: SystemDef, start, branch: str, bounds, step: float,
                      sense: int = 1, min_step: Optional[float] = None) -> HodographCurve:
    """Trace the ``plus`` or ``minus`` simple wave through ``start``.

    ``sense=+1`` starts toward decreasing Omega (toward the transition line),
    ``sense=-1`` away from it. The trace stops at the bounds, on landing at the
    transition line, on a domain error, or when the step underflows.
    """
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    if not step > 0:
        raise ValueError("step must be positive")
    bounds = _bounds(bounds)
    sgn = 1 if branch == "plus" else -1
    p = (float(start[0]), float(start[1]))
    a, b, c, d = sys.entries(p)
    tol = tolerance(a, b, c, d)
    if (a - d) ** 2 + 4 * b * c <= tol:
        raise PointTypeError(f"start {p} is not strictly hyperbolic")
    if min_step is None:
        min_step = step * 1e-9
    t0 = _direction(sys, p, sgn)
    gu, gv = _gradient(sys, p)
    toward = gu * t0[0] + gv * t0[1] <= 0
    ref = t0 if toward == (sense > 0) else (-t0[0], -t0[1])

    pts = [p]
    h = step
    termination = None
    while termination is None:
        if len(pts) > MAX_POINTS:
            raise ConvergenceError(f"simple wave exceeded {MAX_POINTS} points")
        om = _omega(sys, p)
        t = _oriented(_direction(sys, p, sgn), ref)
        gu, gv = _gradient(sys, p)
        rate = gu * t[0] + gv * t[1]
        if rate < 0 and om / -rate <= LANDING_REACH * step:
            landing = _land(sys, p, sgn, t, bounds)
            if landing is not None:
                pts.extend(landing)
                termination = "hit-transition-line"
                break
        try:
            q, k1 = _rk4(sys, p, h, sgn, t)
            ok = _omega(sys, q) > tolerance(*sys.entries(q))
        except PointTypeError:
            ok = False
        except DomainError:
            if h <= min_step:
                termination = "domain-error"
                break
            ok = False
        if not ok:
            h *= 0.5
            if h < min_step:
                termination = "step-underflow"
            continue
        frac = bounds.exit_fraction(p, q)
        if frac < 1.0:
            q = _hit_boundary(sys, p, h, sgn, t, bounds)
            pts.append(q)
            termination = "reached-bound"
            break
        pts.append(q)
        ref = (q[0] - p[0], q[1] - p[1])
        p = q
        h = min(step, 2 * h)
    return _make_curve(sys, pts, branch, step, termination)


# --- transition line ---------------------------------------------------------

def _bisect(sys, qa, fa, qb, fb, iters=200):
    for _ in range(iters):
        m = ((qa[0] + qb[0]) / 2, (qa[1] + qb[1]) / 2)
        fm = _omega(sys, m)
        if abs(fm) <= tolerance(*sys.entries(m)) or m in (qa, qb):
            return m
        if (fm > 0) == (fa > 0):
            qa, fa = m, fm
        else:
            qb, fb = m, fm
    return None


def _polish(sys, q, f, iters=3):
    """A few extra Newton steps, kept only while they reduce |Omega|."""
    for _ in range(iters):
        if f == 0.0:
            break
        try:
            gu, gv = _gradient(sys, q)
            g2 = gu * gu + gv * gv
            if g2 == 0.0 or not math.isfinite(g2):
                break
            q2 = (q[0] - f * gu / g2, q[1] - f * gv / g2)
            f2 = _omega(sys, q2)
        except DomainError:
            break
        if not abs(f2) < abs(f):
            break
        q, f = q2, f2
    return q


def _correct(sys, p, radius):
    """Newton projection of ``p`` onto Omega = 0 with a bisection fallback.

    Returns ``(point, iterations)`` or ``(None, iterations)``.
    """
    q = p
    try:
        f = _omega(sys, q)
    except DomainError:
        return None, 0
    for it in range(60):
        if abs(f) <= tolerance(*sys.entries(q)):
            return _polish(sys, q, f), it
        gu, gv = _gradient(sys, q)
        g2 = gu * gu + gv * gv
        if g2 == 0.0 or not math.isfinite(g2):
            gu, gv = _fd_gradient(sys, q, 1e-4 * max(radius, 1e-8))
            g2 = gu * gu + gv * gv
            if g2 == 0.0:
                return None, it
        q2 = (q[0] - f * gu / g2, q[1] - f * gv / g2)
        try:
            f2 = _omega(sys, q2)
        except DomainError:
            return None, it
        if f2 != 0.0 and (f2 > 0) != (f > 0) and abs(f2) >= 0.5 * abs(f):
            # Newton is overshooting (non-smooth Omega): the bracket is enough
            return _bisect(sys, q, f, q2, f2), it
        if abs(f2) >= abs(f) and (f2 > 0) == (f > 0):
            return None, it
        if math.hypot(q2[0] - p[0], q2[1] - p[1]) > radius:
            return None, it
        q, f = q2, f2
    return None, 60


def _tl_tangent(sys, q, ref=None, scale=1e-3):
    gu, gv = _gradient(sys, q)
    n = math.hypot(gu, gv)
    if not (n > 1e-14 * tolerance(*sys.entries(q)) ** 0.5 and math.isfinite(n)):
        gu, gv = _fd_gradient(sys, q, scale)
        n = math.hypot(gu, gv)
        if n == 0.0:
            if ref is None:
                raise DegenerateTransitionPoint(f"grad Omega vanishes at {tuple(q)}")
            return ref
    t = (-gv / n, gu / n)
    return t if ref is None else _oriented(t, ref)


def _walk_tl(sys, p, t, bounds, step, max_arc=math.inf, start=None):
    """Follow the transition line from corrected point ``p`` along tangent ``t``."""
    pts, h, arc = [], step, 0.0
    start = p if start is None else start
    termination = "reached-bound"
    while arc < max_arc - 1e-9 * step:
        if len(pts) > MAX_POINTS:
            break
        hh = min(h, max_arc - arc)
        pred = (p[0] + hh * t[0], p[1] + hh * t[1])
        q, iters = _correct(sys, pred, 2 * hh)
        accept = q is not None
        if accept:
            t_new = _tl_tangent(sys, q, t, scale=1e-3 * step)
            cosang = max(-1.0, min(1.0, t[0] * t_new[0] + t[1] * t_new[1]))
            accept = math.acos(cosang) <= 0.2 and math.hypot(q[0] - p[0], q[1] - p[1]) <= 2 * step
        if not accept:
            h *= 0.5
            if h < step * 1e-9:
                termination = "step-underflow"
                break
            continue
        if not bounds.contains(q):
            break
        arc += math.hypot(q[0] - p[0], q[1] - p[1])
        pts.append(q)
        if arc > 3 * step and math.hypot(q[0] - start[0], q[1] - start[1]) < 0.75 * step:
            pts.append(start)
            termination = "closed-loop"
            break
        p, t = q, t_new
        if iters <= 3 and math.acos(cosang) < 0.05:
            h = min(step, 2 * h)
    else:
        termination = "max-arc"
    return pts, termination


def _seed_on_tl(sys, seed, radius):
    q, _ = _correct(sys, seed, radius)
    if q is None:
        raise ConvergenceError(f"could not reach Omega = 0 from {tuple(seed)}",
                               abs(_omega(sys, seed)))
    return q


def trace_transition_line(sys: SystemDef, seed, bounds, step: float) -> HodographCurve:
    """Trace the level set Omega = 0 through the point nearest ``seed``."""
    if not step > 0:
        raise ValueError("step must be positive")
    bounds = _bounds(bounds)
    width = max(bounds.umax - bounds.umin, bounds.vmax - bounds.vmin)
    q = _seed_on_tl(sys, (float(seed[0]), float(seed[1])), width)
    t = _tl_tangent(sys, q)
    fwd, term_f = _walk_tl(sys, q, t, bounds, step)
    if term_f == "closed-loop":
        return _make_curve(sys, [q] + fwd, "transition", step, term_f)
    back, term_b = _walk_tl(sys, q, (-t[0], -t[1]), bounds, step)
    pts = back[::-1] + [q] + fwd
    term = term_f if term_f != "reached-bound" else term_b
    return _make_curve(sys, pts, "transition", step, term)


# --- slope mismatch and verdicts ---------------------------------------------

@dataclass(frozen=True)
class DeltaT:
    """Characteristic slope minus transition-line slope at a contact point."""

    value: float
    at_infinity: bool = False
    swapped: bool = False       # computed for du/dv because B vanished
    determined: bool = True

    def is_zero(self, tol):
        return self.determined and not self.at_infinity and abs(self.value) <= tol

    def __str__(self):
        if not self.determined:
            return "undetermined"
        if self.at_infinity:
            return "infinite (orthogonal crossing)"
        return f"{self.value:.6g}" + (" (du/dv form)" if self.swapped else "")


def verdict_tolerance(sys, p):
    return 1e-6 * (1.0 + sum(abs(x) for x in sys.entries(p)))


def delta_t(sys: SystemDef, p, tol=None) -> DeltaT:
    """``(D - A)/(2B) + Omega_u/Omega_v`` at a transition-line point."""
    a, b, c, d = sys.entries(p)
    ptol = tolerance(a, b, c, d)
    if tol is None:
        tol = ptol
    om = (a - d) ** 2 + 4 * b * c
    if abs(om) > max(1e3 * ptol, verdict_tolerance(sys, p)):
        raise NotOnTransitionLine(f"Omega = {om:.3e} at {tuple(p)}")
    gu, gv = _gradient(sys, p)
    if abs(gu) <= tol and abs(gv) <= tol:
        raise DegenerateTransitionPoint(f"grad Omega vanishes at {tuple(p)}")
    if abs(b) > tol:
        if abs(gv) <= tol:
            return DeltaT(math.inf, at_infinity=True)
        return DeltaT((d - a) / (2 * b) + gu / gv)
    if abs(c) <= tol:
        raise DegenerateDiagonal(f"B and C both vanish at {tuple(p)}")
    # same mismatch measured as du/dv slopes in the swapped variables
    if abs(gu) <= tol:
        return DeltaT(math.inf, at_infinity=True, swapped=True)
    return DeltaT((a - d) / (2 * c) + gv / gu, swapped=True)


class VerdictKind:
    TRANSVERSAL_ALLOWED = "TransversalAllowed"
    TANGENT_FORBIDDEN = "TangentForbidden"
    TANGENT_ALLOWED = "TangentAllowed"
    COINCIDENT_FORBIDDEN = "CoincidentForbidden"
    SINGULAR_VELOCITY_ALLOWED = "SingularVelocityAllowed"
    UNDETERMINED = "Undetermined"

    ALLOWED = (TRANSVERSAL_ALLOWED, TANGENT_ALLOWED, SINGULAR_VELOCITY_ALLOWED)


@dataclass(frozen=True)
class CrossingVerdict:
    kind: str
    delta_t_left: float
    delta_t_right: float
    contact_point: tuple
    diagnostics: str = ""
    details: dict = field(default_factory=dict, compare=False)

    @property
    def allowed(self) -> Optional[bool]:
        if self.kind == VerdictKind.UNDETERMINED:
            return None
        return self.kind in VerdictKind.ALLOWED


def _hyperbolic_normal(sys, p, probe):
    """Unit vector from ``p`` into the hyperbolic side, or None."""
    cands = []
    try:
        gu, gv = _gradient(sys, p)
        n = math.hypot(gu, gv)
        if n > 0 and math.isfinite(n):
            cands += [(gu / n, gv / n), (-gu / n, -gv / n)]
    except DomainError:
        pass
    cands += [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    best, best_om = None, 0.0
    for n in cands:
        try:
            om = _omega(sys, (p[0] + probe * n[0], p[1] + probe * n[1]))
        except DomainError:
            continue
        if om > best_om * 1.5:
            best, best_om = n, om
    return best


def _slope_in_frame(sys, base, t, n, xi, eta, branch):
    q = (base[0] + xi * t[0] + eta * n[0], base[1] + xi * t[1] + eta * n[1])
    d = _direction(sys, q, branch)
    along = d[0] * t[0] + d[1] * t[1]
    across = d[0] * n[0] + d[1] * n[1]
    return across / along


def acceleration_exponent(sys, contact, probe=1e-2, samples=9):
    """Log-log slope of ``|d^2 eta / d xi^2|`` along simple waves near a contact.

    ``xi`` runs along the transition line and ``eta`` across it. The second
    derivative ``s_xi + s s_eta`` of the wave is sampled at distances
    ``probe * 10^-4 .. probe`` into the hyperbolic side. A negative slope means
    the normal acceleration diverges at the contact.
    """
    n = _hyperbolic_normal(sys, contact, probe)
    if n is None:
        raise FitError("no hyperbolic side near the contact")
    t = (-n[1], n[0])
    ds = np.geomspace(probe * 1e-4, probe, samples)
    logs, vals = [], []
    for dist in ds:
        best = None
        for branch in (1, -1):
            try:
                dl = 1e-3 * dist
                f = lambda x, y: _slope_in_frame(sys, contact, t, n, x, dist + y, branch)  # noqa: E731
                s = f(0.0, 0.0)
                s_xi = (f(dl, 0.0) - f(-dl, 0.0)) / (2 * dl)
                s_eta = (f(0.0, dl) - f(0.0, -dl)) / (2 * dl)
                acc = abs(s_xi + s * s_eta)
            except (DomainError, PointTypeError, ZeroDivisionError):
                continue
            if math.isfinite(acc):
                best = acc if best is None else max(best, acc)
        if best is not None and best > 0:
            logs.append(math.log(dist))
            vals.append(math.log(best))
    if len(logs) < 3:
        return 0.0
    return float(np.polyfit(logs, vals, 1)[0])


def _probe_points(sys, contact, probe):
    t = _tl_tangent(sys, contact, scale=1e-3 * probe)
    bounds = Bounds.around(contact, 4 * probe)
    out = {}
    for sgn, key in ((1, "right"), (-1, "left")):
        pts, _ = _walk_tl(sys, contact, (sgn * t[0], sgn * t[1]), bounds,
                          probe / 8, max_arc=probe)
        half = [q for q in pts if math.hypot(q[0] - contact[0], q[1] - contact[1]) <= probe / 2]
        out[key] = (half[-1] if half else None, pts[-1] if pts else None)
    return out


def _trace_to_tl(sys, contact, probe):
    n = _hyperbolic_normal(sys, contact, probe)
    if n is None:
        return None
    start = (contact[0] + probe * n[0], contact[1] + probe * n[1])
    scale = 1.0 + abs(contact[0]) + abs(contact[1])
    bounds = Bounds.around(contact, 10 * scale)
    for branch in ("plus", "minus"):
        try:
            curve = trace_simple_wave(sys, start, branch, bounds, 0.05 * scale)
        except (PointTypeError, DegenerateDiagonal, ConvergenceError):
            continue
        if curve.termination == "hit-transition-line":
            return curve
    return None


def crossing_verdict(sys: SystemDef, contact, probe_arc: float = 1e-2) -> CrossingVerdict:
    """Decide whether a solution may cross from hyperbolic to elliptic at ``contact``.

    The checks run in this order. A non-zero or infinite slope mismatch means
    transversal crossing. Otherwise a diverging normal acceleration gives the
    singular-velocity case. A degenerate point with no simple wave reaching the
    line is undetermined. Otherwise the sign pattern of the mismatch on either
    side of the contact decides.
    """
    p = (float(contact[0]), float(contact[1]))
    q, _ = _correct(sys, p, probe_arc)
    if q is None or math.hypot(q[0] - p[0], q[1] - p[1]) > probe_arc:
        raise NotOnTransitionLine(f"{p} is not on the transition line")
    p = q
    vtol = verdict_tolerance(sys, p)
    details = {}
    try:
        dt0 = delta_t(sys, p)
    except DegenerateTransitionPoint:
        dt0 = DeltaT(math.nan, determined=False)
    details["delta_t"] = str(dt0)

    def side_values():
        left = right = math.nan
        try:
            probes = _probe_points(sys, p, probe_arc)
        except (DegenerateTransitionPoint, DomainError):
            return left, right, []
        vals = []
        for key in ("left", "right"):
            for pt in probes[key]:
                if pt is None:
                    continue
                try:
                    vals.append((key, delta_t(sys, pt)))
                except (DegenerateTransitionPoint, NotOnTransitionLine, DegenerateDiagonal):
                    continue
        for key, dt in vals:
            val = math.inf if dt.at_infinity else dt.value
            if key == "left":
                left = val
            else:
                right = val
        return left, right, [dt for _, dt in vals]

    if dt0.determined and not dt0.is_zero(vtol):
        left, right, _ = side_values()
        return CrossingVerdict(VerdictKind.TRANSVERSAL_ALLOWED, left, right, p,
                               f"characteristic crosses the transition line at an angle "
                               f"(delta T = {dt0})", details)

    if dt0.determined:
        accel = acceleration_exponent(sys, p, probe_arc)
        details["acceleration_exponent"] = accel
        if accel < ACCEL_THRESHOLD:
            left, right, _ = side_values()
            return CrossingVerdict(
                VerdictKind.SINGULAR_VELOCITY_ALLOWED, left, right, p,
                f"delta T = 0 but the normal acceleration diverges like "
                f"distance^{accel:.3f}", details)
    else:
        if _trace_to_tl(sys, p, probe_arc) is None:
            return CrossingVerdict(VerdictKind.UNDETERMINED, math.nan, math.nan, p,
                                   "degenerate transition point: no simple wave reaches the "
                                   "line at a finite point, contact only at infinity", details)
        return CrossingVerdict(VerdictKind.UNDETERMINED, math.nan, math.nan, p,
                               "degenerate transition point: grad Omega vanishes", details)

    left, right, samples = side_values()
    if samples and all(dt.is_zero(vtol) for dt in samples):
        return CrossingVerdict(VerdictKind.COINCIDENT_FORBIDDEN, left, right, p,
                               "delta T vanishes along the probed transition line: "
                               "the line is itself a characteristic", details)
    if math.isnan(left) or math.isnan(right):
        return CrossingVerdict(VerdictKind.UNDETERMINED, left, right, p,
                               "could not sample delta T on both sides of the contact", details)
    if (left > 0) != (right > 0) and abs(left) > vtol and abs(right) > vtol:
        return CrossingVerdict(VerdictKind.TANGENT_FORBIDDEN, left, right, p,
                               "tangential contact with delta T changing sign", details)
    return CrossingVerdict(VerdictKind.TANGENT_ALLOWED, left, right, p,
                           "tangential contact without a sign change of delta T", details)


# --- contact exponent --------------------------------------------------------

def contact_exponent(sys: SystemDef, contact, fit_window: float = 1e-2, steps: int = 400):
    """Fit ``|eta| ~ |xi|^e`` for the simple wave that touches the line at ``contact``.

    ``xi`` runs along the double eigenvector at the contact and ``eta`` across it.
    The wave is integrated outward on a geometric mesh from
    ``1e-6 * fit_window`` to ``fit_window`` and the exponent is the least-squares
    slope over ``[1e-3 * fit_window, fit_window]``. Returns ``(exponent, r_squared)``.
    """
    p = (float(contact[0]), float(contact[1]))
    a, b, c, d = sys.entries(p)
    tol = tolerance(a, b, c, d)
    if abs((a - d) ** 2 + 4 * b * c) > max(1e3 * tol, verdict_tolerance(sys, p)):
        raise NotOnTransitionLine(f"{p} is not on the transition line")
    sigma = 0.5 * (a - d)
    y = max([(b, -sigma), (sigma, c)], key=lambda w: math.hypot(*w))
    ny = math.hypot(*y)
    if ny == 0:
        raise DegenerateDiagonal(f"B and C both vanish at {p}")
    t = (y[0] / ny, y[1] / ny)
    n = (-t[1], t[0])
    side = None
    for sgn in (1, -1):
        try:
            om = _omega(sys, (p[0] + sgn * fit_window * t[0], p[1] + sgn * fit_window * t[1]))
        except DomainError:
            continue
        if om > tol and (side is None or om > side[1]):
            side = (sgn, om)
    if side is None:
        raise FitError("no hyperbolic side along the eigenvector direction")
    t = (side[0] * t[0], side[0] * t[1])
    n = (-t[1], t[0])

    xs = np.geomspace(fit_window * 1e-6, fit_window, steps + 1)
    last_err = None
    for branch in (1, -1):
        def f(xi, eta):
            return _slope_in_frame(sys, p, t, n, xi, eta, branch)
        try:
            eta = 0.0
            etas = [eta]
            for x0, x1 in zip(xs[:-1], xs[1:]):
                h = x1 - x0
                k1 = f(x0, eta)
                k2 = f(x0 + h / 2, eta + h / 2 * k1)
                k3 = f(x0 + h / 2, eta + h / 2 * k2)
                k4 = f(x1, eta + h * k3)
                eta += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                etas.append(eta)
        except (DomainError, PointTypeError, ZeroDivisionError) as err:
            last_err = err
            continue
        etas = np.abs(np.array(etas))
        mask = (xs >= fit_window * 1e-3) & (etas > 0)
        if mask.sum() < 10:
            last_err = FitError("too few points with non-zero offset")
            continue
        lx, ly = np.log(xs[mask]), np.log(etas[mask])
        slope, icpt = np.polyfit(lx, ly, 1)
        resid = ly - (slope * lx + icpt)
        ss = float(np.sum((ly - ly.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 0.0
        return float(slope), r2
    raise FitError(f"could not integrate the contact wave: {last_err}")
