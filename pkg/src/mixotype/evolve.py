"""Time evolution on a periodic grid and the dispersionless Boussinesq circle experiment.

The solver is the second-order central scheme of Kurganov and Tadmor with
minmod-limited reconstruction and SSP-RK3 time stepping. Systems with a flux
``(F, G)`` are advanced in conservation form ``u_t = F_x, v_t = G_x``. Other
systems use the quasi-linear form ``U_t = V(U) U_x`` with the same interface
states and dissipation.

For the circle ``(u - c)^2 + v^2 = 1`` the two simple waves ``+-v + (2/3) u^(3/2) = k``
tangent to it bound its image from the transition line ``u = 0``. They meet at
``u = (3k/2)^(2/3)``, so crossing is ruled out while ``k > 0``. The critical ``c``
is the one with ``k = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .errors import ConvergenceError, DomainError
from .syscore import SystemDef

__all__ = ["GridState", "Trajectory", "evolve", "circle_init", "tangent_simple_waves",
           "critical_c", "detect_crossing", "tangency_residual", "BLOWUP_GRADIENT"]

BLOWUP_GRADIENT = 1e6


@dataclass(frozen=True)
class GridState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        n = u.shape[0]
        if u.ndim != 1 or v.shape != u.shape:
            raise ValueError("u and v must be 1-D arrays of equal length")
        if n < 64 or n % 2:
            raise ValueError(f"grid size must be even and >= 64, got {n}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def x(self):
        return 2 * np.pi * np.arange(self.n) / self.n

    @property
    def dx(self):
        return 2 * np.pi / self.n

    def to_csv(self) -> str:
        lines = ["x,u,v"]
        lines += [f"{float(x)!r},{float(u)!r},{float(v)!r}" for x, u, v in zip(self.x, self.u, self.v)]
        return "\n".join(lines) + "\n"


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    crossing: Optional[tuple] = None      # (t, x)
    blowup: Optional[tuple] = None        # (t, max |U_x|)

    @property
    def times(self):
        return [s.t for s in self.states]

    @property
    def final(self):
        return self.states[-1]


def circle_init(c: float, n: int = 512, v_sign: int = 1) -> GridState:
    """``u = c + sin x``, ``v = v_sign * cos x`` on the circle ``(u - c)^2 + v^2 = 1``."""
    x = 2 * np.pi * np.arange(n) / n
    return GridState(c + np.sin(x), v_sign * np.cos(x), 0.0)


# --- spatial discretisation --------------------------------------------------

def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _interfaces(w):
    """Left and right reconstructed values at ``j + 1/2``."""
    slope = _minmod(w - np.roll(w, 1), np.roll(w, -1) - w)
    left = w + 0.5 * slope
    right = np.roll(w - 0.5 * slope, -1)
    return left, right


def _local_speed(sys, u, v):
    a, b, c, d = sys.entries_array(u, v)
    omega = (a - d) ** 2 + 4.0 * b * c
    # spectral radius in hyperbolic cells, |Re| + |Im| in elliptic ones
    return np.abs(0.5 * (a + d)) + 0.5 * np.sqrt(np.abs(omega))


class _Rhs:
    def __init__(self, sys: SystemDef, dx: float):
        self.sys, self.dx = sys, dx
        self.flux = sys.flux

    def __call__(self, u, v):
        ul, ur = _interfaces(u)
        vl, vr = _interfaces(v)
        speed = np.maximum(_local_speed(self.sys, ul, vl), _local_speed(self.sys, ur, vr))
        if self.flux is not None:
            F, G = self.flux
            # u_t = F_x: the numerical flux of -F, with central dissipation
            hu = -0.5 * (ex.evaluate_array(F, ul, vl) + ex.evaluate_array(F, ur, vr)) \
                - 0.5 * speed * (ur - ul)
            hv = -0.5 * (ex.evaluate_array(G, ul, vl) + ex.evaluate_array(G, ur, vr)) \
                - 0.5 * speed * (vr - vl)
            du = -(hu - np.roll(hu, 1)) / self.dx
            dv = -(hv - np.roll(hv, 1)) / self.dx
        else:
            a, b, c, d = self.sys.entries_array(u, v)
            ubar, vbar = 0.5 * (ul + ur), 0.5 * (vl + vr)
            ux = (ubar - np.roll(ubar, 1)) / self.dx
            vx = (vbar - np.roll(vbar, 1)) / self.dx
            diss_u = 0.5 * speed * (ur - ul)
            diss_v = 0.5 * speed * (vr - vl)
            du = a * ux + b * vx + (diss_u - np.roll(diss_u, 1)) / self.dx
            dv = c * ux + d * vx + (diss_v - np.roll(diss_v, 1)) / self.dx
        return du, dv


def _indicator_fn(sys, indicator):
    if indicator is None:
        indicator = sys.tl_indicator
    if indicator is None:
        def omega(u, v):
            a, b, c, d = sys.entries_array(u, v)
            return (a - d) ** 2 + 4.0 * b * c
        return omega
    return _as_field(indicator)


def _as_field(indicator):
    if callable(indicator) and not isinstance(indicator, ex.Expr):
        return indicator
    node = ex.as_expr(indicator)
    return lambda u, v: ex.evaluate_array(node, u, v)


def _first_sign_change(i0, i1, t0, t1, x):
    """Earliest interpolated time at which a cell goes from positive to non-positive."""
    hit = (i0 > 0) & (i1 <= 0)
    if not np.any(hit):
        return None
    frac = i0[hit] / (i0[hit] - i1[hit])
    times = t0 + frac * (t1 - t0)
    k = int(np.argmin(times))
    return float(times[k]), float(x[hit][k])


def evolve(sys: SystemDef, init: GridState, t_end: float, cfl: float = 0.4,
           output_times: Optional[Sequence[float]] = None, n_out: int = 20,
           indicator=None, stop_at_crossing: bool = False) -> Trajectory:
    """Advance ``init`` to ``t_end`` and store states at the output times.

    ``indicator`` (expression, callable or None for the system default) is
    positive where the system is hyperbolic; its first sign change from positive
    to non-positive is recorded as the crossing. The run continues past the
    crossing unless ``stop_at_crossing`` is set, and halts on blow-up.
    """
    if not 0 < cfl <= 1:
        raise ValueError("cfl must be in (0, 1]")
    if not t_end > init.t:
        raise ValueError("t_end must exceed the initial time")
    if output_times is None:
        output_times = np.linspace(init.t, t_end, n_out + 1)[1:]
    outs = sorted(float(t) for t in output_times if init.t < t <= t_end)
    if not outs or outs[-1] < t_end:
        outs.append(float(t_end))

    rhs = _Rhs(sys, init.dx)
    ind = _indicator_fn(sys, indicator)
    x = init.x
    traj = Trajectory([init])
    u, v, t = init.u.copy(), init.v.copy(), init.t
    ind_prev = ind(u, v)
    k_out = 0
    while k_out < len(outs):
        try:
            speed = float(np.max(_local_speed(sys, u, v)))
        except DomainError:
            traj.blowup = (t, math.inf)
            break
        if speed == 0.0:
            if np.ptp(u) > 0 or np.ptp(v) > 0:
                raise ValueError("zero characteristic speed with non-constant data")
            dt = outs[k_out] - t
        else:
            dt = cfl * init.dx / speed
        if t + dt >= outs[k_out] - 1e-14 * max(1.0, abs(t)):
            dt = outs[k_out] - t
            hit_output = True
        else:
            hit_output = False
        try:
            with np.errstate(all="ignore"):
                du, dv = rhs(u, v)
                u1, v1 = u + dt * du, v + dt * dv
                du, dv = rhs(u1, v1)
                u2 = 0.75 * u + 0.25 * (u1 + dt * du)
                v2 = 0.75 * v + 0.25 * (v1 + dt * dv)
                du, dv = rhs(u2, v2)
                un = u / 3 + 2 / 3 * (u2 + dt * du)
                vn = v / 3 + 2 / 3 * (v2 + dt * dv)
        except DomainError:
            traj.blowup = (t, math.inf)
            break
        if not (np.all(np.isfinite(un)) and np.all(np.isfinite(vn))):
            traj.blowup = (t + dt, math.inf)
            break
        t_new = outs[k_out] if hit_output else t + dt
        grad = max(np.max(np.abs(np.roll(un, -1) - un)), np.max(np.abs(np.roll(vn, -1) - vn))) / init.dx
        try:
            ind_new = ind(un, vn)
        except DomainError:
            ind_new = np.full_like(un, -1.0)
        if traj.crossing is None:
            traj.crossing = _first_sign_change(ind_prev, ind_new, t, t_new, x)
        u, v, t, ind_prev = un, vn, t_new, ind_new
        if grad > BLOWUP_GRADIENT:
            traj.blowup = (t, float(grad))
            traj.states.append(GridState(u, v, t))
            break
        if hit_output:
            traj.states.append(GridState(u, v, t))
            k_out += 1
        if stop_at_crossing and traj.crossing is not None:
            if not hit_output:
                traj.states.append(GridState(u, v, t))
            break
    return traj


def detect_crossing(traj: Trajectory, indicator: Callable) -> Optional[tuple]:
    """First ``(t, x)`` where ``indicator(u, v)`` turns non-positive between stored states."""
    if not traj.states:
        raise ValueError("empty trajectory")
    indicator = _as_field(indicator)
    prev = traj.states[0]
    i0 = indicator(prev.u, prev.v)
    for s in traj.states[1:]:
        i1 = indicator(s.u, s.v)
        hit = _first_sign_change(i0, i1, prev.t, s.t, s.x)
        if hit is not None:
            return hit
        prev, i0 = s, i1
    return None


# --- tangent simple waves of the circle --------------------------------------

def tangency_residual(c, k, vc, side):
    """Residuals of the tangency conditions for the wave ``side * v + (2/3) u^(3/2) = k``.

    ``side = +1`` is the wave under the circle (touching at ``vc < 0``), ``-1``
    its mirror image. With ``w = -side * vc`` and ``m = (3/2)(k + w)`` the
    conditions are ``m^(2/3) = c - sqrt(1 - vc^2)`` (contact on the left arc) and
    ``m^(1/3) w = sqrt(1 - vc^2)`` (equal slopes).
    """
    w = -side * vc
    m = np.cbrt(1.5 * (k + w))
    root = math.sqrt(1.0 - vc * vc)
    return m * m - (c - root), m * w - root


def _newton2(fun, x0, what, tol=1e-13, maxit=60):
    x = np.array(x0, dtype=float)
    res = np.array(fun(*x))
    for _ in range(maxit):
        if np.max(np.abs(res)) <= tol:
            return x, res
        jac = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            jac[:, j] = (np.array(fun(*xp)) - np.array(fun(*xm))) / (2 * h)
        try:
            dx = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * dx
            try:
                rn = np.array(fun(*xn))
            except ValueError:
                rn = None
            if rn is not None and np.all(np.isfinite(rn)) and \
                    np.max(np.abs(rn)) < max(np.max(np.abs(res)), tol) * (1 + 1e-9):
                break
            lam *= 0.5
        else:
            break
        x, res = xn, rn
    if np.max(np.abs(res)) <= 1e-10:
        return x, res
    raise ConvergenceError(f"Newton iteration for {what} did not converge",
                           float(np.max(np.abs(res))))


def tangent_simple_waves(c: float):
    """The two waves tangent to the circle: ``[(k, vc), (k, -vc)]`` with ``vc < 0`` first.

    Newton starts from ``vc = -0.5`` and ``vc = +0.5`` with ``k`` taken from the
    contact condition at that ``vc``.
    """
    if not c > 1:
        raise ValueError("the circle must start hyperbolic: c > 1")
    out = []
    for side, vc0 in ((1, -0.5), (-1, 0.5)):
        w0 = -side * vc0
        k0 = (2.0 / 3.0) * (c - math.sqrt(1 - vc0 ** 2)) ** 1.5 - w0

        def fun(k, vc, side=side):
            if not -1 < vc < 1:
                raise ValueError("vc outside the circle")
            return tangency_residual(c, k, vc, side)
        (k, vc), _ = _newton2(fun, (k0, vc0), f"the tangent wave at c={c}")
        out.append((float(k), float(vc)))
    return out


def critical_c() -> float:
    """The ``c`` at which the two tangent waves meet on the transition line (``k = 0``)."""
    vc0 = -0.5
    c0 = 1.5 ** (2.0 / 3.0) * 0.5 ** (2.0 / 3.0) + math.sqrt(1 - vc0 ** 2)

    def fun(c, vc):
        if not -1 < vc < 1:
            raise ValueError("vc outside the circle")
        return tangency_residual(c, 0.0, vc, 1)
    (c, _), _ = _newton2(fun, (c0, vc0), "the critical c")
    return float(c)
