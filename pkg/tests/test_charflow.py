import math
import random

import numpy as np
import pytest

from mixotype import expr as ex
from mixotype import models
from mixotype.charflow import (Bounds, VerdictKind, contact_exponent, crossing_verdict,
                               delta_t, trace_simple_wave, trace_transition_line)
from mixotype.errors import DegenerateTransitionPoint, NotOnTransitionLine, PointTypeError
from mixotype.models import hamiltonian_delta_t
from mixotype.syscore import SystemDef, char_speeds, discriminant, hodograph_speeds, tolerance

BOX = Bounds(-5, 5, -5, 5)


def db_invariant(c, sign):
    return c.v + sign * (2 / 3) * np.abs(c.u) ** 1.5


def dnls_invariant(c, sign):
    return c.u + sign * 2 * np.sqrt(np.abs(c.v))


# -- simple waves

def test_boussinesq_wave_lands_on_line():
    c = trace_simple_wave(models.boussinesq(), (1, 0), "plus", BOX, 0.01)
    assert c.termination == "hit-transition-line"
    assert c.end == pytest.approx((0, 2 / 3), abs=1e-6)
    assert np.ptp(db_invariant(c, 1)) < 1e-6


def test_dnls_wave_lands_on_line():
    c = trace_simple_wave(models.dnls(), (0, 1), "plus", BOX, 0.01)
    assert c.termination == "hit-transition-line"
    assert c.end == pytest.approx((2, 0), abs=1e-6)
    assert np.ptp(dnls_invariant(c, 1)) < 1e-6


@pytest.mark.parametrize("model,inv", [("boussinesq", db_invariant), ("dnls", dnls_invariant)])
@pytest.mark.parametrize("start", [(1, 0.5), (2, 1), (0.5, 2), (3, 3)])
def test_riemann_invariants_along_full_traces(model, inv, start):
    sys_ = models.model_from_id(model)
    for branch, sign in (("plus", 1), ("minus", -1)):
        for sense in (1, -1):
            c = trace_simple_wave(sys_, start, branch, BOX, 0.01, sense=sense)
            assert len(c.points) > 10
            assert np.ptp(inv(c, sign)) < 1e-6, (branch, sense, c.termination)


def test_power_wave_closed_form():
    # alpha = 3: u -+ 2 v^(-1/2) is constant along the two families
    pw = models.power_wave(3)
    for start in [(0, 1), (1, 2), (-1, 0.5)]:
        for branch in ("plus", "minus"):
            c = trace_simple_wave(pw, start, branch, Bounds(-3, 3, 0.05, 5), 0.01)
            spread = min(np.ptp(c.u + s * 2 * c.v ** -0.5) for s in (1, -1))
            assert spread < 1e-6


def test_power_wave_one_third_closed_form():
    # alpha = 1/3: u +- (2/(5/3)) v^(5/6)
    pw = models.power_wave("1/3")
    c = trace_simple_wave(pw, (0, 1), "plus", BOX, 0.01)
    spread = min(np.ptp(c.u + s * 1.2 * np.abs(c.v) ** (5 / 6)) for s in (1, -1))
    assert spread < 1e-6


def test_midpoint_slopes_match_hodograph_speeds():
    # chord slopes differ from the midpoint tangent by O(step^2 * curvature), so the
    # check is made with a fine step and away from the line, where curvature blows up
    for sys_, start in [(models.boussinesq(), (2, 1)), (models.dnls(), (1, 2))]:
        c = trace_simple_wave(sys_, start, "plus", BOX, 0.002)
        checked = 0
        for p, q in zip(c.points[:-1], c.points[1:]):
            m = 0.5 * (p + q)
            if discriminant(sys_, m) < 0.5:
                continue
            mu = hodograph_speeds(sys_, m)[0]
            assert abs((q[1] - p[1]) / (q[0] - p[0]) + mu) <= 1e-6
            checked += 1
        assert checked > 100


def test_consecutive_points_within_twice_the_step():
    for sys_, start in [(models.boussinesq(), (2, 1)), (models.dnls(), (1, 2))]:
        for sense in (1, -1):
            c = trace_simple_wave(sys_, start, "plus", BOX, 0.05, sense=sense)
            assert np.max(np.hypot(*np.diff(c.points, axis=0).T)) <= 2 * 0.05


@pytest.mark.parametrize("model,start", [("boussinesq", (2, 1)), ("dnls", (1, 2)), ("toda", (0, 0))])
def test_step_halving_is_fourth_order(model, start):
    sys_ = models.model_from_id(model)
    box = Bounds(-3, 3, -3, 3)
    ends = [np.array(trace_simple_wave(sys_, start, "plus", box, h, sense=-1).end)
            for h in (0.2, 0.1, 0.05)]
    e1, e2 = np.linalg.norm(ends[0] - ends[1]), np.linalg.norm(ends[1] - ends[2])
    assert e1 / e2 > 12


def test_simple_wave_endpoint_on_boundary():
    c = trace_simple_wave(models.dnls(), (0, 1), "plus", Bounds(-5, 5, -5, 3), 0.1, sense=-1)
    assert c.termination == "reached-bound"
    assert c.end[1] == pytest.approx(3, abs=1e-12)


def test_simple_wave_with_vanishing_b():
    # B = 0 on v = 0: the direction field switches to the C-based form there
    sys_ = SystemDef(*(ex.parse(x) for x in ("1", "v", "1", "-1")))   # Omega = 4 + 4v
    start = (0.5, 0.0)
    assert sys_.entries(start)[1] == 0 and discriminant(sys_, start) > 0
    for branch in ("plus", "minus"):
        curve = trace_simple_wave(sys_, start, branch, Bounds(-2, 2, -0.5, 2), 0.01, sense=-1)
        assert curve.termination == "reached-bound"
        for p, q in zip(curve.points[:-1], curve.points[1:]):
            m = 0.5 * (p + q)
            a, b, c, d = sys_.entries(m)
            r = math.sqrt(discriminant(sys_, m))
            # tangent (du, dv) is an eigen-direction: C du = (lambda - D) dv ... in either form
            du, dv = q - p
            res = min(abs(c * du - (0.5 * (a - d) + r / 2) * dv), abs(c * du - (0.5 * (a - d) - r / 2) * dv))
            assert res <= 1e-4 * math.hypot(du, dv)


def test_simple_wave_rejects_elliptic_start():
    with pytest.raises(PointTypeError):
        trace_simple_wave(models.dnls(), (0, -1), "plus", BOX, 0.01)
    with pytest.raises(ValueError):
        trace_simple_wave(models.dnls(), (0, 1), "sideways", BOX, 0.01)


def test_curve_csv():
    c = trace_simple_wave(models.dnls(), (0, 1), "plus", BOX, 0.1)
    lines = c.to_csv().splitlines()
    assert lines[0] == "s,u,v,omega"
    assert len(lines) == len(c.points) + 1
    s, u, v, om = map(float, lines[1].split(","))
    assert (s, u, v) == (0, 0, 1) and om == 4


# -- transition line

def test_boussinesq_transition_line():
    tl = trace_transition_line(models.boussinesq(), (0.1, 3), BOX, 0.05)
    assert np.max(np.abs(tl.u)) < 1e-9
    assert tl.v.min() == pytest.approx(-5) and tl.v.max() == pytest.approx(5)


def test_dnls_transition_line():
    tl = trace_transition_line(models.dnls(), (5, 0.05), BOX, 0.05)
    assert np.max(np.abs(tl.v)) < 1e-9


def test_gas_transition_line_is_at_unit_density():
    gas = models.gas_dynamics("(v - 1)^4/4")   # P' = (v - 1)^3
    tl = trace_transition_line(gas, (0, 1.2), Bounds(-1, 1, 0.5, 1.5), 0.05)
    for p in tl.points:
        assert abs(discriminant(gas, p)) <= tolerance(*gas.entries(p))
    # a cubic zero: |Omega| <= tol only pins v to about tol^(1/3)
    assert np.max(np.abs(tl.v - 1)) < 2e-3


def test_transition_line_samples_are_on_the_line():
    sys_ = models.from_hamiltonian("u^4/12 - u^2*v/2 + v^2/2")  # line v = u^2
    tl = trace_transition_line(sys_, (0.5, 0.3), Bounds(-1.5, 1.5, -1, 2.5), 0.05)
    assert np.max(np.abs(tl.v - tl.u ** 2)) < 1e-9
    assert np.max(np.hypot(*np.diff(tl.points, axis=0).T)) <= 0.1


def test_closed_transition_line():
    sys_ = models.from_hamiltonian("u^4/12 + u^2*v^2/2 - u^2/2 + v^2/2")
    tl = trace_transition_line(sys_, (0.9, 0.1), BOX, 0.05)
    assert tl.termination == "closed-loop"
    assert np.allclose(tl.points[0], tl.points[-1])


def test_power_one_third_line():
    tl = trace_transition_line(models.power_wave("1/3"), (0.3, 0.1), Bounds(-1, 1, -1, 1), 0.05)
    assert np.max(np.abs(tl.v)) < 1e-6


# -- slope mismatch

def test_delta_t_examples():
    assert delta_t(models.boussinesq(), (0, 0.4)).at_infinity
    dn = delta_t(models.dnls(), (1.3, 0))
    assert dn.value == 0 and not dn.at_infinity
    with pytest.raises(NotOnTransitionLine):
        delta_t(models.dnls(), (1.3, 1))
    with pytest.raises(DegenerateTransitionPoint):
        delta_t(models.from_hamiltonian("v^2/2 + u^4/12"), (0, 1))


def test_delta_t_matches_hamiltonian_formula():
    rng = random.Random(4)
    for _ in range(30):
        a, b = rng.uniform(0.2, 2) * rng.choice((-1, 1)), rng.uniform(-0.3, 0.3)
        h = f"v^2/2 + u^3/6 + {a}*u^2*v + {b}*u*v^2"
        sys_ = models.from_hamiltonian(h)
        v0 = rng.uniform(-1, 1)
        p = (-2 * a * v0, v0)   # h_uu = u + 2 a v = 0
        if abs(1 + 2 * b * p[0]) < 0.1:
            continue
        want = hamiltonian_delta_t(h, p).value
        got = delta_t(sys_, p).value
        assert got == pytest.approx(want, rel=1e-8)


def test_zero_delta_t_iff_eigenvector_tangent():
    sys_ = models.from_hamiltonian("u^4/12 - u^2*v/2 + v^2/2")  # line v = u^2
    for u in np.linspace(-1, 1, 21):
        p = (u, u * u)
        dt = delta_t(sys_, p)
        y = char_speeds(sys_, p).eigenvector_on_tl
        n = np.array([2 * u, -1.0]) / math.hypot(2 * u, 1)
        zero = dt.is_zero(1e-6)
        assert zero == (abs(float(np.dot(n, y))) < 1e-6)
        assert zero == (abs(u) < 1e-12)


# -- verdicts

def test_verdict_boussinesq():
    v = crossing_verdict(models.boussinesq(), (0, 0))
    assert v.kind == VerdictKind.TRANSVERSAL_ALLOWED and v.allowed


def test_verdict_dnls():
    for u in (-2, 0.5, 3):
        v = crossing_verdict(models.dnls(), (u, 0))
        assert v.kind == VerdictKind.COINCIDENT_FORBIDDEN and not v.allowed


def test_verdict_power_one_third():
    v = crossing_verdict(models.power_wave("1/3"), (0, 0))
    assert v.kind == VerdictKind.SINGULAR_VELOCITY_ALLOWED


def test_verdict_power_three():
    v = crossing_verdict(models.power_wave(3), (10, 0))
    assert v.kind == VerdictKind.UNDETERMINED
    assert "contact only at infinity" in v.diagnostics


def test_verdict_tangent_forbidden():
    # line v = u^2 touches its characteristic at the origin and dT changes sign
    v = crossing_verdict(models.from_hamiltonian("u^4/12 - u^2*v/2 + v^2/2"), (0, 0))
    assert v.kind == VerdictKind.TANGENT_FORBIDDEN
    assert v.delta_t_left * v.delta_t_right < 0


def test_verdict_tangent_allowed():
    # line v = u^3/... : dT vanishes at the origin without changing sign
    sys_ = models.from_hamiltonian("u^5/20 - u^2*v/2 + v^2/2")   # h_uu = u^3 - v
    v = crossing_verdict(sys_, (0, 0))
    assert v.kind == VerdictKind.TANGENT_ALLOWED
    assert v.delta_t_left * v.delta_t_right > 0


def test_verdict_projects_nearby_contact():
    v = crossing_verdict(models.dnls(), (1, 1e-12))
    assert v.contact_point[1] == pytest.approx(0, abs=1e-12)


# -- contact exponent

@pytest.mark.parametrize("h,expected", [
    ("v^2/2 + u^3/6", 1.5),
    ("v^2/2 + u^4/24", 2.0),
    ("v^2/2 + u^5/120", 2.5),
])
def test_contact_exponent_follows_half_order_rule(h, expected):
    slope, r2 = contact_exponent(models.from_hamiltonian(h), (0, 1))
    assert slope == pytest.approx(expected, abs=0.05)
    assert r2 > 0.999
