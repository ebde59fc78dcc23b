import math
import random
from fractions import Fraction

import numpy as np
import pytest

from mixotype import expr as ex
from mixotype import models
from mixotype.errors import ExprSyntaxError, ModelError, NotOnTransitionLine
from mixotype.models import HamiltonianDensity, exponent_prediction, hamiltonian_delta_t
from mixotype.syscore import PointType, classify, discriminant, hodograph_speeds


def points(n, seed, lo=-2, hi=2):
    rng = random.Random(seed)
    return [(rng.uniform(lo, hi), rng.uniform(lo, hi)) for _ in range(n)]


def test_density_caches_partials():
    dens = HamiltonianDensity(ex.parse("v^2/2 + u^3/6 + u^2*v"))
    assert dens.at("uuu", (0, 3)) == 1
    assert dens.at("uuv", (0, 3)) == 2
    assert dens.d("vu") is dens.d("uv")
    with pytest.raises(KeyError):
        dens.d("uuvvvv")


@pytest.mark.parametrize("h", ["v^2/2 + v*u^2/2", "sin(u*v) + exp(u - v^2)", "u^5*v^3"])
def test_mixed_partials_commute(h):
    sympy = pytest.importorskip("sympy")
    dens = HamiltonianDensity(ex.parse(h))
    u, v = sympy.symbols("u v")
    ref = sympy.sympify(h.replace("^", "**"))
    for p in points(20, h):
        want = float(sympy.diff(ref, u, v).subs({u: p[0], v: p[1]}))
        assert dens.at("uv", p) == pytest.approx(want, rel=1e-12, abs=1e-12)
        assert ex.evaluate(ex.differentiate(ex.differentiate(dens.h, "v"), "u"), p) == \
            pytest.approx(dens.at("uv", p), rel=1e-12, abs=1e-12)


def test_from_hamiltonian_examples():
    dn = models.from_hamiltonian("v^2/2 + v*u^2/2")
    assert dn.entries((2, 3)) == (2, 1, 3, 2)
    db = models.from_hamiltonian("v^2/2 + u^3/6")
    assert db.entries((1.5, -1)) == (0, 1, 1.5, 0)
    quad = models.from_hamiltonian("(u^2 + v^2)/2")
    assert quad.entries((7, -3)) == (0, 1, 1, 0)
    assert discriminant(quad, (7, -3)) == 4
    assert dn.provenance.kind == "hamiltonian"


def test_bundled_matrices():
    assert models.dnls().entries((2, 3)) == (2, 1, 3, 2)
    for p in points(20, "bundled"):
        u, v = p
        assert models.dnls().entries(p) == pytest.approx((u, 1, v, u), rel=1e-12)
        assert models.boussinesq().entries(p) == pytest.approx((0, 1, u, 0), rel=1e-12, abs=1e-15)
        assert models.boussinesq_shifted(0).entries(p) == pytest.approx(models.boussinesq().entries(p))
        assert models.boussinesq_shifted(3).entries(p) == pytest.approx((0, 1, u + 9, 0), rel=1e-12)
        assert models.toda().entries(p) == pytest.approx((0, 1, math.exp(u), 0), rel=1e-12)


def test_boussinesq_transition_line():
    for v in (-3, 0, 2.5):
        assert classify(models.boussinesq(), (0, v)).kind is PointType.PARABOLIC
        assert classify(models.boussinesq_shifted(1.5), (-2.25, v)).kind is PointType.PARABOLIC


def test_gas_dynamics():
    gas = models.gas_dynamics("v^2/2")
    assert gas.entries((0.3, 2)) == pytest.approx((0.3, 1, 2, 0.3))
    assert discriminant(gas, (0.3, 2)) == pytest.approx(8)
    assert classify(gas, (0, 1e-12)).kind is PointType.PARABOLIC
    normal = models.gas_dynamics("v^3 + v")
    for p in points(50, "normal", 0.1, 3):
        assert classify(normal, p).kind is PointType.HYPERBOLIC
    with pytest.raises(ModelError):
        models.gas_dynamics("u*v")


@pytest.mark.parametrize("P", ["(v - 1)^4", "v^3/3 - v^2", "exp(v) - 2*v^2", "v^(1/3) + v^2"])
def test_gas_omega_is_four_dp(P):
    gas = models.gas_dynamics(P)
    dP = ex.differentiate(ex.parse(P), "v")
    for p in points(100, P, 0.05, 3):
        assert discriminant(gas, p) == pytest.approx(4 * ex.evaluate(dP, p), rel=1e-10, abs=1e-14)


def test_gas_second_derivative_exponent():
    # along simple waves d^2 rho / du^2 ~ (rho - 1)^(-gamma) for P = (rho - 1)^gamma
    gas = models.gas_dynamics("(v - 1)^4")

    def slope(r):
        return hodograph_speeds(gas, (0.0, r))[0]

    ds = np.geomspace(5e-3, 5e-2, 9)
    second = []
    for d in ds:
        r, h = 1 + d, 1e-4 * d
        second.append(abs(slope(r) * (slope(r + h) - slope(r - h)) / (2 * h)))
    fit = np.polyfit(np.log(ds), np.log(second), 1)[0]
    assert fit == pytest.approx(-4, abs=0.05)


def test_nonlinear_wave_family():
    nlw = models.nonlinear_wave("v^2/2", "u^3/6")
    for p in points(10, "nlw"):
        assert nlw.entries(p) == pytest.approx(models.boussinesq().entries(p), abs=1e-15)
    for p in points(50, "toda"):
        assert classify(models.toda(), p).kind is PointType.HYPERBOLIC
    with pytest.raises(ModelError):
        models.nonlinear_wave("u^2", "u^3")


def test_power_wave():
    pw = models.power_wave(1)
    assert pw.entries((0.4, 2.5)) == (0, 1, 2.5, 0)
    third = models.power_wave(Fraction(1, 3))
    assert third.entries((0, -8)) == pytest.approx((0, 1, -2, 0))
    assert models.power_wave("5").entries((0, 2)) == (0, 1, 32, 0)
    for bad in (2, Fraction(2, 3), Fraction(1, 2), -1, 0):
        with pytest.raises(ModelError):
            models.power_wave(bad)


def test_h1_family():
    sys_ = models.h1_family("v^4/12")
    assert sys_.entries((0.5, 2)) == pytest.approx((0.5, 4, 2, 0.5))
    with pytest.raises(ModelError):
        models.h1_family("u*v")


def test_hamiltonian_delta_t_examples():
    db = hamiltonian_delta_t(models.DB_DENSITY, (0, 1.3))
    assert db.at_infinity
    dn = hamiltonian_delta_t(models.DNLS_DENSITY, (0.7, 0))
    assert dn.value == 0 and not dn.at_infinity
    # h_uu = u + 2v, so the line point is (-2v, v) rather than (0, v)
    assert hamiltonian_delta_t("v^2/2 + u^3/6 + u^2*v", (-1.6, 0.8)).value == pytest.approx(0.5)
    with pytest.raises(NotOnTransitionLine):
        hamiltonian_delta_t("v^2/2 + u^3/6 + u^2*v", (0, 0.8))
    flat = hamiltonian_delta_t("v^2/2 + u^4/24", (0, 1))
    assert not flat.determined
    with pytest.raises(NotOnTransitionLine):
        hamiltonian_delta_t(models.DB_DENSITY, (1, 0))
    with pytest.raises(NotOnTransitionLine):
        hamiltonian_delta_t("u^3", (0, 0))   # h_vv vanishes: not this branch


def test_exponent_prediction():
    assert exponent_prediction(models.DB_DENSITY, (0, 1)) == Fraction(3, 2)
    assert exponent_prediction("v^2/2 + u^4/24", (0, 1)) == 2
    assert exponent_prediction("v^2/2 + u^5/120", (0, 1)) == Fraction(5, 2)
    assert exponent_prediction("v^2/2 + u^6/720", (0, 1)) == 3
    assert exponent_prediction(models.DNLS_DENSITY, (1, 0)) is None
    assert exponent_prediction("v^2/2 + u^7", (0, 1)) is None


def test_model_ids():
    assert models.model_from_id("dnls").entries((2, 3)) == (2, 1, 3, 2)
    assert models.model_from_id("boussinesq:c=3").entries((1, 0)) == pytest.approx((0, 1, 10, 0))
    assert models.model_from_id("power_wave:alpha=1/3").entries((0, 8)) == pytest.approx((0, 1, 2, 0))
    assert models.model_from_id("gas:P=(v-1)^4").entries((0.5, 2)) == pytest.approx((0.5, 2, 2, 0.5))
    nlw = models.model_from_id("nlw:F2=v^2/2,F3=exp(u)")
    assert nlw.entries((0, 1)) == pytest.approx((0, 1, 1, 0))
    h = models.model_from_id("hamiltonian:h=v^2/2 + v*u^2/2")
    assert h.entries((2, 3)) == (2, 1, 3, 2)
    assert models.model_from_id("toda").entries((0, 0)) == (0, 1, 1, 0)
    assert models.model_from_id("h1:F1=v^4/12").entries((0, 1)) == pytest.approx((0, 1, 1, 0))
    for bad in ("nonsense", "power_wave", "power_wave:alpha=2", "gas", "boussinesq:d=1",
                "hamiltonian:h=u +* v"):
        with pytest.raises((ModelError, ExprSyntaxError)):
            models.model_from_id(bad)
