import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmhmc.core import MassSpec, PhasePoint, TargetModel, true_hamiltonian
from mmhmc.errors import CapabilityError, ContractError, StencilError
from mmhmc.integrators import CATALOG, get_scheme, integrate
from mmhmc.models import BananaTarget, GaussianTarget
from mmhmc.shadow import (GradientStencil, ShadowEvaluator, ShadowOrder, importance_weight, log_weight,
                          scaled_time_derivatives, shadow4_analytic, shadow6_analytic, shadow_numeric)
from oracles import geometric_mean_slope

ONE = MassSpec.identity(1)
HARMONIC = GaussianTarget(variances=[1.0])


class Anharmonic(TargetModel):
    """U = theta^2/2 + theta^4/4 with every derivative available."""

    dim = 1
    has_hessian = has_third = has_fourth = True

    def __init__(self, shift=0.0):
        self.shift = shift

    def potential(self, t):
        return float(t[0] ** 2 / 2 + t[0] ** 4 / 4) + self.shift

    def gradient(self, t):
        return np.array([t[0] + t[0] ** 3])

    def hessian(self, t):
        return np.array([[1 + 3 * t[0] ** 2]])

    def third_contract(self, t, v):
        return np.array([6 * t[0] * v[0] ** 2])

    def fourth_contract(self, t, v):
        return float(6 * v[0] ** 4)


class GradientOnly(TargetModel):
    dim = 1

    def potential(self, t):
        return float(t[0] ** 2 / 2)

    def gradient(self, t):
        return t.copy()


def drift_per_time(model, scheme, order, mode, h, T=5.0):
    """max_t |F(x_t) - F(x_0)| / T along a trajectory, F = H (order 0) or a shadow."""
    m = MassSpec.identity(model.dim)
    ev = ShadowEvaluator(scheme, ShadowOrder(order or 4, mode), model, m)
    f = (lambda x: true_hamiltonian(x, model, m)) if order == 0 else (lambda x: ev.value(x, h))
    x = PhasePoint(np.full(model.dim, 0.8), np.full(model.dim, 0.5))
    f0, worst = f(x), 0.0
    for _ in range(int(round(T / h))):
        x = integrate(scheme, model, m, x, h, 1)
        worst = max(worst, abs(f(x) - f0))
    return worst / T


def test_shadow_order_validation():
    with pytest.raises(ContractError):
        ShadowOrder(5)
    with pytest.raises(ContractError):
        ShadowOrder(4, "symbolic")
    for name in ("m-me3", "m-me4"):
        with pytest.raises(ContractError):
            ShadowEvaluator(CATALOG[name], ShadowOrder(6, "analytic"), HARMONIC, ONE)


def test_shadow4_examples():
    co = get_scheme("verlet").coefficients
    assert shadow4_analytic(PhasePoint([0.0], [0.0]), HARMONIC, ONE, co, 0.3) == 0.0
    th, p, h = 0.7, -1.3, 0.2
    expected = th**2 / 2 + p**2 / 2 + h * h * (p * p / 12 - th * th / 24)
    assert shadow4_analytic(PhasePoint([th], [p]), HARMONIC, ONE, co, h) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(CapabilityError):
        shadow4_analytic(PhasePoint([0.0], [1.0]), GradientOnly(), ONE, co, 0.1)


def test_shadow4_converges_to_H_with_slope_two():
    co = get_scheme("verlet").coefficients
    x = PhasePoint([0.4], [0.9])
    hs = np.geomspace(1e-3, 1e-1, 6)
    diffs = [abs(shadow4_analytic(x, HARMONIC, ONE, co, h) - true_hamiltonian(x, HARMONIC, ONE)) for h in hs]
    assert abs(geometric_mean_slope(hs, diffs) - 2) < 0.05


def test_shadow6_quadratic_form_and_stationary_point():
    co = get_scheme("verlet").coefficients
    c21, c22, c41, c42, c43, c44 = co.c
    th, p, h = 0.7, -1.3, 0.2
    expected = th**2 / 2 + p**2 / 2 + h**2 * (c21 * p * p + c22 * th * th) + h**4 * (c43 * th * th + c44 * p * p)
    assert shadow6_analytic(PhasePoint([th], [p]), HARMONIC, ONE, co, h) == pytest.approx(expected, rel=1e-14)
    assert shadow6_analytic(PhasePoint([0.0], [0.0]), Anharmonic(), ONE, co, 0.3) == 0.0
    with pytest.raises(CapabilityError):
        shadow6_analytic(PhasePoint([0.0], [1.0]), BananaStub(), MassSpec.identity(2), co, 0.1)


class BananaStub(BananaTarget):
    has_third = False

    def __init__(self):
        super().__init__([1.0])


@pytest.mark.parametrize("name", ["verlet", "m-bcss", "m-me3", "m-me4"])
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 0.5))
def test_numeric_equals_analytic_on_quadratic(name, th, p, h):
    s = CATALOG[name]
    ev = ShadowEvaluator(s, ShadowOrder(4, "numeric"), HARMONIC, ONE)
    x = PhasePoint([th], [p])
    a = shadow4_analytic(x, HARMONIC, ONE, s.coefficients, h)
    assert ev.value(x, h) == pytest.approx(a, rel=1e-12, abs=1e-12)


def test_stencil_shape_and_errors():
    ev = ShadowEvaluator(get_scheme("verlet"), ShadowOrder(6, "numeric"), HARMONIC, ONE)
    st_ = ev.stencil(PhasePoint([0.3], [0.2]), 0.1)
    assert st_.k == 2 and len(st_.grads) == 5 and st_.epsilon == pytest.approx(0.1)
    with pytest.raises(StencilError):
        scaled_time_derivatives(GradientStencil(st_.grads[1:4], 0.1), 0.1, 6)
    ev2 = ShadowEvaluator(get_scheme("m-bcss"), ShadowOrder(4, "numeric"), HARMONIC, ONE)
    assert ev2.stencil(PhasePoint([0.3], [0.2]), 0.1).epsilon == pytest.approx(0.05)
    ev4 = ShadowEvaluator(get_scheme("m-me4"), ShadowOrder(4, "numeric"), HARMONIC, ONE)
    assert ev4.stencil(PhasePoint([0.3], [0.2]), 0.1).epsilon == pytest.approx(0.1 * 0.0602952)


def test_zero_momentum_symmetric_stencil_gives_zero_rate():
    ev = ShadowEvaluator(get_scheme("verlet"), ShadowOrder(4, "numeric"), Anharmonic(), ONE)
    (P1,) = scaled_time_derivatives(ev.stencil(PhasePoint([0.0], [0.0]), 0.1), 0.1, 4)
    assert P1[0] == 0.0


def test_numeric_needs_hessian_only_for_two_stage_sixth_order():
    x = PhasePoint([0.3], [0.2])
    ShadowEvaluator(get_scheme("verlet"), ShadowOrder(6, "numeric"), GradientOnly(), ONE).value(x, 0.1)
    with pytest.raises(CapabilityError):
        ShadowEvaluator(get_scheme("m-bcss"), ShadowOrder(6, "numeric"), GradientOnly(), ONE).value(x, 0.1)


def test_conservation_ordering_harmonic():
    s = get_scheme("verlet")
    d = {o: drift_per_time(HARMONIC, s, o, "analytic", 0.1, T=100.0) for o in (0, 4, 6)}
    assert d[6] < d[4] < d[0]


def test_per_step_error_order_five():
    s = get_scheme("verlet")
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    x = PhasePoint([0.8], [0.5])
    errs = []
    for h in hs:
        x1 = integrate(s, HARMONIC, ONE, x, h, 1)
        errs.append(abs(shadow4_analytic(x1, HARMONIC, ONE, s.coefficients, h)
                        - shadow4_analytic(x, HARMONIC, ONE, s.coefficients, h)))
    assert abs(geometric_mean_slope(hs, errs) - 5) < 0.3


@pytest.mark.parametrize("name", ["verlet", "m-bcss", "m-me3", "m-me4"])
@pytest.mark.parametrize("mode", ["analytic", "numeric"])
def test_fixed_time_order_four_anharmonic(name, mode):
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    d = [drift_per_time(Anharmonic(), CATALOG[name], 4, mode, h) for h in hs]
    assert abs(geometric_mean_slope(hs, d) - 4) < 0.3


@pytest.mark.parametrize("name", ["verlet", "m-bcss"])
def test_sixth_order_analytic_anharmonic(name):
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    d = [drift_per_time(Anharmonic(), CATALOG[name], 6, "analytic", h) for h in hs]
    assert abs(geometric_mean_slope(hs, d) - 6) < 0.5


@pytest.mark.parametrize("name", ["verlet", "m-bcss"])
def test_sixth_order_numeric_is_at_least_fourth_order(name):
    # stencils taken along the discrete trajectory limit this variant to 4th order
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    d = [drift_per_time(Anharmonic(), CATALOG[name], 6, "numeric", h) for h in hs]
    assert geometric_mean_slope(hs, d) > 3.7


def test_weights():
    x = PhasePoint([0.5], [0.1])
    H = true_hamiltonian(x, HARMONIC, ONE)
    assert importance_weight(x, HARMONIC, ONE, H) == 1.0
    assert importance_weight(x, HARMONIC, ONE, H + 0.1) == pytest.approx(np.exp(0.1), rel=1e-12)
    hs = np.geomspace(1e-3, 1e-1, 5)
    ws = [abs(log_weight(x, HARMONIC, ONE, shadow4_analytic(x, HARMONIC, ONE, get_scheme("verlet").coefficients, h)))
          for h in hs]
    assert np.all(np.diff(ws) > 0) and ws[0] < 1e-6


@given(st.floats(-50, 50), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_weight_invariant_to_constant_in_potential(c, th, p):
    x = PhasePoint([th], [p])
    s = get_scheme("m-bcss")
    for mode in ("analytic", "numeric"):
        a = ShadowEvaluator(s, ShadowOrder(4, mode), Anharmonic(), ONE)
        b = ShadowEvaluator(s, ShadowOrder(4, mode), Anharmonic(c), ONE)
        la = log_weight(x, Anharmonic(), ONE, a.value(x, 0.1))
        lb = log_weight(x, Anharmonic(c), ONE, b.value(x, 0.1))
        assert la == pytest.approx(lb, abs=1e-12)
