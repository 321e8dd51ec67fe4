import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmhmc.errors import ContractError, EvaluationError
from mmhmc.models import (BananaTarget, BLRTarget, GaussianTarget, SVLatentConditional, SVThetaConditional,
                          banana_simulate, gaussian_eval, generate_wishart_target, sv_inverse_transform,
                          sv_simulate, sv_transform)
from oracles import fd_gradient


def _check_gradient(model, points, tol=1e-4):
    for th in points:
        g = model.gradient(th)
        fd = fd_gradient(model.potential, th)
        scale = max(np.abs(fd).max(), 1.0)
        assert np.abs(g - fd).max() <= tol * scale


def _check_hessian(model, points):
    for th in points:
        H = model.hessian(th)
        assert np.abs(H - H.T).max() <= 1e-12 * max(np.abs(H).max(), 1.0)
        fd = np.column_stack([fd_gradient(lambda t: model.gradient(t)[i], th) for i in range(th.size)]).T
        assert np.allclose(H, fd, rtol=1e-4, atol=1e-4 * max(np.abs(H).max(), 1.0))


def _check_contractions(model, points, rng):
    for th in points:
        v = rng.standard_normal(th.size)
        eps = 1e-4
        # d/dt H(theta + t v) v at t = 0 equals U_ijk v_j v_k
        third = (model.hvp(th + eps * v, v) - model.hvp(th - eps * v, v)) / (2 * eps)
        assert np.allclose(model.third_contract(th, v), third, rtol=1e-5, atol=1e-6)
        fourth = (third_at(model, th + eps * v, v) - third_at(model, th - eps * v, v)) / (2 * eps) @ v
        assert model.fourth_contract(th, v) == pytest.approx(fourth, rel=1e-4, abs=1e-6)


def third_at(model, th, v):
    return model.third_contract(th, v)


def test_gaussian_eval_examples():
    U, g, H = gaussian_eval(np.array([0.0]), variances=[1.0])
    assert (U, g[0], H[0, 0]) == (0.0, 0.0, 1.0)
    U, g, _ = gaussian_eval(np.array([2.0]), variances=[1.0])
    assert U == 2.0 and g[0] == 2.0
    U, _, _ = gaussian_eval(np.array([1.0, 2.0]), variances=[1.0, 4.0])
    assert U == pytest.approx(1.0)


def test_gaussian_dense_matches_diagonal(rng):
    v = rng.uniform(0.5, 3.0, 4)
    th = rng.standard_normal(4)
    a, b = GaussianTarget(variances=v), GaussianTarget(precision=np.diag(1 / v))
    assert a.potential(th) == pytest.approx(b.potential(th), rel=1e-14)
    assert np.allclose(a.gradient(th), b.gradient(th), rtol=1e-14)


def test_wishart_target():
    g = generate_wishart_target(100, np.random.default_rng(1))
    assert g.precision is not None
    np.linalg.cholesky(g.precision)
    big = generate_wishart_target(1000, np.random.default_rng(1))
    var = 1.0 / big.diag_precision
    assert big.precision is None and np.all(var > 0) and np.all(np.diff(var) >= 0)
    a = generate_wishart_target(20, np.random.default_rng(5))
    b = generate_wishart_target(20, np.random.default_rng(5))
    assert np.array_equal(a.precision, b.precision)
    with pytest.raises(ContractError):
        generate_wishart_target(1, np.random.default_rng(0))


def test_banana_examples(rng):
    b = BananaTarget([0.0], 1.0, 1.0)
    assert b.potential(np.zeros(2)) == 0.0 and np.all(b.gradient(np.zeros(2)) == 0)
    b = BananaTarget([1.0], 2.0, 1.0)
    assert b.potential(np.array([1.0, 0.0])) == pytest.approx(0.5)
    y = banana_simulate(100, 1.0, 2.0, rng)
    model = BananaTarget(y, 2.0, 1.0)
    pts = [rng.standard_normal(2) for _ in range(20)]
    _check_gradient(model, pts)
    _check_hessian(model, pts[:5])
    _check_contractions(model, pts[:5], rng)


def test_banana_simulate():
    y = banana_simulate(100, 1.0, 2.0, np.random.default_rng(0))
    assert abs(y.mean() - 1.0) < 0.6
    assert np.all(banana_simulate(10, 1.0, 0.0, np.random.default_rng(0)) == 1.0)
    assert np.array_equal(banana_simulate(5, 1, 2, np.random.default_rng(9)), banana_simulate(5, 1, 2, np.random.default_rng(9)))


def _blr(rng, K=50, D=4):
    X = np.column_stack([np.ones(K), rng.standard_normal((K, D - 1))])
    y = (rng.random(K) < 0.4).astype(float)
    return BLRTarget(X, y, alpha=100.0)


def test_blr_examples(rng):
    m = _blr(rng)
    assert m.potential(np.zeros(m.dim)) == pytest.approx(m.K * np.log(2))
    assert np.allclose(m.gradient(np.zeros(m.dim)), m.X.T @ (0.5 - m.y))
    one = BLRTarget(np.ones((1, 1)), [1.0], alpha=1e300)
    assert one.gradient(np.zeros(1))[0] == pytest.approx(-0.5)
    pts = [rng.standard_normal(m.dim) for _ in range(20)]
    _check_gradient(m, pts)
    _check_hessian(m, pts[:5])
    _check_contractions(m, pts[:5], rng)
    for th in pts:
        np.linalg.cholesky(m.hessian(th))


def test_blr_saturates_without_overflow(rng):
    m = _blr(rng)
    th = np.full(m.dim, 500.0)
    with np.errstate(over="raise", invalid="raise"):
        assert np.isfinite(m.potential(th)) and np.all(np.isfinite(m.gradient(th)))


def test_blr_validates_inputs():
    with pytest.raises(ContractError):
        BLRTarget(np.ones((2, 2)), [0, 2])
    with pytest.raises(ContractError):
        BLRTarget(np.zeros((2, 2)), [0, 1])


@given(st.floats(0.01, 4.99), st.floats(-0.999, 0.999), st.floats(0.1, 3.0))
def test_sv_transform_round_trip(sigma, phi, beta):
    back = sv_inverse_transform(sv_transform(beta, sigma, phi))
    assert np.allclose(back, [beta, sigma, phi], rtol=1e-12, atol=1e-12)


def test_sv_theta_conditional(rng):
    y, x = sv_simulate(60, 0.65, 0.15, 0.98, rng)
    m = SVThetaConditional(x, y)
    pts = [np.array([rng.uniform(0.3, 1.5), rng.uniform(-3, 0), rng.uniform(0.5, 3)]) for _ in range(20)]
    _check_gradient(m, pts)
    _check_hessian(m, pts[:5])
    with pytest.raises(EvaluationError):
        m.potential(np.array([-0.1, 0.0, 0.0]))


def _neg_log_prior_transformed(beta, gamma, a):
    # -log prior in natural units, minus log |d(sigma, phi) / d(gamma, a)|
    sigma, phi = np.exp(gamma), np.tanh(a)
    neg_log_prior = np.log(beta) + 11 * np.log(sigma) + 0.25 / sigma**2 - 19 * np.log1p(phi) - 0.5 * np.log1p(-phi)
    return neg_log_prior - np.log(sigma) - np.log(1 - phi * phi)


@given(st.floats(0.1, 3.0), st.floats(-4.0, 1.0), st.floats(-3.0, 3.0))
def test_sv_theta_conditional_empty_data(beta, gamma, a):
    m = SVThetaConditional(np.zeros(0), np.zeros(0))
    assert m.potential(np.array([beta, gamma, a])) == pytest.approx(
        _neg_log_prior_transformed(beta, gamma, a), rel=1e-12, abs=1e-10)


def test_sv_latent_conditional(rng):
    y, x = sv_simulate(40, 0.65, 0.15, 0.98, rng)
    m = SVLatentConditional((0.65, 0.15, 0.98), y)
    pts = [x + 0.1 * rng.standard_normal(40) for _ in range(20)]
    _check_gradient(m, pts)
    _check_hessian(m, pts[:3])
    _check_contractions(m, pts[:3], rng)
    H = m.hessian(pts[0])
    i, j = np.nonzero(H)
    assert np.abs(i - j).max() == 1


def test_sv_latent_zero_returns():
    m = SVLatentConditional((0.65, 0.15, 0.5), np.zeros(5))
    x = np.linspace(-1, 1, 5)
    prior = SVLatentConditional((0.65, 0.15, 0.5), np.zeros(5))
    sigma, phi = 0.15, 0.5
    S = (1 - phi**2) * x[0] ** 2 + np.sum((x[1:] - phi * x[:-1]) ** 2)
    assert m.potential(x) == pytest.approx(x.sum() / 2 + S / (2 * sigma**2), rel=1e-13)
    assert prior.potential(x) == m.potential(x)


def test_sv_simulate():
    rng = np.random.default_rng(2)
    _, x = sv_simulate(100_000, 0.65, 0.3, 0.0, rng)
    assert abs(x.var() / 0.09 - 1) < 0.02
    y, x = sv_simulate(50, 0.65, 0.0, 0.9, rng, x1=0.0)
    assert np.all(x == 0)
    _, x = sv_simulate(200_000, 0.65, 0.15, 0.9, rng)
    assert abs(x.var() / (0.15**2 / (1 - 0.81)) - 1) < 0.1
