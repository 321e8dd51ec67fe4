"""Benchmark targets: Gaussian, banana, Bayesian logistic regression and the
two full conditionals of the stochastic volatility model."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .core import TargetModel
from .errors import ContractError, EvaluationError


class GaussianTarget(TargetModel):
    """Zero-mean Gaussian ``N(0, Sigma)`` given by its precision matrix.

    Pass either a dense ``precision`` or the diagonal ``variances``.
    """

    has_hessian = True
    has_third = True
    has_fourth = True
    is_quadratic = True

    def __init__(self, precision=None, variances=None):
        if (precision is None) == (variances is None):
            raise ContractError("give exactly one of `precision` or `variances`")
        if variances is not None:
            variances = np.asarray(variances, dtype=float).ravel()
            if np.any(variances <= 0):
                raise ContractError("variances must be positive")
            self.diag_precision = 1.0 / variances
            self.precision = None
            self.dim = variances.size
        else:
            precision = np.asarray(precision, dtype=float)
            if precision.ndim != 2 or precision.shape[0] != precision.shape[1]:
                raise ContractError("precision must be a square matrix")
            if not np.allclose(precision, precision.T, rtol=0, atol=1e-12 * np.abs(precision).max()):
                raise ContractError("precision must be symmetric")
            self.precision = 0.5 * (precision + precision.T)
            self.diag_precision = None
            self.dim = precision.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self.precision is None

    def covariance(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(1.0 / self.diag_precision)
        return np.linalg.inv(self.precision)

    def potential(self, theta):
        return 0.5 * float(theta @ self.gradient(theta))

    def gradient(self, theta):
        if self.is_diagonal:
            return self.diag_precision * theta
        return self.precision @ theta

    def hessian(self, theta=None):
        if self.is_diagonal:
            return np.diag(self.diag_precision)
        return self.precision

    def hvp(self, theta, v):
        if self.is_diagonal:
            return v * (self.diag_precision if v.ndim == 1 else self.diag_precision[:, None])
        return self.precision @ v

    def initial_point(self, rng):
        if self.is_diagonal:
            return rng.standard_normal(self.dim) / np.sqrt(self.diag_precision)
        chol = np.linalg.cholesky(self.precision)
        # x = L^{-T} z has covariance (L L^T)^{-1}
        return np.linalg.solve(chol.T, rng.standard_normal(self.dim))


def gaussian_eval(theta, precision=None, variances=None):
    """Return ``(U, grad, hess)`` of a zero-mean Gaussian at ``theta``."""
    target = GaussianTarget(precision=precision, variances=variances)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return target.evaluate(theta)


def generate_wishart_target(dim: int, rng: np.random.Generator, full_max: int = 100) -> GaussianTarget:
    """Gaussian whose precision is Wishart(dim dof, identity scale).

    Up to ``full_max`` dimensions the dense precision ``A^T A`` is kept. Beyond
    that the covariance is replaced by a diagonal one holding the sorted
    eigenvalues of the sampled covariance (smallest first).
    """
    if dim < 2:
        raise ContractError("Wishart target needs dim >= 2")
    A = rng.standard_normal((dim, dim))
    if dim <= full_max:
        return GaussianTarget(precision=A.T @ A)
    # eigenvalues of (A^T A)^{-1} are 1 / s_i^2 for the singular values of A
    s = np.linalg.svd(A, compute_uv=False)
    return GaussianTarget(variances=np.sort(1.0 / s**2))


class BananaTarget(TargetModel):
    """Posterior of ``(theta1, theta2)`` with ``y_k ~ N(theta1 + theta2^2, sigma_y^2)``
    and independent ``N(0, sigma_theta^2)`` priors."""

    has_hessian = True
    has_third = True
    has_fourth = True
    dim = 2

    def __init__(self, y, sigma_y: float = 2.0, sigma_theta: float = 1.0):
        self.y = np.atleast_1d(np.asarray(y, dtype=float))
        if sigma_y <= 0 or sigma_theta <= 0:
            raise ContractError("sigma_y and sigma_theta must be positive")
        self.sigma_y = float(sigma_y)
        self.sigma_theta = float(sigma_theta)
        self.K = self.y.size
        self._sum_y = float(self.y.sum())
        self._sum_y2 = float(self.y @ self.y)

    def _fprime(self, theta):
        # derivatives of the likelihood term with respect to m = theta1 + theta2^2
        m = theta[0] + theta[1] ** 2
        f1 = (self.K * m - self._sum_y) / self.sigma_y**2
        f2 = self.K / self.sigma_y**2
        return m, f1, f2

    def potential(self, theta):
        m = theta[0] + theta[1] ** 2
        sq = self._sum_y2 - 2 * m * self._sum_y + self.K * m * m
        return sq / (2 * self.sigma_y**2) + (theta @ theta) / (2 * self.sigma_theta**2)

    def gradient(self, theta):
        _, f1, _ = self._fprime(theta)
        return np.array([f1, 2 * theta[1] * f1]) + theta / self.sigma_theta**2

    def hessian(self, theta):
        _, f1, f2 = self._fprime(theta)
        t2 = theta[1]
        prior = 1.0 / self.sigma_theta**2
        return np.array(
            [
                [f2 + prior, 2 * t2 * f2],
                [2 * t2 * f2, 4 * t2 * t2 * f2 + 2 * f1 + prior],
            ]
        )

    def third_contract(self, theta, v):
        _, _, f2 = self._fprime(theta)
        gm = np.array([1.0, 2 * theta[1]])
        hm_v = np.array([0.0, 2 * v[1]])
        return f2 * (2 * hm_v * (gm @ v) + 2 * v[1] ** 2 * gm)

    def fourth_contract(self, theta, v):
        _, _, f2 = self._fprime(theta)
        return 12.0 * f2 * v[1] ** 4

    def initial_point(self, rng):
        return self.sigma_theta * rng.standard_normal(2)


def banana_simulate(K: int, mean: float, sigma_y: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``K`` observations from ``N(mean, sigma_y^2)``."""
    if K < 1:
        raise ContractError("K must be >= 1")
    return mean + sigma_y * rng.standard_normal(K)


class BLRTarget(TargetModel):
    """Bayesian logistic regression with a ``N(0, alpha I)`` prior.

    ``X`` is the ``K x D`` design matrix whose first column is all ones.
    """

    has_hessian = True
    has_third = True
    has_fourth = True

    def __init__(self, X, y, alpha: float = 100.0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ContractError("X must be K x D with K = len(y)")
        if not np.all((y == 0) | (y == 1)):
            raise ContractError("labels must be 0 or 1")
        if not np.all(X[:, 0] == 1.0):
            raise ContractError("first design column must be all ones")
        if not alpha > 0:
            raise ContractError("alpha must be positive")
        self.X = X
        self.y = y
        self.alpha = float(alpha)
        self.K, self.dim = X.shape
        self._Xty = X.T @ y

    def potential(self, theta):
        z = self.X @ theta
        return float(np.logaddexp(0.0, z).sum() - self.y @ z + theta @ theta / (2 * self.alpha))

    def gradient(self, theta):
        s = expit(self.X @ theta)
        return self.X.T @ s - self._Xty + theta / self.alpha

    def _s1(self, theta):
        s = expit(self.X @ theta)
        return s, s * (1.0 - s)

    def hessian(self, theta):
        _, w = self._s1(theta)
        return (self.X.T * w) @ self.X + np.eye(self.dim) / self.alpha

    def hvp(self, theta, v):
        _, w = self._s1(theta)
        Xv = self.X @ v
        return self.X.T @ (w * Xv if v.ndim == 1 else w[:, None] * Xv) + v / self.alpha

    def third_contract(self, theta, v):
        s, w = self._s1(theta)
        xv = self.X @ v
        return self.X.T @ (w * (1 - 2 * s) * xv * xv)

    def fourth_contract(self, theta, v):
        s, w = self._s1(theta)
        xv = self.X @ v
        return float(np.sum(w * (1 - 6 * s + 6 * s * s) * xv**4))


# --- stochastic volatility -------------------------------------------------


def sv_transform(beta, sigma, phi):
    """Map constrained ``(beta, sigma, phi)`` to ``(beta, log sigma, artanh phi)``."""
    return np.array([beta, np.log(sigma), np.arctanh(phi)], dtype=float)


def sv_inverse_transform(theta_bar):
    """Inverse of :func:`sv_transform`."""
    beta, gamma, a = theta_bar
    return np.array([beta, np.exp(gamma), np.tanh(a)], dtype=float)


def _ar1_sum_squares(x, phi):
    """``(1 - phi^2) x_1^2 + sum_{t>=2} (x_t - phi x_{t-1})^2`` and its phi-derivatives."""
    if x.size == 0:
        return 0.0, 0.0, 0.0
    prev, cur = x[:-1], x[1:]
    resid = cur - phi * prev
    S = (1 - phi * phi) * x[0] ** 2 + resid @ resid
    dS = -2 * phi * x[0] ** 2 - 2 * (prev @ resid)
    d2S = -2 * x[0] ** 2 + 2 * (prev @ prev)
    return S, dS, d2S


class SVThetaConditional(TargetModel):
    """Negative log of ``pi(beta, sigma, phi | y, x)`` in the unconstrained
    coordinates ``(beta, gamma = log sigma, a = artanh phi)``.

    Priors: ``p(beta) ~ 1/beta``, ``sigma^2 ~ Scale-inv-chi^2(10, 0.05)``,
    ``(phi + 1)/2 ~ Beta(20, 1.5)``. Log-Jacobian terms of the transform are
    included. ``beta`` stays untransformed, so ``beta <= 0`` is an evaluation
    error.
    """

    has_hessian = True
    dim = 3

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=float).ravel()
        self.y = np.asarray(y, dtype=float).ravel()
        if self.x.size != self.y.size:
            raise ContractError("x and y must have equal length")
        self.T = self.y.size
        self._Q = float(np.sum(self.y**2 * np.exp(-self.x)))
        # log(1 + phi), log(1 - phi) weights: prior, Jacobian and the x_1 variance
        x1 = 0.5 if self.T > 0 else 0.0
        self._c1, self._c2 = 20.0 + x1, 1.5 + x1

    def _unpack(self, theta_bar):
        beta, gamma, a = theta_bar
        if not beta > 0:
            raise EvaluationError("beta must stay positive", index=0)
        phi = np.tanh(a)
        S, dS, d2S = _ar1_sum_squares(self.x, phi)
        return beta, gamma, phi, S, dS, d2S

    def potential(self, theta_bar):
        beta, gamma, phi, S, _, _ = self._unpack(theta_bar)
        T = self.T
        return float(
            (T + 1) * np.log(beta)
            + self._Q / (2 * beta**2)
            + (T + 10) * gamma
            + (0.5 * S + 0.25) * np.exp(-2 * gamma)
            - self._c1 * np.log1p(phi)
            - self._c2 * np.log1p(-phi)
        )

    def gradient(self, theta_bar):
        beta, gamma, phi, S, dS, _ = self._unpack(theta_bar)
        T = self.T
        e = np.exp(-2 * gamma)
        jac = 1 - phi * phi
        return np.array(
            [
                (T + 1) / beta - self._Q / beta**3,
                (T + 10) - (S + 0.5) * e,
                0.5 * e * dS * jac - self._c1 * (1 - phi) + self._c2 * (1 + phi),
            ]
        )

    def hessian(self, theta_bar):
        beta, gamma, phi, S, dS, d2S = self._unpack(theta_bar)
        T = self.T
        e = np.exp(-2 * gamma)
        jac = 1 - phi * phi
        h_bb = -(T + 1) / beta**2 + 3 * self._Q / beta**4
        h_gg = 2 * (S + 0.5) * e
        h_ga = -e * dS * jac
        h_aa = 0.5 * e * (d2S * jac * jac - 2 * phi * jac * dS) + (self._c1 + self._c2) * jac
        return np.array([[h_bb, 0.0, 0.0], [0.0, h_gg, h_ga], [0.0, h_ga, h_aa]])


class SVLatentConditional(TargetModel):
    """Negative log of ``pi(x | y, beta, sigma, phi)`` for the AR(1) log-volatilities.

    The Hessian is tridiagonal; :meth:`hvp` never forms it densely.
    """

    has_hessian = True
    has_third = True
    has_fourth = True

    def __init__(self, params, y):
        beta, sigma, phi = (float(v) for v in params)
        if not (beta > 0 and sigma > 0 and abs(phi) < 1):
            raise ContractError("need beta > 0, sigma > 0 and |phi| < 1")
        self.beta, self.sigma, self.phi = beta, sigma, phi
        self.y = np.asarray(y, dtype=float).ravel()
        self.dim = self.T = self.y.size
        self._c = self.y**2 / (2 * beta**2)
        T = self.T
        diag = np.full(T, 1 + phi * phi)
        if T == 1:
            diag[0] = 1 - phi * phi
        else:
            diag[0] = diag[-1] = 1.0
        self._q_diag = diag / sigma**2
        self._q_off = -phi / sigma**2

    def _qx(self, x):
        out = self._q_diag * x if x.ndim == 1 else self._q_diag[:, None] * x
        out[:-1] += self._q_off * x[1:]
        out[1:] += self._q_off * x[:-1]
        return out

    def potential(self, x):
        obs = 0.5 * x.sum() + self._c @ np.exp(-x)
        return float(obs + 0.5 * (x @ self._qx(x)))

    def gradient(self, x):
        return 0.5 - self._c * np.exp(-x) + self._qx(x)

    def _obs_curv(self, x):
        return self._c * np.exp(-x)

    def hessian(self, x):
        H = np.diag(self._q_diag + self._obs_curv(x))
        idx = np.arange(self.T - 1)
        H[idx, idx + 1] = H[idx + 1, idx] = self._q_off
        return H

    def hvp(self, x, v):
        w = self._obs_curv(x)
        return (w * v if v.ndim == 1 else w[:, None] * v) + self._qx(v)

    def third_contract(self, x, v):
        return -self._obs_curv(x) * v * v

    def fourth_contract(self, x, v):
        return float(self._obs_curv(x) @ v**4)

    def initial_point(self, rng):
        return sv_simulate(self.T, self.beta, self.sigma, self.phi, rng)[1]


def sv_simulate(T: int, beta: float, sigma: float, phi: float, rng: np.random.Generator, x1=None):
    """Simulate returns ``y`` and log-volatilities ``x`` of the SV model.

    Returns ``(y, x)``. ``x1`` overrides the stationary draw of the first
    latent value.
    """
    if not (sigma >= 0 and abs(phi) < 1):
        raise ContractError("need sigma >= 0 and |phi| < 1")
    x = np.empty(T)
    eta = rng.standard_normal(T)
    eps = rng.standard_normal(T)
    if T:
        x[0] = sigma / np.sqrt(1 - phi * phi) * eta[0] if x1 is None else x1
    for t in range(1, T):
        x[t] = phi * x[t - 1] + sigma * eta[t]
    y = beta * np.exp(x / 2) * eps
    return y, x
