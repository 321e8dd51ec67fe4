"""Error metrics for splitting coefficients and the search that minimises them.

Three objectives are supported:

* ``E``: Euclidean norm of the bracket coefficients ``gamma_1..gamma_4`` of the
  one-step error in the 4th order modified Hamiltonian (general targets).
* ``EG``: the part of that error that survives for quadratic potentials.
* ``rho_max``: the worst case over ``0 < h < hbar`` of an upper bound on the
  expected error of a two-stage scheme, either in the 4th order modified
  Hamiltonian (``target="modified"``) or in the true one (``target="true"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import ContractError, ConvergenceError, DomainError
from .integrators import FAMILIES, ShadowCoefficients, stage_coefficients

FAMILY_ALIASES = {"1": "verlet", "2": "two_stage", "3": "three_stage", "4": "four_stage"}


def error_metric_E(coeffs: ShadowCoefficients) -> float:
    """``sqrt(gamma_1^2 + ... + gamma_4^2)``."""
    return float(np.sqrt(sum(g * g for g in coeffs.gamma)))


def error_metric_EG(coeffs: ShadowCoefficients) -> float:
    """Error metric for Gaussian targets, ``|gamma_3 - gamma_4|``.

    For a quadratic potential only the ``c_43`` and ``c_44`` terms of the 6th
    order modified Hamiltonian survive, and the one-step error of the 4th
    order one is proportional to ``(c_43 - c_44) theta^T A^2 p``. With
    ``gamma_3 = c_43 / 2`` and ``gamma_4 = c_44 / 2`` that is ``gamma_3 - gamma_4``.
    """
    _, _, g3, g4 = coeffs.gamma
    return float(abs(g3 - g4))


def _rho_factors_modified(h, b):
    h2 = h * h
    num = h**8 * (b * (12 + 4 * b * (6 * b - 5) + b * (1 + 4 * b * (3 * b - 2)) * h2) - 2) ** 2
    dens = (
        2 - b * h2,
        4 + (2 * b - 1) * h2,
        2 + b * (2 * b - 1) * h2,
        12 + (6 * b - 1) * h2,
        6 + (1 + 6 * (b - 1) * b) * h2,
    )
    return num, 4.0, dens


def _rho_factors_true(h, b):
    h2 = h * h
    num = h**4 * (b * b * (1 - 2 * b) * h2 + 4 * b * b - 6 * b + 1) ** 2
    dens = (2 - b * h2, 4 - (1 - 2 * b) * h2, 2 - b * (1 - 2 * b) * h2)
    return num, 2.0, dens


_RHO = {"modified": _rho_factors_modified, "true": _rho_factors_true}


def rho_bound(h: float, b: float, target: str = "modified", guard: bool = False) -> float:
    """Upper bound on the expected energy error of a two-stage scheme.

    ``h`` is the dimensionless step size. With ``guard=True`` a non-positive
    denominator factor (beyond the stability boundary) yields ``inf`` instead
    of raising.

    Raises:
        DomainError: if a denominator factor is not positive and ``guard`` is off.
    """
    if target not in _RHO:
        raise ContractError(f"target must be 'modified' or 'true', got {target!r}")
    if not 0.0 < b < 0.5:
        raise ContractError(f"b={b} outside (0, 1/2)")
    num, scale, dens = _RHO[target](float(h), float(b))
    if min(dens) <= 0.0:
        if guard:
            return float("inf")
        raise DomainError(f"h={h} is beyond the stability boundary for b={b}")
    return float(num / (scale * np.prod(dens)))


def rho_norm(b: float, hbar: float = 2.0, target: str = "modified", n_grid: int = 400) -> float:
    """``max_{0 < h < hbar} rho(h, b)``: grid scan refined by a bounded scalar search."""
    hs = np.linspace(hbar / n_grid, hbar, n_grid)
    vals = np.array([rho_bound(h, b, target, guard=True) for h in hs])
    if not np.all(np.isfinite(vals)):
        return float("inf")
    i = int(np.argmax(vals))
    lo, hi = hs[max(i - 1, 0)], hs[min(i + 1, n_grid - 1)]
    if hi <= lo:
        return float(vals[i])
    res = minimize_scalar(
        lambda h: -rho_bound(h, b, target, guard=True), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(max(vals[i], -res.fun))


@dataclass
class DesignResult:
    family: str
    objective: str
    params: Tuple[float, ...]
    value: float

    @property
    def coefficients(self) -> ShadowCoefficients:
        return stage_coefficients(self.family, self.params)


def _resolve_family(family) -> str:
    family = FAMILY_ALIASES.get(str(family), str(family))
    if family not in FAMILIES or family == "verlet":
        raise ContractError(f"cannot design coefficients for family {family!r}")
    return family


def _objective(objective: str, family: str, hbar: float, target: str) -> Callable[[np.ndarray], float]:
    if objective == "rho_max":
        if family != "two_stage":
            raise ContractError("rho_max is only defined for the two-stage family")
        return lambda x: rho_norm(float(x[0]), hbar, target)
    metric = {"E": error_metric_E, "EG": error_metric_EG}.get(objective)
    if metric is None:
        raise ContractError(f"unknown objective {objective!r}; use E, EG or rho_max")

    def f(x):
        try:
            return metric(stage_coefficients(family, x))
        except ContractError:
            return float("inf")

    return f


def _golden_1d(f, lo, hi, n_grid=200, tol=1e-10, max_iter=200):
    grid = np.linspace(lo, hi, n_grid + 2)[1:-1]
    vals = np.array([f([x]) for x in grid])
    i = int(np.nanargmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    res = minimize_scalar(lambda x: f([x]), bracket=None, bounds=(a, b), method="bounded",
                          options={"xatol": tol, "maxiter": max_iter})
    if not res.success:
        raise ConvergenceError("scalar search did not converge", best=(float(res.x),))
    x = float(res.x)
    return (x,), float(res.fun)


def _nelder_mead(f, dim, rng, restarts=10, max_iter=4000, tol=1e-9):
    # random starts inside the domain; bounds keep the simplex in (0, 1/2)^dim
    bounds = [(1e-6, 0.5 - 1e-6)] * dim
    best = None
    for _ in range(restarts):
        x0 = rng.uniform(0.02, 0.48, size=dim)
        while not np.isfinite(f(x0)):
            x0 = rng.uniform(0.02, 0.48, size=dim)
        res = minimize(f, x0, method="Nelder-Mead", bounds=bounds,
                       options={"xatol": tol, "fatol": 1e-16, "maxiter": max_iter, "maxfev": 2 * max_iter})
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise ConvergenceError("no finite objective value found", best=None)
    if not best.success:
        raise ConvergenceError(best.message, best=tuple(float(v) for v in best.x))
    return tuple(float(v) for v in best.x), float(best.fun)


def minimize_design_metric(
    objective: str,
    family,
    hbar: float = 2.0,
    target: str = "modified",
    restarts: int = 10,
    seed: int = 0,
    bounds: Optional[Tuple[float, float]] = None,
) -> DesignResult:
    """Coefficients of ``family`` minimising ``objective``.

    One-parameter families use a grid scan followed by a bounded scalar
    search; larger families use Nelder-Mead restarted ``restarts`` times from
    random points of ``(0, 1/2)^k``. ``bounds`` restricts the one-parameter
    search interval.

    Raises:
        ConvergenceError: if the search exhausts its budget; ``best`` holds
            the best point found.
    """
    family = _resolve_family(family)
    if objective == "rho_max" and hbar <= 0:
        raise ContractError("hbar must be positive")
    f = _objective(objective, family, hbar, target)
    if family == "two_stage":
        lo, hi = bounds if bounds is not None else (1e-6, 0.5 - 1e-6)
        params, value = _golden_1d(f, lo, hi)
    else:
        dim = 2 if family == "three_stage" else 3
        params, value = _nelder_mead(f, dim, np.random.default_rng(seed), restarts)
    return DesignResult(family, objective, params, value)
