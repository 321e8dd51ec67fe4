"""Modified (shadow) Hamiltonians of order 4 and 6 and importance weights.

Two formulations are provided. The analytic one contracts Hessian (and, for
order 6, third and fourth derivative) information with the momentum. The
numeric one replaces every term that involves a time derivative of the
gradient by a central finite difference over gradients evaluated at
neighbouring integrator stages, so order 4 needs no Hessian at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import MassSpec, PhasePoint, TargetModel, kinetic_energy, true_hamiltonian
from .errors import CapabilityError, ContractError, StencilError
from .integrators import ShadowCoefficients, SplittingScheme, integrate_stages


SIXTH_ORDER_FAMILIES = ("verlet", "two_stage")


@dataclass(frozen=True)
class ShadowOrder:
    order: int = 4
    mode: str = "analytic"

    def __post_init__(self):
        if self.order not in (4, 6):
            raise ContractError(f"shadow order must be 4 or 6, got {self.order}")
        if self.mode not in ("analytic", "numeric"):
            raise ContractError(f"shadow mode must be 'analytic' or 'numeric', got {self.mode!r}")

    @property
    def stencil_half_width(self) -> int:
        return 1 if self.order == 4 else 2


@dataclass
class GradientStencil:
    """Gradients at stage offsets ``-k..k`` around a point, in time order.

    ``epsilon`` is the (absolute) time between the centre and its neighbours.
    """

    grads: List[np.ndarray]
    epsilon: float

    @property
    def k(self) -> int:
        return (len(self.grads) - 1) // 2

    @property
    def centre(self) -> np.ndarray:
        return self.grads[self.k]

    def reversed(self) -> "GradientStencil":
        """Stencil of the same point with the momentum negated."""
        return GradientStencil(self.grads[::-1], self.epsilon)


def _mass_dot(a, b, mass: MassSpec) -> float:
    return float(a @ b) if mass.is_identity else float(a @ (b * mass.inv))


def _require_hessian(model: TargetModel):
    if not model.has_hessian:
        raise CapabilityError(f"{type(model).__name__} has no Hessian; use the numeric shadow")


def shadow4_analytic(
    x: PhasePoint, model: TargetModel, mass: MassSpec, coeffs: ShadowCoefficients, h: float,
    grad: Optional[np.ndarray] = None,
) -> float:
    """4th order modified Hamiltonian from the Hessian of the potential."""
    _require_hessian(model)
    c21, c22 = coeffs.c[:2]
    g = model.gradient(x.theta) if grad is None else grad
    v = mass.apply_inv(x.p)
    Hv = model.hvp(x.theta, v)
    return true_hamiltonian(x, model, mass) + h * h * (c21 * float(v @ Hv) + c22 * _mass_dot(g, g, mass))


def shadow6_analytic(
    x: PhasePoint, model: TargetModel, mass: MassSpec, coeffs: ShadowCoefficients, h: float,
    grad: Optional[np.ndarray] = None,
) -> float:
    """6th order modified Hamiltonian from analytic derivatives.

    Quadratic potentials only pick up the ``c43`` and ``c44`` terms; other
    models must provide third and fourth derivative contractions.
    """
    _require_hessian(model)
    if not model.is_quadratic and not (model.has_third and model.has_fourth):
        raise CapabilityError(
            f"{type(model).__name__} lacks third/fourth derivatives for the 6th order shadow"
        )
    c21, c22, c41, c42, c43, c44 = coeffs.c
    g = model.gradient(x.theta) if grad is None else grad
    v = mass.apply_inv(x.p)
    w = mass.apply_inv(g)
    HV = model.hvp(x.theta, np.column_stack([v, w]))
    Hv, Hw = HV[:, 0], HV[:, 1]
    h2 = h * h
    out = true_hamiltonian(x, model, mass)
    out += h2 * (c21 * float(v @ Hv) + c22 * float(g @ w))
    out += h2 * h2 * (c43 * float(w @ Hw) + c44 * _mass_dot(Hv, Hv, mass))
    if not model.is_quadratic:
        out += h2 * h2 * (
            c41 * model.fourth_contract(x.theta, v) + c42 * float(w @ model.third_contract(x.theta, v))
        )
    return out


def scaled_time_derivatives(stencil: GradientStencil, h: float, order: int):
    """Finite-difference estimates ``P_i = h^i d^i/dt^i U_theta`` at the stencil centre.

    Order 4 returns ``(P1,)`` from a 3-point central difference; order 6
    returns ``(P1, P2, P3)`` with a 4th-order accurate first derivative.
    """
    need = 1 if order == 4 else 2
    if len(stencil.grads) != 2 * need + 1:
        raise StencilError(
            f"order {order} needs {2 * need + 1} stencil gradients, got {len(stencil.grads)}"
        )
    r = h / stencil.epsilon
    g = stencil.grads
    if order == 4:
        return (0.5 * r * (g[2] - g[0]),)
    gm2, gm1, g0, gp1, gp2 = g
    P1 = r * (gm2 - 8 * gm1 + 8 * gp1 - gp2) / 12.0
    P2 = r * r * (gm1 - 2 * g0 + gp1)
    P3 = r**3 * (-gm2 + 2 * gm1 - 2 * gp1 + gp2) / 2.0
    return P1, P2, P3


def shadow_numeric(
    x: PhasePoint, stencil: GradientStencil, model: TargetModel, mass: MassSpec,
    coeffs: ShadowCoefficients, h: float, order: int = 4,
) -> float:
    """Modified Hamiltonian from finite differences of stage gradients.

    The ``k22`` term uses the exact gradient at the centre. At order 6 the
    ``k44`` term needs the Hessian unless ``k44`` vanishes (Verlet).
    """
    k21, k22, k41, k42, k43, k44 = coeffs.k
    g = stencil.centre
    P = scaled_time_derivatives(stencil, h, order)
    v = mass.apply_inv(x.p)
    out = true_hamiltonian(x, model, mass) + h * k21 * float(v @ P[0]) + h * h * k22 * _mass_dot(g, g, mass)
    if order == 6:
        P1, P2, P3 = P
        w = mass.apply_inv(g)
        out += h * k41 * float(v @ P3) + h * h * (k42 * float(w @ P2) + k43 * _mass_dot(P1, P1, mass))
        if k44 != 0.0:
            if not model.has_hessian:
                raise CapabilityError("6th order numeric shadow needs a Hessian for this integrator")
            out += h**4 * k44 * float(w @ model.hvp(x.theta, w))
    return out


def log_weight(x: PhasePoint, model: TargetModel, mass: MassSpec, shadow_value: float) -> float:
    """``log w = H~ - H`` at ``x``."""
    return float(shadow_value - true_hamiltonian(x, model, mass))


def importance_weight(x: PhasePoint, model: TargetModel, mass: MassSpec, shadow_value: float) -> float:
    """Importance weight ``exp(H~ - H)`` of a draw from the shadow density."""
    return float(np.exp(log_weight(x, model, mass, shadow_value)))


class ShadowEvaluator:
    """Evaluates the configured modified Hamiltonian for one scheme and model.

    For the numeric mode this also builds gradient stencils by integrating
    ``k`` extra stages backward and forward from a point; those stages never
    modify the point itself.
    """

    def __init__(
        self, scheme: SplittingScheme, order: ShadowOrder, model: TargetModel, mass: MassSpec,
        coeffs: Optional[ShadowCoefficients] = None,
    ):
        if order.order == 6 and scheme.family not in SIXTH_ORDER_FAMILIES and coeffs is None:
            # the closed-form c_4j of these families do not describe the scheme
            raise ContractError(
                "6th order shadow is only available for Verlet and two-stage schemes "
                "unless coefficients are supplied"
            )
        if order.mode == "analytic":
            _require_hessian(model)
        self.scheme = scheme
        self.order = order
        self.model = model
        self.mass = mass
        self.coeffs = scheme.coefficients if coeffs is None else coeffs

    @property
    def numeric(self) -> bool:
        return self.order.mode == "numeric"

    def stencil(self, x: PhasePoint, h: float, grad: Optional[np.ndarray] = None) -> GradientStencil:
        k = self.order.stencil_half_width
        g0 = self.model.gradient(x.theta) if grad is None else grad
        fwd = integrate_stages(self.scheme, self.model, self.mass, x, h, k, grad0=g0)
        bwd = integrate_stages(self.scheme, self.model, self.mass, x, -h, k, grad0=g0)
        return GradientStencil(bwd[::-1] + [g0] + fwd, self.scheme.stage_time * h)

    def value(
        self, x: PhasePoint, h: float, grad: Optional[np.ndarray] = None,
        stencil: Optional[GradientStencil] = None,
    ) -> float:
        if self.numeric:
            if stencil is None:
                stencil = self.stencil(x, h, grad)
            return shadow_numeric(x, stencil, self.model, self.mass, self.coeffs, h, self.order.order)
        if self.order.order == 4:
            return shadow4_analytic(x, self.model, self.mass, self.coeffs, h, grad)
        return shadow6_analytic(x, self.model, self.mass, self.coeffs, h, grad)
