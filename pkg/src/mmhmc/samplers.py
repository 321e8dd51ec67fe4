"""Markov chain kernels: RWMH, MALA, HMC, GHMC and MMHMC.

MMHMC alternates a partial momentum update tested on an extended modified
Hamiltonian (PMMC) with a Hamiltonian dynamics proposal tested on the modified
Hamiltonian itself (HDMC). Samples are later reweighted with
``w = exp(H~ - H)``. Each chain owns its random generator; kernels never share
mutable state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .core import MassSpec, PhasePoint, TargetModel, draw_momentum, kinetic_energy, true_hamiltonian
from .errors import ContractError, EvaluationError, MMHMCError
from .integrators import SplittingScheme, get_scheme, integrate
from .shadow import GradientStencil, ShadowEvaluator, ShadowOrder, scaled_time_derivatives
from .integrators import ShadowCoefficients, integrate_stages

KINDS = ("rwmh", "mala", "hmc", "ghmc", "mmhmc")


@dataclass
class SamplerConfig:
    """Tuning parameters and their per-iteration randomisation policies.

    Attributes:
        h: step size; with ``h_policy="uniform"`` each iteration draws from
            ``U(0.8 h, 1.2 h)``.
        L: number of integration steps; ``L_policy="uniform"`` draws from ``{1..L}``.
        phi: noise parameter in ``(0, 1]``. ``phi_policy`` is ``"fixed"``,
            ``"uniform"`` (``U(0, phi)``) or ``"around"`` (``U(0.8 phi, 1.2 phi)``,
            capped at 1).
        flip_mode: ``"automatic"`` or ``"reduced"`` momentum flipping on rejection.
        shadow: order and formulation of the modified Hamiltonian.
        scheme: splitting integrator.
        mass: mass matrix; identity of the model dimension when omitted.
        pmmc: ``"implicit"`` (closed-form difference) or ``"explicit"`` (full
            shadow evaluations of both momenta).
        coeffs: override of the scheme's shadow coefficients (testing aid).
        rw_scale: proposal scale of the random walk sampler.
    """

    h: float = 0.1
    L: int = 10
    phi: float = 0.5
    h_policy: str = "fixed"
    L_policy: str = "fixed"
    phi_policy: str = "fixed"
    flip_mode: str = "automatic"
    shadow: ShadowOrder = field(default_factory=ShadowOrder)
    scheme: SplittingScheme = field(default_factory=lambda: get_scheme("verlet"))
    mass: Optional[MassSpec] = None
    pmmc: str = "implicit"
    coeffs: Optional[ShadowCoefficients] = None
    rw_scale: float = 1.0
    allow_phi_zero: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ContractError(f"h must be positive, got {self.h}")
        if int(self.L) != self.L or self.L < 1:
            raise ContractError(f"L must be an integer >= 1, got {self.L}")
        self.L = int(self.L)
        lo = 0.0 if self.allow_phi_zero else np.nextafter(0.0, 1.0)
        if not lo <= self.phi <= 1.0:
            raise ContractError(f"phi must lie in (0, 1], got {self.phi}")
        for name, value, allowed in (
            ("h_policy", self.h_policy, ("fixed", "uniform")),
            ("L_policy", self.L_policy, ("fixed", "uniform")),
            ("phi_policy", self.phi_policy, ("fixed", "uniform", "around")),
            ("flip_mode", self.flip_mode, ("automatic", "reduced")),
            ("pmmc", self.pmmc, ("implicit", "explicit")),
        ):
            if value not in allowed:
                raise ContractError(f"{name} must be one of {allowed}, got {value!r}")
        if not self.rw_scale > 0:
            raise ContractError("rw_scale must be positive")

    def draw(self, rng: np.random.Generator) -> Tuple[float, int, float]:
        """Draw ``(h_n, L_n, phi_n)`` for one iteration."""
        h = self.h * rng.uniform(0.8, 1.2) if self.h_policy == "uniform" else self.h
        L = int(rng.integers(1, self.L + 1)) if self.L_policy == "uniform" else self.L
        if self.phi_policy == "uniform":
            phi = rng.uniform(0.0, self.phi)
        elif self.phi_policy == "around":
            phi = min(1.0, self.phi * rng.uniform(0.8, 1.2))
        else:
            phi = self.phi
        return float(h), L, float(phi)

    def mass_for(self, dim: int) -> MassSpec:
        if self.mass is None:
            return MassSpec.identity(dim)
        if self.mass.dim != dim:
            raise ContractError(f"mass has dimension {self.mass.dim}, model has {dim}")
        return self.mass


@dataclass
class ChainState:
    """Current point of a chain plus the cached quantities that depend on it.

    ``shadow`` and ``stencil`` are valid for step size ``shadow_h`` only.
    ``prev``/``prev_shadow`` describe the start of the previous trajectory and
    ``last_accepted`` whether that trajectory was accepted (reduced flipping).
    """

    current: PhasePoint
    grad: np.ndarray
    U: float
    shadow: Optional[float] = None
    shadow_h: Optional[float] = None
    stencil: Optional[GradientStencil] = None
    prev: Optional[PhasePoint] = None
    prev_shadow: Optional[float] = None
    prev_h: Optional[float] = None
    last_accepted: bool = False

    @classmethod
    def start(cls, model: TargetModel, theta, p) -> "ChainState":
        x = PhasePoint(theta, p)
        U = float(model.potential(x.theta))
        g = model.gradient(x.theta)
        if not np.isfinite(U) or not np.all(np.isfinite(g)):
            raise EvaluationError("model is not finite at the initial point")
        return cls(x, g, U)

    def invalidate(self) -> None:
        """Drop cached shadow quantities (the target changed)."""
        self.shadow = self.shadow_h = self.stencil = None
        self.prev = self.prev_shadow = self.prev_h = None
        self.last_accepted = False


@dataclass
class StepInfo:
    accepted: bool
    momentum_accepted: Optional[bool] = None
    flipped: bool = False
    log_weight: float = 0.0
    h: float = 0.0
    L: int = 0
    phi: float = 0.0


def _accept(log_ratio: float, rng: np.random.Generator) -> bool:
    """Metropolis decision with ``min(1, exp(log_ratio))``; NaN rejects."""
    u = rng.random()
    if not np.isfinite(log_ratio):
        return bool(log_ratio > 0)
    return bool(np.log(u) < min(0.0, log_ratio)) if u > 0 else True


# --- simple kernels ----------------------------------------------------------


def rwmh_step(state: ChainState, model: TargetModel, proposal_scale: float, rng: np.random.Generator):
    """Gaussian random walk Metropolis step. Returns ``(state, accepted)``."""
    if not proposal_scale > 0:
        raise ContractError("proposal scale must be positive")
    theta = state.current.theta
    prop = theta + proposal_scale * rng.standard_normal(theta.size)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            U_new = float(model.potential(prop))
        except (EvaluationError, FloatingPointError, ValueError, OverflowError):
            U_new = np.inf
    if np.isnan(U_new):
        U_new = np.inf
    if _accept(state.U - U_new, rng):
        g = model.gradient(prop)
        return ChainState(PhasePoint(prop, state.current.p), g, U_new), True
    return state, False


def hmc_step(state: ChainState, model: TargetModel, config: SamplerConfig, rng: np.random.Generator,
             draws: Optional[Tuple[float, int, float]] = None):
    """HMC: fresh momentum, integrate, accept on the true Hamiltonian."""
    mass = config.mass_for(model.dim)
    h, L, _ = config.draw(rng) if draws is None else draws
    p = draw_momentum(mass, rng)
    x = PhasePoint(state.current.theta, p)
    H0 = state.U + kinetic_energy(p, mass)
    try:
        x_new, g_new = integrate(config.scheme, model, mass, x, h, L, grad0=state.grad, return_grad=True)
        H1 = true_hamiltonian(x_new, model, mass)
        log_ratio = H0 - H1
    except EvaluationError:
        log_ratio, x_new = -np.inf, None
    if x_new is not None and _accept(log_ratio, rng):
        U1 = H1 - kinetic_energy(x_new.p, mass)
        return ChainState(x_new, g_new, U1), StepInfo(True, h=h, L=L)
    return ChainState(x, state.grad, state.U), StepInfo(False, h=h, L=L)


def mala_step(state: ChainState, model: TargetModel, h: float, rng: np.random.Generator):
    """MALA as one Verlet step of HMC with full momentum refreshment."""
    if not h > 0:
        raise ContractError("h must be positive")
    cfg = SamplerConfig(h=h, L=1, scheme=get_scheme("verlet"))
    return hmc_step(state, model, cfg, rng)


def partial_momentum(p: np.ndarray, u: np.ndarray, phi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Rotate ``(p, u)`` by the noise angle: returns ``(p*, u*)``."""
    a, b = np.sqrt(1.0 - phi), np.sqrt(phi)
    return a * p + b * u, -b * p + a * u


def ghmc_iteration(state: ChainState, model: TargetModel, config: SamplerConfig, rng: np.random.Generator):
    """GHMC: unconditional partial momentum update, then HDMC on the true ``H``."""
    mass = config.mass_for(model.dim)
    h, L, phi = config.draw(rng)
    u = draw_momentum(mass, rng)
    p_bar, _ = partial_momentum(state.current.p, u, phi)
    x = PhasePoint(state.current.theta, p_bar)
    H0 = state.U + kinetic_energy(p_bar, mass)
    try:
        x_new, g_new = integrate(config.scheme, model, mass, x, h, L, grad0=state.grad, return_grad=True)
        H1 = true_hamiltonian(x_new, model, mass)
        log_ratio = H0 - H1
    except EvaluationError:
        log_ratio, x_new = -np.inf, None
    if x_new is not None and _accept(log_ratio, rng):
        return ChainState(x_new, g_new, H1 - kinetic_energy(x_new.p, mass)), StepInfo(True, h=h, L=L, phi=phi)
    return ChainState(x.flipped(), state.grad, state.U), StepInfo(False, flipped=True, h=h, L=L, phi=phi)


# --- MMHMC ----------------------------------------------------------------------


def flip_probability(alpha_forward: float, alpha_reverse: Optional[float], prev_accepted: bool, mode: str) -> float:
    """Probability of negating the momentum after a rejected proposal.

    ``alpha_forward`` is the acceptance probability of the rejected move and
    ``alpha_reverse`` that of the move from the flipped current state to the
    flipped previous state.
    """
    if mode == "automatic":
        return 1.0
    if mode != "reduced":
        raise ContractError(f"unknown flip mode {mode!r}")
    if prev_accepted:
        if alpha_reverse is None or alpha_reverse <= 0.0:
            return 1.0
        return max(0.0, 1.0 - alpha_forward / alpha_reverse)
    return 1.0 - alpha_forward


def flip_decision(alpha_forward, alpha_reverse, prev_accepted, mode, rng: np.random.Generator) -> int:
    """Momentum sign after a rejection: ``-1`` to flip, ``+1`` to keep."""
    pf = flip_probability(alpha_forward, alpha_reverse, prev_accepted, mode)
    if pf >= 1.0:
        return -1
    if pf <= 0.0:
        return 1
    return -1 if rng.random() < pf else 1


def _quad_rotation_delta(Ku: np.ndarray, Kp: np.ndarray, u: np.ndarray, p: np.ndarray, phi: float) -> float:
    """``p*^T K p* - p^T K p`` for the rotation with angle ``phi`` (``K`` symmetric)."""
    A = float(u @ Ku - p @ Kp)
    B = float(u @ Kp)
    return phi * A + 2.0 * np.sqrt(phi * (1.0 - phi)) * B


class MMHMCKernel:
    """MMHMC transition for one model and configuration.

    The analytic path needs the model Hessian; the numeric path needs only
    gradients (plus a Hessian for 6th order two-stage schemes).
    """

    def __init__(self, model: TargetModel, config: SamplerConfig):
        self.model = model
        self.config = config
        self.mass = config.mass_for(model.dim)
        self.evaluator = ShadowEvaluator(config.scheme, config.shadow, model, self.mass, config.coeffs)
        self.coeffs = self.evaluator.coeffs

    @property
    def numeric(self) -> bool:
        return self.evaluator.numeric

    # shadow bookkeeping -------------------------------------------------------

    def ensure_shadow(self, state: ChainState, h: float) -> None:
        """Make ``state.shadow`` (and the stencil) valid for step size ``h``."""
        if state.shadow is not None and state.shadow_h == h:
            return
        x = state.current
        if self.numeric:
            state.stencil = self.evaluator.stencil(x, h, state.grad)
        state.shadow = self.evaluator.value(x, h, state.grad, state.stencil)
        state.shadow_h = h

    def _prev_shadow(self, state: ChainState, h: float) -> Optional[float]:
        if state.prev is None:
            return None
        if state.prev_h != h:
            state.prev_shadow = self.evaluator.value(state.prev, h)
            state.prev_h = h
        return state.prev_shadow

    # PMMC ----------------------------------------------------------------------

    def pmmc_delta_implicit(self, x: PhasePoint, stencil, x_star: PhasePoint, stencil_star,
                            u: np.ndarray, phi: float, h: float, grad: np.ndarray) -> float:
        """Change of the extended modified Hamiltonian from closed-form terms only."""
        mass, model = self.mass, self.model
        c21, c22, c41, c42, c43, c44 = self.coeffs.c
        order = self.config.shadow.order
        if not self.numeric:
            if order == 6 and not model.is_quadratic:
                raise ContractError("implicit PMMC for the 6th order shadow needs a quadratic potential")
            vu, vp = mass.apply_inv(u), mass.apply_inv(x.p)
            HV = model.hvp(x.theta, np.column_stack([vu, vp]))
            Hu, Hp = HV[:, 0], HV[:, 1]
            d = h * h * c21 * _quad_rotation_delta(Hu, Hp, vu, vp, phi)
            if order == 6:
                d += h**4 * c44 * _quad_rotation_delta(mass.apply_inv(Hu), mass.apply_inv(Hp), Hu, Hp, phi)
            return float(d)
        k21, k22, k41, k42, k43, k44 = self.coeffs.k
        P = scaled_time_derivatives(stencil, h, order)
        Ps = scaled_time_derivatives(stencil_star, h, order)
        v, vs = mass.apply_inv(x.p), mass.apply_inv(x_star.p)
        d = h * k21 * float(vs @ Ps[0] - v @ P[0])
        if order == 6:
            w = mass.apply_inv(grad)
            d += h * k41 * float(vs @ Ps[2] - v @ P[2])
            d += h * h * k42 * float(w @ (Ps[1] - P[1]))
            d += h * h * k43 * float(Ps[0] @ mass.apply_inv(Ps[0]) - P[0] @ mass.apply_inv(P[0]))
        return float(d)

    def pmmc_delta_explicit(self, x: PhasePoint, shadow_x: float, x_star: PhasePoint, stencil_star,
                            u: np.ndarray, u_star: np.ndarray, h: float, grad: np.ndarray) -> Tuple[float, float]:
        """``(delta, shadow at x_star)`` from full shadow evaluations of both states."""
        shadow_star = self.evaluator.value(x_star, h, grad, stencil_star)
        d = shadow_star + kinetic_energy(u_star, self.mass) - shadow_x - kinetic_energy(u, self.mass)
        return float(d), shadow_star

    def pmmc(self, state: ChainState, h: float, phi: float, rng: np.random.Generator) -> bool:
        """Partial momentum update with a Metropolis test; updates ``state`` in place."""
        x = state.current
        u = draw_momentum(self.mass, rng)
        p_star, u_star = partial_momentum(x.p, u, phi)
        x_star = PhasePoint(x.theta, p_star)
        shadow_star = None
        stencil_star = None
        try:
            if self.numeric:
                stencil_star = self.evaluator.stencil(x_star, h, state.grad)
            if self.config.pmmc == "implicit" and not (
                not self.numeric and self.config.shadow.order == 6 and not self.model.is_quadratic
            ):
                d = self.pmmc_delta_implicit(x, state.stencil, x_star, stencil_star, u, phi, h, state.grad)
            else:
                d, shadow_star = self.pmmc_delta_explicit(
                    x, state.shadow, x_star, stencil_star, u, u_star, h, state.grad
                )
        except EvaluationError:
            return False
        if not _accept(-d, rng):
            return False
        if shadow_star is None:
            shadow_star = self.evaluator.value(x_star, h, state.grad, stencil_star)
        state.current = x_star
        state.stencil = stencil_star
        state.shadow = shadow_star
        state.shadow_h = h
        return True

    # HDMC ------------------------------------------------------------------------

    def _end_stencil(self, start_stencil: GradientStencil, log: List[np.ndarray], x_new: PhasePoint,
                     g_new: np.ndarray, h: float) -> GradientStencil:
        k = self.config.shadow.stencil_half_width
        times = list(start_stencil.grads[:k]) + log
        back = times[-1 - k:-1]
        fwd = integrate_stages(self.config.scheme, self.model, self.mass, x_new, h, k, grad0=g_new)
        return GradientStencil(back + [g_new] + fwd, self.config.scheme.stage_time * h)

    def hdmc(self, state: ChainState, h: float, L: int, rng: np.random.Generator) -> Tuple[ChainState, StepInfo]:
        x_bar, shadow_bar = state.current, state.shadow
        log = [] if self.numeric else None
        try:
            x_new, g_new = integrate(self.config.scheme, self.model, self.mass, x_bar, h, L,
                                     grad_log=log, grad0=state.grad, return_grad=True)
            stencil_new = self._end_stencil(state.stencil, log, x_new, g_new, h) if self.numeric else None
            shadow_new = self.evaluator.value(x_new, h, g_new, stencil_new)
            log_alpha = min(0.0, shadow_bar - shadow_new)
            if np.isnan(log_alpha):
                raise EvaluationError("modified Hamiltonian is not finite at the proposal")
        except EvaluationError:
            log_alpha, x_new = -np.inf, None
        alpha = float(np.exp(log_alpha))
        if x_new is not None and rng.random() < alpha:
            U_new = float(self.model.potential(x_new.theta))
            new = ChainState(x_new, g_new, U_new, shadow_new, h, stencil_new,
                             prev=x_bar, prev_shadow=shadow_bar, prev_h=h, last_accepted=True)
            return new, StepInfo(True, h=h, L=L)
        alpha_rev = None
        if self.config.flip_mode == "reduced" and state.last_accepted:
            prev_shadow = self._prev_shadow(state, h)
            if prev_shadow is not None:
                alpha_rev = float(np.exp(min(0.0, shadow_bar - prev_shadow)))
        sign = flip_decision(alpha, alpha_rev, state.last_accepted, self.config.flip_mode, rng)
        cur = x_bar if sign > 0 else x_bar.flipped()
        stencil = state.stencil if (sign > 0 or state.stencil is None) else state.stencil.reversed()
        new = ChainState(cur, state.grad, state.U, shadow_bar, h, stencil,
                         prev=x_bar, prev_shadow=shadow_bar, prev_h=h, last_accepted=False)
        return new, StepInfo(False, flipped=sign < 0, h=h, L=L)

    def step(self, state: ChainState, rng: np.random.Generator,
             draws: Optional[Tuple[float, int, float]] = None) -> Tuple[ChainState, StepInfo]:
        """One MMHMC iteration; returns the new state and its log-weight in the info."""
        h, L, phi = self.config.draw(rng) if draws is None else draws
        self.ensure_shadow(state, h)
        if state.prev_h is not None and state.prev_h != h:
            state.prev_shadow = state.prev_h = None
        work = replace(state)
        moved = self.pmmc(work, h, phi, rng)
        new, info = self.hdmc(work, h, L, rng)
        info.momentum_accepted = moved
        info.phi = phi
        info.log_weight = float(new.shadow - (new.U + kinetic_energy(new.current.p, self.mass)))
        return new, info


def mmhmc_iteration(state: ChainState, model: TargetModel, config: SamplerConfig, rng: np.random.Generator,
                    kernel: Optional[MMHMCKernel] = None) -> Tuple[ChainState, float]:
    """One MMHMC iteration; returns the new state and its importance weight."""
    kernel = MMHMCKernel(model, config) if kernel is None else kernel
    new, info = kernel.step(state, rng)
    return new, float(np.exp(info.log_weight))


# --- chains ---------------------------------------------------------------------


@dataclass
class WeightedChain:
    """Retained draws of one chain with their log importance weights.

    Attributes:
        samples: ``(n, D)`` retained positions.
        log_weights: log importance weights (all zero for unweighted samplers).
        accepted: whether the position move that produced each draw was accepted.
        iterations: 1-based iteration index of each retained draw.
        n_iter: total iterations run, burn-in included.
        n_accepted: accepted position moves over all iterations.
        n_momentum_accepted: accepted momentum updates (MMHMC only).
        n_flips: momentum flips after rejection.
        wall_time: seconds spent in the sampling loop.
        momenta: retained momenta when requested.
    """

    kind: str
    samples: np.ndarray
    log_weights: np.ndarray
    accepted: np.ndarray
    iterations: np.ndarray
    n_iter: int
    n_accepted: int
    n_momentum_accepted: int = 0
    n_momentum_tests: int = 0
    n_flips: int = 0
    wall_time: float = 0.0
    momenta: Optional[np.ndarray] = None

    @property
    def weighted(self) -> bool:
        return self.kind == "mmhmc"

    @property
    def weights(self) -> np.ndarray:
        """Weights rescaled so the largest is one."""
        if self.log_weights.size == 0:
            return self.log_weights.copy()
        return np.exp(self.log_weights - self.log_weights.max())

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_iter if self.n_iter else float("nan")

    @property
    def momentum_acceptance_rate(self) -> float:
        return self.n_momentum_accepted / self.n_momentum_tests if self.n_momentum_tests else float("nan")

    def __len__(self) -> int:
        return int(self.samples.shape[0])


def _retained_indices(n: int, burn_in: int, thin: int) -> np.ndarray:
    m = max(n - burn_in, 0) // thin
    return burn_in + thin * np.arange(m)


def run_chain(model: TargetModel, kind: str, config: SamplerConfig, n_samples: int, burn_in: int = 0,
              thin: int = 1, rng: Optional[np.random.Generator] = None, theta0=None,
              record_momenta: bool = False) -> WeightedChain:
    """Run ``n_samples`` iterations (burn-in included) of sampler ``kind``.

    Retained draws are iterations ``burn_in, burn_in + thin, ...``; there are
    ``floor((n_samples - burn_in) / thin)`` of them.

    Raises:
        ContractError: for invalid sizes or sampler kind.
        EvaluationError: if the model cannot be evaluated at the starting point.
    """
    if kind not in KINDS:
        raise ContractError(f"unknown sampler {kind!r}; use one of {KINDS}")
    if n_samples < 1 or burn_in < 0 or thin < 1:
        raise ContractError("need n_samples >= 1, burn_in >= 0 and thin >= 1")
    rng = np.random.default_rng() if rng is None else rng
    mass = config.mass_for(model.dim)
    theta = model.initial_point(rng) if theta0 is None else np.asarray(theta0, dtype=float)
    state = ChainState.start(model, theta, draw_momentum(mass, rng))
    kernel = MMHMCKernel(model, config) if kind == "mmhmc" else None

    keep = np.zeros(n_samples, dtype=bool)
    keep[_retained_indices(n_samples, burn_in, thin)] = True
    m = int(keep.sum())
    samples = np.empty((m, model.dim))
    momenta = np.empty((m, model.dim)) if record_momenta else None
    log_w = np.zeros(m)
    acc = np.zeros(m, dtype=bool)
    n_acc = n_macc = n_mtests = n_flips = 0
    j = 0
    t0 = time.perf_counter()
    for i in range(n_samples):
        if i == burn_in:
            # sampling-phase time excludes warm-up
            t0 = time.perf_counter()
        if kind == "mmhmc":
            state, info = kernel.step(state, rng)
            n_mtests += 1
            n_macc += bool(info.momentum_accepted)
        elif kind == "hmc":
            state, info = hmc_step(state, model, config, rng)
        elif kind == "ghmc":
            state, info = ghmc_iteration(state, model, config, rng)
        elif kind == "mala":
            state, info = mala_step(state, model, config.h, rng)
        else:
            state, ok = rwmh_step(state, model, config.rw_scale, rng)
            info = StepInfo(ok)
        n_acc += info.accepted
        n_flips += info.flipped
        if keep[i]:
            samples[j] = state.current.theta
            if record_momenta:
                momenta[j] = state.current.p
            log_w[j] = info.log_weight
            acc[j] = info.accepted
            j += 1
    wall = time.perf_counter() - t0
    iters = _retained_indices(n_samples, burn_in, thin) + 1
    return WeightedChain(kind, samples, log_w, acc, iters, n_samples, n_acc, n_macc, n_mtests,
                         n_flips, wall, momenta)


# --- stochastic volatility Gibbs ----------------------------------------------


@dataclass
class GibbsChain:
    """Output of the two-block SV sampler (parameters in natural units)."""

    params: np.ndarray
    latent_mean: np.ndarray
    log_weights: np.ndarray
    n_iter: int
    acceptance: Tuple[float, float]
    wall_time: float

    @property
    def weights(self) -> np.ndarray:
        if self.log_weights.size == 0:
            return self.log_weights.copy()
        return np.exp(self.log_weights - self.log_weights.max())


def run_sv_gibbs(y: np.ndarray, kind: str, theta_config: SamplerConfig, x_config: SamplerConfig,
                 n_samples: int, burn_in: int = 0, thin: int = 1,
                 rng: Optional[np.random.Generator] = None, init=None) -> GibbsChain:
    """Alternate updates of the parameter block and the latent block.

    Each outer iteration runs one ``kind`` transition (``"mmhmc"`` or
    ``"hmc"``) of ``(beta, sigma, phi)`` given the latent path, then one of the
    latent path given the parameters. The log-weight of an iteration is the sum
    of the two block log-weights.
    """
    from .models import SVLatentConditional, SVThetaConditional, sv_inverse_transform, sv_transform

    if kind not in ("mmhmc", "hmc"):
        raise ContractError("SV Gibbs supports 'mmhmc' and 'hmc'")
    if n_samples < 1 or burn_in < 0 or thin < 1:
        raise ContractError("need n_samples >= 1, burn_in >= 0 and thin >= 1")
    rng = np.random.default_rng() if rng is None else rng
    y = np.asarray(y, dtype=float)
    T = y.size
    beta, sigma, phi = (float(np.std(y)) or 1.0, 0.2, 0.9) if init is None else init
    params = np.array([beta, sigma, phi])
    xmodel = SVLatentConditional(tuple(params), y)
    x = xmodel.initial_point(rng)
    tmodel = SVThetaConditional(x, y)

    t_state = ChainState.start(tmodel, sv_transform(*params), draw_momentum(theta_config.mass_for(3), rng))
    x_state = ChainState.start(xmodel, x, draw_momentum(x_config.mass_for(T), rng))
    keep = np.zeros(n_samples, dtype=bool)
    keep[_retained_indices(n_samples, burn_in, thin)] = True
    out_p, out_w = [], []
    x_sum = np.zeros(T)
    acc = np.zeros(2)
    t0 = time.perf_counter()
    for i in range(n_samples):
        if i == burn_in:
            t0 = time.perf_counter()
        lw = 0.0
        for block in (0, 1):
            if block == 0:
                model, state, cfg = SVThetaConditional(x_state.current.theta, y), t_state, theta_config
            else:
                model = SVLatentConditional(tuple(sv_inverse_transform(t_state.current.theta)), y)
                state, cfg = x_state, x_config
            state = ChainState.start(model, state.current.theta, state.current.p)
            if kind == "mmhmc":
                state, info = MMHMCKernel(model, cfg).step(state, rng)
                lw += info.log_weight
            else:
                state, info = hmc_step(state, model, cfg, rng)
            acc[block] += info.accepted
            if block == 0:
                t_state = state
            else:
                x_state = state
        if keep[i]:
            out_p.append(sv_inverse_transform(t_state.current.theta))
            out_w.append(lw)
            x_sum += x_state.current.theta
    wall = time.perf_counter() - t0
    m = len(out_p)
    return GibbsChain(np.array(out_p).reshape(m, 3), x_sum / max(m, 1), np.array(out_w), n_samples,
                      (acc[0] / n_samples, acc[1] / n_samples), wall)
