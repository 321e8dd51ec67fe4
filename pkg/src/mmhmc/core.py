"""Phase-space state, the target-model contract and Hamiltonian primitives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import CapabilityError, ContractError, EvaluationError


@dataclass
class PhasePoint:
    """Position/momentum pair on the joint space."""

    theta: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.theta.ndim != 1 or self.theta.shape != self.p.shape or self.theta.size < 1:
            raise ContractError(
                f"theta and p must be 1-D of equal length >= 1, got {self.theta.shape} "
                f"and {self.p.shape}"
            )

    @property
    def dim(self) -> int:
        return self.theta.size

    def copy(self) -> "PhasePoint":
        return PhasePoint(self.theta.copy(), self.p.copy())

    def flipped(self) -> "PhasePoint":
        return PhasePoint(self.theta.copy(), -self.p)


@dataclass(frozen=True)
class MassSpec:
    """Identity or diagonal mass matrix.

    Use :meth:`identity` or :meth:`diagonal` to build one; ``inv`` is the
    elementwise inverse of the diagonal as an array of length ``dim``.
    """

    kind: str
    dim: int
    diag: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("identity", "diagonal"):
            raise ContractError(f"unknown mass kind {self.kind!r}")
        if self.dim < 1:
            raise ContractError("mass dimension must be >= 1")
        if self.kind == "diagonal":
            if self.diag is None or len(self.diag) != self.dim:
                raise ContractError("diagonal mass needs `dim` entries")
            if not all(np.isfinite(d) and d > 0 for d in self.diag):
                raise ContractError("diagonal mass entries must be strictly positive")

    @classmethod
    def identity(cls, dim: int) -> "MassSpec":
        return cls("identity", int(dim))

    @classmethod
    def diagonal(cls, values) -> "MassSpec":
        values = tuple(float(v) for v in np.ravel(values))
        return cls("diagonal", len(values), values)

    @property
    def m(self) -> np.ndarray:
        if self.kind == "identity":
            return np.ones(self.dim)
        return np.array(self.diag)

    @property
    def inv(self) -> np.ndarray:
        return 1.0 / self.m

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def apply_inv(self, v: np.ndarray) -> np.ndarray:
        """Return ``M^{-1} v`` (``v`` may be a vector or a matrix of columns)."""
        if self.is_identity:
            return v
        inv = self.inv
        return v * (inv if v.ndim == 1 else inv[:, None])


class Evaluation(NamedTuple):
    U: float
    grad: np.ndarray
    hess: Optional[np.ndarray]


class TargetModel:
    """Evaluator bundle for a potential ``U = -log density`` and its derivatives.

    Subclasses implement :meth:`potential` and :meth:`gradient` and, when
    available, :meth:`hessian`. Third and fourth derivatives are only ever
    exposed as contractions with a single vector ``v``:
    ``third_contract(theta, v)[i] = sum_jk U_ijk v_j v_k`` and
    ``fourth_contract(theta, v) = sum_ijkl U_ijkl v_i v_j v_k v_l``.

    Models must be reentrant; they hold no mutable evaluation state.
    """

    dim: int = 0
    has_hessian: bool = False
    has_third: bool = False
    has_fourth: bool = False
    # True when U is exactly quadratic, so third and higher derivatives vanish.
    is_quadratic: bool = False

    def potential(self, theta: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, theta: np.ndarray) -> np.ndarray:
        raise CapabilityError(f"{type(self).__name__} does not provide a Hessian")

    def hvp(self, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Hessian applied to a vector (or to the columns of a matrix)."""
        return self.hessian(theta) @ v

    def third_contract(self, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            return np.zeros(self.dim)
        raise CapabilityError(f"{type(self).__name__} does not provide third derivatives")

    def fourth_contract(self, theta: np.ndarray, v: np.ndarray) -> float:
        if self.is_quadratic:
            return 0.0
        raise CapabilityError(f"{type(self).__name__} does not provide fourth derivatives")

    def evaluate(self, theta: np.ndarray) -> Evaluation:
        theta = np.asarray(theta, dtype=float)
        hess = self.hessian(theta) if self.has_hessian else None
        return Evaluation(self.potential(theta), self.gradient(theta), hess)

    def initial_point(self, rng: np.random.Generator) -> np.ndarray:
        """Starting position for a chain; models with a proper prior override this."""
        return np.zeros(self.dim)


def check_finite(x, what: str = "value") -> None:
    """Raise :class:`EvaluationError` naming the first non-finite entry of ``x``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"non-finite {what} at index {idx}", index=idx)


def _check_dim(v: np.ndarray, mass: MassSpec) -> None:
    if v.shape != (mass.dim,):
        raise ContractError(f"expected a vector of length {mass.dim}, got shape {v.shape}")


def kinetic_energy(p, mass: MassSpec) -> float:
    """Return ``p^T M^{-1} p / 2`` (the constant log-determinant term is dropped)."""
    p = np.asarray(p, dtype=float)
    _check_dim(p, mass)
    if mass.is_identity:
        return 0.5 * float(p @ p)
    return 0.5 * float(p @ (p * mass.inv))


def true_hamiltonian(x: PhasePoint, model: TargetModel, mass: MassSpec) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        U = model.potential(x.theta)
    if not np.isfinite(U):
        bad = np.flatnonzero(~np.isfinite(x.theta))
        raise EvaluationError(
            "potential is not finite", index=int(bad[0]) if bad.size else None
        )
    return float(U) + kinetic_energy(x.p, mass)


def draw_momentum(mass: MassSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw ``p ~ N(0, M)``."""
    z = rng.standard_normal(mass.dim)
    if mass.is_identity:
        return z
    return z * np.sqrt(mass.m)
