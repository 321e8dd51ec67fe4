"""Palindromic splitting integrators and their shadow-Hamiltonian coefficients.

A scheme advances ``(theta, p)`` over one step of size ``h`` by alternating
momentum kicks ``p <- p - c h U_theta(theta)`` and position drifts
``theta <- theta + c h M^{-1} p``. The sequences are

=========== ==================================== ===================================
family      kicks                                drifts
=========== ==================================== ===================================
verlet      1/2, 1/2                             1
two_stage   b, 1-2b, b                           1/2, 1/2
three_stage b, 1/2-b, 1/2-b, b                   a, 1-2a, a
four_stage  a, 1/2-a, 1/2-a, a                   b1, b2, 1-2b1-2b2, b2, b1
=========== ==================================== ===================================

The first three start and end with a kick; the four-stage family starts and
ends with a drift. These role assignments are the ones for which the closed
form ``c_21``, ``c_22`` of each family give a 4th order conserved quantity.

Coefficients ``c_ij`` of the modified Hamiltonians multiply powers of the
step size of the scheme they belong to. Two-stage ``b = 1/4`` at step ``h``
is exactly two Verlet steps at ``h/2``, so its ``c_2j`` are the Verlet values
divided by 4 (and ``c_4j`` by 16).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .core import MassSpec, PhasePoint, TargetModel
from .errors import ContractError, TrajectoryError

FAMILIES = ("verlet", "two_stage", "three_stage", "four_stage")
_N_PARAMS = {"verlet": 0, "two_stage": 1, "three_stage": 2, "four_stage": 3}
_PARAM_NAMES = {"verlet": (), "two_stage": ("b",), "three_stage": ("a", "b"), "four_stage": ("a", "b1", "b2")}


@dataclass(frozen=True)
class ShadowCoefficients:
    """Coefficients of the 4th/6th order modified Hamiltonians for one scheme."""

    c: Tuple[float, ...]  # (c21, c22, c41, c42, c43, c44)

    @property
    def k(self) -> Tuple[float, ...]:
        """Coefficients of the time-derivative formulation."""
        c21, c22, c41, c42, c43, c44 = self.c
        return (c21, c22, c41, 3 * c41 + c42, c41 + c44, 3 * c41 + c42 + c43)

    @property
    def gamma(self) -> Tuple[float, ...]:
        """Poisson-bracket coefficients gamma_1..gamma_4 of the h^4 terms."""
        _, _, c41, c42, c43, c44 = self.c
        return (c41, (c44 - c42) / 3.0, c43 / 2.0, c44 / 2.0)

    @property
    def alpha_beta(self) -> Tuple[float, float]:
        return self.c[0], self.c[1]

    def scaled(self, factor2: float, factor4: float) -> "ShadowCoefficients":
        c21, c22, c41, c42, c43, c44 = self.c
        return ShadowCoefficients(
            (c21 * factor2, c22 * factor2, c41 * factor4, c42 * factor4, c43 * factor4, c44 * factor4)
        )


VERLET_COEFFICIENTS = ShadowCoefficients((1 / 12, -1 / 24, -1 / 720, 1 / 120, -1 / 240, 1 / 60))


def _two_stage(b):
    return (
        (6 * b - 1) / 24,
        (6 * b**2 - 6 * b + 1) / 12,
        (7 - 30 * b) / 5760,
        (-10 * b**2 + 15 * b - 3) / 240,
        (-30 * b**3 + 35 * b**2 - 15 * b + 2) / 120,
        (20 * b**2 - 1) / 240,
    )


def _three_stage(a, b):
    c21 = (1 - 6 * a * (1 - a) * (1 - 2 * b)) / 12
    c22 = (6 * a * (1 - 2 * b) ** 2 - 1) / 24
    c41 = (1 + 2 * (a - 1) * a * (8 + 31 * (a - 1) * a) * (1 - 2 * b) - 4 * b) / 720
    c42 = (
        6 * a**3 * (1 - 2 * b) ** 2
        - a**2 * (19 - 116 * b + 36 * b**2 + 240 * b**3)
        + a * (27 - 208 * b + 308 * b**2)
        - 48 * b**2
        + 48 * b
        - 7
    ) / 240
    c43 = (1 + 15 * a * (1 - 2 * b) * (-1 + 2 * a * (2 - 3 * b + a * (4 * b - 2)))) / 180
    c44 = (-1 + 20 * a * (1 - 2 * b) * (b + a * (1 + 6 * (b - 1) * b))) / 240
    return c21, c22, c41, c42, c43, c44


def _four_stage(a, b1, b2):
    q = 1 - 2 * a
    c21 = (6 * b1**2 - 6 * b1 + 1 + 6 * b2 * q * (2 * b1 + b2 - 1)) / 12
    c22 = (6 * (b1 + b2 * q**2) - 1) / 24
    c41 = (7 + 60 * (8 * (a - 1) ** 2 * a**2 - 1) * b1) / 5760
    c42 = (
        1
        - 12 * b1
        + 40 * b1**2
        - 24 * b1**3
        + 4 * q * (a - 3 + (20 - 6 * a) * b1 + 6 * (3 + 2 * a) * b1**2) * b2
        + 8 * q * (5 + 9 * a**2 + 6 * a * (b1 - 2) - 9 * b1) * b2**2
        - 24 * q**2 * b2**3
    ) / 96
    c43 = (
        2
        - 15 * b1
        + 30 * b1**2
        + 15 * q**2 * (4 * (1 + a) * b1 - 1 - 2 * a) * b2
        + 30 * q**3 * b2**2
    ) / 360
    c44 = (
        2
        - 30 * b1**3
        + 5 * b1**2 * (7 - 6 * (4 * a * (1 + a) - 3) * b2)
        + 5 * q * b2 * ((7 - 6 * b2) * b2 - 3 + 2 * a * (6 * b2**2 - 1 - 3 * b2))
        + 5 * b1 * (2 * q * b2 * (7 - 9 * b2 + 6 * a * (1 + b2)) - 3)
    ) / 120
    return c21, c22, c41, c42, c43, c44


_POLYNOMIALS: Dict[str, Callable[..., tuple]] = {
    "two_stage": _two_stage,
    "three_stage": _three_stage,
    "four_stage": _four_stage,
}


def _check_params(family: str, params) -> Tuple[float, ...]:
    if family not in FAMILIES:
        raise ContractError(f"unknown integrator family {family!r}")
    params = tuple(float(v) for v in params)
    if len(params) != _N_PARAMS[family]:
        raise ContractError(f"{family} takes {_N_PARAMS[family]} parameter(s), got {len(params)}")
    for name, v in zip(_PARAM_NAMES[family], params):
        if not 0.0 < v < 0.5:
            raise ContractError(f"{family} parameter {name}={v} outside (0, 1/2)")
    if family == "four_stage" and not params[1] + params[2] < 0.5:
        raise ContractError("four_stage needs b1 + b2 < 1/2")
    return params


def stage_coefficients(family: str, params=()) -> ShadowCoefficients:
    """Closed-form modified-Hamiltonian coefficients of a splitting family."""
    params = _check_params(family, params)
    if family == "verlet":
        return VERLET_COEFFICIENTS
    return ShadowCoefficients(tuple(float(v) for v in _POLYNOMIALS[family](*params)))


@dataclass(frozen=True)
class SplittingScheme:
    """A palindromic kick-drift splitting integrator."""

    family: str
    params: Tuple[float, ...] = ()
    name: str = ""
    kicks: Tuple[float, ...] = field(init=False, repr=False)
    drifts: Tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        params = _check_params(self.family, self.params)
        object.__setattr__(self, "params", params)
        if not self.name:
            object.__setattr__(self, "name", self.family)
        if self.family == "verlet":
            kicks, drifts = (0.5, 0.5), (1.0,)
        elif self.family == "two_stage":
            (b,) = params
            kicks, drifts = (b, 1 - 2 * b, b), (0.5, 0.5)
        elif self.family == "three_stage":
            a, b = params
            kicks, drifts = (b, 0.5 - b, 0.5 - b, b), (a, 1 - 2 * a, a)
        else:
            a, b1, b2 = params
            kicks = (a, 0.5 - a, 0.5 - a, a)
            drifts = (b1, b2, 1 - 2 * b1 - 2 * b2, b2, b1)
        object.__setattr__(self, "kicks", kicks)
        object.__setattr__(self, "drifts", drifts)

    @property
    def kick_first(self) -> bool:
        return len(self.kicks) > len(self.drifts)

    @property
    def stages(self) -> int:
        """Gradient evaluations per step."""
        return min(len(self.kicks), len(self.drifts))

    @property
    def coefficients(self) -> ShadowCoefficients:
        return stage_coefficients(self.family, self.params)

    @property
    def stage_time(self) -> float:
        """Time from the end point to its nearest gradient evaluation, as a
        fraction of ``h``: the first drift (1 for Verlet, 1/2 two-stage)."""
        return self.drifts[0]

    def kick_drift_sequence(self) -> List[Tuple[str, float]]:
        first, second = (("kick", self.kicks), ("drift", self.drifts))[:: 1 if self.kick_first else -1]
        seq = []
        for i, c in enumerate(first[1]):
            seq.append((first[0], c))
            if i < len(second[1]):
                seq.append((second[0], second[1][i]))
        return seq


def _merged_ops(scheme: SplittingScheme, L: int) -> List[Tuple[str, float]]:
    """Operation list for ``L`` steps with the shared boundary operations merged."""
    seq = scheme.kick_drift_sequence()
    ops = list(seq)
    for _ in range(L - 1):
        kind, c = ops[-1]
        ops[-1] = (kind, c + seq[0][1])
        ops.extend(seq[1:])
    return ops


def integrate(
    scheme: SplittingScheme,
    model: TargetModel,
    mass: MassSpec,
    x0: PhasePoint,
    h: float,
    L: int,
    grad_log: Optional[list] = None,
    grad0: Optional[np.ndarray] = None,
    return_grad: bool = False,
):
    """Apply ``L`` steps of ``scheme`` with step size ``h`` starting at ``x0``.

    ``h`` may be negative to integrate backwards in time. When ``grad_log`` is a
    list, the gradient at every stage position (including the start) is
    appended to it in time order. ``grad0`` short-cuts the first gradient
    evaluation. Returns the end point, or ``(end point, end gradient)`` when
    ``return_grad`` is set.

    Raises:
        TrajectoryError: if the trajectory leaves the region where the model
            evaluates to finite values.
    """
    if L < 1:
        raise ContractError("L must be >= 1")
    if h == 0:
        raise ContractError("h must be non-zero")
    theta = x0.theta.copy()
    p = x0.p.copy()
    inv = None if mass.is_identity else mass.inv
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        g = model.gradient(theta) if grad0 is None else grad0
        if grad_log is not None:
            grad_log.append(g)
        for kind, c in _merged_ops(scheme, L):
            if kind == "kick":
                p = p - (c * h) * g
            else:
                theta = theta + (c * h) * (p if inv is None else inv * p)
                g = model.gradient(theta)
                if grad_log is not None:
                    grad_log.append(g)
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(p))):
        bad = np.flatnonzero(~(np.isfinite(theta) & np.isfinite(p)))
        raise TrajectoryError("trajectory diverged", index=int(bad[0]))
    out = PhasePoint(theta, p)
    return (out, g) if return_grad else out


def integrate_stages(
    scheme: SplittingScheme,
    model: TargetModel,
    mass: MassSpec,
    x0: PhasePoint,
    h: float,
    k: int,
    grad0: Optional[np.ndarray] = None,
) -> List[np.ndarray]:
    """Gradients at the first ``k`` stage positions reached from ``x0``.

    The stage sequence continues across step boundaries. Negative ``h`` walks
    backwards in time. ``x0`` is not modified.
    """
    theta = x0.theta.copy()
    p = x0.p.copy()
    inv = None if mass.is_identity else mass.inv
    g = model.gradient(theta) if grad0 is None else grad0
    out = []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for kind, c in _merged_ops(scheme, k // scheme.stages + 1):
            if kind == "kick":
                p = p - (c * h) * g
            else:
                theta = theta + (c * h) * (p if inv is None else inv * p)
                g = model.gradient(theta)
                out.append(g)
                if len(out) == k:
                    break
    for g in out:
        if not np.all(np.isfinite(g)):
            raise TrajectoryError("stencil stage diverged")
    return out


# --- catalogue -------------------------------------------------------------

CATALOG: Dict[str, SplittingScheme] = {
    s.name: s
    for s in (
        SplittingScheme("verlet", (), "verlet"),
        SplittingScheme("two_stage", (0.21178,), "bcss"),
        SplittingScheme("two_stage", (0.193183,), "me"),
        SplittingScheme("two_stage", (0.238016,), "m-bcss"),
        SplittingScheme("two_stage", (0.23061,), "m-me"),
        SplittingScheme("three_stage", (0.355423, 0.184569), "m-me3"),
        SplittingScheme("four_stage", (0.0840641, 0.0602952, 0.216673), "m-me4"),
        SplittingScheme("two_stage", (0.230907,), "m-me-gauss"),
        SplittingScheme("three_stage", (0.39263, 0.199778), "m-me3-gauss"),
        SplittingScheme("four_stage", (0.441252, 0.266011, 0.181055), "m-me4-gauss"),
    )
}


def get_scheme(name: str) -> SplittingScheme:
    try:
        return CATALOG[name.lower()]
    except KeyError:
        raise ContractError(f"unknown integrator {name!r}; known: {', '.join(CATALOG)}") from None


def catalog_csv() -> str:
    """Catalogue as CSV text with columns name, family, params, c-vector, k-vector."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "family", "params", "c21", "c22", "c41", "c42", "c43", "c44",
                "k21", "k22", "k41", "k42", "k43", "k44"])
    for s in CATALOG.values():
        co = s.coefficients
        w.writerow([s.name, s.family, " ".join(repr(v) for v in s.params)]
                   + [repr(v) for v in co.c] + [repr(v) for v in co.k])
    return buf.getvalue()
