import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mmhmc.core import (MassSpec, PhasePoint, TargetModel, check_finite, draw_momentum, kinetic_energy,
                        true_hamiltonian)
from mmhmc.errors import ContractError, EvaluationError
from mmhmc.models import GaussianTarget


class Flat(TargetModel):
    def __init__(self, dim):
        self.dim = dim

    def potential(self, theta):
        return 0.0

    def gradient(self, theta):
        return np.zeros(self.dim)


class Overflowing(TargetModel):
    dim = 2

    def potential(self, theta):
        return float(np.exp(theta[1] * 1e3))

    def gradient(self, theta):
        return np.zeros(2)


finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_phase_point_rejects_mismatched_lengths():
    with pytest.raises(ContractError):
        PhasePoint(np.zeros(2), np.zeros(3))
    with pytest.raises(ContractError):
        PhasePoint(np.zeros(0), np.zeros(0))


def test_kinetic_energy_examples():
    assert kinetic_energy(np.zeros(7), MassSpec.identity(7)) == 0.0
    assert kinetic_energy(np.array([3.0]), MassSpec.identity(1)) == 4.5
    assert kinetic_energy(np.array([2.0]), MassSpec.diagonal([4.0])) == 0.5


def test_kinetic_energy_dimension_mismatch():
    with pytest.raises(ContractError):
        kinetic_energy(np.zeros(3), MassSpec.identity(2))


def test_mass_requires_positive_entries():
    with pytest.raises(ContractError):
        MassSpec.diagonal([1.0, 0.0])


@given(arrays(float, st.integers(1, 6), elements=finite))
def test_kinetic_energy_even_and_nonnegative(p):
    m = MassSpec.identity(p.size)
    assert kinetic_energy(p, m) >= 0
    assert kinetic_energy(-p, m) == kinetic_energy(p, m)


def test_true_hamiltonian_examples():
    g = GaussianTarget(variances=[1.0])
    m = MassSpec.identity(1)
    assert true_hamiltonian(PhasePoint([0.0], [0.0]), g, m) == 0.0
    assert true_hamiltonian(PhasePoint([1.0], [1.0]), g, m) == pytest.approx(1.0, abs=1e-15)
    x = PhasePoint([5.0, -2.0], [1.0, 2.0])
    assert true_hamiltonian(x, Flat(2), MassSpec.identity(2)) == kinetic_energy(x.p, MassSpec.identity(2))


def test_true_hamiltonian_overflow_is_evaluation_error():
    with pytest.raises(EvaluationError):
        true_hamiltonian(PhasePoint([0.0, 1.0], [0.0, 0.0]), Overflowing(), MassSpec.identity(2))


def test_check_finite_reports_index():
    with pytest.raises(EvaluationError) as exc:
        check_finite([1.0, 2.0, np.nan])
    assert exc.value.index == 2


def test_draw_momentum_variance_and_determinism():
    rng = np.random.default_rng(0)
    p = np.array([draw_momentum(MassSpec.identity(1), rng)[0] for _ in range(100_000)])
    assert abs(p.var() - 1.0) < 0.02
    p4 = np.array([draw_momentum(MassSpec.diagonal([4.0]), rng)[0] for _ in range(100_000)])
    assert abs(p4.var() / 4.0 - 1.0) < 0.02
    a = draw_momentum(MassSpec.identity(5), np.random.default_rng(3))
    b = draw_momentum(MassSpec.identity(5), np.random.default_rng(3))
    assert np.array_equal(a, b)
