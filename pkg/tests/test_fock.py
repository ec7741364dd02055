import math

import numpy as np
import pytest

from qspring.core.exception import (
    QSpringDomainError,
    QSpringTruncationError
)
from qspring.core import fock
from qspring.core import gaussian
from qspring.core.gaussian import coherent, make_state, squeezed, thermal, vacuum
from qspring.core.model import (
    Jump,
    QuadraticModel,
    annihilation_coeff,
    build_effective_model
)


def test_thermal_populations():
    rho = fock.from_gaussian(make_state(thermal(1.0)), [30])
    p = fock.populations(rho, 0)
    assert p[0] == pytest.approx(0.5, abs=1e-8)
    assert p[1] == pytest.approx(0.25, abs=1e-8)
    assert fock.mean_number(rho, 0) == pytest.approx(1.0, abs=1e-6)


def test_squeezed_vacuum_has_even_photons():
    rho = fock.from_gaussian(make_state(squeezed(6.0)), [30])
    p = fock.populations(rho, 0)
    assert np.max(p[1::2]) < 1e-12
    r = math.log(10 ** 0.6) / 2.0
    assert fock.mean_number(rho, 0) == pytest.approx(math.sinh(r) ** 2, rel=1e-4)


def test_moments_match_gaussian_state():
    state = make_state(squeezed(3.0, 0.4), coherent(0.5 + 0.2j))
    rho = fock.from_gaussian(state, [20, 20])
    mean, cov = fock.covariance_of(rho)
    assert mean == pytest.approx(state.mean, abs=1e-6)
    assert cov == pytest.approx(state.cov, abs=1e-6)


def test_check_physical():
    rho = fock.from_gaussian(make_state(thermal(0.5), vacuum()), [16, 6])
    report = fock.check_physical(rho)
    assert report['trace'] == pytest.approx(1.0)
    assert report['min_eigenvalue'] > -1e-12
    bad = fock.FockDensityMatrix((2,), np.diag([1.5, -0.5]))
    with pytest.raises(QSpringDomainError):
        fock.check_physical(bad)


def test_reduce_fock_traces_out():
    rho = fock.from_gaussian(make_state(thermal(1.0), thermal(0.2)), [24, 10])
    single = fock.reduce_fock(rho, 1)
    assert single.dims == (10,)
    assert np.trace(single.rho).real == pytest.approx(1.0, abs=1e-10)
    assert fock.mean_number(rho, 1) == pytest.approx(0.2, abs=1e-6)


def test_truncation_is_detected():
    with pytest.raises(QSpringTruncationError) as info:
        fock.from_gaussian(make_state(thermal(5.0)), [8])
    assert info.value.mode == 0
    assert info.value.tail > 1e-4


@pytest.mark.parametrize('dims', [(1,), (60, 50), ()])
def test_dimension_limits(dims):
    with pytest.raises(QSpringDomainError) as info:
        fock.FockDensityMatrix(dims, np.eye(1))
    assert info.value.field == 'dims'


def test_correlated_state_is_rejected():
    state = make_state(vacuum(), vacuum())
    cov = state.cov.copy()
    cov[0, 2] = cov[2, 0] = 0.1
    with pytest.raises(QSpringDomainError):
        fock.from_gaussian(gaussian.GaussianState(state.mean, cov, state.mode_labels), [6, 6])


def test_fidelity_fock_matches_gaussian():
    a, b = make_state(vacuum()), make_state(thermal(1.0))
    rho_a, rho_b = fock.from_gaussian(a, [40]), fock.from_gaussian(b, [40])
    assert fock.fidelity_fock(rho_a, rho_b) == pytest.approx(0.5, abs=1e-6)
    assert fock.fidelity_fock(rho_b, rho_b) == pytest.approx(1.0, abs=1e-8)


def test_wigner_fock_matches_gaussian():
    state = make_state(squeezed(3.0, 0.3))
    rho = fock.from_gaussian(state, [30])
    grid = np.linspace(-2.0, 2.0, 9)
    W = fock.wigner_fock(rho, 0, grid, grid)
    assert W == pytest.approx(gaussian.wigner(state, 0, grid, grid), abs=1e-6)
    assert fock.wigner_fock(fock.from_gaussian(make_state(vacuum()), [4]), 0,
                            [0.0], [0.0])[0, 0] == pytest.approx(1.0 / math.pi)


def test_generator_of_damped_mode():
    gamma = 0.5
    damped = QuadraticModel.build(['a'], np.eye(2), [Jump(annihilation_coeff(1, 0), gamma)])
    W, K = fock.generator_coefficients(damped)
    # E = (a, a^dag): H_eff = a^dag a + 1/2 - (i gamma/2) a^dag a, jump gamma a rho a^dag
    assert K[0, 1] == pytest.approx(gamma)
    assert np.sum(np.abs(K)) == pytest.approx(gamma)
    assert W[1, 0] + W[0, 1] == pytest.approx(1.0 - 0.5j * gamma)


def test_free_rotation_is_normal_ordered():
    damped = QuadraticModel.build(['a'], 3.0 * np.eye(2), [Jump(annihilation_coeff(1, 0), 0.5)])
    W, K = fock.generator_coefficients(damped)
    assert W[0, 1].real == pytest.approx(0.0)
    W_int, energies, omega = fock.split_diagonal(W, (6,))
    assert omega == pytest.approx(3.0)
    assert np.all(W_int == 0.0)
    assert energies == pytest.approx((3.0 - 0.25j) * np.arange(6))


def test_interaction_step_ignores_free_rotation():
    model = build_effective_model(1.0, 20.0, 20.0, 0.1, 0.1, math.pi / 4, 0.1, 0.0, 0.0,
                                  thermal_rates=(0.1, 0.1))
    W, K = fock.generator_coefficients(model)
    step = fock.interaction_step(W, K, (20, 20))
    assert step > 5.0 * fock.stable_step(W, K, (20, 20))
    assert step <= fock.PHASE_PER_STEP / 40.0 + 1e-15


def test_damped_coherent_state():
    gamma = 0.5
    damped = QuadraticModel.build(['a'], np.eye(2), [Jump(annihilation_coeff(1, 0), gamma)])
    state = make_state(coherent(1.0))
    rho = fock.from_gaussian(state, [16])
    traj = fock.evolve_rho(damped, rho, 2.0, samples=41)
    reference = gaussian.evolve(damped, state, 2.0, samples=41)
    assert traj.means == pytest.approx(reference.means, abs=1e-6)
    assert traj.covs == pytest.approx(reference.covs, abs=1e-5)
    assert np.all(traj.traces == pytest.approx(1.0, abs=1e-10))
    assert traj.dt <= fock.interaction_step(*fock.generator_coefficients(damped), (16,))


def test_two_mode_swap_agrees_with_gaussian():
    model = build_effective_model(1.0, 5.0, 5.0, 0.0, 0.0, math.pi / 4, 0.0, 0.0, 0.0)
    state = make_state(squeezed(3.0), thermal(0.5), labels=('atom', 'membrane'))
    rho = fock.from_gaussian(state, (12, 16))
    traj = fock.evolve_rho(model, rho, math.pi / 2, samples=11)
    reference = gaussian.evolve(model, state, math.pi / 2, samples=11)
    assert traj.covs == pytest.approx(reference.covs, abs=1e-3)
    assert traj.min_eigenvalues.min() > fock.POSITIVITY_TOL
    assert traj.gaussian(0).cov == pytest.approx(state.cov, abs=1e-6)


def test_evolve_rho_validation():
    damped = QuadraticModel.build(['a'], np.eye(2), [Jump(annihilation_coeff(1, 0), 0.5)])
    rho = fock.from_gaussian(make_state(vacuum(), vacuum()), [4, 4])
    with pytest.raises(QSpringDomainError):
        fock.evolve_rho(damped, rho, 1.0)
    single = fock.from_gaussian(make_state(vacuum()), [4])
    with pytest.raises(QSpringDomainError):
        fock.evolve_rho(damped, single, 0.0)


def test_fock_trajectory_rows():
    damped = QuadraticModel.build(['a'], np.eye(2), [Jump(annihilation_coeff(1, 0), 0.5)])
    rho = fock.from_gaussian(make_state(coherent(0.5)), [10])
    traj = fock.evolve_rho(damped, rho, 0.5, samples=3)
    rows = traj.to_rows()
    assert len(rows) == 4
    assert rows[0][0] == 'time'
    assert traj.to_dict()['dims'] == [10]
