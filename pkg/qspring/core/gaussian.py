# ***********************************************************************
# QSPRING GAUSSIAN ENGINE
#
# Exact first and second moment dynamics of quadratic models.
#
# - states: mean vector and symmetrized covariance in the (X, P) basis
# - evolution: RK4 under jax, step refined by repeated halving
# - steady states: Lyapunov equation in Kronecker form
# - single-mode diagnostics: squeezing, Wigner function, Uhlmann fidelity
#
# ***********************************************************************


import csv
from dataclasses import dataclass
from functools import partial
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import jax
import jax.numpy as jnp
import numpy as np

from qspring.core.exception import (
    print_message,
    raise_warning,
    QSpringDomainError,
    QSpringInstabilityError
)
from qspring.core.emit import format_float
from qspring.core.model import QuadraticModel, stability, symplectic_form

Mode = Union[int, str]

VACUUM_VARIANCE = 0.5
BLOWUP_VARIANCE = 1e6


# ***********************************************************************
# STATES
#
# ***********************************************************************


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    mode_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        n = len(self.mode_labels)
        if mean.shape != (2 * n,) or cov.shape != (2 * n, 2 * n):
            raise QSpringDomainError(
                f'mean {mean.shape} and cov {cov.shape} do not match {n} modes.', 'state')
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'cov', 0.5 * (cov + cov.T))
        object.__setattr__(self, 'mode_labels', tuple(self.mode_labels))

    @property
    def n_modes(self) -> int:
        return len(self.mode_labels)

    def index(self, mode: Mode) -> int:
        if isinstance(mode, str):
            if mode not in self.mode_labels:
                raise QSpringDomainError(
                    f'unknown mode, expected one of {self.mode_labels}.', 'mode')
            return self.mode_labels.index(mode)
        if not 0 <= mode < self.n_modes:
            raise QSpringDomainError(f'mode index {mode} out of range.', 'mode')
        return int(mode)


def vacuum() -> GaussianState:
    return GaussianState(np.zeros(2), VACUUM_VARIANCE * np.eye(2), ('',))


def thermal(n_bar: float) -> GaussianState:
    if not np.isfinite(n_bar) or n_bar < 0:
        raise QSpringDomainError(f'must be non-negative, got {n_bar}.', 'n_bar')
    return GaussianState(np.zeros(2), (n_bar + 0.5) * np.eye(2), ('',))


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def squeezed(db: float, angle: float=0.0) -> GaussianState:
    '''Squeezed vacuum whose quadrature X cos(angle) + P sin(angle) has the
    variance 1/2 10^(-db/10).'''
    if not np.isfinite(db) or db < 0:
        raise QSpringDomainError(f'must be non-negative, got {db}.', 'squeeze_db')
    factor = 10.0 ** (db / 10.0)
    R = _rotation(angle)
    cov = R @ np.diag([VACUUM_VARIANCE / factor, VACUUM_VARIANCE * factor]) @ R.T
    return GaussianState(np.zeros(2), cov, ('',))


def coherent(alpha: complex) -> GaussianState:
    alpha = complex(alpha)
    mean = math.sqrt(2.0) * np.array([alpha.real, alpha.imag])
    return GaussianState(mean, VACUUM_VARIANCE * np.eye(2), ('',))


def make_state(*kinds: GaussianState,
               labels: Optional[Sequence[str]]=None) -> GaussianState:
    '''Product state of the given factors, e.g.
    make_state(squeezed(9), thermal(5), labels=('atom', 'membrane')).'''
    if not kinds:
        raise QSpringDomainError('at least one factor is required.', 'kinds')
    mean = np.concatenate([kind.mean for kind in kinds])
    dim = mean.size
    cov = np.zeros((dim, dim))
    start = 0
    for kind in kinds:
        stop = start + kind.mean.size
        cov[start:stop, start:stop] = kind.cov
        start = stop
    if labels is None:
        labels = [label for kind in kinds for label in kind.mode_labels]
        labels = [label or f'mode{i}' for (i, label) in enumerate(labels)]
    if len(labels) != dim // 2:
        raise QSpringDomainError(f'expected {dim // 2} labels, got {len(labels)}.',
                                 'labels')
    return GaussianState(mean, cov, tuple(labels))


def _quadratures(state: GaussianState, modes: Sequence[Mode]) -> np.ndarray:
    return np.array([2 * state.index(mode) + j for mode in modes for j in (0, 1)])


def reduce(state: GaussianState, modes: Sequence[Mode]) -> GaussianState:
    if isinstance(modes, (int, str)):
        modes = [modes]
    idx = _quadratures(state, modes)
    labels = [state.mode_labels[state.index(mode)] for mode in modes]
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)], tuple(labels))


def rotate(state: GaussianState, mode: Mode, angle: float) -> GaussianState:
    '''Passive phase rotation X -> X cos + P sin, P -> -X sin + P cos of one
    mode; rotate(state, mode, omega t) is the free evolution of that mode.'''
    i = state.index(mode)
    S = np.eye(2 * state.n_modes)
    S[2 * i:2 * i + 2, 2 * i:2 * i + 2] = _rotation(angle).T
    return GaussianState(S @ state.mean, S @ state.cov @ S.T, state.mode_labels)


# ***********************************************************************
# SINGLE-MODE DIAGNOSTICS
#
# ***********************************************************************


def _variance_to_db(variance: float) -> float:
    if variance <= 0:
        return math.inf
    return -10.0 * math.log10(variance / VACUUM_VARIANCE)


def squeezing_db(state: GaussianState, mode: Mode) -> float:
    '''Squeezing of the best quadrature of a mode, positive below vacuum.'''
    cov = reduce(state, [mode]).cov
    return _variance_to_db(float(np.linalg.eigvalsh(cov)[0]))


def quadrature_squeezing_db(state: GaussianState, mode: Mode,
                            angle: float=0.0) -> float:
    '''Squeezing of the fixed quadrature X cos(angle) + P sin(angle).'''
    cov = reduce(state, [mode]).cov
    u = np.array([math.cos(angle), math.sin(angle)])
    return _variance_to_db(float(u @ cov @ u))


def squeezing_series_db(trajectory: 'Trajectory', mode: Mode,
                        angles=None) -> np.ndarray:
    '''squeezing_db of one mode at every sample of a trajectory, or with
    angles (one per sample) quadrature_squeezing_db at those angles.'''
    i = trajectory.state(0).index(mode)
    covs = trajectory.covs[:, 2 * i:2 * i + 2, 2 * i:2 * i + 2]
    if angles is None:
        variance = np.linalg.eigvalsh(covs)[:, 0]
    else:
        angles = np.broadcast_to(np.asarray(angles, dtype=np.float64), (len(covs),))
        u = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        variance = np.einsum('ti,tij,tj->t', u, covs, u)
    with np.errstate(divide='ignore', invalid='ignore'):
        db = -10.0 * np.log10(variance / VACUUM_VARIANCE)
    return np.where(variance > 0, db, math.inf)


def wigner(state: GaussianState, mode: Mode, xs, ps) -> np.ndarray:
    '''Wigner function of one mode on the grid xs x ps, indexed [ix, ip].'''
    single = reduce(state, [mode])
    cov = single.cov
    det = float(np.linalg.det(cov))
    if det < 1e-30:
        raise QSpringDomainError(f'singular covariance, det = {det}.', 'cov')
    X, P = np.meshgrid(np.asarray(xs, dtype=np.float64),
                       np.asarray(ps, dtype=np.float64), indexing='ij')
    dx, dp = X - single.mean[0], P - single.mean[1]
    inv = np.linalg.inv(cov)
    quad = inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def fidelity(state1: GaussianState, state2: GaussianState, mode: Mode) -> float:
    '''Uhlmann fidelity (squared convention) between the single-mode
    reductions of two Gaussian states.'''
    s1, s2 = reduce(state1, [mode]), reduce(state2, [mode])
    total = s1.cov + s2.cov
    d = s2.mean - s1.mean
    Delta = float(np.linalg.det(total))
    delta = 4.0 * (np.linalg.det(s1.cov) - 0.25) * (np.linalg.det(s2.cov) - 0.25)
    delta = max(float(delta), 0.0)
    value = math.exp(-0.5 * float(d @ np.linalg.solve(total, d)))
    value /= math.sqrt(Delta + delta) - math.sqrt(delta)
    return min(max(value, 0.0), 1.0)


def uncertainty_violation(state: GaussianState) -> float:
    '''Smallest eigenvalue of sigma + (i/2) Omega, negative when the
    covariance breaks the uncertainty principle.'''
    Omega = symplectic_form(state.n_modes)
    return float(np.linalg.eigvalsh(state.cov + 0.5j * Omega)[0])


def is_physical(state: GaussianState, tol: float=1e-9) -> bool:
    return bool(np.all(np.isfinite(state.cov))) and uncertainty_violation(state) >= -tol


# ***********************************************************************
# DYNAMICS
#
# ***********************************************************************


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    mode_labels: Tuple[str, ...]
    dt: float
    halvings: int

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> GaussianState:
        return GaussianState(self.means[i], self.covs[i], self.mode_labels)

    @property
    def final(self) -> GaussianState:
        return self.state(len(self) - 1)

    def to_rows(self) -> List[List[str]]:
        return trajectory_to_rows(self.times, self.means, self.covs, self.mode_labels)


def _moment_rates(A, D, mean, cov):
    return A @ mean, A @ cov + cov @ A.T + D


def _rk4_step(A, D, mean, cov, dt):
    k1m, k1c = _moment_rates(A, D, mean, cov)
    k2m, k2c = _moment_rates(A, D, mean + 0.5 * dt * k1m, cov + 0.5 * dt * k1c)
    k3m, k3c = _moment_rates(A, D, mean + 0.5 * dt * k2m, cov + 0.5 * dt * k2c)
    k4m, k4c = _moment_rates(A, D, mean + dt * k3m, cov + dt * k3c)
    mean = mean + (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
    cov = cov + (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
    return mean, 0.5 * (cov + cov.T)


@partial(jax.jit, static_argnames=('n_samples',))
def _integrate_samples(A, D, mean, cov, dt, n_sub, n_samples):
    '''Advances the moments by n_sub RK4 steps between consecutive samples.
    Once a covariance entry overflows or turns non-finite the state is frozen
    and every later sample is flagged.'''

    def _jax_wrapped_substeps(_, carry):
        mean, cov = carry
        return _rk4_step(A, D, mean, cov, dt)

    def _jax_wrapped_sample(carry, _):
        mean, cov, blown = carry
        new_mean, new_cov = jax.lax.fori_loop(
            0, n_sub, _jax_wrapped_substeps, (mean, cov))
        bad = jnp.logical_not(jnp.all(jnp.isfinite(new_cov)))
        bad = bad | (jnp.max(jnp.abs(new_cov)) > BLOWUP_VARIANCE)
        mean = jnp.where(blown, mean, new_mean)
        cov = jnp.where(blown, cov, new_cov)
        blown = blown | bad
        return (mean, cov, blown), (mean, cov, blown)

    start = (mean, cov, jnp.asarray(False))
    _, (means, covs, flags) = jax.lax.scan(
        _jax_wrapped_sample, start, None, length=n_samples - 1)
    return means, covs, flags


@partial(jax.jit, static_argnames=('n_samples',))
def _integrate_batch(A, D, mean, cov, dt, n_sub, n_samples):
    '''_integrate_samples vectorized over a leading batch axis of the drift,
    diffusion and initial moments, all sharing one step.'''
    run = partial(_integrate_samples, n_samples=n_samples)
    return jax.vmap(run, in_axes=(0, 0, 0, 0, None, None))(A, D, mean, cov, dt, n_sub)


def default_step(model: QuadraticModel, t_final: float) -> float:
    '''Step min(2 pi/omega_max/50, t_final/1e4), omega_max the largest
    oscillation frequency of the drift.'''
    eigs = np.linalg.eigvals(model.drift)
    omega_max = float(np.max(np.abs(eigs.imag))) if eigs.size else 0.0
    step = t_final / 1e4
    if omega_max > 0:
        step = min(step, 2.0 * math.pi / omega_max / 50.0)
    return step


def evolve(model: QuadraticModel, state: GaussianState, t_final: float,
           dt: Optional[float]=None,
           samples: int=201,
           tol: float=1e-8,
           max_halvings: int=8,
           refine: bool=True,
           verbose: bool=False) -> Trajectory:
    '''Integrates d<r>/dt = A <r> and d sigma/dt = A sigma + sigma A^T + D.

    :param model: quadratic model providing A and D
    :param state: initial state with the model's mode count
    :param t_final: final time, samples are spaced t_final/(samples - 1)
    :param dt: requested step (default: see default_step); the accepted step
    divides the sample spacing evenly
    :param samples: number of emitted samples including t = 0
    :param tol: max-abs change of the final covariance accepted between a
    step and its half
    :param max_halvings: refinement budget
    :param refine: when False integrates once with the initial step
    :param verbose: print the refinement progress
    '''
    return evolve_batch([model], [state], t_final, dt=dt, samples=samples, tol=tol,
                        max_halvings=max_halvings, refine=refine, verbose=verbose)[0]


def evolve_batch(models: Sequence[QuadraticModel], states: Sequence[GaussianState],
                 t_final: float,
                 dt: Optional[float]=None,
                 samples: int=201,
                 tol: float=1e-8,
                 max_halvings: int=8,
                 refine: bool=True,
                 verbose: bool=False) -> List[Trajectory]:
    '''Integrates models of equal size side by side under jax.vmap.

    All trajectories share one step, the smallest default step of the batch,
    and halving continues until the final covariance of every member changes
    by less than tol. Arguments as in evolve, with one state per model.
    '''
    if not models or len(models) != len(states):
        raise QSpringDomainError(
            f'{len(states)} states given for {len(models)} models.', 'states')
    for (model, state) in zip(models, states):
        if state.n_modes != model.n_modes:
            raise QSpringDomainError(
                f'state has {state.n_modes} modes, model has {model.n_modes}.', 'state')
        if model.n_modes != models[0].n_modes:
            raise QSpringDomainError('models of a batch need equal mode counts.', 'models')
    if not np.isfinite(t_final) or t_final <= 0:
        raise QSpringDomainError(f'must be positive, got {t_final}.', 't_final')
    if samples < 2:
        raise QSpringDomainError(f'must be at least 2, got {samples}.', 'samples')
    if dt is None:
        dt = min(default_step(model, t_final) for model in models)
    elif not np.isfinite(dt) or dt <= 0:
        raise QSpringDomainError(f'must be positive, got {dt}.', 'dt')

    times = np.linspace(0.0, t_final, samples)
    spacing = t_final / (samples - 1)
    n_sub = max(1, int(math.ceil(spacing / dt - 1e-9)))
    A = jnp.asarray(np.stack([model.drift for model in models]))
    D = jnp.asarray(np.stack([model.diffusion for model in models]))
    mean0 = np.stack([state.mean for state in states])
    cov0 = np.stack([state.cov for state in states])

    def _run(n_sub):
        means, covs, flags = _integrate_batch(
            A, D, jnp.asarray(mean0), jnp.asarray(cov0), spacing / n_sub, n_sub, samples)
        flags = np.asarray(flags)
        if np.any(flags):
            member = int(np.argmax(np.any(flags, axis=1)))
            first = int(np.argmax(flags[member])) + 1
            covs = np.asarray(covs)
            peak = float(np.nanmax(np.abs(covs[member, first - 1])))
            raise QSpringInstabilityError(
                f'covariance overflow (|sigma| = {peak:.3g} > {BLOWUP_VARIANCE:g}) '
                f'at t = {times[first]:.6g}.', time=float(times[first]), value=peak)
        means = np.concatenate([mean0[:, None, :], np.asarray(means)], axis=1)
        covs = np.concatenate([cov0[:, None, :, :], np.asarray(covs)], axis=1)
        return means, covs

    means, covs = _run(n_sub)
    halvings, change = 0, math.nan
    if refine and max_halvings > 0:
        converged = False
        for halvings in range(1, max_halvings + 1):
            n_sub *= 2
            fine_means, fine_covs = _run(n_sub)
            change = float(np.max(np.abs(fine_covs[:, -1] - covs[:, -1])))
            means, covs = fine_means, fine_covs
            print_message(f'[INFO] halving {halvings}: dt={spacing / n_sub:.4g}, '
                          f'change={change:.3g}', verbose=verbose)
            if change < tol:
                converged = True
                break
        if not converged:
            raise_warning(f'[WARN] step refinement did not reach tol={tol:g} '
                          f'after {max_halvings} halvings, last change {change:.3g}.')
    return [Trajectory(times=times, means=means[b], covs=covs[b],
                       mode_labels=state.mode_labels,
                       dt=spacing / n_sub, halvings=halvings)
            for (b, state) in enumerate(states)]


def steady_state(model: QuadraticModel) -> GaussianState:
    '''Solves A sigma + sigma A^T + D = 0 in vectorized form
    (I kron A + A kron I) vec(sigma) = -vec(D).'''
    max_real, eig = stability(model)
    if max_real >= 0:
        raise QSpringInstabilityError(
            f'drift is not stable, eigenvalue {eig:.6g} has non-negative real part.',
            value=eig)
    A, D = model.drift, model.diffusion
    dim = A.shape[0]
    eye = np.eye(dim)
    L = np.kron(eye, A) + np.kron(A, eye)
    vec = np.linalg.solve(L, -D.reshape(-1, order='F'))
    cov = vec.reshape((dim, dim), order='F')
    cov = 0.5 * (cov + cov.T)
    residual = float(np.max(np.abs(A @ cov + cov @ A.T + D)))
    scale = float(np.max(np.abs(D))) if np.any(D) else 1.0
    if residual > 1e-10 * scale:
        raise_warning(f'[WARN] Lyapunov residual {residual:.3g} exceeds '
                      f'1e-10 of the diffusion scale {scale:.3g}.')
    return GaussianState(np.zeros(dim), cov, model.mode_labels)


# ***********************************************************************
# CSV EXPORT
#
# - trajectory: time, means, upper triangle of the covariance
# - Wigner grids: x, p, W
#
# ***********************************************************************


def trajectory_header(mode_labels: Sequence[str]) -> List[str]:
    header = ['time']
    for label in mode_labels:
        header += [f'mean_{label}_X', f'mean_{label}_P']
    dim = 2 * len(mode_labels)
    header += [f'cov_{i}_{j}' for i in range(dim) for j in range(i, dim)]
    return header


def trajectory_to_rows(times, means, covs, mode_labels) -> List[List[str]]:
    dim = 2 * len(mode_labels)
    upper = np.triu_indices(dim)
    rows = [trajectory_header(mode_labels)]
    for (t, mean, cov) in zip(times, means, covs):
        values = [t, *np.asarray(mean), *np.asarray(cov)[upper]]
        rows.append([format_float(value) for value in values])
    return rows


def write_trajectory_csv(trajectory: Trajectory, path: str) -> None:
    rows = trajectory_to_rows(trajectory.times, trajectory.means,
                              trajectory.covs, trajectory.mode_labels)
    with open(path, 'w', newline='') as file:
        csv.writer(file, lineterminator='\n').writerows(rows)


def read_trajectory_csv(path: str) -> Trajectory:
    with open(path, 'r', newline='') as file:
        rows = list(csv.reader(file))
    header, body = rows[0], rows[1:]
    labels = [name[len('mean_'):-len('_X')] for name in header
              if name.startswith('mean_') and name.endswith('_X')]
    dim = 2 * len(labels)
    expected = trajectory_header(labels)
    if header != expected:
        raise QSpringDomainError('header does not follow the trajectory schema.', path)
    data = np.array([[float(value) for value in row] for row in body]).reshape(-1, len(header))
    times = data[:, 0]
    means = data[:, 1:1 + dim]
    covs = np.zeros((len(times), dim, dim))
    upper = np.triu_indices(dim)
    for (k, row) in enumerate(data[:, 1 + dim:]):
        covs[k][upper] = row
        covs[k] = covs[k] + np.triu(covs[k], 1).T
    dt = float(times[1] - times[0]) if len(times) > 1 else math.nan
    return Trajectory(times=times, means=means, covs=covs,
                      mode_labels=tuple(labels), dt=dt, halvings=0)


def write_wigner_csv(xs: Iterable[float], ps: Iterable[float], W, path: str) -> None:
    xs, ps = list(xs), list(ps)
    W = np.asarray(W)
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(['x', 'p', 'W'])
        for (i, x) in enumerate(xs):
            for (j, p) in enumerate(ps):
                writer.writerow([format_float(x), format_float(p), format_float(W[i, j])])
