# ***********************************************************************
# QSPRING FOCK ORACLE
#
# Brute-force truncated Fock space integration of the master equation of a
# QuadraticModel, used to certify the Gaussian engine.
#
# The density matrix is held as a tensor of shape dims + dims (ket axes,
# then bra axes). Ladder operators act as shifts along one axis scaled by
# sqrt(n), so no operator matrix is ever formed.
#
# ***********************************************************************


from dataclasses import dataclass
from functools import lru_cache, partial
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import jax
import jax.numpy as jnp
import numpy as np
import scipy.linalg
import scipy.special
from tqdm import tqdm

from qspring.core.exception import (
    print_message,
    raise_warning,
    QSpringDomainError,
    QSpringInstabilityError,
    QSpringTruncationError
)
from qspring.core.gaussian import GaussianState, trajectory_to_rows
from qspring.core.model import QuadraticModel

MAX_DIMENSION = 2500
TAIL_THRESHOLD = 1e-4
TRACE_TOL = 1e-8
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = -1e-8
RENORMALISATION_TOL = 1e-6
PHASE_PER_STEP = 0.5


# ***********************************************************************
# DENSITY MATRICES
#
# ***********************************************************************


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    dims: Tuple[int, ...]
    rho: np.ndarray

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise QSpringDomainError(f'every mode needs at least 2 levels, got {dims}.',
                                     'dims')
        size = int(np.prod(dims))
        if size > MAX_DIMENSION:
            raise QSpringDomainError(
                f'total dimension {size} exceeds the cap {MAX_DIMENSION}.', 'dims')
        rho = np.asarray(self.rho, dtype=np.complex128).reshape(size, size)
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'rho', rho)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def tensor(self) -> np.ndarray:
        return self.rho.reshape(self.dims + self.dims)


def _check_mode(rho: FockDensityMatrix, mode: int) -> int:
    if not 0 <= mode < rho.n_modes:
        raise QSpringDomainError(f'mode index {mode} out of range.', 'mode')
    return int(mode)


def reduce_fock(rho: FockDensityMatrix, mode: int) -> FockDensityMatrix:
    '''Partial trace onto one mode.'''
    mode = _check_mode(rho, mode)
    n = rho.n_modes
    letters = 'abcdefghijklmnopqrstuvwxyz'
    ket = list(letters[:n])
    bra = list(letters[:n])
    bra[mode] = letters[n]
    spec = ''.join(ket) + ''.join(bra) + '->' + ket[mode] + bra[mode]
    return FockDensityMatrix((rho.dims[mode],), np.einsum(spec, rho.tensor))


def populations(rho: FockDensityMatrix, mode: int) -> np.ndarray:
    return np.real(np.diag(reduce_fock(rho, mode).rho))


def mean_number(rho: FockDensityMatrix, mode: int) -> float:
    p = populations(rho, mode)
    return float(np.dot(np.arange(p.size), p))


def tail_populations(rho: FockDensityMatrix) -> List[float]:
    '''Population of the two highest Fock levels of every mode.'''
    return [float(np.sum(populations(rho, k)[-2:])) for k in range(rho.n_modes)]


def check_truncation(rho: FockDensityMatrix, threshold: float=TAIL_THRESHOLD) -> List[float]:
    tails = tail_populations(rho)
    for (mode, tail) in enumerate(tails):
        if tail >= threshold:
            raise QSpringTruncationError(
                f'mode {mode} holds {tail:.3g} in its top two Fock levels '
                f'(limit {threshold:g}), increase dims.', mode=mode, tail=tail)
    return tails


def check_physical(rho: FockDensityMatrix) -> Dict[str, float]:
    '''Trace, hermiticity and positivity of a density matrix; violations
    beyond tolerance are domain errors.'''
    matrix = rho.rho
    trace = complex(np.trace(matrix))
    hermitian = float(np.max(np.abs(matrix - matrix.conj().T)))
    min_eig = float(scipy.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))[0])
    if abs(trace - 1.0) > TRACE_TOL:
        raise QSpringDomainError(f'trace {trace:.10g} differs from 1.', 'rho')
    if hermitian > HERMITIAN_TOL:
        raise QSpringDomainError(f'not hermitian, deviation {hermitian:.3g}.', 'rho')
    if min_eig < POSITIVITY_TOL:
        raise QSpringDomainError(f'not positive, min eigenvalue {min_eig:.3g}.', 'rho')
    return {'trace': trace.real, 'hermitian_deviation': hermitian,
            'min_eigenvalue': min_eig}


# ***********************************************************************
# GAUSSIAN TO FOCK
#
# ***********************************************************************


def _lowering(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), k=1).astype(np.complex128)


def _single_mode_parameters(cov: np.ndarray) -> Tuple[float, float, float]:
    '''Decomposes sigma = (n + 1/2) R diag(e^-2r, e^2r) R^T into the thermal
    occupation n, the squeezing r and the squeezed quadrature angle.'''
    evals, evecs = np.linalg.eigh(cov)
    n_bar = max(math.sqrt(max(evals[0] * evals[1], 0.0)) - 0.5, 0.0)
    r = 0.25 * math.log(evals[1] / evals[0])
    angle = math.atan2(evecs[1, 0], evecs[0, 0])
    return n_bar, r, angle


def _single_mode_rho(cov: np.ndarray, mean: np.ndarray, d: int, pad: int) -> np.ndarray:
    n_bar, r, angle = _single_mode_parameters(cov)
    size = d + pad
    a = _lowering(size)
    ad = a.conj().T
    levels = np.arange(size)
    if n_bar > 0:
        probs = (n_bar / (n_bar + 1.0)) ** levels / (n_bar + 1.0)
    else:
        probs = (levels == 0).astype(np.float64)
    rho = np.diag(probs).astype(np.complex128)
    if r > 1e-14:
        zeta = r * np.exp(2j * angle)
        S = scipy.linalg.expm(0.5 * (np.conj(zeta) * a @ a - zeta * ad @ ad))
        rho = S @ rho @ S.conj().T
    alpha = (mean[0] + 1j * mean[1]) / math.sqrt(2.0)
    if abs(alpha) > 0:
        Dop = scipy.linalg.expm(alpha * ad - np.conj(alpha) * a)
        rho = Dop @ rho @ Dop.conj().T
    rho = rho[:d, :d]
    return rho / np.trace(rho).real


def from_gaussian(state: GaussianState, dims: Sequence[int],
                  pad: int=40) -> FockDensityMatrix:
    '''Fock representation of a product of displaced squeezed thermal states.

    :param state: Gaussian state without cross-mode correlations
    :param dims: Fock levels kept per mode
    :param pad: extra levels used while building each mode before cropping
    '''
    dims = tuple(int(d) for d in dims)
    if len(dims) != state.n_modes:
        raise QSpringDomainError(
            f'{len(dims)} dims given for {state.n_modes} modes.', 'dims')
    cov = state.cov
    for i in range(state.n_modes):
        for j in range(state.n_modes):
            if i != j and np.max(np.abs(cov[2 * i:2 * i + 2, 2 * j:2 * j + 2])) > 1e-12:
                raise QSpringDomainError(
                    f'modes {i} and {j} are correlated, only product states '
                    f'have a Fock representation here.', 'state')
    rho = np.ones((1, 1), dtype=np.complex128)
    for (k, d) in enumerate(dims):
        block = cov[2 * k:2 * k + 2, 2 * k:2 * k + 2]
        rho = np.kron(rho, _single_mode_rho(block, state.mean[2 * k:2 * k + 2], d, pad))
    result = FockDensityMatrix(dims, rho)
    check_truncation(result)
    return result


# ***********************************************************************
# MOMENTS AND DIAGNOSTICS
#
# ***********************************************************************


def _assemble_moments(a, N, M, xp):
    '''Mean and covariance of the quadratures from <a_i>, N_ij = <a_i^dag a_j>
    and M_ij = <a_i a_j>.'''
    n = a.shape[0]
    mean = xp.stack([math.sqrt(2.0) * a.real, math.sqrt(2.0) * a.imag], axis=1).reshape(-1)
    eye = xp.eye(n)
    XX = M.real + N.real + 0.5 * eye
    PP = -M.real + N.real + 0.5 * eye
    XP = M.imag + N.imag
    top = xp.stack([XX, XP], axis=-1)
    bottom = xp.stack([XP.T, PP], axis=-1)
    cov = xp.stack([top, bottom], axis=1).reshape(2 * n, 2 * n)
    cov = cov - xp.outer(mean, mean)
    return mean, 0.5 * (cov + cov.T)


def covariance_of(rho: FockDensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    '''Quadrature mean and symmetrized covariance of a density matrix.'''
    n = rho.n_modes
    ops = []
    for (k, d) in enumerate(rho.dims):
        factors = [np.eye(dk) for dk in rho.dims]
        factors[k] = _lowering(d)
        op = factors[0]
        for factor in factors[1:]:
            op = np.kron(op, factor)
        ops.append(op)
    matrix = rho.rho
    a = np.array([np.trace(op @ matrix) for op in ops])
    N = np.array([[np.trace(ops[i].conj().T @ ops[j] @ matrix) for j in range(n)]
                  for i in range(n)])
    M = np.array([[np.trace(ops[i] @ ops[j] @ matrix) for j in range(n)]
                  for i in range(n)])
    return _assemble_moments(a, N, M, np)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    evals, evecs = scipy.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


def fidelity_fock(rho1: FockDensityMatrix, rho2: FockDensityMatrix) -> float:
    '''Uhlmann fidelity (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.'''
    if rho1.dims != rho2.dims:
        raise QSpringDomainError(f'dims differ: {rho1.dims} vs {rho2.dims}.', 'dims')
    root = _psd_sqrt(rho1.rho)
    inner = root @ rho2.rho @ root
    evals = scipy.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    value = float(np.sum(np.sqrt(np.clip(evals, 0.0, None)))) ** 2
    return min(max(value, 0.0), 1.0)


def wigner_fock(rho: FockDensityMatrix, mode: int, xs, ps) -> np.ndarray:
    '''Wigner function of one mode by Laguerre summation over the reduced
    density matrix, indexed [ix, ip].'''
    single = reduce_fock(rho, mode).rho
    d = single.shape[0]
    X, P = np.meshgrid(np.asarray(xs, dtype=np.float64),
                       np.asarray(ps, dtype=np.float64), indexing='ij')
    radius2 = X * X + P * P
    alpha2 = math.sqrt(2.0) * (X + 1j * P)
    envelope = np.exp(-radius2) / math.pi
    W = np.zeros_like(X, dtype=np.complex128)
    for m in range(d):
        for n in range(m, d):
            if single[m, n] == 0:
                continue
            k = n - m
            norm = math.exp(0.5 * (scipy.special.gammaln(m + 1) - scipy.special.gammaln(n + 1)))
            laguerre = scipy.special.eval_genlaguerre(m, k, 2.0 * radius2)
            term = single[m, n] * (-1) ** m * norm * alpha2 ** k * laguerre
            W += term if k == 0 else 2.0 * term
    return np.real(W) * envelope


# ***********************************************************************
# LINDBLAD INTEGRATION
#
# - E = (a_1, a_1^dag, a_2, a_2^dag, ...), quadratures r = T E
# - H_eff = sum_pq W_pq E_p E_q, jump term sum_pq K_pq E_p rho E_q
# - the number-diagonal part of H_eff is applied exactly, the remainder by
#   RK4 in its frame
#
# ***********************************************************************


def _ladder_basis(n: int) -> np.ndarray:
    T = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    block = np.array([[1.0, 1.0], [-1j, 1j]]) / math.sqrt(2.0)
    for k in range(n):
        T[2 * k:2 * k + 2, 2 * k:2 * k + 2] = block
    return T


def generator_coefficients(model: QuadraticModel) -> Tuple[np.ndarray, np.ndarray]:
    '''Coefficients W (effective Hamiltonian) and K (jump term) of the master
    equation in the ladder basis E.

    The Hermitian part of every a_k a_k^dag term is normal ordered (the
    constant dropped), so the truncated ladder keeps a uniform spacing.
    '''
    n = model.n_modes
    T = _ladder_basis(n)
    swap = np.arange(2 * n) ^ 1
    W = 0.5 * T.T @ model.H_matrix @ T
    for k in range(n):
        shift = W[2 * k, 2 * k + 1].real
        W[2 * k + 1, 2 * k] += shift
        W[2 * k, 2 * k + 1] -= shift
    K = np.zeros_like(W)
    for jump in model.jumps:
        lam = T.T @ np.asarray(jump.coeff, dtype=np.complex128)
        lam_dag = np.conj(lam)[swap]
        W = W - 0.5j * jump.rate * np.outer(lam_dag, lam)
        K = K + jump.rate * np.outer(lam, lam_dag)
    return W, K


def split_diagonal(W: np.ndarray, dims: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, float]:
    '''Separates the number-diagonal part of the effective Hamiltonian.

    Returns the remaining coefficients, the complex level energies E_n of the
    diagonal part (shape dims) and the largest ladder frequency.
    '''
    dims = tuple(int(d) for d in dims)
    W = np.array(W, dtype=np.complex128)
    energies = np.zeros(dims, dtype=np.complex128)
    omega = 0.0
    for (k, d) in enumerate(dims):
        levels = np.arange(d, dtype=np.float64)
        raised = np.where(levels < d - 1, levels + 1.0, 0.0)
        e = W[2 * k + 1, 2 * k] * levels + W[2 * k, 2 * k + 1] * raised
        shape = [1] * len(dims)
        shape[k] = d
        energies = energies + e.reshape(shape)
        omega = max(omega, abs(W[2 * k + 1, 2 * k].real))
        W[2 * k + 1, 2 * k] = 0.0
        W[2 * k, 2 * k + 1] = 0.0
    return W, energies, omega


def stable_step(W: np.ndarray, K: np.ndarray, dims: Sequence[int]) -> float:
    '''Step keeping RK4 inside its stability region for the truncated
    generator.'''
    scale = np.repeat(np.sqrt(np.asarray(dims, dtype=np.float64) - 1.0), 2)
    weight = np.outer(scale, scale)
    bound = 2.0 * np.sum(np.abs(W) * weight) + np.sum(np.abs(K) * weight)
    return 2.0 / max(bound, 1e-12)


def interaction_step(W: np.ndarray, K: np.ndarray, dims: Sequence[int]) -> float:
    '''Default step of evolve_rho: the RK4 stability bound of the generator
    without its diagonal part, capped so terms rotating at twice the largest
    ladder frequency advance at most PHASE_PER_STEP per step.'''
    W_int, _, omega = split_diagonal(W, dims)
    step = stable_step(W_int, K, dims)
    if omega > 0:
        step = min(step, PHASE_PER_STEP / (2.0 * omega))
    return step


@lru_cache(maxsize=None)
def _compile_lindblad(dims: Tuple[int, ...]):
    n = len(dims)
    size = int(np.prod(dims))
    lower, upper = [], []
    for (k, d) in enumerate(dims):
        s = np.sqrt(np.arange(1, d, dtype=np.float64))
        lower.append(np.concatenate([s, [0.0]]))
        upper.append(np.concatenate([[0.0], s]))

    def _shape(k, axis):
        shape = [1] * (2 * n)
        shape[axis] = dims[k]
        return shape

    def _jax_wrapped_left(p, T):
        k, dagger = divmod(p, 2)
        if dagger:
            return jnp.roll(T, 1, axis=k) * upper[k].reshape(_shape(k, k))
        return jnp.roll(T, -1, axis=k) * lower[k].reshape(_shape(k, k))

    def _jax_wrapped_right(T, q):
        k, dagger = divmod(q, 2)
        axis = n + k
        if dagger:
            return jnp.roll(T, -1, axis=axis) * lower[k].reshape(_shape(k, axis))
        return jnp.roll(T, 1, axis=axis) * upper[k].reshape(_shape(k, axis))

    perm = tuple(range(n, 2 * n)) + tuple(range(n))

    def _jax_wrapped_dagger(T):
        return jnp.conj(jnp.transpose(T, perm))

    def _jax_wrapped_trace(T):
        return jnp.trace(T.reshape(size, size))

    def _jax_wrapped_rhs(W, K, rho):
        # -i (H rho - rho H^dag) + J = Q + Q^dag with Q = -i H rho + J / 2
        Z = [_jax_wrapped_left(q, rho) for q in range(2 * n)]
        R = [_jax_wrapped_right(rho, q) for q in range(2 * n)]
        Q = 0.0
        for p in range(2 * n):
            U = sum(-1j * W[p, q] * Z[q] + 0.5 * K[p, q] * R[q] for q in range(2 * n))
            Q = Q + _jax_wrapped_left(p, U)
        return Q + _jax_wrapped_dagger(Q)

    def _jax_wrapped_step(W, K, half, full, rho, dt):
        # RK4 in the frame of the diagonal part, which half and full apply exactly
        k1 = _jax_wrapped_rhs(W, K, rho)
        k2 = _jax_wrapped_rhs(W, K, half * (rho + 0.5 * dt * k1))
        k3 = _jax_wrapped_rhs(W, K, half * rho + 0.5 * dt * k2)
        k4 = _jax_wrapped_rhs(W, K, full * rho + dt * half * k3)
        rho = full * rho + (dt / 6.0) * (full * k1 + 2.0 * half * (k2 + k3) + k4)
        return 0.5 * (rho + _jax_wrapped_dagger(rho))

    def _jax_wrapped_diagnostics(rho):
        a = jnp.stack([_jax_wrapped_trace(_jax_wrapped_left(2 * i, rho))
                       for i in range(n)])
        N = jnp.stack([jnp.stack([
            _jax_wrapped_trace(_jax_wrapped_left(2 * i + 1, _jax_wrapped_left(2 * j, rho)))
            for j in range(n)]) for i in range(n)])
        M = jnp.stack([jnp.stack([
            _jax_wrapped_trace(_jax_wrapped_left(2 * i, _jax_wrapped_left(2 * j, rho)))
            for j in range(n)]) for i in range(n)])
        mean, cov = _assemble_moments(a, N, M, jnp)
        matrix = rho.reshape(size, size)
        herm = jnp.max(jnp.abs(matrix - jnp.conj(matrix.T)))
        min_eig = jnp.linalg.eigvalsh(0.5 * (matrix + jnp.conj(matrix.T)))[0]
        diag = jnp.real(jnp.diag(matrix)).reshape(dims)
        tails = []
        for k in range(n):
            others = tuple(axis for axis in range(n) if axis != k)
            marginal = jnp.sum(diag, axis=others) if others else diag
            tails.append(jnp.sum(marginal[-2:]))
        trace = jnp.real(_jax_wrapped_trace(rho))
        return mean, cov, min_eig, herm, trace, jnp.stack(tails)

    @partial(jax.jit, static_argnames=('n_samples',))
    def _jax_wrapped_integrate(W, K, half, full, rho, dt, n_sub, n_samples):

        def _jax_wrapped_substep(_, carry):
            rho, worst = carry
            rho = _jax_wrapped_step(W, K, half, full, rho, dt)
            trace = jnp.real(_jax_wrapped_trace(rho))
            worst = jnp.maximum(worst, jnp.abs(trace - 1.0))
            return rho / trace, worst

        def _jax_wrapped_sample(rho, _):
            rho, worst = jax.lax.fori_loop(
                0, n_sub, _jax_wrapped_substep, (rho, jnp.asarray(0.0)))
            return rho, (_jax_wrapped_diagnostics(rho), worst)

        final, (diagnostics, worst) = jax.lax.scan(
            _jax_wrapped_sample, rho, None, length=n_samples - 1)
        return final, diagnostics, worst

    return _jax_wrapped_integrate, _jax_wrapped_diagnostics


@dataclass(frozen=True, eq=False)
class FockTrajectory:
    times: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    dims: Tuple[int, ...]
    mode_labels: Tuple[str, ...]
    min_eigenvalues: np.ndarray
    traces: np.ndarray
    tails: np.ndarray
    renormalisation: float
    dt: float
    final: FockDensityMatrix

    def __len__(self) -> int:
        return len(self.times)

    def gaussian(self, i: int) -> GaussianState:
        '''Gaussian state with the moments of sample i.'''
        return GaussianState(self.means[i], self.covs[i], self.mode_labels)

    def to_rows(self) -> List[List[str]]:
        return trajectory_to_rows(self.times, self.means, self.covs, self.mode_labels)

    def to_dict(self) -> Dict[str, Any]:
        return {'dims': list(self.dims),
                'mode_labels': list(self.mode_labels),
                'dt': self.dt,
                'renormalisation': self.renormalisation,
                'min_eigenvalue': float(np.min(self.min_eigenvalues)),
                'max_tail': self.tails.max(axis=0).tolist(),
                'times': self.times,
                'means': self.means,
                'covs': self.covs}


def evolve_rho(model: QuadraticModel, rho: FockDensityMatrix, t_final: float,
               dt: Optional[float]=None,
               samples: int=101,
               verbose: bool=False) -> FockTrajectory:
    '''Integrates the Lindblad master equation of a (unit-scaled) model.

    The number-diagonal part of the effective Hamiltonian (free rotation and
    diagonal damping) is applied exactly as a phase and decay factor on every
    matrix element; the rest of the generator is stepped by RK4 in that
    frame. The trace is renormalised after every step; the largest
    correction per unit time is reported and a warning is raised above 1e-6.
    The tail rule and positivity are checked at every sample.

    :param model: quadratic model with the density matrix's mode count
    :param rho: initial density matrix
    :param t_final: final time
    :param dt: requested step (default: interaction_step of the generator)
    :param samples: number of emitted samples including t = 0
    :param verbose: print progress
    '''
    if model.n_modes != rho.n_modes:
        raise QSpringDomainError(
            f'model has {model.n_modes} modes, rho has {rho.n_modes}.', 'rho')
    if not np.isfinite(t_final) or t_final <= 0:
        raise QSpringDomainError(f'must be positive, got {t_final}.', 't_final')
    if samples < 2:
        raise QSpringDomainError(f'must be at least 2, got {samples}.', 'samples')
    W, K = generator_coefficients(model)
    if dt is None:
        dt = interaction_step(W, K, rho.dims)
    elif not np.isfinite(dt) or dt <= 0:
        raise QSpringDomainError(f'must be positive, got {dt}.', 'dt')
    check_truncation(rho)

    times = np.linspace(0.0, t_final, samples)
    spacing = t_final / (samples - 1)
    n_sub = max(1, int(math.ceil(spacing / dt - 1e-9)))
    step = spacing / n_sub
    print_message(f'[INFO] Fock integration: dims={rho.dims}, dt={step:.4g}, '
                  f'steps={n_sub * (samples - 1)}', verbose=verbose)

    W_int, energies, _ = split_diagonal(W, rho.dims)
    gap = np.subtract.outer(energies, np.conj(energies))
    half = np.exp(-0.5j * step * gap)
    integrate, diagnose = _compile_lindblad(rho.dims)
    rho0 = jnp.asarray(rho.tensor)
    final, diagnostics, worst = integrate(
        jnp.asarray(W_int), jnp.asarray(K), jnp.asarray(half), jnp.asarray(half * half),
        rho0, step, n_sub, samples)
    first = diagnose(rho0)
    means, covs, min_eigs, herms, traces, tails = [
        np.concatenate([np.asarray(x0)[None], np.asarray(x)])
        for (x0, x) in zip(first, diagnostics)]

    iterator = tqdm(range(samples), disable=not verbose, desc='checking samples')
    for i in iterator:
        if not (np.all(np.isfinite(covs[i])) and np.isfinite(min_eigs[i])):
            raise QSpringInstabilityError(
                f'density matrix became non-finite at t = {times[i]:.6g}.',
                time=float(times[i]))
        for (mode, tail) in enumerate(tails[i]):
            if tail >= TAIL_THRESHOLD:
                raise QSpringTruncationError(
                    f'mode {mode} holds {tail:.3g} in its top two Fock levels at '
                    f't = {times[i]:.6g}, increase dims.', mode=mode, tail=float(tail))
        if min_eigs[i] < POSITIVITY_TOL:
            raise QSpringInstabilityError(
                f'density matrix lost positivity (min eigenvalue {min_eigs[i]:.3g}) '
                f'at t = {times[i]:.6g}.', time=float(times[i]), value=float(min_eigs[i]))

    renormalisation = float(np.max(np.asarray(worst))) / step
    if renormalisation > RENORMALISATION_TOL:
        raise_warning(f'[WARN] trace renormalisation {renormalisation:.3g} per unit '
                      f'time exceeds {RENORMALISATION_TOL:g}.')
    final = FockDensityMatrix(rho.dims, np.asarray(final))
    return FockTrajectory(times=times, means=means, covs=covs, dims=rho.dims,
                          mode_labels=model.mode_labels, min_eigenvalues=min_eigs,
                          traces=traces, tails=tails,
                          renormalisation=renormalisation, dt=step, final=final)
