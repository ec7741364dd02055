# ***********************************************************************
# QSPRING QUADRATIC MODELS
#
# - quadratic Hamiltonians H = 1/2 r^T H r over r = (X1, P1, X2, P2, ...)
# - linear jump operators sqrt(rate) c^T r in the standard dissipator
# - drift A and diffusion D of the first and second moments
#
# Convention: X = (a + a^dag)/sqrt(2), P = -i (a - a^dag)/sqrt(2), vacuum
# variance 1/2. A term (Gamma/2) D[O] with D[a]W = 2 a W a^dag - {a^dag a, W}
# is a standard jump of rate Gamma.
#
# ***********************************************************************


from dataclasses import dataclass
import json
import math
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from qspring.core.exception import QSpringDomainError

_OMEGA_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n: int) -> np.ndarray:
    return np.kron(np.eye(n), _OMEGA_BLOCK)


def annihilation_coeff(n: int, mode: int) -> np.ndarray:
    coeff = np.zeros(2 * n, dtype=np.complex128)
    coeff[2 * mode] = 1.0 / math.sqrt(2.0)
    coeff[2 * mode + 1] = 1j / math.sqrt(2.0)
    return coeff


def creation_coeff(n: int, mode: int) -> np.ndarray:
    return np.conj(annihilation_coeff(n, mode))


def position_coeff(n: int, mode: int) -> np.ndarray:
    coeff = np.zeros(2 * n, dtype=np.complex128)
    coeff[2 * mode] = 1.0
    return coeff


@dataclass(frozen=True, eq=False)
class Jump:
    '''Lindblad operator sqrt(rate) c^T r.'''
    coeff: np.ndarray
    rate: float
    label: str = ''


def drift_diffusion(H_matrix, jumps: Sequence[Jump]) -> Tuple[np.ndarray, np.ndarray]:
    '''Maps a quadratic Hamiltonian and linear jumps to the drift A and the
    diffusion D of d<r>/dt = A <r> and d sigma/dt = A sigma + sigma A^T + D.

    :param H_matrix: real symmetric 2n x 2n matrix with H = 1/2 r^T H r
    :param jumps: linear jump operators with non-negative rates
    '''
    H = np.asarray(H_matrix, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2:
        raise QSpringDomainError(f'must be a square matrix of even size, got {H.shape}.',
                                 'H_matrix')
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(H)))):
        raise QSpringDomainError('must be symmetric.', 'H_matrix')
    dim = H.shape[0]
    rows = []
    for (i, jump) in enumerate(jumps):
        if not np.isfinite(jump.rate) or jump.rate < 0:
            raise QSpringDomainError(f'must be non-negative, got {jump.rate}.',
                                     f'jumps[{i}].rate')
        coeff = np.asarray(jump.coeff, dtype=np.complex128)
        if coeff.shape != (dim,):
            raise QSpringDomainError(f'must have shape ({dim},), got {coeff.shape}.',
                                     f'jumps[{i}].coeff')
        rows.append(math.sqrt(jump.rate) * coeff)
    Omega = symplectic_form(dim // 2)
    if rows:
        C = np.stack(rows)
        M = C.conj().T @ C
    else:
        M = np.zeros((dim, dim), dtype=np.complex128)
    A = Omega @ (H + M.imag)
    D = Omega @ M.real @ Omega.T
    return A, 0.5 * (D + D.T)


@dataclass(frozen=True, eq=False)
class QuadraticModel:
    mode_labels: Tuple[str, ...]
    H_matrix: np.ndarray
    jumps: Tuple[Jump, ...]
    drift: np.ndarray
    diffusion: np.ndarray

    @classmethod
    def build(cls, mode_labels: Sequence[str], H_matrix,
              jumps: Sequence[Jump]) -> 'QuadraticModel':
        H = np.asarray(H_matrix, dtype=np.float64)
        if H.shape != (2 * len(mode_labels),) * 2:
            raise QSpringDomainError(
                f'shape {H.shape} does not match {len(mode_labels)} modes.', 'H_matrix')
        jumps = tuple(jumps)
        A, D = drift_diffusion(H, jumps)
        return cls(mode_labels=tuple(mode_labels), H_matrix=H, jumps=jumps,
                   drift=A, diffusion=D)

    @property
    def n_modes(self) -> int:
        return len(self.mode_labels)

    def index(self, mode) -> int:
        if isinstance(mode, str):
            if mode not in self.mode_labels:
                raise QSpringDomainError(f'unknown mode, expected one of '
                                         f'{self.mode_labels}.', 'mode')
            return self.mode_labels.index(mode)
        if not 0 <= mode < self.n_modes:
            raise QSpringDomainError(f'mode index {mode} out of range.', 'mode')
        return int(mode)


def _check_rates(**rates) -> None:
    for (name, value) in rates.items():
        if value is None or not np.isfinite(value) or value < 0:
            raise QSpringDomainError(f'must be non-negative, got {value}.', name)


def _membrane_bath(n: int, mode: int, gamma_m: float, n_bar: float,
                   thermal_rates: Optional[Tuple[float, float]]):
    if thermal_rates is None:
        down, up = gamma_m * (n_bar + 1.0), gamma_m * n_bar
    else:
        down, up = thermal_rates
        _check_rates(thermal_down=down, thermal_up=up)
    return [Jump(annihilation_coeff(n, mode), down, 'L_m'),
            Jump(creation_coeff(n, mode), up, 'L_m^dag')]


def _atom_diffusion(n: int, gamma_at: float) -> Jump:
    # L_at = sqrt(Gamma_at) (a + a^dag) = sqrt(2 Gamma_at) X_at
    return Jump(math.sqrt(2.0) * position_coeff(n, 0), gamma_at, 'L_at')


def build_effective_model(G: float, omega_at: float, omega_m: float,
                          gamma_c_plus: float, gamma_c_minus: float, phi: float,
                          gamma_at: float, gamma_m: float, n_bar: float,
                          thermal_rates: Optional[Tuple[float, float]]=None
                          ) -> QuadraticModel:
    '''Effective atom-membrane model after elimination of the cavity fields.

    H = omega_at a^dag a + omega_m b^dag b - G (a + a^dag)(b + b^dag) with
    cavity channels J+ (Gamma_c+), J+^dag (Gamma_c-), J- (Gamma_c-),
    J-^dag (Gamma_c+) where J+- = cos(phi) b +- sin(phi) a, atomic momentum
    diffusion and the thermal membrane bath. thermal_rates=(down, up)
    replaces the bath rates gamma_m (n_bar + 1) and gamma_m n_bar.
    '''
    _check_rates(gamma_c_plus=gamma_c_plus, gamma_c_minus=gamma_c_minus,
                 gamma_at=gamma_at, gamma_m=gamma_m, n_bar=n_bar)
    H = np.zeros((4, 4))
    H[0:2, 0:2] = omega_at * np.eye(2)
    H[2:4, 2:4] = omega_m * np.eye(2)
    H[0, 2] = H[2, 0] = -2.0 * G

    a, b = annihilation_coeff(2, 0), annihilation_coeff(2, 1)
    J_plus = math.cos(phi) * b + math.sin(phi) * a
    J_minus = math.cos(phi) * b - math.sin(phi) * a
    jumps = [Jump(J_plus, gamma_c_plus, 'J+'),
             Jump(np.conj(J_plus), gamma_c_minus, 'J+^dag'),
             Jump(J_minus, gamma_c_minus, 'J-'),
             Jump(np.conj(J_minus), gamma_c_plus, 'J-^dag'),
             _atom_diffusion(2, gamma_at)]
    jumps += _membrane_bath(2, 1, gamma_m, n_bar, thermal_rates)
    jumps = [jump for jump in jumps if jump.rate > 0]
    return QuadraticModel.build(('atom', 'membrane'), H, jumps)


def build_full_model(omega_at: float, omega_m: float, Delta: float, kappa: float,
                     g_atc: float, g_mc: float, gamma_at: float, gamma_m: float,
                     n_bar: float) -> QuadraticModel:
    '''Atom, membrane and the two cavity fields in the laser rotating frames.

    H = omega_at a^dag a + omega_m b^dag b - Delta (a1^dag a1 - a2^dag a2)
      + g_atc [(a1 + a1^dag) - (a2 + a2^dag)] (a + a^dag)
      + g_mc [(a1 + a1^dag) + (a2 + a2^dag)] (b + b^dag)
    with cavity decay kappa D[a_i] (standard rate 2 kappa).
    '''
    _check_rates(kappa=kappa, gamma_at=gamma_at, gamma_m=gamma_m, n_bar=n_bar)
    if kappa <= 0:
        raise QSpringDomainError('must be strictly positive.', 'kappa')
    H = np.zeros((8, 8))
    H[0:2, 0:2] = omega_at * np.eye(2)
    H[2:4, 2:4] = omega_m * np.eye(2)
    H[4:6, 4:6] = -Delta * np.eye(2)
    H[6:8, 6:8] = Delta * np.eye(2)

    # (a_i + a_i^dag)(a + a^dag) = 2 X_i X_at
    H[0, 4] = H[4, 0] = 2.0 * g_atc
    H[0, 6] = H[6, 0] = -2.0 * g_atc
    H[2, 4] = H[4, 2] = 2.0 * g_mc
    H[2, 6] = H[6, 2] = 2.0 * g_mc

    jumps = [Jump(annihilation_coeff(4, 2), 2.0 * kappa, 'L_1'),
             Jump(annihilation_coeff(4, 3), 2.0 * kappa, 'L_2'),
             _atom_diffusion(4, gamma_at)]
    jumps += _membrane_bath(4, 1, gamma_m, n_bar, None)
    jumps = [jump for jump in jumps if jump.rate > 0]
    return QuadraticModel.build(('atom', 'membrane', 'cav1', 'cav2'), H, jumps)


def submodel(model: QuadraticModel, modes: Sequence) -> QuadraticModel:
    '''Restricts a model to a subset of its modes, dropping every coupling
    to the others and every jump that no longer acts.'''
    idx = [model.index(mode) for mode in modes]
    quad = np.array([2 * i + j for i in idx for j in (0, 1)])
    jumps = []
    for jump in model.jumps:
        coeff = np.asarray(jump.coeff)[quad]
        if np.any(coeff != 0):
            jumps.append(Jump(coeff, jump.rate, jump.label))
    return QuadraticModel.build([model.mode_labels[i] for i in idx],
                                model.H_matrix[np.ix_(quad, quad)], jumps)


def rescale(model: QuadraticModel, reference: float) -> QuadraticModel:
    '''Expresses a model in units of a reference frequency.'''
    if not np.isfinite(reference) or reference <= 0:
        raise QSpringDomainError('must be strictly positive.', 'reference')
    jumps = [Jump(jump.coeff, jump.rate / reference, jump.label) for jump in model.jumps]
    return QuadraticModel.build(model.mode_labels, model.H_matrix / reference, jumps)


def stability(model: QuadraticModel) -> Tuple[float, complex]:
    '''Returns the largest real part of the drift eigenvalues and the
    eigenvalue attaining it.'''
    eigs = np.linalg.eigvals(model.drift)
    i = int(np.argmax(eigs.real))
    return float(eigs[i].real), complex(eigs[i])


def is_stable(model: QuadraticModel) -> bool:
    return stability(model)[0] < 0


def mode_frequencies(model: QuadraticModel) -> np.ndarray:
    '''Normal-mode frequencies, the positive imaginary parts of the drift
    eigenvalues in ascending order.'''
    eigs = np.linalg.eigvals(model.drift)
    return np.sort(eigs.imag[eigs.imag > 0])


def max_frequency(model: QuadraticModel) -> float:
    eigs = np.linalg.eigvals(model.drift)
    return float(np.max(np.abs(eigs))) if eigs.size else 0.0


# ***********************************************************************
# SERIALIZATION
#
# ***********************************************************************


def model_to_dict(model: QuadraticModel) -> Dict[str, Any]:
    return {
        'mode_labels': list(model.mode_labels),
        'H_matrix': model.H_matrix.tolist(),
        'jumps': [{'label': jump.label,
                   'rate': float(jump.rate),
                   'coeff': [[float(c.real), float(c.imag)] for c in jump.coeff]}
                  for jump in model.jumps],
        'drift': model.drift.tolist(),
        'diffusion': model.diffusion.tolist()
    }


def model_from_dict(data: Dict[str, Any]) -> QuadraticModel:
    '''Rebuilds a model from its JSON form; drift and diffusion are always
    regenerated from the Hamiltonian and the jumps.'''
    jumps = [Jump(np.array([complex(re, im) for (re, im) in item['coeff']]),
                  float(item['rate']), item.get('label', ''))
             for item in data.get('jumps', [])]
    return QuadraticModel.build(data['mode_labels'], np.array(data['H_matrix']), jumps)


def save_model(model: QuadraticModel, path: str) -> None:
    with open(path, 'w') as file:
        json.dump(model_to_dict(model), file, indent=2, sort_keys=True)


def load_model(path: str) -> QuadraticModel:
    with open(path, 'r') as file:
        return model_from_dict(json.load(file))
