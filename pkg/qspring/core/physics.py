# ***********************************************************************
# QSPRING PHYSICS
#
# Raw parameters of the atom, the two-mode cavity, the membrane and the
# drive, the optical lattice and membrane geometry, every derived rate of
# the cavity-mediated coupling and the strong-coupling condition ledger.
#
# All internal frequencies are angular (rad/s), all lengths SI metres.
#
# ***********************************************************************


from ast import literal_eval
from dataclasses import asdict, dataclass, field, fields, replace
import json
import math
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import constants
from scipy.optimize import brentq, minimize_scalar

from qspring.core.exception import (
    QSpringConfigError,
    QSpringDomainError,
    raise_warning
)

HBAR = constants.hbar
KB = constants.k
C_LIGHT = constants.c
TWO_PI = 2.0 * np.pi


def _require_positive(value, path: str) -> None:
    if value is None or not np.isfinite(value) or value <= 0:
        raise QSpringDomainError(f'must be finite and strictly positive, got {value}.',
                                 path)


# ***********************************************************************
# PARAMETERS
#
# - immutable sections validated on construction
# - field paths in errors follow the JSON layout (section.field)
#
# ***********************************************************************


@dataclass(frozen=True)
class AtomParams:
    mass_kg: float
    gamma_rad_s: float
    lambda1_m: float
    lambda2_m: float
    delta_rad_s: float
    vacuum_rabi_rad_s: float

    def __post_init__(self):
        for name in ('mass_kg', 'gamma_rad_s', 'lambda1_m', 'lambda2_m',
                     'vacuum_rabi_rad_s'):
            _require_positive(getattr(self, name), f'atom.{name}')
        if not np.isfinite(self.delta_rad_s) or self.delta_rad_s >= 0:
            raise QSpringDomainError(
                f'must be negative (red atomic detuning), got {self.delta_rad_s}.',
                'atom.delta_rad_s')
        if self.lambda1_m >= self.lambda2_m:
            raise QSpringDomainError(
                'mode 1 must carry the shorter wavelength.', 'atom.lambda2_m')


@dataclass(frozen=True)
class CavityParams:
    length_m: float
    finesse: float
    waist_m: float
    detuning_rad_s: float
    mode_index_offset: int = 0

    def __post_init__(self):
        for name in ('length_m', 'finesse', 'waist_m', 'detuning_rad_s'):
            _require_positive(getattr(self, name), f'cavity.{name}')
        if int(self.mode_index_offset) != self.mode_index_offset \
        or self.mode_index_offset < 0:
            raise QSpringDomainError(
                f'must be a non-negative integer, got {self.mode_index_offset}.',
                'cavity.mode_index_offset')


@dataclass(frozen=True)
class MembraneParams:
    mass_kg: float
    omega_m_rad_s: float
    quality: float
    reflectivity: float
    temperature_K: float
    kappa_th_hz: float
    side_m: float
    thickness_m: float

    def __post_init__(self):
        for name in ('mass_kg', 'omega_m_rad_s', 'quality', 'kappa_th_hz',
                     'side_m', 'thickness_m'):
            _require_positive(getattr(self, name), f'membrane.{name}')
        if not (0.0 < self.reflectivity < 1.0):
            raise QSpringDomainError(
                f'must lie in (0, 1), got {self.reflectivity}.',
                'membrane.reflectivity')
        if not np.isfinite(self.temperature_K) or self.temperature_K < 0:
            raise QSpringDomainError(
                f'must be non-negative, got {self.temperature_K}.',
                'membrane.temperature_K')


@dataclass(frozen=True)
class DriveParams:
    '''Drive of the two cavity modes, given either as the total circulating
    power or as the real intracavity amplitude of each mode.

    By default the power is shared equally by the two modes; without
    split_power each mode carries the amplitude set by the full power.
    '''
    circulating_power_W: Optional[float] = None
    alpha: Optional[float] = None
    split_power: bool = True

    def __post_init__(self):
        if (self.circulating_power_W is None) == (self.alpha is None):
            raise QSpringDomainError(
                'exactly one of circulating_power_W and alpha must be set.', 'drive')
        if self.circulating_power_W is not None:
            _require_positive(self.circulating_power_W, 'drive.circulating_power_W')
        elif not np.isfinite(self.alpha) or self.alpha < 0:
            raise QSpringDomainError(
                f'must be non-negative, got {self.alpha}.', 'drive.alpha')


@dataclass(frozen=True)
class SystemParams:
    atom: AtomParams
    cavity: CavityParams
    membrane: MembraneParams
    drive: DriveParams
    bose_occupation: bool = False


_SECTIONS = {
    'atom': AtomParams,
    'cavity': CavityParams,
    'membrane': MembraneParams,
    'drive': DriveParams
}


# ***********************************************************************
# JSON INGESTION AND OVERRIDES
#
# - <name>_hz is converted to <name>_rad_s here and nowhere else
# - unknown sections or fields are config errors naming the path
#
# ***********************************************************************


def _convert_field(section: str, key: str, value: Any) -> Tuple[str, Any]:
    names = {f.name for f in fields(_SECTIONS[section])}
    if key in names:
        return key, value
    if key.endswith('_hz'):
        target = key[:-len('_hz')] + '_rad_s'
        if target in names:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise QSpringConfigError(
                    f'frequency must be numeric, got {value!r}.', f'{section}.{key}')
            return target, TWO_PI * value
    raise QSpringConfigError(f'unknown field, expected one of {sorted(names)}.',
                             f'{section}.{key}')


def params_from_dict(data: Mapping[str, Any]) -> SystemParams:
    '''Builds SystemParams from a JSON-like mapping mirroring its sections.'''
    unknown = set(data) - set(_SECTIONS) - {'bose_occupation'}
    if unknown:
        raise QSpringConfigError(
            f'unknown section(s) {sorted(unknown)}.', sorted(unknown)[0])
    sections = {}
    for (section, cls) in _SECTIONS.items():
        raw = data.get(section, {} if section == 'drive' else None)
        if raw is None:
            raise QSpringConfigError('section is missing.', section)
        kwargs = dict(_convert_field(section, key, value) for (key, value) in raw.items())
        try:
            sections[section] = cls(**kwargs)
        except TypeError as error:
            raise QSpringConfigError(f'incomplete section: {error}.', section) from None
    return SystemParams(bose_occupation=bool(data.get('bose_occupation', False)),
                        **sections)


def params_to_dict(params: SystemParams) -> Dict[str, Any]:
    return asdict(params)


def load_params(path: str) -> SystemParams:
    '''Loads a JSON parameter file; I/O errors propagate unchanged.'''
    with open(path, 'r') as file:
        data = json.load(file)
    return params_from_dict(data)


def _parse_override(text: str) -> Tuple[str, Any]:
    if '=' not in text:
        raise QSpringConfigError(f'override must read section.field=value, got {text!r}.',
                                 text)
    path, raw = text.split('=', 1)
    path = path.strip()
    try:
        value = literal_eval(raw.strip())
    except (ValueError, SyntaxError):
        value = raw.strip()
    return path, value


def apply_overrides(params: SystemParams,
                    overrides: Union[Iterable[str], Mapping[str, Any]]) -> SystemParams:
    '''Applies dotted section.field=value overrides and returns new parameters.

    Setting drive.alpha clears drive.circulating_power_W and vice versa.
    '''
    if isinstance(overrides, Mapping):
        items = list(overrides.items())
    else:
        items = [_parse_override(text) for text in overrides]
    for (path, value) in items:
        if path == 'bose_occupation':
            params = replace(params, bose_occupation=bool(value))
            continue
        section, _, key = path.partition('.')
        if section not in _SECTIONS or not key:
            raise QSpringConfigError('unknown override path.', path)
        name, value = _convert_field(section, key, value)
        updates = {name: value}
        if section == 'drive' and name == 'alpha':
            updates['circulating_power_W'] = None
        elif section == 'drive' and name == 'circulating_power_W':
            updates['alpha'] = None
        params = replace(params, **{section: replace(getattr(params, section), **updates)})
    return params


# ***********************************************************************
# CAVITY AND DRIVE
#
# ***********************************************************************


def kappa_and_cooperativity(params: SystemParams) -> Tuple[float, float]:
    '''Returns the cavity amplitude decay rate kappa = pi c / (2 F L) and the
    single-atom cooperativity C = Omega_0^2 / (kappa gamma).'''
    cavity, atom = params.cavity, params.atom
    _require_positive(cavity.finesse, 'cavity.finesse')
    _require_positive(cavity.length_m, 'cavity.length_m')
    _require_positive(atom.vacuum_rabi_rad_s, 'atom.vacuum_rabi_rad_s')
    _require_positive(atom.gamma_rad_s, 'atom.gamma_rad_s')
    kappa = np.pi * C_LIGHT / (2.0 * cavity.finesse * cavity.length_m)
    coop = atom.vacuum_rabi_rad_s ** 2 / (kappa * atom.gamma_rad_s)
    return kappa, coop


def geometric_cooperativity(wavelength_m: float, finesse: float, waist_m: float) -> float:
    '''Cooperativity from the mode geometry, C = 3 lambda^2 F / (pi^3 w0^2).'''
    _require_positive(wavelength_m, 'wavelength_m')
    _require_positive(finesse, 'finesse')
    _require_positive(waist_m, 'waist_m')
    return 3.0 * wavelength_m ** 2 * finesse / (np.pi ** 3 * waist_m ** 2)


def cavity_wavenumbers(params: SystemParams) -> Tuple[float, float]:
    '''Wavenumbers k_i = n_i pi / L of the two longitudinal modes closest to
    the drive wavelengths, with n_1 - n_2 fixed by the mode index offset.'''
    L = params.cavity.length_m
    n1 = int(round(2.0 * L / params.atom.lambda1_m))
    q = int(params.cavity.mode_index_offset)
    if q == 0:
        q = n1 - int(round(2.0 * L / params.atom.lambda2_m))
    n2 = n1 - q
    if q <= 0 or n2 <= 0:
        raise QSpringDomainError(
            f'mode indices n1={n1}, n2={n2} do not define two distinct modes.',
            'cavity.mode_index_offset')
    return n1 * np.pi / L, n2 * np.pi / L


def drive_frequency(params: SystemParams) -> float:
    return TWO_PI * C_LIGHT / params.atom.lambda1_m


def drive_amplitude(params: SystemParams) -> Tuple[float, float]:
    '''Returns the per-mode amplitude alpha and the circulating power P_c,
    linked by P_c = hbar omega_1 c alpha^2 / L (times two with split_power, the default).'''
    drive = params.drive
    scale = HBAR * drive_frequency(params) * C_LIGHT / params.cavity.length_m
    if drive.split_power:
        scale *= 2.0
    if drive.alpha is not None:
        alpha = float(drive.alpha)
        if alpha <= 0:
            raise QSpringDomainError('intracavity amplitude must be non-zero.',
                                     'drive.alpha')
        return alpha, scale * alpha ** 2
    power = float(drive.circulating_power_W)
    return math.sqrt(power / scale), power


# ***********************************************************************
# OPTICAL LATTICE
#
# - u(x) = sin^2(k1 x) + sin^2(k2 x) = 1 - cos(k x) cos(dk x)
# - red detuning traps the atom at intensity maxima, curvature = -u''
# - work in s = k x so brackets and tolerances are scale free
#
# ***********************************************************************


@dataclass(frozen=True)
class LatticeSite:
    x_at_m: float
    theta: float
    xi: float
    curvature: float
    site_index: int
    well_offset: int = 0
    residual: float = 0.0


def _lattice_slope(s, eps):
    return np.sin(s) * np.cos(eps * s) + eps * np.cos(s) * np.sin(eps * s)


def _lattice_curvature(s, eps):
    return -(1.0 + eps ** 2) * np.cos(s) * np.cos(eps * s) \
        + 2.0 * eps * np.sin(s) * np.sin(eps * s)


def lattice_wells(k: float, delta_k: float, site_index: int=1,
                  max_periods: int=64, points_per_period: int=32) -> List[LatticeSite]:
    '''Finds all trapping wells of the two-colour lattice inside the beat
    period that ends at delta_k x = site_index pi.

    Wells are ranked by |1 - theta| + |1 - xi|, ties broken by the distance
    to the beat node; the scan is limited to max_periods optical periods on
    either side of the node.
    '''
    _require_positive(k, 'k')
    _require_positive(delta_k, 'delta_k')
    if delta_k >= k:
        raise QSpringDomainError(f'must be smaller than k={k}, got {delta_k}.', 'delta_k')
    if int(site_index) != site_index or site_index < 1:
        raise QSpringDomainError(f'must be an integer >= 1, got {site_index}.',
                                 'site_index')
    eps = delta_k / k
    s_node = (site_index - 0.5) * np.pi / eps
    s_lo = max((site_index - 1) * np.pi / eps, s_node - TWO_PI * max_periods)
    s_hi = min(site_index * np.pi / eps, s_node + TWO_PI * max_periods)
    num = int(np.ceil((s_hi - s_lo) / (TWO_PI / points_per_period)))
    grid = np.linspace(s_lo, s_hi, num + 1)
    slope = _lattice_slope(grid, eps)

    wells = []
    for i in np.nonzero(slope[:-1] * slope[1:] < 0)[0]:
        a, width = grid[i], grid[i + 1] - grid[i]
        t = brentq(lambda t: _lattice_slope(a + t, eps), 0.0, width,
                   xtol=1e-12 * width, rtol=1e-12)
        s = a + t
        curvature = _lattice_curvature(s, eps)
        if curvature <= 0:
            continue
        theta = abs(np.sin((1.0 + eps) * s))
        if theta == 0:
            continue
        u = 1.0 - np.cos(s) * np.cos(eps * s)
        residual = abs(np.tan(s) + eps * np.tan(eps * s))
        wells.append(LatticeSite(x_at_m=s / k,
                                 theta=float(theta),
                                 xi=float(u / theta ** 2),
                                 curvature=float(curvature * k ** 2),
                                 site_index=int(site_index),
                                 residual=float(residual)))
    if not wells:
        raise QSpringDomainError('no trapping well found in the beat period.',
                                 'site_index')
    x_node = s_node / k
    wells.sort(key=lambda w: (abs(1.0 - w.theta) + abs(1.0 - w.xi),
                              abs(w.x_at_m - x_node)))
    return [replace(w, well_offset=i) for (i, w) in enumerate(wells)]


def solve_lattice_site(k: float, delta_k: float, site_index: int=1,
                       well_offset: int=0) -> LatticeSite:
    '''Solves k tan(k x) = -delta_k tan(delta_k x) for the trapping well of
    the given family with the best geometry (theta and xi closest to one).

    :param k: sum k1 + k2 of the two mode wavenumbers (1/m)
    :param delta_k: difference k1 - k2 (1/m), 0 < delta_k < k
    :param site_index: beat period ending at delta_k x = site_index pi
    :param well_offset: rank of the well to return, 0 is the best
    '''
    wells = lattice_wells(k, delta_k, site_index)
    if well_offset >= len(wells):
        raise_warning(f'[WARN] Well offset {well_offset} exceeds the {len(wells)} '
                      f'wells of site {site_index}, returning the last one.')
        well_offset = len(wells) - 1
    return wells[well_offset]


def trap_frequency(params: SystemParams, site: LatticeSite,
                   alpha: Optional[float]=None) -> float:
    '''Harmonic trap frequency omega_at^2 = hbar |U0| alpha^2 u'' / m.'''
    if site.curvature <= 0:
        raise QSpringDomainError(
            f'trap curvature must be positive, got {site.curvature}.', 'site.curvature')
    if alpha is None:
        alpha, _ = drive_amplitude(params)
    U0 = params.atom.vacuum_rabi_rad_s ** 2 / params.atom.delta_rad_s
    return math.sqrt(HBAR * abs(U0) * alpha ** 2 * site.curvature / params.atom.mass_kg)


def resonant_alpha(params: SystemParams, site: LatticeSite) -> float:
    '''Per-mode amplitude that tunes the trap frequency onto omega_m.'''
    if site.curvature <= 0:
        raise QSpringDomainError(
            f'trap curvature must be positive, got {site.curvature}.', 'site.curvature')
    U0 = params.atom.vacuum_rabi_rad_s ** 2 / params.atom.delta_rad_s
    return math.sqrt(params.atom.mass_kg * params.membrane.omega_m_rad_s ** 2 /
                     (HBAR * abs(U0) * site.curvature))


def resonant_power(params: SystemParams, site: LatticeSite) -> float:
    alpha = resonant_alpha(params, site)
    _, power = drive_amplitude(
        replace(params, drive=replace(params.drive, alpha=alpha,
                                      circulating_power_W=None)))
    return power


def choose_lattice_site(params: SystemParams, site_index: int=1, max_wells: int=8,
                        theta_min: float=0.9, xi_max: float=1.5) -> LatticeSite:
    '''Picks, among the best-ranked wells with acceptable geometry, the one
    whose trap frequency under the configured drive is closest to omega_m.'''
    k1, k2 = cavity_wavenumbers(params)
    wells = lattice_wells(k1 + k2, k1 - k2, site_index)[:max_wells]
    candidates = [w for w in wells if w.theta >= theta_min and w.xi <= xi_max]
    if not candidates:
        raise_warning(f'[WARN] No well of site {site_index} has theta >= {theta_min} '
                      f'and xi <= {xi_max}, using the best-ranked well.')
        candidates = wells[:1]
    alpha, _ = drive_amplitude(params)
    omega_m = params.membrane.omega_m_rad_s
    return min(candidates,
               key=lambda w: abs(trap_frequency(params, w, alpha) / omega_m - 1.0))


# ***********************************************************************
# MEMBRANE GEOMETRY
#
# ***********************************************************************


def membrane_geometry(r: float, k1: float, k2: float, x_m):
    '''Geometry factors f_i = 2 r sin(2 k_i x) / sqrt(1 - r^2 cos^2(2 k_i x)).'''
    if not (0.0 < r < 1.0):
        raise QSpringDomainError(f'must lie in (0, 1), got {r}.', 'r')
    x_m = np.asarray(x_m, dtype=np.float64)

    def _factor(k):
        phase = 2.0 * k * x_m
        return 2.0 * r * np.sin(phase) / np.sqrt(1.0 - (r * np.cos(phase)) ** 2)

    f1, f2 = _factor(k1), _factor(k2)
    if f1.ndim == 0:
        return float(f1), float(f2)
    return f1, f2


def choose_membrane_position(r: float, k1: float, k2: float, search_window: float,
                             points_per_period: int=64) -> Tuple[float, float, float]:
    '''Maximizes min(f1, f2) over membrane positions in [0, search_window]
    and returns (x_m, f1, f2).'''
    _require_positive(k1, 'k1')
    _require_positive(k2, 'k2')
    k_max, k_min = max(k1, k2), min(k1, k2)
    if not np.isfinite(search_window) or search_window < np.pi / k_min:
        raise QSpringDomainError(
            f'must span at least one optical period {np.pi / k_min:.6g} m, '
            f'got {search_window}.', 'search_window')

    # dense scan
    h = np.pi / k_max / points_per_period
    xs = np.linspace(0.0, search_window, int(np.ceil(search_window / h)) + 1)
    f1, f2 = membrane_geometry(r, k1, k2, xs)
    score = np.minimum(f1, f2)
    i = int(np.argmax(score))
    x_best, best = float(xs[i]), float(score[i])

    # local refinement in units of the faster fringe
    lo, hi = max(x_best - h, 0.0) * k_max, min(x_best + h, search_window) * k_max
    res = minimize_scalar(lambda s: -min(membrane_geometry(r, k1, k2, s / k_max)),
                          bounds=(lo, hi), method='bounded', options={'xatol': 1e-12})
    if res.success and -res.fun >= best:
        x_best = float(res.x / k_max)
    f1_best, f2_best = membrane_geometry(r, k1, k2, x_best)
    return x_best, f1_best, f2_best


def default_membrane_window(k1: float, k2: float) -> float:
    '''One beat period of the two fringe patterns, at least one optical period.'''
    period = np.pi / min(k1, k2)
    if k1 == k2:
        return 4.0 * period
    return max(np.pi / abs(k1 - k2), 2.0 * period)


# ***********************************************************************
# DERIVED RATES
#
# ***********************************************************************


def effective_coupling_G(g_atc: float, g_mc: float, Delta: float, omega_m: float,
                         kappa: float) -> float:
    '''Rate of the cavity-mediated coherent atom-membrane coupling.'''
    _require_positive(kappa, 'kappa')
    gg = g_atc * g_mc
    plus, minus = Delta + omega_m, Delta - omega_m
    return 2.0 * gg * plus / (kappa ** 2 + plus ** 2) \
        + 2.0 * gg * minus / (kappa ** 2 + minus ** 2)


def cavity_decoherence(g_atc: float, g_mc: float, Delta: float, omega_m: float,
                       kappa: float) -> Tuple[float, float, float]:
    '''Returns (Gamma_c+, Gamma_c-, phi) of the four cavity decoherence
    channels J+-, with tan(phi) = g_atc / g_mc.'''
    _require_positive(kappa, 'kappa')
    total = g_atc ** 2 + g_mc ** 2
    gamma_plus = 2.0 * kappa * total / (kappa ** 2 + (Delta + omega_m) ** 2)
    gamma_minus = 2.0 * kappa * total / (kappa ** 2 + (Delta - omega_m) ** 2)
    phi = math.atan2(abs(g_atc), abs(g_mc))
    return gamma_plus, gamma_minus, phi


def thermal_occupation(omega_m: float, temperature_K: float, bose: bool=False) -> float:
    '''Mean phonon number, k_B T / (hbar omega) or the exact Bose factor.'''
    if temperature_K == 0:
        return 0.0
    ratio = HBAR * omega_m / (KB * temperature_K)
    if bose:
        return 1.0 / math.expm1(ratio)
    return 1.0 / ratio


@dataclass(frozen=True)
class DerivedRates:
    kappa_rad_s: float
    cooperativity: float
    U0_rad_s: float
    eta: float
    l_at_m: float
    l_m_m: float
    alpha: float
    omega_at_rad_s: float
    g_atc_rad_s: float
    g_mc_rad_s: float
    f1: float
    f2: float
    x_m_m: float
    G_rad_s: float
    gamma_c_plus: float
    gamma_c_minus: float
    phi: float
    gamma_at: float
    gamma_m_natural: float
    n_bar: float
    Gamma_m: float
    P_c_W: float
    P_a_W: float
    delta_T_K: float
    k1: float
    k2: float
    omega1_rad_s: float
    x_at_m: float
    theta: float
    xi: float
    curvature: float
    mass_ratio: float
    alpha_resonant: float
    P_c_resonant_W: float
    params: SystemParams = field(repr=False, compare=False)

    def to_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'params'}


def derive_rates(params: SystemParams, site: LatticeSite, x_m: float) -> DerivedRates:
    '''Computes every derived rate of the coupled system at the given atom
    lattice site and membrane position.'''
    atom, cavity, membrane = params.atom, params.cavity, params.membrane
    if site.curvature <= 0:
        raise QSpringDomainError(
            f'trap curvature must be positive (imaginary trap frequency), '
            f'got {site.curvature}.', 'site.curvature')
    kappa, coop = kappa_and_cooperativity(params)
    k1, k2 = cavity_wavenumbers(params)
    omega1 = drive_frequency(params)
    alpha, power = drive_amplitude(params)
    f1, f2 = membrane_geometry(membrane.reflectivity, k1, k2, x_m)

    # zero-point extents and trap
    l_m = math.sqrt(HBAR / (2.0 * membrane.mass_kg * membrane.omega_m_rad_s))
    U0 = atom.vacuum_rabi_rad_s ** 2 / atom.delta_rad_s
    omega_at = trap_frequency(params, site, alpha)
    l_at = math.sqrt(HBAR / (2.0 * atom.mass_kg * omega_at))
    eta = k1 * l_at

    # linear couplings to the cavity fields and the mediated coupling
    g_atc = abs(U0) * alpha * eta * site.theta
    g_mc = (l_m / cavity.length_m) * omega1 * abs(f1) * alpha
    Delta, omega_m = cavity.detuning_rad_s, membrane.omega_m_rad_s
    G = effective_coupling_G(g_atc, g_mc, Delta, omega_m, kappa)
    gamma_plus, gamma_minus, phi = cavity_decoherence(g_atc, g_mc, Delta, omega_m, kappa)

    # atomic momentum diffusion and membrane heating
    gamma_at = atom.gamma_rad_s * (g_atc ** 2 / atom.vacuum_rabi_rad_s ** 2) * site.xi
    gamma_m = omega_m / membrane.quality
    n_bar = thermal_occupation(omega_m, membrane.temperature_K, params.bose_occupation)
    P_a = (TWO_PI / cavity.finesse) * power
    delta_T = P_a / (KB * membrane.kappa_th_hz)
    return DerivedRates(
        kappa_rad_s=kappa, cooperativity=coop, U0_rad_s=U0, eta=eta,
        l_at_m=l_at, l_m_m=l_m, alpha=alpha, omega_at_rad_s=omega_at,
        g_atc_rad_s=g_atc, g_mc_rad_s=g_mc, f1=f1, f2=f2, x_m_m=float(x_m),
        G_rad_s=G, gamma_c_plus=gamma_plus, gamma_c_minus=gamma_minus, phi=phi,
        gamma_at=gamma_at, gamma_m_natural=gamma_m, n_bar=n_bar,
        Gamma_m=gamma_m * n_bar, P_c_W=power, P_a_W=P_a, delta_T_K=delta_T,
        k1=k1, k2=k2, omega1_rad_s=omega1, x_at_m=site.x_at_m,
        theta=site.theta, xi=site.xi, curvature=site.curvature,
        mass_ratio=atom.mass_kg / membrane.mass_kg,
        alpha_resonant=resonant_alpha(params, site),
        P_c_resonant_W=resonant_power(params, site),
        params=params)


# ***********************************************************************
# CONDITION LEDGER
#
# ***********************************************************************


DEFAULT_THRESHOLDS = {
    'delta_over_kappa': 10.0,
    'delta_over_omega_m': 10.0,
    'balance': 0.2,
    'coop_margin': 10.0,
    'thermal_margin': 1.0,
    'G_over_gamma_c_plus': 5.0,
    'G_over_gamma_c_minus': 5.0,
    'G_over_gamma_at': 5.0,
    'G_over_gamma_m': 5.0
}

COUPLING_CHECKS = ('G_over_gamma_c_plus', 'G_over_gamma_c_minus',
                   'G_over_gamma_at', 'G_over_gamma_m')


@dataclass(frozen=True)
class ConditionCheck:
    ratio: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ConditionReport:
    ratios: Dict[str, float]
    checks: Dict[str, ConditionCheck]
    thresholds: Dict[str, float]
    regime: str

    def to_dict(self) -> Dict[str, Any]:
        return {'ratios': dict(self.ratios),
                'checks': {name: asdict(check) for (name, check) in self.checks.items()},
                'thresholds': dict(self.thresholds),
                'regime': self.regime}


def _safe_ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return math.inf
    return numerator / denominator


def check_conditions(rates: DerivedRates,
                     thresholds: Optional[Mapping[str, float]]=None) -> ConditionReport:
    '''Evaluates the strong-coupling conditions as dimensionless ratios.

    The balance check compares min(b, 1/b) of the coupling balance b with its
    threshold, every other check compares the ratio itself.
    '''
    merged = dict(DEFAULT_THRESHOLDS)
    for (name, value) in (thresholds or {}).items():
        if name not in merged:
            raise QSpringConfigError(f'unknown threshold, expected one of '
                                     f'{sorted(merged)}.', f'Thresholds.{name}')
        merged[name] = float(value)

    params = rates.params
    atom, cavity, membrane = params.atom, params.cavity, params.membrane
    r, F = membrane.reflectivity, cavity.finesse
    Delta, kappa = cavity.detuning_rad_s, rates.kappa_rad_s
    balance = (4.0 * r / np.pi) * (abs(atom.delta_rad_s) / atom.gamma_rad_s) \
        * (F / rates.cooperativity) * math.sqrt(rates.mass_ratio)
    heating = (8.0 * r ** 2 / np.pi ** 2) \
        * (membrane.kappa_th_hz / rates.gamma_m_natural) \
        * (HBAR * rates.omega1_rad_s / (membrane.mass_kg * C_LIGHT ** 2)) * F ** 2
    G = abs(rates.G_rad_s)
    ratios = {
        'delta_over_kappa': Delta / kappa,
        'delta_over_omega_m': Delta / membrane.omega_m_rad_s,
        'balance': balance,
        'coop_margin': 4.0 * kappa * rates.cooperativity / Delta,
        'absorption_heating': heating,
        'thermal_margin': heating / (Delta / kappa),
        'G_over_gamma_c_plus': _safe_ratio(G, rates.gamma_c_plus),
        'G_over_gamma_c_minus': _safe_ratio(G, rates.gamma_c_minus),
        'G_over_gamma_at': _safe_ratio(G, rates.gamma_at),
        'G_over_gamma_m': _safe_ratio(G, rates.Gamma_m)
    }
    checks = {}
    for (name, threshold) in merged.items():
        value = ratios[name]
        if name == 'balance':
            value = min(value, 1.0 / value) if value > 0 else 0.0
        checks[name] = ConditionCheck(ratio=value, threshold=threshold,
                                      passed=bool(value >= threshold))
    strong = all(checks[name].passed for name in COUPLING_CHECKS)
    return ConditionReport(ratios=ratios, checks=checks, thresholds=merged,
                           regime='strong' if strong else 'weak')


def thermal_link_scaling(d: float, d_ref: float, l: float, l_ref: float,
                         l1_ref: float, w0: float) -> float:
    '''Scales a measured thermal link to a new membrane thickness and size,
    kappa_th / kappa_th' = (d / d') ln(l' / l1') / ln(l / (2 w0)).'''
    for (name, value) in (('d', d), ('d_ref', d_ref), ('l', l), ('l_ref', l_ref),
                          ('l1_ref', l1_ref), ('w0', w0)):
        _require_positive(value, name)
    if l_ref / l1_ref <= 1:
        raise QSpringDomainError('l_ref must exceed l1_ref.', 'l_ref')
    if l / (2.0 * w0) <= 1:
        raise QSpringDomainError('membrane side must exceed the beam diameter 2 w0.', 'l')
    return (d / d_ref) * math.log(l_ref / l1_ref) / math.log(l / (2.0 * w0))


# ***********************************************************************
# PRESET
#
# ***********************************************************************


def example_preset() -> SystemParams:
    '''A single Cs atom and a 0.4 ng SiN membrane in a 50 um, F = 2e5 cavity
    driven with 850 uW at 852 nm and 894 nm, precooled to the absorption floor.'''
    finesse, length = 2e5, 50e-6
    gamma = TWO_PI * 2.61e6
    kappa = np.pi * C_LIGHT / (2.0 * finesse * length)
    power = 850e-6
    kappa_th = 10e-9 / KB
    temperature = (TWO_PI / finesse) * power / (KB * kappa_th)
    return SystemParams(
        atom=AtomParams(mass_kg=2.207e-25,
                        gamma_rad_s=gamma,
                        lambda1_m=852e-9,
                        lambda2_m=894e-9,
                        delta_rad_s=-450.0 * gamma,
                        vacuum_rabi_rad_s=math.sqrt(140.0 * kappa * gamma)),
        cavity=CavityParams(length_m=length,
                            finesse=finesse,
                            waist_m=10e-6,
                            detuning_rad_s=18.0 * kappa,
                            mode_index_offset=5),
        membrane=MembraneParams(mass_kg=0.4e-12,
                                omega_m_rad_s=TWO_PI * 1.3e6,
                                quality=1e7,
                                reflectivity=0.45,
                                temperature_K=temperature,
                                kappa_th_hz=kappa_th,
                                side_m=100e-6,
                                thickness_m=50e-9),
        drive=DriveParams(circulating_power_W=power))


def summarize_rates(rates: DerivedRates, report: ConditionReport) -> str:
    checks = '\n'.join(
        f'    {name:<21}={check.ratio:12.6g} (>= {check.threshold:g}) '
        f'{"pass" if check.passed else "FAIL"}'
        for (name, check) in report.checks.items())
    return (f'geometry:\n'
            f'    x_at [um]            ={rates.x_at_m * 1e6:.6f}\n'
            f'    theta, xi            ={rates.theta:.4f}, {rates.xi:.4f}\n'
            f'    curvature / k^2      ={rates.curvature / (rates.k1 + rates.k2) ** 2:.4f}\n'
            f'    x_m [um], f1, f2     ={rates.x_m_m * 1e6:.6f}, '
            f'{rates.f1:.4f}, {rates.f2:.4f}\n'
            f'rates [2 pi kHz]:\n'
            f'    kappa                ={rates.kappa_rad_s / TWO_PI / 1e3:.6g}\n'
            f'    omega_at, omega_m    ={rates.omega_at_rad_s / TWO_PI / 1e3:.6g}, '
            f'{rates.params.membrane.omega_m_rad_s / TWO_PI / 1e3:.6g}\n'
            f'    g_atc, g_mc          ={rates.g_atc_rad_s / TWO_PI / 1e3:.6g}, '
            f'{rates.g_mc_rad_s / TWO_PI / 1e3:.6g}\n'
            f'    G                    ={rates.G_rad_s / TWO_PI / 1e3:.6g}\n'
            f'    Gamma_c+, Gamma_c-   ={rates.gamma_c_plus / TWO_PI / 1e3:.6g}, '
            f'{rates.gamma_c_minus / TWO_PI / 1e3:.6g}\n'
            f'    Gamma_at, Gamma_m    ={rates.gamma_at / TWO_PI / 1e3:.6g}, '
            f'{rates.Gamma_m / TWO_PI / 1e3:.6g}\n'
            f'power chain:\n'
            f'    alpha, C             ={rates.alpha:.6g}, {rates.cooperativity:.6g}\n'
            f'    P_c [uW], P_a [nW]   ={rates.P_c_W * 1e6:.6g}, {rates.P_a_W * 1e9:.6g}\n'
            f'    delta_T [K]          ={rates.delta_T_K:.6g}\n'
            f'    P_c at resonance [uW]={rates.P_c_resonant_W * 1e6:.6g}\n'
            f'conditions (regime={report.regime}):\n'
            f'{checks}\n')
