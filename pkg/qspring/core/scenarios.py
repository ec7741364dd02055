# ***********************************************************************
# QSPRING SCENARIOS
#
# - run settings (.cfg) with shipped defaults
# - the worked-example ledger at the preset parameters
# - the squeezed-state swap between atom and membrane and its loss sweep
# - the adiabatic-elimination check of the effective model
# - the Gaussian vs Fock oracle comparison
#
# ***********************************************************************


from ast import literal_eval
import configparser
import csv
from dataclasses import asdict, dataclass, field
import datetime
import math
from multiprocessing.pool import ThreadPool
import os
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from tqdm import tqdm

from qspring.core.exception import (
    print_message,
    QSpringConfigError,
    QSpringDomainError,
    QSpringInstabilityError
)
from qspring.core.emit import format_float
from qspring.core import fock
from qspring.core import gaussian
from qspring.core.gaussian import (
    GaussianState,
    Trajectory,
    make_state,
    squeezed,
    thermal,
    vacuum
)
from qspring.core.model import (
    QuadraticModel,
    build_effective_model,
    build_full_model,
    stability
)
from qspring.core import physics
from qspring.core.physics import (
    ConditionReport,
    DerivedRates,
    LatticeSite,
    SystemParams
)

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    'examples', 'configs', 'default.cfg')

LABELS = ('atom', 'membrane')
FULL_LABELS = ('atom', 'membrane', 'cav1', 'cav2')


# ***********************************************************************
# CONFIG FILE MANAGEMENT
#
# - read config files from file path or string
# - merge them over the shipped defaults
#
# ***********************************************************************


def _literal_sections(config: configparser.RawConfigParser) -> Dict[str, Dict[str, Any]]:
    args = {}
    for section in config.sections():
        args[section] = {}
        for (key, value) in config.items(section):
            try:
                args[section][key] = literal_eval(value)
            except (ValueError, SyntaxError) as error:
                raise QSpringConfigError(f'cannot parse value {value!r}: {error}.',
                                         f'{section}.{key}') from None
    return args


def _parse_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    if not os.path.isfile(path):
        raise FileNotFoundError(f'File {path} does not exist.')
    config = configparser.RawConfigParser()
    config.optionxform = str
    try:
        config.read(path)
    except configparser.Error as error:
        raise QSpringConfigError(str(error), path) from None
    return _literal_sections(config)


def _parse_config_string(value: str) -> Dict[str, Dict[str, Any]]:
    config = configparser.RawConfigParser()
    config.optionxform = str
    try:
        config.read_string(value)
    except configparser.Error as error:
        raise QSpringConfigError(str(error), 'config') from None
    return _literal_sections(config)


def default_config() -> Dict[str, Dict[str, Any]]:
    return _parse_config_file(DEFAULT_CONFIG_PATH)


def _merge_config(args: Dict[str, Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    merged = default_config()
    for (section, values) in args.items():
        if section not in merged:
            raise QSpringConfigError(
                f'unknown section, expected one of {sorted(merged)}.', section)
        for (key, value) in values.items():
            if key not in merged[section]:
                raise QSpringConfigError(
                    f'unknown key, expected one of {sorted(merged[section])}.',
                    f'{section}.{key}')
            merged[section][key] = value
    return merged


def load_config(path: Optional[str]=None) -> Dict[str, Dict[str, Any]]:
    '''Loads run settings from a .cfg file over the shipped defaults.'''
    if path is None:
        return default_config()
    return _merge_config(_parse_config_file(path))


def load_config_from_string(value: str) -> Dict[str, Dict[str, Any]]:
    '''Loads run settings from the contents of a .cfg file.'''
    return _merge_config(_parse_config_string(value))


def _section(config: Optional[Dict[str, Dict[str, Any]]], name: str) -> Dict[str, Any]:
    if config is None:
        config = default_config()
    return dict(config[name])


# ***********************************************************************
# WORKED EXAMPLE LEDGER
#
# ***********************************************************************


# values printed with the worked example, with the comparison used for each
PRINTED_VALUES = {
    'delta_over_kappa': (18.0, 'echo'),
    'cooperativity': (140.0, 'echo'),
    'mass_ratio': (6e-13, 'approx'),
    'absorption_heating': (45.0, 'approx'),
    'P_c_uW': (850.0, 'echo'),
    'delta_T_K': (2.5, 'upper bound'),
    'G_over_2pi_kHz': (45.0, 'approx'),
    'decoherence_over_G': (0.1, 'approx')
}


@dataclass(frozen=True)
class LedgerResult:
    params: SystemParams
    site: LatticeSite
    rates: DerivedRates
    report: ConditionReport
    printed: Dict[str, Any]
    gaps: Dict[str, Any]
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'params': physics.params_to_dict(self.params),
                'site': asdict(self.site),
                'rates': self.rates.to_dict(),
                'report': self.report.to_dict(),
                'printed': self.printed,
                'gaps': self.gaps,
                'config': self.config}


def _ledger_values(rates: DerivedRates, report: ConditionReport) -> Dict[str, float]:
    G = abs(rates.G_rad_s)
    worst = max(rates.gamma_c_plus, rates.gamma_c_minus, rates.gamma_at, rates.Gamma_m)
    return {
        'delta_over_kappa': report.ratios['delta_over_kappa'],
        'cooperativity': rates.cooperativity,
        'mass_ratio': rates.mass_ratio,
        'absorption_heating': report.ratios['absorption_heating'],
        'P_c_uW': rates.P_c_W * 1e6,
        'delta_T_K': rates.delta_T_K,
        'G_over_2pi_kHz': G / physics.TWO_PI / 1e3,
        'decoherence_over_G': worst / G if G > 0 else math.inf
    }


def run_example_ledger(config: Optional[Dict[str, Dict[str, Any]]]=None,
                       params: Optional[SystemParams]=None,
                       verbose: bool=False) -> LedgerResult:
    '''Derives every rate of the worked example and evaluates the
    strong-coupling ledger, annotated with the printed values.

    :param config: run settings (Geometry and Thresholds sections are used)
    :param params: physical parameters, the preset when omitted
    :param verbose: print the ledger summary
    '''
    if params is None:
        params = physics.example_preset()
    geometry = _section(config, 'Geometry')
    thresholds = _section(config, 'Thresholds')

    site = physics.choose_lattice_site(
        params, site_index=geometry['site_index'], max_wells=geometry['max_wells'],
        theta_min=geometry['theta_min'], xi_max=geometry['xi_max'])
    k1, k2 = physics.cavity_wavenumbers(params)
    window = geometry['membrane_window_m']
    if window is None:
        window = physics.default_membrane_window(k1, k2)
    x_m, _, _ = physics.choose_membrane_position(
        params.membrane.reflectivity, k1, k2, window,
        points_per_period=geometry['points_per_period'])
    rates = physics.derive_rates(params, site, x_m)
    report = physics.check_conditions(rates, thresholds)

    values = _ledger_values(rates, report)
    printed = {name: {'printed': printed, 'comparison': kind, 'value': values[name]}
             for (name, (printed, kind)) in PRINTED_VALUES.items()}
    G_kHz = values['G_over_2pi_kHz']
    gaps = {
        'G_over_2pi_kHz': {
            'value': G_kHz,
            'printed': PRINTED_VALUES['G_over_2pi_kHz'][0],
            'ratio': G_kHz / PRINTED_VALUES['G_over_2pi_kHz'][0],
            'geometry_factors': {
                'theta': rates.theta,
                'xi': rates.xi,
                'curvature_over_k2': rates.curvature / (rates.k1 + rates.k2) ** 2,
                'f1': rates.f1,
                'f2': rates.f2,
                'omega_at_over_omega_m':
                    rates.omega_at_rad_s / params.membrane.omega_m_rad_s
            },
            'note': 'the printed coupling depends on unstated trap geometry; '
                    'the solved site and membrane position are used here'
        },
        'decoherence_over_G': {
            'value': values['decoherence_over_G'],
            'printed': PRINTED_VALUES['decoherence_over_G'][0],
            'ratios': {name: report.ratios[name] for name in physics.COUPLING_CHECKS}
        },
        'regime': {
            'value': report.regime,
            'printed': 'strong',
            'failing': [name for (name, check) in report.checks.items()
                        if name in physics.COUPLING_CHECKS and not check.passed],
            'drive': 'split' if params.drive.split_power else 'full power per mode',
            'note': 'coupling checks in failing miss their thresholds with the '
                    'derived rates'
        },
        'absorption_heating': {
            'value': values['absorption_heating'],
            'printed': PRINTED_VALUES['absorption_heating'][0],
            'ratio': values['absorption_heating'] / PRINTED_VALUES['absorption_heating'][0]
        }
    }
    result = LedgerResult(params=params, site=site, rates=rates, report=report,
                          printed=printed, gaps=gaps,
                          config={'Geometry': geometry, 'Thresholds': thresholds})
    if verbose:
        print(summarize_ledger(result))
    return result


def summarize_ledger(result: LedgerResult) -> str:
    lines = [f'    {name:<21}={entry["value"]:12.6g} (printed {entry["printed"]:g}, '
             f'{entry["comparison"]})'
             for (name, entry) in result.printed.items()]
    regime = result.gaps['regime']
    failing = ', '.join(regime['failing']) or 'none'
    return (physics.summarize_rates(result.rates, result.report) +
            'printed values:\n' + '\n'.join(lines) + '\n' +
            f'gaps:\n'
            f'    regime               ={regime["value"]} (printed {regime["printed"]}, '
            f'drive {regime["drive"]})\n'
            f'    failing checks       ={failing}\n')


# ***********************************************************************
# ATOM-MEMBRANE SWAP
#
# - effective model in units of G, resonant atom and membrane
# - squeezing of the membrane and swap fidelity against the initial atom
#
# ***********************************************************************


LOSS_ASSIGNMENTS = ('symmetric', 'thermal', 'cavity-only', 'atom-only',
                    'membrane-only', 'preset')


def swap_losses(gamma: float, assignment: str='symmetric',
                bath_nbar: float=5.0) -> Dict[str, Any]:
    '''Channel rates for a single loss rate gamma (in units of G).

    symmetric: Gamma_c+ = Gamma_c- = Gamma_at = gamma, membrane bath rates
    down = up = gamma, phi = pi/4. thermal: as symmetric but the membrane bath
    at occupation bath_nbar with gamma_m = gamma/bath_nbar. The *-only
    assignments keep one channel.
    '''
    if not np.isfinite(gamma) or gamma < 0:
        raise QSpringDomainError(f'must be non-negative, got {gamma}.', 'gamma_over_G')
    if assignment not in LOSS_ASSIGNMENTS or assignment == 'preset':
        raise QSpringDomainError(
            f'expected one of {LOSS_ASSIGNMENTS[:-1]}, got {assignment}.', 'assignment')
    cavity = atom = 0.0
    bath = (0.0, 0.0)
    if assignment in ('symmetric', 'thermal', 'cavity-only'):
        cavity = gamma
    if assignment in ('symmetric', 'thermal', 'atom-only'):
        atom = gamma
    if assignment in ('symmetric', 'membrane-only'):
        bath = (gamma, gamma)
    elif assignment == 'thermal':
        if bath_nbar <= 0:
            raise QSpringDomainError(f'must be positive, got {bath_nbar}.', 'bath_nbar')
        gamma_m = gamma / bath_nbar
        bath = (gamma_m * (bath_nbar + 1.0), gamma_m * bath_nbar)
    return {'gamma_c_plus': cavity, 'gamma_c_minus': cavity, 'gamma_at': atom,
            'phi': math.pi / 4.0, 'thermal_rates': bath}


def preset_losses(rates: DerivedRates) -> Dict[str, Any]:
    '''Channel rates of derived SI rates, normalized by G.'''
    G = abs(rates.G_rad_s)
    if G == 0:
        raise QSpringDomainError('effective coupling vanishes.', 'rates.G_rad_s')
    gamma_m = rates.gamma_m_natural
    return {'gamma_c_plus': rates.gamma_c_plus / G,
            'gamma_c_minus': rates.gamma_c_minus / G,
            'gamma_at': rates.gamma_at / G,
            'phi': rates.phi,
            'thermal_rates': (gamma_m * (rates.n_bar + 1.0) / G, gamma_m * rates.n_bar / G),
            'omega_over_G': rates.params.membrane.omega_m_rad_s / G}


def transfer_model(gamma_over_G: float, omega_over_G: float=50.0,
                   assignment: str='symmetric', bath_nbar: float=5.0,
                   rates: Optional[DerivedRates]=None) -> QuadraticModel:
    '''Resonant effective model in units of G.'''
    if assignment == 'preset':
        if rates is None:
            rates = run_example_ledger().rates
        losses = preset_losses(rates)
        omega_over_G = losses.pop('omega_over_G')
    else:
        losses = swap_losses(gamma_over_G, assignment, bath_nbar)
    return build_effective_model(
        1.0, omega_over_G, omega_over_G, losses['gamma_c_plus'], losses['gamma_c_minus'],
        losses['phi'], losses['gamma_at'], 0.0, 0.0, thermal_rates=losses['thermal_rates'])


@dataclass(frozen=True, eq=False)
class TransferResult:
    times: np.ndarray
    membrane_squeezing_db: np.ndarray
    membrane_raw_db: np.ndarray
    atom_squeezing_db: np.ndarray
    rotation_optimized: bool
    max_transferred_db: float
    t_at_max: float
    swap_fidelity_at_half_pi: float
    swap_fidelity_raw: float
    swap_rotation: float
    config: Dict[str, Any]
    trajectory: Trajectory

    def to_dict(self) -> Dict[str, Any]:
        return {'times': self.times,
                'membrane_squeezing_db': self.membrane_squeezing_db,
                'membrane_raw_db': self.membrane_raw_db,
                'atom_squeezing_db': self.atom_squeezing_db,
                'rotation_optimized': self.rotation_optimized,
                'max_transferred_db': self.max_transferred_db,
                't_at_max': self.t_at_max,
                'swap_fidelity_at_half_pi': self.swap_fidelity_at_half_pi,
                'swap_fidelity_raw': self.swap_fidelity_raw,
                'swap_rotation': self.swap_rotation,
                'step': self.trajectory.dt,
                'halvings': self.trajectory.halvings,
                'config': self.config}

    def to_rows(self) -> List[List[Any]]:
        rows = [['time', 'membrane_squeezing_db', 'membrane_raw_db', 'atom_squeezing_db']]
        for row in zip(self.times, self.membrane_squeezing_db,
                       self.membrane_raw_db, self.atom_squeezing_db):
            rows.append([float(value) for value in row])
        return rows


def _best_rotation(state: GaussianState, target: GaussianState,
                   points: int) -> Tuple[float, float]:
    '''Maximizes the fidelity of the rotated membrane against the target over
    the rotation angle; returns (fidelity, angle).'''

    def _fid(angle):
        return gaussian.fidelity(gaussian.rotate(state, 'membrane', angle), target, 0)

    angles = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    values = [_fid(angle) for angle in angles]
    i = int(np.argmax(values))
    step = angles[1] - angles[0]
    res = minimize_scalar(lambda angle: -_fid(angle),
                          bounds=(angles[i] - step, angles[i] + step), method='bounded',
                          options={'xatol': 1e-10})
    if res.success and -res.fun >= values[i]:
        return float(-res.fun), float(res.x % (2.0 * math.pi))
    return float(values[i]), float(angles[i])


def _swap_summary(traj: Trajectory, omega: float, atom0: GaussianState,
                  rotation_points: int) -> Dict[str, Any]:
    '''Membrane squeezing along a swap trajectory and the fidelities at
    G t = pi/2.'''
    membrane_db = gaussian.squeezing_series_db(traj, 'membrane')
    i_max = int(np.argmax(membrane_db))
    i_swap = int(np.argmin(np.abs(traj.times - math.pi / 2)))
    lab = gaussian.reduce(traj.state(i_swap), ['membrane'])
    swap_fid, swap_rotation = _best_rotation(lab, atom0, rotation_points)
    frame = gaussian.rotate(lab, 'membrane', -omega * traj.times[i_swap])
    raw_fid = gaussian.fidelity(frame, gaussian.rotate(atom0, 0, math.pi / 2), 0)
    return {'membrane_db': membrane_db,
            'max_transferred_db': float(membrane_db[i_max]),
            't_at_max': float(traj.times[i_max]),
            'swap_fidelity_at_half_pi': swap_fid,
            'swap_fidelity_raw': raw_fid,
            'swap_rotation': swap_rotation}


def transfer_experiment(gamma_over_G: float=0.1,
                        init_squeeze_db: float=9.0,
                        init_nbar: float=5.0,
                        t_max: float=math.pi,
                        samples: int=401,
                        omega_over_G: float=50.0,
                        assignment: str='symmetric',
                        bath_nbar: float=5.0,
                        rates: Optional[DerivedRates]=None,
                        tol: float=1e-8,
                        max_halvings: int=8,
                        rotation_points: int=181,
                        verbose: bool=False) -> TransferResult:
    '''Swap of a squeezed atom into a thermal membrane under the effective
    model, times in units of 1/G.

    Membrane squeezing is reported for its best quadrature and, as the raw
    value, for the fixed rotating-frame quadrature that carries the atom's
    squeezed quadrature after the quarter turn of the swap.
    '''
    if t_max < math.pi / 2:
        raise QSpringDomainError(f'must cover G t = pi/2, got {t_max}.', 't_max')
    model = transfer_model(gamma_over_G, omega_over_G, assignment, bath_nbar, rates)
    omega = float(model.H_matrix[0, 0])
    atom0 = squeezed(init_squeeze_db)
    state = make_state(atom0, thermal(init_nbar), labels=LABELS)
    traj = gaussian.evolve(model, state, t_max, samples=samples, tol=tol,
                           max_halvings=max_halvings, verbose=verbose)
    summary = _swap_summary(traj, omega, atom0, rotation_points)

    # the rotating frame quadrature at pi/2 is X sin(omega t) + P cos(omega t) in the lab
    raw_db = gaussian.squeezing_series_db(traj, 'membrane', math.pi / 2 - omega * traj.times)
    atom_db = gaussian.squeezing_series_db(traj, 'atom')

    config = {'gamma_over_G': gamma_over_G, 'init_squeeze_db': init_squeeze_db,
              'init_nbar': init_nbar, 't_max': t_max, 'samples': samples,
              'omega_over_G': omega, 'assignment': assignment, 'bath_nbar': bath_nbar,
              'tol': tol, 'max_halvings': max_halvings}
    return TransferResult(
        times=traj.times, membrane_squeezing_db=summary['membrane_db'],
        membrane_raw_db=raw_db, atom_squeezing_db=atom_db,
        rotation_optimized=True, max_transferred_db=summary['max_transferred_db'],
        t_at_max=summary['t_at_max'],
        swap_fidelity_at_half_pi=summary['swap_fidelity_at_half_pi'],
        swap_fidelity_raw=summary['swap_fidelity_raw'],
        swap_rotation=summary['swap_rotation'],
        config=config, trajectory=traj)


def summarize_transfer(result: TransferResult) -> str:
    return (f'swap summary:\n'
            f'    max_transferred_db   ={result.max_transferred_db:.6g}\n'
            f'    t_at_max [1/G]       ={result.t_at_max:.6g}\n'
            f'    fidelity at pi/2     ={result.swap_fidelity_at_half_pi:.6g} '
            f'(rotation {result.swap_rotation:.4f})\n'
            f'    raw fidelity at pi/2 ={result.swap_fidelity_raw:.6g}\n'
            f'    step, halvings       ={result.trajectory.dt:.4g}, '
            f'{result.trajectory.halvings}\n')


def rwa_swap_reference(init_squeeze_db: float, init_nbar: float,
                       times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    '''Lossless rotating-wave swap: the membrane covariance in the rotating
    frame is cos^2(Gt) sigma_m + sin^2(Gt) R sigma_at R^T, R a quarter turn.
    Returns the covariances and their squeezing in dB.'''
    atom = gaussian.rotate(squeezed(init_squeeze_db), 0, math.pi / 2).cov
    membrane = thermal(init_nbar).cov
    times = np.asarray(times, dtype=np.float64)
    covs = (np.cos(times) ** 2)[:, None, None] * membrane \
        + (np.sin(times) ** 2)[:, None, None] * atom
    db = np.array([gaussian.squeezing_db(GaussianState(np.zeros(2), cov, ('membrane',)), 0)
                   for cov in covs])
    return covs, db


def swap_wigner_panels(result: TransferResult, grid) -> Dict[str, np.ndarray]:
    '''Wigner functions of atom and membrane at t = 0 and at G t = pi/2 on a
    square grid (the same 1-D grid for both quadratures).'''
    grid = np.asarray(grid, dtype=np.float64)
    i_swap = int(np.argmin(np.abs(result.times - math.pi / 2)))
    panels = {'x': grid, 'p': grid}
    for (tag, i) in (('t0', 0), ('swap', i_swap)):
        state = result.trajectory.state(i)
        for mode in LABELS:
            panels[f'{mode}_{tag}'] = gaussian.wigner(state, mode, grid, grid)
    return panels


# ***********************************************************************
# LOSS SWEEP
#
# ***********************************************************************


@dataclass(frozen=True)
class SweepTable:
    rows: Dict[Tuple[float, float], Dict[str, float]]
    init_nbar: float
    omega_over_G: float
    assignment: str

    def gammas(self) -> List[float]:
        return sorted({key[0] for key in self.rows})

    def squeezings(self) -> List[float]:
        return sorted({key[1] for key in self.rows})

    def column(self, squeeze_db: float) -> List[float]:
        return [self.rows[(gamma, squeeze_db)]['max_transferred_db']
                for gamma in self.gammas()]

    def to_rows(self) -> List[List[Any]]:
        rows = [['gamma_over_G', 'squeeze_db', 'max_transferred_db', 't_at_max',
                 'swap_fidelity_at_half_pi']]
        for key in sorted(self.rows):
            row = self.rows[key]
            rows.append([float(key[0]), float(key[1]), row['max_transferred_db'],
                         row['t_at_max'], row['swap_fidelity_at_half_pi']])
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {'init_nbar': self.init_nbar,
                'omega_over_G': self.omega_over_G,
                'assignment': self.assignment,
                'rows': [dict(zip(self.to_rows()[0], row)) for row in self.to_rows()[1:]]}


def _sweep_job(key: Tuple[float, float], traj: Trajectory, omega: float,
               rotation_points: int):
    summary = _swap_summary(traj, omega, squeezed(key[1]), rotation_points)
    return key, {name: summary[name] for name in
                 ('max_transferred_db', 't_at_max', 'swap_fidelity_at_half_pi')}


def sweep_workers(jobs: int, workers: Optional[int]=None) -> int:
    '''Worker count capped by QSPRING_THREADS, the CPU count and the jobs.'''
    limit = workers or os.cpu_count() or 1
    env = os.environ.get('QSPRING_THREADS')
    if env:
        try:
            limit = min(limit, int(env))
        except ValueError:
            raise QSpringConfigError(f'must be an integer, got {env!r}.',
                                     'QSPRING_THREADS') from None
    return max(1, min(limit, jobs))


def transfer_sweep(gamma_over_G: Optional[Sequence[float]]=None,
                   init_squeeze_db: Sequence[float]=(3.0, 6.0, 9.0),
                   init_nbar: float=5.0,
                   omega_over_G: float=50.0,
                   t_max: float=math.pi,
                   samples: int=401,
                   assignment: str='symmetric',
                   bath_nbar: float=5.0,
                   tol: float=1e-8,
                   max_halvings: int=8,
                   rotation_points: int=181,
                   workers: Optional[int]=None,
                   csv_path: Optional[str]=None,
                   poll_frequency: float=0.05,
                   verbose: bool=False) -> SweepTable:
    '''Maximum transferred squeezing over a grid of loss rates and initial
    squeezings.

    All grid points are integrated together by gaussian.evolve_batch on a
    shared step; the per-row summaries run on a thread pool.

    :param gamma_over_G: loss rates, default 26 points in [0, 0.5]
    :param init_squeeze_db: initial atomic squeezings
    :param workers: pool size (also capped by QSPRING_THREADS)
    :param csv_path: optional CSV output of the table
    :param poll_frequency: seconds between checks of the pool
    '''
    if gamma_over_G is None:
        gamma_over_G = np.linspace(0.0, 0.5, 26)
    gammas = [float(gamma) for gamma in gamma_over_G]
    for gamma in gammas:
        if not np.isfinite(gamma) or gamma < 0:
            raise QSpringDomainError(f'must be non-negative, got {gamma}.', 'gamma_over_G')
    if t_max < math.pi / 2:
        raise QSpringDomainError(f'must cover G t = pi/2, got {t_max}.', 't_max')
    jobs = [(gamma, float(db)) for db in init_squeeze_db for gamma in gammas]
    if not jobs:
        raise QSpringDomainError('empty sweep grid.', 'init_squeeze_db')
    num_workers = sweep_workers(len(jobs), workers)

    start_time = time.time()
    if verbose:
        print('\n' + '*' * 80 +
              f'\n[{datetime.timedelta(seconds=0)}] ' +
              f'Starting sweep of {len(jobs)} rows on {num_workers} workers' +
              '\n' + '*' * 80)
    rates = run_example_ledger().rates if assignment == 'preset' else None
    models = [transfer_model(gamma, omega_over_G, assignment, bath_nbar, rates)
              for (gamma, _) in jobs]
    states = [make_state(squeezed(db), thermal(init_nbar), labels=LABELS)
              for (_, db) in jobs]
    trajectories = gaussian.evolve_batch(models, states, t_max, samples=samples, tol=tol,
                                         max_halvings=max_halvings, verbose=verbose)
    omega = float(models[0].H_matrix[0, 0])

    rows = {}
    progress = tqdm(total=len(jobs), disable=not verbose, desc='sweep')
    with ThreadPool(processes=num_workers) as pool:
        results = [pool.apply_async(_sweep_job, (key, traj, omega, rotation_points))
                   for (key, traj) in zip(jobs, trajectories)]

        # wait for all workers to complete
        while results:
            time.sleep(poll_frequency)
            jobs_done = [i for (i, candidate) in enumerate(results) if candidate.ready()]
            for i in jobs_done[::-1]:
                key, row = results.pop(i).get()
                rows[key] = row
                progress.update(1)
    progress.close()

    table = SweepTable(rows=rows, init_nbar=init_nbar, omega_over_G=omega_over_G,
                       assignment=assignment)
    if csv_path is not None:
        with open(csv_path, 'w', newline='') as file:
            writer = csv.writer(file, lineterminator='\n')
            writer.writerows([[format_float(v) if isinstance(v, float) else v
                               for v in row] for row in table.to_rows()])
    elapsed = time.time() - start_time
    print_message(f'[INFO] sweep finished in {datetime.timedelta(seconds=elapsed)}.',
                  verbose=verbose)
    return table


# ***********************************************************************
# ADIABATIC ELIMINATION CHECK
#
# ***********************************************************************


@dataclass(frozen=True)
class AdiabaticRow:
    ratio: float
    G: float
    discrepancy: float
    stable: bool
    message: str
    max_growth: float = 0.0
    dt: float = math.nan


def _adiabatic_row(ratio: float, kappa_over_delta: float, g: float, omega: float,
                   squeeze_db: float, nbar: float, samples: int, tol: float,
                   max_halvings: int) -> AdiabaticRow:
    Delta = ratio * (g if g > 0 else 1.0)
    kappa = kappa_over_delta * Delta
    full = build_full_model(omega, omega, Delta, kappa, g, g, 0.0, 0.0, 0.0)
    G = physics.effective_coupling_G(g, g, Delta, omega, kappa)
    gamma_plus, gamma_minus, phi = physics.cavity_decoherence(g, g, Delta, omega, kappa)

    # the printed full-model signs mediate +G, the effective model takes -G
    effective = build_effective_model(-G, omega, omega, gamma_plus, gamma_minus, phi,
                                      0.0, 0.0, 0.0)
    growth, _ = stability(full)
    state = make_state(squeezed(squeeze_db), thermal(nbar), vacuum(), vacuum(),
                       labels=FULL_LABELS)
    t_final = math.pi / G if G > 0 else math.pi / omega
    try:
        full_traj = gaussian.evolve(full, state, t_final, samples=samples, tol=tol,
                                    max_halvings=max_halvings)
    except QSpringInstabilityError as error:
        return AdiabaticRow(ratio=ratio, G=G, discrepancy=math.nan, stable=False,
                            message=str(error), max_growth=growth)
    eff_traj = gaussian.evolve(effective, gaussian.reduce(state, list(LABELS)), t_final,
                               dt=full_traj.dt, samples=samples, refine=False)
    reduced = full_traj.covs[:, :4, :4]
    scale = float(np.max(np.abs(eff_traj.covs)))
    discrepancy = float(np.max(np.abs(reduced - eff_traj.covs))) / scale
    message = 'ok' if growth <= 0 else f'weak amplification, max Re eig = {growth:.3g}'
    return AdiabaticRow(ratio=ratio, G=G, discrepancy=discrepancy, stable=True,
                        message=message, max_growth=growth, dt=full_traj.dt)


def adiabatic_check(ratios: Sequence[float]=(30.0, 100.0, 300.0),
                    kappa_over_delta: float=0.05,
                    g: float=1.0,
                    omega: float=1.0,
                    squeeze_db: float=3.0,
                    nbar: float=1.0,
                    samples: int=201,
                    tol: float=1e-6,
                    max_halvings: int=4,
                    verbose: bool=False) -> List[AdiabaticRow]:
    '''Compares the reduced atom-membrane covariance of the full four-mode
    model with the effective model over one exchange period G t in [0, pi].

    :param ratios: detunings Delta/g, each at least 10
    :param kappa_over_delta: cavity decay in units of the detuning
    :param g: atom-cavity and membrane-cavity coupling (g = 0 decouples)
    '''
    for ratio in ratios:
        if not np.isfinite(ratio) or ratio < 10:
            raise QSpringDomainError(f'must be at least 10, got {ratio}.', 'ratios')
    if kappa_over_delta <= 0:
        raise QSpringDomainError(f'must be positive, got {kappa_over_delta}.',
                                 'kappa_over_delta')
    rows = []
    for ratio in tqdm(ratios, disable=not verbose, desc='adiabatic check'):
        row = _adiabatic_row(float(ratio), kappa_over_delta, g, omega, squeeze_db,
                             nbar, samples, tol, max_halvings)
        rows.append(row)
        color = 'green' if row.stable else 'red'
        print_message(f'[INFO] Delta/g={row.ratio:g}: G={row.G:.6g}, '
                      f'discrepancy={row.discrepancy:.3g}', color=color, verbose=verbose)
    return rows


def summarize_adiabatic(rows: Sequence[AdiabaticRow]) -> str:
    lines = [f'    Delta/g={row.ratio:<8g} G={row.G:<12.6g} '
             f'discrepancy={row.discrepancy:<12.4g} {row.message}' for row in rows]
    return 'adiabatic elimination:\n' + '\n'.join(lines) + '\n'


# ***********************************************************************
# FOCK ORACLE COMPARISON
#
# ***********************************************************************


@dataclass(frozen=True, eq=False)
class OracleResult:
    gaussian: Trajectory
    fock: fock.FockTrajectory
    max_mean_difference: float
    max_cov_difference: float
    config: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {'max_mean_difference': self.max_mean_difference,
                'max_cov_difference': self.max_cov_difference,
                'renormalisation': self.fock.renormalisation,
                'min_eigenvalue': float(np.min(self.fock.min_eigenvalues)),
                'max_tail': self.fock.tails.max(axis=0).tolist(),
                'fock_dt': self.fock.dt,
                'config': self.config}

    def to_rows(self) -> List[List[str]]:
        return self.fock.to_rows()


def oracle_experiment(gamma_over_G: float=0.1,
                      squeeze_db: float=3.0,
                      nbar: float=1.0,
                      omega_over_G: float=20.0,
                      dims: Sequence[int]=(20, 20),
                      t_max: float=math.pi,
                      samples: int=101,
                      assignment: str='symmetric',
                      verbose: bool=False) -> OracleResult:
    '''Runs the effective model through both engines from a squeezed atom
    and a thermal membrane and compares their moments sample by sample.'''
    model = transfer_model(gamma_over_G, omega_over_G, assignment)
    state = make_state(squeezed(squeeze_db), thermal(nbar), labels=LABELS)
    traj = gaussian.evolve(model, state, t_max, samples=samples)
    rho = fock.from_gaussian(state, dims)
    fock_traj = fock.evolve_rho(model, rho, t_max, samples=samples, verbose=verbose)
    mean_diff = float(np.max(np.abs(traj.means - fock_traj.means)))
    cov_diff = float(np.max(np.abs(traj.covs - fock_traj.covs)))
    print_message(f'[INFO] oracle agreement: means {mean_diff:.3g}, '
                  f'covariances {cov_diff:.3g}', verbose=verbose)
    config = {'gamma_over_G': gamma_over_G, 'squeeze_db': squeeze_db, 'nbar': nbar,
              'omega_over_G': omega_over_G, 'dims': list(dims), 't_max': t_max,
              'samples': samples, 'assignment': assignment}
    return OracleResult(gaussian=traj, fock=fock_traj, max_mean_difference=mean_diff,
                        max_cov_difference=cov_diff, config=config)
