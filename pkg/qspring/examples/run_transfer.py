'''In this example, a squeezed atomic motion is swapped into a thermal membrane
through the effective coupling G, in units of G:

    1. transfer integrates one swap and reports the squeezing and fidelity
    2. sweep tabulates the maximum transferred squeezing over loss rates and
       initial squeezings
    3. wigner evaluates the Wigner functions of both modes at t = 0 and at the
       swap time G t = pi/2

The syntax for running this example is:

    qspring transfer [--gamma-over-g <g>] [--squeeze-db <dB>] [--nbar <n>]
        [--omega-over-g <w>] [--assignment <name>] [--format csv|json] [--output <path>]
    qspring sweep [--gamma-over-g <g> ...] [--squeeze-db <dB> ...] [--format csv|json]
    qspring wigner [--grid <points>] [--extent <x>] [--format csv|json] [--output <prefix>]

where:
    <name> is one of symmetric, thermal, cavity-only, atom-only, membrane-only
    or preset (the rates derived from the parameter set, normalized by G)
'''
import sys

import numpy as np

from qspring.core.emit import emit, to_csv_text
from qspring.core.exception import QSpringDomainError
from qspring.core.gaussian import write_wigner_csv
from qspring.core import scenarios
from qspring.examples.run_config import (
    RunConfig,
    option,
    report,
    resolve_params,
    resolve_settings
)


def _transfer(run, settings, verbose=False):
    transfer = settings['Transfer']
    integrator = settings['Integrator']
    assignment = option(run, 'assignment', transfer['assignment'])
    rates = None
    if assignment == 'preset':
        rates = scenarios.run_example_ledger(settings, resolve_params(run)).rates
    return scenarios.transfer_experiment(
        gamma_over_G=option(run, 'gamma_over_G', transfer['gamma_over_G']),
        init_squeeze_db=option(run, 'squeeze_db', transfer['squeeze_db']),
        init_nbar=option(run, 'nbar', transfer['nbar']),
        t_max=run.t_max or transfer['t_max'],
        samples=run.samples or transfer['samples'],
        omega_over_G=option(run, 'omega_over_G', transfer['omega_over_G']),
        assignment=assignment,
        bath_nbar=transfer['bath_nbar'],
        rates=rates,
        tol=integrator['tol'],
        max_halvings=integrator['max_halvings'],
        rotation_points=transfer['rotation_points'],
        verbose=verbose)


def _sweep(run, settings):
    sweep = settings['Sweep']
    integrator = settings['Integrator']
    gammas = run.options.get('gamma_over_G')
    if gammas is None:
        gammas = np.linspace(sweep['gamma_min'], sweep['gamma_max'], sweep['gamma_steps'])
    return scenarios.transfer_sweep(
        gamma_over_G=gammas,
        init_squeeze_db=option(run, 'squeeze_db', sweep['squeeze_db']),
        init_nbar=option(run, 'nbar', sweep['nbar']),
        omega_over_G=option(run, 'omega_over_G', sweep['omega_over_G']),
        t_max=run.t_max or settings['Transfer']['t_max'],
        samples=run.samples or sweep['samples'],
        assignment=option(run, 'assignment', sweep['assignment']),
        bath_nbar=settings['Transfer']['bath_nbar'],
        tol=integrator['tol'],
        max_halvings=integrator['max_halvings'],
        workers=sweep['workers'])


def _wigner(run, settings):
    points = option(run, 'grid', 81)
    extent = option(run, 'extent', 4.0)
    if points < 2:
        raise QSpringDomainError(f'must be at least 2, got {points}.', 'grid')
    if not extent > 0:
        raise QSpringDomainError(f'must be positive, got {extent}.', 'extent')
    result = _transfer(run, settings)
    grid = np.linspace(-extent, extent, points)
    return scenarios.swap_wigner_panels(result, grid)


def _panel_rows(grid, values):
    rows = [['x', 'p', 'W']]
    for (i, x) in enumerate(grid):
        for (j, p) in enumerate(grid):
            rows.append([float(x), float(p), float(values[i, j])])
    return rows


def main(run: RunConfig) -> int:
    settings = resolve_settings(run)
    if run.command == 'transfer':
        result = _transfer(run, settings)
        if run.output is not None or run.format == 'csv':
            print(scenarios.summarize_transfer(result), file=sys.stderr)
    elif run.command == 'sweep':
        result = _sweep(run, settings)
    else:
        panels = _wigner(run, settings)
        if run.format == 'csv':
            for (name, values) in panels.items():
                if name in ('x', 'p'):
                    continue
                if run.output is None:
                    text = to_csv_text(_panel_rows(panels['x'], values))
                    sys.stdout.write(f'# {name}\n{text}')
                else:
                    write_wigner_csv(panels['x'], panels['p'], values,
                                     f'{run.output}_{name}.csv')
            return 0
        result = panels
    if run.format == 'csv':
        emit(result, 'csv', run.output)
    else:
        emit(report(run, result), 'json', run.output)
    return 0


def run_from_args(args) -> int:
    from qspring.entry_point import run_config_from_args
    return main(run_config_from_args(args))


if __name__ == "__main__":
    from qspring.entry_point import parse_and_dispatch
    sys.exit(parse_and_dispatch(['transfer'] + sys.argv[1:]))
