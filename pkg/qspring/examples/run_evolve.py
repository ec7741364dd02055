'''In this example, the user has the choice to integrate one of three models
from a squeezed atom and a thermal membrane:

    1. effective runs the two-mode effective model in units of G
    2. full runs the four-mode model with both cavity fields at Delta/g given
       by the first of --ratios
    3. fock-oracle runs the effective model through the Gaussian engine and
       the truncated Fock integrator and compares their moments

The syntax for running this example is:

    qspring evolve --model <model> [--t-max <t>] [--samples <n>]
        [--squeeze-db <dB>] [--nbar <n>] [--gamma-over-g <g>]
        [--omega-over-g <w>] [--ratios <r> ...] [--format csv|json]
        [--output <path>]
'''
import math
import sys

from qspring.core import gaussian
from qspring.core.emit import emit
from qspring.core.gaussian import make_state, squeezed, thermal, vacuum
from qspring.core.model import build_full_model
from qspring.core import physics
from qspring.core import scenarios
from qspring.examples.run_config import (
    RunConfig,
    option,
    report,
    resolve_params,
    resolve_settings
)


def _evolve_effective(run, settings):
    transfer = settings['Transfer']
    integrator = settings['Integrator']
    rates = None
    assignment = option(run, 'assignment', transfer['assignment'])
    if assignment == 'preset':
        rates = scenarios.run_example_ledger(settings, resolve_params(run)).rates
    model = scenarios.transfer_model(
        option(run, 'gamma_over_G', transfer['gamma_over_G']),
        option(run, 'omega_over_G', transfer['omega_over_G']),
        assignment, transfer['bath_nbar'], rates)
    state = make_state(squeezed(option(run, 'squeeze_db', transfer['squeeze_db'])),
                       thermal(option(run, 'nbar', transfer['nbar'])),
                       labels=scenarios.LABELS)
    return gaussian.evolve(model, state,
                           run.t_max or integrator['t_max'],
                           samples=run.samples or integrator['samples'],
                           tol=integrator['tol'],
                           max_halvings=integrator['max_halvings'])


def _evolve_full(run, settings):
    adiabatic = settings['Adiabatic']
    integrator = settings['Integrator']
    ratio = float(option(run, 'ratios', adiabatic['ratios'])[0])
    g = adiabatic['g']
    Delta = ratio * (g if g > 0 else 1.0)
    kappa = adiabatic['kappa_over_delta'] * Delta
    model = build_full_model(1.0, 1.0, Delta, kappa, g, g, 0.0, 0.0, 0.0)
    G = physics.effective_coupling_G(g, g, Delta, 1.0, kappa)
    state = make_state(squeezed(option(run, 'squeeze_db', adiabatic['squeeze_db'])),
                       thermal(option(run, 'nbar', adiabatic['nbar'])),
                       vacuum(), vacuum(), labels=scenarios.FULL_LABELS)
    t_max = run.t_max or (math.pi / G if G > 0 else math.pi)
    return gaussian.evolve(model, state, t_max,
                           samples=run.samples or adiabatic['samples'],
                           tol=adiabatic['tol'],
                           max_halvings=adiabatic['max_halvings'])


def _evolve_oracle(run, settings):
    oracle = settings['Oracle']
    return scenarios.oracle_experiment(
        gamma_over_G=option(run, 'gamma_over_G', oracle['gamma_over_G']),
        squeeze_db=option(run, 'squeeze_db', oracle['squeeze_db']),
        nbar=option(run, 'nbar', oracle['nbar']),
        omega_over_G=option(run, 'omega_over_G', oracle['omega_over_G']),
        dims=tuple(oracle['dims']),
        t_max=run.t_max or oracle['t_max'],
        samples=run.samples or oracle['samples'])


def main(run: RunConfig) -> int:
    settings = resolve_settings(run)
    if run.model == 'effective':
        result = _evolve_effective(run, settings)
    elif run.model == 'full':
        result = _evolve_full(run, settings)
    else:
        result = _evolve_oracle(run, settings)
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
    sys.exit(parse_and_dispatch(['evolve'] + sys.argv[1:]))
