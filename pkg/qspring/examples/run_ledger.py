'''In this example, the worked-example parameters are turned into every
derived rate and checked against the strong-coupling conditions:

    1. check prints the condition ledger with the printed reference values
    2. derive emits the derived rates as a JSON report

The syntax for running this example is:

    qspring check [--preset paper | --params <file>] [--set <section.field=value>]
    qspring derive [--preset paper | --params <file>] [--set ...] [--output <path>]

where:
    <file> is a JSON parameter file mirroring SystemParams (frequencies in Hz
    under keys ending in _hz)
    <section.field=value> overrides one parameter, e.g. membrane.reflectivity=0.9
'''
import sys

from qspring.core.exception import QSpringConfigError
from qspring.core.emit import emit
from qspring.core.scenarios import run_example_ledger, summarize_ledger
from qspring.examples.run_config import (
    RunConfig,
    report,
    resolve_params,
    resolve_settings
)


def main(run: RunConfig) -> int:
    if run.format != 'json':
        raise QSpringConfigError(f'{run.command} emits JSON only, got {run.format}.', 'format')
    params = resolve_params(run)
    settings = resolve_settings(run)
    ledger = run_example_ledger(settings, params)
    if run.command == 'check':
        print(summarize_ledger(ledger))
        if run.output is not None:
            emit(report(run, ledger), 'json', run.output)
    else:
        result = {'rates': ledger.rates.to_dict(),
                  'site': ledger.to_dict()['site'],
                  'params': ledger.to_dict()['params']}
        emit(report(run, result), 'json', run.output)
    return 0


def run_from_args(args) -> int:
    from qspring.entry_point import run_config_from_args
    return main(run_config_from_args(args))


if __name__ == "__main__":
    from qspring.entry_point import parse_and_dispatch
    sys.exit(parse_and_dispatch(['check'] + sys.argv[1:]))
