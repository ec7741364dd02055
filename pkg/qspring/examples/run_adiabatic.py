'''In this example, the full atom-membrane-cavity model is integrated next to
the effective model for several detunings Delta/g, and the largest relative
discrepancy of the reduced atom-membrane covariance is reported per row.

The syntax for running this example is:

    qspring adiabatic [--ratios <r> ...] [--squeeze-db <dB>] [--nbar <n>]
        [--samples <n>] [--format csv|json] [--output <path>]

where:
    <r> is a detuning ratio Delta/g of at least 10
'''
import sys

from qspring.core.emit import emit, to_csv_text
from qspring.core.scenarios import adiabatic_check, summarize_adiabatic
from qspring.examples.run_config import (
    RunConfig,
    option,
    report,
    resolve_settings
)

HEADER = ['ratio', 'G', 'discrepancy', 'stable', 'max_growth', 'dt', 'message']


def main(run: RunConfig) -> int:
    settings = resolve_settings(run)['Adiabatic']
    rows = adiabatic_check(
        ratios=option(run, 'ratios', settings['ratios']),
        kappa_over_delta=settings['kappa_over_delta'],
        g=settings['g'],
        squeeze_db=option(run, 'squeeze_db', settings['squeeze_db']),
        nbar=option(run, 'nbar', settings['nbar']),
        samples=run.samples or settings['samples'],
        tol=settings['tol'],
        max_halvings=settings['max_halvings'])
    if run.output is not None:
        print(summarize_adiabatic(rows))
    if run.format == 'csv':
        table = [HEADER] + [[row.ratio, row.G, row.discrepancy, row.stable,
                             row.max_growth, row.dt, row.message] for row in rows]
        text = to_csv_text(table)
        if run.output is None:
            sys.stdout.write(text)
        else:
            with open(run.output, 'w', newline='') as file:
                file.write(text)
    else:
        emit(report(run, {'rows': rows}), 'json', run.output)
    return 0


def run_from_args(args) -> int:
    from qspring.entry_point import run_config_from_args
    return main(run_config_from_args(args))


if __name__ == "__main__":
    from qspring.entry_point import parse_and_dispatch
    sys.exit(parse_and_dispatch(['adiabatic'] + sys.argv[1:]))
