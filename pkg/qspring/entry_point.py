import argparse
import sys
from typing import List, Optional

import termcolor

from qspring.core.exception import QSpringError
from qspring.examples import run_adiabatic, run_evolve, run_ledger, run_transfer
from qspring.examples.run_config import RunConfig, MODELS, PRESETS
from qspring.core.scenarios import LOSS_ASSIGNMENTS

# command -> (runner, help)
COMMANDS = {
    'check': (run_ledger, 'Prints the strong-coupling condition ledger of a parameter set.'),
    'derive': (run_ledger, 'Emits every derived rate of a parameter set as JSON.'),
    'evolve': (run_evolve, 'Integrates the effective, full or Fock-oracle model.'),
    'transfer': (run_transfer, 'Swaps a squeezed atom into a thermal membrane.'),
    'sweep': (run_transfer, 'Tabulates the transferred squeezing over loss rates.'),
    'adiabatic': (run_adiabatic, 'Compares the full and effective models over Delta/g.'),
    'wigner': (run_transfer, 'Wigner functions of atom and membrane before and after the swap.')
}

# command-line flag -> RunConfig option name
OPTIONS = {
    'squeeze_db': 'squeeze_db',
    'nbar': 'nbar',
    'gamma_over_g': 'gamma_over_G',
    'omega_over_g': 'omega_over_G',
    'assignment': 'assignment',
    'ratios': 'ratios',
    'grid': 'grid',
    'extent': 'extent'
}


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    source = parser.add_mutually_exclusive_group()
    source.add_argument('--preset', choices=PRESETS, default='paper',
                        help='named parameter set (default: paper)')
    source.add_argument('--params', metavar='FILE', default=None,
                        help='JSON parameter file mirroring SystemParams')
    parser.add_argument('--set', dest='overrides', metavar='SECTION.FIELD=VALUE',
                        action='append', default=[],
                        help='override one parameter, repeatable')
    parser.add_argument('--config', metavar='FILE', default=None,
                        help='run settings (.cfg) merged over the shipped defaults')
    parser.add_argument('--output', metavar='PATH', default=None,
                        help='output file (standard output when omitted)')
    parser.add_argument('--format', choices=('csv', 'json'), default='json',
                        help='report format (default: json)')
    return parser


def _add_run_flags(parser: argparse.ArgumentParser, command: str) -> None:
    many = '+' if command == 'sweep' else None
    if command in ('evolve', 'transfer', 'sweep', 'adiabatic', 'wigner'):
        parser.add_argument('--t-max', type=float, default=None,
                            help='final time in units of 1/G')
        parser.add_argument('--samples', type=int, default=None,
                            help='number of stored samples')
        parser.add_argument('--squeeze-db', type=float, nargs=many, default=None,
                            help='initial atomic squeezing in dB')
        parser.add_argument('--nbar', type=float, default=None,
                            help='initial thermal occupation of the membrane')
    if command in ('evolve', 'transfer', 'sweep', 'wigner'):
        parser.add_argument('--gamma-over-g', type=float, nargs=many, default=None,
                            help='loss rate in units of G')
        parser.add_argument('--omega-over-g', type=float, default=None,
                            help='mode frequency in units of G')
        parser.add_argument('--assignment', choices=LOSS_ASSIGNMENTS, default=None,
                            help='how the loss rate is split over the channels')
    if command == 'evolve':
        parser.add_argument('--model', choices=MODELS, default='effective',
                            help='model to integrate (default: effective)')
    if command in ('evolve', 'adiabatic'):
        parser.add_argument('--ratios', type=float, nargs='+', default=None,
                            help='detuning ratios Delta/g')
    if command == 'wigner':
        parser.add_argument('--grid', type=int, default=None,
                            help='grid points per quadrature (default: 81)')
        parser.add_argument('--extent', type=float, default=None,
                            help='grid half-width in vacuum units (default: 4)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qspring',
        description='Command line tools for cavity-mediated atom-membrane coupling.')
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_parser()
    for (command, (_, text)) in COMMANDS.items():
        sub = subparsers.add_parser(command, parents=[common], help=text, description=text)
        _add_run_flags(sub, command)
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {}
    for (flag, name) in OPTIONS.items():
        value = getattr(args, flag, None)
        if value is not None:
            options[name] = value
    return RunConfig(command=args.command,
                     preset=args.preset if args.params is None else None,
                     params_file=args.params,
                     model=getattr(args, 'model', 'effective'),
                     t_max=getattr(args, 't_max', None),
                     samples=getattr(args, 'samples', None),
                     output=args.output,
                     format=args.format,
                     config_file=args.config,
                     overrides=list(args.overrides),
                     options=options)


def parse_and_dispatch(argv: Optional[List[str]]=None) -> int:
    '''Parses the arguments and runs the command; returns the exit code
    (0 success, 1 domain error, 2 usage error).'''
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return error.code if isinstance(error.code, int) else 2
    runner, _ = COMMANDS[args.command]
    try:
        return runner.run_from_args(args)
    except (QSpringError, OSError) as error:
        print(termcolor.colored(f'[FAIL] {error}', 'red'), file=sys.stderr)
        return 1


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
