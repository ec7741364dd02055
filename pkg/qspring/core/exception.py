# ***********************************************************************
# QSPRING EXCEPTIONS
#
# - error hierarchy shared by every engine and the command line
# - coloured warnings routed through the warnings module
#
# ***********************************************************************


from typing import Optional
import warnings

import termcolor


def raise_warning(message: str, color: str='yellow') -> None:
    '''Emits a coloured UserWarning so callers and tests can capture it.'''
    warnings.warn(termcolor.colored(message, color), stacklevel=2)


def print_message(message: str, color: str='green', verbose: bool=True) -> None:
    if verbose:
        print(termcolor.colored(message, color))


class QSpringError(Exception):
    '''Base class of all errors raised by qspring.'''
    pass


class QSpringDomainError(QSpringError, ValueError):
    '''Invalid physical input or violated precondition.

    :param message: human readable description of the problem
    :param field: dotted path of the offending field (e.g. membrane.reflectivity)
    or the name of the offending argument
    '''

    def __init__(self, message: str, field: Optional[str]=None) -> None:
        self.field = field
        if field is not None:
            message = f'<{field}>: {message}'
        super().__init__(message)


class QSpringConfigError(QSpringDomainError):
    '''Malformed config file, unknown section, key or override path.'''
    pass


class QSpringInstabilityError(QSpringError, ArithmeticError):
    '''Unstable drift or runaway variances during integration.'''

    def __init__(self, message: str,
                 time: Optional[float]=None,
                 value: Optional[complex]=None) -> None:
        self.time = time
        self.value = value
        super().__init__(message)


class QSpringTruncationError(QSpringError):
    '''The truncated Fock space no longer holds the state.'''

    def __init__(self, message: str,
                 mode: Optional[int]=None,
                 tail: Optional[float]=None) -> None:
        self.mode = mode
        self.tail = tail
        super().__init__(message)
