'''Resolved settings of one command-line run. Every JSON report embeds them,
so the preset (or parameter file) plus the overrides reconstruct the run.
'''
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from qspring.core.exception import QSpringConfigError, QSpringDomainError
from qspring.core import physics
from qspring.core import scenarios

COMMANDS = ('check', 'derive', 'evolve', 'transfer', 'sweep', 'adiabatic', 'wigner')
MODELS = ('effective', 'full', 'fock-oracle')
FORMATS = ('csv', 'json')
PRESETS = ('paper',)


@dataclass(frozen=True)
class RunConfig:
    command: str
    preset: Optional[str] = 'paper'
    params_file: Optional[str] = None
    model: str = 'effective'
    t_max: Optional[float] = None
    samples: Optional[int] = None
    output: Optional[str] = None
    format: str = 'json'
    config_file: Optional[str] = None
    overrides: List[str] = field(default_factory=list)
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise QSpringConfigError(f'expected one of {COMMANDS}.', 'command')
        if self.model not in MODELS:
            raise QSpringConfigError(f'expected one of {MODELS}.', 'model')
        if self.format not in FORMATS:
            raise QSpringConfigError(f'expected one of {FORMATS}.', 'format')
        if self.params_file is None and self.preset not in PRESETS:
            raise QSpringConfigError(f'expected one of {PRESETS}.', 'preset')
        if self.t_max is not None and not self.t_max > 0:
            raise QSpringDomainError(f'must be positive, got {self.t_max}.', 't_max')
        if self.samples is not None and self.samples < 2:
            raise QSpringDomainError(f'must be at least 2, got {self.samples}.', 'samples')

    @property
    def params_source(self) -> str:
        if self.params_file is not None:
            return self.params_file
        return f'preset:{self.preset}'

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['params_source'] = self.params_source
        return data


def resolve_params(run: RunConfig) -> physics.SystemParams:
    if run.params_file is not None:
        params = physics.load_params(run.params_file)
    else:
        params = physics.example_preset()
    return physics.apply_overrides(params, run.overrides)


def resolve_settings(run: RunConfig) -> Dict[str, Dict[str, Any]]:
    return scenarios.load_config(run.config_file)


def option(run: RunConfig, name: str, default: Any) -> Any:
    '''Command-line value of an option, or the config default when unset.'''
    value = run.options.get(name)
    return default if value is None else value


def report(run: RunConfig, result: Any) -> Dict[str, Any]:
    return {'command': run.command, 'run_config': run.to_dict(), 'result': result}
