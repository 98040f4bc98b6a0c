"""
Run configuration

A RunConfig gathers the model section (pathloss, fading, intensity, lambda,
power), the task section (subcommand parameters), the output section and the
seed. Unknown keys are rejected at every level. CLI flags are generated from
the task fields, so flags and config keys stay one-to-one.
"""

import argparse
import json
from typing import Any, Dict, List, Literal, Optional, Tuple, get_args, get_origin

from pydantic import BaseModel, ConfigDict, Field

from models.geometry import NetworkModel, network_from_config
from utils.config import Config


class ModelSection(BaseModel):
    """Network model; inner mappings are validated by the model loaders."""
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    pathloss: Dict[str, Any]
    fading: Dict[str, Any]
    intensity: Dict[str, Any]
    lam: float = Field(1.0, alias='lambda', gt=0)
    power: float = Field(1.0, gt=0)

    def to_network(self) -> NetworkModel:
        return network_from_config(self.model_dump(by_alias=True))


class TaskSection(BaseModel):
    """Parameters of the subcommands. Each field is also a CLI flag."""
    model_config = ConfigDict(extra='forbid')

    # bounds / outage / sumcap / simulate
    lambdas: List[float] = Field(default_factory=list)
    # table1
    alpha_list: List[float] = Field(default_factory=lambda: [3.0, 4.0, 5.0])
    check: bool = True
    # bounds grid
    x_min: float = -6.0
    x_max: float = 6.0
    x_points: int = Field(481, ge=2)
    # simulation
    num_samples: int = Field(Config.DEFAULT_NUM_SAMPLES, ge=1)
    tail_tolerance: float = Field(Config.DEFAULT_TAIL_TOLERANCE, gt=0, lt=1)
    tail_mode: Literal['compensate', 'truncate'] = 'compensate'
    delta: float = Field(Config.DEFAULT_CONTAINMENT_DELTA, gt=0, lt=1)
    simulate: bool = True
    # outage link / sum capacity
    d: float = Field(1.0, gt=0)
    snr_db: float = 20.0
    pg: float = Field(100.0, ge=1)
    gamma: float = Field(0.1, gt=0, lt=1)
    direct_fading: Dict[str, Any] = Field(default_factory=lambda: {'kind': 'deterministic', 'h0': 1.0})


class OutputSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    path: str = 'out'
    format: Literal['csv', 'json'] = 'csv'


class RunConfig(BaseModel):
    """Complete, serializable description of one CLI run."""
    model_config = ConfigDict(extra='forbid')

    model: Optional[ModelSection] = None
    task: TaskSection = Field(default_factory=TaskSection)
    output: OutputSection = Field(default_factory=OutputSection)
    seed: int = Field(Config.DEFAULT_SEED, ge=0, lt=2 ** 64)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, mode='json')

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        return cls.model_validate(data)


# ============================================================================
# Merging and CLI flags
# ============================================================================

# Sub-mappings whose kind decides their keys; an override replaces them whole
WHOLE_KEYS = {'pathloss', 'fading', 'intensity', 'direct_fading'}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base; nested dicts merge, other values replace."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key not in WHOLE_KEYS:
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def flag_name(field: str) -> str:
    return '--' + field.replace('_', '-')


def task_flags() -> List[Tuple[str, str, Dict[str, Any]]]:
    """
    (flag, field, argparse kwargs) for every task field.

    Defaults are suppressed so only flags given on the command line override the config.
    """
    specs = []
    for name, info in TaskSection.model_fields.items():
        annotation = info.annotation
        kwargs: Dict[str, Any] = {'dest': name, 'default': argparse.SUPPRESS, 'help': f"task.{name}"}

        if annotation is bool:
            kwargs['action'] = argparse.BooleanOptionalAction
        elif get_origin(annotation) is list:
            kwargs.update(nargs='+', type=get_args(annotation)[0], metavar='X')
        elif get_origin(annotation) is Literal:
            kwargs['choices'] = list(get_args(annotation))
        elif get_origin(annotation) is dict:
            kwargs.update(type=json.loads, metavar='JSON')
        else:
            kwargs['type'] = annotation

        specs.append((flag_name(name), name, kwargs))
    return specs


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Collect the RunConfig overrides given as CLI flags."""
    overrides: Dict[str, Any] = {}

    task = {name: getattr(args, name) for _, name, _ in task_flags() if hasattr(args, name)}
    if task:
        overrides['task'] = task

    output = {}
    if getattr(args, 'out', None) is not None:
        output['path'] = args.out
    if getattr(args, 'format', None) is not None:
        output['format'] = args.format
    if output:
        overrides['output'] = output

    if getattr(args, 'seed', None) is not None:
        overrides['seed'] = args.seed
    return overrides


def build_run_config(
    preset: Optional[Dict[str, Any]] = None,
    file_config: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    Layer preset, config file and CLI overrides (later wins) into a RunConfig.

    Raises:
        pydantic.ValidationError: On unknown keys or invalid values
    """
    data: Dict[str, Any] = {}
    for layer in (preset, file_config, overrides):
        if layer:
            data = deep_merge(data, layer)
    return RunConfig.from_dict(data)
