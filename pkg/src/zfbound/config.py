"""Scenario configuration files.

A scenario is a TOML file with top-level run settings and one table per
section::

    seed = 7
    realizations = 100
    timeout_s = 120

    [instance]
    num_users = 16
    num_subcarriers = 16
    num_antennas = 3
    power_budget_dbm = 20
    num_rt_users = 1
    min_rate = 40

    [sweep]
    parameter = "min_rate"      # none | min_rate | rt_attenuation_db | num_rt_users | power_budget_dbm
    values = [80, 100, 120]

    [solver]                    # dual subgradient settings
    [recovery]                  # mu-walk step and limit
    [weights]                   # weight-adjustment epsilon and limit
    [oracle]                    # enabled, assignment_budget

Unknown keys are rejected so that typos surface as configuration errors.
"""

import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from .exceptions import ConfigurationError
from .types import ScenarioConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SECTIONS = ("instance", "sweep", "solver", "recovery", "weights", "oracle")
_TOP_LEVEL = ("seed", "realizations", "timeout_s", "threads", "emit_trace")


def _check_keys(data: dict[str, Any], source: str) -> None:
    unknown = sorted(set(data) - set(_SECTIONS) - set(_TOP_LEVEL))
    if unknown:
        raise ConfigurationError(f"{source}: unknown keys {unknown}")
    for name in _SECTIONS:
        if name in data and not isinstance(data[name], dict):
            raise ConfigurationError(f"{source}: [{name}] must be a table")


def _validate(data: dict[str, Any], source: str) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigurationError(f"{source}: {details}")


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse a scenario from TOML text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{source}: invalid TOML: {e}")
    _check_keys(data, source)
    return _validate(data, source)


def load_config(path: str | Path | None = None, **overrides: Any) -> ScenarioConfig:
    """Load a scenario file and apply top-level overrides.

    Args:
        path: TOML file; ``None`` starts from the defaults
        **overrides: Top-level settings (``seed``, ``realizations``, ...);
            ``None`` values are ignored

    Raises:
        ConfigurationError: If the file is missing, malformed or invalid
    """
    if path is None:
        data: dict[str, Any] = {}
        source = "<defaults>"
    else:
        file = Path(path)
        source = str(file)
        try:
            text = file.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read config {source}: {e}")
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"{source}: invalid TOML: {e}")
        _check_keys(data, source)

    for key, value in overrides.items():
        if key not in _TOP_LEVEL:
            raise ConfigurationError(f"cannot override unknown setting {key!r}")
        if value is not None:
            data[key] = value
    return _validate(data, source)
