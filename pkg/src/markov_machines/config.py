"""Typed settings, assembled with omegaconf.

Precedence (lowest first): schema defaults, YAML file, environment, CLI dotlist overrides.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from markov_machines.errors import ConfigError

logger = logging.getLogger(__name__)

ENV_MAX_BELIEFS = "MARKOV_MACHINES_MAX_BELIEFS"


@dataclass
class FilteringSettings:
    max_beliefs: int = 10_000


@dataclass
class GaussSettings:
    pinv_rel_tol: float = 1e-12
    psd_tol: float = 1e-10
    symmetry_tol: float = 1e-12
    equation_tol: float = 1e-9


@dataclass
class OracleSettings:
    max_trials: int = 100_000
    max_horizon: int = 12
    max_states: int = 16


@dataclass
class Settings:
    schema_version: str = "v1"
    filtering: FilteringSettings = field(default_factory=FilteringSettings)
    gauss: GaussSettings = field(default_factory=GaussSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)


def _env_overrides(environ: Mapping[str, str]) -> list[str]:
    dotlist = []
    if ENV_MAX_BELIEFS in environ:
        dotlist.append(f"filtering.max_beliefs={environ[ENV_MAX_BELIEFS]}")
    return dotlist


def load_settings(
    path: str | Path | None = None,
    overrides: Iterable[str] = (),
    environ: Mapping[str, str] | None = None,
) -> Settings:
    """Build a :class:`Settings` from defaults, an optional YAML file and overrides.

    Args:
        path: Optional YAML file with any subset of the settings tree.
        overrides: Dotlist entries such as ``"filtering.max_beliefs=50"``.
        environ: Environment to read; defaults to ``os.environ``.

    Raises:
        ConfigError: If the file is missing or a value fails schema validation.
    """
    environ = os.environ if environ is None else environ
    try:
        merged = OmegaConf.structured(Settings)
        if path is not None:
            file_path = Path(path)
            if not file_path.exists():
                raise ConfigError(f"config file not found: {file_path}")
            merged = OmegaConf.merge(merged, OmegaConf.load(file_path))
        env_list = _env_overrides(environ)
        if env_list:
            logger.debug("settings overridden from environment: %s", env_list)
            merged = OmegaConf.merge(merged, OmegaConf.from_dotlist(env_list))
        merged = OmegaConf.merge(merged, OmegaConf.from_dotlist(list(overrides)))
        settings = OmegaConf.to_object(merged)
    except OmegaConfBaseException as exc:
        raise ConfigError(str(exc)) from exc
    assert isinstance(settings, Settings)
    if settings.filtering.max_beliefs < 1:
        raise ConfigError("filtering.max_beliefs must be positive")
    return settings
