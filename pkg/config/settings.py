"""Parameter loading: YAML document -> validated ParameterBundle."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from utils.exceptions import ConfigError
from utils.validators import (
    CalibrationSpec,
    DenoiseConfig,
    LightRuleParams,
    QualityThresholds,
    SignRuleParams,
)

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "TIM_CONFIG"
DEFAULT_CONFIG_PATH = Path(__file__).parent / "config.yaml"


class ParameterBundle(BaseModel):
    """Every tunable of the pipeline, one section per concern."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    light: LightRuleParams = Field(default_factory=LightRuleParams)
    sign: SignRuleParams = Field(default_factory=SignRuleParams)
    quality: QualityThresholds = Field(default_factory=QualityThresholds)
    denoise: DenoiseConfig = Field(default_factory=DenoiseConfig)
    calibration: CalibrationSpec = Field(default_factory=CalibrationSpec)

    def as_tuple(self) -> Tuple[LightRuleParams, SignRuleParams, QualityThresholds, DenoiseConfig, CalibrationSpec]:
        return self.light, self.sign, self.quality, self.denoise, self.calibration


def resolve_config_path(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """Pick the config file: explicit path, then $TIM_CONFIG (``.env`` honoured), else none."""
    if path:
        return Path(path)
    load_dotenv()
    env_path = os.getenv(CONFIG_ENV_VAR)
    return Path(env_path) if env_path else None


def _read_yaml(config_path: Path) -> Dict[str, Any]:
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        with open(config_path) as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"could not parse {config_path}: {e}") from e
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping of sections")
    return raw


def load_params(path: Optional[Union[str, Path]] = None) -> ParameterBundle:
    """Load and validate the parameter bundle.

    Args:
        path: Config file; falls back to $TIM_CONFIG, then built-in defaults

    Returns:
        Validated ParameterBundle

    Raises:
        ConfigError: unreadable file, unknown key or violated invariant; the
            message starts with the dotted key path
    """
    config_path = resolve_config_path(path)
    raw = _read_yaml(config_path) if config_path is not None else {}

    try:
        bundle = ParameterBundle.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        key_path = ".".join(str(part) for part in first["loc"])
        raise ConfigError(first["msg"], key_path=key_path) from e

    logger.info(f"Loaded parameters from {config_path or 'built-in defaults'}")
    return bundle
