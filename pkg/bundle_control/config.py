"""Settings from config.yaml, .env and the environment."""

import logging
import os
from pathlib import Path

import yaml
from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator

from bundle_control.oracle import DEFAULT_ORACLE_CAP

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.home() / ".config" / "bundle-control"
LOCAL_CONFIG_NAME = ".bctl.yaml"
TEMPLATE_PATH = Path(__file__).parent / "templates" / "config.yaml.template"

ENV_KEYS = {
    "BCTL_ORACLE_CAP": "oracle_cap",
    "BCTL_DEFAULT_SOLVER": "default_solver",
    "LOG_LEVEL": "log_level",
}

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class BenchSettings(BaseModel):
    """Size grid for the path-DP benchmark."""

    sizes: list[int] = [50, 100, 150, 200]
    budget: int = Field(default=20, ge=0)
    repeats: int = Field(default=3, ge=1)
    seed: int = 0

    @field_validator("sizes")
    @classmethod
    def sizes_positive(cls, v: list[int]) -> list[int]:
        if not v or any(size < 1 for size in v):
            raise ValueError("bench sizes must be a non-empty list of positive integers")
        return v


class Settings(BaseModel):
    oracle_cap: int = Field(default=DEFAULT_ORACLE_CAP, ge=1, le=30)
    default_solver: str = "auto"
    log_level: str = "INFO"
    bench: BenchSettings = BenchSettings()

    @field_validator("default_solver")
    @classmethod
    def solver_is_known(cls, v: str) -> str:
        from bundle_control.polysolve import SOLVERS

        if v != "auto" and v not in SOLVERS:
            raise ValueError(f"unknown solver {v!r}; choose from auto, {', '.join(SOLVERS)}")
        return v

    @field_validator("log_level")
    @classmethod
    def level_is_known(cls, v: str) -> str:
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        return level


def discover_config_file(explicit_path: Path | None = None) -> Path | None:
    """Find the config file to use.

    Search order:
    1. Explicit --config path
    2. ./.bctl.yaml
    3. ./config.yaml
    4. ~/.config/bundle-control/config.yaml

    Args:
        explicit_path: Optional explicit config path from CLI

    Returns:
        Path to config file if found, None otherwise
    """
    if explicit_path:
        if explicit_path.exists():
            logger.debug(f"Using explicit config: {explicit_path}")
            return explicit_path
        raise ValueError(f"Config file not found: {explicit_path}")

    for candidate in (
        Path.cwd() / LOCAL_CONFIG_NAME,
        Path.cwd() / "config.yaml",
        CONFIG_DIR / "config.yaml",
    ):
        if candidate.exists():
            logger.debug(f"Found config: {candidate}")
            return candidate

    logger.debug(f"No config file found ({LOCAL_CONFIG_NAME}, config.yaml, or {CONFIG_DIR})")
    return None


def _load_env(config_file: Path | None) -> dict[str, str]:
    env_file = (config_file.parent if config_file else Path.cwd()) / ".env"
    env: dict[str, str] = {}
    if env_file.exists():
        logger.debug(f"Loading .env from {env_file}")
        env.update(
            (key, value)
            for key, value in dotenv_values(env_file).items()
            if key in ENV_KEYS and value
        )
    for key in ENV_KEYS:
        os_value = os.getenv(key)
        if os_value:
            env[key] = os_value
    return env


def load_settings(config_path: Path | None = None) -> Settings:
    """Load settings from the discovered config file, with environment overrides.

    Args:
        config_path: Optional explicit config path

    Returns:
        Validated settings; defaults when no file and no variables are present
    """
    config_file = discover_config_file(config_path)
    data: dict[str, object] = {}
    if config_file:
        try:
            with config_file.open() as f:
                loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid config: {e}") from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ValueError("Invalid config: file must be a YAML mapping/object")
        data.update(loaded or {})

    for key, value in _load_env(config_file).items():
        data[ENV_KEYS[key]] = value if key != "BCTL_ORACLE_CAP" else _as_int(key, value)

    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        raise ValueError(f"Invalid config: {e}") from e


def _as_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Invalid config: {key} must be an integer, got {value!r}") from None
