"""
Configuration Module

JSON run configuration (RunConfig) and environment-driven runtime settings.

RunConfig validators raise ValueError; pydantic turns them into a
ValidationError carrying field paths, which load_config renders as a
ConfigValidationError.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from market.errors import ConfigParseError, ConfigValidationError
from market.forecast import load_mean_profile
from market.model import EsrSpec, GeneratorSpec, MarketConfig, validate

logger = logging.getLogger('runner')

SCHEMES = ("lmp", "tlmp")
DIRECTIONS = ("discharge_up", "discharge_down", "charge_up", "charge_down", "generator_up", "generator_down")
ESR_DIRECTIONS = DIRECTIONS[:4]


class Settings(BaseSettings):
    """Runtime settings read from MARKETSIM_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="MARKETSIM_")

    log_level: str = "INFO"
    jobs: int = 1
    output_dir: str = "results"
    float_format: str = "%.9g"


# ═══════════════════════════════════════════════════════════
# RUN CONFIGURATION
# ═══════════════════════════════════════════════════════════

class ScriptedForecast(BaseModel):
    """Explicit realization plus the forecasts issued at every interval."""

    realization: list[float]
    windows: list[list[float]] = Field(default_factory=list)


class ForecastSettings(BaseModel):
    mean_profile: list[float] | None = None
    mean_profile_csv: str | None = None
    sigma_load: float = 0.04
    sigma_step: float = 0.006
    relative: bool = True
    scripted: ScriptedForecast | None = None

    @field_validator("sigma_load", "sigma_step")
    @classmethod
    def validate_sigma(cls, v):
        if v < 0:
            raise ValueError("standard deviation must be nonnegative")
        return v

    @model_validator(mode="after")
    def validate_source(self):
        if self.mean_profile is None and self.scripted is None:
            raise ValueError("one of mean_profile, mean_profile_csv or scripted is required")
        if self.mean_profile is not None and any(v <= 0 for v in self.mean_profile):
            raise ValueError("mean_profile must be positive in every interval")
        return self


class ExperimentSettings(BaseModel):
    schemes: list[str] = Field(default_factory=lambda: list(SCHEMES))
    scenarios: int = 500
    seed: int = 0
    epsilon: float = 0.01
    participant: str | None = None
    directions: list[str] = Field(default_factory=lambda: list(ESR_DIRECTIONS))
    audit_horizons: list[int] = Field(default_factory=lambda: [6, 12, 18, 24])
    soc_capacities: list[float] = Field(default_factory=list)
    output_dir: str | None = None

    @field_validator("schemes")
    @classmethod
    def validate_schemes(cls, v):
        unknown = [s for s in v if s not in SCHEMES]
        if unknown or not v:
            raise ValueError(f"schemes must be a non-empty subset of {list(SCHEMES)}, got {v}")
        return v

    @field_validator("directions")
    @classmethod
    def validate_directions(cls, v):
        unknown = [d for d in v if d not in DIRECTIONS]
        if unknown:
            raise ValueError(f"unknown perturbation directions {unknown}")
        return v

    @field_validator("scenarios")
    @classmethod
    def validate_scenarios(cls, v):
        if v < 1:
            raise ValueError("scenario count must be at least 1")
        return v

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v):
        if v < 0:
            raise ValueError("epsilon must be nonnegative")
        return v

    @field_validator("soc_capacities")
    @classmethod
    def validate_capacities(cls, v):
        if any(c <= 0 for c in v):
            raise ValueError("SOC capacities must be positive")
        return v


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    market: MarketConfig = Field(default_factory=MarketConfig)
    generators: list[GeneratorSpec]
    esrs: list[EsrSpec] = Field(default_factory=list)
    forecast: ForecastSettings
    experiment: ExperimentSettings = Field(default_factory=ExperimentSettings)

    @model_validator(mode="after")
    def validate_market(self):
        violations = validate(self.market, self.generators, self.esrs)
        T = self.market.horizon
        if self.forecast.scripted is not None:
            if len(self.forecast.scripted.realization) != T:
                violations.append(f"forecast.scripted.realization: expected {T} intervals")
        elif self.forecast.mean_profile is not None and len(self.forecast.mean_profile) < T:
            violations.append(f"forecast.mean_profile: profile shorter than horizon {T}")
        if self.experiment.participant is not None:
            names = {g.name for g in self.generators} | {e.name for e in self.esrs}
            if self.experiment.participant not in names:
                violations.append(f"experiment.participant: unknown participant {self.experiment.participant}")
        if violations:
            raise ValueError("; ".join(violations))
        return self

    @property
    def perturbed_participant(self) -> str:
        """Participant named in the experiment block, else the first ESR, else the first generator."""
        if self.experiment.participant:
            return self.experiment.participant
        if self.esrs:
            return self.esrs[0].name
        return self.generators[0].name


def _render(error: ValidationError) -> list[str]:
    messages = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"])
        message = item["msg"].removeprefix("Value error, ")
        messages.append(f"{path}: {message}" if path else message)
    return messages


def parse_config(data: dict, base_dir: Path | None = None) -> RunConfig:
    """
    Validate a config mapping, resolving mean_profile_csv against base_dir.

    Raises:
        ConfigParseError: unreadable demand profile
        ConfigValidationError: any violated field, with its path
    """
    forecast = data.get("forecast")
    if isinstance(forecast, dict) and forecast.get("mean_profile_csv") and forecast.get("mean_profile") is None:
        csv_path = Path(forecast["mean_profile_csv"])
        if not csv_path.is_absolute() and base_dir is not None:
            csv_path = base_dir / csv_path
        data = {**data, "forecast": {**forecast, "mean_profile": load_mean_profile(csv_path).tolist()}}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError(_render(e)) from e


def load_config(path: str | Path) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Raises:
        ConfigParseError: missing file or malformed JSON
        ConfigValidationError: semantic violations rendered with field paths
    """
    path = Path(path)
    if not path.exists():
        raise ConfigParseError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigParseError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigParseError(f"{path}: top-level JSON value must be an object")

    config = parse_config(data, base_dir=path.parent)
    logger.info(
        f"✓ Loaded {path.name}: T={config.market.horizon}, W={config.market.window}, "
        f"{len(config.generators)} generators, {len(config.esrs)} ESRs"
    )
    return config


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form; changes iff the content changes."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
