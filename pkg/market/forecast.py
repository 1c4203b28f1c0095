"""
Demand Forecast Module

Demand realizations around a mean profile and rolling forecasts whose error
accumulates as a Gaussian random walk over the look-ahead.

Randomness is keyed: every draw comes from a substream identified by
(seed, purpose, interval), so running scenarios in any order or in parallel
never changes the numbers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np
import pandas as pd

from market.errors import ConfigParseError, IndexOutOfHorizon

logger = logging.getLogger('forecast')

FLOOR_FRACTION = 0.01

_REALIZATION_STREAM = 0
_FORECAST_STREAM = 1


def _substream(seed: int, stream: int, t: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, t)))


@dataclass(frozen=True)
class DemandScenario:
    mean: np.ndarray
    realization: np.ndarray
    seed: int
    sigma_load: float
    sigma_step: float = 0.0
    relative: bool = True

    @property
    def horizon(self) -> int:
        return self.realization.size

    def floor(self, t: int) -> float:
        return FLOOR_FRACTION * self.mean[t]

    def step_scale(self, t: int, sigma_step: float) -> float:
        return sigma_step * self.mean[t] if self.relative else sigma_step


def realize(
    mean,
    sigma_load: float,
    seed: int,
    sigma_step: float = 0.0,
    relative: bool = True,
) -> DemandScenario:
    """
    Draw one demand realization d_t = mean_t·(1 + ν_t), ν_t ~ N(0, σ²).

    In absolute mode σ is in MW and d_t = mean_t + ν_t. Draws are clamped at
    1% of the mean so demand stays positive.
    """
    mean = np.asarray(mean, dtype=float)
    if (mean <= 0).any():
        raise ValueError("mean demand must be positive in every interval")

    noise = _substream(seed, _REALIZATION_STREAM).standard_normal(mean.size)
    if relative:
        realization = mean * (1.0 + sigma_load * noise)
    else:
        realization = mean + sigma_load * noise
    realization = np.maximum(realization, FLOOR_FRACTION * mean)
    return DemandScenario(
        mean=mean,
        realization=realization,
        seed=seed,
        sigma_load=sigma_load,
        sigma_step=sigma_step,
        relative=relative,
    )


def _cumulative_errors(seed: int, t: int, steps: int) -> np.ndarray:
    if steps <= 0:
        return np.zeros(0)
    return np.cumsum(_substream(seed, _FORECAST_STREAM, t).standard_normal(steps))


def forecast(
    scenario: DemandScenario,
    t: int,
    k: int,
    sigma_step: float | None = None,
    seed: int | None = None,
) -> float:
    """
    k-step-ahead forecast d̂_{(t+k)|t} = d_{t+k} + scale·Σ_{i≤k} ε_i.

    The increments ε_i are the first k draws of the (seed, t) substream, so
    forecasts issued at the same t share their first k increments.

    Raises:
        IndexOutOfHorizon: t or t+k outside the horizon, or k < 0
    """
    if k < 0 or t < 0 or t + k >= scenario.horizon:
        raise IndexOutOfHorizon(f"forecast for interval {t + k + 1} issued at {t + 1} is outside horizon {scenario.horizon}")
    if k == 0:
        return float(scenario.realization[t])

    sigma_step = scenario.sigma_step if sigma_step is None else sigma_step
    seed = scenario.seed if seed is None else seed
    target = t + k
    error = _cumulative_errors(seed, t, k)[-1]
    value = scenario.realization[target] + scenario.step_scale(target, sigma_step) * error
    return float(max(value, scenario.floor(target)))


# ═══════════════════════════════════════════════════════════
# FORECASTERS
# ═══════════════════════════════════════════════════════════

class Forecaster(Protocol):
    def window(self, t: int, length: int) -> np.ndarray:
        """Forecasts for intervals t..t+length-1 issued at t."""
        ...


class PerfectForecaster:
    def __init__(self, demand):
        self.demand = np.asarray(demand, dtype=float)

    def window(self, t: int, length: int) -> np.ndarray:
        if t < 0 or t + length > self.demand.size:
            raise IndexOutOfHorizon(f"window {t + 1}..{t + length} exceeds horizon {self.demand.size}")
        return self.demand[t:t + length].copy()


class RandomWalkForecaster:
    """Random-walk forecast errors around a DemandScenario."""

    def __init__(self, scenario: DemandScenario, sigma_step: float | None = None, seed: int | None = None):
        self.scenario = scenario
        self.sigma_step = scenario.sigma_step if sigma_step is None else sigma_step
        self.seed = scenario.seed if seed is None else seed

    def window(self, t: int, length: int) -> np.ndarray:
        if t < 0 or length < 1 or t + length > self.scenario.horizon:
            raise IndexOutOfHorizon(f"window {t + 1}..{t + length} exceeds horizon {self.scenario.horizon}")
        values = self.scenario.realization[t:t + length].copy()
        if length == 1 or self.sigma_step == 0:
            return values

        errors = _cumulative_errors(self.seed, t, length - 1)
        for k in range(1, length):
            target = t + k
            value = values[k] + self.scenario.step_scale(target, self.sigma_step) * errors[k - 1]
            values[k] = max(value, self.scenario.floor(target))
        return values


class ScriptedForecaster:
    """
    Forecasts taken from an explicit table: row t holds the forecasts issued
    at t. Missing rows or short rows fall back to the realized demand.
    """

    def __init__(self, demand, windows: list[list[float]]):
        self.demand = np.asarray(demand, dtype=float)
        self.windows = [list(row) for row in windows]

    def window(self, t: int, length: int) -> np.ndarray:
        if t < 0 or t + length > self.demand.size:
            raise IndexOutOfHorizon(f"window {t + 1}..{t + length} exceeds horizon {self.demand.size}")
        values = self.demand[t:t + length].copy()
        if t < len(self.windows):
            scripted = self.windows[t][:length]
            values[:len(scripted)] = scripted
        values[0] = self.demand[t]
        return values


def load_mean_profile(path: str | Path) -> np.ndarray:
    """
    Read a mean demand profile from CSV with columns (interval, mw).

    Rows are ordered by the interval column; the header names are not fixed,
    the first two columns are used.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigParseError(f"demand profile not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigParseError(f"cannot parse demand profile {path}: {e}") from e
    if frame.shape[1] < 2:
        raise ConfigParseError(f"demand profile {path} needs an interval column and an MW column")

    frame = frame.sort_values(frame.columns[0])
    profile = pd.to_numeric(frame.iloc[:, 1], errors="coerce").to_numpy(dtype=float)
    if np.isnan(profile).any():
        raise ConfigParseError(f"demand profile {path} contains non-numeric MW values")
    logger.info(f"Loaded {profile.size}-interval demand profile from {path}")
    return profile
