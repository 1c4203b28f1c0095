"""
Scenario Module

One scenario = a market, a realized demand trace and the forecaster that
feeds the rolling windows. Scenario seeds are base_seed + scenario_id, so a
scenario is reproducible on its own whatever batch it runs in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from market.config import RunConfig
from market.dispatch import RollingDispatch, roll_horizon
from market.errors import MarketSimError, ScenarioFailed
from market.forecast import Forecaster, PerfectForecaster, RandomWalkForecaster, ScriptedForecaster, realize
from market.model import BidParameter, EsrSpec, GeneratorSpec, MarketConfig, truthful_bids

logger = logging.getLogger('runner')


@dataclass(frozen=True, eq=False)
class Scenario:
    scenario_id: int
    config: MarketConfig
    generators: tuple[GeneratorSpec, ...]
    esrs: tuple[EsrSpec, ...]
    demand: np.ndarray
    forecaster: Forecaster
    seed: int | None = None

    @property
    def horizon(self) -> int:
        return self.config.horizon

    def truthful_bids(self) -> BidParameter:
        return truthful_bids(list(self.generators), list(self.esrs), self.horizon)

    def with_esrs(self, esrs: list[EsrSpec]) -> Scenario:
        return replace(self, esrs=tuple(esrs))


def simulate(scenario: Scenario, bids: BidParameter | None = None) -> RollingDispatch:
    """Rolling-window dispatch of a scenario; truthful bids by default."""
    bids = bids if bids is not None else scenario.truthful_bids()
    return roll_horizon(
        scenario.config,
        list(scenario.generators),
        list(scenario.esrs),
        bids,
        scenario.demand,
        scenario.forecaster,
    )


def _guarded(func, scenario: Scenario, kwargs: dict):
    try:
        return func(scenario, **kwargs)
    except ScenarioFailed:
        raise
    except MarketSimError as e:
        raise ScenarioFailed(scenario.scenario_id, e) from e


def map_scenarios(func, scenarios: list[Scenario], jobs: int = 1, **kwargs) -> list:
    """
    Apply func(scenario, **kwargs) to every scenario, in parallel when jobs != 1.

    Results come back in scenario order whatever order the workers finish in.

    Raises:
        ScenarioFailed: wrapping the first domain error, with its scenario id
    """
    if jobs == 1 or len(scenarios) <= 1:
        return [_guarded(func, scenario, kwargs) for scenario in scenarios]
    return Parallel(n_jobs=jobs)(delayed(_guarded)(func, scenario, kwargs) for scenario in scenarios)


def build_scenarios(
    run: RunConfig,
    count: int | None = None,
    seed: int | None = None,
    horizon: int | None = None,
) -> list[Scenario]:
    """
    Scenarios of a run configuration, ordered by id.

    A scripted forecast yields exactly one scenario. Otherwise every scenario
    draws its own realization around the first T intervals of the mean
    profile, and its forecaster is a random walk on that realization.

    Args:
        count: number of scenarios (experiment.scenarios by default)
        seed: base seed (experiment.seed by default)
        horizon: shorter horizon for condition-frequency studies
    """
    count = run.experiment.scenarios if count is None else count
    seed = run.experiment.seed if seed is None else seed
    market = run.market
    if horizon is not None and horizon != market.horizon:
        market = market.model_copy(update={"horizon": horizon, "window": min(market.window, horizon)})
    T = market.horizon
    generators, esrs = tuple(run.generators), tuple(run.esrs)
    forecast = run.forecast

    if forecast.scripted is not None:
        if count > 1:
            logger.warning(f"⚠ Scripted forecast defines a single scenario; ignoring count {count}")
        demand = np.array(forecast.scripted.realization[:T], dtype=float)
        forecaster = ScriptedForecaster(demand, forecast.scripted.windows)
        return [Scenario(0, market, generators, esrs, demand, forecaster, seed)]

    mean = np.array(forecast.mean_profile[:T], dtype=float)
    scenarios = []
    for scenario_id in range(count):
        scenario_seed = seed + scenario_id
        draw = realize(mean, forecast.sigma_load, scenario_seed, forecast.sigma_step, forecast.relative)
        if forecast.sigma_step == 0:
            forecaster = PerfectForecaster(draw.realization)
        else:
            forecaster = RandomWalkForecaster(draw)
        scenarios.append(Scenario(scenario_id, market, generators, esrs, draw.realization, forecaster, scenario_seed))
    logger.info(f"Built {len(scenarios)} scenarios (T={T}, base seed {seed})")
    return scenarios
