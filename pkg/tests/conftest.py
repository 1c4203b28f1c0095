import numpy as np
import pytest

from market.forecast import PerfectForecaster, ScriptedForecaster
from market.model import EsrSpec, GeneratorSpec, MarketConfig
from market.scenario import Scenario


def make_scenario(config, generators, esrs, demand, forecaster=None, scenario_id=0):
    demand = np.asarray(demand, dtype=float)
    return Scenario(
        scenario_id=scenario_id,
        config=config,
        generators=tuple(generators),
        esrs=tuple(esrs),
        demand=demand,
        forecaster=forecaster or PerfectForecaster(demand),
    )


# testy - rynek dwóch generatorów (G1 tani z ograniczonym rampowaniem)

@pytest.fixture
def toy_generators():
    return [
        GeneratorSpec(name="G1", capacity_max=500, capacity_min=0, ramp_up=30, ramp_down=30,
                      marginal_cost=25, initial_output=370),
        GeneratorSpec(name="G2", capacity_max=100, capacity_min=0, ramp_up=100, ramp_down=100,
                      marginal_cost=30, initial_output=50),
    ]


@pytest.fixture
def toy_scenario(toy_generators):
    """T=2, W=2; the first window forecasts 350 MW for an interval that realizes 450 MW"""
    demand = [420.0, 450.0]
    config = MarketConfig(horizon=2, window=2)
    forecaster = ScriptedForecaster(demand, [[420.0, 350.0], [450.0]])
    return make_scenario(config, toy_generators, [], demand, forecaster)


# testy - trzy interwały z magazynem energii

@pytest.fixture
def storage_esr():
    return EsrSpec(name="ESR1", discharge_capacity=1, charge_capacity=1, soc_min=0, soc_max=10, soc_initial=4,
                   discharge_cost=9.9, charge_cost=5.3)


@pytest.fixture
def storage_scenario(storage_esr):
    """Cheap-expensive-cheap demand: the ESR charges, discharges, charges"""
    generators = [
        GeneratorSpec(name="G1", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=3, initial_output=50),
        GeneratorSpec(name="G2", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=12, initial_output=0),
    ]
    return make_scenario(MarketConfig(horizon=3, window=3), generators, [storage_esr], [50.0, 150.0, 50.0])


@pytest.fixture
def single_interval_scenario():
    generators = [
        GeneratorSpec(name="G1", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=10, initial_output=50),
        GeneratorSpec(name="G2", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=20, initial_output=50),
    ]
    return make_scenario(MarketConfig(horizon=1, window=1), generators, [], [150.0])


@pytest.fixture
def scenario_factory():
    return make_scenario


# testy - dwa magazyny o różnych kosztach, oba krańcowe w pierwszym interwale

@pytest.fixture
def two_storage_scenario():
    """
    The first window expects a 12 $/MWh peak and saves ESR2's energy for it;
    the peak does not come, so neither ESR touches a SOC limit afterwards.
    """
    generators = [
        GeneratorSpec(name="G1", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=5, initial_output=100),
        GeneratorSpec(name="G3", capacity_max=100, capacity_min=0, ramp_up=1000, ramp_down=1000,
                      marginal_cost=12, initial_output=0),
    ]
    esrs = [
        EsrSpec(name="ESR1", discharge_capacity=1, charge_capacity=1, soc_min=0, soc_max=100, soc_initial=50,
                discharge_cost=9.9, charge_cost=4.0),
        EsrSpec(name="ESR2", discharge_capacity=1, charge_capacity=1, soc_min=0, soc_max=10, soc_initial=1.5,
                discharge_cost=9.0, charge_cost=3.0),
    ]
    demand = [101.0, 50.0]
    forecaster = ScriptedForecaster(demand, [[101.0, 110.0], [50.0]])
    return make_scenario(MarketConfig(horizon=2, window=2), generators, esrs, demand, forecaster)
