import numpy as np
import pytest

from market.dispatch import PriorState, build_window, roll_horizon, solve_static, solve_window
from market.errors import ComplementarityViolated, InfeasibleWindow
from market.model import EsrSpec, GeneratorSpec, MarketConfig, truthful_bids
from market.scenario import simulate
from market.solver import check_kkt


def random_market(rng: np.random.Generator):
    """Ramps never bind and minimum output is zero, so every window is feasible."""
    T = int(rng.integers(2, 6))
    generators = []
    for n in range(int(rng.integers(1, 4))):
        cap = rng.uniform(50, 150)
        generators.append(GeneratorSpec(
            name=f"G{n + 1}", capacity_max=cap, capacity_min=0, ramp_up=cap, ramp_down=cap,
            marginal_cost=rng.uniform(5, 30), initial_output=rng.uniform(0, cap),
        ))
    esrs = []
    for i in range(int(rng.integers(0, 3))):
        soc_max = rng.uniform(5, 20)
        esrs.append(EsrSpec(
            name=f"ESR{i + 1}", discharge_capacity=rng.uniform(1, 10), charge_capacity=rng.uniform(1, 10),
            soc_max=soc_max, soc_initial=rng.uniform(0, soc_max),
            discharge_cost=rng.uniform(10, 30), charge_cost=rng.uniform(1, 9),
        ))
    total = sum(g.capacity_max for g in generators)
    demand = rng.uniform(0.1, 0.9, T) * total
    return MarketConfig(horizon=T, window=T), generators, esrs, demand


class TestBuildWindow:
    """Testy budowy LP okna"""

    def test_dimensions(self, storage_scenario):
        config, gens, esrs = storage_scenario.config, list(storage_scenario.generators), list(storage_scenario.esrs)
        problem = build_window(config, gens, esrs, storage_scenario.truthful_bids(),
                               PriorState.initial(gens, esrs), storage_scenario.demand, 0)
        # 2 generators + 3 ESR blocks, 3 intervals each
        assert problem.lp.num_vars == 15
        assert problem.lp.eq_matrix.shape[0] == 3 + 3
        assert problem.lp.ub_matrix.shape[0] == 2 * 2 * 3

    def test_solution_certified(self, toy_scenario):
        gens = list(toy_scenario.generators)
        problem = build_window(toy_scenario.config, gens, [], toy_scenario.truthful_bids(),
                               PriorState.initial(gens, []), [420.0, 350.0], 0)
        window = solve_window(problem)
        assert check_kkt(problem.lp, window.lp_solution, tol=1e-7) == []

    # testy negatywne

    def test_forecast_length_mismatch(self, toy_scenario):
        gens = list(toy_scenario.generators)
        with pytest.raises(ValueError):
            build_window(toy_scenario.config, gens, [], toy_scenario.truthful_bids(),
                         PriorState.initial(gens, []), [420.0], 0)


class TestRollingDispatch:
    """Testy dyspozycji w oknie kroczącym"""

    # testy pozytywne

    def test_toy_binding_dispatch(self, toy_scenario):
        rolling = simulate(toy_scenario)
        np.testing.assert_allclose(rolling.generator_output[0], [380.0, 410.0], atol=1e-7)
        np.testing.assert_allclose(rolling.generator_output[1], [40.0, 40.0], atol=1e-7)
        assert len(rolling.windows) == 2
        assert rolling.windows[0].length == 2
        assert rolling.windows[1].length == 1

    def test_toy_window_duals(self, toy_scenario):
        first = simulate(toy_scenario).windows[0]
        assert first.energy_price[0] == pytest.approx(30.0)
        # the look-ahead ramp-down row caps G1 at 380 in the binding interval
        assert first.ramp_down_price[0, 1] == pytest.approx(5.0)
        assert first.ramp_up_price[0, 0] == pytest.approx(0.0, abs=1e-9)

    def test_second_window_ramp_up_binds(self, toy_scenario):
        second = simulate(toy_scenario).windows[1]
        assert second.energy_price[0] == pytest.approx(30.0)
        assert second.ramp_up_price[0, 0] == pytest.approx(5.0)

    def test_storage_dispatch(self, storage_scenario):
        rolling = simulate(storage_scenario)
        np.testing.assert_allclose(rolling.charge[0], [1.0, 0.0, 1.0], atol=1e-7)
        np.testing.assert_allclose(rolling.discharge[0], [0.0, 1.0, 0.0], atol=1e-7)
        np.testing.assert_allclose(rolling.soc[0], [5.0, 4.0, 5.0], atol=1e-7)
        np.testing.assert_allclose(rolling.generator_output[0], [51.0, 100.0, 51.0], atol=1e-7)
        np.testing.assert_allclose(rolling.generator_output[1], [0.0, 49.0, 0.0], atol=1e-7)

    def test_balance_holds_every_interval(self, storage_scenario):
        rolling = simulate(storage_scenario)
        supplied = rolling.generator_output.sum(axis=0) + rolling.discharge.sum(axis=0) - rolling.charge.sum(axis=0)
        np.testing.assert_allclose(supplied, rolling.demand, atol=1e-7)

    def test_soc_before(self, storage_scenario):
        rolling = simulate(storage_scenario)
        assert rolling.soc_before(0, 0) == 4.0
        assert rolling.soc_before(0, 2) == pytest.approx(4.0)
        assert rolling.output_before(0, 0) == 50.0

    def test_objective(self, toy_scenario):
        rolling = simulate(toy_scenario)
        assert rolling.objective(toy_scenario.truthful_bids()) == pytest.approx(25 * 790 + 30 * 80)

    def test_primal_degenerate_window_keeps_unique_duals(self, single_interval_scenario, scenario_factory):
        # demand equal to G1's capacity leaves a basic variable at its bound
        scenario = scenario_factory(single_interval_scenario.config, single_interval_scenario.generators, [], [100.0])
        rolling = simulate(scenario)
        assert rolling.degenerate[0]
        assert not rolling.dual_degenerate[0]
        assert not rolling.windows[0].lp_solution.dual_degenerate

    def test_toy_windows_not_dual_degenerate(self, toy_scenario):
        assert not simulate(toy_scenario).dual_degenerate.any()

    def test_duration_scales_duals_not_prices(self, single_interval_scenario):
        half = single_interval_scenario.config.model_copy(update={"interval_duration": 0.5})
        rolling = roll_horizon(half, list(single_interval_scenario.generators), [],
                               single_interval_scenario.truthful_bids(), single_interval_scenario.demand)
        assert rolling.windows[0].energy_price[0] == pytest.approx(20.0)

    # testy negatywne

    def test_demand_length_mismatch(self, toy_scenario):
        with pytest.raises(ValueError):
            roll_horizon(toy_scenario.config, list(toy_scenario.generators), [],
                         toy_scenario.truthful_bids(), [420.0])

    def test_demand_above_capacity(self, toy_scenario):
        with pytest.raises(InfeasibleWindow) as excinfo:
            roll_horizon(toy_scenario.config, list(toy_scenario.generators), [],
                         toy_scenario.truthful_bids(), [420.0, 1000.0])
        assert excinfo.value.t == 1

    def test_simultaneous_charge_and_discharge(self):
        # charge value above discharge cost breaks the relaxation assumption
        generator = GeneratorSpec(name="G1", capacity_max=100, capacity_min=0, ramp_up=100, ramp_down=100,
                                  marginal_cost=3, initial_output=50)
        esr = EsrSpec(name="ESR1", discharge_capacity=1, charge_capacity=1, soc_max=10, soc_initial=4,
                      discharge_cost=1.0, charge_cost=5.0)
        config = MarketConfig(horizon=1, window=1)
        with pytest.raises(ComplementarityViolated) as excinfo:
            roll_horizon(config, [generator], [esr], truthful_bids([generator], [esr], 1), [50.0])
        assert excinfo.value.esr == "ESR1"


class TestRollingMatchesStatic:
    """Z pełnym oknem i dokładną prognozą polityka krocząca jest optymalna"""

    def _check(self, count: int, seed: int):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            config, generators, esrs, demand = random_market(rng)
            bids = truthful_bids(generators, esrs, config.horizon)
            rolling = roll_horizon(config, generators, esrs, bids, demand)
            static = solve_static(config, generators, esrs, bids, demand)
            scale = max(1.0, abs(static.objective_value))
            assert abs(rolling.objective(bids) - static.objective_value) <= 1e-7 * scale
            assert np.all(rolling.discharge * rolling.charge <= 1e-6)

    def test_random_markets(self):
        self._check(50, seed=3)
