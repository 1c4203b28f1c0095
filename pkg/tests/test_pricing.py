import numpy as np
import pytest

from market.pricing import (
    PricingScheme,
    best_response,
    check_decoupling,
    extract_prices,
    extract_rlmp,
    extract_rtlmp,
    own_prices,
    uniform_price_series,
)
from market.model import find_participant
from market.scenario import simulate


@pytest.fixture
def toy_rolling(toy_scenario):
    return simulate(toy_scenario)


@pytest.fixture
def storage_rolling(storage_scenario):
    return simulate(storage_scenario)


class TestRollingLmp:
    """Testy jednolitej ceny R-LMP"""

    def test_toy_prices(self, toy_rolling):
        prices = extract_rlmp(toy_rolling)
        assert prices.scheme is PricingScheme.RLMP
        np.testing.assert_allclose(prices.demand, [30.0, 30.0])
        np.testing.assert_allclose(prices.generator, [[30.0, 30.0], [30.0, 30.0]])

    def test_toy_ramping_components(self, toy_rolling):
        prices = extract_rlmp(toy_rolling)
        # G1: Δμ into interval 2 from window 1 is −5, Δμ into interval 2 from window 2 is +5
        np.testing.assert_allclose(prices.ramping[0], [-5.0, -5.0], atol=1e-9)
        np.testing.assert_allclose(prices.ramping[1], [0.0, 0.0], atol=1e-9)

    def test_storage_prices(self, storage_rolling):
        prices = extract_rlmp(storage_rolling)
        np.testing.assert_allclose(prices.demand, [3.0, 12.0, 3.0])
        np.testing.assert_allclose(prices.discharge[0], [3.0, 12.0, 3.0])
        np.testing.assert_allclose(prices.soc, 0.0, atol=1e-9)

    def test_extract_prices_dispatches_on_scheme(self, toy_rolling):
        assert extract_prices(toy_rolling, PricingScheme.RLMP).scheme is PricingScheme.RLMP
        assert extract_prices(toy_rolling, PricingScheme.RTLMP).scheme is PricingScheme.RTLMP


class TestRollingTlmp:
    """Testy cen R-TLMP specyficznych dla uczestników"""

    def test_toy_prices(self, toy_rolling):
        prices = extract_rtlmp(toy_rolling)
        np.testing.assert_allclose(prices.demand, [30.0, 30.0])
        np.testing.assert_allclose(prices.generator[0], [25.0, 25.0])
        np.testing.assert_allclose(prices.generator[1], [30.0, 30.0])

    def test_storage_prices_match_lmp(self, storage_rolling):
        # SOC never binds, so φ = 0 and both schemes coincide
        tlmp, lmp = extract_rtlmp(storage_rolling), extract_rlmp(storage_rolling)
        np.testing.assert_allclose(tlmp.discharge, lmp.discharge, atol=1e-9)
        np.testing.assert_allclose(tlmp.charge, lmp.charge, atol=1e-9)
        np.testing.assert_allclose(tlmp.generator, lmp.generator, atol=1e-9)

    def test_efficiency_enters_esr_prices(self, storage_scenario):
        rolling = simulate(storage_scenario)
        soc = np.array([[2.0, 0.0, 0.0]])
        window = rolling.windows[0]
        window.soc_price[:, 0] = soc[:, 0]
        esr = storage_scenario.esrs[0].model_copy(update={"discharge_efficiency": 0.8, "charge_efficiency": 0.5})
        prices = extract_rtlmp(rolling, esrs=[esr])
        assert prices.discharge[0, 0] == pytest.approx(3.0 - 2.0 / 0.8)
        assert prices.charge[0, 0] == pytest.approx(3.0 - 0.5 * 2.0)

    def test_spec_mismatch(self, toy_rolling, storage_esr):
        with pytest.raises(ValueError):
            extract_rtlmp(toy_rolling, esrs=[storage_esr])


class TestDecoupling:
    """Dyspozycja jako najlepsza odpowiedź na własną cenę"""

    def test_tlmp_decouples(self, toy_scenario, toy_rolling):
        prices = extract_rtlmp(toy_rolling)
        assert check_decoupling(toy_rolling, prices, toy_scenario.truthful_bids()) == []

    def test_lmp_misses_ramp_limited_generator(self, toy_scenario, toy_rolling):
        prices = extract_rlmp(toy_rolling)
        mismatches = check_decoupling(toy_rolling, prices, toy_scenario.truthful_bids())
        assert {m.participant for m in mismatches} == {"G1"}
        assert all(m.best_low == 500.0 for m in mismatches)

    def test_storage_decouples_under_both(self, storage_scenario, storage_rolling):
        bids = storage_scenario.truthful_bids()
        for scheme in PricingScheme:
            assert check_decoupling(storage_rolling, extract_prices(storage_rolling, scheme), bids) == []


class TestBestResponse:
    """Testy odpowiedzi przy ustalonej cenie"""

    def test_seller_in_the_money(self):
        assert best_response(30.0, 25.0, 0.0, 100.0) == (100.0, 100.0)

    def test_seller_out_of_the_money(self):
        assert best_response(20.0, 25.0, 10.0, 100.0) == (10.0, 10.0)

    def test_indifferent(self):
        assert best_response(25.0, 25.0, 0.0, 100.0) == (0.0, 100.0)

    def test_buyer(self):
        assert best_response(3.0, 5.3, 0.0, 1.0, buying=True) == (1.0, 1.0)
        assert best_response(12.0, 5.3, 0.0, 1.0, buying=True) == (0.0, 0.0)


class TestUniformPriceSeries:
    """Testy jednolitej serii cen z wektora"""

    def test_tiles_across_participants(self):
        prices = uniform_price_series([10.0, 20.0], num_generators=3, num_esrs=1)
        assert prices.generator.shape == (3, 2)
        np.testing.assert_array_equal(prices.charge[0], [10.0, 20.0])
        assert not prices.any_degenerate

    def test_matches(self, toy_rolling):
        lmp = extract_rlmp(toy_rolling)
        assert lmp.matches(uniform_price_series([30.0, 30.0], 2, 0), tol=1e-9)
        assert not lmp.matches(uniform_price_series([30.0, 31.0], 2, 0), tol=1e-9)
        assert not lmp.matches(extract_rtlmp(toy_rolling))

    def test_own_prices(self, storage_scenario, storage_rolling):
        prices = extract_rlmp(storage_rolling)
        esr = find_participant(list(storage_scenario.generators), list(storage_scenario.esrs), "ESR1")
        assert set(own_prices(prices, esr)) == {"discharge", "charge"}
        g2 = find_participant(list(storage_scenario.generators), list(storage_scenario.esrs), "G2")
        np.testing.assert_allclose(own_prices(prices, g2)["generation"], [3.0, 12.0, 3.0])
