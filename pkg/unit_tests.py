"""
Testy jednostkowe modeli konfiguracji
Testowane komponenty:
1. Modele walidacyjne Pydantic (ForecastSettings, ExperimentSettings, RunConfig)
2. Ustawienia środowiskowe (Settings)
3. Renderowanie błędów walidacji (parse_config)
"""

import pytest
from pydantic import ValidationError

from market.config import (
    ExperimentSettings,
    ForecastSettings,
    RunConfig,
    ScriptedForecast,
    Settings,
    parse_config,
)
from market.errors import ConfigValidationError


def toy_config(**overrides):
    data = {
        "market": {"horizon": 2, "window": 2},
        "generators": [
            {"name": "G1", "capacity_max": 500, "capacity_min": 0, "ramp_up": 30, "ramp_down": 30,
             "marginal_cost": 25.0, "initial_output": 370},
            {"name": "G2", "capacity_max": 100, "capacity_min": 0, "ramp_up": 100, "ramp_down": 100,
             "marginal_cost": 30.0, "initial_output": 50},
        ],
        "forecast": {"scripted": {"realization": [420, 450], "windows": [[420, 350], [450]]}},
    }
    data.update(overrides)
    return data


# testy modelu ForecastSettings - prognoza popytu

class TestForecastSettings:
    """Testy walidacji dla modelu ForecastSettings"""

    # testy pozytywne

    def test_valid_profile(self):
        """Test poprawnego profilu średniego"""
        settings = ForecastSettings(mean_profile=[250.0, 260.0])
        assert settings.sigma_load == 0.04
        assert settings.sigma_step == 0.006
        assert settings.relative

    def test_scripted_only(self):
        """Test prognozy skryptowej bez profilu"""
        settings = ForecastSettings(scripted=ScriptedForecast(realization=[1.0, 2.0]))
        assert settings.mean_profile is None
        assert settings.scripted.windows == []

    def test_zero_sigma_allowed(self):
        """Test zerowego odchylenia (prognoza doskonała)"""
        settings = ForecastSettings(mean_profile=[100.0], sigma_load=0.0, sigma_step=0.0)
        assert settings.sigma_step == 0.0

    # testy negatywne

    def test_negative_sigma(self):
        """Test ujemnego odchylenia standardowego"""
        with pytest.raises(ValidationError) as exc_info:
            ForecastSettings(mean_profile=[100.0], sigma_step=-0.1)
        assert any("standard deviation must be nonnegative" in str(error) for error in exc_info.value.errors())

    def test_no_source(self):
        """Test braku źródła popytu"""
        with pytest.raises(ValidationError) as exc_info:
            ForecastSettings()
        assert any("is required" in str(error) for error in exc_info.value.errors())

    def test_nonpositive_profile(self):
        """Test profilu z wartością zerową"""
        with pytest.raises(ValidationError) as exc_info:
            ForecastSettings(mean_profile=[100.0, 0.0])
        assert any("must be positive" in str(error) for error in exc_info.value.errors())


# testy modelu ExperimentSettings - eksperymenty

class TestExperimentSettings:
    """Testy walidacji dla modelu ExperimentSettings"""

    # testy pozytywne

    def test_defaults(self):
        """Test wartości domyślnych"""
        settings = ExperimentSettings()
        assert settings.schemes == ["lmp", "tlmp"]
        assert settings.scenarios == 500
        assert settings.epsilon == 0.01
        assert settings.directions == ["discharge_up", "discharge_down", "charge_up", "charge_down"]
        assert settings.audit_horizons == [6, 12, 18, 24]

    def test_single_scheme(self):
        """Test pojedynczego schematu cenowego"""
        assert ExperimentSettings(schemes=["tlmp"]).schemes == ["tlmp"]

    def test_generator_directions(self):
        """Test kierunków perturbacji generatora"""
        settings = ExperimentSettings(directions=["generator_up", "generator_down"])
        assert len(settings.directions) == 2

    # testy negatywne

    def test_unknown_scheme(self):
        """Test nieznanego schematu cenowego"""
        with pytest.raises(ValidationError) as exc_info:
            ExperimentSettings(schemes=["vcg"])
        assert any("non-empty subset" in str(error) for error in exc_info.value.errors())

    def test_empty_schemes(self):
        """Test pustej listy schematów"""
        with pytest.raises(ValidationError):
            ExperimentSettings(schemes=[])

    def test_unknown_direction(self):
        """Test nieznanego kierunku perturbacji"""
        with pytest.raises(ValidationError) as exc_info:
            ExperimentSettings(directions=["sideways"])
        assert any("unknown perturbation directions" in str(error) for error in exc_info.value.errors())

    def test_zero_scenarios(self):
        """Test zerowej liczby scenariuszy"""
        with pytest.raises(ValidationError):
            ExperimentSettings(scenarios=0)

    def test_negative_epsilon(self):
        """Test ujemnego epsilon"""
        with pytest.raises(ValidationError):
            ExperimentSettings(epsilon=-0.5)

    def test_nonpositive_soc_capacity(self):
        """Test niedodatniej pojemności magazynu"""
        with pytest.raises(ValidationError):
            ExperimentSettings(soc_capacities=[10.0, 0.0])


# testy modelu RunConfig - pełna konfiguracja przebiegu

class TestRunConfig:
    """Testy walidacji dla modelu RunConfig"""

    # testy pozytywne

    def test_valid_toy(self):
        """Test poprawnej konfiguracji rynku dwóch generatorów"""
        config = RunConfig.model_validate(toy_config())
        assert config.market.horizon == 2
        assert config.esrs == []

    def test_frozen(self):
        """Test niemodyfikowalności konfiguracji"""
        config = RunConfig.model_validate(toy_config())
        with pytest.raises(ValidationError):
            config.market = None

    def test_perturbed_participant_default_generator(self):
        """Test domyślnego uczestnika bez magazynów"""
        assert RunConfig.model_validate(toy_config()).perturbed_participant == "G1"

    def test_perturbed_participant_explicit(self):
        """Test jawnie wskazanego uczestnika"""
        config = RunConfig.model_validate(toy_config(experiment={"participant": "G2"}))
        assert config.perturbed_participant == "G2"

    # testy negatywne

    def test_window_zero(self):
        """Test okna o długości zero"""
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate(toy_config(market={"horizon": 2, "window": 0}))
        assert "market.window" in str(exc_info.value)

    def test_scripted_length_mismatch(self):
        """Test realizacji o złej długości"""
        data = toy_config(forecast={"scripted": {"realization": [420.0]}})
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate(data)
        assert "forecast.scripted.realization" in str(exc_info.value)

    def test_profile_shorter_than_horizon(self):
        """Test profilu krótszego niż horyzont"""
        data = toy_config(market={"horizon": 3, "window": 2}, forecast={"mean_profile": [400.0, 410.0]})
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate(data)
        assert "shorter than horizon" in str(exc_info.value)

    def test_unknown_participant(self):
        """Test nieistniejącego uczestnika eksperymentu"""
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate(toy_config(experiment={"participant": "ESR9"}))
        assert "unknown participant ESR9" in str(exc_info.value)

    def test_missing_generators(self):
        """Test braku listy generatorów"""
        data = toy_config()
        del data["generators"]
        with pytest.raises(ValidationError):
            RunConfig.model_validate(data)


# testy parse_config - renderowanie błędów

class TestParseConfig:
    """Testy zamiany ValidationError na ConfigValidationError"""

    def test_violations_have_paths(self):
        """Test ścieżek pól w komunikatach"""
        with pytest.raises(ConfigValidationError) as exc_info:
            parse_config(toy_config(experiment={"scenarios": 0}))
        assert exc_info.value.violations == ["experiment.scenarios: scenario count must be at least 1"]

    def test_inline_profile_kept(self):
        """Test profilu podanego wprost"""
        data = toy_config(forecast={"mean_profile": [400.0, 410.0]})
        assert parse_config(data).forecast.mean_profile == [400.0, 410.0]

    def test_csv_profile_resolved_against_base_dir(self, tmp_path):
        """Test ścieżki CSV względem katalogu konfiguracji"""
        (tmp_path / "profile.csv").write_text("interval,mw\n1,400\n2,410\n")
        data = toy_config(forecast={"mean_profile_csv": "profile.csv"})
        assert parse_config(data, base_dir=tmp_path).forecast.mean_profile == [400.0, 410.0]


# testy Settings - zmienne środowiskowe

class TestSettings:
    """Testy ustawień środowiskowych MARKETSIM_*"""

    def test_defaults(self, monkeypatch):
        """Test wartości domyślnych"""
        for name in ("MARKETSIM_LOG_LEVEL", "MARKETSIM_JOBS", "MARKETSIM_OUTPUT_DIR", "MARKETSIM_FLOAT_FORMAT"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.jobs == 1
        assert settings.output_dir == "results"

    def test_environment_override(self, monkeypatch):
        """Test nadpisania przez zmienną środowiskową"""
        monkeypatch.setenv("MARKETSIM_JOBS", "4")
        monkeypatch.setenv("MARKETSIM_LOG_LEVEL", "DEBUG")
        settings = Settings()
        assert settings.jobs == 4
        assert settings.log_level == "DEBUG"
