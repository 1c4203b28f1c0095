"""
Exception hierarchy for the market simulator.

Every error raised on purpose by the package derives from MarketSimError so the
command line entry point can map it to an exit code in one place. Errors with
structured fields define __reduce__ so they survive the trip back from joblib
worker processes.
"""


class MarketSimError(Exception):
    """Base class for all simulator errors"""


class MalformedProblem(MarketSimError):
    """LP data with inconsistent dimensions, NaN entries or crossed bounds"""


class TooLarge(MarketSimError):
    """Vertex enumeration requested for a problem with too many variables"""


class SolverError(MarketSimError):
    """Simplex failed to terminate within its iteration cap"""


class InfeasibleWindow(MarketSimError):
    def __init__(self, t: int, detail: str = ""):
        self.t = t
        self.detail = detail
        message = f"Dispatch window starting at interval {t + 1} is infeasible"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)

    def __reduce__(self):
        return (type(self), (self.t, self.detail))


class ComplementarityViolated(MarketSimError):
    def __init__(self, t: int, esr: str, product: float):
        self.t = t
        self.esr = esr
        self.product = product
        super().__init__(
            f"ESR {esr} charges and discharges simultaneously at interval {t + 1} "
            f"(gD*gC = {product:.3e})"
        )

    def __reduce__(self):
        return (type(self), (self.t, self.esr, self.product))


class NegativeQuantity(MarketSimError):
    """Bid cost evaluated at a negative quantity"""


class IndexOutOfHorizon(MarketSimError):
    """Forecast requested beyond the scheduling horizon"""


class ConfigParseError(MarketSimError):
    """Configuration file missing or not valid JSON"""


class ConfigValidationError(MarketSimError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("Invalid configuration:\n  " + "\n  ".join(self.violations))

    def __reduce__(self):
        return (type(self), (self.violations,))


class ScenarioFailed(MarketSimError):
    def __init__(self, scenario_id: int, cause: Exception):
        self.scenario_id = scenario_id
        self.cause = cause
        super().__init__(f"Scenario {scenario_id} failed: {cause}")

    def __reduce__(self):
        return (type(self), (self.scenario_id, self.cause))
