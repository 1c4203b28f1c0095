"""
Pricing Module

Uniform rolling-window LMP (R-LMP) and discriminative rolling-window TLMP
(R-TLMP) built from the binding-interval duals of every window.

R-TLMP components, per binding interval t:
    demand           λ_t
    ESR discharge    λ_t − φ_it/ξᴰ
    ESR charge       λ_t − ξᶜ·φ_it
    generator        λ_t + Δμ_nt − Δμ_n(t−1),  Δμ = μ̄ − μ̲

Δμ_n(t−1) comes from the window's boundary ramp rows and Δμ_nt from the rows
between its first and second interval.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from market.dispatch import RollingDispatch
from market.model import BidParameter, EsrSpec, GeneratorSpec, Participant

logger = logging.getLogger('pricing')

PRICE_TOL = 1e-7
QUANTITY_TOL = 1e-6


class PricingScheme(str, Enum):
    RLMP = "lmp"
    RTLMP = "tlmp"

    @property
    def label(self) -> str:
        return "R-LMP" if self is PricingScheme.RLMP else "R-TLMP"


@dataclass
class PriceSeries:
    scheme: PricingScheme
    demand: np.ndarray
    generator: np.ndarray
    discharge: np.ndarray
    charge: np.ndarray
    energy: np.ndarray
    soc: np.ndarray
    ramping: np.ndarray
    ramping_delta: np.ndarray
    degenerate: np.ndarray

    @property
    def horizon(self) -> int:
        return self.demand.size

    @property
    def any_degenerate(self) -> bool:
        return bool(self.degenerate.any())

    def matches(self, other: PriceSeries, tol: float = 0.0) -> bool:
        """Same scheme and participant prices within tol."""
        if self.scheme is not other.scheme:
            return False
        pairs = zip(
            (self.demand, self.generator, self.discharge, self.charge),
            (other.demand, other.generator, other.discharge, other.charge),
        )
        return all(a.shape == b.shape and np.allclose(a, b, rtol=0.0, atol=tol) for a, b in pairs)


def _binding_components(rolling: RollingDispatch) -> tuple[np.ndarray, ...]:
    T = rolling.horizon
    N, M = len(rolling.generators), len(rolling.esrs)
    energy = np.zeros(T)
    soc = np.zeros((M, T))
    into_current = np.zeros((N, T))
    into_next = np.zeros((N, T))
    for t, window in enumerate(rolling.windows):
        energy[t] = window.energy_price[0]
        soc[:, t] = window.soc_price[:, 0]
        into_current[:, t] = window.ramp_delta(0)
        into_next[:, t] = window.ramp_delta(1)
    return energy, soc, into_current, into_next


def extract_rlmp(rolling: RollingDispatch) -> PriceSeries:
    """Uniform price π_t = λ_t of each window's binding interval."""
    energy, soc, into_current, into_next = _binding_components(rolling)
    N, M = len(rolling.generators), len(rolling.esrs)
    return PriceSeries(
        scheme=PricingScheme.RLMP,
        demand=energy.copy(),
        generator=np.tile(energy, (N, 1)),
        discharge=np.tile(energy, (M, 1)),
        charge=np.tile(energy, (M, 1)),
        energy=energy,
        soc=soc,
        ramping=into_next - into_current,
        ramping_delta=into_next,
        degenerate=rolling.degenerate,
    )


def extract_rtlmp(
    rolling: RollingDispatch,
    esrs: list[EsrSpec] | None = None,
    generators: list[GeneratorSpec] | None = None,
) -> PriceSeries:
    """Participant-specific R-TLMP from binding-interval duals."""
    esrs = rolling.esrs if esrs is None else esrs
    generators = rolling.generators if generators is None else generators
    energy, soc, into_current, into_next = _binding_components(rolling)
    ramping = into_next - into_current
    if len(generators) != ramping.shape[0] or len(esrs) != soc.shape[0]:
        raise ValueError("participant specs do not match the rolling dispatch")

    discharge_eff = np.array([e.discharge_efficiency for e in esrs]).reshape(-1, 1)
    charge_eff = np.array([e.charge_efficiency for e in esrs]).reshape(-1, 1)
    return PriceSeries(
        scheme=PricingScheme.RTLMP,
        demand=energy.copy(),
        generator=energy[None, :] + ramping,
        discharge=energy[None, :] - soc / discharge_eff,
        charge=energy[None, :] - charge_eff * soc,
        energy=energy,
        soc=soc,
        ramping=ramping,
        ramping_delta=into_next,
        degenerate=rolling.degenerate,
    )


def uniform_price_series(values, num_generators: int, num_esrs: int) -> PriceSeries:
    """Uniform price series from a bare price vector, for settlement what-ifs."""
    values = np.asarray(values, dtype=float)
    T = values.size
    return PriceSeries(
        scheme=PricingScheme.RLMP,
        demand=values.copy(),
        generator=np.tile(values, (num_generators, 1)),
        discharge=np.tile(values, (num_esrs, 1)),
        charge=np.tile(values, (num_esrs, 1)),
        energy=values.copy(),
        soc=np.zeros((num_esrs, T)),
        ramping=np.zeros((num_generators, T)),
        ramping_delta=np.zeros((num_generators, T)),
        degenerate=np.zeros(T, dtype=bool),
    )


def extract_prices(rolling: RollingDispatch, scheme: PricingScheme) -> PriceSeries:
    if scheme is PricingScheme.RLMP:
        return extract_rlmp(rolling)
    return extract_rtlmp(rolling)


# ═══════════════════════════════════════════════════════════
# SINGLE-INTERVAL DECOUPLING
# ═══════════════════════════════════════════════════════════

def best_response(
    price: float,
    bid: float,
    lower: float,
    upper: float,
    buying: bool = False,
    tol: float = PRICE_TOL,
) -> tuple[float, float]:
    """
    Profit-maximizing quantities of a single interval at a fixed price.

    Sellers earn (price − bid) per MWh, buyers (bid − price). Returns the
    interval of optimal quantities: a point when the margin is nonzero, the
    whole range when price and bid coincide within tol.
    """
    margin = bid - price if buying else price - bid
    if margin > tol:
        return upper, upper
    if margin < -tol:
        return lower, lower
    return lower, upper


@dataclass(frozen=True)
class DecouplingMismatch:
    participant: str
    t: int
    direction: str
    dispatched: float
    best_low: float
    best_high: float
    price: float
    bid: float


def check_decoupling(
    rolling: RollingDispatch,
    prices: PriceSeries,
    bids: BidParameter,
    tol: float = QUANTITY_TOL,
) -> list[DecouplingMismatch]:
    """
    Compare every binding quantity with its single-interval best response at
    the participant's own price. Under R-TLMP the list is empty.
    """
    mismatches = []

    def compare(name, t, direction, dispatched, price, bid, lower, upper, buying=False):
        low, high = best_response(price, bid, lower, upper, buying=buying)
        if dispatched < low - tol or dispatched > high + tol:
            mismatches.append(DecouplingMismatch(name, t, direction, float(dispatched), low, high, float(price), float(bid)))

    for t in range(rolling.horizon):
        for n, gen in enumerate(rolling.generators):
            compare(gen.name, t, "generation", rolling.generator_output[n, t],
                    prices.generator[n, t], bids.generator[n, t], gen.capacity_min, gen.capacity_max)
        for i, esr in enumerate(rolling.esrs):
            compare(esr.name, t, "discharge", rolling.discharge[i, t],
                    prices.discharge[i, t], bids.discharge[i, t], 0.0, esr.discharge_capacity)
            compare(esr.name, t, "charge", rolling.charge[i, t],
                    prices.charge[i, t], bids.charge[i, t], 0.0, esr.charge_capacity, buying=True)

    if mismatches:
        logger.debug(f"{len(mismatches)} participant-intervals deviate from their {prices.scheme.label} best response")
    return mismatches


def own_prices(prices: PriceSeries, participant: Participant) -> dict[str, np.ndarray]:
    """Price series a participant is settled at, keyed by direction."""
    if participant.is_esr:
        return {"discharge": prices.discharge[participant.index], "charge": prices.charge[participant.index]}
    return {"generation": prices.generator[participant.index]}
