"""
Market Model Module

Static description of the market: horizon, generators, energy storage
resources (ESRs) and their linear bid curves.

Specs are frozen pydantic models that carry types only. Semantic checks live
in validate(), which collects every violation with a field path instead of
stopping at the first one; RunConfig turns a non-empty list into a
ValidationError.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from market.errors import NegativeQuantity


class MarketConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: int = 24
    window: int = 4
    interval_duration: float = 1.0


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    capacity_max: float
    capacity_min: float = 0.1
    ramp_up: float
    ramp_down: float
    marginal_cost: float
    initial_output: float


class EsrSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    discharge_capacity: float
    charge_capacity: float
    soc_min: float = 0.0
    soc_max: float
    soc_initial: float
    discharge_efficiency: float = 1.0
    charge_efficiency: float = 1.0
    discharge_cost: float
    charge_cost: float

    @property
    def round_trip_efficiency(self) -> float:
        return self.discharge_efficiency * self.charge_efficiency


class ParticipantKind(str, Enum):
    GENERATOR = "generator"
    ESR = "esr"


@dataclass(frozen=True)
class Participant:
    kind: ParticipantKind
    index: int
    name: str

    @property
    def is_esr(self) -> bool:
        return self.kind is ParticipantKind.ESR


def participants(generators: list[GeneratorSpec], esrs: list[EsrSpec]) -> list[Participant]:
    """All participants in settlement order: generators first, then ESRs."""
    result = [Participant(ParticipantKind.GENERATOR, n, g.name) for n, g in enumerate(generators)]
    result += [Participant(ParticipantKind.ESR, i, e.name) for i, e in enumerate(esrs)]
    return result


def find_participant(generators: list[GeneratorSpec], esrs: list[EsrSpec], name: str) -> Participant:
    for participant in participants(generators, esrs):
        if participant.name == name:
            return participant
    raise KeyError(f"unknown participant: {name}")


# ═══════════════════════════════════════════════════════════
# BIDS
# ═══════════════════════════════════════════════════════════

@dataclass(frozen=True)
class BidParameter:
    """
    Per-interval linear bid prices ($/MWh).

    Arrays are (participants × intervals): `generator` for generators,
    `discharge` and `charge` for ESRs. The charge bid is the value the ESR
    places on charging, so it enters the dispatch objective with a minus sign.
    """

    generator: np.ndarray
    discharge: np.ndarray
    charge: np.ndarray

    @property
    def horizon(self) -> int:
        for block in (self.generator, self.discharge, self.charge):
            if block.shape[0]:
                return block.shape[1]
        return self.generator.shape[1]

    def shifted(self, block: str, index: int, delta: float, intervals=None) -> BidParameter:
        """Copy with `delta` added to one participant's bids (all intervals by default)."""
        values = getattr(self, block).copy()
        if intervals is None:
            values[index, :] += delta
        else:
            values[index, list(intervals)] += delta
        return replace(self, **{block: values})


def bid_cost(theta: float, quantity: float) -> float:
    """
    Cost of a linear bid curve: θ·g.

    Raises:
        NegativeQuantity: quantity below zero
    """
    if quantity < 0:
        raise NegativeQuantity(f"bid cost evaluated at negative quantity {quantity}")
    return theta * quantity


def truthful_bids(generators: list[GeneratorSpec], esrs: list[EsrSpec], horizon: int) -> BidParameter:
    """Bids equal to every participant's true marginal cost in every interval."""
    ones = np.ones(horizon)
    return BidParameter(
        generator=np.array([g.marginal_cost * ones for g in generators]).reshape(len(generators), horizon),
        discharge=np.array([e.discharge_cost * ones for e in esrs]).reshape(len(esrs), horizon),
        charge=np.array([e.charge_cost * ones for e in esrs]).reshape(len(esrs), horizon),
    )


# ═══════════════════════════════════════════════════════════
# VALIDATION
# ═══════════════════════════════════════════════════════════

def _validate_generator(path: str, gen: GeneratorSpec) -> list[str]:
    violations = []
    if gen.capacity_min < 0:
        violations.append(f"{path}.capacity_min: minimum generation must be nonnegative")
    if gen.capacity_min > gen.capacity_max:
        violations.append(f"{path}.capacity_max: capacity_max must not be below capacity_min")
    if gen.ramp_up <= 0:
        violations.append(f"{path}.ramp_up: ramp must be positive")
    if gen.ramp_down <= 0:
        violations.append(f"{path}.ramp_down: ramp must be positive")
    if gen.marginal_cost < 0:
        violations.append(f"{path}.marginal_cost: cost must be nonnegative")
    if not gen.capacity_min <= gen.initial_output <= gen.capacity_max:
        violations.append(f"{path}.initial_output: initial output must lie within capacity limits")
    return violations


def _validate_esr(path: str, esr: EsrSpec) -> list[str]:
    violations = []
    if esr.discharge_capacity <= 0:
        violations.append(f"{path}.discharge_capacity: capacity must be positive")
    if esr.charge_capacity <= 0:
        violations.append(f"{path}.charge_capacity: capacity must be positive")
    if not esr.soc_min <= esr.soc_initial <= esr.soc_max:
        violations.append(f"{path}.soc_initial: initial SOC must lie within [soc_min, soc_max]")
    for field in ("discharge_efficiency", "charge_efficiency"):
        value = getattr(esr, field)
        if not 0 < value <= 1:
            violations.append(f"{path}.{field}: efficiency must lie in (0, 1]")
    if esr.discharge_cost < 0 or esr.charge_cost < 0:
        violations.append(f"{path}: costs must be nonnegative")
    if esr.round_trip_efficiency > 0 and esr.discharge_cost <= esr.charge_cost / esr.round_trip_efficiency:
        violations.append(
            f"{path}: relaxation assumption violated "
            f"(discharge cost {esr.discharge_cost} must exceed charge cost / round-trip efficiency)"
        )
    return violations


def _validate_bids(bids: BidParameter, generators, esrs, horizon: int) -> list[str]:
    expected = {
        "generator": (len(generators), horizon),
        "discharge": (len(esrs), horizon),
        "charge": (len(esrs), horizon),
    }
    violations = []
    for block, shape in expected.items():
        values = getattr(bids, block)
        if values.shape != shape:
            violations.append(f"bids.{block}: expected shape {shape}, got {values.shape}")
            continue
        if not np.isfinite(values).all():
            violations.append(f"bids.{block}: bids must be finite")
        elif (values < 0).any():
            violations.append(f"bids.{block}: bids must be nonnegative")
    if violations:
        return violations

    for i, esr in enumerate(esrs):
        limit = bids.charge[i] / esr.round_trip_efficiency
        if (bids.discharge[i] <= limit).any():
            violations.append(f"bids.esrs[{i}]: relaxation assumption violated by bid-in costs")
    return violations


def validate(
    config: MarketConfig,
    generators: list[GeneratorSpec],
    esrs: list[EsrSpec],
    bids: BidParameter | None = None,
) -> list[str]:
    """
    Check every standing assumption of the market model.

    Returns:
        list[str]: violations prefixed with their field path; empty when valid
    """
    violations = []
    if config.horizon < 1:
        violations.append("market.horizon: horizon must be at least 1")
    if not 1 <= config.window <= max(config.horizon, 1):
        violations.append("market.window: window must satisfy 1 <= W <= T")
    if config.interval_duration <= 0:
        violations.append("market.interval_duration: duration must be positive")

    names = [g.name for g in generators] + [e.name for e in esrs]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        violations.append(f"participants: duplicate names {duplicates}")

    for n, gen in enumerate(generators):
        violations += _validate_generator(f"generators[{n}]", gen)
    for i, esr in enumerate(esrs):
        violations += _validate_esr(f"esrs[{i}]", esr)
    if bids is not None:
        violations += _validate_bids(bids, generators, esrs, config.horizon)
    return violations
