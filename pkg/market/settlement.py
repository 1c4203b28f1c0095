"""
Settlement Module

Self-schedule profits, lost opportunity cost (LOC) uplifts and the money
flows of a scenario under one price series.

LOC is measured with bid-in costs: the best profit a participant could make
by scheduling itself at the published prices minus the bid-cost surplus of
the plan it was dispatched to. Surplus is measured with true costs. Keeping
the two cost bases apart is the whole point of this module.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from market.dispatch import RollingDispatch
from market.errors import TooLarge
from market.model import (
    BidParameter,
    EsrSpec,
    GeneratorSpec,
    Participant,
    ParticipantKind,
    participants,
    truthful_bids,
)
from market.pricing import PriceSeries, PricingScheme, uniform_price_series
from market.solver import LpProblem, LpSolution, solve_lp

logger = logging.getLogger('settlement')


# ═══════════════════════════════════════════════════════════
# SELF-SCHEDULE PROBLEMS
# ═══════════════════════════════════════════════════════════

def esr_schedule_problem(
    discharge_prices,
    charge_prices,
    esr: EsrSpec,
    discharge_bids,
    charge_bids,
    duration: float = 1.0,
) -> LpProblem:
    """
    Profit-maximizing ESR schedule as a minimization LP.

    Variables are pᴰ (T), pᶜ (T), e (T). The SOC rows read
    e_{t−1} + h·ξᶜpᶜ_t − h·pᴰ_t/ξᴰ − e_t = 0, the same orientation as the
    dispatch window, so their duals are directly comparable with φ.
    """
    discharge_prices = np.asarray(discharge_prices, dtype=float)
    charge_prices = np.asarray(charge_prices, dtype=float)
    T = discharge_prices.size
    h = duration

    c = np.concatenate([
        h * (np.asarray(discharge_bids, dtype=float) - discharge_prices),
        h * (charge_prices - np.asarray(charge_bids, dtype=float)),
        np.zeros(T),
    ])
    eq = np.zeros((T, 3 * T))
    eq_rhs = np.zeros(T)
    for t in range(T):
        eq[t, t] = -h / esr.discharge_efficiency
        eq[t, T + t] = h * esr.charge_efficiency
        eq[t, 2 * T + t] = -1.0
        if t == 0:
            eq_rhs[t] = -esr.soc_initial
        else:
            eq[t, 2 * T + t - 1] = 1.0

    lower = np.concatenate([np.zeros(2 * T), np.full(T, esr.soc_min)])
    upper = np.concatenate([
        np.full(T, esr.discharge_capacity),
        np.full(T, esr.charge_capacity),
        np.full(T, esr.soc_max),
    ])
    return LpProblem.build(c, eq, eq_rhs, None, None, lower, upper)


def generator_schedule_problem(prices, gen: GeneratorSpec, bids, duration: float = 1.0) -> LpProblem:
    """
    Profit-maximizing generator schedule with capacity and ramp limits.

    Ramp rows mirror the dispatch window: two rows into every interval, the
    first pair anchored at the initial output.
    """
    prices = np.asarray(prices, dtype=float)
    T = prices.size
    c = duration * (np.asarray(bids, dtype=float) - prices)
    ub = np.zeros((2 * T, T))
    ub_rhs = np.zeros(2 * T)
    for t in range(T):
        up, down = 2 * t, 2 * t + 1
        ub[up, t] = 1.0
        ub[down, t] = -1.0
        if t == 0:
            ub_rhs[up] = gen.ramp_up + gen.initial_output
            ub_rhs[down] = gen.ramp_down - gen.initial_output
        else:
            ub[up, t - 1] = -1.0
            ub[down, t - 1] = 1.0
            ub_rhs[up] = gen.ramp_up
            ub_rhs[down] = gen.ramp_down
    return LpProblem.build(
        c, None, None, ub, ub_rhs,
        np.full(T, gen.capacity_min), np.full(T, gen.capacity_max),
    )


@dataclass
class SelfSchedule:
    participant: Participant
    profit: float
    output: np.ndarray | None = None
    discharge: np.ndarray | None = None
    charge: np.ndarray | None = None
    soc: np.ndarray | None = None
    duals: dict[str, np.ndarray] = field(default_factory=dict)
    degenerate: bool = False
    dual_degenerate: bool = False
    lp_solution: LpSolution | None = field(default=None, repr=False)


def self_schedule_esr(
    discharge_prices,
    charge_prices,
    esr: EsrSpec,
    discharge_bids,
    charge_bids,
    duration: float = 1.0,
    participant: Participant | None = None,
) -> SelfSchedule:
    """
    Best schedule of an ESR at fixed prices.

    Uniform schemes pass the same series as discharge and charge prices.
    Always feasible: staying idle keeps the SOC at its initial value.
    """
    problem = esr_schedule_problem(discharge_prices, charge_prices, esr, discharge_bids, charge_bids, duration)
    solution = solve_lp(problem)
    T = problem.num_vars // 3
    x = solution.x
    return SelfSchedule(
        participant=participant or Participant(ParticipantKind.ESR, 0, esr.name),
        profit=-solution.objective_value,
        discharge=x[:T].copy(),
        charge=x[T:2 * T].copy(),
        soc=x[2 * T:].copy(),
        duals={
            "psi": solution.y_eq.copy(),
            "omega_lower": solution.z_lower[2 * T:].copy(),
            "omega_upper": solution.z_upper[2 * T:].copy(),
            "zeta_discharge_lower": solution.z_lower[:T] / duration,
            "zeta_discharge_upper": solution.z_upper[:T] / duration,
            "zeta_charge_lower": solution.z_lower[T:2 * T] / duration,
            "zeta_charge_upper": solution.z_upper[T:2 * T] / duration,
        },
        degenerate=solution.degenerate,
        dual_degenerate=solution.dual_degenerate,
        lp_solution=solution,
    )


def self_schedule_generator(
    prices,
    gen: GeneratorSpec,
    bids,
    duration: float = 1.0,
    participant: Participant | None = None,
) -> SelfSchedule:
    """Best generator schedule at fixed prices, honouring caps and ramps from g[0]."""
    problem = generator_schedule_problem(prices, gen, bids, duration)
    solution = solve_lp(problem)
    return SelfSchedule(
        participant=participant or Participant(ParticipantKind.GENERATOR, 0, gen.name),
        profit=-solution.objective_value,
        output=solution.x.copy(),
        duals={
            "ramp_up": solution.y_ub[0::2] / duration,
            "ramp_down": solution.y_ub[1::2] / duration,
            "zeta_lower": solution.z_lower / duration,
            "zeta_upper": solution.z_upper / duration,
        },
        degenerate=solution.degenerate,
        dual_degenerate=solution.dual_degenerate,
        lp_solution=solution,
    )


# ═══════════════════════════════════════════════════════════
# SURPLUS AND LOC
# ═══════════════════════════════════════════════════════════

def dispatched_surplus(
    prices: PriceSeries,
    rolling: RollingDispatch,
    participant: Participant,
    bids: BidParameter,
) -> float:
    """Surplus of the dispatched plan at the participant's prices, with `bids` as costs."""
    h = rolling.config.interval_duration
    k = participant.index
    if participant.is_esr:
        return float(h * (
            (prices.discharge[k] - bids.discharge[k]) @ rolling.discharge[k]
            + (bids.charge[k] - prices.charge[k]) @ rolling.charge[k]
        ))
    return float(h * (prices.generator[k] - bids.generator[k]) @ rolling.generator_output[k])


def self_schedule(
    prices: PriceSeries,
    rolling: RollingDispatch,
    participant: Participant,
    bids: BidParameter,
) -> SelfSchedule:
    h = rolling.config.interval_duration
    k = participant.index
    if participant.is_esr:
        return self_schedule_esr(
            prices.discharge[k], prices.charge[k], rolling.esrs[k],
            bids.discharge[k], bids.charge[k], h, participant,
        )
    return self_schedule_generator(prices.generator[k], rolling.generators[k], bids.generator[k], h, participant)


@dataclass
class LocResult:
    participant: Participant
    loc: float
    self_schedule_profit: float
    dispatched_surplus: float
    schedule: SelfSchedule = field(repr=False)


def loc_breakdown(
    prices: PriceSeries,
    rolling: RollingDispatch,
    participant: Participant,
    bids: BidParameter,
) -> LocResult:
    schedule = self_schedule(prices, rolling, participant, bids)
    surplus = dispatched_surplus(prices, rolling, participant, bids)
    return LocResult(
        participant=participant,
        loc=schedule.profit - surplus,
        self_schedule_profit=schedule.profit,
        dispatched_surplus=surplus,
        schedule=schedule,
    )


def compute_loc(
    prices: PriceSeries,
    rolling: RollingDispatch,
    participant: Participant,
    bids: BidParameter,
) -> float:
    """
    Lost opportunity cost: self-schedule profit minus the bid-cost surplus of
    the dispatched plan. Nonnegative up to solver tolerance, since the
    dispatched plan is one of the self-schedule's feasible plans.
    """
    return loc_breakdown(prices, rolling, participant, bids).loc


# ═══════════════════════════════════════════════════════════
# SETTLEMENT
# ═══════════════════════════════════════════════════════════

@dataclass
class ParticipantSettlement:
    participant: Participant
    energy_revenue: float
    true_cost: float
    surplus: float
    loc: float
    degenerate: bool = False

    @property
    def profit(self) -> float:
        return self.surplus + self.loc


@dataclass
class SettlementRecord:
    scheme: PricingScheme
    participants: list[ParticipantSettlement]
    energy_payment: float
    merchandising_surplus: float
    total_loc: float
    consumer_payment: float
    retained_surplus: float = 0.0
    degenerate: bool = False

    def __getitem__(self, name: str) -> ParticipantSettlement:
        for entry in self.participants:
            if entry.participant.name == name:
                return entry
        raise KeyError(name)

    @property
    def participant_revenue(self) -> float:
        return sum(p.energy_revenue for p in self.participants)

    @property
    def esr_profit(self) -> float:
        return sum(p.profit for p in self.participants if p.participant.is_esr)

    @property
    def max_loc(self) -> float:
        return max((p.loc for p in self.participants), default=0.0)


def settle(
    prices: PriceSeries,
    rolling: RollingDispatch,
    bids: BidParameter,
    true_bids: BidParameter | None = None,
) -> SettlementRecord:
    """
    Settle one scenario under one price series.

    Consumers pay the demand price for realized demand. The operator's
    merchandising surplus (consumer payment minus participant revenues minus
    LOC uplifts) is rebated to consumers as a lump sum, so the operator
    retains nothing.
    """
    h = rolling.config.interval_duration
    true_bids = true_bids or truthful_bids(rolling.generators, rolling.esrs, rolling.horizon)

    entries = []
    for participant in participants(rolling.generators, rolling.esrs):
        k = participant.index
        if participant.is_esr:
            revenue = h * (prices.discharge[k] @ rolling.discharge[k] - prices.charge[k] @ rolling.charge[k])
            cost = h * (true_bids.discharge[k] @ rolling.discharge[k] - true_bids.charge[k] @ rolling.charge[k])
        else:
            revenue = h * prices.generator[k] @ rolling.generator_output[k]
            cost = h * true_bids.generator[k] @ rolling.generator_output[k]
        loc = loc_breakdown(prices, rolling, participant, bids)
        entries.append(ParticipantSettlement(
            participant=participant,
            energy_revenue=float(revenue),
            true_cost=float(cost),
            surplus=float(revenue - cost),
            loc=float(loc.loc),
            degenerate=loc.schedule.dual_degenerate,
        ))

    energy_payment = float(h * prices.demand @ rolling.demand)
    total_loc = sum(e.loc for e in entries)
    merchandising = energy_payment - sum(e.energy_revenue for e in entries) - total_loc
    record = SettlementRecord(
        scheme=prices.scheme,
        participants=entries,
        energy_payment=energy_payment,
        merchandising_surplus=merchandising,
        total_loc=total_loc,
        consumer_payment=energy_payment - merchandising,
        retained_surplus=0.0,
        degenerate=prices.any_degenerate,
    )
    logger.debug(
        f"{prices.scheme.label} settlement: consumer payment {record.consumer_payment:.2f}, "
        f"merchandising surplus {merchandising:.2f}, total LOC {total_loc:.4f}"
    )
    return record


# ═══════════════════════════════════════════════════════════
# UNIFORM PRICE GRID ORACLE
# ═══════════════════════════════════════════════════════════

@dataclass
class GridSearchResult:
    best_prices: np.ndarray
    best_total_loc: float
    evaluated: int


def uniform_price_grid_search(
    rolling: RollingDispatch,
    bids: BidParameter,
    step: float = 0.5,
    upper: float | None = None,
    max_points: int = 250_000,
) -> GridSearchResult:
    """
    Smallest total LOC over uniform price vectors on a grid.

    The grid spans [0, upper] in every interval, upper defaulting to twice the
    highest bid. Only practical for very short horizons.
    """
    if upper is None:
        highest = max(
            (block.max() for block in (bids.generator, bids.discharge, bids.charge) if block.size),
            default=0.0,
        )
        upper = 2.0 * highest
    grid = np.arange(0.0, upper + step / 2, step)
    T = rolling.horizon
    if grid.size ** T > max_points:
        raise TooLarge(f"grid of {grid.size}^{T} price vectors exceeds {max_points}")

    members = participants(rolling.generators, rolling.esrs)
    N, M = len(rolling.generators), len(rolling.esrs)
    best_prices, best_loc, evaluated = None, np.inf, 0
    for vector in itertools.product(grid, repeat=T):
        prices = uniform_price_series(np.array(vector), N, M)
        total = sum(compute_loc(prices, rolling, p, bids) for p in members)
        evaluated += 1
        if total < best_loc:
            best_prices, best_loc = np.array(vector), total
    logger.info(f"Grid search over {evaluated} uniform price vectors: minimum total LOC {best_loc:.6g}")
    return GridSearchResult(best_prices=best_prices, best_total_loc=float(best_loc), evaluated=evaluated)
