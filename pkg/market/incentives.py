"""
Incentives Module

Bid-perturbation experiments for price-taking participants, the checker for
the conditions under which uniform rolling prices cannot remove storage LOC,
and an LP oracle that searches for a uniform price giving every participant
zero LOC.

Price-taker discipline: a perturbed bid is re-dispatched, and its energy
surplus is settled at the price series of the unperturbed run. The LOC
uplift is the operator's payment, so under R-TLMP it is computed against
the prices the perturbed run itself publishes; under R-LMP it uses the held
uniform prices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import block_diag

from market.dispatch import RollingDispatch
from market.model import BidParameter, Participant, find_participant, participants
from market.pricing import PriceSeries, PricingScheme, extract_prices, extract_rlmp, extract_rtlmp
from market.scenario import Scenario, map_scenarios, simulate
from market.settlement import (
    SelfSchedule,
    compute_loc,
    dispatched_surplus,
    esr_schedule_problem,
    generator_schedule_problem,
    loc_breakdown,
    self_schedule,
)
from market.solver import INFINITY, LpProblem, LpStatus, is_infinite, solve_lp

logger = logging.getLogger('incentives')

MARGINAL_FRACTION = 1e-6
ACTIVITY_TOL = 1e-7
PLAN_TOL = 1e-7


class Direction(str, Enum):
    DISCHARGE_UP = "discharge_up"
    DISCHARGE_DOWN = "discharge_down"
    CHARGE_UP = "charge_up"
    CHARGE_DOWN = "charge_down"
    GENERATOR_UP = "generator_up"
    GENERATOR_DOWN = "generator_down"

    @property
    def block(self) -> str:
        return self.value.split("_")[0]

    @property
    def sign(self) -> float:
        return 1.0 if self.value.endswith("_up") else -1.0

    @property
    def for_esr(self) -> bool:
        return self.block != "generator"


ESR_DIRECTIONS = (Direction.DISCHARGE_UP, Direction.DISCHARGE_DOWN, Direction.CHARGE_UP, Direction.CHARGE_DOWN)
GENERATOR_DIRECTIONS = (Direction.GENERATOR_UP, Direction.GENERATOR_DOWN)


def perturbed_bids(
    bids: BidParameter,
    participant: Participant,
    direction: Direction,
    epsilon: float,
    intervals=None,
) -> BidParameter:
    """Shift one participant's bid block by ±epsilon (all intervals by default)."""
    if direction.for_esr != participant.is_esr:
        raise ValueError(f"direction {direction.value} does not apply to {participant.kind.value} {participant.name}")
    return bids.shifted(direction.block, participant.index, direction.sign * epsilon, intervals)


# ═══════════════════════════════════════════════════════════
# PROFIT UNDER A BID
# ═══════════════════════════════════════════════════════════

@dataclass
class ProfitBreakdown:
    participant: Participant
    surplus: float
    loc: float
    prices: PriceSeries = field(repr=False)
    rolling: RollingDispatch = field(repr=False)
    schedule: SelfSchedule = field(repr=False)

    @property
    def profit(self) -> float:
        return self.surplus + self.loc


def profit_under_bid(
    bids: BidParameter,
    scenario: Scenario,
    scheme: PricingScheme,
    participant: Participant,
    reference_prices: PriceSeries | None = None,
    true_bids: BidParameter | None = None,
) -> ProfitBreakdown:
    """
    Profit Π(θ) = true-cost surplus of the dispatched plan + LOC at bid costs.

    With reference_prices given the surplus is settled at those fixed prices
    (price taker); otherwise prices are extracted from this run under
    `scheme`. R-TLMP LOC always uses this run's own R-TLMP.

    Raises:
        InfeasibleWindow: propagated from the rolling dispatch
    """
    rolling = simulate(scenario, bids)
    prices = reference_prices if reference_prices is not None else extract_prices(rolling, scheme)
    true_bids = true_bids if true_bids is not None else scenario.truthful_bids()
    surplus = dispatched_surplus(prices, rolling, participant, true_bids)
    uplift_prices = prices
    if scheme is PricingScheme.RTLMP and reference_prices is not None:
        uplift_prices = extract_rtlmp(rolling)
    loc = loc_breakdown(uplift_prices, rolling, participant, bids)
    return ProfitBreakdown(
        participant=participant,
        surplus=surplus,
        loc=loc.loc,
        prices=prices,
        rolling=rolling,
        schedule=loc.schedule,
    )


def predicted_profit_slope(
    prices: PriceSeries,
    rolling: RollingDispatch,
    participant: Participant,
    bids: BidParameter,
    direction: Direction,
) -> float:
    """
    dΠ/dε for a uniform bid shift in `direction`, valid while both the
    dispatch and the self-schedule stay put.

    Generators: Σh(g − p*); discharge: Σh(gᴰ − pᴰ*); charge: Σh(pᶜ* − gᶜ),
    with p* the self-schedule at the fixed prices.
    """
    schedule = self_schedule(prices, rolling, participant, bids)
    h = rolling.config.interval_duration
    k = participant.index
    if direction.block == "generator":
        slope = rolling.generator_output[k].sum() - schedule.output.sum()
    elif direction.block == "discharge":
        slope = rolling.discharge[k].sum() - schedule.discharge.sum()
    else:
        slope = schedule.charge.sum() - rolling.charge[k].sum()
    return float(direction.sign * h * slope)


# ═══════════════════════════════════════════════════════════
# PERTURBATION SWEEP
# ═══════════════════════════════════════════════════════════

@dataclass
class PerturbationResult:
    participant: str
    direction: Direction
    epsilon: float
    scheme: PricingScheme
    scenario_ids: np.ndarray
    delta_profit: np.ndarray
    degenerate: np.ndarray
    dispatch_changed: np.ndarray

    @property
    def n(self) -> int:
        return int(self.delta_profit.size)

    @property
    def mean(self) -> float:
        return float(self.delta_profit.mean()) if self.n else 0.0

    @property
    def std(self) -> float:
        return float(self.delta_profit.std(ddof=1)) if self.n > 1 else 0.0

    @property
    def eligible(self) -> np.ndarray:
        """Scenarios whose base dispatch has no dual-degenerate window."""
        return ~self.degenerate

    @property
    def excluded(self) -> int:
        return int((~self.eligible).sum())

    @property
    def max_eligible(self) -> float:
        values = self.delta_profit[self.eligible]
        return float(values.max()) if values.size else float("-inf")

    def as_row(self) -> dict:
        return {
            "participant": self.participant,
            "scheme": self.scheme.value,
            "direction": self.direction.value,
            "epsilon": self.epsilon,
            "n": self.n,
            "mean_delta_profit": self.mean,
            "std_delta_profit": self.std,
            "max_delta_profit": float(self.delta_profit.max()) if self.n else 0.0,
            "eligible": int(self.eligible.sum()),
            "excluded_degenerate": int(self.degenerate.sum()),
            "dispatch_changed": int(self.dispatch_changed.sum()),
        }


def _plan_changed(base: RollingDispatch, other: RollingDispatch, participant: Participant) -> bool:
    k = participant.index
    if participant.is_esr:
        pairs = ((base.discharge[k], other.discharge[k]), (base.charge[k], other.charge[k]))
    else:
        pairs = ((base.generator_output[k], other.generator_output[k]),)
    return any(not np.allclose(a, b, rtol=0.0, atol=PLAN_TOL) for a, b in pairs)


def _scenario_deltas(
    scenario: Scenario,
    participant_name: str,
    epsilon: float,
    directions: tuple[Direction, ...],
    scheme: PricingScheme,
    base_bids: BidParameter | None,
) -> list[tuple[float, bool, bool]]:
    participant = find_participant(list(scenario.generators), list(scenario.esrs), participant_name)
    true_bids = scenario.truthful_bids()
    bids = base_bids if base_bids is not None else true_bids
    base = profit_under_bid(bids, scenario, scheme, participant, true_bids=true_bids)
    degenerate = bool(base.rolling.dual_degenerate.any())

    rows = []
    for direction in directions:
        perturbed = perturbed_bids(bids, participant, direction, epsilon)
        result = profit_under_bid(
            perturbed, scenario, scheme, participant,
            reference_prices=base.prices, true_bids=true_bids,
        )
        rows.append((
            result.profit - base.profit,
            degenerate,
            _plan_changed(base.rolling, result.rolling, participant),
        ))
    return rows


def perturbation_sweep(
    scenarios: list[Scenario],
    participant: str,
    epsilon: float,
    directions=ESR_DIRECTIONS,
    scheme: PricingScheme = PricingScheme.RTLMP,
    base_bids: BidParameter | None = None,
    jobs: int = 1,
) -> list[PerturbationResult]:
    """
    Matched-seed profit changes ΔΠ = Π(θ* ± ε) − Π(θ*), one result per direction.

    Base and perturbed runs of a scenario share its demand trace and
    forecaster, so ΔΠ carries no Monte Carlo noise.

    Raises:
        ValueError: negative epsilon or a direction foreign to the participant
        ScenarioFailed: a scenario's dispatch failed
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    directions = tuple(Direction(d) for d in directions)

    per_scenario = map_scenarios(
        _scenario_deltas, scenarios, jobs,
        participant_name=participant, epsilon=epsilon, directions=directions,
        scheme=scheme, base_bids=base_bids,
    )
    ids = np.array([s.scenario_id for s in scenarios], dtype=int)

    results = []
    for d, direction in enumerate(directions):
        rows = [scenario_rows[d] for scenario_rows in per_scenario]
        result = PerturbationResult(
            participant=participant,
            direction=direction,
            epsilon=epsilon,
            scheme=scheme,
            scenario_ids=ids,
            delta_profit=np.array([r[0] for r in rows], dtype=float),
            degenerate=np.array([r[1] for r in rows], dtype=bool),
            dispatch_changed=np.array([r[2] for r in rows], dtype=bool),
        )
        if result.excluded:
            logger.warning(
                f"⚠ {scheme.label} {direction.value}: {result.excluded} of {result.n} scenarios "
                f"with dual-degenerate windows"
            )
        logger.info(
            f"{scheme.label} {participant} {direction.value} ε={epsilon}: "
            f"mean ΔΠ {result.mean:.6g}, std {result.std:.6g}, n={result.n}"
        )
        results.append(result)
    return results


# ═══════════════════════════════════════════════════════════
# ZERO-LOC CONDITIONS FOR UNIFORM PRICES
# ═══════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Witness:
    first: str
    second: str
    t: int


@dataclass
class ConditionReport:
    scenario_id: int | None
    fired: bool
    witnesses: list[Witness]
    distinct_costs: bool
    both_marginal: bool
    soc_untouched: bool


def _is_marginal(rolling: RollingDispatch, i: int, t: int) -> bool:
    esr = rolling.esrs[i]
    for value, cap in ((rolling.discharge[i, t], esr.discharge_capacity), (rolling.charge[i, t], esr.charge_capacity)):
        margin = MARGINAL_FRACTION * cap
        if margin < value < cap - margin:
            return True
    return False


def _soc_untouched(rolling: RollingDispatch, i: int, t: int) -> bool:
    esr = rolling.esrs[i]
    margin = MARGINAL_FRACTION * (esr.soc_max - esr.soc_min)
    path = rolling.soc[i, t:]
    return bool(((path > esr.soc_min + margin) & (path < esr.soc_max - margin)).all())


def check_loc_conditions(
    rolling: RollingDispatch,
    bids: BidParameter,
    scenario_id: int | None = None,
    tol: float = 1e-9,
) -> ConditionReport:
    """
    Look for a pair of ESRs and an interval t* such that the two ESRs have
    distinct bid-in costs, both are marginal at t*, and neither reaches a SOC
    limit from t* to the end of the horizon. When such a witness exists no
    uniform price removes LOC for both.
    """
    witnesses = []
    distinct_any = marginal_any = untouched_any = False
    M = len(rolling.esrs)
    for i in range(M):
        for j in range(i + 1, M):
            for t in range(rolling.horizon):
                distinct = (
                    abs(bids.discharge[i, t] - bids.discharge[j, t]) > tol
                    and abs(bids.charge[i, t] - bids.charge[j, t]) > tol
                )
                marginal = _is_marginal(rolling, i, t) and _is_marginal(rolling, j, t)
                untouched = _soc_untouched(rolling, i, t) and _soc_untouched(rolling, j, t)
                distinct_any |= distinct
                marginal_any |= marginal
                untouched_any |= untouched
                if distinct and marginal and untouched:
                    witnesses.append(Witness(rolling.esrs[i].name, rolling.esrs[j].name, t))

    return ConditionReport(
        scenario_id=scenario_id,
        fired=bool(witnesses),
        witnesses=witnesses,
        distinct_costs=distinct_any,
        both_marginal=marginal_any,
        soc_untouched=untouched_any,
    )


@dataclass
class UniformPriceVerdict:
    exists_zero_loc_price: bool
    prices: np.ndarray | None
    status: LpStatus


def _kkt_block(problem: LpProblem, plan: np.ndarray):
    """
    Stationarity rows of one participant's self-schedule at its dispatched plan.

    Unknowns are (ψ, y, z_lower, z_upper); multipliers of constraints the
    plan leaves inactive are pinned to zero.
    """
    n = problem.num_vars
    m_eq, m_ub = problem.eq_matrix.shape[0], problem.ub_matrix.shape[0]
    matrix = np.hstack([-problem.eq_matrix.T, problem.ub_matrix.T, -np.eye(n), np.eye(n)])

    slack = problem.ub_rhs - problem.ub_matrix @ plan
    row_active = slack <= ACTIVITY_TOL * np.maximum(1.0, np.abs(problem.ub_rhs))
    at_lower = ~is_infinite(problem.lower_bounds) & (
        plan - problem.lower_bounds <= ACTIVITY_TOL * np.maximum(1.0, np.abs(problem.lower_bounds))
    )
    at_upper = ~is_infinite(problem.upper_bounds) & (
        problem.upper_bounds - plan <= ACTIVITY_TOL * np.maximum(1.0, np.abs(problem.upper_bounds))
    )

    lower = np.concatenate([np.full(m_eq, -INFINITY), np.zeros(m_ub + 2 * n)])
    upper = np.concatenate([
        np.full(m_eq, INFINITY),
        np.where(row_active, INFINITY, 0.0),
        np.where(at_lower, INFINITY, 0.0),
        np.where(at_upper, INFINITY, 0.0),
    ])
    return matrix, -problem.objective, lower, upper


def uniform_price_impossibility(rolling: RollingDispatch, bids: BidParameter) -> UniformPriceVerdict:
    """
    Search for one uniform price vector at which every participant's
    dispatched plan is an optimal self-schedule, i.e. all LOC are zero.

    The KKT system of every self-schedule at its dispatched plan is linear in
    the prices and the multipliers, so the search is a feasibility LP.
    Infeasible means no uniform price can remove all LOC.
    """
    T = rolling.horizon
    h = rolling.config.interval_duration
    zeros = np.zeros(T)
    identity = np.eye(T)

    price_maps, blocks, rhs, lowers, uppers = [], [], [], [], []
    for participant in participants(rolling.generators, rolling.esrs):
        k = participant.index
        if participant.is_esr:
            problem = esr_schedule_problem(zeros, zeros, rolling.esrs[k], bids.discharge[k], bids.charge[k], h)
            plan = np.concatenate([rolling.discharge[k], rolling.charge[k], rolling.soc[k]])
            price_map = np.vstack([-h * identity, h * identity, np.zeros((T, T))])
        else:
            problem = generator_schedule_problem(zeros, rolling.generators[k], bids.generator[k], h)
            plan = rolling.generator_output[k].copy()
            price_map = -h * identity
        block, b, lower, upper = _kkt_block(problem, plan)
        price_maps.append(price_map)
        blocks.append(block)
        rhs.append(b)
        lowers.append(lower)
        uppers.append(upper)

    eq_matrix = np.hstack([np.vstack(price_maps), block_diag(*blocks)])
    feasibility = LpProblem.build(
        np.zeros(eq_matrix.shape[1]),
        eq_matrix,
        np.concatenate(rhs),
        None,
        None,
        np.concatenate([np.full(T, -INFINITY)] + lowers),
        np.concatenate([np.full(T, INFINITY)] + uppers),
    )
    solution = solve_lp(feasibility)
    if solution.is_optimal:
        logger.debug(f"Uniform zero-LOC price found: {np.round(solution.x[:T], 6)}")
        return UniformPriceVerdict(True, solution.x[:T].copy(), solution.status)
    return UniformPriceVerdict(False, None, solution.status)


# ═══════════════════════════════════════════════════════════
# AUDIT
# ═══════════════════════════════════════════════════════════

@dataclass
class AuditRecord:
    scenario_id: int
    report: ConditionReport
    verdict: UniformPriceVerdict
    esr_loc: float
    degenerate: bool


def audit_scenario(scenario: Scenario, bids: BidParameter | None = None) -> AuditRecord:
    """Condition check, uniform-price oracle and R-LMP storage LOC of one scenario."""
    bids = bids if bids is not None else scenario.truthful_bids()
    rolling = simulate(scenario, bids)
    prices = extract_rlmp(rolling)
    report = check_loc_conditions(rolling, bids, scenario_id=scenario.scenario_id)
    verdict = uniform_price_impossibility(rolling, bids)

    esr_loc = 0.0
    for participant in participants(rolling.generators, rolling.esrs):
        if not participant.is_esr:
            continue
        loc = loc_breakdown(prices, rolling, participant, bids)
        esr_loc += loc.loc
    return AuditRecord(
        scenario_id=scenario.scenario_id,
        report=report,
        verdict=verdict,
        esr_loc=esr_loc,
        degenerate=bool(rolling.dual_degenerate.any()),
    )


@dataclass(frozen=True)
class FrequencyRow:
    horizon: int
    scenarios: int
    fired: int

    @property
    def fraction(self) -> float:
        return self.fired / self.scenarios if self.scenarios else 0.0


def condition_frequency(scenario_sets: dict[int, list[Scenario]], jobs: int = 1) -> list[FrequencyRow]:
    """Fraction of scenarios in which the zero-LOC conditions fire, per horizon."""
    rows = []
    for horizon in sorted(scenario_sets):
        scenarios = scenario_sets[horizon]
        reports = map_scenarios(_fired, scenarios, jobs)
        row = FrequencyRow(horizon=horizon, scenarios=len(scenarios), fired=int(sum(reports)))
        logger.info(f"T={horizon}: conditions fired in {row.fired}/{row.scenarios} scenarios ({row.fraction:.1%})")
        rows.append(row)
    return rows


def _fired(scenario: Scenario) -> bool:
    bids = scenario.truthful_bids()
    return check_loc_conditions(simulate(scenario, bids), bids, scenario.scenario_id).fired


def total_loc(prices: PriceSeries, rolling: RollingDispatch, bids: BidParameter) -> float:
    return sum(compute_loc(prices, rolling, p, bids) for p in participants(rolling.generators, rolling.esrs))
