"""
Rolling-Window Economic Dispatch Module

Builds the W-interval look-ahead dispatch LP, solves it, relabels the LP
duals as market quantities, and rolls the window across the horizon keeping
only the first interval of every window as binding.

Window LP layout (L = window length, N generators, M ESRs):

    variables   gᴳ (N·L) | gᴰ (M·L) | gᶜ (M·L) | E (M·L), participant-major
    equalities  balance rows (L), then SOC rows (M·L)
    inequalities  per generator, for every interval k of the window:
                  up row   g_k − g_{k−1} ≤ r̄
                  down row g_{k−1} − g_k ≤ r̲
                  where g_{−1} is the binding output of the previous interval

All published duals are divided by the interval duration, so prices are in
$/MWh whatever the duration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from market.errors import ComplementarityViolated, InfeasibleWindow
from market.forecast import Forecaster, PerfectForecaster
from market.model import BidParameter, EsrSpec, GeneratorSpec, MarketConfig
from market.solver import LpProblem, LpSolution, solve_lp

logger = logging.getLogger('dispatch')

COMPLEMENTARITY_TOL = 1e-6


@dataclass(frozen=True)
class PriorState:
    generator_output: np.ndarray
    soc: np.ndarray

    @classmethod
    def initial(cls, generators: list[GeneratorSpec], esrs: list[EsrSpec]) -> PriorState:
        return cls(
            generator_output=np.array([g.initial_output for g in generators], dtype=float),
            soc=np.array([e.soc_initial for e in esrs], dtype=float),
        )


@dataclass(frozen=True)
class WindowLayout:
    start: int
    length: int
    num_generators: int
    num_esrs: int

    @property
    def num_vars(self) -> int:
        return (self.num_generators + 3 * self.num_esrs) * self.length

    def generator(self, n: int, k: int) -> int:
        return n * self.length + k

    def discharge(self, i: int, k: int) -> int:
        return (self.num_generators + i) * self.length + k

    def charge(self, i: int, k: int) -> int:
        return (self.num_generators + self.num_esrs + i) * self.length + k

    def soc(self, i: int, k: int) -> int:
        return (self.num_generators + 2 * self.num_esrs + i) * self.length + k

    def balance_row(self, k: int) -> int:
        return k

    def soc_row(self, i: int, k: int) -> int:
        return self.length + i * self.length + k

    def ramp_up_row(self, n: int, k: int) -> int:
        return 2 * (n * self.length + k)

    def ramp_down_row(self, n: int, k: int) -> int:
        return 2 * (n * self.length + k) + 1

    def block(self, values: np.ndarray, offset: int, count: int) -> np.ndarray:
        return values[offset:offset + count * self.length].reshape(count, self.length)


@dataclass(frozen=True)
class WindowProblem:
    layout: WindowLayout
    lp: LpProblem
    forecasts: np.ndarray
    duration: float
    esr_names: tuple[str, ...] = ()


@dataclass
class WindowSolution:
    start: int
    generator_output: np.ndarray
    discharge: np.ndarray
    charge: np.ndarray
    soc: np.ndarray
    energy_price: np.ndarray
    soc_price: np.ndarray
    ramp_up_price: np.ndarray
    ramp_down_price: np.ndarray
    soc_lower_price: np.ndarray
    soc_upper_price: np.ndarray
    generator_lower_price: np.ndarray
    generator_upper_price: np.ndarray
    discharge_lower_price: np.ndarray
    discharge_upper_price: np.ndarray
    charge_lower_price: np.ndarray
    charge_upper_price: np.ndarray
    objective_value: float
    degenerate: bool
    lp_solution: LpSolution = field(repr=False)

    @property
    def length(self) -> int:
        return self.energy_price.size

    def ramp_delta(self, k: int) -> np.ndarray:
        """Δμ = μ̄ − μ̲ of the ramp rows into interval k (k=0 is the boundary)."""
        if k >= self.length:
            return np.zeros(self.ramp_up_price.shape[0])
        return self.ramp_up_price[:, k] - self.ramp_down_price[:, k]


def build_window(
    config: MarketConfig,
    generators: list[GeneratorSpec],
    esrs: list[EsrSpec],
    bids: BidParameter,
    prior: PriorState,
    forecasts,
    start: int,
) -> WindowProblem:
    """
    Assemble the look-ahead dispatch LP for the window starting at `start`.

    The first SOC row uses the realized SOC of the previous interval and the
    first ramp rows use the previous binding generator output.
    """
    forecasts = np.asarray(forecasts, dtype=float)
    length = forecasts.size
    expected = min(config.window, config.horizon - start)
    if length != expected:
        raise ValueError(f"window at interval {start + 1} needs {expected} forecasts, got {length}")

    h = config.interval_duration
    N, M = len(generators), len(esrs)
    layout = WindowLayout(start, length, N, M)
    nv = layout.num_vars

    c = np.zeros(nv)
    lower = np.zeros(nv)
    upper = np.zeros(nv)
    eq = np.zeros((length + M * length, nv))
    eq_rhs = np.zeros(eq.shape[0])
    ub = np.zeros((2 * N * length, nv))
    ub_rhs = np.zeros(ub.shape[0])

    for k in range(length):
        eq[layout.balance_row(k), [layout.generator(n, k) for n in range(N)]] = 1.0
        eq_rhs[layout.balance_row(k)] = forecasts[k]

    for n, gen in enumerate(generators):
        for k in range(length):
            j = layout.generator(n, k)
            c[j] = h * bids.generator[n, start + k]
            lower[j], upper[j] = gen.capacity_min, gen.capacity_max

            up, down = layout.ramp_up_row(n, k), layout.ramp_down_row(n, k)
            ub[up, j] = 1.0
            ub[down, j] = -1.0
            if k == 0:
                ub_rhs[up] = gen.ramp_up + prior.generator_output[n]
                ub_rhs[down] = gen.ramp_down - prior.generator_output[n]
            else:
                previous = layout.generator(n, k - 1)
                ub[up, previous] = -1.0
                ub[down, previous] = 1.0
                ub_rhs[up] = gen.ramp_up
                ub_rhs[down] = gen.ramp_down

    for i, esr in enumerate(esrs):
        for k in range(length):
            jd, jc, je = layout.discharge(i, k), layout.charge(i, k), layout.soc(i, k)
            c[jd] = h * bids.discharge[i, start + k]
            c[jc] = -h * bids.charge[i, start + k]
            upper[jd] = esr.discharge_capacity
            upper[jc] = esr.charge_capacity
            lower[je], upper[je] = esr.soc_min, esr.soc_max

            eq[layout.balance_row(k), jd] = 1.0
            eq[layout.balance_row(k), jc] = -1.0

            row = layout.soc_row(i, k)
            eq[row, jc] = h * esr.charge_efficiency
            eq[row, jd] = -h / esr.discharge_efficiency
            eq[row, je] = -1.0
            if k == 0:
                eq_rhs[row] = -prior.soc[i]
            else:
                eq[row, layout.soc(i, k - 1)] = 1.0

    lp = LpProblem.build(c, eq, eq_rhs, ub, ub_rhs, lower, upper)
    return WindowProblem(
        layout=layout,
        lp=lp,
        forecasts=forecasts,
        duration=h,
        esr_names=tuple(e.name for e in esrs),
    )


def solve_window(problem: WindowProblem) -> WindowSolution:
    """
    Solve a window LP and relabel its primal and dual solution.

    Raises:
        InfeasibleWindow: demand cannot be served within caps, ramps and SOC limits
        ComplementarityViolated: an ESR charges and discharges in the same interval
    """
    layout = problem.layout
    solution = solve_lp(problem.lp)
    if not solution.is_optimal:
        raise InfeasibleWindow(layout.start, f"solver status {solution.status.value}")

    N, M, L = layout.num_generators, layout.num_esrs, layout.length
    h = problem.duration
    x = solution.x
    g_off = 0
    d_off = N * L
    c_off = (N + M) * L
    e_off = (N + 2 * M) * L

    discharge = layout.block(x, d_off, M)
    charge = layout.block(x, c_off, M)
    overlap = discharge * charge
    if overlap.size and overlap.max() > COMPLEMENTARITY_TOL:
        i, k = np.unravel_index(np.argmax(overlap), overlap.shape)
        raise ComplementarityViolated(layout.start + int(k), problem.esr_names[i], float(overlap[i, k]))

    y_ub = solution.y_ub.reshape(N, L, 2) if N else np.zeros((0, L, 2))

    def bound_duals(values: np.ndarray, offset: int, count: int) -> np.ndarray:
        return layout.block(values, offset, count) / h

    result = WindowSolution(
        start=layout.start,
        generator_output=layout.block(x, g_off, N),
        discharge=discharge,
        charge=charge,
        soc=layout.block(x, e_off, M),
        energy_price=solution.y_eq[:L] / h,
        soc_price=solution.y_eq[L:].reshape(M, L),
        ramp_up_price=y_ub[:, :, 0] / h,
        ramp_down_price=y_ub[:, :, 1] / h,
        soc_lower_price=layout.block(solution.z_lower, e_off, M),
        soc_upper_price=layout.block(solution.z_upper, e_off, M),
        generator_lower_price=bound_duals(solution.z_lower, g_off, N),
        generator_upper_price=bound_duals(solution.z_upper, g_off, N),
        discharge_lower_price=bound_duals(solution.z_lower, d_off, M),
        discharge_upper_price=bound_duals(solution.z_upper, d_off, M),
        charge_lower_price=bound_duals(solution.z_lower, c_off, M),
        charge_upper_price=bound_duals(solution.z_upper, c_off, M),
        objective_value=solution.objective_value,
        degenerate=solution.degenerate,
        lp_solution=solution,
    )
    logger.debug(
        f"Window {layout.start + 1}..{layout.start + L}: objective {result.objective_value:.6g}, "
        f"lambda {result.energy_price[0]:.6g}, degenerate={result.degenerate}"
    )
    return result


@dataclass
class RollingDispatch:
    """Binding dispatch of the rolling policy plus every window it solved."""

    config: MarketConfig
    generators: list[GeneratorSpec]
    esrs: list[EsrSpec]
    demand: np.ndarray
    generator_output: np.ndarray
    discharge: np.ndarray
    charge: np.ndarray
    soc: np.ndarray
    windows: list[WindowSolution] = field(default_factory=list, repr=False)

    @property
    def horizon(self) -> int:
        return self.demand.size

    @property
    def degenerate(self) -> np.ndarray:
        return np.array([w.degenerate for w in self.windows], dtype=bool)

    @property
    def dual_degenerate(self) -> np.ndarray:
        """Windows that ended with a zero reduced cost on some nonbasic column."""
        return np.array([w.lp_solution.dual_degenerate for w in self.windows], dtype=bool)

    def soc_before(self, i: int, t: int) -> float:
        return self.esrs[i].soc_initial if t == 0 else float(self.soc[i, t - 1])

    def output_before(self, n: int, t: int) -> float:
        return self.generators[n].initial_output if t == 0 else float(self.generator_output[n, t - 1])

    def objective(self, bids: BidParameter) -> float:
        """Bid cost of the binding dispatch over the whole horizon."""
        h = self.config.interval_duration
        return float(
            h * (bids.generator * self.generator_output).sum()
            + h * (bids.discharge * self.discharge).sum()
            - h * (bids.charge * self.charge).sum()
        )


def roll_horizon(
    config: MarketConfig,
    generators: list[GeneratorSpec],
    esrs: list[EsrSpec],
    bids: BidParameter,
    demand,
    forecaster: Forecaster | None = None,
) -> RollingDispatch:
    """
    Run the rolling-window policy over the horizon.

    Each window sees the realized demand in its first interval and the
    forecaster's values after that; only the first interval is kept.

    Raises:
        InfeasibleWindow: with the interval of the failing window
    """
    demand = np.asarray(demand, dtype=float)
    T = config.horizon
    if demand.size != T:
        raise ValueError(f"demand has {demand.size} intervals, horizon is {T}")
    forecaster = forecaster or PerfectForecaster(demand)

    N, M = len(generators), len(esrs)
    rolling = RollingDispatch(
        config=config,
        generators=list(generators),
        esrs=list(esrs),
        demand=demand,
        generator_output=np.zeros((N, T)),
        discharge=np.zeros((M, T)),
        charge=np.zeros((M, T)),
        soc=np.zeros((M, T)),
    )

    prior = PriorState.initial(generators, esrs)
    for t in range(T):
        length = min(config.window, T - t)
        forecasts = np.array(forecaster.window(t, length), dtype=float)
        forecasts[0] = demand[t]

        window = solve_window(build_window(config, generators, esrs, bids, prior, forecasts, t))
        rolling.windows.append(window)
        rolling.generator_output[:, t] = window.generator_output[:, 0]
        rolling.discharge[:, t] = window.discharge[:, 0]
        rolling.charge[:, t] = window.charge[:, 0]
        rolling.soc[:, t] = window.soc[:, 0]
        prior = PriorState(window.generator_output[:, 0].copy(), window.soc[:, 0].copy())

    degenerate = int(rolling.degenerate.sum())
    if degenerate:
        logger.debug(f"{degenerate} of {T} windows ended at a degenerate basis")
    return rolling


def solve_static(
    config: MarketConfig,
    generators: list[GeneratorSpec],
    esrs: list[EsrSpec],
    bids: BidParameter,
    demand,
) -> WindowSolution:
    """One-shot dispatch of the whole horizon with exact demand."""
    demand = np.asarray(demand, dtype=float)
    static = config.model_copy(update={"window": config.horizon})
    prior = PriorState.initial(generators, esrs)
    return solve_window(build_window(static, generators, esrs, bids, prior, demand, 0))
