"""
Linear Programming Module

Deterministic dense LP solver used by every optimization in the simulator.

Problems are stated as

    minimize    cᵀx
    subject to  A_eq x  = b_eq      (duals y_eq, sign free)
                A_ub x ≤ b_ub      (duals y_ub ≥ 0)
                l ≤ x ≤ u          (duals z_lower, z_upper ≥ 0)

with the stationarity convention c = A_eqᵀy_eq − A_ubᵀy_ub + z_lower − z_upper.

The solver is a two-phase revised simplex over bounded variables. The basis is
refactorized with scipy.linalg.lu_factor on every iteration; window problems
have a few hundred columns at most, so dense factorization is cheap. Bland's
rule picks the entering and leaving variables, which makes the pivot sequence
(and therefore the reported dual solution) reproducible.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from market.errors import MalformedProblem, SolverError, TooLarge

logger = logging.getLogger('solver')

INFINITY = 1e20
INFINITY_THRESHOLD = 1e18
TOL = 1e-9
PIVOT_TOL = 1e-9
MAX_ENUMERATION_VARS = 6

_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def is_infinite(value) -> np.ndarray:
    """True where a bound magnitude reaches the infinity sentinel."""
    return np.abs(np.asarray(value, dtype=float)) >= INFINITY_THRESHOLD


def _as_matrix(rows, num_vars: int) -> np.ndarray:
    if rows is None or np.size(rows) == 0:
        return np.zeros((0, num_vars))
    return np.atleast_2d(np.asarray(rows, dtype=float))


def _as_vector(values, size: int, default: float) -> np.ndarray:
    if values is None:
        return np.full(size, default)
    return np.atleast_1d(np.asarray(values, dtype=float)).ravel()


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ub_matrix: np.ndarray
    ub_rhs: np.ndarray
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray

    @classmethod
    def build(
        cls,
        objective,
        eq_matrix=None,
        eq_rhs=None,
        ub_matrix=None,
        ub_rhs=None,
        lower_bounds=None,
        upper_bounds=None,
    ) -> LpProblem:
        """
        Assemble a problem from array-likes.

        Missing row blocks become empty matrices; missing bounds default to
        x ≥ 0 with no upper bound.

        Example:
            LpProblem.build([2, 3], eq_matrix=[[1, 1]], eq_rhs=[10],
                            upper_bounds=[6, 6])
        """
        c = np.atleast_1d(np.asarray(objective, dtype=float)).ravel()
        n = c.size
        eq = _as_matrix(eq_matrix, n)
        ub = _as_matrix(ub_matrix, n)
        return cls(
            objective=c,
            eq_matrix=eq,
            eq_rhs=_as_vector(eq_rhs, eq.shape[0], 0.0),
            ub_matrix=ub,
            ub_rhs=_as_vector(ub_rhs, ub.shape[0], 0.0),
            lower_bounds=_as_vector(lower_bounds, n, 0.0),
            upper_bounds=_as_vector(upper_bounds, n, INFINITY),
        )

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def validate(self) -> None:
        n = self.num_vars
        if self.eq_matrix.ndim != 2 or self.eq_matrix.shape[1] != n:
            raise MalformedProblem(f"eq_matrix has shape {self.eq_matrix.shape}, expected (*, {n})")
        if self.ub_matrix.ndim != 2 or self.ub_matrix.shape[1] != n:
            raise MalformedProblem(f"ub_matrix has shape {self.ub_matrix.shape}, expected (*, {n})")
        if self.eq_rhs.shape != (self.eq_matrix.shape[0],):
            raise MalformedProblem("eq_rhs length does not match eq_matrix rows")
        if self.ub_rhs.shape != (self.ub_matrix.shape[0],):
            raise MalformedProblem("ub_rhs length does not match ub_matrix rows")
        if self.lower_bounds.shape != (n,) or self.upper_bounds.shape != (n,):
            raise MalformedProblem("bound vectors must have one entry per variable")

        for name in ("objective", "eq_matrix", "eq_rhs", "ub_matrix", "ub_rhs",
                     "lower_bounds", "upper_bounds"):
            if np.isnan(getattr(self, name)).any():
                raise MalformedProblem(f"{name} contains NaN")
        for name in ("objective", "eq_matrix", "eq_rhs", "ub_matrix", "ub_rhs"):
            if is_infinite(getattr(self, name)).any():
                raise MalformedProblem(f"{name} contains an infinite coefficient")

        crossed = np.flatnonzero(self.lower_bounds > self.upper_bounds)
        if crossed.size:
            raise MalformedProblem(f"lower bound exceeds upper bound for variable {crossed[0]}")
        if (self.lower_bounds >= INFINITY_THRESHOLD).any() or (self.upper_bounds <= -INFINITY_THRESHOLD).any():
            raise MalformedProblem("bounds must not exclude every finite value")


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float
    y_eq: np.ndarray
    y_ub: np.ndarray
    z_lower: np.ndarray
    z_upper: np.ndarray
    primal_degenerate: bool = False
    dual_degenerate: bool = False
    iterations: int = 0

    @property
    def degenerate(self) -> bool:
        return self.primal_degenerate or self.dual_degenerate

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _BoundedSimplex:
    """Working state of one solve: standard-form columns, bounds and basis."""

    def __init__(self, problem: LpProblem, tol: float):
        self.tol = tol
        self.n = problem.num_vars
        self.m_eq = problem.eq_matrix.shape[0]
        self.m_ub = problem.ub_matrix.shape[0]
        self.m = self.m_eq + self.m_ub
        n, m, m_eq, m_ub = self.n, self.m, self.m_eq, self.m_ub

        # columns: structural | slacks of ≤ rows | one artificial per row
        self.num_cols = n + m_ub + m
        self.A = np.zeros((m, self.num_cols))
        self.A[:m_eq, :n] = problem.eq_matrix
        self.A[m_eq:, :n] = problem.ub_matrix
        self.A[m_eq:, n:n + m_ub] = np.eye(m_ub)
        self.b = np.concatenate([problem.eq_rhs, problem.ub_rhs])

        lower = np.where(is_infinite(problem.lower_bounds), -np.inf, problem.lower_bounds)
        upper = np.where(is_infinite(problem.upper_bounds), np.inf, problem.upper_bounds)
        self.lower = np.concatenate([lower, np.zeros(m_ub), np.zeros(m)])
        self.upper = np.concatenate([upper, np.full(m_ub, np.inf), np.zeros(m)])

        self.x = np.zeros(self.num_cols)
        self.state = np.full(self.num_cols, _AT_LOWER)
        for j in range(n):
            if np.isfinite(self.lower[j]):
                self.x[j] = self.lower[j]
            elif np.isfinite(self.upper[j]):
                self.x[j] = self.upper[j]
                self.state[j] = _AT_UPPER
            else:
                self.state[j] = _FREE

        residual = self.b - self.A[:, :n + m_ub] @ self.x[:n + m_ub]
        self.basis: list[int] = []
        self.open_artificials: list[int] = []
        for i in range(m):
            artificial = n + m_ub + i
            if i >= m_eq and residual[i] >= 0:
                slack = n + (i - m_eq)
                self.A[i, artificial] = 1.0
                self.basis.append(slack)
                self.state[slack] = _BASIC
            else:
                self.A[i, artificial] = 1.0 if residual[i] >= 0 else -1.0
                self.upper[artificial] = np.inf
                self.basis.append(artificial)
                self.state[artificial] = _BASIC
                self.open_artificials.append(artificial)

        self.max_iterations = 50 * (self.num_cols + m) + 100
        self.iterations = 0
        self.y = np.zeros(m)
        self.reduced = np.zeros(self.num_cols)

    def _choose_entering(self, d: np.ndarray, dual_tol: float) -> int | None:
        for j in range(self.num_cols):
            state = self.state[j]
            if state == _BASIC or self.lower[j] == self.upper[j]:
                continue
            if state == _AT_LOWER and d[j] < -dual_tol:
                return j
            if state == _AT_UPPER and d[j] > dual_tol:
                return j
            if state == _FREE and abs(d[j]) > dual_tol:
                return j
        return None

    def _ratio_test(self, entering: int, direction: float, w: np.ndarray):
        limits = np.full(self.m, np.inf)
        leaving_states = np.full(self.m, _AT_LOWER)
        for i, var in enumerate(self.basis):
            rate = direction * w[i]
            if rate > PIVOT_TOL and np.isfinite(self.lower[var]):
                limits[i] = max((self.x[var] - self.lower[var]) / rate, 0.0)
            elif rate < -PIVOT_TOL and np.isfinite(self.upper[var]):
                limits[i] = max((self.upper[var] - self.x[var]) / -rate, 0.0)
                leaving_states[i] = _AT_UPPER

        theta = limits.min() if self.m else np.inf
        own_range = self.upper[entering] - self.lower[entering]
        if np.isfinite(own_range) and own_range <= theta:
            return own_range, None, None
        if not np.isfinite(theta):
            return np.inf, None, None

        ties = np.flatnonzero(limits <= theta + 1e-12 * (1.0 + theta))
        position = min(ties, key=lambda i: self.basis[i])
        return theta, position, leaving_states[position]

    def run(self, cost: np.ndarray) -> LpStatus:
        dual_tol = self.tol * max(1.0, np.abs(cost).max(initial=0.0))
        while self.iterations < self.max_iterations:
            basis = np.array(self.basis, dtype=int)
            nonbasic = self.state != _BASIC
            if self.m:
                lu = scipy.linalg.lu_factor(self.A[:, basis])
                rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
                self.x[basis] = scipy.linalg.lu_solve(lu, rhs)
                self.y = scipy.linalg.lu_solve(lu, cost[basis], trans=1)
            self.reduced = cost - self.A.T @ self.y

            entering = self._choose_entering(self.reduced, dual_tol)
            if entering is None:
                return LpStatus.OPTIMAL

            direction = 1.0 if self.reduced[entering] < 0 else -1.0
            w = scipy.linalg.lu_solve(lu, self.A[:, entering]) if self.m else np.zeros(0)
            theta, position, leaving_state = self._ratio_test(entering, direction, w)
            if not np.isfinite(theta):
                return LpStatus.UNBOUNDED

            self.iterations += 1
            self.x[entering] += direction * theta
            if self.m:
                self.x[basis] -= direction * theta * w

            if position is None:
                # bound flip, the basis is unchanged
                if direction > 0:
                    self.state[entering] = _AT_UPPER
                    self.x[entering] = self.upper[entering]
                else:
                    self.state[entering] = _AT_LOWER
                    self.x[entering] = self.lower[entering]
                continue

            leaving = self.basis[position]
            self.state[leaving] = leaving_state
            self.x[leaving] = self.lower[leaving] if leaving_state == _AT_LOWER else self.upper[leaving]
            self.basis[position] = entering
            self.state[entering] = _BASIC

        raise SolverError(f"simplex did not terminate within {self.max_iterations} iterations")

    def close_artificials(self) -> None:
        self.upper[self.n + self.m_ub:] = 0.0

    def feasibility_tolerance(self) -> float:
        scale = max(1.0, np.abs(self.b).max(initial=0.0))
        return self.tol * scale * max(1, self.m)

    def degeneracy(self, dual_tol: float) -> tuple[bool, bool]:
        primal = False
        for var in self.basis:
            if var >= self.n + self.m_ub:
                continue
            value = self.x[var]
            near_lower = np.isfinite(self.lower[var]) and value - self.lower[var] <= self.tol * (1 + abs(self.lower[var]))
            near_upper = np.isfinite(self.upper[var]) and self.upper[var] - value <= self.tol * (1 + abs(self.upper[var]))
            if near_lower or near_upper:
                primal = True
                break

        dual = False
        for j in range(self.n + self.m_ub):
            if self.state[j] == _BASIC or self.lower[j] == self.upper[j]:
                continue
            if abs(self.reduced[j]) <= dual_tol:
                dual = True
                break
        return primal, dual


def _failed_solution(status: LpStatus, problem: LpProblem, iterations: int) -> LpSolution:
    n = problem.num_vars
    nan = np.full(n, np.nan)
    return LpSolution(
        status=status,
        x=nan,
        objective_value=-np.inf if status is LpStatus.UNBOUNDED else np.nan,
        y_eq=np.full(problem.eq_matrix.shape[0], np.nan),
        y_ub=np.full(problem.ub_matrix.shape[0], np.nan),
        z_lower=nan.copy(),
        z_upper=nan.copy(),
        iterations=iterations,
    )


def solve_lp(problem: LpProblem, tol: float = TOL) -> LpSolution:
    """
    Solve a linear program with the bounded-variable revised simplex.

    Args:
        problem: The LP in canonical form
        tol: Feasibility and optimality tolerance (scaled by data magnitude)

    Returns:
        LpSolution: status, primal point and the full dual solution

    Raises:
        MalformedProblem: dimension mismatches, NaN entries or crossed bounds
        SolverError: the iteration cap was reached
    """
    problem.validate()
    simplex = _BoundedSimplex(problem, tol)

    if simplex.open_artificials:
        phase_one = np.zeros(simplex.num_cols)
        phase_one[simplex.open_artificials] = 1.0
        simplex.run(phase_one)
        infeasibility = simplex.x[simplex.open_artificials].sum()
        if infeasibility > simplex.feasibility_tolerance():
            logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3e}")
            return _failed_solution(LpStatus.INFEASIBLE, problem, simplex.iterations)
    simplex.close_artificials()

    cost = np.zeros(simplex.num_cols)
    cost[:simplex.n] = problem.objective
    status = simplex.run(cost)
    if status is LpStatus.UNBOUNDED:
        return _failed_solution(status, problem, simplex.iterations)

    n, m_eq = simplex.n, simplex.m_eq
    d = simplex.reduced
    z_lower = np.zeros(n)
    z_upper = np.zeros(n)
    for j in range(n):
        state = simplex.state[j]
        if state == _BASIC or state == _FREE:
            continue
        if simplex.lower[j] == simplex.upper[j]:
            z_lower[j] = max(d[j], 0.0)
            z_upper[j] = max(-d[j], 0.0)
        elif state == _AT_LOWER:
            z_lower[j] = d[j]
        else:
            z_upper[j] = -d[j]

    x = simplex.x[:n].copy()
    dual_tol = tol * max(1.0, np.abs(problem.objective).max(initial=0.0))
    primal_degenerate, dual_degenerate = simplex.degeneracy(dual_tol)
    solution = LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=float(problem.objective @ x),
        y_eq=simplex.y[:m_eq].copy(),
        y_ub=-simplex.y[m_eq:].copy(),
        z_lower=z_lower,
        z_upper=z_upper,
        primal_degenerate=primal_degenerate,
        dual_degenerate=dual_degenerate,
        iterations=simplex.iterations,
    )
    logger.debug(
        f"LP solved: {n} vars, {simplex.m} rows, {simplex.iterations} pivots, "
        f"objective {solution.objective_value:.6g}"
    )
    return solution


def dual_objective(problem: LpProblem, solution: LpSolution) -> float:
    """Dual objective value; equals the primal objective at optimality."""
    finite_lower = ~is_infinite(problem.lower_bounds)
    finite_upper = ~is_infinite(problem.upper_bounds)
    return float(
        problem.eq_rhs @ solution.y_eq
        - problem.ub_rhs @ solution.y_ub
        + problem.lower_bounds[finite_lower] @ solution.z_lower[finite_lower]
        - problem.upper_bounds[finite_upper] @ solution.z_upper[finite_upper]
    )


def duality_gap(problem: LpProblem, solution: LpSolution) -> float:
    return abs(solution.objective_value - dual_objective(problem, solution))


# ═══════════════════════════════════════════════════════════
# KKT CERTIFICATE
# ═══════════════════════════════════════════════════════════

class KktCondition(str, Enum):
    PRIMAL_FEASIBILITY = "primal_feasibility"
    DUAL_FEASIBILITY = "dual_feasibility"
    STATIONARITY = "stationarity"
    COMPLEMENTARY_SLACKNESS = "complementary_slackness"


@dataclass(frozen=True)
class KktViolation:
    condition: KktCondition
    location: str
    index: int
    magnitude: float


def check_kkt(problem: LpProblem, solution: LpSolution, tol: float = 1e-8) -> list[KktViolation]:
    """
    Check the KKT system of an LP at a candidate primal/dual point.

    Returns every violated condition with its magnitude; an empty list
    certifies optimality within tol.
    """
    report: list[KktViolation] = []

    def flag(condition: KktCondition, location: str, values: np.ndarray) -> None:
        for index in np.flatnonzero(values > tol):
            report.append(KktViolation(condition, location, int(index), float(values[index])))

    x = solution.x
    finite_lower = ~is_infinite(problem.lower_bounds)
    finite_upper = ~is_infinite(problem.upper_bounds)
    lower = np.where(finite_lower, problem.lower_bounds, 0.0)
    upper = np.where(finite_upper, problem.upper_bounds, 0.0)

    eq_residual = problem.eq_matrix @ x - problem.eq_rhs
    ub_slack = problem.ub_rhs - problem.ub_matrix @ x
    flag(KktCondition.PRIMAL_FEASIBILITY, "eq", np.abs(eq_residual))
    flag(KktCondition.PRIMAL_FEASIBILITY, "ub", -ub_slack)
    flag(KktCondition.PRIMAL_FEASIBILITY, "lower", np.where(finite_lower, lower - x, 0.0))
    flag(KktCondition.PRIMAL_FEASIBILITY, "upper", np.where(finite_upper, x - upper, 0.0))

    flag(KktCondition.DUAL_FEASIBILITY, "y_ub", -solution.y_ub)
    flag(KktCondition.DUAL_FEASIBILITY, "z_lower", np.where(finite_lower, -solution.z_lower, np.abs(solution.z_lower)))
    flag(KktCondition.DUAL_FEASIBILITY, "z_upper", np.where(finite_upper, -solution.z_upper, np.abs(solution.z_upper)))

    stationarity = (
        problem.objective
        - problem.eq_matrix.T @ solution.y_eq
        + problem.ub_matrix.T @ solution.y_ub
        - solution.z_lower
        + solution.z_upper
    )
    flag(KktCondition.STATIONARITY, "x", np.abs(stationarity))

    flag(KktCondition.COMPLEMENTARY_SLACKNESS, "ub", np.abs(solution.y_ub * ub_slack))
    flag(KktCondition.COMPLEMENTARY_SLACKNESS, "lower", np.where(finite_lower, np.abs(solution.z_lower * (x - lower)), 0.0))
    flag(KktCondition.COMPLEMENTARY_SLACKNESS, "upper", np.where(finite_upper, np.abs(solution.z_upper * (upper - x)), 0.0))
    return report


# ═══════════════════════════════════════════════════════════
# VERTEX ENUMERATION ORACLE
# ═══════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Vertex:
    x: np.ndarray
    objective: float


@dataclass
class VertexEnumeration:
    vertices: list[Vertex]
    unbounded: bool = False
    ray: np.ndarray | None = None

    @property
    def best(self) -> Vertex | None:
        return self.vertices[0] if self.vertices else None


def _independent_rows(matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep: list[int] = []
    for i in range(matrix.shape[0]):
        candidate = matrix[keep + [i]]
        if np.linalg.matrix_rank(candidate) > len(keep):
            keep.append(i)
    return matrix[keep], rhs[keep]


def _inequality_system(problem: LpProblem) -> tuple[np.ndarray, np.ndarray]:
    n = problem.num_vars
    rows = [problem.ub_matrix]
    rhs = [problem.ub_rhs]
    identity = np.eye(n)
    finite_lower = np.flatnonzero(~is_infinite(problem.lower_bounds))
    finite_upper = np.flatnonzero(~is_infinite(problem.upper_bounds))
    rows.append(-identity[finite_lower])
    rhs.append(-problem.lower_bounds[finite_lower])
    rows.append(identity[finite_upper])
    rhs.append(problem.upper_bounds[finite_upper])
    return np.vstack(rows), np.concatenate(rhs)


def _stacked(eq: np.ndarray, ineq: np.ndarray, combos: np.ndarray) -> np.ndarray:
    k = combos.shape[0]
    fixed = np.broadcast_to(eq, (k,) + eq.shape)
    return np.concatenate([fixed, ineq[combos]], axis=1)


def enumerate_vertices(problem: LpProblem, tol: float = 1e-9) -> VertexEnumeration:
    """
    Brute-force every basic solution of a small LP.

    Each choice of n active constraints (all equalities plus a subset of the
    inequality rows and finite bounds) with a nonsingular system yields a
    candidate point; feasible candidates are the vertices. Vertices come back
    sorted by objective, so `best` is the optimum of a bounded problem.

    Unboundedness is reported through the `unbounded` marker together with an
    improving extreme ray of the recession cone.

    Raises:
        TooLarge: more than six variables
    """
    problem.validate()
    n = problem.num_vars
    if n > MAX_ENUMERATION_VARS:
        raise TooLarge(f"vertex enumeration supports at most {MAX_ENUMERATION_VARS} variables, got {n}")

    eq, eq_rhs = _independent_rows(problem.eq_matrix, problem.eq_rhs)
    ineq, ineq_rhs = _inequality_system(problem)
    rank = eq.shape[0]
    free_rows = n - rank

    vertices: list[Vertex] = []
    if 0 <= free_rows <= ineq.shape[0]:
        choices = list(itertools.combinations(range(ineq.shape[0]), free_rows))
        combos = np.array(choices, dtype=int).reshape(len(choices), free_rows)
        systems = _stacked(eq, ineq, combos)
        rhs = np.concatenate(
            [np.broadcast_to(eq_rhs, (combos.shape[0], rank)), ineq_rhs[combos]], axis=1
        )
        singular_values = np.linalg.svd(systems, compute_uv=False)
        regular = singular_values[:, -1] > 1e-9 * np.maximum(1.0, singular_values[:, 0])
        if regular.any():
            points = np.linalg.solve(systems[regular], rhs[regular][..., None])[..., 0]
            eq_ok = np.all(
                np.abs(points @ problem.eq_matrix.T - problem.eq_rhs) <= tol * 10 * (1 + np.abs(problem.eq_rhs)),
                axis=1,
            )
            ineq_ok = np.all(points @ ineq.T <= ineq_rhs + tol * 10 * (1 + np.abs(ineq_rhs)), axis=1)
            feasible = points[eq_ok & ineq_ok]
            if feasible.size:
                unique = np.unique(np.round(feasible, 10), axis=0)
                objectives = unique @ problem.objective
                order = np.lexsort(tuple(unique.T[::-1]) + (np.round(objectives, 10),))
                vertices = [Vertex(unique[i], float(objectives[i])) for i in order]

    result = VertexEnumeration(vertices=vertices)
    if vertices:
        ray = _improving_ray(problem, eq, ineq)
        if ray is not None:
            result.unbounded = True
            result.ray = ray
    return result


def _improving_ray(problem: LpProblem, eq: np.ndarray, ineq: np.ndarray) -> np.ndarray | None:
    n = problem.num_vars
    active_rows = n - 1 - eq.shape[0]
    if active_rows < 0 or active_rows > ineq.shape[0]:
        return None

    if n == 1:
        candidates = np.array([[1.0]])
    else:
        choices = list(itertools.combinations(range(ineq.shape[0]), active_rows))
        combos = np.array(choices, dtype=int).reshape(len(choices), active_rows)
        systems = _stacked(eq, ineq, combos)
        _, singular_values, vt = np.linalg.svd(systems, full_matrices=True)
        regular = singular_values[:, -1] > 1e-9 * np.maximum(1.0, singular_values[:, 0])
        candidates = vt[regular, -1, :]

    for direction in candidates:
        for sign in (1.0, -1.0):
            ray = sign * direction
            if eq.size and np.abs(eq @ ray).max() > 1e-9:
                continue
            if ineq.size and (ineq @ ray).max() > 1e-9:
                continue
            if problem.objective @ ray < -1e-9:
                return ray
    return None
