# decoybounds/services/minimizer.py
"""
Closed-form minimization of the privacy amplification term over the
aggregate-state coordinates, plus a brute-force grid search used to check it.

The objective is f(x, y) = (A + C y)[1 - H((B + C x y)/(A + C y))] on
0 <= x, y <= 1 subject to B + C x y <= D, A + C y >= E and an entropy
argument below 1/2. x plays the aggregate error rate, y the aggregate yield.
"""
import logging
import math

import numpy as np

from decoybounds.api.models import MinProblem, MinSolution
from decoybounds.errors import DomainError, InfeasibleDomainError
from decoybounds.services.entropy_math import binary_entropy

logger = logging.getLogger(__name__)

MIN_GRID_RESOLUTION = 101
_GRID_CHUNK = 256


def objective(p: MinProblem, x, y):
    """f(x, y) for scalars or broadcastable arrays."""
    total = p.A + p.C * np.asarray(y, dtype=float)
    argument = (p.B + p.C * np.asarray(x, dtype=float) * np.asarray(y, dtype=float)) / total
    return total * (1.0 - binary_entropy(argument))


def reduced_objective(a: float, b: float, y):
    """g(y) = (A + y)[1 - H((B + y)/(A + y))], f restricted to x = 1."""
    y = np.asarray(y, dtype=float)
    return (a + y) * (1.0 - binary_entropy((b + y) / (a + y)))


def reduced_derivative(a: float, b: float, y):
    """Analytic g'(y) = 1 + log2((B + y)/(A + y)); negative while the ratio is below 1/2."""
    y = np.asarray(y, dtype=float)
    return 1.0 + np.log2((b + y) / (a + y))


def _privacy_term(total: float, numerator: float) -> float:
    argument = numerator / total
    if argument >= 0.5:
        raise InfeasibleDomainError(
            f"entropy argument {argument:.6g} reaches 1/2 at the minimum"
        )
    return total * (1.0 - binary_entropy(argument))


def _candidate(p: MinProblem, case_id: int) -> MinSolution:
    slack = p.D - p.B
    if case_id == 1:
        total = p.A + slack
        return MinSolution(
            case_id=1, x=1.0, y=slack / p.C, value=_privacy_term(total, p.D)
        )
    if case_id == 2:
        lift = p.E - p.A
        return MinSolution(
            case_id=2, x=slack / lift, y=lift / p.C, value=_privacy_term(p.E, p.D)
        )
    return MinSolution(
        case_id=3, x=1.0, y=1.0, value=_privacy_term(p.A + p.C, p.B + p.C)
    )


def corollary_min(p: MinProblem) -> MinSolution:
    """
    Minimum of f over its constrained domain.

    case 1: D - B < C and D - B > E - A, minimum at (1, (D - B)/C)
    case 2: D - B < C and D - B < E - A, minimum at ((D - B)/(E - A), (E - A)/C)
    case 3: D - B >= C, minimum at (1, 1)

    On a boundary between cases every applicable candidate is evaluated and
    the smaller value wins, the lower case id on exact ties.

    Raises:
        InfeasibleDomainError: empty feasible set, or the entropy argument
            at the minimum is not below 1/2
    """
    slack = p.D - p.B
    lift = p.E - p.A
    if slack < 0:
        raise InfeasibleDomainError(f"B = {p.B} exceeds its upper bound D = {p.D}")
    if lift > p.C:
        raise InfeasibleDomainError(f"E = {p.E} exceeds the largest total A + C")

    cases = []
    if slack <= p.C:
        if slack >= lift:
            cases.append(1)
        if slack <= lift and lift > 0:
            cases.append(2)
    if slack >= p.C:
        cases.append(3)

    solutions = [_candidate(p, case_id) for case_id in cases]
    best = min(solutions, key=lambda solution: (solution.value, solution.case_id))
    if len(solutions) > 1:
        logger.debug("case boundary: candidates %s, picked case %d", cases, best.case_id)
    return best


def grid_oracle_min(p: MinProblem, resolution: int) -> MinSolution:
    """
    Exhaustive minimum of f over the feasible points of a uniform
    resolution x resolution grid on the unit square.

    Raises:
        DomainError: resolution below 101
        InfeasibleDomainError: no grid point is feasible
    """
    if resolution < MIN_GRID_RESOLUTION:
        raise DomainError(
            f"grid resolution must be >= {MIN_GRID_RESOLUTION}, got {resolution}"
        )
    grid = np.linspace(0.0, 1.0, resolution)
    y = grid[None, :]
    total = p.A + p.C * y

    best_value = math.inf
    best_point = None
    for start in range(0, resolution, _GRID_CHUNK):
        x = grid[start : start + _GRID_CHUNK, None]
        numerator = p.B + p.C * x * y
        argument = numerator / total
        feasible = (numerator <= p.D) & (total >= p.E) & (argument < 0.5)
        if not feasible.any():
            continue
        values = np.full(feasible.shape, np.inf)
        totals = np.broadcast_to(total, feasible.shape)
        values[feasible] = totals[feasible] * (1.0 - binary_entropy(argument[feasible]))
        row, col = np.unravel_index(np.argmin(values), values.shape)
        if values[row, col] < best_value:
            best_value = float(values[row, col])
            best_point = (float(grid[start + row]), float(grid[col]))

    if best_point is None:
        raise InfeasibleDomainError("no feasible point on the grid")
    return MinSolution(case_id=None, x=best_point[0], y=best_point[1], value=best_value)
