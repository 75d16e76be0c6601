"""
Tests for the closed-form minimization and its grid-search oracle.
"""
import numpy as np
import pytest

from decoybounds.api.models import MinProblem
from decoybounds.errors import DomainError, InfeasibleDomainError
from decoybounds.services.entropy_math import binary_entropy
from decoybounds.services.minimizer import (
    corollary_min,
    grid_oracle_min,
    objective,
    reduced_derivative,
    reduced_objective,
)


def _random_problem(rng) -> MinProblem:
    a = rng.uniform(0.05, 1.0)
    b = rng.uniform(0.0, a / 4)
    c = rng.uniform(0.05, 1.0)
    d = rng.uniform(b, b + 2 * c)
    e = rng.uniform(a, a + c / 2)
    return MinProblem(A=a, B=b, C=c, D=d, E=e)


def _grid_tolerance(p: MinProblem, resolution: int) -> float:
    # one grid step in y moves the total and the numerator by at most C h
    h = 1.0 / (resolution - 1)
    return p.C * h + (p.A + p.C) * binary_entropy(min(p.C * h / p.A, 0.5)) + 1e-12


def test_case_3_reference_value():
    """Test A=1, B=0, C=0.1, D=1, E=1 sits at (1, 1)"""
    solution = corollary_min(MinProblem(A=1.0, B=0.0, C=0.1, D=1.0, E=1.0))

    assert solution.case_id == 3
    assert (solution.x, solution.y) == (1.0, 1.0)
    assert solution.value == pytest.approx(1.1 * (1 - binary_entropy(0.1 / 1.1)), abs=1e-15)
    assert solution.value == pytest.approx(0.6165533, abs=1e-6)


def test_case_3_matches_high_resolution_grid():
    """Test the case 3 reference instance against a 2001 x 2001 grid"""
    p = MinProblem(A=1.0, B=0.0, C=0.1, D=1.0, E=1.0)

    grid = grid_oracle_min(p, 2001)

    assert grid.value == pytest.approx(corollary_min(p).value, abs=1e-12)
    assert (grid.x, grid.y) == (1.0, 1.0)


def test_no_slack_recovers_separate_bound():
    """Test D = B and E = A gives y = 0 and A[1 - H(B/A)]"""
    p = MinProblem(A=0.01, B=0.0002, C=0.0097, D=0.0002, E=0.01)

    solution = corollary_min(p)

    assert solution.case_id == 1
    assert solution.y == 0.0
    assert solution.value == pytest.approx(0.01 * (1 - binary_entropy(0.02)), rel=1e-14)


def test_case_1_location():
    """Test the minimum at x = 1, y = (D - B)/C when E = A"""
    p = MinProblem(A=0.5, B=0.02, C=0.2, D=0.05, E=0.5)

    solution = corollary_min(p)

    assert solution.case_id == 1
    assert solution.x == 1.0
    assert solution.y == pytest.approx(0.03 / 0.2, rel=1e-14)
    assert solution.value == pytest.approx(0.53 * (1 - binary_entropy(0.05 / 0.53)), rel=1e-13)


def test_case_2_minimum_lies_on_total_constraint():
    """Test a case 2 instance and locate the oracle minimum on y = (E - A)/C"""
    p = MinProblem(A=0.5, B=0.02, C=0.4, D=0.05, E=0.7)
    resolution = 401

    solution = corollary_min(p)
    grid = grid_oracle_min(p, resolution)

    assert solution.case_id == 2
    assert solution.y == pytest.approx(0.5, rel=1e-14)
    assert solution.x == pytest.approx(0.03 / 0.2, rel=1e-14)
    assert abs(grid.y - (p.E - p.A) / p.C) <= 1.0 / (resolution - 1) + 1e-12
    assert solution.value <= grid.value + 1e-12


def test_boundary_between_cases_1_and_2():
    """Test D - B = E - A, where both candidates reach the same value"""
    p = MinProblem(A=0.5, B=0.02, C=0.4, D=0.12, E=0.6)

    solution = corollary_min(p)

    assert solution.case_id in (1, 2)
    assert solution.value == pytest.approx(0.6 * (1 - binary_entropy(0.12 / 0.6)), rel=1e-13)


def test_infeasible_instances_raise():
    """Test an empty domain and an entropy argument at 1/2"""
    with pytest.raises(InfeasibleDomainError):
        corollary_min(MinProblem(A=0.5, B=0.2, C=0.1, D=0.1, E=0.5))
    with pytest.raises(InfeasibleDomainError):
        corollary_min(MinProblem(A=0.5, B=0.0, C=0.1, D=0.1, E=0.7))
    with pytest.raises(InfeasibleDomainError):
        corollary_min(MinProblem(A=0.5, B=0.3, C=0.1, D=0.35, E=0.5))


def test_grid_oracle_rejects_coarse_grids():
    """Test the oracle's resolution floor"""
    with pytest.raises(DomainError):
        grid_oracle_min(MinProblem(A=1.0, B=0.0, C=0.1, D=1.0, E=1.0), 50)


def test_closed_form_agrees_with_grid_oracle(rng):
    """Test 1000 random feasible instances against a 201 x 201 grid"""
    resolution = 201
    checked = 0
    for _ in range(1000):
        p = _random_problem(rng)
        try:
            solution = corollary_min(p)
        except InfeasibleDomainError:
            continue
        grid = grid_oracle_min(p, resolution)

        assert solution.value <= grid.value + 1e-12
        assert grid.value - solution.value <= _grid_tolerance(p, resolution)
        assert objective(p, solution.x, solution.y) == pytest.approx(solution.value, abs=1e-12)
        checked += 1

    assert checked >= 300


def test_closed_form_agrees_with_fine_grid(rng):
    """Test a few random instances at resolution 2001"""
    resolution = 2001
    checked = 0
    while checked < 3:
        p = _random_problem(rng)
        try:
            solution = corollary_min(p)
        except InfeasibleDomainError:
            continue
        grid = grid_oracle_min(p, resolution)

        assert solution.value <= grid.value + 1e-12
        assert grid.value - solution.value <= _grid_tolerance(p, resolution)
        checked += 1


def test_reduced_derivative_matches_finite_differences(rng):
    """Test g'(y) = 1 + log2((B + y)/(A + y)) and its sign below ratio 1/2"""
    step = 1e-6
    for _ in range(500):
        a = rng.uniform(0.1, 1.0)
        b = rng.uniform(0.0, a / 4)
        y = rng.uniform(0.01, 1.0)

        analytic = float(reduced_derivative(a, b, y))
        numeric = float(
            (reduced_objective(a, b, y + step) - reduced_objective(a, b, y - step)) / (2 * step)
        )

        assert numeric == pytest.approx(analytic, rel=1e-6, abs=1e-6)
        if (b + y) / (a + y) < 0.5:
            assert analytic < 0


def test_objective_broadcasts_over_arrays():
    """Test f on a grid of points"""
    p = MinProblem(A=0.5, B=0.02, C=0.2, D=0.05, E=0.5)
    x = np.linspace(0, 1, 5)[:, None]
    y = np.linspace(0, 1, 7)[None, :]

    values = objective(p, x, y)

    assert values.shape == (5, 7)
    assert values[0, 0] == pytest.approx(0.5 * (1 - binary_entropy(0.04)), rel=1e-14)


def _feasible_values(p: MinProblem, resolution: int):
    grid = np.linspace(0.0, 1.0, resolution)
    x, y = grid[:, None], grid[None, :]
    total = p.A + p.C * y
    numerator = p.B + p.C * x * y
    feasible = (numerator <= p.D) & (total >= p.E) & (numerator / total < 0.5)
    values = np.where(feasible, objective(p, x, np.broadcast_to(y, feasible.shape)), np.inf)
    return values, feasible


def test_near_degenerate_aggregate_weight():
    """Test C = 1e-9 against the grid"""
    p = MinProblem(A=1.0, B=0.0, C=1e-9, D=1.0, E=1.0)

    solution = corollary_min(p)
    grid = grid_oracle_min(p, 101)

    assert solution.case_id == 3
    assert grid.value == pytest.approx(solution.value, abs=1e-12)


def test_grid_minimum_lies_on_the_border(rng):
    """Test no grid point with four feasible neighbours beats the border points"""
    checked = 0
    for _ in range(100):
        p = _random_problem(rng)
        values, feasible = _feasible_values(p, 101)
        if not feasible.any():
            continue

        padded = np.pad(feasible, 1, constant_values=False)
        interior = (
            feasible
            & padded[:-2, 1:-1]
            & padded[2:, 1:-1]
            & padded[1:-1, :-2]
            & padded[1:-1, 2:]
        )
        border = feasible & ~interior
        if interior.any():
            assert values[interior].min() >= values[border].min() - 1e-12
        checked += 1

    assert checked > 0


def test_objective_is_nonincreasing_in_x(rng):
    """Test f along x at fixed y on the feasible grid"""
    for _ in range(50):
        p = _random_problem(rng)
        values, feasible = _feasible_values(p, 101)

        for col in range(1, 101):
            column = values[feasible[:, col], col]
            assert np.all(np.diff(column) <= 1e-12)


def test_case_matches_oracle_location(rng):
    """Test the oracle minimum sits at the total A + C y picked by the case"""
    resolution = 201
    located = {1: 0, 2: 0, 3: 0}
    for _ in range(300):
        p = _random_problem(rng)
        try:
            solution = corollary_min(p)
        except InfeasibleDomainError:
            continue
        total = p.A + p.C * solution.y
        ratio = (p.B + p.C * solution.x * solution.y) / total
        if ratio > 0.4:
            continue
        grid = grid_oracle_min(p, resolution)

        # f climbs at least this fast in the total away from the minimum
        slope = min(1 + np.log2(1 - ratio), -1 - np.log2(ratio))
        expected = {1: p.A + p.D - p.B, 2: p.E, 3: p.A + p.C}[solution.case_id]
        gap = max(grid.value - solution.value, 0.0)

        assert total == pytest.approx(expected, rel=1e-12)
        assert abs(p.A + p.C * grid.y - expected) <= gap / slope + 1e-9
        located[solution.case_id] += 1

    assert all(count > 0 for count in located.values())
