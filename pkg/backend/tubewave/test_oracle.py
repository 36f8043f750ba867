from dataclasses import replace

import numpy as np
import pytest

from conftest import OMEGA
from dispersion import build_context
from errors import ConfigError
from jost_solver import solve_jost
from oracle import (
    BadTruncation, OracleMethod, OracleMismatch, check_agreement, compare, far_field_data, normalize_method,
    solve_ode,
)
from wall_profile import make_profile


def manufactured_pair(ctx, eps=0.1):
    """Potential whose Jost solution is e^{-iδx}(1 + ε e^{-x})."""
    d = ctx.delta

    def q(x):
        decay = eps * np.exp(-np.asarray(x, dtype=float))
        return decay * (1.0 + 2j * d) / (d * d * (1.0 + decay))

    exact = lambda x: np.exp(-1j * d * x) * (1.0 + eps * np.exp(-x))
    return ctx.with_potential(q, tail_factor=lambda x: 1.0, length_scale=1.0), exact


def test_method_names_are_forgiving():
    assert normalize_method("backward_march") is OracleMethod.BACKWARD_MARCH
    assert normalize_method("colocation") is OracleMethod.COLLOCATION
    with pytest.raises(ConfigError):
        normalize_method("shooting")


def test_far_field_data_of_uniform_tube(homogeneous_ctx):
    y, yp = far_field_data(homogeneous_ctx)
    wave = np.exp(-1j * homogeneous_ctx.delta * homogeneous_ctx.x_max)
    assert y == wave
    assert yp == -1j * homogeneous_ctx.delta * wave


def test_uniform_tube_agrees_exactly(homogeneous_ctx, grid):
    result = compare(solve_jost(homogeneous_ctx, grid), solve_ode(homogeneous_ctx, grid))
    assert result.deviation < 1e-12
    assert not result.flagged


@pytest.mark.parametrize(
    "method, limit, bc_limit",
    [(OracleMethod.BACKWARD_MARCH, 1e-6, 1e-12), (OracleMethod.COLLOCATION, 1e-5, 1e-10)],
)
def test_bump_agrees_with_jost(bump_ctx, grid, method, limit, bc_limit):
    ode = solve_ode(bump_ctx, grid, method=method)
    result = check_agreement(compare(solve_jost(bump_ctx, grid), ode), limit)
    assert result.deviation < limit
    assert ode.bc_residual < bc_limit


def test_maxwell_fluid_agrees_with_jost(maxwell_ctx, grid):
    result = compare(solve_jost(maxwell_ctx, grid), solve_ode(maxwell_ctx, grid))
    assert result.deviation < 1e-6


def test_manufactured_solution_is_recovered(bump_ctx, grid):
    ctx, exact = manufactured_pair(bump_ctx)
    jost = solve_jost(ctx, grid)
    ode = solve_ode(ctx, grid, tol=1e-8)
    scale = np.max(np.abs(exact(grid)))
    assert np.max(np.abs(jost.f - exact(grid))) < 1e-8 * scale
    assert np.max(np.abs(ode.y - exact(grid))) < 1e-8 * scale


def test_deviation_shrinks_with_oracle_tolerance(bump_ctx, grid):
    jost = solve_jost(bump_ctx, grid)
    tolerances = (1e-4, 1e-6, 1e-8)
    deviations = [compare(jost, solve_ode(bump_ctx, grid, tol=t)).deviation for t in tolerances]
    assert all(d < t for d, t in zip(deviations, tolerances))
    assert deviations[2] <= deviations[0]


def test_wrong_root_is_flagged(bump_ctx, grid):
    jost = solve_jost(bump_ctx, grid)
    # the other root of δ² picks the growing branch
    wrong = replace(bump_ctx, delta=-bump_ctx.delta)
    result = compare(jost, solve_ode(wrong, grid))
    assert result.flagged
    with pytest.raises(OracleMismatch):
        check_agreement(result, 1e-6)


def test_comparison_on_different_grids(bump_ctx):
    jost = solve_jost(bump_ctx, np.linspace(0.0, 40.0, 101))
    ode = solve_ode(bump_ctx, np.linspace(0.0, 40.0, 4001), tol=1e-8)
    # linear interpolation of the oracle dominates
    assert compare(jost, ode).deviation < 1e-3


def test_short_truncation_is_rejected(tube, newtonian, grid):
    profile = make_profile("RationalDecay", {"amplitude": 0.05, "decay_rate": 5.0})
    ctx = build_context(tube, newtonian, profile, OMEGA, 40.0)
    with pytest.raises(BadTruncation):
        solve_ode(ctx, grid, tol=1e-10)


@pytest.mark.parametrize("method", list(OracleMethod))
def test_far_field_residual_is_read_from_the_solution(bump_ctx, grid, method):
    ode = solve_ode(bump_ctx, grid, method=method)
    assert ode.bc_residual == abs(ode.y[-1] * np.exp(1j * bump_ctx.delta * grid[-1]) - 1.0)


def test_far_field_residual_of_uniform_tube_vanishes(homogeneous_ctx, grid):
    assert solve_ode(homogeneous_ctx, grid).bc_residual < 1e-12
