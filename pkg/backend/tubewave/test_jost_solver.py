import numpy as np
import pytest
from scipy.integrate import quad, simpson

from conftest import OMEGA
from dispersion import build_context
from jost_solver import NoConvergence, TruncationTooShort, neumann_iterate, solve_jost, volterra_operator
from wall_profile import make_profile

EPS = 1e-3

# profile factory and truncation length; the wall-mass bump is large because g2 enters G weakly
PROFILES = {
    "bump_g1": (lambda: make_profile("ExponentialBump", {"amplitude": 0.1, "decay_rate": 1.0}, g2_family="Homogeneous"), 30.0),
    "bump_g2": (
        lambda: make_profile("Homogeneous", g2_family="ExponentialBump", g2_parameters={"amplitude": 20.0, "decay_rate": 1.0}),
        30.0,
    ),
    "rational": (lambda: make_profile("RationalDecay", {"amplitude": 0.05, "decay_rate": 5.0}), 600.0),
}


def exponential_potential(eps):
    return lambda x: eps * np.exp(-np.asarray(x, dtype=float)) + 0j


def manufactured(ctx, eps=EPS):
    return ctx.with_potential(exponential_potential(eps), tail_factor=lambda x: 1.0, length_scale=1.0)


def test_homogeneous_tube_is_the_free_wave(homogeneous_ctx, grid):
    sol = solve_jost(homogeneous_ctx, grid)
    d = homogeneous_ctx.delta
    assert sol.n_terms == 0
    assert np.array_equal(sol.f, np.exp(-1j * d * grid))
    assert np.allclose(sol.f_prime, -1j * d * np.exp(-1j * d * grid), rtol=1e-15, atol=0)


def test_zero_potential_gives_zero_first_term(homogeneous_ctx, grid):
    op = volterra_operator(homogeneous_ctx, grid)
    term, dterm = neumann_iterate(op, np.ones(op.n_nodes, dtype=complex), 1.0)
    assert not np.any(term) and not np.any(dterm)


def test_first_term_matches_closed_form(bump_ctx, grid):
    # for q = ε e^{-ξ}: m1(0) = (δ/2i) ε (1 − 1/(1 + 2iδ))
    ctx = manufactured(bump_ctx)
    d = ctx.delta
    op = volterra_operator(ctx, grid)
    term, _ = neumann_iterate(op, np.ones(op.n_nodes, dtype=complex), 1.0)
    expected = (d / 2j) * EPS * (1.0 - 1.0 / (1.0 + 2j * d))
    at_origin = term[op.n_nodes + grid.size]
    assert at_origin == pytest.approx(expected, rel=1e-9)


def test_first_term_matches_brute_force_quadrature(bump_ctx, grid):
    ctx = manufactured(bump_ctx)
    d = ctx.delta
    op = volterra_operator(ctx, grid)
    term, _ = neumann_iterate(op, np.ones(op.n_nodes, dtype=complex), 1.0)
    x = grid[40]
    kernel = lambda s: (1.0 - np.exp(-2j * d * (s - x))) * EPS * np.exp(-s)
    re = quad(lambda s: kernel(s).real, x, np.inf, epsabs=1e-16, epsrel=1e-13, limit=500)[0]
    im = quad(lambda s: kernel(s).imag, x, np.inf, epsabs=1e-16, epsrel=1e-13, limit=500)[0]
    assert term[op.n_nodes + 40] == pytest.approx((d / 2j) * complex(re, im), rel=1e-9)


def test_term_norms_obey_the_weierstrass_bound(bump_ctx, grid):
    sol = solve_jost(bump_ctx, grid)
    assert sol.K == 1.0
    assert sol.weierstrass_holds
    assert sol.n_terms <= 25
    assert sol.term_norms[0] == 1.0


def test_fixed_point_residual_and_tail(bump_ctx, grid):
    tol = 1e-10
    sol = solve_jost(bump_ctx, grid, tol=tol)
    assert sol.fixed_point_residual < 10 * tol
    assert sol.tail_bound < tol
    assert abs(sol.normalized_far_field - 1.0) < 1e-12


def test_fixed_point_by_independent_quadrature(bump_ctx):
    x = np.linspace(0.0, 40.0, 8001)
    sol = solve_jost(bump_ctx, x)
    d = bump_ctx.delta
    for i in (0, 2000, 4000):
        s = x[i:]
        integrand = np.sin(d * (s - x[i])) * bump_ctx.q(s) * sol.f[i:]
        rhs = np.exp(-1j * d * x[i]) + d * simpson(integrand, x=s)
        assert abs(rhs - sol.f[i]) < 1e-9


def test_linearity_in_small_potential(bump_ctx, grid):
    eps, tol = 1e-6, 1e-10
    free = np.exp(-1j * bump_ctx.delta * grid)
    first = solve_jost(manufactured(bump_ctx, eps), grid, tol=tol).f - free
    second = solve_jost(manufactured(bump_ctx, 2 * eps), grid, tol=tol).f - free
    # what is left is the O(ε²) second term
    assert np.max(np.abs(second - 2 * first)) < 4 * tol


def test_derivative_matches_finite_differences(bump_ctx):
    x = np.linspace(0.0, 40.0, 4001)
    sol = solve_jost(bump_ctx, x)
    h = x[1] - x[0]
    fd = (sol.f[2:] - sol.f[:-2]) / (2 * h)
    assert np.max(np.abs(fd - sol.f_prime[1:-1])) < h**2 * abs(bump_ctx.delta) ** 3 / 3


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_grid_refinement_order(tube, newtonian, name):
    profile, x_max = PROFILES[name]
    ctx = build_context(tube, newtonian, profile(), OMEGA, x_max)
    grid = np.linspace(0.0, x_max, 200)
    values = [
        solve_jost(ctx, grid, tol=1e-10, nodes_per_panel=2, panel_scale=s).f_origin
        for s in (0.25, 0.125, 0.0625)
    ]
    coarse, fine = abs(values[0] - values[1]), abs(values[1] - values[2])
    assert fine < coarse
    assert np.log2(coarse / fine) >= 2.0
    assert solve_jost(ctx, grid, nodes_per_panel=2).quadrature_order == 4


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_doubling_x_max_stays_within_tail_bound(tube, newtonian, name):
    profile, x_max = PROFILES[name]
    short = build_context(tube, newtonian, profile(), OMEGA, x_max)
    long = build_context(tube, newtonian, profile(), OMEGA, 2 * x_max)
    a = solve_jost(short, np.linspace(0.0, x_max, 50))
    b = solve_jost(long, np.linspace(0.0, 2 * x_max, 50))
    assert abs(a.f_origin - b.f_origin) <= a.tail_bound


def test_truncation_too_short(tube, newtonian):
    profile = make_profile("RationalDecay", {"amplitude": 0.05, "decay_rate": 5.0})
    ctx = build_context(tube, newtonian, profile, OMEGA, 40.0)
    with pytest.raises(TruncationTooShort):
        solve_jost(ctx, np.linspace(0.0, 40.0, 20))


def test_no_convergence_within_term_budget(bump_ctx, grid):
    with pytest.raises(NoConvergence):
        solve_jost(bump_ctx, grid, n_max=2)
