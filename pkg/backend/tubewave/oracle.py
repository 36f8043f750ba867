"""
Independent check of the Jost solution: integrate y'' + δ²(1 − q) y = 0
directly, starting from the far-field data at x_max, and compare.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from rapidfuzz import fuzz, process
from scipy.integrate import solve_bvp, solve_ivp

from errors import ConfigError, GateError, SolverError

logger = logging.getLogger(__name__)

DEVIATION_FLAG = 1e-6


class StiffnessFailure(SolverError):
    pass


class BadTruncation(SolverError):
    pass


class OracleMismatch(GateError):
    pass


class OracleMethod(Enum):
    BACKWARD_MARCH = "BackwardMarch"
    COLLOCATION = "Collocation"


def normalize_method(name):
    if isinstance(name, OracleMethod):
        return name
    known = {m.value.lower(): m for m in OracleMethod}
    key = str(name).replace("_", "").replace(" ", "").lower()
    match = process.extractOne(key, known.keys(), scorer=fuzz.ratio)
    if match is None or match[1] < 70:
        raise ConfigError(f"numerics.oracle_method: unknown method '{name}'")
    return known[match[0]]


@dataclass
class OracleSolution:
    grid: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray
    method: OracleMethod
    # |y e^{iδx} − 1| of the returned solution at the last grid point
    bc_residual: float


def far_field_data(ctx):
    """y(x_max), y'(x_max) with the first-order correction from q beyond x_max."""
    d, x = ctx.delta, ctx.x_max
    t0, t1 = ctx.moments
    wave = np.exp(-1j * d * x)
    return wave * (1.0 + (d / 2j) * (t0 - t1)), wave * (-1j * d - 0.5 * d * d * (t0 + t1))


def _check_truncation(ctx, tol):
    q_end = float(np.abs(ctx.q(np.array([ctx.x_max])))[0])
    born = (abs(ctx.delta) * ctx.q_tail) ** 2
    if born > tol or q_end > 1e-3:
        raise BadTruncation(
            f"q is not small enough at x_max = {ctx.x_max}: |q| = {q_end:.3e}, "
            f"second-order tail {born:.3e} (tol {tol:.1e})"
        )


def _rhs(ctx):
    d2 = ctx.delta_sq

    def rhs(x, state):
        q = ctx.q(np.array([x]))[0]
        return np.array([state[1], -d2 * (1.0 - q) * state[0]])

    return rhs


def _march(ctx, grid, tol):
    y_end, yp_end = far_field_data(ctx)
    rtol = max(tol * 1e-5, 1e-13)
    sol = solve_ivp(
        _rhs(ctx), (ctx.x_max, 0.0), np.array([y_end, yp_end], dtype=complex),
        method="DOP853", t_eval=grid[::-1], rtol=rtol, atol=rtol * 1e-3,
    )
    if not sol.success:
        raise StiffnessFailure(f"backward march stopped: {sol.message}")
    return sol.y[0][::-1], sol.y[1][::-1]


def _collocate(ctx, grid, tol):
    y_end, yp_end = far_field_data(ctx)
    d2 = ctx.delta_sq

    def rhs(x, s):
        y = s[0] + 1j * s[1]
        yp = s[2] + 1j * s[3]
        ypp = -d2 * (1.0 - ctx.q(x)) * y
        return np.vstack((yp.real, yp.imag, ypp.real, ypp.imag))

    def bc(sa, sb):
        return np.array([sb[0] - y_end.real, sb[1] - y_end.imag, sb[2] - yp_end.real, sb[3] - yp_end.imag])

    n = max(int(32 * abs(ctx.delta) * ctx.x_max), 400)
    mesh = np.linspace(0.0, ctx.x_max, n)
    guess_y = np.exp(-1j * ctx.delta * mesh)
    guess_yp = -1j * ctx.delta * guess_y
    guess = np.vstack((guess_y.real, guess_y.imag, guess_yp.real, guess_yp.imag))
    sol = solve_bvp(rhs, bc, mesh, guess, tol=max(tol * 1e-2, 1e-10), max_nodes=500000)
    if not sol.success:
        raise StiffnessFailure(f"collocation failed: {sol.message}")
    s = sol.sol(grid)
    return s[0] + 1j * s[1], s[2] + 1j * s[3]


def solve_ode(ctx, grid, tol=1e-6, method=OracleMethod.BACKWARD_MARCH):
    method = normalize_method(method)
    grid = np.asarray(grid, dtype=float)
    _check_truncation(ctx, tol)
    if ctx.q_l1 == 0:
        # constant coefficients: the decaying solution is known in closed form
        y = np.exp(-1j * ctx.delta * grid)
        y_prime = -1j * ctx.delta * y
    elif method is OracleMethod.BACKWARD_MARCH:
        y, y_prime = _march(ctx, grid, tol)
    else:
        y, y_prime = _collocate(ctx, grid, tol)
    if not np.all(np.isfinite(y)):
        raise StiffnessFailure("oracle solution is not finite")
    solution = OracleSolution(
        grid=grid, y=y, y_prime=y_prime, method=method,
        bc_residual=float(abs(y[-1] * np.exp(1j * ctx.delta * grid[-1]) - 1.0)),
    )
    logger.info(f"🧪 oracle ({method.value}) y(0) = {y[0]:.12g}")
    return solution


@dataclass
class Comparison:
    deviation: float
    location: float
    flagged: bool


def compare(jost, ode, threshold=DEVIATION_FLAG):
    """Sup-norm deviation of the oracle from f, relative to max |f|."""
    if jost.grid.shape == ode.grid.shape and np.array_equal(jost.grid, ode.grid):
        y = ode.y
    else:
        y = np.interp(jost.grid, ode.grid, ode.y.real) + 1j * np.interp(jost.grid, ode.grid, ode.y.imag)
    gap = np.abs(y - jost.f)
    i = int(np.argmax(gap))
    deviation = float(gap[i] / np.max(np.abs(jost.f)))
    result = Comparison(deviation=deviation, location=float(jost.grid[i]), flagged=deviation > threshold)
    if result.flagged:
        logger.warning(f"⚠️ oracle deviates by {deviation:.3e} at x = {result.location:.6g}")
    return result


def check_agreement(comparison, tol):
    if not comparison.deviation <= tol:
        raise OracleMismatch(
            f"Jost and ODE solutions differ by {comparison.deviation:.3e} at x = {comparison.location:.6g}"
        )
    return comparison
