"""
Jost-type solution f(x, −δ) of y'' + δ²y = δ²q y by successive approximations.

The unknown is normalized, m(x) = f(x) e^{iδx}, so that

    m(x) = 1 + (δ/2i) ∫_x^∞ (1 − e^{−2iδ(ξ−x)}) q(ξ) m(ξ) dξ

and every stored quantity stays O(1) for Im δ ≤ 0. Each Neumann term applies
the Volterra operator once; f' is obtained from the differentiated kernel,
never from the summed samples.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from errors import SolverError
from quadrature import PanelLayout, graded_edges, tail_weights

logger = logging.getLogger(__name__)

KERNEL_CONSTANT = 1.0
OVERFLOW_LIMIT = 1e300


class OverflowRisk(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class TruncationTooShort(SolverError):
    pass


class VolterraOperator:
    """
    Discrete Volterra operator on a panel layout of [0, x_max].

    Targets are the flattened Gauss nodes followed by any extra points; the
    right-hand accumulations run panel by panel from x_max toward the inlet,
    so one application costs O(nodes * nodes_per_panel).
    """

    def __init__(self, layout, q, delta, moments, extra_points=()):
        self.layout = layout
        self.delta = complex(delta)
        self.t0, self.t1 = moments
        nodes = layout.nodes
        self.n_nodes = nodes.size
        self.q_nodes = np.asarray(q(nodes.ravel()), dtype=complex).reshape(nodes.shape)
        starts = layout.edges[:-1]
        self.phase = np.exp(-2j * self.delta * (nodes - starts[:, None]))
        self.weights = layout.weights
        self.panel_shift = np.exp(-2j * self.delta * np.diff(layout.edges))

        self.targets = np.concatenate((nodes.ravel(), np.asarray(extra_points, dtype=float)))
        idx, s = layout.locate(self.targets)
        self.target_panel = idx
        self.local = tail_weights(s, layout.nodes_per_panel) * layout.half_widths[idx][:, None]
        self.lift = np.exp(2j * self.delta * (self.targets - starts[idx]))
        self.drop = np.exp(-2j * self.delta * (layout.edges[idx + 1] - self.targets))

    def _accumulate(self, g, tail):
        full = np.sum(self.weights * g, axis=1)
        right = np.empty_like(full)
        right[-1] = tail
        right[:-1] = tail + np.cumsum(full[::-1])[::-1][1:]
        return right

    def _accumulate_oscillatory(self, g_hat, tail):
        full = np.sum(self.weights * g_hat, axis=1)
        right = np.empty_like(full)
        right[-1] = tail
        for k in range(full.size - 2, -1, -1):
            right[k] = full[k + 1] + self.panel_shift[k + 1] * right[k + 1]
        return right

    def apply(self, m_nodes, m_end):
        """
        One application to m sampled on the nodes (m_end its value at x_max).
        Returns (term, derivative term) on all targets.
        """
        g = self.q_nodes * np.asarray(m_nodes).reshape(self.q_nodes.shape)
        g_hat = self.phase * g
        a_right = self._accumulate(g, m_end * self.t0)
        b_right = self._accumulate_oscillatory(g_hat, m_end * self.t1)
        idx = self.target_panel
        a = np.einsum("ij,ij->i", self.local, g[idx]) + a_right[idx]
        b = self.lift * np.einsum("ij,ij->i", self.local, g_hat[idx]) + self.drop * b_right[idx]
        d = self.delta
        return (d / 2j) * (a - b), -(d * d / 2.0) * (a + b)


def volterra_operator(ctx, grid, nodes_per_panel=16, panel_scale=1.0):
    """Operator on the panel layout for ctx with grid, the inlet and x_max as extra targets."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > ctx.x_max:
        raise ValueError(f"grid must be strictly increasing on [0, {ctx.x_max}]")
    max_width = 2.0 / abs(ctx.delta)
    scale = ctx.length_scale if np.isfinite(ctx.length_scale) else max_width
    layout = PanelLayout(graded_edges(ctx.x_max, scale, max_width, panel_scale), int(nodes_per_panel))
    extra = np.concatenate((grid, [0.0, ctx.x_max]))
    return VolterraOperator(layout, ctx.q, ctx.delta, ctx.moments, extra)


def neumann_iterate(operator, m_prev_nodes, m_prev_end):
    """Next normalized term m_n (and its derivative term) from m_{n−1}."""
    term, dterm = operator.apply(m_prev_nodes, m_prev_end)
    peak = np.max(np.abs(term)) if term.size else 0.0
    if not np.all(np.isfinite(term)) or not np.all(np.isfinite(dterm)) or peak > OVERFLOW_LIMIT:
        raise OverflowRisk(f"Neumann term left the representable range (sup {peak:.3e})")
    return term, dterm


def weierstrass_bound(c, n):
    return c**n / math.factorial(n)


def weierstrass_remainder(c, n):
    """Bound on Σ_{k>n} c^k/k!."""
    return c ** (n + 1) / math.factorial(n + 1) * math.exp(c)


@dataclass
class JostSolution:
    grid: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    n_terms: int
    term_norms: np.ndarray
    tail_bound: float
    delta: complex
    c: float
    K: float = KERNEL_CONSTANT
    quadrature_order: int = 0
    fixed_point_residual: float = 0.0
    f_origin: complex = 1 + 0j
    f_prime_origin: complex = 0j
    layout: PanelLayout = None
    node_f: np.ndarray = field(default=None, repr=False)
    node_f_prime: np.ndarray = field(default=None, repr=False)

    @property
    def weierstrass_holds(self):
        bounds = np.array([weierstrass_bound(self.K * self.c, n) for n in range(self.term_norms.size)])
        return bool(np.all(self.term_norms <= bounds * (1.0 + 1e-8) + 1e-14))

    @property
    def normalized_far_field(self):
        """f(x_max) e^{iδ x_max}"""
        x = self.grid[-1]
        return complex(self.f[-1] * np.exp(1j * self.delta * x))


def solve_jost(ctx, grid, tol=1e-10, n_max=50, nodes_per_panel=16, panel_scale=1.0):
    if not tol > 0:
        raise ValueError(f"tol must be > 0 (got {tol})")
    grid = np.asarray(grid, dtype=float)
    op = volterra_operator(ctx, grid, nodes_per_panel, panel_scale)
    n_nodes = op.n_nodes
    delta = ctx.delta
    c = abs(delta) * ctx.q_l1 * KERNEL_CONSTANT

    m_sum = np.ones(op.targets.size, dtype=complex)
    d_sum = np.zeros(op.targets.size, dtype=complex)
    term_norms = [1.0]
    n_terms = 0
    residual = 0.0
    if c > 0:
        m_prev_nodes, m_prev_end = np.ones(n_nodes, dtype=complex), 1 + 0j
        for n in range(1, n_max + 1):
            term, dterm = neumann_iterate(op, m_prev_nodes, m_prev_end)
            m_sum += term
            d_sum += dterm
            norm = float(np.max(np.abs(term)))
            term_norms.append(norm)
            remainder = weierstrass_remainder(c, n)
            logger.debug(f"term {n}: sup {norm:.3e}, remainder bound {remainder:.3e}")
            if norm < tol and remainder < tol:
                n_terms = n
                break
            m_prev_nodes, m_prev_end = term[:n_nodes], term[-1]
        else:
            raise NoConvergence(
                f"Neumann series not below tol={tol:.1e} after {n_max} terms "
                f"(last term {term_norms[-1]:.3e}, |δ|∫|q| = {c:.3f})"
            )
        image, _ = op.apply(m_sum[:n_nodes], m_sum[-1])
        residual = float(np.max(np.abs(1.0 + image - m_sum)))
        if not residual < 10.0 * tol:
            raise NoConvergence(f"fixed-point residual {residual:.3e} >= {10.0 * tol:.1e}")

    eps = np.finfo(float).eps
    tail_bound = (
        (abs(delta) * ctx.q_tail) ** 2 * math.exp(c)
        + (weierstrass_remainder(c, n_terms) if c > 0 else 0.0)
        + 64.0 * eps * (1.0 + c) * math.exp(c)
    )
    if not tail_bound < tol:
        raise TruncationTooShort(
            f"tail bound {tail_bound:.3e} >= tol {tol:.1e}; increase x_max beyond {ctx.x_max}"
        )

    envelope = np.exp(-1j * delta * op.targets)
    f_all = m_sum * envelope
    fp_all = (-1j * delta + d_sum) * envelope
    n_grid = grid.size
    solution = JostSolution(
        grid=grid,
        f=f_all[n_nodes:n_nodes + n_grid],
        f_prime=fp_all[n_nodes:n_nodes + n_grid],
        n_terms=n_terms,
        term_norms=np.asarray(term_norms),
        tail_bound=tail_bound,
        delta=delta,
        c=c,
        quadrature_order=op.layout.order,
        fixed_point_residual=residual,
        f_origin=complex(f_all[n_nodes + n_grid]),
        f_prime_origin=complex(fp_all[n_nodes + n_grid]),
        layout=op.layout,
        node_f=f_all[:n_nodes],
        node_f_prime=fp_all[:n_nodes],
    )
    logger.info(
        f"✅ Jost solution: {n_terms} terms, tail bound {tail_bound:.2e}, f(0) = {solution.f_origin:.12g}"
    )
    return solution
