"""
Composite Gauss-Legendre panels on [0, x_max].

Besides plain panel quadrature this provides the two interpolatory tools
the Volterra solver and the residual checks need: integration of the
panel interpolant from an arbitrary point to the panel end, and exact
differentiation of the interpolant at the Gauss nodes.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

logger = logging.getLogger(__name__)

GRADING = 0.2


def leggauss_ab(n, a=-1.0, b=1.0):
    x, w = legendre.leggauss(n)
    return (b - a) * 0.5 * x + (b + a) * 0.5, w * (b - a) * 0.5


def _coefficient_matrix(tau, weights):
    # Legendre coefficients of the Lagrange basis on the Gauss nodes:
    # C[k, j] = (2k+1)/2 * w_j * P_k(tau_j), exact because Gauss is exact to degree 2n-1
    n = tau.size
    vander = legendre.legvander(tau, n - 1)  # (n, n): P_k(tau_j)
    return (vander * weights[:, None]).T * ((2 * np.arange(n) + 1) / 2.0)[:, None]


def tail_weights(s, n):
    """
    W[i, j] = ∫_{s_i}^{1} L_j(τ) dτ for the Lagrange basis L_j on n Gauss nodes.
    Row for s = -1 reproduces the Gauss weights, row for s = 1 is zero.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    tau, weights = legendre.leggauss(n)
    coeff = _coefficient_matrix(tau, weights)
    p = legendre.legvander(s, n)  # P_0..P_n at s
    antider = np.empty((s.size, n))
    antider[:, 0] = 1.0 - s
    k = np.arange(1, n)
    # ∫_s^1 P_k = -(P_{k+1}(s) - P_{k-1}(s)) / (2k+1)
    antider[:, 1:] = -(p[:, k + 1] - p[:, k - 1]) / (2 * k + 1)
    return antider @ coeff


def differentiation_matrix(n):
    """D[i, j] = L_j'(τ_i) on the reference panel [-1, 1]."""
    tau, weights = legendre.leggauss(n)
    coeff = _coefficient_matrix(tau, weights)
    dvander = np.empty((n, n))
    for k in range(n):
        unit = np.zeros(n)
        unit[k] = 1.0
        dvander[:, k] = legendre.legval(tau, legendre.legder(unit))
    return dvander @ coeff


def graded_edges(x_max, length_scale, max_width, panel_scale=1.0):
    """
    Panel edges graded from the inlet: the width at x is
    panel_scale * min(w0 + GRADING * x, max_width), w0 = min(length_scale / 4, max_width).
    Halving panel_scale halves every width, and the layout depends on x_max
    only through the last panel.
    """
    if not x_max > 0:
        raise ValueError(f"x_max must be > 0 (got {x_max})")
    if not panel_scale > 0:
        raise ValueError(f"panel_scale must be > 0 (got {panel_scale})")
    w0 = min(length_scale / 4.0, max_width)
    edges = [0.0]
    while edges[-1] < x_max:
        step = min(w0 + GRADING * edges[-1], max_width) * panel_scale
        edges.append(min(edges[-1] + step, x_max))
    if len(edges) > 2 and edges[-1] - edges[-2] < 0.25 * (edges[-2] - edges[-3]):
        del edges[-2]
    return np.asarray(edges)


@dataclass
class PanelLayout:
    edges: np.ndarray
    nodes_per_panel: int

    @property
    def n_panels(self):
        return self.edges.size - 1

    @property
    def half_widths(self):
        return 0.5 * np.diff(self.edges)

    @property
    def nodes(self):
        """Gauss nodes, shape (n_panels, nodes_per_panel)."""
        tau, _ = legendre.leggauss(self.nodes_per_panel)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        return mid[:, None] + self.half_widths[:, None] * tau[None, :]

    @property
    def weights(self):
        _, w = legendre.leggauss(self.nodes_per_panel)
        return self.half_widths[:, None] * w[None, :]

    @property
    def order(self):
        return 2 * self.nodes_per_panel

    def locate(self, x):
        """Panel index and reference coordinate s in [-1, 1] of each point."""
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.n_panels - 1)
        mid = 0.5 * (self.edges[idx] + self.edges[idx + 1])
        s = np.clip((x - mid) / self.half_widths[idx], -1.0, 1.0)
        return idx, s

    def integrate(self, values):
        """∫ over [0, x_max] of samples given at the nodes."""
        return np.sum(self.weights * np.asarray(values).reshape(self.n_panels, -1))

    def differentiate(self, values):
        """Exact derivative of the per-panel interpolant at the nodes."""
        values = np.asarray(values).reshape(self.n_panels, self.nodes_per_panel)
        d = differentiation_matrix(self.nodes_per_panel)
        return (values @ d.T) / self.half_widths[:, None]
