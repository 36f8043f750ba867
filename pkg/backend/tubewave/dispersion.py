"""
Frequency-domain scattering data for one (tube, liquid, wall profile, ω).

Eliminating stress, pressure and wall displacement from the amplitude
equations leaves (G Q1')' = Q1 with

    G(x) = (2η/(ρ_f ω))·b/(ia) − (c0²/ω²)·g1(x) + (R h ρ_m∞/(2ρ_f))·g2(x).

The Liouville substitution y = Q1·√G turns it into y'' + I y = 0, and with
δ² = lim I = −1/G_∞ into y'' + δ² y = δ² q y, q = 1 − I/δ².
"""

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from errors import ConfigError, SolverError
from quadrature import PanelLayout, graded_edges
from rheology import moduli, validate_spectrum

logger = logging.getLogger(__name__)

G_FLOOR = 1e-12


class TubeParameterError(ConfigError):
    pass


class GVanishes(SolverError):
    pass


class DegenerateG(SolverError):
    pass


class NotIntegrable(SolverError):
    pass


@dataclass(frozen=True)
class TubeSystem:
    R: float
    h: float
    rho_f: float
    rho_m_inf: float
    E_inf: float
    c0_sq: float = field(init=False)

    def __post_init__(self):
        for name in ("R", "h", "rho_f", "E_inf"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise TubeParameterError(f"tube.{name} must be > 0 (got {value})")
        if not (np.isfinite(self.rho_m_inf) and self.rho_m_inf >= 0):
            raise TubeParameterError(f"tube.rho_m_inf must be >= 0 (got {self.rho_m_inf})")
        object.__setattr__(self, "c0_sq", self.h * self.E_inf / (2.0 * self.R * self.rho_f))

    @property
    def c0(self):
        return float(np.sqrt(self.c0_sq))


class CoefficientG:
    """G(x) with its first two derivatives; only the g-terms depend on x."""

    def __init__(self, tube, mod, profile, omega, eta):
        self.tube = tube
        self.moduli = mod
        self.profile = profile
        self.omega = omega
        self.viscous = (2.0 * eta / (tube.rho_f * omega)) * mod.b / (1j * mod.a)
        self.stiffness = tube.c0_sq / omega**2
        self.inertia = tube.R * tube.h * tube.rho_m_inf / (2.0 * tube.rho_f)

    @property
    def limit(self):
        return complex(self.viscous - self.stiffness + self.inertia)

    @property
    def is_uniform(self):
        return self.profile.is_homogeneous

    def __call__(self, x):
        g1, d1g1, d2g1 = self.profile.g1.evaluate(x)
        g2, d1g2, d2g2 = self.profile.g2.evaluate(x)
        value = self.viscous - self.stiffness * g1 + self.inertia * g2
        d1 = -self.stiffness * d1g1 + self.inertia * d1g2
        d2 = -self.stiffness * d2g1 + self.inertia * d2g2
        return np.asarray(value, dtype=complex), np.asarray(d1, dtype=complex), np.asarray(d2, dtype=complex)

    def check_nonvanishing(self, grid):
        """Distance from 0 to the polyline through the samples must exceed the floor."""
        value = self(grid)[0]
        floor = G_FLOOR * abs(self.limit)
        start, step = value[:-1], np.diff(value)
        length = np.abs(step) ** 2
        t = np.divide(-np.real(np.conj(start) * step), length, out=np.zeros_like(length), where=length > 0)
        distance = np.abs(start + np.clip(t, 0.0, 1.0) * step)
        if distance.size == 0:
            distance = np.abs(value)
        i = int(np.argmin(distance))
        if not distance[i] > floor:
            raise GVanishes(
                f"G vanishes near x = {grid[i]:.6g} (|G| below {floor:.3e}); "
                "a turning point of the coefficient is outside the model"
            )


def coefficient_G(tube, spec, profile, omega, grid=None):
    G = CoefficientG(tube, moduli(spec, omega), profile, omega, spec.eta)
    if grid is not None:
        G.check_nonvanishing(np.asarray(grid, dtype=float))
    return G


def _is_uniform(G):
    return bool(getattr(G, "is_uniform", False))


def _floor(G, value):
    limit = getattr(G, "limit", None)
    scale = abs(limit) if limit is not None else float(np.max(np.abs(value), initial=0.0))
    return G_FLOOR * scale


class Invariant:
    """
    I(x) = ¼(G'/G)² − ½ G''/G − 1/G for any callable x -> (G, G', G'');
    a CoefficientG also supplies its far-field limit and uniformity.
    """

    def __init__(self, G):
        self.coefficient = G

    def __call__(self, x):
        G = self.coefficient
        if _is_uniform(G):
            return np.full(np.shape(x), -1.0 / G.limit, dtype=complex)
        value, d1, d2 = (np.asarray(v, dtype=complex) for v in G(x))
        if np.any(np.abs(value) <= _floor(G, value)):
            raise GVanishes("G vanishes where the invariant is evaluated")
        ratio = d1 / value
        return 0.25 * ratio**2 - 0.5 * d2 / value - 1.0 / value


def invariant_I(G):
    return Invariant(G)


def scaled(G, c):
    """The coefficient x -> c·(G, G', G'')."""
    c = complex(c)
    if c == 0:
        raise DegenerateG("scaling a coefficient by 0")
    return lambda x: tuple(c * np.asarray(v, dtype=complex) for v in G(x))


@dataclass(frozen=True)
class Wavenumber:
    delta_sq: complex
    delta: complex
    k0: float
    k1: float


def select_root(delta_sq):
    """Root with Im δ < 0; a real root is taken with Re δ > 0."""
    delta = complex(np.sqrt(complex(delta_sq)))
    if delta.imag > 0 or (delta.imag == 0 and delta.real < 0):
        delta = -delta
    return delta


def wavenumber(G):
    """δ² = −1/G_∞ with k0 + i k1 := −G_∞ reported for diagnostics."""
    g_inf = G.limit if isinstance(G, CoefficientG) else complex(G)
    if g_inf == 0 or not np.isfinite(g_inf):
        raise DegenerateG(f"far-field coefficient G_inf = {g_inf} admits no wavenumber")
    delta_sq = -1.0 / g_inf
    return Wavenumber(delta_sq=delta_sq, delta=select_root(delta_sq), k0=float(-g_inf.real), k1=float(-g_inf.imag))


class Potential:
    """
    q(x) = 1 − I(x)/δ², evaluated as (G − G_∞)/G + G_∞(¼(G'/G)² − ½G''/G)
    with G_∞ = −1/δ², which is the same expression without the cancellation.
    """

    def __init__(self, invariant, delta_sq):
        if delta_sq == 0:
            raise DegenerateG("δ² = 0")
        self.invariant = invariant
        self.delta_sq = complex(delta_sq)

    def __call__(self, x):
        G = getattr(self.invariant, "coefficient", None)
        if G is None:
            return 1.0 - np.asarray(self.invariant(x)) / self.delta_sq
        if _is_uniform(G):
            return np.zeros(np.shape(x), dtype=complex)
        g_inf = -1.0 / self.delta_sq
        value, d1, d2 = (np.asarray(v, dtype=complex) for v in G(x))
        ratio = d1 / value
        return (value - g_inf) / value + g_inf * (0.25 * ratio**2 - 0.5 * d2 / value)


def potential_q(invariant, delta_sq):
    return Potential(invariant, delta_sq)


@dataclass
class IntegrabilityCertificate:
    q_l1: float
    interior: float
    tail: float
    q_end: float
    x_max: float


def certify_integrability(q, x_max, tol, tail_factor=None, length_scale=np.inf):
    """
    ∫_0^∞ |q| ≤ interior + tail: interior by composite Gauss-Legendre on
    [0, x_max] (checked against a panel-halved rerun), tail = |q(x_max)| times
    the decay factor of the profile family.
    """
    scale = length_scale if np.isfinite(length_scale) else x_max
    results = []
    for panel_scale in (1.0, 0.5):
        layout = PanelLayout(graded_edges(x_max, scale, x_max / 64.0, panel_scale), 16)
        values = np.abs(q(layout.nodes.ravel()))
        results.append((layout.integrate(values), float(np.max(values))))
    interior, q_max = results[1]
    coarse = results[0][0]
    if not np.isfinite(interior) or abs(interior - coarse) > 1e-6 * interior + tol:
        raise NotIntegrable(
            f"∫|q| does not settle under refinement ({coarse:.6e} vs {interior:.6e})"
        )
    q_end = float(np.abs(q(np.array([x_max])))[0])
    q_half = float(np.abs(q(np.array([0.5 * x_max])))[0])
    decaying = q_end <= 1e-12 * q_max or (q_end <= q_half and q_end <= max(1e-3 * q_max, tol))
    if q_max == 0:
        decaying = True
    if not decaying:
        raise NotIntegrable(
            f"q does not decay: |q(x_max)| = {q_end:.3e}, |q(x_max/2)| = {q_half:.3e}, max |q| = {q_max:.3e}"
        )
    factor = tail_factor(x_max) if tail_factor is not None else 0.0
    if q_end == 0:
        tail = 0.0
    elif not np.isfinite(factor):
        raise NotIntegrable(f"profile has no decaying far field beyond x_max = {x_max}")
    else:
        tail = q_end * factor
    cert = IntegrabilityCertificate(q_l1=interior + tail, interior=interior, tail=tail, q_end=q_end, x_max=x_max)
    logger.debug(f"integrability: ∫|q| ≈ {cert.q_l1:.6e} (tail {tail:.3e})")
    return cert


def _real_quad(func, a, weight=None, wvar=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if weight is None:
            return quad(func, a, np.inf, epsabs=1e-15, epsrel=1e-12, limit=400)[0]
        return quad(func, a, np.inf, weight=weight, wvar=wvar, epsabs=1e-15, limlst=200)[0]


def far_field_moments(q, delta, x):
    """
    T0 = ∫_x^∞ q dξ and T1 = ∫_x^∞ e^{−2iδ(ξ−x)} q dξ: the far field seen
    by the Volterra kernel from the truncation point x.
    """
    probe = q(np.array([x, 2.0 * x + 1.0]))
    if not np.any(probe):
        return 0j, 0j
    q_real = lambda u: float(np.real(q(np.array([x + u]))[0]))
    q_imag = lambda u: float(np.imag(q(np.array([x + u]))[0]))
    t0 = complex(_real_quad(q_real, 0.0), _real_quad(q_imag, 0.0))
    damp = 2.0 * delta.imag
    freq = 2.0 * delta.real
    h_real = lambda u: np.exp(damp * u) * q_real(u)
    h_imag = lambda u: np.exp(damp * u) * q_imag(u)
    if freq == 0:
        t1 = complex(_real_quad(h_real, 0.0), _real_quad(h_imag, 0.0))
    else:
        a = _real_quad(h_real, 0.0, "cos", freq)
        b = _real_quad(h_imag, 0.0, "sin", freq)
        c = _real_quad(h_imag, 0.0, "cos", freq)
        d = _real_quad(h_real, 0.0, "sin", freq)
        t1 = complex(a + b, c - d)
    return t0, t1


def liouville_root(values, g_inf):
    """Continuous branch of √G anchored at the principal √G_∞."""
    ratio = np.asarray(values, dtype=complex) / g_inf
    near_cut = (ratio.real < 0) & (np.abs(ratio.imag) <= 1e-12 * np.abs(ratio))
    if np.any(near_cut):
        raise GVanishes("G(x)/G_inf reaches the negative real axis; √G has no continuous branch")
    return np.sqrt(complex(g_inf)) * np.sqrt(ratio)


@dataclass
class ScatteringContext:
    omega: float
    tube: TubeSystem
    spec: object
    profile: object
    moduli: object
    G: CoefficientG
    I: Invariant
    q: object
    delta: complex
    delta_sq: complex
    k0: float
    k1: float
    certificate: IntegrabilityCertificate
    x_max: float
    length_scale: float
    moments: tuple = (0j, 0j)

    @property
    def q_l1(self):
        return self.certificate.q_l1

    @property
    def q_tail(self):
        return self.certificate.tail

    def with_potential(self, q, tol=1e-10, tail_factor=None, length_scale=None):
        """Same context with q replaced (manufactured potentials in checks)."""
        scale = self.length_scale if length_scale is None else length_scale
        cert = certify_integrability(q, self.x_max, tol, tail_factor, scale)
        return replace(
            self, q=q, certificate=cert, length_scale=scale,
            moments=far_field_moments(q, self.delta, self.x_max),
        )


def build_context(tube, spec, profile, omega, x_max, tol=1e-10):
    validate_spectrum(spec)
    G = coefficient_G(tube, spec, profile, omega)
    wave = wavenumber(G)
    probe = PanelLayout(
        graded_edges(x_max, profile.length_scale, 2.0 / abs(wave.delta)), 16
    ).nodes.ravel()
    G.check_nonvanishing(np.concatenate(([0.0], probe, [x_max])))
    I = invariant_I(G)
    q = potential_q(I, wave.delta_sq)
    cert = certify_integrability(q, x_max, tol, profile.tail_factor, profile.length_scale)
    ctx = ScatteringContext(
        omega=omega, tube=tube, spec=spec, profile=profile, moduli=G.moduli, G=G, I=I, q=q,
        delta=wave.delta, delta_sq=wave.delta_sq, k0=wave.k0, k1=wave.k1,
        certificate=cert, x_max=float(x_max), length_scale=profile.length_scale,
        moments=far_field_moments(q, wave.delta, x_max),
    )
    logger.info(
        f"✅ scattering context at ω={omega:.6g}: δ={ctx.delta:.6g}, ∫|q|≈{ctx.q_l1:.3e}"
    )
    return ctx
