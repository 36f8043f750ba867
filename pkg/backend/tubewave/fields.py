"""
Physical amplitudes from the Jost solution.

With F = f/(√G·f(0)) and y0 fixed by the inlet pressure:

    Q1 = πR² y0 F          w1 = −R y0 F'/(2ωi)
    σ1 = 2η y0 (b/a) F'    p1 = y0 B(x) F',  B = (i/(2ω))(hE_∞/R·g1 − Rhω²ρ_m∞·g2)

The residual report substitutes the amplitudes back into the first-order
system (continuity, momentum, wall law, stress law).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from dispersion import liouville_root
from errors import ConfigError, GateError, SolverError

logger = logging.getLogger(__name__)

AMPLITUDES = ("Q1", "u1", "w1", "sigma1", "p1")
EQUATIONS = ("continuity", "momentum", "wall", "stress")


class ForcingError(ConfigError):
    pass


class JostZeroAtOrigin(SolverError):
    pass


class DegenerateBracket(SolverError):
    pass


class DegenerateSlope(SolverError):
    pass


class ResidualTooLarge(GateError):
    pass


class BoundaryMismatch(GateError):
    pass


@dataclass(frozen=True)
class BoundaryForcing:
    p0: float
    omega: float

    def __post_init__(self):
        if isinstance(self.p0, complex) or not np.isfinite(self.p0):
            raise ForcingError(f"forcing.p0 must be a finite real pressure (got {self.p0})")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ForcingError(f"forcing.omega must be > 0 (got {self.omega})")


@dataclass
class FieldSolution:
    grid: np.ndarray
    Q1: np.ndarray
    u1: np.ndarray
    w1: np.ndarray
    sigma1: np.ndarray
    p1: np.ndarray
    y0: complex
    F: np.ndarray
    F_prime: np.ndarray
    omega: float
    p1_origin: complex = 0j
    residuals: dict = field(default_factory=dict)
    # panel layout when the amplitudes live on the solver's Gauss nodes
    layout: object = field(default=None, repr=False)


def pressure_bracket(tube, profile, omega, x):
    """B(x) with p1 = y0·B·F'; follows from p1 = K w1 and the continuity law."""
    g1 = profile.g1.evaluate(x)[0]
    g2 = profile.g2.evaluate(x)[0]
    stiff = tube.h * tube.E_inf / tube.R * g1
    inertia = tube.R * tube.h * omega**2 * tube.rho_m_inf * g2
    return (1j / (2.0 * omega)) * (stiff - inertia)


def wall_modulus(tube, profile, omega, x):
    """K(x) in p1 = K w1."""
    g1 = profile.g1.evaluate(x)[0]
    g2 = profile.g2.evaluate(x)[0]
    return tube.h * tube.E_inf / tube.R**2 * g1 - tube.h * omega**2 * tube.rho_m_inf * g2


def _liouville(G, x, f, f_prime, f_origin):
    value, d1, _ = G(x)
    root = liouville_root(value, G.limit)
    F = f / (root * f_origin)
    F_prime = (f_prime - 0.5 * (d1 / value) * f) / (root * f_origin)
    return F, F_prime


def build_F(jost, G, nodes=False):
    """(F, F') on the output grid, or on the solver's Gauss nodes when nodes=True."""
    if not abs(jost.f_origin) > 1e-12:
        raise JostZeroAtOrigin(f"|f(0)| = {abs(jost.f_origin):.3e}; the inlet pressure cannot be matched")
    if nodes:
        return _liouville(G, jost.layout.nodes.ravel(), jost.node_f, jost.node_f_prime, jost.f_origin)
    return _liouville(G, jost.grid, jost.f, jost.f_prime, jost.f_origin)


def inlet_slope(jost, G):
    """F'(0) from the analytic f'(0)."""
    origin = np.array([0.0])
    _, F_prime = _liouville(G, origin, np.array([jost.f_origin]), np.array([jost.f_prime_origin]), jost.f_origin)
    return complex(F_prime[0])


def boundary_amplitude(forcing, tube, profile, F_prime_at_0, reference=1.0):
    bracket = complex(pressure_bracket(tube, profile, forcing.omega, np.array([0.0]))[0])
    scale = (1j / (2.0 * forcing.omega)) * tube.h * tube.E_inf / tube.R
    if not abs(bracket) > 1e-12 * abs(scale):
        raise DegenerateBracket(
            f"pressure bracket vanishes at the inlet (|B(0)| = {abs(bracket):.3e}); "
            "wall stiffness and inertia cancel"
        )
    if not (np.isfinite(F_prime_at_0) and abs(F_prime_at_0) > 1e-12 * abs(reference)):
        raise DegenerateSlope(f"F'(0) = {F_prime_at_0} is too small to carry the inlet pressure")
    return forcing.p0 / (bracket * F_prime_at_0)


def _assemble(x, F, F_prime, y0, ctx):
    tube, omega = ctx.tube, ctx.omega
    area = np.pi * tube.R**2
    Q1 = area * y0 * F
    return dict(
        Q1=Q1,
        u1=Q1 / area,
        w1=-tube.R * y0 * F_prime / (2j * omega),
        sigma1=2.0 * ctx.spec.eta * y0 * ctx.moduli.ratio * F_prime,
        p1=y0 * pressure_bracket(tube, ctx.profile, omega, x) * F_prime,
    )


def reconstruct(jost, ctx, y0, nodes=False):
    """Amplitudes on the output grid (or on the Gauss nodes for the residual check)."""
    F, F_prime = build_F(jost, ctx.G, nodes=nodes)
    x = jost.layout.nodes.ravel() if nodes else jost.grid
    amplitudes = _assemble(x, F, F_prime, y0, ctx)
    bracket = pressure_bracket(ctx.tube, ctx.profile, ctx.omega, np.array([0.0]))[0]
    p1_origin = complex(y0 * bracket * inlet_slope(jost, ctx.G))
    return FieldSolution(
        grid=x, y0=complex(y0), F=F, F_prime=F_prime, omega=ctx.omega, p1_origin=p1_origin,
        layout=jost.layout if nodes else None, **amplitudes,
    )


def solve_fields(jost, ctx, forcing):
    """y0 from the inlet pressure, then amplitudes on the grid and on the nodes."""
    reference = abs(ctx.delta) / abs(liouville_root(ctx.G(np.array([0.0]))[0], ctx.G.limit)[0])
    y0 = boundary_amplitude(forcing, ctx.tube, ctx.profile, inlet_slope(jost, ctx.G), reference)
    return reconstruct(jost, ctx, y0), reconstruct(jost, ctx, y0, nodes=True)


def closed_form_homogeneous(ctx, forcing, grid):
    """Damped travelling wave of the uniform tube."""
    x = np.asarray(grid, dtype=float)
    tube, omega, delta = ctx.tube, forcing.omega, ctx.delta
    bracket = complex(pressure_bracket(tube, ctx.profile, omega, np.array([0.0]))[0])
    wave = forcing.p0 * np.exp(-1j * delta * x)
    root = np.sqrt(complex(ctx.G.limit))
    Q1 = 1j * np.pi * tube.R**2 * wave / (delta * bracket)
    return FieldSolution(
        grid=x,
        Q1=Q1,
        u1=Q1 / (np.pi * tube.R**2),
        w1=-tube.R * wave / (2j * omega * bracket),
        sigma1=2.0 * ctx.spec.eta * ctx.moduli.ratio * wave / bracket,
        p1=wave,
        y0=forcing.p0 * root / (bracket * -1j * delta),
        F=np.exp(-1j * delta * x) / root,
        F_prime=-1j * delta * np.exp(-1j * delta * x) / root,
        omega=omega,
        p1_origin=complex(forcing.p0),
    )


def _derivative(fields, values, delta):
    if fields.layout is not None:
        return fields.layout.differentiate(values).ravel()
    # the envelope A e^{iδx} is slowly varying; exact for a uniform tube
    x = fields.grid
    envelope = values * np.exp(1j * delta * x)
    return (np.gradient(envelope, x, edge_order=2) - 1j * delta * envelope) * np.exp(-1j * delta * x)


def _relative(residual, *terms):
    scale = max(float(np.max(np.abs(t))) for t in terms)
    peak = float(np.max(np.abs(residual)))
    if scale == 0:
        return 0.0 if peak == 0 else np.inf
    return peak / scale


def residual_report(fields, ctx):
    """Max over x of each equation's residual, relative to its largest term."""
    tube, omega = ctx.tube, ctx.omega
    area = np.pi * tube.R**2
    x = fields.grid
    dQ = _derivative(fields, fields.Q1, ctx.delta)
    dsigma = _derivative(fields, fields.sigma1, ctx.delta)
    dp = _derivative(fields, fields.p1, ctx.delta)

    flux = -2j * np.pi * tube.R * omega * fields.w1
    inertia = tube.rho_f * 1j * omega * fields.Q1
    wall = wall_modulus(tube, ctx.profile, omega, x) * fields.w1
    stress = (2.0 * ctx.spec.eta / area) * ctx.moduli.ratio * dQ

    report = {
        "continuity": _relative(dQ - flux, dQ, flux),
        "momentum": _relative(inertia - area * (dsigma - dp), inertia, area * dsigma, area * dp),
        "wall": _relative(fields.p1 - wall, fields.p1, wall),
        "stress": _relative(fields.sigma1 - stress, fields.sigma1, stress),
    }
    logger.debug(f"residuals: {report}")
    return report


def check_residuals(report, tol):
    failed = {k: v for k, v in report.items() if not v <= tol}
    if failed:
        worst = max(failed, key=failed.get)
        raise ResidualTooLarge(f"{worst} residual {failed[worst]:.3e} exceeds {tol:.1e} ({sorted(failed)})")
    return report


def boundary_error(fields, forcing):
    return abs(fields.p1_origin - forcing.p0) / abs(forcing.p0) if forcing.p0 else abs(fields.p1_origin)


def check_boundary(fields, forcing, tol=1e-10):
    error = boundary_error(fields, forcing)
    if not error <= tol:
        raise BoundaryMismatch(f"|p1(0) − p0|/|p0| = {error:.3e} exceeds {tol:.1e}")
    return error


def time_snapshot(fields, t):
    """Re{amplitude·e^{iωt}} for every field."""
    phase = np.exp(1j * fields.omega * t)
    return {name: np.real(getattr(fields, name) * phase) for name in AMPLITUDES}


def time_series(fields, n_phases):
    """n_phases snapshots evenly spaced over one period."""
    period = 2.0 * np.pi / fields.omega
    return [(t, time_snapshot(fields, t)) for t in period * np.arange(n_phases) / n_phases]
