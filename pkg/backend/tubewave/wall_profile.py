"""
Axial inhomogeneity of the tube wall.

E(x) = E_inf * g1(x) and rho_m(x) = rho_m_inf * g2(x). Each g is a
ProfileChannel that returns the value and two analytic derivatives; the
tube must become homogeneous far downstream (g -> 1, g', g'' -> 0).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from rapidfuzz import fuzz, process
from scipy.interpolate import CubicSpline

from errors import ConfigError, SolverError

logger = logging.getLogger(__name__)


class BadParameter(ConfigError):
    pass


class PositivityViolation(ConfigError):
    pass


class AsymptoticsViolated(SolverError):
    pass


class ProfileFamily(Enum):
    HOMOGENEOUS = "Homogeneous"
    EXPONENTIAL_BUMP = "ExponentialBump"
    RATIONAL_DECAY = "RationalDecay"
    TABULATED_SPLINE = "TabulatedSpline"


def normalize_family(name):
    """Fuzzy-match a family name typed in a config ("exp_bump", "rational decay", ...)."""
    if isinstance(name, ProfileFamily):
        return name
    known = {f.value.lower(): f for f in ProfileFamily}
    key = str(name).replace("_", "").replace("-", "").replace(" ", "").lower()
    match = process.extractOne(key, known.keys(), scorer=fuzz.ratio)
    if match is None or match[1] < 70:
        raise BadParameter(f"unknown profile family '{name}'")
    return known[match[0]]


class Homogeneous:
    family = ProfileFamily.HOMOGENEOUS
    length_scale = np.inf

    @property
    def parameters(self):
        return {}

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones_like(x), np.zeros_like(x), np.zeros_like(x)

    def tail_factor(self, x):
        return 0.0


class ExponentialBump:
    """g(x) = 1 + A exp(-kappa x)"""

    family = ProfileFamily.EXPONENTIAL_BUMP

    def __init__(self, amplitude, decay_rate):
        self.amplitude = float(amplitude)
        self.decay_rate = float(decay_rate)

    @property
    def parameters(self):
        return {"amplitude": self.amplitude, "decay_rate": self.decay_rate}

    @property
    def length_scale(self):
        return 1.0 / self.decay_rate

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        k = self.decay_rate
        bump = self.amplitude * np.exp(-k * x)
        return 1.0 + bump, -k * bump, k * k * bump

    def tail_factor(self, x):
        # ∫_x^∞ e^{-κξ} dξ = e^{-κx} / κ
        return 1.0 / self.decay_rate


class RationalDecay:
    """g(x) = 1 + A / (1 + kappa x)^2"""

    family = ProfileFamily.RATIONAL_DECAY

    def __init__(self, amplitude, decay_rate):
        self.amplitude = float(amplitude)
        self.decay_rate = float(decay_rate)

    @property
    def parameters(self):
        return {"amplitude": self.amplitude, "decay_rate": self.decay_rate}

    @property
    def length_scale(self):
        return 1.0 / self.decay_rate

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        k = self.decay_rate
        s = 1.0 / (1.0 + k * x)
        a = self.amplitude
        return 1.0 + a * s**2, -2.0 * a * k * s**3, 6.0 * a * k * k * s**4

    def tail_factor(self, x):
        # ∫_x^∞ (1+κξ)^-2 dξ = (1+κx)^-2 * (1+κx)/κ
        return (1.0 + self.decay_rate * x) / self.decay_rate


class TabulatedSpline:
    """
    C2 cubic spline through sampled (x, g) points, blended to the constant 1
    over [x_last, x_last + blend_width] with a quintic smoothstep. With
    blend=False the last sample value is held constant instead, which breaks
    the far-field limit and is only useful for diagnostics.
    """

    family = ProfileFamily.TABULATED_SPLINE

    def __init__(self, xs, gs, blend_width=None, blend=True, source=None):
        xs = np.asarray(xs, dtype=float)
        gs = np.asarray(gs, dtype=float)
        if xs.ndim != 1 or xs.shape != gs.shape or xs.size < 4:
            raise BadParameter("TabulatedSpline needs at least 4 (x, g) samples")
        if np.any(np.diff(xs) <= 0):
            raise BadParameter("TabulatedSpline: x must be strictly increasing")
        if xs[0] < 0:
            raise BadParameter("TabulatedSpline: samples must lie on x >= 0")
        self.xs = xs
        self.gs = gs
        self.blend = bool(blend)
        self.blend_width = float(blend_width) if blend_width is not None else float(xs[-1] - xs[0])
        if self.blend_width <= 0:
            raise BadParameter("TabulatedSpline: blend_width must be > 0")
        self.source = source
        self._spline = CubicSpline(xs, gs)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    @property
    def parameters(self):
        return {
            "table": self.source,
            "samples": int(self.xs.size),
            "blend_width": self.blend_width,
            "blend": self.blend,
        }

    @property
    def length_scale(self):
        return min(self.blend_width, 4.0 * float(np.min(np.diff(self.xs))))

    @property
    def x_end(self):
        return float(self.xs[-1])

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if not self.blend:
            xc = np.minimum(x, self.x_end)
            inside = x <= self.x_end
            return (
                self._spline(xc),
                np.where(inside, self._d1(xc), 0.0),
                np.where(inside, self._d2(xc), 0.0),
            )
        g, g1, g2 = self._spline(x), self._d1(x), self._d2(x)
        t = np.clip((x - self.x_end) / self.blend_width, 0.0, 1.0)
        w = self.blend_width
        s = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
        s1 = 30.0 * t * t * (1.0 - t) ** 2 / w
        s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w)
        rest = 1.0 - s
        value = np.where(t >= 1.0, 1.0, rest * g + s)
        d1 = np.where(t >= 1.0, 0.0, rest * g1 + s1 * (1.0 - g))
        d2 = np.where(t >= 1.0, 0.0, rest * g2 - 2.0 * s1 * g1 + s2 * (1.0 - g))
        return value, d1, d2

    def tail_factor(self, x):
        if not self.blend:
            return np.inf
        return max(self.x_end + self.blend_width - x, 0.0)


def read_table(path):
    """Two whitespace-separated columns: x and g."""
    try:
        data = np.loadtxt(path, dtype=float, ndmin=2)
    except (OSError, ValueError) as e:
        raise BadParameter(f"could not read profile table {path}: {e}") from e
    if data.shape[1] != 2:
        raise BadParameter(f"profile table {path} must have exactly two columns")
    return data[:, 0], data[:, 1]


def make_channel(family, parameters=None):
    family = normalize_family(family)
    p = dict(parameters or {})
    p.pop("family", None)
    if family is ProfileFamily.HOMOGENEOUS:
        channel = Homogeneous()
    elif family in (ProfileFamily.EXPONENTIAL_BUMP, ProfileFamily.RATIONAL_DECAY):
        try:
            amplitude = float(p["amplitude"])
            decay_rate = float(p["decay_rate"])
        except (KeyError, TypeError, ValueError) as e:
            raise BadParameter(f"{family.value} needs numeric 'amplitude' and 'decay_rate': {e}") from e
        if not np.isfinite(decay_rate) or decay_rate <= 0:
            raise BadParameter(f"{family.value}: decay_rate must be > 0 (got {decay_rate})")
        if not np.isfinite(amplitude):
            raise BadParameter(f"{family.value}: amplitude must be finite")
        cls = ExponentialBump if family is ProfileFamily.EXPONENTIAL_BUMP else RationalDecay
        channel = cls(amplitude, decay_rate)
    else:
        if "table" in p:
            xs, gs = read_table(p["table"])
        elif "x" in p and "g" in p:
            xs, gs = p["x"], p["g"]
        else:
            raise BadParameter("TabulatedSpline needs 'table' or 'x'/'g' samples")
        channel = TabulatedSpline(
            xs, gs, blend_width=p.get("blend_width"), blend=p.get("blend", True), source=p.get("table")
        )
    _check_positive(channel)
    return channel


def _check_positive(channel):
    scale = channel.length_scale
    if not np.isfinite(scale):
        return
    extent = 60.0 * scale
    if isinstance(channel, TabulatedSpline):
        extent = max(extent, channel.x_end + 2.0 * channel.blend_width)
    grid = np.linspace(0.0, extent, 4001)
    g = channel.evaluate(grid)[0]
    i = int(np.argmin(g))
    if not g[i] > 0:
        raise PositivityViolation(
            f"{channel.family.value}: g({grid[i]:.6g}) = {g[i]:.6g} is not positive"
        )


@dataclass(frozen=True)
class InhomogeneityProfile:
    g1: object = field(default_factory=Homogeneous)
    g2: object = field(default_factory=Homogeneous)

    @property
    def is_homogeneous(self):
        return isinstance(self.g1, Homogeneous) and isinstance(self.g2, Homogeneous)

    @property
    def length_scale(self):
        return min(self.g1.length_scale, self.g2.length_scale)

    def tail_factor(self, x):
        return max(self.g1.tail_factor(x), self.g2.tail_factor(x))

    def describe(self):
        return f"g1={self.g1.family.value}{self.g1.parameters}, g2={self.g2.family.value}{self.g2.parameters}"


def make_profile(family, parameters=None, g2_family=None, g2_parameters=None):
    """Both channels use (family, parameters) unless g2 is given separately."""
    g1 = make_channel(family, parameters)
    if g2_family is None:
        g2 = make_channel(family, parameters if g2_parameters is None else g2_parameters)
    else:
        g2 = make_channel(g2_family, g2_parameters)
    profile = InhomogeneityProfile(g1=g1, g2=g2)
    logger.debug(f"profile built: {profile.describe()}")
    return profile


@dataclass
class AsymptoticsReport:
    residual: float
    location: float
    channel: str
    decaying: bool
    ladder: list
    # largest residual over the whole ladder
    peak: float = 0.0
    peak_location: float = 0.0
    peak_channel: str = "g1"


def check_asymptotics(profile, x_max, tol):
    """
    Walk a ladder x_k = x_max (1 - 2^-k) up to x_max and measure
    max(|g-1|, |g'|, |g''|) over both channels. The residual gated against
    tol is the one at x_max; peak is the largest residual on the ladder.
    """
    if not x_max > 0:
        raise BadParameter(f"x_max must be > 0 (got {x_max})")
    ladder_x = np.append(x_max * (1.0 - 0.5 ** np.arange(1, 9)), x_max)
    ladder = []
    for x in ladder_x:
        worst, name = 0.0, "g1"
        for label, channel in (("g1", profile.g1), ("g2", profile.g2)):
            g, d1, d2 = (float(v) for v in channel.evaluate(x))
            value = max(abs(g - 1.0), abs(d1), abs(d2))
            if value > worst:
                worst, name = value, label
        ladder.append((float(x), worst, name))
    values = [r for _, r, _ in ladder]
    decaying = all(b <= a * (1 + 1e-9) + 1e-300 for a, b in zip(values, values[1:]))
    location, residual, name = ladder[-1]
    peak_location, peak, peak_channel = max(ladder, key=lambda row: row[1])
    report = AsymptoticsReport(
        residual=residual, location=location, channel=name, decaying=decaying, ladder=ladder,
        peak=peak, peak_location=peak_location, peak_channel=peak_channel,
    )
    if not residual < tol:
        raise AsymptoticsViolated(
            f"{name} has not reached its far-field limit: residual {residual:.3e} >= {tol:.1e} at x={location:.6g}"
        )
    return report
