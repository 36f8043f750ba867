"""
Viscoelastic constitutive model of the liquid.

The stress law is a product of first-order operators: r relaxation times
on the stress side and s retardation times on the rate side. Under the
harmonic ansatz every operator turns into a factor (1 + iωτ), so the whole
model collapses into two complex numbers a and b.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from rapidfuzz import fuzz, process

from errors import ConfigError

logger = logging.getLogger(__name__)


class ClassMismatch(ConfigError):
    pass


class NonpositiveViscosity(ConfigError):
    pass


class NegativeTime(ConfigError):
    pass


class BadFrequency(ConfigError):
    pass


class ModelClass(Enum):
    INSTANTANEOUS_ELASTIC = "InstantaneousElastic"  # r = s + 1
    VISCOUS_AT_LOADING = "ViscousAtLoading"  # r = s


def normalize_model_class(name):
    """Map a user-typed class name (any case/spacing) onto ModelClass."""
    if isinstance(name, ModelClass):
        return name
    known = {c.value.lower(): c for c in ModelClass}
    known.update({c.name.lower(): c for c in ModelClass})
    key = str(name).replace("-", "").replace(" ", "").lower()
    match = process.extractOne(key, known.keys(), scorer=fuzz.ratio)
    if match is None or match[1] < 70:
        raise ConfigError(f"rheology.model_class: unknown model class '{name}'")
    return known[match[0]]


@dataclass(frozen=True)
class RheologySpectrum:
    lambdas: tuple = ()
    thetas: tuple = ()
    eta: float = 1.0
    model_class: ModelClass = ModelClass.VISCOUS_AT_LOADING
    # admits eta == 0 for the lossless (Moens-Korteweg) limit
    inviscid: bool = False

    @property
    def r(self):
        return len(self.lambdas)

    @property
    def s(self):
        return len(self.thetas)


@dataclass(frozen=True)
class ComplexModuli:
    a: complex
    b: complex

    @property
    def ratio(self):
        return self.b / self.a


def validate_spectrum(spec):
    """Return spec unchanged if its class, viscosity and times are consistent."""
    if not np.isfinite(spec.eta) or spec.eta < 0 or (spec.eta == 0 and not spec.inviscid):
        raise NonpositiveViscosity(f"rheology.eta must be > 0 (got {spec.eta})")
    for name, times in (("lambdas", spec.lambdas), ("thetas", spec.thetas)):
        bad = [t for t in times if not t >= 0]
        if bad:
            raise NegativeTime(f"rheology.{name}: times must be >= 0 (got {bad})")
    if spec.model_class is ModelClass.INSTANTANEOUS_ELASTIC and spec.r != spec.s + 1:
        raise ClassMismatch(
            f"rheology: InstantaneousElastic needs r = s + 1, got r={spec.r}, s={spec.s}"
        )
    if spec.model_class is ModelClass.VISCOUS_AT_LOADING and spec.r != spec.s:
        raise ClassMismatch(
            f"rheology: ViscousAtLoading needs r = s, got r={spec.r}, s={spec.s}"
        )
    return spec


def _factor_product(times, omega):
    # ascending order keeps the rounding sequence platform independent
    product = 1 + 0j
    for tau in sorted(times):
        product *= complex(1.0, omega * tau)
    return product


def moduli(spec, omega):
    """a = prod(1 + iωλ_j), b = prod(1 + iωθ_j); empty products are 1."""
    if not np.isfinite(omega) or omega <= 0:
        raise BadFrequency(f"omega must be a positive angular frequency (got {omega})")
    result = ComplexModuli(a=_factor_product(spec.lambdas, omega), b=_factor_product(spec.thetas, omega))
    logger.debug(f"moduli at ω={omega}: a={result.a}, b={result.b}")
    return result
