"""Mooney-Rivlin material model for an incompressible cube.

Strain energy, principal stresses, the Baker-Ericksen inequalities and the
classification of (mu1, mu2) into the regimes that decide which equilibria
exist under equitriaxial dead loads.
"""
import enum
import math
from dataclasses import dataclass
from itertools import combinations

from errors import InvalidModelError, InvalidStretchError

# mu2 = -mu1 * 5**(-5/3) separates E2.1 from E2.2
NEGATIVE_SHIFT_RATIO = 5.0 ** (-5.0 / 3.0)

VOLUME_TOLERANCE = 1e-12
EQUAL_STRETCH_TOLERANCE = 1e-12


class Regime(enum.Enum):
    NEO_HOOKEAN = "NeoHookean"
    E11 = "E11"
    E12 = "E12"
    E21 = "E21"
    E22 = "E22"
    INADMISSIBLE = "Inadmissible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MaterialModel:
    """Mooney-Rivlin coefficients; mu2 = 0 is the neo-Hookean model."""

    mu1: float
    mu2: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu1) and math.isfinite(self.mu2)):
            raise InvalidModelError(f"Coefficients must be finite, got mu1={self.mu1}, mu2={self.mu2}")
        if self.mu1 <= 0:
            raise InvalidModelError(f"mu1 must be positive, got {self.mu1}")
        if self.mu1 + self.mu2 <= 0:
            raise InvalidModelError(f"Shear modulus mu1 + mu2 must be positive, got {self.mu1 + self.mu2}")

    @property
    def mu(self):
        """Infinitesimal shear modulus."""
        return self.mu1 + self.mu2

    @property
    def ratio(self):
        return self.mu2 / self.mu1

    @property
    def is_neo_hookean(self):
        return self.mu2 == 0

    def scaled(self, factor):
        return MaterialModel(self.mu1 * factor, self.mu2 * factor)


@dataclass(frozen=True)
class StretchTriple:
    """Principal stretches of a homogeneous isochoric deformation."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        if min(self.l1, self.l2, self.l3) <= 0:
            raise InvalidStretchError(f"Stretches must be positive, got {self.as_tuple()}")
        volume = self.l1 * self.l2 * self.l3
        if abs(volume - 1.0) > VOLUME_TOLERANCE:
            raise InvalidStretchError(f"Stretches {self.as_tuple()} change volume by {volume - 1.0:.3e}")

    @classmethod
    def identity(cls):
        return cls(1.0, 1.0, 1.0)

    @classmethod
    def two_equal(cls, lam):
        """(lam, lam**-1/2, lam**-1/2), the distinct stretch on axis 1."""
        if lam <= 0:
            raise InvalidStretchError(f"Stretch must be positive, got {lam}")
        lateral = 1.0 / math.sqrt(lam)
        return cls(lam, lateral, lateral)

    @classmethod
    def from_reduced(cls, l1, l2):
        if l1 <= 0 or l2 <= 0:
            raise InvalidStretchError(f"Stretches must be positive, got ({l1}, {l2})")
        return cls(l1, l2, 1.0 / (l1 * l2))

    def as_tuple(self):
        return (self.l1, self.l2, self.l3)

    def permuted(self, order):
        values = self.as_tuple()
        return StretchTriple(*(values[i] for i in order))

    def __iter__(self):
        return iter(self.as_tuple())


def strain_energy(model, stretches):
    """Mooney-Rivlin strain energy per unit reference volume."""
    lams = stretches.as_tuple()
    first = sum(lam * lam for lam in lams) - 3.0
    second = sum(1.0 / (lam * lam) for lam in lams) - 3.0
    return 0.5 * model.mu1 * first + 0.5 * model.mu2 * second


def principal_cauchy_stress(model, stretches, pressure):
    return tuple(
        -pressure + model.mu1 * lam * lam - model.mu2 / (lam * lam)
        for lam in stretches.as_tuple()
    )


def principal_piola_stress(model, stretches, pressure):
    cauchy = principal_cauchy_stress(model, stretches, pressure)
    return tuple(t / lam for t, lam in zip(cauchy, stretches.as_tuple()))


def baker_ericksen_holds(model, stretches):
    """True when mu1 + mu2 * lam_k**2 > 0 for every unequal pair (i, j), k the third index."""
    lams = stretches.as_tuple()
    for i, j in combinations(range(3), 2):
        if abs(lams[i] - lams[j]) <= EQUAL_STRETCH_TOLERANCE:
            continue
        k = 3 - i - j
        if model.mu1 + model.mu2 * lams[k] ** 2 <= 0:
            return False
    return True


def classify_coefficients(mu1, mu2):
    """Regime of a raw coefficient pair; Inadmissible instead of raising."""
    if not (math.isfinite(mu1) and math.isfinite(mu2)):
        return Regime.INADMISSIBLE
    if mu1 <= 0 or mu1 + mu2 <= 0:
        return Regime.INADMISSIBLE
    if mu2 == 0:
        return Regime.NEO_HOOKEAN
    ratio = mu2 / mu1
    if ratio >= 1.0 / 3.0:
        return Regime.E11
    if ratio > 0:
        return Regime.E12
    if ratio > -NEGATIVE_SHIFT_RATIO:
        return Regime.E21
    return Regime.E22


def classify_regime(model):
    return classify_coefficients(model.mu1, model.mu2)


def poynting_sign(model):
    """+1, 0 or -1 for a positive, absent or negative Poynting effect in simple shear."""
    if model.mu2 > 0:
        return 1
    if model.mu2 < 0:
        return -1
    return 0
