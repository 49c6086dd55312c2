"""Probability laws for uncertain material coefficients.

The shear modulus mu follows a Gamma law and the auxiliary ratio R1 a Beta
law; (mu, R1) map to Mooney-Rivlin coefficients (mu1, mu2) through a shift b.
"""
import enum
import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy import special

from constitutive import NEGATIVE_SHIFT_RATIO
from errors import DomainError, InfeasibleMomentsError


@dataclass(frozen=True)
class GammaParams:
    """Gamma law with shape rho1 and scale rho2 (stress units)."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not (self.rho1 > 0 and self.rho2 > 0):
            raise DomainError(f"Gamma hyperparameters must be positive, got ({self.rho1}, {self.rho2})")

    @property
    def mean(self):
        return self.rho1 * self.rho2

    @property
    def variance(self):
        return self.rho1 * self.rho2 ** 2


@dataclass(frozen=True)
class BetaParams:
    xi1: float
    xi2: float

    def __post_init__(self):
        if not (self.xi1 > 0 and self.xi2 > 0):
            raise DomainError(f"Beta hyperparameters must be positive, got ({self.xi1}, {self.xi2})")

    @property
    def mean(self):
        return self.xi1 / (self.xi1 + self.xi2)

    @property
    def variance(self):
        total = self.xi1 + self.xi2
        return self.xi1 * self.xi2 / (total * total * (total + 1.0))


class ShiftMode(enum.Enum):
    ZERO = "zero"
    NEGATIVE = "negative"
    FIXED = "fixed"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CoefficientMoments:
    mean_mu1: float
    mean_mu2: float
    var_mu1: float
    var_mu2: float
    cov_mu1_mu2: float


def gamma_pdf(g, x):
    if x <= 0:
        return 0.0
    log_density = special.xlogy(g.rho1 - 1.0, x) - x / g.rho2 - g.rho1 * math.log(g.rho2) - special.gammaln(g.rho1)
    return float(math.exp(log_density))


def gamma_cdf(g, x):
    if x <= 0:
        return 0.0
    return float(special.gammainc(g.rho1, x / g.rho2))


def beta_pdf(b, r):
    if r <= 0 or r >= 1:
        return 0.0
    log_density = special.xlogy(b.xi1 - 1.0, r) + special.xlog1py(b.xi2 - 1.0, -r) - special.betaln(b.xi1, b.xi2)
    return float(math.exp(log_density))


def beta_cdf(b, r):
    if r <= 0:
        return 0.0
    if r >= 1:
        return 1.0
    return float(special.betainc(b.xi1, b.xi2, r))


def substream(seed, tag, index=0):
    """Independent generator for (seed, tag, index) over the counter-based Philox bit generator."""
    if seed < 0:
        raise DomainError(f"Seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(tag.encode("utf-8")), int(index)))
    return np.random.Generator(np.random.Philox(sequence))


def sample_gamma(g, stream, size=None):
    """Gamma draws (Marsaglia-Tsang squeeze rejection inside numpy)."""
    return stream.gamma(g.rho1, g.rho2, size)


def sample_beta(b, stream, size=None):
    """Beta draws as X/(X+Y), X ~ Gamma(xi1), Y ~ Gamma(xi2), drawn in that order."""
    x = stream.gamma(b.xi1, 1.0, size)
    y = stream.gamma(b.xi2, 1.0, size)
    return x / (x + y)


def hyperparams_from_moments(mean, variance):
    """Gamma hyperparameters with the given mean and variance."""
    if not (mean > 0 and variance > 0):
        raise InfeasibleMomentsError(f"Gamma moments need mean > 0 and variance > 0, got ({mean}, {variance})")
    scale = variance / mean
    return GammaParams(mean / scale, scale)


def beta_params_from_moments(mean, variance):
    if not 0 < mean < 1:
        raise InfeasibleMomentsError(f"Beta mean must lie in (0, 1), got {mean}")
    bound = mean * (1.0 - mean)
    if not 0 < variance < bound:
        raise InfeasibleMomentsError(f"Beta variance must lie in (0, {bound}), got {variance}")
    total = bound / variance - 1.0
    return BetaParams(mean * total, (1.0 - mean) * total)


def coeffs_from(mu, r1, mode=ShiftMode.ZERO, b=None):
    """Coefficients (mu1, mu2) from a shear modulus draw and a ratio draw.

    ZERO: mu1 = r1 mu. NEGATIVE: mu1 = r1 mu/(1 + c - 2 c r1), c = 5**(-5/3),
    the inverse of R1 = mu1 (1 + c)/(mu + 2 c mu1). FIXED: mu1 = r1 (mu - 2 b) + b.
    """
    if not 0 < r1 < 1:
        raise DomainError(f"r1 must lie in (0, 1), got {r1}")
    if mu <= 0:
        raise DomainError(f"mu must be positive, got {mu}")
    mode = ShiftMode(mode)
    if mode is ShiftMode.ZERO:
        mu1 = r1 * mu
    elif mode is ShiftMode.NEGATIVE:
        c = NEGATIVE_SHIFT_RATIO
        mu1 = r1 * mu / (1.0 + c - 2.0 * c * r1)
    else:
        if b is None:
            raise DomainError("A fixed shift needs a value for b")
        mu1 = r1 * (mu - 2.0 * b) + b
    return mu1, mu - mu1


def ratio_from_coeffs(mu1, mu2, mode=ShiftMode.ZERO, b=None):
    """R1 recovered from (mu1, mu2); the inverse of coeffs_from."""
    mu = mu1 + mu2
    mode = ShiftMode(mode)
    if mode is ShiftMode.ZERO:
        return mu1 / mu
    if mode is ShiftMode.NEGATIVE:
        c = NEGATIVE_SHIFT_RATIO
        return mu1 * (1.0 + c) / (mu + 2.0 * c * mu1)
    if b is None:
        raise DomainError("A fixed shift needs a value for b")
    return (mu1 - b) / (mu - 2.0 * b)


def coeff_moments(g, b, shift_b=0.0):
    """Means, variances and covariance of (mu1, mu2) for independent mu and R1."""
    mean_mu, var_mu = g.mean, g.variance
    mean_r, var_r = b.mean, b.variance
    spread = mean_mu - 2.0 * shift_b

    mean_mu1 = mean_r * spread + shift_b
    mean_mu2 = mean_mu - mean_mu1
    var_mu1 = spread ** 2 * var_r + mean_r ** 2 * var_mu + var_mu * var_r
    var_mu2 = spread ** 2 * var_r + (1.0 - mean_r) ** 2 * var_mu + var_mu * var_r
    cov = 0.5 * (var_mu - var_mu1 - var_mu2)
    return CoefficientMoments(mean_mu1, mean_mu2, var_mu1, var_mu2, cov)
