"""Stability of homogeneous equilibria under equitriaxial dead loads.

A state is tested as a local minimum of the total free energy
Psi = W - tau (l1 + l2 + l3) restricted to isochoric stretches. The
constraint is eliminated exactly: phi(x, y) = Psi(x, y, 1/(x y)). Only
homogeneous diagonal perturbations are examined, so the classes returned
here are the finite-dimensional consequences of the full energy criterion.
"""
import enum
import logging
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from constitutive import Regime, classify_regime, strain_energy
from equilibria import BranchKind, RESIDUAL_TOLERANCE
from errors import DomainError, InconsistentEquilibriumError, RegimeError

EIGENVALUE_TOLERANCE = 1e-8
NH_MARGINAL_TOLERANCE = 1e-10
NH_BRANCH_TOLERANCE = 1e-9

# (x, y) pairs of stretch indices; the third stretch is eliminated
CHARTS = ((0, 1), (1, 2), (2, 0))


class StabilityClass(enum.Enum):
    STABLE = "Stable"
    NEUTRALLY_STABLE = "NeutrallyStable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"

    def __str__(self):
        return self.value

    @property
    def is_observable(self):
        return self in (StabilityClass.STABLE, StabilityClass.NEUTRALLY_STABLE)


@dataclass(frozen=True)
class PsiEvaluation:
    value: float
    gradient: tuple
    hessian: tuple

    def hessian_matrix(self):
        return np.array(self.hessian, dtype=float)


def psi_value(model, stretches, tau):
    return strain_energy(model, stretches) - tau * sum(stretches.as_tuple())


def reduced_psi_derivatives(model, x, y, tau):
    """Value, gradient and Hessian of phi(x, y) = Psi(x, y, 1/(x y))."""
    if x <= 0 or y <= 0:
        raise DomainError(f"Stretches must be positive, got ({x}, {y})")
    mu1, mu2 = model.mu1, model.mu2
    z = 1.0 / (x * y)

    value = (
        0.5 * mu1 * (x * x + y * y + z * z - 3.0)
        + 0.5 * mu2 * (1.0 / (x * x) + 1.0 / (y * y) + x * x * y * y - 3.0)
        - tau * (x + y + z)
    )

    gx = mu1 * (x - x ** -3 * y ** -2) + mu2 * (x * y * y - x ** -3) - tau * (1.0 - x ** -2 / y)
    gy = mu1 * (y - x ** -2 * y ** -3) + mu2 * (x * x * y - y ** -3) - tau * (1.0 - y ** -2 / x)

    hxx = mu1 * (1.0 + 3.0 * x ** -4 * y ** -2) + mu2 * (3.0 * x ** -4 + y * y) - 2.0 * tau * x ** -3 / y
    hyy = mu1 * (1.0 + 3.0 * x ** -2 * y ** -4) + mu2 * (3.0 * y ** -4 + x * x) - 2.0 * tau * y ** -3 / x
    hxy = 2.0 * mu1 * x ** -3 * y ** -3 + 2.0 * mu2 * x * y - tau * x ** -2 * y ** -2

    return PsiEvaluation(value, (gx, gy), ((hxx, hxy), (hxy, hyy)))


def stability_scale(model, tau):
    return model.mu * (1.0 + abs(tau) / model.mu)


def reduced_hessian_eigenvalues(model, stretches, tau):
    """Eigenvalues of the reduced Hessian in each of the three charts."""
    lams = stretches.as_tuple()
    return [
        np.linalg.eigvalsh(reduced_psi_derivatives(model, lams[i], lams[j], tau).hessian_matrix())
        for i, j in CHARTS
    ]


def classify_equilibrium(model, equilibrium):
    tau = equilibrium.tau
    residual = equilibrium.residual(model)
    if residual > RESIDUAL_TOLERANCE * max(1.0, abs(tau)):
        raise InconsistentEquilibriumError(
            f"State {equilibrium.stretches.as_tuple()} is not in equilibrium at tau={tau} "
            f"(residual {residual:.3e})"
        )

    if tau < 0:
        return StabilityClass.UNSTABLE
    if tau == 0:
        return StabilityClass.NEUTRALLY_STABLE

    tolerance = EIGENVALUE_TOLERANCE * stability_scale(model, tau)
    eigenvalues = np.concatenate(reduced_hessian_eigenvalues(model, equilibrium.stretches, tau))
    smallest = float(eigenvalues.min())

    if smallest < -tolerance:
        return StabilityClass.UNSTABLE
    if smallest <= tolerance:
        return StabilityClass.MARGINAL
    if equilibrium.branch is BranchKind.TRIVIAL:
        return StabilityClass.STABLE
    return StabilityClass.NEUTRALLY_STABLE


def nh_closed_form_stability(mu, lam, tau):
    """Neo-Hookean two-equal states: neutrally stable iff lam < tau/(3 mu)."""
    if mu <= 0 or lam <= 0:
        raise DomainError(f"Need mu > 0 and lam > 0, got mu={mu}, lam={lam}")
    if abs(lam - 1.0) <= 1e-12:
        raise DomainError("lam = 1 is the reference state, not a two-equal branch point")
    on_branch = mu * (lam + 1.0 / math.sqrt(lam))
    if abs(on_branch - tau) > NH_BRANCH_TOLERANCE * max(1.0, abs(tau)):
        raise DomainError(f"(lam={lam}, tau={tau}) is not on the neo-Hookean branch (tau would be {on_branch})")

    critical = tau / (3.0 * mu)
    if abs(lam - critical) <= NH_MARGINAL_TOLERANCE * max(1.0, lam):
        return StabilityClass.MARGINAL
    if lam < critical:
        return StabilityClass.NEUTRALLY_STABLE
    return StabilityClass.UNSTABLE


def infimum_function(lam):
    """(lam**5/2 - 2 lam**3/2 + lam)/(lam**3/2 - 1) on (0, 1).

    With s = sqrt(lam) this is s**2 (s**2 + s - 1)/(s**2 + s + 1); the
    factored form is used near lam = 1 where the quotient is 0/0.
    """
    if lam <= 0 or lam >= 1:
        raise DomainError(f"lam must lie in (0, 1), got {lam}")
    s = math.sqrt(lam)
    if 1.0 - lam < 1e-4:
        return s * s * (s * s + s - 1.0) / (s * s + s + 1.0)
    return (lam ** 2.5 - 2.0 * lam ** 1.5 + lam) / (lam ** 1.5 - 1.0)


_infimum_lock = threading.Lock()
_infimum_cache = {}


def _infimum():
    with _infimum_lock:
        if "result" not in _infimum_cache:
            result = minimize_scalar(
                lambda s: infimum_function(s * s),
                bounds=(1e-6, 1.0 - 1e-9),
                method="bounded",
                options={"xatol": 1e-12},
            )
            _infimum_cache["result"] = (float(result.fun), float(result.x) ** 2)
            logging.debug(f"Infimum threshold {result.fun:.6f} at lam={result.x ** 2:.6f}")
        return _infimum_cache["result"]


def infimum_threshold():
    """Smallest mu2/mu1 ratio for which tau_max exceeds 2 mu in regime E21 (about -0.045)."""
    return _infimum()[0]


def infimum_minimizer():
    return _infimum()[1]


def has_stable_plate_past_tau0(model):
    """True when neutrally stable plates survive past the loss of stability of the reference state."""
    regime = classify_regime(model)
    if regime is not Regime.E21:
        raise RegimeError(f"Defined for regime E21 only, got {regime}")
    return infimum_threshold() < model.ratio < 0
