"""Homogeneous equilibria of the cube under equal dead loads on its faces.

The two-equal branches (one stretch lam, two stretches lam**-1/2) follow
tau = (mu1 + mu2/lam)(lam + lam**-1/2). Three unequal stretches can balance
the load only when mu1 = mu2 (l1 l2 + l2 l3 + l3 l1), which needs
0 < mu2 < mu1/3.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from constitutive import Regime, StretchTriple, classify_regime
from errors import DomainError, InconsistentEquilibriumError, RegimeError

ROOT_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-9
TRIVIAL_MERGE_TOLERANCE = 1e-8
DISTINCT_ROOT_TOLERANCE = 1e-8

_EPS = np.finfo(float).eps


class BranchKind(enum.Enum):
    TRIVIAL = "Trivial"
    ROD_LIKE = "RodLike"
    PLATE_LIKE = "PlateLike"
    THREE_UNEQUAL = "ThreeUnequal"

    def __str__(self):
        return self.value


MULTIPLICITY = {
    BranchKind.TRIVIAL: 1,
    BranchKind.ROD_LIKE: 3,
    BranchKind.PLATE_LIKE: 3,
    BranchKind.THREE_UNEQUAL: 6,
}


@dataclass(frozen=True)
class Equilibrium:
    """One equilibrium orbit in canonical orientation.

    Rod-like states carry the long axis on axis 1, plate-like states the
    short one, three-unequal states are sorted in decreasing order.
    """

    stretches: StretchTriple
    branch: BranchKind
    pressure: float
    tau: float

    @property
    def multiplicity(self):
        return MULTIPLICITY[self.branch]

    @property
    def axial_stretch(self):
        return self.stretches.l1

    def residual(self, model):
        """Largest deviation of mu1 l**2 - mu2/l**2 - tau l - p from zero."""
        return max(
            abs(model.mu1 * lam * lam - model.mu2 / (lam * lam) - self.tau * lam - self.pressure)
            for lam in self.stretches
        )


@dataclass(frozen=True)
class CriticalLoads:
    regime: Regime
    tau0: float
    tau_star: Optional[float] = None
    lambda_star: Optional[float] = None
    tau_min: Optional[float] = None
    tau_max: Optional[float] = None
    lambda_at_min: Optional[float] = None
    lambda_at_max: Optional[float] = None
    turning_points: tuple = ()
    three_unequal_interval: Optional[tuple] = None


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    tau: float
    branch: BranchKind


def real_cubic_roots(a, b, c, d, merge_tolerance=1e-6):
    """Real roots of a*x**3 + b*x**2 + c*x + d in increasing order.

    Three distinct roots come from the trigonometric form, one from Cardano's
    formula; a discriminant within rounding of zero gives the double root in
    closed form. Roots are polished by Newton steps and roots closer than
    merge_tolerance (relative) are reported once.
    """
    if a == 0:
        raise DomainError("Leading coefficient of a cubic must be non-zero")
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d

    magnitude = 4.0 * abs(p) ** 3 + 27.0 * q * q
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    if magnitude == 0.0:
        depressed = [0.0]
    elif disc > 1e-12 * magnitude:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        depressed = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    elif disc < -1e-12 * magnitude:
        root = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
        depressed = [float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))]
    else:
        depressed = [3.0 * q / p, -3.0 * q / (2.0 * p)]

    def poly(x):
        return ((x + b) * x + c) * x + d

    def slope(x):
        return (3.0 * x + 2.0 * b) * x + c

    roots = []
    for t in depressed:
        x = t - shift
        for _ in range(4):
            fx, dfx = poly(x), slope(x)
            if dfx == 0.0:
                break
            candidate = x - fx / dfx
            if abs(poly(candidate)) >= abs(fx):
                break
            x = candidate
        roots.append(x)

    roots.sort()
    merged = []
    for x in roots:
        if merged and abs(x - merged[-1]) <= merge_tolerance * max(1.0, abs(x)):
            merged[-1] = 0.5 * (merged[-1] + x)
        else:
            merged.append(x)
    return merged


def dead_load_two_equal(model, lam):
    """Dead load holding the two-equal configuration (lam, lam**-1/2, lam**-1/2)."""
    if lam <= 0:
        raise DomainError(f"Stretch must be positive, got {lam}")
    if model.mu2 < 0 and lam <= -model.mu2 / model.mu1:
        raise DomainError(
            f"lam={lam} violates the Baker-Ericksen bound lam > {-model.mu2 / model.mu1}"
        )
    return (model.mu1 + model.mu2 / lam) * (lam + 1.0 / math.sqrt(lam))


def _tau_of_s(model, s):
    # two-equal map in s = sqrt(lam)
    return (model.mu1 + model.mu2 / (s * s)) * (s * s + 1.0 / s)


def _grow(predicate, start, factor):
    x = start
    for _ in range(400):
        if predicate(x):
            return x
        x *= factor
    raise DomainError(f"Could not bracket a root starting from {start}")


def _stationary_s(model):
    """Stationary points of the two-equal map, as s = sqrt(lam), increasing."""
    mu1, mu2 = model.mu1, model.mu2
    if mu2 == 0:
        return [2.0 ** (-1.0 / 3.0)]

    def h(s):
        return 2.0 * mu1 * s ** 5 - mu1 * s * s - 3.0 * mu2

    # h decreases on (0, s_min) and increases afterwards
    s_min = 5.0 ** (-1.0 / 3.0)
    if h(s_min) >= 0:
        return []
    upper = _grow(lambda s: h(s) > 0, max(1.0, 2.0 * s_min), 2.0)
    right = brentq(h, s_min, upper, xtol=1e-15, rtol=4 * _EPS, maxiter=500)
    if mu2 > 0:
        return [right]
    left = brentq(h, math.sqrt(-mu2 / mu1), s_min, xtol=1e-15, rtol=4 * _EPS, maxiter=500)
    return [left, right]


def turning_points(model):
    """(lam, tau) at the stationary points of the two-equal map."""
    return tuple((s * s, _tau_of_s(model, s)) for s in _stationary_s(model))


def _two_equal_stretches(model, tau):
    """All lam > 0 (within the Baker-Ericksen bound) with dead_load_two_equal(lam) = tau."""
    if model.is_neo_hookean:
        roots = real_cubic_roots(1.0, 0.0, -tau / model.mu1, 1.0)
        return [s * s for s in roots if s > 0]

    def g(s):
        return _tau_of_s(model, s) - tau

    stationary = _stationary_s(model)
    if model.mu2 < 0:
        lower = math.sqrt(-model.mu2 / model.mu1)
    else:
        lower = _grow(lambda s: g(s) > 0, 0.5 * min(stationary + [1.0]), 0.5)
    upper = _grow(lambda s: g(s) > 0, 2.0 * max(stationary + [1.0]), 2.0)

    tolerance = ROOT_TOLERANCE * max(1.0, abs(tau))
    roots = [s for s in stationary if abs(g(s)) <= tolerance]
    knots = [lower] + [s for s in stationary if lower < s < upper] + [upper]
    for left, right in zip(knots[:-1], knots[1:]):
        g_left, g_right = g(left), g(right)
        if abs(g_left) <= tolerance or abs(g_right) <= tolerance:
            continue
        if g_left * g_right < 0:
            roots.append(brentq(g, left, right, xtol=1e-15, rtol=4 * _EPS, maxiter=500))

    roots.sort()
    distinct = []
    for s in roots:
        if not distinct or abs(s - distinct[-1]) > ROOT_TOLERANCE * max(1.0, s):
            distinct.append(s)
    return [s * s for s in distinct]


def recover_three_unequal(model, lambda3):
    """(l1, l2), l1 >= l2, completing a three-unequal state with third stretch lambda3.

    They are the roots of x**2 - sigma x + 1/lambda3 with
    sigma = (mu1/mu2 - 1/lambda3)/lambda3.
    """
    if model.mu2 <= 0:
        raise RegimeError("Three unequal stretches need mu2 > 0")
    if lambda3 <= 0:
        raise DomainError(f"Stretch must be positive, got {lambda3}")
    k = model.mu1 / model.mu2
    sigma = (k - 1.0 / lambda3) / lambda3
    product = 1.0 / lambda3
    disc = sigma * sigma - 4.0 * product
    if sigma <= 0 or disc < -1e-12 * sigma * sigma:
        raise DomainError(f"lambda3={lambda3} is outside the real three-unequal branch")
    big = 0.5 * (sigma + math.sqrt(max(disc, 0.0)))
    return big, product / big


def dead_load_three_unequal(model, lambda3):
    """Dead load on the three-unequal branch, parametrized by lambda3."""
    recover_three_unequal(model, lambda3)
    k = model.mu1 / model.mu2
    return model.mu2 / lambda3 * (k + lambda3 * lambda3) * (k - 1.0 / lambda3)


def unequal_constraint_residual(model, stretches):
    l1, l2, l3 = stretches.as_tuple()
    return model.mu1 - model.mu2 * (l1 * l2 + l2 * l3 + l3 * l1)


def three_unequal_interval(model):
    """Closed lambda3 interval on which the three-unequal branch has real stretches.

    Its ends are the plate and rod stretches where the branch meets the
    two-equal branches; their equal stretch u solves u**3 - (mu1/mu2) u + 2 = 0.
    """
    if classify_regime(model) is not Regime.E12:
        raise RegimeError(f"Three-unequal branch exists only in E12, not {classify_regime(model)}")
    k = model.mu1 / model.mu2
    roots = [u for u in real_cubic_roots(1.0, 0.0, -k, 2.0) if u > 0]
    if len(roots) != 2:
        raise InconsistentEquilibriumError(f"Expected two intersection stretches, found {roots}")
    rod_side, plate_side = roots
    return (1.0 / plate_side ** 2, 1.0 / rod_side ** 2)


def _three_unequal_stretches(model, tau):
    """Canonical stretch triples of three-unequal equilibria at load tau.

    Under the constraint tau = mu2 (l1 + l2)(l2 + l3)(l3 + l1), so the three
    stretches are the roots of k t**3 - (1 + tau/mu2) t**2 + k**2 t - k with
    k = mu1/mu2.
    """
    if model.mu2 <= 0:
        return []
    k = model.mu1 / model.mu2
    if k <= 3.0:
        return []
    roots = real_cubic_roots(k, -(1.0 + tau / model.mu2), k * k, -k)
    if len(roots) != 3 or roots[0] <= 0:
        return []
    if min(roots[1] - roots[0], roots[2] - roots[1]) <= DISTINCT_ROOT_TOLERANCE * roots[2]:
        return []
    lambda3 = roots[0]
    big, middle = recover_three_unequal(model, lambda3)
    return [tuple(sorted((big, middle, lambda3), reverse=True))]


def _build_equilibrium(model, stretches, branch, tau):
    l1 = stretches.l1
    pressure = model.mu1 * l1 * l1 - model.mu2 / (l1 * l1) - tau * l1
    equilibrium = Equilibrium(stretches, branch, pressure, tau)
    residual = equilibrium.residual(model)
    if residual > RESIDUAL_TOLERANCE * max(1.0, abs(tau)):
        raise InconsistentEquilibriumError(
            f"{branch} state {stretches.as_tuple()} at tau={tau} has residual {residual:.3e}"
        )
    return equilibrium


def trivial_equilibrium(model, tau):
    return _build_equilibrium(model, StretchTriple.identity(), BranchKind.TRIVIAL, tau)


def two_equal_equilibrium(model, lam, tau=None):
    """Canonical equilibrium on the two-equal branch at axial stretch lam."""
    if tau is None:
        tau = dead_load_two_equal(model, lam)
    if abs(lam - 1.0) <= TRIVIAL_MERGE_TOLERANCE:
        return trivial_equilibrium(model, tau)
    branch = BranchKind.ROD_LIKE if lam > 1.0 else BranchKind.PLATE_LIKE
    return _build_equilibrium(model, StretchTriple.two_equal(lam), branch, tau)


def solve_equilibria(model, tau):
    """Every homogeneous equilibrium orbit at dead load tau.

    The reference state always comes first; for tau <= 0 it is the only one.
    """
    equilibria = [trivial_equilibrium(model, tau)]
    if tau <= 0:
        return equilibria

    for lam in _two_equal_stretches(model, tau):
        if abs(lam - 1.0) <= TRIVIAL_MERGE_TOLERANCE:
            continue
        equilibria.append(two_equal_equilibrium(model, lam, tau))

    for triple in _three_unequal_stretches(model, tau):
        equilibria.append(
            _build_equilibrium(model, StretchTriple(*triple), BranchKind.THREE_UNEQUAL, tau)
        )

    logging.debug(f"tau={tau}: {len(equilibria)} equilibrium orbits")
    return equilibria


def critical_loads(model):
    """Bifurcation and turning-point loads of the model's regime."""
    regime = classify_regime(model)
    tau0 = 2.0 * (model.mu1 + model.mu2)
    points = turning_points(model)

    if regime is Regime.NEO_HOOKEAN:
        lambda_star = 2.0 ** (-2.0 / 3.0)
        return CriticalLoads(
            regime, tau0,
            tau_star=3.0 * model.mu / 2.0 ** (2.0 / 3.0),
            lambda_star=lambda_star,
            turning_points=points,
        )

    if regime is Regime.E21:
        (lambda_at_max, tau_max), (lambda_at_min, tau_min) = points
        return CriticalLoads(
            regime, tau0,
            tau_min=tau_min, tau_max=tau_max,
            lambda_at_min=lambda_at_min, lambda_at_max=lambda_at_max,
            turning_points=points,
        )

    if regime is Regime.E12:
        interval = three_unequal_interval(model)
        plate, rod = interval
        return CriticalLoads(
            regime, tau0,
            tau_min=dead_load_two_equal(model, plate),
            tau_max=dead_load_two_equal(model, rod),
            lambda_at_min=plate, lambda_at_max=rod,
            turning_points=points,
            three_unequal_interval=interval,
        )

    return CriticalLoads(regime, tau0, turning_points=points)


def branch_trace(model, lambdas):
    """(lam, tau, branch) along the two-equal branches; lam outside the domain is skipped."""
    trace = []
    for lam in lambdas:
        lam = float(lam)
        if lam <= 0 or (model.mu2 < 0 and lam <= -model.mu2 / model.mu1):
            continue
        if abs(lam - 1.0) <= ROOT_TOLERANCE:
            branch = BranchKind.TRIVIAL
        else:
            branch = BranchKind.ROD_LIKE if lam > 1.0 else BranchKind.PLATE_LIKE
        trace.append(BranchPoint(lam, dead_load_two_equal(model, lam), branch))
    return trace
