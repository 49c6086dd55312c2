"""Equilibrium probabilities and Monte Carlo ensembles for cubes with random coefficients.

Each load on a TauGrid is one row. A row draws its coefficients from its own
substream keyed by (seed, tag, row index), so rows can run on any number of
worker threads and still produce identical results.
"""
import concurrent.futures
import enum
import logging
import math
import threading
import time
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from constitutive import MaterialModel, Regime, classify_coefficients
from equilibria import BranchKind, solve_equilibria
from errors import DomainError, SimulationInterrupted
from randvars import ShiftMode, beta_cdf, coeffs_from, gamma_cdf, sample_beta, sample_gamma, substream
from stability import StabilityClass, classify_equilibrium, psi_value

# neo-Hookean cube: one equilibrium for mu > 2**(2/3) tau/3, reference state stable for mu > tau/2
NH_SINGLE_FACTOR = 2.0 ** (2.0 / 3.0) / 3.0
NH_STABLE_FACTOR = 0.5
SECONDARY_RATIO_THRESHOLD = 0.75


@dataclass(frozen=True)
class TauGrid:
    """steps + 1 equally spaced loads from tau_min to tau_max inclusive."""

    tau_min: float
    tau_max: float
    steps: int

    def __post_init__(self):
        if not self.tau_min < self.tau_max:
            raise DomainError(f"tau_min must be below tau_max, got ({self.tau_min}, {self.tau_max})")
        if self.steps < 1:
            raise DomainError(f"steps must be at least 1, got {self.steps}")

    def points(self):
        return np.linspace(self.tau_min, self.tau_max, self.steps + 1)

    def __len__(self):
        return self.steps + 1


@dataclass(frozen=True)
class CountProbabilities:
    tau: float
    p1: float
    p2: float
    p3: float


class SelectionPolicy(enum.Enum):
    PREFER_REFERENCE = "prefer-reference"
    LOWEST_PSI = "lowest-psi"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ObservedState:
    lam: float
    branch: BranchKind
    stability: StabilityClass


@dataclass(frozen=True)
class BifurcationHistogram:
    """Counts of observed stretches per load.

    Trials with no stable state go to `unstable`, stretches outside the edges
    to `out_of_range`; with the binned counts every row sums to `trials`.
    """

    grid: TauGrid
    lambda_edges: np.ndarray
    counts: np.ndarray
    unstable: np.ndarray
    out_of_range: np.ndarray
    trials: int
    seed: int

    def bin_centers(self):
        return 0.5 * (self.lambda_edges[:-1] + self.lambda_edges[1:])

    def frequencies(self):
        return self.counts / self.trials

    def row_totals(self):
        return self.counts.sum(axis=1) + self.unstable + self.out_of_range

    def trivial_bin(self):
        return int(np.searchsorted(self.lambda_edges, 1.0, side="right")) - 1

    def nontrivial_mass(self, row):
        counts = self.counts[row]
        return float(counts.sum() - counts[self.trivial_bin()]) / self.trials


def default_lambda_edges(width=0.005, upper=5.0):
    """Edges of bins centred on 0, width, 2 width, ... upper, so lam = 1 is a bin center."""
    if width <= 0 or upper <= 0:
        raise DomainError(f"Bin width and upper bound must be positive, got ({width}, {upper})")
    bins = int(round(upper / width)) + 1
    return (np.arange(bins + 1) - 0.5) * width


def count_probs_nh(tau, g):
    """Probabilities of one, two or three neo-Hookean equilibrium orbits at tau."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    single = gamma_cdf(g, NH_SINGLE_FACTOR * tau)
    stable = gamma_cdf(g, NH_STABLE_FACTOR * tau)
    return CountProbabilities(tau, 1.0 - single, stable, single - stable)


def prob_trivial_stable(tau, g):
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return 1.0 - gamma_cdf(g, NH_STABLE_FACTOR * tau)


def prob_secondary_regime(b):
    """(P(mu2 < mu1/3), P(mu2 > mu1/3)) when mu1 = R1 mu."""
    below = beta_cdf(b, SECONDARY_RATIO_THRESHOLD)
    return 1.0 - below, below


class WorkerWatchdog:
    """Cancels a run when any row runs longer than max_row_time seconds.

    Rows are not killed: on_timeout sets the shared cancel event, pending rows
    are skipped and a running row stops at its next cancel check.
    """

    def __init__(self, max_row_time=600, on_timeout=None):
        self.max_row_time = max_row_time
        self.row_start_times = {}
        self.row_lock = threading.Lock()
        self.monitor_running = False
        self.monitor_thread = None
        self.on_timeout = on_timeout  # called once per row that overruns

    def start_monitoring(self):
        """Start the monitoring thread."""
        self.monitor_running = True
        self.monitor_thread = threading.Thread(target=self._monitor_rows, daemon=True)
        self.monitor_thread.start()

    def stop_monitoring(self):
        """Stop the monitoring thread."""
        self.monitor_running = False
        if self.monitor_thread:
            self.monitor_thread.join(timeout=1.0)

    def register_start(self, row):
        with self.row_lock:
            self.row_start_times[row] = time.time()

    def register_end(self, row):
        with self.row_lock:
            self.row_start_times.pop(row, None)

    def _monitor_rows(self):
        while self.monitor_running:
            now = time.time()
            overdue = []

            with self.row_lock:
                for row, started in list(self.row_start_times.items()):
                    elapsed = now - started
                    if elapsed > self.max_row_time:
                        overdue.append((row, elapsed))
                        del self.row_start_times[row]

            for row, elapsed in overdue:
                logging.warning(
                    f"Row {row} has run for {elapsed:.1f}s (limit: {self.max_row_time}s), cancelling the run"
                )
                if self.on_timeout:
                    self.on_timeout()

            time.sleep(1.0)


def _run_rows(n_rows, row_fn, workers=1, row_timeout=None, cancel_event=None, progress=False, desc="Rows"):
    """Evaluate row_fn(index, cancel_event) for every row; results keep row order."""
    cancel = cancel_event if cancel_event is not None else threading.Event()
    results = [None] * n_rows

    watchdog = None
    if row_timeout:
        watchdog = WorkerWatchdog(max_row_time=row_timeout, on_timeout=cancel.set)
        watchdog.start_monitoring()

    def run_row(index):
        if cancel.is_set():
            return
        if watchdog:
            watchdog.register_start(index)
        try:
            results[index] = row_fn(index, cancel)
        finally:
            if watchdog:
                watchdog.register_end(index)

    try:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
            futures = [executor.submit(run_row, index) for index in range(n_rows)]
            with tqdm(total=n_rows, desc=desc, unit="row", disable=not progress) as bar:
                for future in concurrent.futures.as_completed(futures):
                    future.result()
                    bar.update(1)
    finally:
        if watchdog:
            watchdog.stop_monitoring()

    finished = sum(result is not None for result in results)
    if finished < n_rows:
        raise SimulationInterrupted(f"Run cancelled after {finished} of {n_rows} rows")
    return results


def mc_count_probs(grid, trials, g, seed, workers=1, row_timeout=None, cancel_event=None, progress=False):
    """Empirical fractions of neo-Hookean cubes with one, two or three equilibrium orbits."""
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    taus = grid.points()

    def row(index, cancel):
        tau = float(taus[index])
        mu = sample_gamma(g, substream(seed, "mu", index), trials)
        if cancel.is_set():
            return None
        single = int(np.count_nonzero(mu > NH_SINGLE_FACTOR * tau))
        stable_lost = int(np.count_nonzero(mu < NH_STABLE_FACTOR * tau))
        rest = trials - single - stable_lost
        return CountProbabilities(tau, single / trials, stable_lost / trials, rest / trials)

    return _run_rows(len(taus), row, workers, row_timeout, cancel_event, progress, desc="Count probabilities")


def observed_stretch(model, tau, policy=SelectionPolicy.PREFER_REFERENCE):
    """Stretch of the state a cube is expected to occupy at load tau.

    The reference state wins while it is stable under PREFER_REFERENCE; among
    other stable or neutrally stable states the lowest Psi wins, then the
    smallest axial stretch. Without any such state lam = 1 is reported as
    Unstable.
    """
    states = [(eq, classify_equilibrium(model, eq)) for eq in solve_equilibria(model, tau)]
    trivial, trivial_class = states[0]
    policy = SelectionPolicy(policy)

    if policy is SelectionPolicy.PREFER_REFERENCE and trivial_class.is_observable:
        return ObservedState(1.0, BranchKind.TRIVIAL, trivial_class)

    candidates = [
        (eq, cls) for eq, cls in states
        if cls.is_observable and (policy is SelectionPolicy.LOWEST_PSI or eq.branch is not BranchKind.TRIVIAL)
    ]
    if not candidates:
        return ObservedState(1.0, BranchKind.TRIVIAL, StabilityClass.UNSTABLE)

    best, best_class = min(
        candidates,
        key=lambda item: (psi_value(model, item[0].stretches, tau), item[0].axial_stretch),
    )
    return ObservedState(best.axial_stretch, best.branch, best_class)


def observed_stretch_nh(mu, tau):
    """Vectorized observed stretch of neo-Hookean cubes with moduli mu at load tau.

    The reference state while mu > tau/2, otherwise the smallest root of
    s**3 - (tau/mu) s + 1 = 0 squared. Returns (lam, stable) arrays.
    """
    mu = np.asarray(mu, dtype=float)
    lam = np.ones_like(mu)
    if tau < 0:
        return lam, np.zeros(mu.shape, dtype=bool)
    stable = np.ones(mu.shape, dtype=bool)
    if tau == 0:
        return lam, stable

    buckled = mu <= NH_STABLE_FACTOR * tau
    if np.any(buckled):
        a = tau / mu[buckled]
        m = 2.0 * np.sqrt(a / 3.0)
        theta = np.arccos(np.clip(-1.5 / a * np.sqrt(3.0 / a), -1.0, 1.0)) / 3.0
        roots = np.stack([m * np.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)])
        s = np.where(roots > 0, roots, np.inf).min(axis=0)
        # one Newton step on s**3 - a s + 1
        s = s - (s ** 3 - a * s + 1.0) / (3.0 * s * s - a)
        lam[buckled] = s * s
    return lam, stable


def _bin_row(lams, stable, edges):
    bins = len(edges) - 1
    index = np.searchsorted(edges, lams, side="right") - 1
    inside = stable & (index >= 0) & (index < bins)
    counts = np.bincount(index[inside], minlength=bins).astype(np.int64)
    unstable = int(np.count_nonzero(~stable))
    out_of_range = int(np.count_nonzero(stable & ~inside))
    return counts, unstable, out_of_range


def mc_bifurcation_histogram(grid, trials, g, b=None, mode=None, policy=SelectionPolicy.PREFER_REFERENCE,
                             seed=0, lambda_edges=None, shift_b=None, workers=1, row_timeout=None,
                             cancel_event=None, progress=False):
    """Histogram of observed stretches over an ensemble of random cubes.

    Without Beta parameters the cubes are neo-Hookean with mu1 = mu; with them
    each trial forms (mu1, mu2) from (mu, R1) through the shift mode.
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    edges = default_lambda_edges() if lambda_edges is None else np.asarray(lambda_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("lambda_edges must be a strictly increasing sequence of at least two values")
    mode = ShiftMode(mode) if mode is not None else ShiftMode.ZERO
    policy = SelectionPolicy(policy)
    taus = grid.points()

    def row(index, cancel):
        tau = float(taus[index])
        mu = sample_gamma(g, substream(seed, "mu", index), trials)
        if cancel.is_set():
            return None
        if b is None and policy is SelectionPolicy.PREFER_REFERENCE:
            lams, stable = observed_stretch_nh(mu, tau)
            if cancel.is_set():
                return None
            return _bin_row(lams, stable, edges)

        if b is None:
            mu1s, mu2s = mu, np.zeros(trials)
        else:
            r1 = sample_beta(b, substream(seed, "r1", index), trials)
            pairs = [coeffs_from(float(m), float(r), mode, shift_b) for m, r in zip(mu, r1)]
            mu1s, mu2s = np.array(pairs).T

        lams = np.ones(trials)
        stable = np.zeros(trials, dtype=bool)
        for trial in range(trials):
            if trial % 256 == 0 and cancel.is_set():
                return None
            mu1, mu2 = float(mu1s[trial]), float(mu2s[trial])
            if classify_coefficients(mu1, mu2) is Regime.INADMISSIBLE:
                continue
            state = observed_stretch(MaterialModel(mu1, mu2), tau, policy)
            lams[trial] = state.lam
            stable[trial] = state.stability.is_observable
        return _bin_row(lams, stable, edges)

    rows = _run_rows(len(taus), row, workers, row_timeout, cancel_event, progress, desc="Stochastic diagram")
    counts = np.vstack([r[0] for r in rows])
    unstable = np.array([r[1] for r in rows], dtype=np.int64)
    out_of_range = np.array([r[2] for r in rows], dtype=np.int64)
    logging.info(f"Histogram over {len(taus)} loads x {trials} trials complete")
    return BifurcationHistogram(grid, edges, counts, unstable, out_of_range, trials, seed)
