"""Command-line front end for the Rivlin cube tools.

Commands:
    diagram  equilibria and their stability over a grid of dead loads
    probs    probabilities of the equilibrium counts for a random neo-Hookean cube
    stoch    stochastic bifurcation histogram from a Monte Carlo ensemble
    sample   draws of (mu, R1) and the coefficients they produce
    regime   regime of a coefficient pair
"""
import argparse
import csv
import json
import logging
import os
import signal
import sys
import threading
import time

from constitutive import MaterialModel, classify_coefficients
from equilibria import critical_loads, solve_equilibria
from errors import CubeError, InvalidModelError, SimulationInterrupted, UsageError
from randvars import BetaParams, GammaParams, ShiftMode, coeffs_from, sample_beta, sample_gamma, substream
from stability import classify_equilibrium
from stochastic import (
    SelectionPolicy,
    TauGrid,
    count_probs_nh,
    default_lambda_edges,
    mc_bifurcation_histogram,
    mc_count_probs,
    prob_secondary_regime,
    prob_trivial_stable,
)

VERSION = "1.0.0"
COMMANDS = ("diagram", "probs", "stoch", "sample", "regime")

DIAGRAM_HEADERS = ["tau", "branch", "lambda1", "lambda2", "lambda3", "pressure", "stability", "multiplicity"]
COUNT_HEADERS = ["tau", "P1", "P2", "P3"]
P0_HEADERS = ["tau", "P0"]
STOCH_HEADERS = ["tau", "kind", "lambda_bin_center", "count", "frequency"]
SAMPLE_HEADERS = ["index", "mu", "R1", "mu1", "mu2", "regime"]

DEFAULTS = {
    "command": None,
    "out": None,
    "format": "csv",
    "verbose": False,
    "seed": 20190101,
    "workers": 4,
    "row_timeout": 600.0,
    "mu1": None,
    "mu2": 0.0,
    "gamma": None,
    "beta": None,
    "shift": None,
    "shift_b": None,
    "tau_min": 0.0,
    "tau_max": None,
    "steps": None,
    "trials": None,
    "quantity": "counts",
    "method": "analytic",
    "policy": SelectionPolicy.PREFER_REFERENCE.value,
    "lambda_width": 0.005,
    "lambda_max": 5.0,
    "compare_with": None,
}

CHOICES = {
    "command": COMMANDS,
    "format": ("csv", "json"),
    "shift": ("zero", "negative"),
    "quantity": ("counts", "p0"),
    "method": ("analytic", "mc"),
    "policy": tuple(policy.value for policy in SelectionPolicy),
}


def parse_pair(text):
    """'a,b' (or a two-element list from a config file) as a pair of floats."""
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")


def _boolean(value):
    if isinstance(value, bool):
        return value
    raise argparse.ArgumentTypeError(f"expected true or false, got {value!r}")


def _optional(convert):
    def wrapped(value):
        return None if value is None else convert(value)
    return wrapped


CONVERTERS = {
    "command": str,
    "out": _optional(str),
    "format": str,
    "verbose": _boolean,
    "seed": int,
    "workers": int,
    "row_timeout": float,
    "mu1": _optional(float),
    "mu2": float,
    "gamma": _optional(parse_pair),
    "beta": _optional(parse_pair),
    "shift": _optional(str),
    "shift_b": _optional(float),
    "tau_min": float,
    "tau_max": _optional(float),
    "steps": _optional(int),
    "trials": _optional(int),
    "quantity": str,
    "method": str,
    "policy": str,
    "lambda_width": float,
    "lambda_max": float,
    "compare_with": _optional(str),
}


class ConfigArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = ConfigArgumentParser(
        prog="rivlin_cube.py",
        description="Equilibria, stability and uncertainty of an incompressible cube under equal dead loads",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("command", nargs="?", help=f"Command to run: {', '.join(COMMANDS)}")
    parser.add_argument("--config", dest="config_file", help="Flat JSON file of flag values (flags win)")
    parser.add_argument("--out", help="Output file (default: <command>.<format>)")
    parser.add_argument("--format", choices=CHOICES["format"], help="Output format (default: csv)")
    parser.add_argument("--verbose", action="store_true", help="Enable verbose logging output")
    parser.add_argument("--seed", type=int, help="Non-negative master seed (default: 20190101)")
    parser.add_argument("--workers", type=int, help="Parallel workers for Monte Carlo rows (default: 4)")
    parser.add_argument("--row-timeout", type=float,
                        help="Seconds a single load row may run before the run is cancelled (default: 600)")
    parser.add_argument("--mu1", type=float, help="Coefficient mu1 of a deterministic model")
    parser.add_argument("--mu2", type=float, help="Coefficient mu2 of a deterministic model (default: 0)")
    parser.add_argument("--gamma", type=parse_pair, help="Gamma hyperparameters rho1,rho2 of mu")
    parser.add_argument("--beta", type=parse_pair, help="Beta hyperparameters xi1,xi2 of R1 (Mooney-Rivlin)")
    parser.add_argument("--shift", choices=CHOICES["shift"], help="Shift b for mapping (mu, R1) to (mu1, mu2)")
    parser.add_argument("--shift-b", type=float, help="Explicit shift b (overrides --shift)")
    parser.add_argument("--tau-min", type=float, help="Smallest dead load (default: 0)")
    parser.add_argument("--tau-max", type=float, help="Largest dead load")
    parser.add_argument("--steps", type=int, help="Number of load steps (steps + 1 loads)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per load, or number of samples")
    parser.add_argument("--quantity", choices=CHOICES["quantity"], help="probs: counts (P1..P3) or p0")
    parser.add_argument("--method", choices=CHOICES["method"], help="probs: analytic or mc")
    parser.add_argument("--policy", choices=CHOICES["policy"], help="stoch: state selection policy")
    parser.add_argument("--lambda-width", type=float, help="stoch: stretch bin width (default: 0.005)")
    parser.add_argument("--lambda-max", type=float, help="stoch: largest stretch bin center (default: 5)")
    parser.add_argument("--compare-with", help="Previous CSV output to compare the new rows against")
    return parser


def load_config_file(path):
    """Flag values from a flat JSON object; a run manifest is accepted too."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"--config {path}: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"--config {path}: expected a JSON object")
    if "version" in data and isinstance(data.get("config"), dict):
        data = data["config"]

    values = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in DEFAULTS:
            raise UsageError(f"Unknown configuration key '{key}' in {path}")
        try:
            values[dest] = CONVERTERS[dest](value)
        except (argparse.ArgumentTypeError, TypeError, ValueError) as e:
            raise UsageError(f"Configuration key '{key}' in {path}: {e}")
        if dest in CHOICES and values[dest] is not None and values[dest] not in CHOICES[dest]:
            raise UsageError(f"Configuration key '{key}' in {path} must be one of {', '.join(CHOICES[dest])}")
    return values


def parse_config(argv=None, config_file=None):
    """Resolve defaults, then the config file, then explicit flags into a RunConfig."""
    args = build_parser().parse_args(argv)
    explicit = vars(args)
    config_file = explicit.pop("config_file", config_file)

    values = dict(DEFAULTS)
    if config_file:
        values.update(load_config_file(config_file))
    values.update(explicit)
    return RunConfig(argparse.Namespace(**values))


class RunConfig:
    def __init__(self, args):
        self.command = args.command
        self.format = args.format
        self.out = args.out
        self.verbose = args.verbose
        self.seed = args.seed
        self.workers = args.workers
        self.row_timeout = args.row_timeout
        self.mu1 = args.mu1
        self.mu2 = args.mu2
        self.gamma = tuple(args.gamma) if args.gamma is not None else None
        self.beta = tuple(args.beta) if args.beta is not None else None
        self.shift = args.shift
        self.shift_b = args.shift_b
        self.tau_min = args.tau_min
        self.tau_max = args.tau_max
        self.steps = args.steps
        self.trials = args.trials
        self.quantity = args.quantity
        self.method = args.method
        self.policy = args.policy
        self.lambda_width = args.lambda_width
        self.lambda_max = args.lambda_max
        self.compare_with = args.compare_with

        if self.command not in COMMANDS:
            raise UsageError(f"A command is required: one of {', '.join(COMMANDS)}, got {self.command!r}")
        if self.out is None and self.command != "regime":
            self.out = f"{self.command}.{self.format}"
        self.validate()

    def _require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(f"--{name.replace('_', '-')} is required for '{self.command}'")

    def validate(self):
        """Check the flags the command needs before any computation starts."""
        if self.trials is not None and self.trials < 1:
            raise UsageError(f"--trials must be at least 1, got {self.trials}")
        if self.steps is not None and self.steps < 1:
            raise UsageError(f"--steps must be at least 1, got {self.steps}")
        if self.seed < 0:
            raise UsageError(f"--seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise UsageError(f"--workers must be at least 1, got {self.workers}")
        if self.compare_with is not None and self.format != "csv":
            raise UsageError("--compare-with needs --format csv")
        if self.compare_with is not None and not (os.path.isfile(self.compare_with)
                                                  and os.access(self.compare_with, os.R_OK)):
            raise UsageError(f"--compare-with {self.compare_with}: not a readable file")

        if self.command == "regime":
            self._require("mu1")
            return
        if self.command == "diagram":
            self._require("mu1", "tau_max", "steps")
            try:
                self.model()
            except InvalidModelError as e:
                raise UsageError(f"--mu1/--mu2: {e}")
        elif self.command in ("probs", "stoch"):
            self._require("gamma", "tau_max", "steps")
            if self.command == "stoch" or self.method == "mc":
                self._require("trials")
            if self.command == "probs" and self.tau_min <= 0:
                raise UsageError(f"--tau-min must be positive for 'probs', got {self.tau_min}")
        elif self.command == "sample":
            self._require("gamma", "trials")

        if self.tau_max is not None and not self.tau_min < self.tau_max:
            raise UsageError(f"--tau-min ({self.tau_min}) must be below --tau-max ({self.tau_max})")
        for flag, pair in (("--gamma", self.gamma), ("--beta", self.beta)):
            if pair is not None and not (pair[0] > 0 and pair[1] > 0):
                raise UsageError(f"{flag} hyperparameters must be positive, got {pair[0]},{pair[1]}")
        if self.lambda_width <= 0 or self.lambda_max <= 0:
            raise UsageError("--lambda-width and --lambda-max must be positive")

    def model(self):
        return MaterialModel(self.mu1, self.mu2)

    def grid(self):
        return TauGrid(self.tau_min, self.tau_max, self.steps)

    def gamma_params(self):
        return GammaParams(*self.gamma)

    def beta_params(self):
        return BetaParams(*self.beta) if self.beta is not None else None

    def shift_mode(self):
        if self.shift_b is not None:
            return ShiftMode.FIXED
        return ShiftMode(self.shift or "zero")

    def to_dict(self):
        """Resolved configuration keyed by flag name, loadable with --config."""
        values = {}
        for dest in DEFAULTS:
            value = getattr(self, dest)
            if isinstance(value, tuple):
                value = list(value)
            values[dest.replace("_", "-")] = value
        return values


def _plain(value):
    # numpy scalars to built-in numbers for csv/json
    return value.item() if hasattr(value, "item") else value


class ReportWriter:
    def __init__(self, config):
        self.config = config
        self.verbose = config.verbose

    def write_rows(self, path, headers, rows, fmt="csv"):
        """Write rows to path through a temporary file; nothing is left behind on failure."""
        partial = path + ".part"
        try:
            with open(partial, "w", newline="") as f:
                if fmt == "json":
                    json.dump([dict(zip(headers, map(_plain, row))) for row in rows], f, indent=1)
                    f.write("\n")
                else:
                    writer = csv.writer(f, lineterminator="\n")
                    writer.writerow(headers)
                    for row in rows:
                        writer.writerow([_plain(value) for value in row])
            os.replace(partial, path)
        except BaseException:
            if os.path.exists(partial):
                os.remove(partial)
            raise

        if self.verbose:
            logging.info(f"Wrote {len(rows)} rows to {path}")
        return path

    def write_manifest(self, path, rows, duration_ms, extra=None):
        manifest = {
            "version": VERSION,
            "command": self.config.command,
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "duration_ms": duration_ms,
            "rows": rows,
        }
        if extra:
            manifest.update(extra)
        manifest_path = path + ".manifest.json"
        with open(manifest_path, "w") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        return manifest_path


class RunComparison:
    def __init__(self, config, report_writer):
        self.config = config
        self.report_writer = report_writer
        self.verbose = config.verbose

    @staticmethod
    def _read_rows(path):
        with open(path, "r", newline="") as f:
            reader = csv.reader(f)
            next(reader, None)  # header
            return {",".join(row) for row in reader if row}

    def compare_csv_files(self, current_file, previous_file, output_file):
        """Write rows that are new in current_file or gone from previous_file."""
        current_rows = self._read_rows(current_file)
        previous_rows = self._read_rows(previous_file)

        new_rows = current_rows - previous_rows
        removed_rows = previous_rows - current_rows

        comparison_data = [["New", row] for row in sorted(new_rows)]
        comparison_data += [["Removed", row] for row in sorted(removed_rows)]
        self.report_writer.write_rows(output_file, ["Status", "Row"], comparison_data)

        if self.verbose:
            logging.info(f"Comparison found {len(new_rows)} new rows and {len(removed_rows)} removed rows")
        else:
            print(f"Comparison found {len(new_rows)} new rows and {len(removed_rows)} removed rows")
        return len(new_rows), len(removed_rows)


def _status(config, message):
    if config.verbose:
        logging.info(message)
    else:
        print(message)


def _emit(config, headers, rows, started, extra=None):
    writer = ReportWriter(config)
    path = writer.write_rows(config.out, headers, rows, config.format)
    comparison = path + ".comparison.csv"
    try:
        duration_ms = int(round((time.perf_counter() - started) * 1000))
        writer.write_manifest(path, len(rows), duration_ms, extra)
        if config.compare_with:
            new, removed = RunComparison(config, writer).compare_csv_files(path, config.compare_with, comparison)
            writer.write_manifest(comparison, new + removed, duration_ms, {
                "compare_with": config.compare_with, "compared": path, "new": new, "removed": removed,
            })
    except BaseException:
        # a failed run leaves none of its outputs behind
        for name in (path, path + ".manifest.json", comparison, comparison + ".manifest.json"):
            if os.path.exists(name):
                os.remove(name)
        raise

    _status(config, f"Wrote {len(rows)} rows to {path}")
    return path


def run_diagram(config, cancel_event=None):
    started = time.perf_counter()
    model = config.model()
    rows = []
    for tau in config.grid().points():
        if cancel_event is not None and cancel_event.is_set():
            raise SimulationInterrupted("Diagram cancelled")
        tau = float(tau)
        for eq in solve_equilibria(model, tau):
            rows.append([
                tau, str(eq.branch), *eq.stretches.as_tuple(), eq.pressure,
                str(classify_equilibrium(model, eq)), eq.multiplicity,
            ])

    loads = critical_loads(model)
    extra = {"critical_loads": {
        "regime": str(loads.regime),
        "tau0": loads.tau0,
        "tau_star": loads.tau_star,
        "lambda_star": loads.lambda_star,
        "tau_min": loads.tau_min,
        "tau_max": loads.tau_max,
        "lambda_at_min": loads.lambda_at_min,
        "lambda_at_max": loads.lambda_at_max,
        "turning_points": [list(point) for point in loads.turning_points],
        "three_unequal_interval": list(loads.three_unequal_interval) if loads.three_unequal_interval else None,
    }}
    return _emit(config, DIAGRAM_HEADERS, rows, started, extra)


def run_probs(config, cancel_event=None):
    started = time.perf_counter()
    g = config.gamma_params()
    taus = [float(tau) for tau in config.grid().points()]

    if config.method == "mc":
        counts = mc_count_probs(
            config.grid(), config.trials, g, config.seed, workers=config.workers,
            row_timeout=config.row_timeout, cancel_event=cancel_event, progress=not config.verbose,
        )
    else:
        counts = [count_probs_nh(tau, g) for tau in taus]

    if config.quantity == "p0":
        headers = P0_HEADERS
        if config.method == "mc":
            rows = [[c.tau, c.p1 + c.p3] for c in counts]
        else:
            rows = [[tau, prob_trivial_stable(tau, g)] for tau in taus]
    else:
        headers = COUNT_HEADERS
        rows = [[c.tau, c.p1, c.p2, c.p3] for c in counts]

    extra = None
    if config.beta is not None:
        below, above = prob_secondary_regime(config.beta_params())
        extra = {"secondary_regime": {"p_lt": below, "p_gt": above}}
        _status(config, f"P(mu2 < mu1/3) = {below:.6g}, P(mu2 > mu1/3) = {above:.6g}")
    return _emit(config, headers, rows, started, extra)


def run_stoch(config, cancel_event=None):
    started = time.perf_counter()
    histogram = mc_bifurcation_histogram(
        config.grid(), config.trials, config.gamma_params(),
        b=config.beta_params(),
        mode=config.shift_mode(),
        policy=SelectionPolicy(config.policy),
        seed=config.seed,
        lambda_edges=default_lambda_edges(config.lambda_width, config.lambda_max),
        shift_b=config.shift_b,
        workers=config.workers,
        row_timeout=config.row_timeout,
        cancel_event=cancel_event,
        progress=not config.verbose,
    )

    centers = histogram.bin_centers()
    trials = histogram.trials
    rows = []
    for index, tau in enumerate(histogram.grid.points()):
        tau = float(tau)
        for column in histogram.counts[index].nonzero()[0]:
            count = int(histogram.counts[index, column])
            rows.append([tau, "bin", float(centers[column]), count, count / trials])
        for kind, overflow in (("unstable", histogram.unstable), ("out_of_range", histogram.out_of_range)):
            count = int(overflow[index])
            if count:
                rows.append([tau, kind, None, count, count / trials])
    return _emit(config, STOCH_HEADERS, rows, started)


def run_sample(config, cancel_event=None):
    started = time.perf_counter()
    n = config.trials
    mu = sample_gamma(config.gamma_params(), substream(config.seed, "mu", 0), n)
    b = config.beta_params()
    rows = []
    if b is None:
        for index, value in enumerate(mu):
            value = float(value)
            rows.append([index, value, "", value, 0.0, str(classify_coefficients(value, 0.0))])
    else:
        r1 = sample_beta(b, substream(config.seed, "r1", 0), n)
        mode = config.shift_mode()
        for index, (value, ratio) in enumerate(zip(mu, r1)):
            mu1, mu2 = coeffs_from(float(value), float(ratio), mode, config.shift_b)
            rows.append([index, float(value), float(ratio), mu1, mu2, str(classify_coefficients(mu1, mu2))])
    return _emit(config, SAMPLE_HEADERS, rows, started)


def run_regime(config, cancel_event=None):
    regime = classify_coefficients(config.mu1, config.mu2)
    print(regime)
    return regime


RUNNERS = {
    "diagram": run_diagram,
    "probs": run_probs,
    "stoch": run_stoch,
    "sample": run_sample,
    "regime": run_regime,
}


class CubeRun:
    def __init__(self, config):
        self.config = config
        self.cancel_event = threading.Event()
        self.interrupted = False
        self.previous_handler = None
        if threading.current_thread() is threading.main_thread():
            self.previous_handler = signal.signal(signal.SIGINT, self.signal_handler)

    def signal_handler(self, sig, frame):
        """Handle interrupt signal."""
        logging.info("Ctrl+C detected. Cancelling remaining rows...")
        self.interrupted = True
        self.cancel_event.set()

    def run(self):
        try:
            RUNNERS[self.config.command](self.config, self.cancel_event)
        except SimulationInterrupted as e:
            if self.interrupted:
                _status(self.config, "Run interrupted by user, no output written")
            else:
                logging.error(f"{e}; no output written")
            return 1
        except (CubeError, OSError) as e:
            logging.error(f"{self.config.command} failed: {e}")
            if self.config.verbose:
                import traceback
                logging.error(traceback.format_exc())
            return 1
        finally:
            if self.previous_handler is not None:
                signal.signal(signal.SIGINT, self.previous_handler)
        return 0


def main(argv=None):
    try:
        config = parse_config(argv)
    except UsageError as e:
        print(f"rivlin_cube.py: error: {e}", file=sys.stderr)
        return 2

    logging.basicConfig(level=logging.INFO if config.verbose else logging.WARNING,
                        format='%(asctime)s - %(levelname)s - %(message)s')
    return CubeRun(config).run()


if __name__ == "__main__":
    sys.exit(main())
