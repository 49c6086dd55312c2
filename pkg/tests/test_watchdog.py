"""Tests for WorkerWatchdog: overrunning rows cancel the run."""
import threading
import time

import numpy as np
import pytest

import stochastic
from errors import SimulationInterrupted
from stochastic import TauGrid, WorkerWatchdog, _run_rows


class TestWorkerWatchdog:
    """WorkerWatchdog tracks row start times and fires on_timeout."""

    def test_start_stop(self):
        watchdog = WorkerWatchdog(max_row_time=5)
        watchdog.start_monitoring()
        assert watchdog.monitor_running is True
        assert watchdog.monitor_thread.is_alive()
        watchdog.stop_monitoring()
        assert watchdog.monitor_running is False

    def test_register_start_end(self):
        watchdog = WorkerWatchdog(max_row_time=5)
        watchdog.register_start(3)
        assert 3 in watchdog.row_start_times
        watchdog.register_end(3)
        assert 3 not in watchdog.row_start_times

    def test_register_end_unknown_row(self):
        WorkerWatchdog(max_row_time=5).register_end(42)  # should not raise

    def test_timeout_fires_once_per_row(self):
        """An overdue row is dropped from tracking after its first report."""
        fired = []
        watchdog = WorkerWatchdog(max_row_time=0.1, on_timeout=lambda: fired.append(1))
        watchdog.start_monitoring()
        watchdog.register_start(0)
        time.sleep(1.5)
        watchdog.stop_monitoring()
        assert len(fired) == 1

    def test_fast_row_not_flagged(self):
        fired = []
        watchdog = WorkerWatchdog(max_row_time=5, on_timeout=lambda: fired.append(1))
        watchdog.start_monitoring()
        watchdog.register_start(0)
        time.sleep(0.2)
        watchdog.register_end(0)
        time.sleep(1.2)
        watchdog.stop_monitoring()
        assert fired == []

    def test_no_callback(self):
        watchdog = WorkerWatchdog(max_row_time=0.1)
        watchdog.start_monitoring()
        watchdog.register_start(0)
        time.sleep(1.2)
        watchdog.stop_monitoring()  # should not raise


class TestRunRows:
    """Row evaluation over the worker pool."""

    def test_results_keep_row_order(self):
        def row(index, cancel):
            time.sleep(0.01 * (5 - index))
            return index * index

        assert _run_rows(5, row, workers=4) == [0, 1, 4, 9, 16]

    def test_cancelled_before_start(self):
        cancel = threading.Event()
        cancel.set()
        with pytest.raises(SimulationInterrupted):
            _run_rows(3, lambda index, c: index, cancel_event=cancel)

    def test_row_returning_none_interrupts(self):
        with pytest.raises(SimulationInterrupted):
            _run_rows(3, lambda index, c: None if index == 1 else index)

    def test_timeout_cancels_cooperative_rows(self):
        """A stuck row trips the watchdog, which sets the shared cancel event."""
        def row(index, cancel):
            deadline = time.time() + 10
            while time.time() < deadline:
                if cancel.is_set():
                    return None
                time.sleep(0.05)
            return index

        started = time.time()
        with pytest.raises(SimulationInterrupted):
            _run_rows(2, row, workers=2, row_timeout=0.1)
        assert time.time() - started < 5


class TestHistogramCancellation:
    """Histogram rows stop when the cancel event fires while they run."""

    def test_neo_hookean_row_stops_after_cancel(self, mocker, shear_gamma):
        cancel = threading.Event()
        real = stochastic.observed_stretch_nh

        def cancelling(mu, tau):
            cancel.set()
            return real(mu, tau)

        mocker.patch("stochastic.observed_stretch_nh", side_effect=cancelling)
        with pytest.raises(SimulationInterrupted):
            stochastic.mc_bifurcation_histogram(TauGrid(0.9, 1.1, 1), 50, shear_gamma, cancel_event=cancel)

    def test_count_row_skips_work_once_cancelled(self, mocker, shear_gamma):
        cancel = threading.Event()

        def cancelling(g, generator, size):
            cancel.set()
            return np.ones(size)

        mocker.patch("stochastic.sample_gamma", side_effect=cancelling)
        with pytest.raises(SimulationInterrupted):
            stochastic.mc_count_probs(TauGrid(0.9, 1.1, 1), 50, shear_gamma, seed=3, cancel_event=cancel)
