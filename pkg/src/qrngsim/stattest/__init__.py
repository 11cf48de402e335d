"""Randomness test battery: circular autocorrelation scan and classic bit tests."""

from .autocorr import LagScan, autocorrelation, lag_scan, xor_counts
from .battery import TEST_NAMES, BatteryConfig, TestReport, run_battery
from .tests import (FAIL, MAURER_TABLE, NOT_APPLICABLE, PASS, TestResult,
                    block_entropy, entropy_test, frequency_test, maurer_default_L,
                    maurer_statistic, maurer_universal, runs_test, serial_test)

__all__ = [
    "FAIL", "MAURER_TABLE", "NOT_APPLICABLE", "PASS", "TEST_NAMES", "BatteryConfig",
    "LagScan", "TestReport", "TestResult", "autocorrelation", "block_entropy",
    "entropy_test", "frequency_test", "lag_scan", "maurer_default_L",
    "maurer_statistic", "maurer_universal", "run_battery", "runs_test",
    "serial_test", "xor_counts",
]
