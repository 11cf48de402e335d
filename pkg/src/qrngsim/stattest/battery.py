"""Run the enabled tests on one stream and combine them into a report."""

from dataclasses import dataclass, field

from ..errors import InsufficientDataError, ParameterDomainError
from .autocorr import lag_scan
from .tests import (FAIL, NOT_APPLICABLE, PASS, TestResult, entropy_test,
                    frequency_test, maurer_universal, runs_test, serial_test)

TEST_NAMES = ("frequency", "serial", "runs", "entropy", "maurer", "autocorr")


@dataclass
class BatteryConfig:
    tests: tuple = TEST_NAMES
    serial_m: int = 2
    entropy_m: int = 8
    maurer_L: int | None = None
    max_lag: int = 2000
    flag_sigma: float = 5.0


@dataclass
class TestReport:
    __test__ = False

    alpha: float
    results: list
    lag_scan: object = None
    corrected_alpha: float = 0.0
    overall: str = FAIL
    scan_source: str | None = None

    @property
    def not_applicable(self):
        return [r for r in self.results if r.verdict == NOT_APPLICABLE]

    @property
    def insufficient(self):
        return [r for r in self.results if r.reason == "insufficient_data"]

    def result(self, name):
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        d = {
            "alpha": self.alpha,
            "corrected_alpha": self.corrected_alpha,
            "overall": self.overall,
            "tests": [r.to_dict() for r in self.results],
        }
        if self.lag_scan is not None:
            d["lag_scan"] = dict(self.lag_scan.to_dict(), bits=self.scan_source)
        return d


def _autocorr_entry(stream, config):
    scan = lag_scan(stream, config.max_lag, config.flag_sigma)
    worst = max((abs(dev) for _, dev in scan.outliers), default=None)
    if worst is None and scan.scan_sigma > 0:
        worst = float(abs(scan.gamma - scan.scan_mean).max() / scan.scan_sigma)
    entry = TestResult(
        "autocorr", {"n_max": config.max_lag, "flag_sigma": config.flag_sigma},
        worst, None, FAIL if scan.outliers else PASS, stream.length,
        {"sigma_deviation": worst})
    return entry, scan


def run_battery(stream, alpha=0.01, config=None):
    """Run every enabled test; the overall verdict uses Bonferroni across p-value tests.

    The lag-scan entry passes iff it flags no outlier; it is not a p-value
    test and does not count towards the correction.
    """
    config = config or BatteryConfig()
    unknown = set(config.tests) - set(TEST_NAMES)
    if unknown:
        raise ParameterDomainError(f"unknown tests: {sorted(unknown)}")
    runners = {
        "frequency": lambda: frequency_test(stream, alpha),
        "serial": lambda: serial_test(stream, config.serial_m, alpha),
        "runs": lambda: runs_test(stream, alpha),
        "entropy": lambda: entropy_test(stream, config.entropy_m, alpha),
        "maurer": lambda: maurer_universal(stream, config.maurer_L, alpha=alpha),
    }
    results, scan = [], None
    for name in TEST_NAMES:
        if name not in config.tests:
            continue
        try:
            if name == "autocorr":
                entry, scan = _autocorr_entry(stream, config)
            else:
                entry = runners[name]()
        except (InsufficientDataError, ParameterDomainError) as exc:
            entry = TestResult(name, {}, None, None, NOT_APPLICABLE, 0,
                               {"detail": str(exc)}, reason="insufficient_data")
        results.append(entry)

    scored = [r for r in results if r.p_value is not None]
    corrected = alpha / len(scored) if scored else alpha
    applicable = [r for r in results if r.verdict != NOT_APPLICABLE]
    failed = any(r.p_value < corrected for r in scored) or any(
        r.name == "autocorr" and r.verdict == FAIL for r in applicable)
    overall = PASS if applicable and not failed else FAIL
    return TestReport(alpha, results, scan, corrected, overall, stream.meta.origin)
