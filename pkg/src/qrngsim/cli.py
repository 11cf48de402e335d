"""Command-line front end.

Exit codes: 0 success or overall pass, 1 test failure, 2 usage/config/input
error, 3 I/O error.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bitcore import BitFileError, read_bits, write_bits
from .devsim import DetectorParams, DeviceConfig, noise_fraction, simulate
from .errors import ConfigError, QrngError
from .experiments import DEFAULT_PULSES, SCENARIOS, run_scenario
from .extract import CHUNK_BITS, extract
from .runconfig import RunConfig, load_config
from .stattest import TEST_NAMES, BatteryConfig, run_battery

log = logging.getLogger("qrngsim")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


def _count(text):
    """Non-negative integer that may be written as ``1e7``."""
    try:
        value = int(text)
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value.is_integer():
            raise argparse.ArgumentTypeError(f"not a whole number: {text!r}") from None
        value = int(value)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return value


# (flag, field, type, help); detector fields live under "detector."
DEVICE_FLAGS = [
    ("--pulse-rate-hz", "pulse_rate_hz", float, "LED pulse rate"),
    ("--mu", "mean_photons_per_pulse", float, "mean detectable photons per pulse"),
    ("--split-to-one", "split_to_one", float, "probability a photon takes the long ('1') path"),
    ("--path-delay-ns", "path_delay_ns", float, "extra delay of the long path"),
    ("--window-width-ns", "window_width_ns", float, "width of each coincidence window"),
    ("--window0-offset-ns", "window0_offset_ns", float, "centre of the '0' window in the frame"),
    ("--noise-window-offset-ns", "noise_window_offset_ns", float, "centre of the noise window"),
    ("--jitter-ns", "arrival_jitter_sigma_ns", float, "Gaussian arrival jitter sigma"),
    ("--eta0", "detector.base_efficiency", float, "detector efficiency when fully recovered"),
    ("--recovery-ns", "detector.recovery_time_ns", float, "linear recovery time after an avalanche"),
    ("--dark-rate-hz", "detector.dark_rate_hz", float, "dark count rate per detector"),
    ("--afterpulse-prob", "detector.afterpulse_prob", float, "afterpulse probability per avalanche"),
    ("--afterpulse-tau-ns", "detector.afterpulse_tau_ns", float, "mean afterpulse delay"),
    ("--scheme", "scheme", str, "one_detector or two_detector"),
]


def _device_default(name):
    if name.startswith("detector."):
        return getattr(DetectorParams(), name.split(".", 1)[1])
    return getattr(DeviceConfig(), name)


def _add_device_flags(p):
    g = p.add_argument_group("device overrides (applied on top of --config)")
    for flag, name, typ, text in DEVICE_FLAGS:
        kw = {"choices": ("one_detector", "two_detector")} if name == "scheme" else {}
        g.add_argument(flag, dest="dev_" + name.replace(".", "__"), type=typ, default=None,
                       help=f"{text} (default: {_device_default(name):g})"
                       if typ is float else f"{text} (default: {_device_default(name)})", **kw)
    g.add_argument("--reject-adjacent", dest="dev_reject_adjacent", action="store_true",
                   default=None, help="drop bits whose previous frame also gave a bit "
                   "(default: off)")


def _device_overrides(args):
    top, det = {}, {}
    for key, value in vars(args).items():
        if not key.startswith("dev_") or value is None:
            continue
        name = key[4:]
        if name.startswith("detector__"):
            det[name[len("detector__"):]] = value
        else:
            top[name] = value
    if det:
        top["detector"] = det
    return top


def _run_config(args):
    run = RunConfig()
    if getattr(args, "config", None):
        try:
            run = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from exc
    run.device = run.device.replace(**_device_overrides(args))
    run.device.validate()
    return run


def _check_writable(*paths):
    for path in paths:
        path = Path(path)
        parent = path.parent if str(path.parent) else Path(".")
        if not parent.is_dir():
            raise OutputError(f"output directory {parent} does not exist")
        if path.exists() and not os.access(path, os.W_OK):
            raise OutputError(f"{path} is not writable")
        if not os.access(parent, os.W_OK):
            raise OutputError(f"output directory {parent} is not writable")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def counters_path(out):
    out = Path(out)
    return out.with_name(out.stem + ".counters.json")


def cmd_simulate(args):
    run = _run_config(args)
    pulses = args.pulses or run.pulses or 1_000_000
    seed = args.seed if args.seed is not None else (run.seed if run.seed is not None else 0)
    out = args.out or run.out
    if not out:
        raise UsageError("simulate needs --out (or \"out\" in the config)")
    fmt = args.format or run.format or "packed"
    cpath = counters_path(out)
    _check_writable(out, f"{out}.meta.json", cpath)

    result = simulate(run.device, seed, pulses)
    write_bits(result.raw_bits, out, fmt)
    _write_json(cpath, result.counters_json())

    n = result.raw_bits.length
    c = result.counters
    frac = f"{result.raw_bits.meta.one_fraction:.5f}" if n else "n/a"
    noise = f"{noise_fraction(c):.6f}" if c.zeros + c.ones else "n/a"
    rate = n / pulses * run.device.pulse_rate_hz
    print(f"bits={n} bit_rate={rate:.1f}Hz one_fraction={frac} noise_fraction={noise} "
          f"ambiguous={c.ambiguous} rejected={c.rejected_adjacent}")
    return EXIT_OK


def _read_input(args):
    try:
        return read_bits(args.input, args.in_format)
    except BitFileError as exc:
        raise UsageError(str(exc)) from exc


def cmd_extract(args):
    stream = _read_input(args)
    report_path = args.report or f"{args.out}.report.json"
    _check_writable(args.out, f"{args.out}.meta.json", report_path)
    chunk = CHUNK_BITS if args.chunked else None
    out, report = extract(stream, args.method, args.max_depth, chunk)
    write_bits(out, args.out, args.format)
    _write_json(report_path, report.to_dict())
    eff = report.efficiency_vs_entropy
    print(f"method={report.method} in={report.input_length} out={report.output_length} "
          f"yield={report.yield_per_input_bit:.6f} "
          f"efficiency_vs_entropy={'n/a' if eff is None else f'{eff:.6f}'}")
    return EXIT_OK


def _parse_tests(text):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    aliases = {"autocorrelation": "autocorr", "universal": "maurer", "monobit": "frequency"}
    names = tuple(aliases.get(n, n) for n in names)
    bad = [n for n in names if n not in TEST_NAMES]
    if bad or not names:
        raise UsageError(f"unknown tests {bad}; choose from {', '.join(TEST_NAMES)}")
    return names


def cmd_test(args):
    stream = _read_input(args)
    report_path = args.report or f"{args.input}.test.json"
    _check_writable(report_path)
    config = BatteryConfig(tests=_parse_tests(args.tests), serial_m=args.serial_m,
                           entropy_m=args.entropy_m, maurer_L=args.maurer_L,
                           max_lag=args.max_lag, flag_sigma=args.flag_sigma)
    report = run_battery(stream, args.alpha, config)
    _write_json(report_path, report.to_dict())
    for r in report.results:
        p = "-" if r.p_value is None else f"{r.p_value:.6g}"
        print(f"{r.name:<10} {r.verdict:<15} p={p}")
    if report.lag_scan is not None:
        s = report.lag_scan
        print(f"lag scan n<={s.n_max}: mean={s.scan_mean:.6f} sigma={s.scan_sigma:.3g} "
              f"outliers={[(lag, round(dev, 2)) for lag, dev in s.outliers]}")
    missing = report.insufficient
    if missing:
        print("not applicable (insufficient data): " + ", ".join(r.name for r in missing),
              file=sys.stderr)
        return EXIT_USAGE
    print(f"overall={report.overall} (alpha={args.alpha}, Bonferroni {report.corrected_alpha:.3g})")
    return EXIT_OK if report.overall == "pass" else EXIT_FAIL


def cmd_experiment(args):
    if args.scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.scenario!r}; choose from {', '.join(SCENARIOS)}")
    run = _run_config(args)
    out = args.out or f"{args.scenario}.json"
    _check_writable(out)
    report = run_scenario(args.scenario, args.seed, args.pulses, run.device)
    _write_json(out, report)
    print(f"{args.scenario}: {'holds' if report['holds'] else 'does NOT hold'} -- "
          f"{report['property']}")
    return EXIT_OK if report["holds"] else EXIT_FAIL


def cmd_report(args):
    try:
        data = json.loads(Path(args.input).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"{args.input} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.input} is not JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{args.input} is not a report object")
    if "tests" in data:
        print(f"overall: {data['overall']} at alpha={data['alpha']}")
        for t in data["tests"]:
            print(f"  {t['name']:<10} {t['verdict']:<15} statistic={t['statistic']} "
                  f"p={t['p_value']}")
        if "lag_scan" in data:
            s = data["lag_scan"]
            print(f"  lag scan 1..{s['n_max']}: mean={s['mean']:.6f} sigma={s['sigma']:.3g} "
                  f"outliers={s['outliers']}")
    elif "scenario" in data:
        print(f"scenario {data['scenario']} (seed {data['seed']}, {data['pulses']} pulses): "
              f"{'holds' if data['holds'] else 'does NOT hold'}")
        print(f"  {data['property']}")
        for key, value in data.get("checks", {}).items():
            print(f"  {key}: {value}")
    elif "method" in data:
        for key, value in data.items():
            print(f"{key}: {value}")
    elif "zeros" in data:
        bits = data["zeros"] + data["ones"]
        print(f"pulses={data['pulses']} zeros={data['zeros']} ones={data['ones']} "
              f"noise={data['noise']} ambiguous={data['ambiguous']} "
              f"rejected_adjacent={data['rejected_adjacent']}")
        if bits:
            print(f"one_fraction={data['ones'] / bits:.5f} noise_fraction={data['noise'] / bits:.6f}")
    else:
        raise UsageError(f"{args.input}: unrecognised report layout")
    return EXIT_OK


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="qrng", formatter_class=fmt,
        description="Simulated beamsplitter QRNG: simulate, extract, test, reproduce.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", formatter_class=fmt, help="run the device simulator")
    p.add_argument("--config", help="device or run config JSON")
    p.add_argument("--pulses", type=_count, default=None, help="frames to simulate (default: 1000000)")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (default: 0)")
    p.add_argument("--out", default=None, help="output bit file")
    p.add_argument("--format", choices=("packed", "ascii"), default=None,
                   help="output format (default: packed)")
    _add_device_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", formatter_class=fmt, help="unbias a bit file")
    p.add_argument("--in", dest="input", required=True, help="input bit file")
    p.add_argument("--in-format", choices=("packed", "ascii"), default=None,
                   help="input format; default from the sidecar, else packed")
    p.add_argument("--method", choices=("vn", "von_neumann", "peres"), default="peres")
    p.add_argument("--max-depth", type=int, default=None, help="Peres depth limit (None = unbounded)")
    p.add_argument("--chunked", action="store_true",
                   help=f"extract per {CHUNK_BITS}-bit chunk (loses yield at chunk edges)")
    p.add_argument("--out", required=True, help="output bit file")
    p.add_argument("--format", choices=("packed", "ascii"), default="packed")
    p.add_argument("--report", default=None, help="report JSON (default: <out>.report.json)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("test", formatter_class=fmt, help="run the randomness test battery")
    p.add_argument("--in", dest="input", required=True, help="input bit file")
    p.add_argument("--in-format", choices=("packed", "ascii"), default=None)
    p.add_argument("--tests", default=",".join(TEST_NAMES), help="comma-separated test list")
    p.add_argument("--alpha", type=float, default=0.01, help="per-test significance level")
    p.add_argument("--max-lag", type=int, default=2000, help="largest autocorrelation lag")
    p.add_argument("--flag-sigma", type=float, default=5.0, help="lag-scan outlier threshold")
    p.add_argument("--serial-m", type=int, default=2, help="serial test block length")
    p.add_argument("--entropy-m", type=int, default=8, help="entropy test block length")
    p.add_argument("--maurer-L", type=int, default=None,
                   help="Maurer word size (default: largest the data supports)")
    p.add_argument("--report", default=None, help="report JSON (default: <in>.test.json)")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("experiment", formatter_class=fmt, help="run a packaged scenario")
    p.add_argument("scenario", help="one of: " + ", ".join(SCENARIOS))
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--pulses", type=_count, default=None,
                   help="frames per run (default per scenario: "
                   + ", ".join(f"{k}={v:.0e}" for k, v in DEFAULT_PULSES.items()) + ")")
    p.add_argument("--config", help="base device config JSON")
    p.add_argument("--out", default=None, help="scenario report JSON (default: <scenario>.json)")
    _add_device_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", formatter_class=fmt, help="print a saved JSON report")
    p.add_argument("--in", dest="input", required=True, help="test, extraction, scenario or "
                   "counters JSON")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, QrngError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OutputError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:
        log.exception("internal error")
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
