import json
import subprocess
import sys

import pytest

from qrngsim.bitcore import BitStream, read_bits, write_bits
from qrngsim.cli import DEVICE_FLAGS, build_parser, main
from qrngsim.devsim import DeviceConfig
from conftest import iid_stream


@pytest.fixture
def default_json(tmp_path):
    path = tmp_path / "default.json"
    path.write_text(json.dumps(DeviceConfig().to_dict()))
    return path


def test_simulate_writes_files_and_is_idempotent(tmp_path, default_json, capsys):
    out = tmp_path / "raw.bits"
    args = ["simulate", "--config", str(default_json), "--pulses", "200000", "--seed", "42",
            "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes(), (tmp_path / "raw.bits.meta.json").read_text(), \
        (tmp_path / "raw.counters.json").read_text()
    line = capsys.readouterr().out
    assert "bits=" in line and "one_fraction=" in line and "noise_fraction=" in line
    assert main(args) == 0
    again = out.read_bytes(), (tmp_path / "raw.bits.meta.json").read_text(), \
        (tmp_path / "raw.counters.json").read_text()
    assert first == again
    counters = json.loads(first[2])
    assert set(counters) == {"zeros", "ones", "noise", "ambiguous", "rejected_adjacent", "pulses"}
    meta = json.loads(first[1])
    assert meta["length_bits"] == counters["zeros"] + counters["ones"]


def test_simulate_one_fraction(tmp_path, capsys):
    out = tmp_path / "raw.bits"
    assert main(["simulate", "--pulses", "10000000", "--seed", "1", "--out", str(out)]) == 0
    frac = read_bits(out).meta.one_fraction
    assert abs(frac - 0.40) <= 0.001


def test_simulate_ascii(tmp_path):
    out = tmp_path / "raw.txt"
    assert main(["simulate", "--pulses", "20000", "--out", str(out), "--format", "ascii"]) == 0
    text = out.read_text().strip()
    assert set(text) <= {"0", "1"}
    assert read_bits(out).to_string() == text


def test_invalid_invariant_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"path_delay_ns": 5}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x.bits")]) == 2
    err = capsys.readouterr().err
    assert "path_delay_ns" in err and "window_width_ns" in err


def test_schema_error_reports_json_path(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"device": {"detector": {"dark_rate_hz": "lots"}}, "pulses": 10}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x.bits")]) == 2
    assert "device.detector.dark_rate_hz" in capsys.readouterr().err


def test_malformed_json(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x.bits")]) == 2


def test_run_config_wrapper(tmp_path):
    cfg = tmp_path / "run.json"
    out = tmp_path / "r.bits"
    cfg.write_text(json.dumps({"device": {"mean_photons_per_pulse": 0.2}, "pulses": 5000,
                               "seed": 3, "out": str(out)}))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "r.counters.json").read_text())["pulses"] == 5000


def test_unwritable_output_exit_3(tmp_path):
    assert main(["simulate", "--pulses", "10", "--out", str(tmp_path / "no" / "x.bits")]) == 3


def test_unknown_flag_exit_2():
    assert main(["simulate", "--bogus"]) == 2


def test_help_lists_every_flag_with_defaults(capsys):
    assert main(["simulate", "--help"]) == 0
    text = capsys.readouterr().out
    for flag, name, _, _ in DEVICE_FLAGS:
        assert flag in text
    assert "default: 1e+06" in text and "default: 0.1)" in text
    assert "default: 60" in text and "default: 1000" in text
    assert "--reject-adjacent" in text


def test_extract_vn_and_peres(tmp_path, capsys):
    raw = tmp_path / "raw.bits"
    write_bits(iid_stream(1, 1 << 22, 0.4), raw)
    assert main(["extract", "--in", str(raw), "--method", "vn", "--out", str(tmp_path / "vn.bits")]) == 0
    rep = json.loads((tmp_path / "vn.bits.report.json").read_text())
    assert rep["method"] == "von_neumann"
    assert abs(rep["yield_per_input_bit"] - 0.24) < 0.003
    assert main(["extract", "--in", str(raw), "--method", "peres", "--out", str(tmp_path / "p.bits")]) == 0
    rep = json.loads((tmp_path / "p.bits.report.json").read_text())
    assert rep["efficiency_vs_entropy"] >= 0.90
    assert read_bits(tmp_path / "p.bits").length == rep["output_length"]


def test_extract_empty(tmp_path):
    raw = tmp_path / "empty.bits"
    write_bits(BitStream.from_bits([]), raw)
    assert main(["extract", "--in", str(raw), "--out", str(tmp_path / "e.bits")]) == 0
    rep = json.loads((tmp_path / "e.bits.report.json").read_text())
    assert rep["output_length"] == 0 and rep["yield_per_input_bit"] == 0


def test_extract_missing_and_mismatched(tmp_path):
    assert main(["extract", "--in", str(tmp_path / "none.bits"), "--out", str(tmp_path / "o")]) == 2
    raw = tmp_path / "raw.bits"
    write_bits(BitStream.from_string("1" * 32), raw)
    (tmp_path / "raw.bits.meta.json").write_text(json.dumps({"length_bits": 99}))
    assert main(["extract", "--in", str(raw), "--out", str(tmp_path / "o")]) == 2
    (tmp_path / "raw.bits.meta.json").write_text("[broken")
    assert main(["extract", "--in", str(raw), "--out", str(tmp_path / "o")]) == 2


def test_test_command_exit_codes(tmp_path):
    fair = tmp_path / "fair.bits"
    write_bits(iid_stream(2, 10**6), fair)
    assert main(["test", "--in", str(fair), "--max-lag", "2000"]) == 0
    report = json.loads((tmp_path / "fair.bits.test.json").read_text())
    assert report["overall"] == "pass" and report["lag_scan"]["n_max"] == 2000

    biased = tmp_path / "biased.bits"
    write_bits(iid_stream(3, 10**6, 0.4), biased)
    assert main(["test", "--in", str(biased), "--report", str(tmp_path / "b.json")]) == 1
    report = json.loads((tmp_path / "b.json").read_text())
    assert next(t for t in report["tests"] if t["name"] == "frequency")["verdict"] == "fail"


def test_test_command_insufficient(tmp_path, capsys):
    short = tmp_path / "short.bits"
    write_bits(iid_stream(4, 50), short)
    assert main(["test", "--in", str(short), "--tests", "autocorr", "--max-lag", "100"]) == 2
    assert "autocorr" in capsys.readouterr().err
    assert main(["test", "--in", str(short), "--tests", "nonsense"]) == 2


def test_experiment_unknown_scenario():
    assert main(["experiment", "nope"]) == 2


def test_experiment_noise_budget(tmp_path):
    out = tmp_path / "nb.json"
    assert main(["experiment", "noise-budget", "--seed", "7", "--out", str(out)]) == 0
    first = out.read_bytes()
    report = json.loads(first)
    assert report["holds"] and report["run"]["noise_fraction"] < 0.005
    assert main(["experiment", "noise-budget", "--seed", "7", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_report_command(tmp_path, capsys):
    out = tmp_path / "nb.json"
    main(["experiment", "noise-budget", "--pulses", "100000", "--out", str(out)])
    capsys.readouterr()
    assert main(["report", "--in", str(out)]) == 0
    assert "noise-budget" in capsys.readouterr().out
    assert main(["report", "--in", str(tmp_path / "missing.json")]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qrngsim", "experiment", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_parser_builds():
    parser = build_parser()
    assert parser.prog == "qrng"


@pytest.mark.parametrize("text,ok", [("1e5", True), ("100000", True), ("2.5", False), ("-3", False)])
def test_pulses_accepts_scientific_notation(tmp_path, text, ok):
    code = main(["simulate", "--pulses", text, "--out", str(tmp_path / "a.bin")])
    assert (code == 0) == ok
    if not ok:
        assert code == 2
