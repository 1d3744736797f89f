import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from sdli.cli import main
from sdli.config import baseline_path, dump_config, load_config, parse_config

FIXTURE = Path(__file__).parent / "fixtures" / "synthetic_history.csv"
CONFIG = str(baseline_path())


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_simulate_writes_metrics_and_trajectory(tmp_path, capsys):
    rc = main(["simulate", CONFIG, "--policy", "lookahead", "--T", "40", "--paths", "50", "--seed", "7", "--out", str(tmp_path)])
    assert rc == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["policy"] == "lookahead" and metrics["periods"] == 40 and metrics["seed"] == 7
    rows = _rows(tmp_path / "trajectory.csv")
    assert rows[0] == ["t", "order", "delivered", "demand", "sold", "lost", "spoiled", "ending", "cost"]
    assert len(rows) == 41
    assert "lookahead" in capsys.readouterr().out


def test_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", CONFIG, "--policy", "deterministic", "--T", "100", "--seed", "3", "--out", str(tmp_path / name)]) == 0
    for f in ("metrics.json", "trajectory.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SDLI_SEED", "11")
    main(["simulate", CONFIG, "--policy", "newsvendor", "--T", "20", "--out", str(tmp_path)])
    assert json.loads((tmp_path / "metrics.json").read_text())["seed"] == 11


@pytest.mark.parametrize(
    "argv, message",
    [
        (["simulate", CONFIG, "--policy", "bogus"], "unknown policy"),
        (["simulate", CONFIG, "--T", "0"], "--T"),
        (["eviu", "missing.cfg"], "not found"),
        (["sensitivity", "bogus"], "unknown sweep"),
        (["estimate", "missing.csv"], "not found"),
    ],
)
def test_invalid_input_exits_2(argv, message, capsys, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert message in capsys.readouterr().err


def test_invalid_config_value_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(Path(CONFIG).read_text().replace("row1 = 0.99 0.005 0.005", "row1 = 0.99 0.105 0.005"))
    assert main(["simulate", str(bad), "--T", "5", "--out", str(tmp_path)]) == 2
    assert "supply.tpm row 1: sums to 1.1" in capsys.readouterr().err


def test_runtime_failure_exits_1(tmp_path, monkeypatch, capsys):
    import sdli.cli

    def boom(*a, **k):
        raise RuntimeError("kaput")

    monkeypatch.setattr(sdli.cli, "run_simulation", boom)
    assert main(["simulate", CONFIG, "--T", "5", "--out", str(tmp_path)]) == 1
    assert "kaput" in capsys.readouterr().err


def test_eviu_quick_rows(tmp_path):
    assert main(["eviu", CONFIG, "--T", "15", "--paths", "20", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "eviu.csv")
    assert rows[0] == ["scenario", "demand", "shelf_life", "supply", "avg_order", "avg_inventory", "avg_spoilage", "fill_rate", "avg_cost"]
    assert [r[0] for r in rows[1:]] == [str(n) for n in range(1, 9)]


def test_sensitivity_rows(tmp_path):
    assert main(["sensitivity", "cost_asymmetry", "--T", "8", "--paths", "10", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "sensitivity_cost_asymmetry.csv")
    assert rows[0] == ["sweep_value", "scenario", "metric", "value"]
    cost_rows = [r for r in rows[1:] if r[2] == "avg_cost"]
    assert len(cost_rows) == 5 * 2
    # full precision floats
    assert all(float(repr(float(r[3]))) == float(r[3]) for r in rows[1:])


def test_case_eval_on_fixture(tmp_path):
    assert main(["case-eval", str(FIXTURE), "--paths", "30", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "case_eval.json").read_text())
    assert report["policies"] == ["lookahead", "retailer"]
    assert "relative_change" in report and len(report["windows"]) == 6
    assert len(_rows(tmp_path / "case_eval_daily.csv")) == report["periods"] + 1


def test_case_eval_malformed_row(tmp_path, capsys):
    lines = FIXTURE.read_text().splitlines()
    lines[5] = lines[5].replace(",", ";", 1)
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["case-eval", str(bad), "--out", str(tmp_path)]) == 2
    assert "row 6" in capsys.readouterr().err


def test_case_eval_short_history(tmp_path, capsys):
    lines = FIXTURE.read_text().splitlines()
    short = tmp_path / "short.csv"
    short.write_text("\n".join(lines[:150]) + "\n")
    assert main(["case-eval", str(short), "--out", str(tmp_path)]) == 2
    assert "insufficient history" in capsys.readouterr().err


def test_estimate_windows(tmp_path):
    assert main(["estimate", str(FIXTURE), "--out", str(tmp_path)]) == 0
    files = sorted(tmp_path.glob("window_*.json"))
    assert len(files) == 6
    fit = json.loads(files[0].read_text())
    assert fit["evaluate"] == ["2019-07"]
    assert fit["demand"]["mu"] == pytest.approx(100, rel=0.1)
    assert sum(fit["shelf_life"]["pmf"]) == pytest.approx(1.0)
    assert fit["supply"]["mean_shortage"] == pytest.approx(0.0157, abs=0.02)


def test_estimate_bad_window(tmp_path):
    assert main(["estimate", str(FIXTURE), "--window", "six", "--out", str(tmp_path)]) == 2


def test_synthesize_roundtrip(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["synthesize", "--days", "30", "--seed", "2019", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[:31] == FIXTURE.read_text().splitlines()[:31]


def test_config_roundtrip():
    cfg = load_config(CONFIG)
    assert dump_config(parse_config(dump_config(cfg))) == dump_config(cfg)


@pytest.mark.skipif(shutil.which("sdli") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(
        ["sdli", "simulate", CONFIG, "--policy", "bogus", "--out", str(tmp_path)], capture_output=True, text=True
    )
    assert proc.returncode == 2 and "unknown policy" in proc.stderr


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sdli.cli", "simulate", CONFIG, "--T", "0", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
