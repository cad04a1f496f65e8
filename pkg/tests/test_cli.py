import json
import subprocess
import sys

import pytest

from wsanqos.cli import main
from wsanqos.config import default_scenario_path

from conftest import NODES, flow

SCENARIO = str(default_scenario_path())


@pytest.fixture
def short_scenario(tmp_path):
    data = json.loads(default_scenario_path().read_text())
    data["duration_s"] = 3
    path = tmp_path / "short.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_run_writes_outputs(short_scenario, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", short_scenario, "--manager", "none", "--seed", "1", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "manager: none" in stdout and "seed: 1" in stdout
    assert {p.name for p in out.iterdir()} == {"dmr_timeseries.csv", "summary.csv"}
    assert stdout.splitlines()[1].split() == ["flow", "avg_dmr", "released", "on_time", "missed", "final_period_ms"]


def test_run_trace(short_scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", short_scenario, "--out", str(out), "--trace"]) == 0
    assert (out / "events.log").stat().st_size > 0


def test_run_is_deterministic(short_scenario, tmp_path, capsys):
    outputs = []
    for name in ("a", "b"):
        main(["run", "--scenario", short_scenario, "--manager", "fuzzy", "--seed", "7", "--out", str(tmp_path / name)])
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    for f in ("dmr_timeseries.csv", "summary.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_zero_duration_is_config_error(capsys, tmp_path):
    assert main(["run", "--scenario", SCENARIO, "--duration", "0", "--out", str(tmp_path)]) == 1
    assert "duration_s" in capsys.readouterr().err


def test_invalid_file_is_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nodes": NODES, "flows": [flow("s1", ["s1", "zz"])]}))
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path)]) == 1
    assert "route[1]" in capsys.readouterr().err
    assert main(["run", "--scenario", str(tmp_path / "missing.json")]) == 1


def test_unwritable_output_is_io_error(short_scenario, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--scenario", short_scenario, "--out", str(blocker / "sub")]) == 2
    assert "file" in capsys.readouterr().err


def test_compare(short_scenario, tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--scenario", short_scenario, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    lines = stdout.splitlines()
    assert "seed: 1" in lines[0]
    rows = [line.split()[0] for line in lines[2:]]
    assert rows == ["s1", "s2", "s3", "s4"]
    assert "s5" not in rows
    for manager in ("none", "fuzzy"):
        assert (out / manager / "summary.csv").exists()


def test_module_entry_point(short_scenario, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "wsanqos", "run", "--scenario", short_scenario, "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("scenario: short.json")
