"""Command-line artifacts: schemas, precedence, manifests, replay, exits."""

import json
import subprocess
import sys

import pytest


def run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "qpurify", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        timeout=300,
    )


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_discrete_csv_schema_and_float_format(tmp_path):
    result = run_cli(["discrete", "--steps", "3", "--b", "0.2", "--out", "run.csv"], tmp_path)
    assert result.returncode == 0
    header, rows = read_csv(tmp_path / "run.csv")
    assert header == [
        "step[index]", "outcome[sign]", "probability[dimensionless]",
        "alpha[rad]", "P[dimensionless]",
    ]
    assert len(rows) == 4  # step 0 plus three measurements
    assert rows[0][:2] == ["0", "0"]
    for row in rows:
        for cell in row[2:]:
            # Full round-trip float formatting.
            assert f"{float(cell):.17g}" == cell
    assert float(rows[-1][4]) == pytest.approx(0.5 * 0.96**3, abs=1e-15)


def test_stdout_when_no_out_file(tmp_path):
    result = run_cli(["classical", "--steps", "2", "--time", "0.2"], tmp_path)
    assert result.returncode == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0] == "t[time],P_classical[dimensionless]"
    assert len(lines) == 4
    assert list(tmp_path.iterdir()) == []  # nothing written


def test_json_artifact_is_sorted_and_complete(tmp_path):
    result = run_cli(
        ["sde", "--dt", "1e-3", "--time", "0.01", "--trajectories", "8",
         "--format", "json", "--out", "run.json"],
        tmp_path,
    )
    assert result.returncode == 0
    raw = (tmp_path / "run.json").read_text()
    payload = json.loads(raw)
    assert raw == json.dumps(payload, sort_keys=True, indent=2) + "\n"
    assert payload["columns"] == [
        "t[time]", "P_mean[dimensionless]", "P_stderr[dimensionless]"
    ]
    assert len(payload["rows"]) == 11
    assert payload["meta"]["clamp_events"] == 0


def test_exit_code_two_on_bad_configuration(tmp_path):
    # Step too large for the stability budget.
    assert run_cli(["sde", "--dt", "1", "--time", "10"], tmp_path).returncode == 2
    assert run_cli(["discrete", "--strategy", "bogus"], tmp_path).returncode == 2
    assert run_cli(["discrete", "--b", "1.5"], tmp_path).returncode == 2
    assert run_cli(["classical", "--rel-tol", "0.001"], tmp_path).returncode == 2
    assert run_cli(["speedup", "--targets", ""], tmp_path).returncode == 2
    # Enumeration over budget refuses before doing any work.
    assert run_cli(["verify-optimality", "--steps", "4"], tmp_path).returncode == 2
    # argparse's own rejections also land on 2.
    assert run_cli(["sde", "--no-such-flag"], tmp_path).returncode == 2


def test_config_file_precedence(tmp_path):
    (tmp_path / "conf.json").write_text(json.dumps({"gamma": 2.0, "steps": 4}))
    # Flag beats file: --steps 2 wins; file beats default: gamma = 2.
    result = run_cli(
        ["classical", "--config", "conf.json", "--time", "0.2", "--steps", "2",
         "--out", "c.csv"],
        tmp_path,
    )
    assert result.returncode == 0
    _, rows = read_csv(tmp_path / "c.csv")
    assert len(rows) == 3
    manifest = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    assert manifest["config"]["gamma"] == 2.0
    assert manifest["config"]["steps"] == 2
    # Unknown keys fail loudly instead of being ignored.
    (tmp_path / "bad.json").write_text(json.dumps({"gamm": 2.0}))
    assert run_cli(["classical", "--config", "bad.json"], tmp_path).returncode == 2


def test_manifest_records_checksums(tmp_path):
    import hashlib

    result = run_cli(
        ["speedup", "--targets", "1e-2,1e-3", "--out", "s.csv", "--plot", "s.svg"],
        tmp_path,
    )
    assert result.returncode == 0
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["command"] == "speedup"
    assert manifest["artifact_version"] == 1
    for role, name in (("artifact", "s.csv"), ("plot", "s.svg")):
        recorded = manifest["outputs"][role]["sha256"]
        actual = hashlib.sha256((tmp_path / name).read_bytes()).hexdigest()
        assert recorded == actual
    svg = (tmp_path / "s.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_plot_requires_out(tmp_path):
    assert run_cli(["speedup", "--plot", "s.svg"], tmp_path).returncode == 2


def test_replay_reproduces_and_verifies(tmp_path):
    result = run_cli(
        ["sde", "--dt", "1e-3", "--time", "0.02", "--trajectories", "24",
         "--seed", "5", "--strategy", "none", "--out", "orig.csv"],
        tmp_path,
    )
    assert result.returncode == 0
    replay = run_cli(
        ["replay", "orig.csv.manifest.json", "--out", "again.csv", "--workers", "3"],
        tmp_path,
    )
    assert replay.returncode == 0, replay.stderr
    assert (tmp_path / "again.csv").read_bytes() == (tmp_path / "orig.csv").read_bytes()


def test_replay_flags_checksum_drift(tmp_path):
    result = run_cli(
        ["classical", "--steps", "3", "--time", "0.3", "--out", "c.csv"], tmp_path
    )
    assert result.returncode == 0
    manifest_path = tmp_path / "c.csv.manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["outputs"]["artifact"]["sha256"] = "0" * 64
    manifest_path.write_text(json.dumps(manifest))
    replay = run_cli(["replay", "c.csv.manifest.json", "--out", "d.csv"], tmp_path)
    assert replay.returncode == 3
    assert "checksum" in replay.stderr


def test_verify_optimality_cli_artifact(tmp_path):
    result = run_cli(
        ["verify-optimality", "--steps", "2", "--grid", "9", "--out", "v.csv"], tmp_path
    )
    assert result.returncode == 0
    assert "bound satisfied: True" in result.stderr
    header, rows = read_csv(tmp_path / "v.csv")
    assert header == ["theta[rad]", "expected_final_P[dimensionless]"]
    assert len(rows) == 9
    values = [float(row[1]) for row in rows]
    assert min(values) == values[4]  # grid midpoint is pi/2
