"""Tests for the command-line verbs and their exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from camotraj import cli
from camotraj.cli import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, main


def _write(path: Path, data: dict[str, object]) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_validate_lists_every_scenario(scenario_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Valid files report their name and mode."""

    status = main(
        [
            "validate",
            "--config", str(scenario_dir / "capture_3d.json"),
            "--config", str(scenario_dir / "mcpn_vs_tpn.json"),
        ]
    )

    out = capsys.readouterr().out
    assert status == EXIT_OK
    assert "capture_3d: ok (analytic)" in out
    assert "mcpn_vs_tpn: ok (guidance)" in out


def test_validate_names_the_missing_field(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """A scenario without tf exits 2 and names the field."""

    config = _write(
        tmp_path / "broken.json",
        {
            "name": "broken",
            "mode": "analytic",
            "static_point": [0, 0, 0],
            "target": {"kind": "constant_velocity", "position": [1, 0, 0], "velocity": [0, 1, 0]},
            "k0": 0.1,
            "k0_dot": 0.0,
        },
    )

    status = main(["validate", "--config", str(config)])

    err = capsys.readouterr().err
    assert status == EXIT_INVALID
    assert "tf" in err
    assert "1 invalid field(s)" in err


def test_missing_file_is_a_failure(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """An unreadable path exits 1."""

    status = main(["solve", "--config", str(tmp_path / "absent.json")])

    assert status == EXIT_FAILURE
    assert "absent.json" in capsys.readouterr().err


def test_solve_writes_summary_with_dt_override(
    scenario_dir: Path,
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """The summary is printed and the step override applies."""

    status = main(
        ["solve", "--config", str(scenario_dir / "open_pursuit.json"), "--out", str(tmp_path), "--dt", "0.01"]
    )

    out = capsys.readouterr().out
    assert status == EXIT_OK
    assert '"scenario": "open_pursuit"' in out
    assert f"wrote {tmp_path / 'open_pursuit' / 'summary.json'}" in out
    summary = json.loads((tmp_path / "open_pursuit" / "summary.json").read_text(encoding="utf-8"))
    assert summary["capture_time"] == pytest.approx(4.224714488, abs=1e-6)


def test_verb_must_match_the_scenario_mode(scenario_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Simulating an analytic scenario is refused before anything runs."""

    status = main(["simulate", "--config", str(scenario_dir / "capture_3d.json"), "--out", str(tmp_path)])

    assert status == EXIT_INVALID
    assert "'simulate' runs guidance" in capsys.readouterr().err
    assert not (tmp_path / "capture_3d").exists()


def test_ccls_refuses_camouflage_at_infinity(scenario_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Constraint lines at infinity are parallel and have no segment file."""

    status = main(
        ["ccls", "--config", str(scenario_dir / "infinity_track.json"), "--out", str(tmp_path), "--interval", "1"]
    )

    assert status == EXIT_INVALID
    assert "direction e" in capsys.readouterr().err


def test_ccls_uses_the_interval_flag(scenario_dir: Path, tmp_path: Path) -> None:
    """A scenario without ccl_interval takes the flag's spacing."""

    status = main(
        ["ccls", "--config", str(scenario_dir / "open_pursuit.json"), "--out", str(tmp_path), "--interval", "1"]
    )

    directory = tmp_path / "open_pursuit"
    assert status == EXIT_OK
    assert sorted(path.name for path in directory.iterdir()) == ["ccls.csv"]
    assert len((directory / "ccls.csv").read_text(encoding="utf-8").splitlines()) == 1 + 5


def test_ccls_without_any_interval_is_invalid(scenario_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Without a scenario interval the flag is required."""

    status = main(["ccls", "--config", str(scenario_dir / "open_pursuit.json"), "--out", str(tmp_path)])

    assert status == EXIT_INVALID
    assert "--interval" in capsys.readouterr().err


def test_energy_verb_writes_report(scenario_dir: Path, tmp_path: Path) -> None:
    """The energy verb runs the comparison scenario."""

    status = main(["energy", "--config", str(scenario_dir / "energy_compare.json"), "--out", str(tmp_path)])

    assert status == EXIT_OK
    assert (tmp_path / "energy_compare" / "energy_report.txt").exists()


def test_batch_runs_every_scenario(scenario_dir: Path, tmp_path: Path) -> None:
    """Batch mode writes one directory per scenario."""

    status = main(
        [
            "solve",
            "--batch",
            "--config", str(scenario_dir / "open_pursuit.json"),
            "--config", str(scenario_dir / "open_escape.json"),
            "--out", str(tmp_path),
            "--dt", "0.01",
        ]
    )

    assert status == EXIT_OK
    assert (tmp_path / "open_pursuit" / "summary.json").exists()
    assert (tmp_path / "open_escape" / "summary.json").exists()


def test_runtime_camouflage_error_exits_two(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """A scenario that validates but cannot run reports the failure."""

    config = _write(
        tmp_path / "curved.json",
        {
            "name": "curved",
            "mode": "analytic",
            "static_point": [0, -1000],
            "target": {"kind": "circular", "center": [0, 0], "radius": 300, "omega": 0.5},
            "k0": 0.1,
            "k0_dot": 0.05,
            "tf": 2,
        },
    )

    status = main(["solve", "--config", str(config), "--out", str(tmp_path / "out")])

    assert status == EXIT_INVALID
    assert "scenario curved:" in capsys.readouterr().err


def test_serve_launches_uvicorn_on_the_configured_port(monkeypatch: pytest.MonkeyPatch) -> None:
    """serve uses settings.app_port unless --port overrides it."""

    launches: list[dict[str, object]] = []

    def fake_run(app: str, **kwargs: object) -> None:
        launches.append({"app": app, **kwargs})

    monkeypatch.setattr(cli.uvicorn, "run", fake_run)
    monkeypatch.setattr(cli.settings, "app_port", 9123)

    assert main(["serve"]) == EXIT_OK
    assert main(["serve", "--host", "0.0.0.0", "--port", "8100"]) == EXIT_OK

    assert launches[0]["app"] == "camotraj.main:app"
    assert launches[0]["port"] == 9123
    assert launches[0]["host"] == "127.0.0.1"
    assert launches[1]["port"] == 8100
    assert launches[1]["host"] == "0.0.0.0"
