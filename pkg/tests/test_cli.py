"""Command-line flows over the fixture corpus.

The serve tests drive a real subprocess: bind checks and SIGINT behavior
cannot be exercised in-process.
"""

import csv
import json
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest
from click.testing import CliRunner

from epiforge.cli import main as cli_main

from conftest import ingest_fixtures


@pytest.fixture
def runner():
    return CliRunner()


def test_ingest_reports_counts_and_warnings(tmp_path, fixtures_dir, runner):
    result = runner.invoke(
        cli_main,
        [
            "ingest",
            str(fixtures_dir / "cases.csv"),
            str(fixtures_dir / "countries.csv"),
            "--data-dir",
            str(tmp_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "case rows" in result.output
    # warnings surface but do not fail the run
    assert "warning:" in result.output
    assert "ZZ" in result.output  # bogus country flagged
    report = json.loads((tmp_path / "reports" / "ingest.json").read_text())
    assert report["counts"]["case rows"] > 0
    assert any("2020-01-29" in w for w in report["warnings"])  # province gap


def test_ingest_missing_file_fails_naming_it(tmp_path, runner):
    result = runner.invoke(
        cli_main, ["ingest", str(tmp_path / "nope.csv"), "--data-dir", str(tmp_path)]
    )
    assert result.exit_code != 0
    assert "nope.csv" in result.output


def test_ingest_rejects_unknown_header(tmp_path, runner):
    bad = tmp_path / "weird.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    result = runner.invoke(cli_main, ["ingest", str(bad), "--data-dir", str(tmp_path)])
    assert result.exit_code != 0
    assert "unrecognized" in result.output


def test_calibrate_requires_history_and_population(tmp_path, fixtures_dir, runner):
    result = runner.invoke(cli_main, ["calibrate", "AA", "--data-dir", str(tmp_path)])
    assert result.exit_code != 0
    assert "no daily history" in result.output

    runner.invoke(
        cli_main,
        ["ingest", str(fixtures_dir / "cases.csv"), "--data-dir", str(tmp_path)],
    )
    result = runner.invoke(cli_main, ["calibrate", "AA", "--data-dir", str(tmp_path)])
    assert result.exit_code != 0
    assert "population" in result.output


def test_project_requires_calibration(tmp_path, fixtures_dir, runner):
    ingest_fixtures(tmp_path)
    result = runner.invoke(cli_main, ["project", "AA", "--data-dir", str(tmp_path)])
    assert result.exit_code != 0
    assert "not calibrated" in result.output


def test_full_flow_and_report_shapes(calibrated_store_dir, runner):
    reports = Path(calibrated_store_dir) / "reports"

    result = runner.invoke(
        cli_main,
        ["project", "AA", "--scenario", "released_distancing", "--horizon", "21",
         "--data-dir", str(calibrated_store_dir)],
    )
    assert result.exit_code == 0, result.output
    with open(reports / "projection_AA_released_distancing.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["day", "daily_affected", "daily_deaths",
                       "cumulative_affected", "cumulative_deaths"]
    assert len(rows) == 22
    doc = json.loads((reports / "projection_AA_released_distancing.json").read_text())
    assert len(doc["daily_affected"]) == 21

    result = runner.invoke(
        cli_main, ["rates", "AA", "--data-dir", str(calibrated_store_dir)]
    )
    assert result.exit_code == 0, result.output
    assert "death:" in result.output
    assert "absent" in result.output  # recovery has no closed-cases rate


def test_correlate_csv_columns_and_reproducibility(calibrated_store_dir, runner):
    args = ["correlate", "--pair", "temperature-affected",
            "--data-dir", str(calibrated_store_dir)]
    assert runner.invoke(cli_main, args).exit_code == 0
    path = Path(calibrated_store_dir) / "reports" / "correlations_temperature-affected.csv"
    first = path.read_bytes()
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["country", "pearson", "p_pearson", "spearman", "p_spearman",
                       "kendall", "p_kendall", "verdict"]
    by_country = {r[0]: r for r in rows[1:]}
    assert set(by_country) == {"AA", "BB"}
    assert float(by_country["AA"][1]) > 0.5
    assert by_country["AA"][7] == "significant"

    # identical inputs must produce identical bytes
    assert runner.invoke(cli_main, args).exit_code == 0
    assert path.read_bytes() == first

    doc = json.loads(
        (Path(calibrated_store_dir) / "reports" / "correlations_temperature-affected.json").read_text()
    )
    assert doc["alpha"] == 0.05
    assert doc["lag_days"] == 5


def test_correlate_requires_covariates(tmp_path, fixtures_dir, runner):
    runner.invoke(
        cli_main,
        ["ingest", str(fixtures_dir / "cases.csv"), "--data-dir", str(tmp_path)],
    )
    result = runner.invoke(
        cli_main,
        ["correlate", "--pair", "temperature-affected", "--data-dir", str(tmp_path)],
    )
    assert result.exit_code != 0


def test_correlate_flag_defaults(runner):
    result = runner.invoke(cli_main, ["correlate", "--help"])
    assert result.exit_code == 0
    assert "0.05" in result.output
    assert "5" in result.output


def free_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def wait_for_port(port, timeout=15.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return
        except OSError:
            time.sleep(0.05)
    raise TimeoutError(f"server never opened port {port}")


def serve_process(data_dir, port):
    return subprocess.Popen(
        [sys.executable, "-m", "epiforge.cli", "serve",
         "--data-dir", str(data_dir), "--port", str(port)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )


def test_serve_responds_and_exits_cleanly_on_sigint(calibrated_store_dir):
    port = free_port()
    proc = serve_process(calibrated_store_dir, port)
    try:
        wait_for_port(port)
        resp = httpx.get(f"http://127.0.0.1:{port}/api/rates/AA", timeout=5.0)
        assert resp.status_code == 200
        assert resp.json()["country"] == "AA"
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=10) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()


def test_serve_rejects_occupied_port(calibrated_store_dir):
    holder = socket.socket()
    holder.bind(("127.0.0.1", 0))
    holder.listen(1)
    port = holder.getsockname()[1]
    try:
        proc = serve_process(calibrated_store_dir, port)
        out, _ = proc.communicate(timeout=15)
        assert proc.returncode != 0
        assert b"cannot bind" in out
    finally:
        holder.close()


def test_serve_rejects_missing_data_dir(tmp_path):
    proc = serve_process(tmp_path / "absent", free_port())
    out, _ = proc.communicate(timeout=15)
    assert proc.returncode != 0
    assert b"does not exist" in out
