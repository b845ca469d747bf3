"""Shared test fixtures.

The session-scoped store ingests the synthetic corpus once and calibrates
the two model-generated countries; tests that mutate state must build
their own store in tmp_path instead.
"""

import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from epiforge.cli import main as cli_main
from epiforge.datastore import DataStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# ground truth planted by scripts/make_fixtures.py
TRUTH = {
    "AA": {"beta": 0.25, "lambda_r": 0.08, "lambda_d": 0.02, "population": 5_000_000},
    "BB": {"beta": 0.2, "lambda_r": 0.1, "lambda_d": 0.01, "population": 2_000_000},
}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def ingest_fixtures(data_dir: Path) -> None:
    runner = CliRunner()
    result = runner.invoke(
        cli_main,
        [
            "ingest",
            str(FIXTURES / "cases.csv"),
            str(FIXTURES / "covariates.csv"),
            str(FIXTURES / "countries.csv"),
            str(FIXTURES / "contact_matrices"),
            str(FIXTURES / "pyramids"),
            str(FIXTURES / "live.json"),
            "--data-dir",
            str(data_dir),
        ],
    )
    assert result.exit_code == 0, result.output


@pytest.fixture(scope="session")
def calibrated_store_dir(tmp_path_factory) -> Path:
    data_dir = tmp_path_factory.mktemp("store")
    ingest_fixtures(data_dir)
    runner = CliRunner()
    for code in ("AA", "BB"):
        result = runner.invoke(cli_main, ["calibrate", code, "--data-dir", str(data_dir)])
        assert result.exit_code == 0, result.output
    return data_dir


@pytest.fixture
def store(calibrated_store_dir) -> DataStore:
    """Read-only view of the shared calibrated store."""
    return DataStore(calibrated_store_dir)


@pytest.fixture
def scratch_store_dir(calibrated_store_dir, tmp_path) -> Path:
    """Private copy for tests that write."""
    dest = tmp_path / "store"
    shutil.copytree(calibrated_store_dir, dest)
    return dest
