import subprocess
import sys

import pytest


def run_toolchain(*argv) -> None:
    proc = subprocess.run(
        [sys.executable, "-m", "conceptgraph", *map(str, argv)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr


@pytest.fixture(scope="session")
def pipeline_out(tmp_path_factory):
    """Toy end-to-end run of the clustering toolchain; yields its out dir."""
    root = tmp_path_factory.mktemp("toyrun")
    corpus = root / "corpus.bin"
    run_toolchain(
        "synth",
        "--n-docs", 40,
        "--n-concepts", 30,
        "--blocks", 3,
        "--p-in", 0.4,
        "--p-out", 0.02,
        "--seed", 9,
        "--out", corpus,
    )
    out = root / "out"
    run_toolchain(
        "pipeline",
        "--corpus", corpus,
        "--out-dir", out,
        "--mode", "bp",
        "--runs", 8,
        "--seed", 1,
    )
    return out


@pytest.fixture(scope="session")
def composition_csv(pipeline_out):
    return pipeline_out / "bp_composition.csv"


@pytest.fixture(scope="session")
def cooccurrence_csv(pipeline_out):
    return pipeline_out / "bp_cooccurrence.csv"


@pytest.fixture(scope="session")
def report_json(pipeline_out):
    return pipeline_out / "report_bp.json"
