import textwrap
from pathlib import Path

import numpy as np
import pytest

from models.binomial import BinomialModel
from models.normal import NormalKnownVarModel, NormalUnknownVarModel
from models.relative_risk import RelativeRiskModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def normal_known():
    """Single observed difference 2.7 with sd 1 and interval [-0.2, 0.2]"""
    return NormalKnownVarModel(mean=2.7, sigma=1.0, epsilon=0.2)


@pytest.fixture
def binomial():
    """1 success in 10 trials, interval [0.47, 0.53]"""
    return BinomialModel(successes=1, trials=10, epsilon=0.03, centre=0.5)


@pytest.fixture
def normal_unknown():
    """n = 9, mean 2.7, variance 9, interval [-0.2, 0.2]"""
    return NormalUnknownVarModel(n=9, mean=2.7, variance=9.0, epsilon=0.2)


@pytest.fixture
def relative_risk():
    """6/20 treatment events against 18/30 control events"""
    return RelativeRiskModel(events_t=6, n_t=20, events_c=18, n_c=30, epsilon=0.08)


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML analysis document into tmp_path and return its path"""

    def write(text: str, name: str = "analysis.yaml") -> Path:
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return path

    return write


@pytest.fixture(autouse=True)
def engine_env(monkeypatch):
    for name in ("BFI_LOG_LEVEL", "BFI_LOG_FILE", "BFI_QUAD_TOL", "BFI_MONOTONE_GRID", "BFI_OUTPUT_DIR", "BFI_MAX_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def read_csv():
    """Columns of a CSV written by OutputWriter, skipping comment lines"""

    def read(path: Path) -> dict:
        lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
        header = lines[0].split(",")
        data = np.loadtxt(lines[1:], delimiter=",", ndmin=2) if len(lines) > 1 else np.empty((0, len(header)))
        return {h: data[:, i] for i, h in enumerate(header)}

    return read


@pytest.fixture
def read_comments():
    def read(path: Path) -> list:
        return [ln[2:] for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.startswith("# ")]

    return read
