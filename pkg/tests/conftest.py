import json
import os
import sys

import hypothesis
import numpy as np
import pytest

# Add the parent directory to sys.path to import the icregime package
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.getenv("ICREGIME_HYPOTHESIS_PROFILE", "ci"))

# Three-user channel meeting every chain of the natural-cycle regime
WORKED_EXAMPLE = [[1.0, 4.0, 2.0], [3.0, 1.0, 6.0], [6.0, 2.0, 1.0]]


@pytest.fixture
def write_spec(tmp_path):
    """Write a channel-spec dict to a JSON file and return its path."""
    def _write(spec, name="channel.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec), encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture(autouse=True)
def quiet_environment(monkeypatch):
    for var in ("ICREGIME_MAX_GRID", "ICREGIME_WORKERS", "ICREGIME_PROGRESS", "ICREGIME_LOG_DIR"):
        monkeypatch.delenv(var, raising=False)
