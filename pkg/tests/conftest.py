import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ppw_metasurface.scene import reference_scene  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
SCENE_FILE = ROOT / "scenes" / "reference_scene.yaml"


@pytest.fixture(scope="session")
def ref_scene():
    return reference_scene()


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
