import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(Path(__file__).resolve().parent))

from klever import io  # noqa: E402
from klever.model import CapitalState, ModelParams  # noqa: E402


@pytest.fixture(scope="session")
def ref_params():
    return io.load_params(REPO / "params" / "reference.json")


@pytest.fixture(scope="session")
def table1_targets():
    return io.load_targets(REPO / "targets" / "table1.json")


@pytest.fixture()
def generic_params():
    """A plain valid parameter set for contract tests (not calibrated)."""
    return ModelParams(
        alpha_h=8.0, delta_h=0.15, beta=0.25, gamma_s=0.3,
        alpha_r=10.0, delta_r=0.18,
        nu_h=0.5, nu_s=0.7, nu_r=0.6,
        j_h=12.0, j_s=8.0, j_r=8.0,
        init=CapitalState(60.0, 50.0, 55.0))
