"""Shared fixtures of the test suite"""

import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

import config  # noqa: E402
from modules.parameters import Params  # noqa: E402
from modules.unperturbed_geometry import DomainTag  # noqa: E402


@pytest.fixture
def out_dir(tmp_path):
    """Fresh output directory for one run"""
    path = tmp_path / "results"
    return str(path)


@pytest.fixture(autouse=True)
def _restore_config():
    """Undo DEBUG and tolerance changes made by a test"""
    saved = (config.DEBUG, config.RTOL_SWEEP, config.ATOL_SWEEP)
    yield
    config.DEBUG, config.RTOL_SWEEP, config.ATOL_SWEEP = saved


# name -> (params, p, domain, expected class)
FIG6 = {
    "fig6a": (Params(0.1, 1.0, -0.1, 0.5, 2.5), 2, DomainTag.G1_PLUS, "IMPASSABLE"),
    "fig6b": (Params(0.1, 1.0, -0.02, 0.5, 2.5), 2, DomainTag.G1_PLUS, "PARTIALLY_PASSABLE"),
    "fig6c": (Params(0.1, 1.0, 0.03, 1.0, 3.36), 3, DomainTag.G2, "IMPASSABLE"),
    "fig6d": (Params(0.1, 1.0, 0.03, 1.0, 3.0), 3, DomainTag.G2, "PARTIALLY_PASSABLE"),
}


@pytest.fixture(params=sorted(FIG6))
def fig6_case(request):
    return FIG6[request.param]
