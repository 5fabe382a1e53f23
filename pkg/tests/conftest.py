import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from refprice.bidder import BidderModelParams
from refprice.game import GameConfig

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Fitted services-tender parameters used throughout the coalition checks.
SERVICES_FIT = BidderModelParams(8 / 74, 0.236527, 0.34617)


@pytest.fixture
def services():
    """E=100 supplies/services tender: admissible band [75, 120]."""
    return GameConfig.from_percent(100.0, num_players=3)


@pytest.fixture
def relative10():
    return GameConfig.normalized(num_players=10)


@pytest.fixture
def services_fit():
    return SERVICES_FIT


@pytest.fixture
def rng():
    return np.random.default_rng(20230901)


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
