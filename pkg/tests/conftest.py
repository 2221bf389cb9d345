"""Shared fixtures: the acceptance collection runs once per session and its
reference runs are reused by every test module that needs real trajectories."""

import pytest

from blowup_lab.verify import collect_verification


@pytest.fixture(scope="session")
def verification():
    rows, bundle = collect_verification(quiet=True)
    return rows, bundle


@pytest.fixture(scope="session")
def d200(verification):
    """(RunResult, RunSummary) of the interior-source reference at M=200."""
    return verification[1]["runs"]["d200"]


@pytest.fixture(scope="session")
def d400(verification):
    return verification[1]["runs"]["d400"]


@pytest.fixture(scope="session")
def n200(verification):
    """(RunResult, RunSummary) of the boundary-flux reference at M=200."""
    return verification[1]["runs"]["n200"]


@pytest.fixture(scope="session")
def n400(verification):
    return verification[1]["runs"]["n400"]
