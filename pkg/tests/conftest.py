"""Shared fixtures: model documents and the large pinned-seed ensembles.

The heavy ensembles are built once per session and reused by every test
that needs them, so the acceptance suite's runtime budget is paid once.
"""
import json
import os

import pytest

from mbpm import load_spec, run_ensemble

SPEC_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "specs")

# One line per acceptance criterion, shown in the terminal summary so the
# verdicts stay visible under output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def spec_path(name):
    return os.path.abspath(os.path.join(SPEC_DIR, name + ".json"))


def load_doc(name):
    with open(spec_path(name)) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def two_type_spec():
    return load_spec(spec_path("two_type_mixed"))


@pytest.fixture(scope="session")
def gamma_spec():
    return load_spec(spec_path("gamma_single_type"))


@pytest.fixture(scope="session")
def sqrt_spec():
    return load_spec(spec_path("sqrt_drift_single_type"))


@pytest.fixture(scope="session")
def emigration_spec():
    return load_spec(spec_path("pure_emigration"))


@pytest.fixture(scope="session")
def small_support_spec():
    return load_spec(spec_path("small_support"))


@pytest.fixture(scope="session")
def pure_death_spec():
    return load_spec(spec_path("pure_death"))


# Pinned ensembles.  Seeds are frozen so every run sees the same draws.

@pytest.fixture(scope="session")
def gamma_ensemble(gamma_spec):
    """5000 constant-drift paths to generation 1000, terminal and full paths."""
    return run_ensemble(gamma_spec, n=1000, R=5000, master_seed=31416,
                        store_paths=True)


@pytest.fixture(scope="session")
def sqrt_ensemble(sqrt_spec):
    """3000 square-root-drift paths to generation 2000, terminals only."""
    return run_ensemble(sqrt_spec, n=2000, R=3000, master_seed=27183)


@pytest.fixture(scope="session")
def emigration_ensemble(emigration_spec):
    """2000 emigration-only paths to generation 500, full paths kept."""
    return run_ensemble(emigration_spec, n=500, R=2000, master_seed=16180,
                        store_paths=True)
