"""Shared fixtures and the acceptance-criteria summary hook."""

import re
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hitchin.frenet import dual_curve, sample_curve
from hitchin.reps import deform, diag_rep, invariant_symplectic, sym3_rep
from hitchin.surface import fuchsian_octagon

DEFORM_EPS = 1e-3
DEFORM_SEEDS = (1, 2, 3, 4, 5)


@pytest.fixture(scope="session")
def base():
    return fuchsian_octagon()


@pytest.fixture(scope="session")
def model_rep(base):
    return sym3_rep(base)


@pytest.fixture(scope="session")
def diagonal_rep(base):
    return diag_rep(base)


@pytest.fixture(scope="session")
def model_curve4(model_rep, base):
    return sample_curve(model_rep, base, 4)


@pytest.fixture(scope="session")
def model_curve5(model_rep, base):
    return sample_curve(model_rep, base, 5)


@pytest.fixture(scope="session")
def dual_curve5(model_curve5):
    return dual_curve(model_curve5)


@pytest.fixture(scope="session")
def omega_model(model_rep):
    return invariant_symplectic(model_rep)


@pytest.fixture(scope="session")
def deformed_rep1(model_rep):
    return deform(model_rep, seed=1, eps=DEFORM_EPS)


@pytest.fixture(scope="session")
def deformed_curve1(deformed_rep1, base):
    return sample_curve(deformed_rep1, base, 4)


@pytest.fixture(scope="session")
def rng():
    """Fresh deterministic generator per requesting test."""
    return np.random.RandomState(20240817)


# ---------------------------------------------------------------------------
# Acceptance summary: one PASS/FAIL line per criterion.
# ---------------------------------------------------------------------------

_CRITERION = re.compile(r"test_criterion_(\d{2})")
_outcomes = {}


def _record(num, outcome):
    if _outcomes.get(num) != "failed":
        _outcomes[num] = outcome


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    num = match.group(1)
    if report.when == "call":
        _record(num, report.outcome)
    elif report.when == "setup" and report.outcome != "passed":
        _record(num, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_outcomes):
        outcome = _outcomes[num]
        label = {"passed": "PASS", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"[PRIMARY] criterion {num}: {label}")
