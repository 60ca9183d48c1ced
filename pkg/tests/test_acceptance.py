"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are also collected and
repeated in the terminal summary.
"""
import pytest

from qdblab.acceptance import CRITERIA, SuiteConfig, flip_dissipator_sign

RESULTS = {}

CONFIG = SuiteConfig(dims=(2, 3, 4), synth_dims=(2, 3, 4, 5, 6), seed=12345)


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k + 1:02d}" for k in range(len(CRITERIA))])
def test_criterion(criterion):
    res = criterion(CONFIG)
    line = res.line()
    RESULTS.setdefault(res.number, []).append(line)
    print(line)
    assert res.passed, line


def test_mutation_is_detected():
    """Flipping the sign of the dissipator must break the structure criterion."""
    res = CRITERIA[2](SuiteConfig(dims=(2,), corrupt=flip_dissipator_sign))
    print(res.line())
    assert not res.passed
    assert "structure-violation" in res.detail


def test_same_seed_same_lines():
    cfg = SuiteConfig(dims=(2,), synth_dims=(2,), seed=7)
    first = [c(cfg).line() for c in CRITERIA[:5]]
    second = [c(cfg).line() for c in CRITERIA[:5]]
    assert first == second
