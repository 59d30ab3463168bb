"""
Acceptance suite at the stated tolerances.

Each criterion prints one PASS/FAIL line; the lines are also collected into
the terminal summary. Run standalone with ``python3 tests/test_acceptance.py``.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from kubo_ando.acceptance import CRITERIA, criterion_determinism, run_all, run_criteria

MASTER_SEED = 0


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_criteria(MASTER_SEED)}


def _report(result):
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(results, number):
    _report(results[number])


def test_criterion_determinism(results):
    first = [results[k] for k in sorted(results)]
    _report(criterion_determinism(first, MASTER_SEED))


if __name__ == "__main__":
    import sys

    outcome = run_all(MASTER_SEED)
    for r in outcome:
        print(r.line())
    sys.exit(0 if all(r.passed for r in outcome) else 1)
