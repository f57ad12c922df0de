"""Acceptance criteria, each run at its stated tolerance.

Every criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are also
repeated in the terminal summary (see conftest.py). Criterion 3 checks the
half-line scaling law with the factor ``T`` exactly as stated; the closed-form
kernel scales with ``1/T`` instead, so that criterion fails by design of the
statement, not of the code. Run directly (``python3 tests/test_acceptance.py``)
for the bare table.
"""

import pytest

from heatrkhs.verify import ACCEPTANCE

RESULTS: list[str] = []


@pytest.mark.parametrize("number, check", ACCEPTANCE, ids=[f"criterion-{n}" for n, _ in ACCEPTANCE])
def test_criterion(number, check):
    result = check()
    line = f"criterion {number:>2}: {result.line()}"
    RESULTS.append(line)
    print(line)
    assert result.passed, line


if __name__ == "__main__":
    for number, check in ACCEPTANCE:
        print(f"criterion {number:>2}: {check().line()}")
