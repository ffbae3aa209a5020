"""Acceptance battery.

Each criterion from the built-in verification suite runs as its own
test and prints one PASS/FAIL line with the measured detail, so the
output reads as a checklist even under -q.
"""

import pytest

from brakeindex.selfcheck import CRITERIA, run_criterion


@pytest.mark.parametrize("number,name", [(num, name) for num, name, _ in CRITERIA],
                         ids=[f"{num:02d}-{name}" for num, name, _ in CRITERIA])
def test_criterion(number, name, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print(result.line())
    assert result.passed, result.detail
