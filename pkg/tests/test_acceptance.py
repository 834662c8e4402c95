"""The nine acceptance criteria, one test each; every run prints a PASS/FAIL line."""
import pytest

from abflux.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("check", CRITERIA, ids=[c.__name__.removeprefix("criterion_") for c in CRITERIA])
def test_criterion(check, capsys):
    result = run_criterion(check)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
