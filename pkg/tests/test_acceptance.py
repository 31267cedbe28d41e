"""The ten acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``[PASS]``/``[FAIL]`` line with the measured values.
"""

import pytest

from carreau_film.verify import CHECKS, run_check


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    res = run_check(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
