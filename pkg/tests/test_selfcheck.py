import random

import pytest

from wittk import selfcheck
from wittk.selfcheck import SUITES, random_surjective_tower, run_suites


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes(suite):
    checks = run_suites(suite, seed=7)
    assert checks and all(c.passed for c in checks), [c.to_json() for c in checks if not c.passed]


def test_reports_are_reproducible():
    a = [c.to_json() for c in run_suites("ghost", seed=11)]
    b = [c.to_json() for c in run_suites("ghost", seed=11)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites("nope")


def test_exceptions_are_reported_not_raised():
    def cases():
        yield 1, True
        raise ZeroDivisionError("boom")

    c = selfcheck._run("x", "y", cases)
    assert not c.passed and c.cases == 1 and "ZeroDivisionError" in c.detail


def test_random_towers_are_surjective():
    T = random_surjective_tower(random.Random(0), 3, 2, 3, 5)
    assert len(T.stages) == 5 and len(T.maps) == 4
