"""Acceptance criteria 1 to 13, one test each.

Each criterion is implemented once in :mod:`gapforge.verify` (shared with
``gapforge verify``); this file runs them and records one line per
criterion, printed in the terminal summary.  Criterion 10 contains a
clause that cannot hold (the flat-weight control gap of the rectangles
is constant in r), so it is marked as an expected failure.
"""
import pytest

from gapforge import verify

LINES = []

CHECKS = verify.REGISTRY["acceptance"]


def _param(chk):
    marks = []
    if chk.known_failure:
        marks.append(pytest.mark.xfail(strict=True, reason="control gaps are constant in r, not increasing"))
    return pytest.param(chk, id=chk.name.split()[0], marks=marks)


@pytest.mark.parametrize("chk", [_param(c) for c in CHECKS])
def test_criterion(chk):
    res = chk.run(fast=False, seed=0)
    LINES.append(res.line())
    print(res.line())
    assert res.passed, res.summary


def test_every_criterion_registered():
    assert [c.name.split()[0] for c in CHECKS] == [f"C{i}" for i in range(1, 14)]
