"""Acceptance gate: one test per checkable claim, pass/fail verbatim.

Each test runs the corresponding registered check and reports its detail
line on failure.  Budgets and tolerances live with the checks themselves
so the command line `verify` scenario and this file can never disagree.
"""

import pytest

from bvmix.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = run_criterion(number)
    assert result.passed, (
        f"criterion {result.number} [{result.title}] failed "
        f"({result.seconds:.1f}s): {result.detail}")
