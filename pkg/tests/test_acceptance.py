"""Numbered acceptance checks, one test per criterion, at full Monte Carlo budget.

Set ``EVOLVING_GOSSIP_QUICK=1`` for a tenth of the budget (same tolerances).
``-m "not slow"`` keeps only the deterministic checks.
"""

import os

import pytest

from evolving_gossip import acceptance

QUICK = os.environ.get("EVOLVING_GOSSIP_QUICK", "") not in ("", "0")
SLOW = {5, 6, 7, 8, 9, 11}


@pytest.fixture(scope="session")
def done():
    return {}


PARAMS = [pytest.param(n, marks=[pytest.mark.slow] if n in SLOW else [], id=f"criterion_{n:02d}")
          for n in sorted(acceptance.CRITERIA)]


@pytest.mark.parametrize("number", PARAMS)
def test_criterion(done, acceptance_lines, number):
    kwargs = {}
    if number == 11:
        # reuse the single-worker runs of 5 and 7 as the reference when they already ran
        kwargs["reference"] = {m: done[m].payload for m in (5, 7) if m in done}
    res = acceptance.run_criterion(number, QUICK, **kwargs)
    done[number] = res
    acceptance_lines.append(res.line())
    assert res.passed, f"{res.line()}\n{res.details}"
