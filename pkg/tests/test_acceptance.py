"""Runs the full fourteen-point acceptance suite, one test per criterion.

Each test prints the criterion's measured-vs-bound line, so the suite's
report is visible in verbose test output.
"""

import pytest

from bayesbai import acceptance
from bayesbai.bellman import DPConfig

CFG = DPConfig()

IDS = [
    "01-variance-decomposition",
    "02-tail-sandwich",
    "03-terminal-loss-closed-form",
    "04-dp-vs-oracle",
    "05-improvement-nonnegative",
    "06-improvement-upper-bound",
    "07-two-armed-alternation",
    "08-w-state-starvation",
    "09-underestimation-bound",
    "10-drift-event-bounds",
    "11-uniform-closed-form",
    "12-bayes-regret-band",
    "13-elimination-trend",
    "14-reproducibility",
]


@pytest.mark.parametrize("index", range(1, 15), ids=IDS)
def test_criterion(index):
    result = acceptance.run_all(CFG, select=[index])[0]
    print(result.line())
    assert result.passed, result.line()
