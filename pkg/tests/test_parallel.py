"""
test_parallel module
====================

Tests for ``oscillation_lab.parallel``.

Covers:
- Input order of results for any number of workers
- Inline execution for a single job
"""

import threading

import pytest

from oscillation_lab.parallel import ordered_map


@pytest.mark.parametrize("jobs", [1, 2, 8], ids=["inline", "two", "eight"])
def test_results_keep_input_order(jobs):
    assert ordered_map(lambda x: x * x, range(50), jobs=jobs) == [x * x for x in range(50)]


def test_single_job_runs_inline():
    caller = threading.get_ident()
    assert ordered_map(lambda _: threading.get_ident(), [1, 2, 3], jobs=1) == [caller] * 3


def test_empty_input():
    assert ordered_map(str, iter(()), jobs=4) == []
