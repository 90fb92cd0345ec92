"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""
import pytest

from fellerfpt.validation import CRITERIA, DEFAULT_SEED, run_validation

KEYS = list(CRITERIA)
_cache: dict = {}


def result_for(key):
    if key not in _cache:
        _cache[key] = run_validation([key], seed=DEFAULT_SEED)[0]
    return _cache[key]


@pytest.mark.parametrize("key", KEYS, ids=[f"{i:02d}_{k}" for i, k in enumerate(KEYS, 1)])
def test_criterion(key, acceptance_lines):
    res = result_for(key)
    line = res.line()
    print(line)
    acceptance_lines.append(line)
    for c in res.checks:
        print(f"      {c}")
    assert res.passed, line


if __name__ == "__main__":
    results = run_validation(progress=lambda r: print(r.line(), flush=True))
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
