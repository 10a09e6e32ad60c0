"""Acceptance suite: one test per criterion, each timed against its limit.

Every test records a single ``criterion N: PASS|FAIL`` line before asserting;
the lines are printed in the terminal summary.
"""

import time

from kpmatch.core import Params
from kpmatch.verify import (
    check_absorbing_edges,
    check_determinism,
    check_dispatcher,
    check_divisibility_barrier,
    check_even_extremal,
    check_even_matching,
    check_greedy_bounds,
    check_perfect_absorbing,
    check_reachability,
    check_round_trip,
    check_space_barrier,
    check_threshold_scan,
)

from conftest import CRITERIA

SEED = 0


def judge(number, limit, *checks):
    params = Params(seed=SEED)
    start = time.perf_counter()
    results = [fn(params, SEED) for fn in checks]
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in results) and elapsed < limit
    summary = ", ".join(f"{r.name} {r.count}/{r.total}" for r in results)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({summary}; {elapsed:.1f}s of {limit}s)"
    CRITERIA.append(line)
    print(line)
    for r in results:
        assert r.passed, (r.name, r.detail)
    assert elapsed < limit
    return results


def test_criterion_1_space_barrier():
    (r,) = judge(1, 60, check_space_barrier)
    assert r.total == 121


def test_criterion_2_divisibility_barrier():
    (r,) = judge(2, 60, check_divisibility_barrier)
    assert r.total == 14


def test_criterion_3_greedy_bounds():
    (r,) = judge(3, 120, check_greedy_bounds)
    assert r.total == 1000


def test_criterion_4_even_matching():
    judge(4, 300, check_even_matching)


def test_criterion_5_absorbing_oracles():
    edges, sets = judge(5, 120, check_absorbing_edges, check_perfect_absorbing)
    assert edges.total == 200 and sets.total == 100


def test_criterion_6_reachability():
    judge(6, 60, check_reachability)


def test_criterion_7_even_extremal():
    judge(7, 120, check_even_extremal)


def test_criterion_8_dispatcher():
    (r,) = judge(8, 600, check_dispatcher)
    assert r.total == 433


def test_criterion_9_threshold_scan():
    (r,) = judge(9, 600, check_threshold_scan)
    assert r.detail["violations_space"] == 0


def test_criterion_10_io_determinism():
    judge(10, 30, check_round_trip, check_determinism)
