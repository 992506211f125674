"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import json
import math
import sys

import numpy as np
import pytest

from lmsreg.bpb import BpbConfig, bpb_solve
from lmsreg.chebyshev import check_optimality, optimality_residuals
from lmsreg.core import (
    Dataset,
    kth_smallest,
    objective_lms,
    objective_lms_squared,
    objective_profile,
    profile_local_minima,
)
from lmsreg.oracle import brute_force_lms, brute_force_order_stat
from lmsreg.search import (
    count_local_minima_theory,
    enumerate_all_local_minima,
    enumerate_local_minima,
    exhaustive_solve,
    greedy_solve,
    is_general_position,
)

TOL = 1e-9


def verdict(criterion, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, detail


def draw(rng, n, p):
    while True:
        data = Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))
        if is_general_position(data):
            return data


@pytest.fixture(scope="module")
def theorem_instances():
    rng = np.random.default_rng(20240101)
    out = []
    for i in range(50):
        p = (1, 2, 3)[i % 3]
        n = int(rng.integers(max(p + 1, 2 * p), 13))
        data = draw(rng, n, p)
        out.append((data, enumerate_all_local_minima(data)))
    return out


@pytest.fixture(scope="module")
def exact_instances():
    rng = np.random.default_rng(777)
    out = []
    while len(out) < 50:
        p = int(rng.integers(1, 5))
        n = int(rng.integers(2 * p, 21))
        if math.comb(n, p + 1) > 10**4:
            continue
        data = draw(rng, n, p)
        out.append((data, exhaustive_solve(data), brute_force_lms(data)))
    return out


def test_1_theorem_counts(theorem_instances):
    bad = []
    rows = 0
    for data, by_k in theorem_instances:
        for k in range(data.n - data.p):
            rows += 1
            if len(by_k[k]) != count_local_minima_theory(data.p, k):
                bad.append((data.n, data.p, k, len(by_k[k])))
    shapes = sorted({(d.n, d.p) for d, _ in theorem_instances})
    verdict(1, not bad, f"{rows} (instance, k) counts equal C(p+k, p) over {len(shapes)} (n, p) shapes; mismatches {bad}")


def test_2_counting_identity(theorem_instances):
    bad = []
    for data, by_k in theorem_instances:
        top = data.n - (data.p + 1)
        lhs = sum(2 ** (top - j) * len(by_k[j]) for j in range(top + 1))
        rhs = sum(math.comb(data.n, j) for j in range(top + 1))
        if lhs != rhs:
            bad.append((data.n, data.p, lhs, rhs))
    verdict(2, not bad, f"identity exact on {len(theorem_instances)} instances; failures {bad}")


def test_3_five_point_line():
    rng = np.random.default_rng(5)
    bad = []
    for _ in range(30):
        data = draw(rng, 5, 1)
        recs = enumerate_local_minima(data, data.lms_k)
        prof_min = profile_local_minima(objective_profile(data))
        thetas = sorted(r.fit.theta[0] for r in recs)
        if len(recs) != 3 or len(prof_min) != 3 or not np.allclose(thetas, prof_min, atol=TOL):
            bad.append((thetas, prof_min))
    verdict(3, not bad, f"30 instances with n=5, p=1: 3 minima, matching the exact profile; failures {bad}")


def test_4_order_statistic_lemma():
    rng = np.random.default_rng(4)
    checks, bad = 0, 0
    for i in range(1000):
        n = int(rng.integers(1, 9))
        # integer draws in half the cases so duplicates get exercised
        vals = rng.integers(-4, 5, n).tolist() if i % 2 else rng.normal(size=n).tolist()
        for k in range(1, n + 1):
            checks += 1
            bad += kth_smallest(vals, k) != brute_force_order_stat(vals, k)
    verdict(4, bad == 0, f"{checks} (array, k) pairs over 1000 arrays, exact equality; mismatches {bad}")


def test_5_exhaustive_is_exact(exact_instances):
    worst_gap = 0.0
    worst_res = 0.0
    ok = True
    for data, ex, bf in exact_instances:
        worst_gap = max(worst_gap, abs(ex.value - bf.value))
        for f in ex.optimizers:
            worst_res = max(worst_res, *optimality_residuals(data, f))
            ok &= check_optimality(data, f, strict=True, tol=TOL)
    ok &= worst_gap <= TOL and worst_res < TOL
    verdict(5, ok, f"50 instances; max |exhaustive - brute force| = {worst_gap:.2e}, max optimality residual = {worst_res:.2e}")


def test_6_greedy_bound(exact_instances):
    ok, hits = True, 0
    for data, ex, _ in exact_instances:
        g = greedy_solve(data)
        ok &= g.subproblems_solved <= data.lms_k * (data.p + 1) + 1
        ok &= g.value >= ex.value - TOL
        hits += g.value <= ex.value + TOL
    verdict(6, ok, f"counter and lower bound hold on 50 instances; greedy exactly optimal on {hits}/50")


def test_7_dfs_bound(exact_instances):
    worst = 0.0
    ok = True
    for data, ex, _ in exact_instances:
        bound = math.comb(data.lms_k + data.p + 1, data.p + 1)
        ok &= ex.candidates_examined <= bound
        worst = max(worst, ex.candidates_examined / bound)
    verdict(7, ok, f"distinct candidates <= C(n-h+p+1, p+1) on 50 instances; max ratio {worst:.3f}")


def test_8_squared_equivalence(exact_instances):
    rng = np.random.default_rng(8)
    worst = 0.0
    for data, _, _ in exact_instances:
        for _ in range(100):
            theta = rng.normal(size=data.p) * rng.choice([0.1, 1.0, 10.0])
            a = objective_lms_squared(data, theta)
            b = objective_lms(data, theta) ** 2
            worst = max(worst, abs(a - b) / max(abs(b), np.finfo(float).tiny))
    verdict(8, worst <= 1e-12, f"5000 points; max relative gap {worst:.2e}")


def test_9_bpb(exact_instances):
    ok = True
    for i, (data, ex, _) in enumerate(exact_instances):
        cfg = BpbConfig(seed=i, iterations=60)
        a, b = bpb_solve(data, cfg), bpb_solve(data, cfg)
        ok &= json.dumps(a.to_dict()) == json.dumps(b.to_dict())
        ok &= a.value >= ex.value - TOL
        best = [s.value for s in a.trace]
        ok &= all(x >= y for x, y in zip(best, best[1:]))
        ok &= all(check_optimality(data, f, strict=True, tol=TOL) for f in a.optimizers)
    verdict(9, ok, "byte-identical reports, value >= exact, nonincreasing trace on 50 instances")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
