"""Slow brute-force references used to cross-check the solvers.

These enumerate literally and refuse inputs beyond hard size limits.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .chebyshev import check_optimality, equioscillation_point
from .core import (
    DEFAULT_TOL,
    Dataset,
    DegenerateSubsetError,
    DomainError,
    SizeGuardError,
    SolverReport,
    objective_fk,
)

MAX_ORDER_STAT_SIZE = 12
MAX_LMS_SUBSETS = 10**6


def brute_force_order_stat(values: Sequence[float], k: int) -> float:
    """Minimum over all k-subsets of the subset maximum."""
    vals = list(values)
    if len(vals) > MAX_ORDER_STAT_SIZE:
        raise SizeGuardError(f"{len(vals)} values exceed the limit of {MAX_ORDER_STAT_SIZE}")
    if not 1 <= k <= len(vals):
        raise DomainError(f"k={k} outside [1, {len(vals)}]")
    return min(max(c) for c in itertools.combinations(vals, k))


def brute_force_lms(data: Dataset, k: int | None = None, tol: float = DEFAULT_TOL) -> SolverReport:
    """Score the vertex of every (p+1)-subset with ``f_k`` and keep the best.

    ``k`` defaults to ``n - h``, giving the LMS objective.
    """
    k = data.lms_k if k is None else k
    total = math.comb(data.n, data.p + 1)
    if total > MAX_LMS_SUBSETS:
        raise SizeGuardError(f"C(n, p+1) = {total} exceeds {MAX_LMS_SUBSETS}")
    fits, warnings = [], []
    for s in itertools.combinations(range(data.n), data.p + 1):
        try:
            fits.append(equioscillation_point(data, s, tol))
        except DegenerateSubsetError:
            warnings.append(f"degenerate subset {[i + 1 for i in s]}")
    values = [objective_fk(data, f.theta, k) for f in fits]
    best = min(values)
    ties = sorted(
        (f for f, v in zip(fits, values) if v <= best + tol and not f.degenerate),
        key=lambda f: f.active,
    )
    if not ties:
        ties = [f for f, v in zip(fits, values) if v <= best + tol]
    return SolverReport(
        algorithm="brute-force",
        optimizers=ties,
        value=best,
        subproblems_solved=len(fits),
        candidates_examined=len(fits),
        warnings=warnings,
    )


def grid_probe_local_min(
    data: Dataset,
    theta: ArrayLike,
    k: int,
    radius: float,
    samples: int = 101,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Whether ``f_k(theta)`` is no larger than ``f_k`` on a grid around it.

    The grid is ``samples`` points per axis over the box of half-width
    ``radius``; only p <= 2 is feasible.
    """
    theta = np.asarray(theta, dtype=float)
    if data.p > 2:
        raise DomainError("grid probing supports p <= 2 only")
    if radius <= 0:
        raise DomainError("radius must be positive")
    base = objective_fk(data, theta, k)
    offsets = np.linspace(-radius, radius, samples)
    for step in itertools.product(offsets, repeat=data.p):
        if base > objective_fk(data, theta + np.asarray(step), k) + tol:
            return False
    return True


def all_sharp_vertices(data: Dataset, tol: float = DEFAULT_TOL):
    """Every non-degenerate vertex passing the strict optimality check."""
    out = []
    for s in itertools.combinations(range(data.n), data.p + 1):
        try:
            fit = equioscillation_point(data, s, tol)
        except DegenerateSubsetError:
            continue
        if check_optimality(data, fit, strict=True, tol=tol):
            out.append(fit)
    return out
