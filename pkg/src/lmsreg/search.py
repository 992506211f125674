"""Local-minimum classification, enumeration, and the greedy and exact solvers."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np

from .chebyshev import (
    LpSolution,
    candidate_from_solution,
    check_optimality,
    equioscillation_point,
    solve_minimax,
)
from .core import (
    DEFAULT_TOL,
    CandidateFit,
    ClassificationUnavailableError,
    Dataset,
    DegenerateSubsetError,
    DomainError,
    LocalMinimumRecord,
    SolverReport,
    TraceStep,
    abs_residuals,
    objective_fk,
)

MAX_EXHAUSTIVE_P = 8


def count_local_minima_theory(p: int, k: int) -> int:
    """Number of local minima of ``f_k`` for a p-parameter model: C(p+k, p)."""
    if p < 1 or k < 0:
        raise DomainError(f"need p >= 1 and k >= 0; got p={p}, k={k}")
    # Python integers are unbounded, so there is nothing to overflow
    return math.comb(p + k, p)


def _check_k(data: Dataset, k: int) -> None:
    if not 0 <= k <= data.n - (data.p + 1):
        raise DomainError(f"k={k} outside [0, {data.n - data.p - 1}]")


def count_insiders(data: Dataset, fit: CandidateFit, tol: float = DEFAULT_TOL) -> int:
    """Observations off the active set whose residual is strictly below ``rho``."""
    r = abs_residuals(data, fit.theta)
    inside = r < fit.rho - tol
    inside[list(fit.active)] = False
    return int(inside.sum())


def minimum_order(data: Dataset, fit: CandidateFit, tol: float = DEFAULT_TOL) -> int:
    """The drop count ``k`` for which a sharp vertex is a local minimum of ``f_k``."""
    return data.n - (data.p + 1) - count_insiders(data, fit, tol)


def is_local_min(data: Dataset, fit: CandidateFit, k: int, tol: float = DEFAULT_TOL) -> bool:
    """Whether the sharp vertex ``fit`` is a local minimum of ``f_k``.

    Holds exactly when ``n - k - (p + 1)`` non-active observations lie
    strictly inside the band ``|r| < rho``, so that the ``n - k`` smallest
    residuals near ``fit.theta`` are the active ones plus those insiders.
    """
    _check_k(data, k)
    if fit.degenerate or not check_optimality(data, fit, strict=True, tol=tol):
        raise ClassificationUnavailableError(
            f"fit on rows {[i + 1 for i in fit.active]} is not a sharp vertex"
        )
    return count_insiders(data, fit, tol) == data.n - k - (data.p + 1)


class MinimaList(list):
    """A list of records carrying the warnings raised while building it."""

    def __init__(self, items: Iterable = (), warnings: Iterable[str] = ()):
        super().__init__(items)
        self.warnings = list(warnings)


def _sort_key(rec: LocalMinimumRecord):
    return (rec.value, rec.fit.active)


def _candidates(data: Dataset, tol: float, threads: int = 1):
    """Equioscillation point of every (p+1)-subset, with degeneracy warnings."""
    subsets = list(itertools.combinations(range(data.n), data.p + 1))

    def build(s):
        try:
            return equioscillation_point(data, s, tol)
        except DegenerateSubsetError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            built = list(pool.map(build, subsets))
    else:
        built = [build(s) for s in subsets]

    fits, warnings = [], []
    for s, fit in zip(subsets, built):
        if isinstance(fit, DegenerateSubsetError):
            warnings.append(f"degenerate subset {[i + 1 for i in s]}: {fit}")
        elif fit.degenerate or not check_optimality(data, fit, strict=True, tol=tol):
            warnings.append(f"subset {[i + 1 for i in s]} gives a non-sharp vertex")
        else:
            fits.append(fit)
    return fits, warnings


def enumerate_all_local_minima(
    data: Dataset, tol: float = DEFAULT_TOL, threads: int = 1
) -> dict[int, MinimaList]:
    """Local minima of every ``f_k``, keyed by ``k``.

    Each sharp vertex is a local minimum of exactly one ``f_k``, fixed by its
    insider count, so one pass over the (p+1)-subsets serves every ``k``.
    """
    fits, warnings = _candidates(data, tol, threads)
    out = {k: MinimaList(warnings=warnings) for k in range(data.n - data.p)}
    for fit in fits:
        k = minimum_order(data, fit, tol)
        out[k].append(LocalMinimumRecord(k, fit, objective_fk(data, fit.theta, k)))
    for recs in out.values():
        recs.sort(key=_sort_key)
    return out


def enumerate_local_minima(
    data: Dataset, k: int, tol: float = DEFAULT_TOL, threads: int = 1
) -> MinimaList:
    """All local minima of ``f_k``, sorted by value then active set.

    Degenerate subsets are skipped and reported in ``.warnings``. For data in
    general position the length is ``count_local_minima_theory(p, k)``.
    """
    _check_k(data, k)
    fits, warnings = _candidates(data, tol, threads)
    recs = [
        LocalMinimumRecord(k, f, objective_fk(data, f.theta, k))
        for f in fits
        if is_local_min(data, f, k, tol)
    ]
    recs.sort(key=_sort_key)
    return MinimaList(recs, warnings)


def general_position_issues(data: Dataset, tol: float = DEFAULT_TOL) -> list[str]:
    """Reasons why ``data`` is not in general position (empty if it is).

    Checks that every (p+1)-subset has rank p and a sharp vertex, and that
    residuals off the active set are pairwise distinct and away from ``rho``.
    """
    fits, issues = _candidates(data, tol)
    for fit in fits:
        r = abs_residuals(data, fit.theta)
        mask = np.ones(data.n, dtype=bool)
        mask[list(fit.active)] = False
        rest = np.sort(np.append(r[mask], fit.rho))
        if rest.size > 1 and np.min(np.diff(rest)) <= tol:
            issues.append(f"residual tie at vertex of rows {[i + 1 for i in fit.active]}")
    return issues


def is_general_position(data: Dataset, tol: float = DEFAULT_TOL) -> bool:
    return not general_position_issues(data, tol)


def _canonical_fit(data: Dataset, sol: LpSolution, tol: float) -> CandidateFit:
    try:
        fit = equioscillation_point(data, sol.basis, tol)
        if np.allclose(fit.theta, sol.theta, atol=1e3 * tol, rtol=0):
            return fit
    except (DegenerateSubsetError, ValueError):
        pass
    return candidate_from_solution(data, sol, tol)


def _tie_set(data, fits, k, tol):
    values = [objective_fk(data, f.theta, k) for f in fits]
    best = min(values)
    ties = sorted(
        (f for f, v in zip(fits, values) if v <= best + tol), key=lambda f: f.active
    )
    return best, ties


def greedy_solve(data: Dataset, k: int | None = None, tol: float = DEFAULT_TOL) -> SolverReport:
    """Approximate LMS fit by repeatedly dropping one active observation.

    Starting from all observations, each step solves the minimax problem with
    each basis observation removed in turn and keeps the removal with the
    smallest level (smallest index on ties). After ``k`` removals (default
    ``n - h``) the last minimax solution is returned, scored with ``f_k``.
    """
    k = data.lms_k if k is None else k
    _check_k(data, k)
    current = tuple(range(data.n))
    sol = solve_minimax(data, current, tol)
    solved = 1
    trace = [TraceStep(current, sol.rho)]
    for _ in range(k):
        best = None
        for i in sol.basis:
            trial = tuple(j for j in current if j != i)
            cand = solve_minimax(data, trial, tol)
            solved += 1
            if best is None or cand.rho < best[1].rho - tol:
                best = (trial, cand)
        current, sol = best
        trace.append(TraceStep(current, sol.rho))
    fit = _canonical_fit(data, sol, tol)
    return SolverReport(
        algorithm="greedy",
        optimizers=[fit],
        value=objective_fk(data, fit.theta, k),
        subproblems_solved=solved,
        candidates_examined=len({tuple(s.indices) for s in trace}),
        trace=trace,
    )


def exhaustive_solve(
    data: Dataset, k: int | None = None, tol: float = DEFAULT_TOL, force: bool = False
) -> SolverReport:
    """Exact LMS fit by depth-first search over removal sets.

    A node is a removed set ``J`` and the minimax solution on the remaining
    observations. Its children remove one more basis observation. Each node
    is first reduced to the observations that really lie outside its band
    (the solution does not change), so nodes correspond one-to-one with
    solution points and the memo keeps the search within
    ``C(k + p + 1, p + 1)`` points. Nodes with ``k`` removals (default
    ``n - h``) are leaves. Every visited point is scored with ``f_k`` and all
    points tied for the best value are returned.
    """
    k = data.lms_k if k is None else k
    _check_k(data, k)
    if data.p > MAX_EXHAUSTIVE_P and not force:
        raise DomainError(
            f"exhaustive search refused for p={data.p} > {MAX_EXHAUSTIVE_P}; pass force=True"
        )
    everything = frozenset(range(data.n))
    depth = k
    lp_cache: dict[frozenset, LpSolution] = {}
    visited: dict[frozenset, CandidateFit] = {}
    trace: list[TraceStep] = []
    warnings: list[str] = []

    def solve(removed: frozenset) -> LpSolution:
        if removed not in lp_cache:
            lp_cache[removed] = solve_minimax(data, sorted(everything - removed), tol)
        return lp_cache[removed]

    def outside(sol: LpSolution) -> frozenset:
        r = abs_residuals(data, sol.theta)
        return frozenset(np.flatnonzero(r > sol.rho + tol).tolist())

    stack = [frozenset()]
    while stack:
        removed = stack.pop()
        sol = solve(removed)
        node = outside(sol)
        if not node <= removed:
            warnings.append(f"infeasible node {sorted(i + 1 for i in removed)}")
            node = removed
        if node in visited:
            continue
        fit = _canonical_fit(data, sol, tol)
        if not check_optimality(data, fit, strict=True, tol=tol):
            warnings.append(f"non-sharp vertex on rows {[i + 1 for i in fit.active]}")
        visited[node] = fit
        trace.append(TraceStep(tuple(sorted(everything - node)), sol.rho))
        if len(node) >= depth:
            continue
        # reversed so the smallest index is expanded first
        for i in reversed(sol.basis):
            stack.append(node | {i})

    value, ties = _tie_set(data, list(visited.values()), k, tol)
    return SolverReport(
        algorithm="exhaustive",
        optimizers=ties,
        value=value,
        subproblems_solved=len(lp_cache),
        candidates_examined=len(visited),
        trace=trace,
        warnings=warnings,
    )
