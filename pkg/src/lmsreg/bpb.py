"""Random search over (p+1)-subsets with probabilistic branch pruning.

This is a pragmatic variant of branch-and-probability-bound search, not a
reproduction of any published procedure:

* Branch ``j`` holds the (p+1)-subsets containing observation ``j``; a
  sample from it is ``{j}`` plus ``p`` other indices drawn uniformly
  without replacement. Branches overlap.
* Every round, each live branch (in index order) draws up to
  ``branch_factor`` subsets, scores the vertex of each with the LMS
  objective, and records its best value. A draw that repeats an already
  scored subset is redrawn (up to 8 times).
* After a round, branches whose best value lies above the
  ``retention_quantile`` quantile of the live branches' best values are
  pruned. At least one branch always survives.
* The search stops once ``iterations`` subsets have been scored.

Branch ``j`` draws from its own ``numpy.random.PCG64`` stream seeded with
``SeedSequence([seed, j])``, so results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import check_optimality, equioscillation_point
from .core import (
    DEFAULT_TOL,
    CandidateFit,
    Dataset,
    DegenerateSubsetError,
    DomainError,
    NoCandidateError,
    SolverReport,
    TraceStep,
    objective_fk,
)


_REDRAWS = 8


@dataclass(frozen=True)
class BpbConfig:
    seed: int = 0
    iterations: int = 1000
    branch_factor: int = 4
    retention_quantile: float = 0.5

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be at least 1")
        if self.branch_factor < 1:
            raise DomainError("branch_factor must be at least 1")
        if not 0.0 < self.retention_quantile < 1.0:
            raise DomainError("retention_quantile must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def _branch_rng(seed: int, branch: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, branch])))


def bpb_solve(
    data: Dataset, config: BpbConfig, k: int | None = None, tol: float = DEFAULT_TOL
) -> SolverReport:
    """Approximate LMS fit by pruned random sampling of (p+1)-subsets.

    Candidates are scored with ``f_k`` (default: the LMS objective). The
    trace has one step per scored subset; its ``value`` is the best
    objective found so far, so it never increases.
    """
    k = data.lms_k if k is None else k
    if not 0 <= k <= data.n - (data.p + 1):
        raise DomainError(f"k={k} outside [0, {data.n - data.p - 1}]")
    n, p = data.n, data.p
    rngs = {j: _branch_rng(config.seed, j) for j in range(n)}
    live = list(range(n))
    branch_best = {j: np.inf for j in range(n)}
    cache: dict[tuple, tuple[CandidateFit, float] | None] = {}

    best_value = np.inf
    best_fits: dict[tuple, CandidateFit] = {}
    trace: list[TraceStep] = []
    spent = 0
    degenerate = 0

    while spent < config.iterations:
        for j in live:
            others = np.array([i for i in range(n) if i != j])
            for _ in range(config.branch_factor):
                if spent >= config.iterations:
                    break
                for _ in range(_REDRAWS):
                    pick = rngs[j].choice(others, size=p, replace=False)
                    subset = tuple(sorted([j, *pick.tolist()]))
                    if subset not in cache:
                        break
                spent += 1
                if subset not in cache:
                    cache[subset] = _score(data, subset, k, tol)
                scored = cache[subset]
                if scored is None:
                    degenerate += 1
                    continue
                fit, value = scored
                branch_best[j] = min(branch_best[j], value)
                if value < best_value - tol:
                    best_value = value
                    best_fits = {fit.active: fit}
                elif value <= best_value + tol:
                    best_fits[fit.active] = fit
                trace.append(TraceStep(subset, best_value))
        if len(live) > 1:
            scores = np.array([branch_best[j] for j in live])
            finite = scores[np.isfinite(scores)]
            if finite.size:
                cut = np.quantile(finite, config.retention_quantile)
                kept = [j for j in live if branch_best[j] <= cut]
                live = kept or live[:1]

    if not best_fits:
        raise NoCandidateError("every sampled subset was degenerate")
    warnings = [f"{degenerate} sampled subsets were degenerate"] if degenerate else []
    return SolverReport(
        algorithm="bpb",
        optimizers=[best_fits[a] for a in sorted(best_fits)],
        value=float(best_value),
        subproblems_solved=len(cache),
        candidates_examined=len(cache),
        trace=trace,
        warnings=warnings,
    )


def _score(data: Dataset, subset: tuple, k: int, tol: float):
    try:
        fit = equioscillation_point(data, subset, tol)
    except DegenerateSubsetError:
        return None
    if fit.degenerate or not check_optimality(data, fit, strict=True, tol=tol):
        return None
    return fit, objective_fk(data, fit.theta, k)
