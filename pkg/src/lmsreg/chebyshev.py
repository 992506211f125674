"""Minimax (l-infinity) fitting over observation subsets.

``solve_minimax`` runs a two-phase dense simplex with Bland's rule on the
dual of::

    min rho  s.t.  rho - x_i @ theta >= -y_i,  rho + x_i @ theta >= y_i,  i in I

The dual has ``p + 1`` equality rows and two nonnegative weights per
observation, so the tableau stays tiny. ``(rho, theta)`` are recovered as
the simplex multipliers of the optimal basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .core import (
    DEFAULT_TOL,
    CandidateFit,
    Dataset,
    DegenerateSubsetError,
    IndexSet,
    LMSError,
    UnderdeterminedError,
    as_index_set,
)

_PIVOT_TOL = 1e-12
_MAX_PIVOTS = 50_000


@dataclass(frozen=True)
class LpSolution:
    """Solution of the minimax subproblem on ``subset``.

    ``active`` holds every index whose constraint is tight. ``basis`` holds
    the ``p + 1`` observations of the optimal simplex basis and ``weights``
    their dual weights (nonnegative, summing to one).
    """

    theta: NDArray[np.float64]
    rho: float
    subset: IndexSet
    active: IndexSet
    basis: IndexSet
    weights: NDArray[np.float64]
    iterations: int


def _pivot(T: NDArray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run_bland(T: NDArray, basis: list[int], ncols: int) -> int:
    """Pivot until no reduced cost in the last row is negative.

    Only the first ``ncols`` columns may enter. Entering column and leaving
    row both go to the smallest eligible index, which rules out cycling.
    """
    m = T.shape[0] - 1
    pivots = 0
    while True:
        cost = T[-1, :ncols]
        entering = np.flatnonzero(cost < -_PIVOT_TOL)
        if entering.size == 0:
            return pivots
        col = int(entering[0])
        column = T[:m, col]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            # the dual region is a simplex intersected with a subspace: bounded
            raise LMSError("unbounded simplex step in a bounded problem")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + _PIVOT_TOL]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise LMSError("simplex pivot limit exceeded")


def _simplex_equality(A: NDArray, b: NDArray, c: NDArray) -> tuple[list[int], int]:
    """Minimize ``c @ z`` subject to ``A z = b``, ``z >= 0``, with ``b >= 0``.

    Returns the optimal basis (column indices of ``A``) and the pivot count.
    """
    m, ncols = A.shape
    T = np.zeros((m + 1, ncols + m + 1))
    T[:m, :ncols] = A
    T[:m, ncols : ncols + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(ncols, ncols + m))

    # phase 1: minimize the sum of artificials
    T[-1, :ncols] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    pivots = _run_bland(T, basis, ncols)
    if -T[-1, -1] > 1e-9:
        raise LMSError("minimax dual is infeasible")

    # drive zero-level artificials out of the basis
    for r in range(m):
        if basis[r] >= ncols:
            candidates = np.flatnonzero(np.abs(T[r, :ncols]) > 1e-9)
            if candidates.size == 0:
                raise DegenerateSubsetError("redundant constraint rows in minimax dual")
            _pivot(T, basis, r, int(candidates[0]))
            pivots += 1

    # phase 2 on the original costs
    T[:, ncols : ncols + m] = 0.0
    T[-1, :] = 0.0
    T[-1, :ncols] = c
    for r, j in enumerate(basis):
        T[-1] -= c[j] * T[r]
    pivots += _run_bland(T, basis, ncols)
    return basis, pivots


def _check_subset(data: Dataset, subset: Sequence[int]) -> IndexSet:
    idx = as_index_set(subset)
    if idx and (idx[0] < 0 or idx[-1] >= data.n):
        raise ValueError(f"indices out of range for n={data.n}")
    if len(idx) <= data.p:
        raise UnderdeterminedError(
            f"subset of size {len(idx)} cannot determine p={data.p} parameters"
        )
    if np.linalg.matrix_rank(data.X[list(idx)]) < data.p:
        raise DegenerateSubsetError(f"rows {[i + 1 for i in idx]} are rank deficient")
    return idx


def solve_minimax(
    data: Dataset, subset: Sequence[int] | None = None, tol: float = DEFAULT_TOL
) -> LpSolution:
    """Minimize the maximum absolute residual over ``subset`` (default: all).

    Deterministic for identical input. When ``subset`` covers every
    observation the optimizer is unique; on proper subsets with ties one
    optimizer is returned.
    """
    idx = _check_subset(data, range(data.n) if subset is None else subset)
    X = data.X[list(idx)]
    y = data.y[list(idx)]
    m = len(idx)
    p = data.p

    # columns 2j (residual at -rho) and 2j+1 (residual at +rho) for idx[j]
    A = np.empty((p + 1, 2 * m))
    A[0, :] = 1.0
    A[1:, 0::2] = -X.T
    A[1:, 1::2] = X.T
    c_max = np.empty(2 * m)
    c_max[0::2] = -y
    c_max[1::2] = y
    b = np.zeros(p + 1)
    b[0] = 1.0

    basis, pivots = _simplex_equality(A, b, -c_max)
    B = A[:, basis]
    w = np.linalg.solve(B.T, c_max[basis])
    rho, theta = float(w[0]), w[1:].copy()
    z = np.linalg.solve(B, b)

    weights: dict[int, float] = {}
    for col, val in zip(basis, z):
        obs = idx[col // 2]
        weights[obs] = weights.get(obs, 0.0) + max(float(val), 0.0)
    basis_obs = tuple(sorted(weights))
    lam = np.array([weights[i] for i in basis_obs])
    lam = lam / lam.sum()

    r = np.abs(y - X @ theta)
    rho = max(rho, float(r.max()))
    active = tuple(i for i, ri in zip(idx, r) if ri >= rho - tol)
    theta.setflags(write=False)
    return LpSolution(theta, rho, idx, active, basis_obs, lam, pivots)


def candidate_from_solution(data: Dataset, sol: LpSolution, tol: float = DEFAULT_TOL) -> CandidateFit:
    """Recast a minimax solution as a candidate point on its basis."""
    if len(sol.basis) != data.p + 1:
        raise DegenerateSubsetError(
            f"basis has {len(sol.basis)} distinct observations, expected {data.p + 1}"
        )
    r = data.y[list(sol.basis)] - data.X[list(sol.basis)] @ sol.theta
    eps = tuple(1 if v >= 0 else -1 for v in r)
    return CandidateFit(
        theta=sol.theta,
        rho=sol.rho,
        active=sol.basis,
        eps=eps,
        lam=sol.weights,
        degenerate=bool(np.any(sol.weights <= tol)),
    )


def equioscillation_point(
    data: Dataset, subset: Sequence[int], tol: float = DEFAULT_TOL
) -> CandidateFit:
    """The unique point where ``p + 1`` residuals share one absolute value.

    With the largest index of ``subset`` in the last position, solve
    ``sum_{i<p+1} t_i x_i = -x_{p+1}`` (so ``t_{p+1} = 1``), then take
    ``lam_i = |t_i| / sum |t_j|`` and ``eps_i = sign(t_i)``. The point
    ``(theta, rho)`` solves ``rho + eps_i x_i @ theta = eps_i y_i`` on the
    subset. All signs are flipped if needed so that ``rho >= 0``.

    A zero ``t_i`` has no sign; the fit is then flagged ``degenerate`` with
    ``eps_i = +1``.
    """
    idx = as_index_set(subset)
    p = data.p
    if len(idx) != p + 1:
        raise ValueError(f"subset must have p + 1 = {p + 1} members; got {len(idx)}")
    Xs = data.X[list(idx)]
    ys = data.y[list(idx)]
    try:
        t_head = np.linalg.solve(Xs[:p].T, -Xs[p])
    except np.linalg.LinAlgError:
        raise DegenerateSubsetError(
            f"rows {[i + 1 for i in idx[:p]]} are singular"
        ) from None
    t = np.append(t_head, 1.0)
    abs_t = np.abs(t)
    lam = abs_t / abs_t.sum()
    eps = np.where(t < 0, -1.0, 1.0)
    degenerate = bool(np.any(abs_t < tol))

    M = np.empty((p + 1, p + 1))
    M[:, 0] = 1.0
    M[:, 1:] = eps[:, None] * Xs
    try:
        sol = np.linalg.solve(M, eps * ys)
    except np.linalg.LinAlgError:
        raise DegenerateSubsetError(
            f"active hyperplanes of rows {[i + 1 for i in idx]} do not intersect"
        ) from None
    rho, theta = float(sol[0]), sol[1:]
    if rho < 0:
        rho, eps = -rho, -eps
    theta.setflags(write=False)
    lam.setflags(write=False)
    return CandidateFit(
        theta=theta,
        rho=rho,
        active=idx,
        eps=tuple(int(e) for e in eps),
        lam=lam,
        degenerate=degenerate,
    )


def optimality_residuals(data: Dataset, fit: CandidateFit) -> tuple[float, float, float]:
    """Max-norm violations of stationarity, weight sum and active equalities."""
    rows = list(fit.active)
    eps = np.asarray(fit.eps, dtype=float)
    lam = np.asarray(fit.lam, dtype=float)
    stationarity = float(np.max(np.abs((lam * eps) @ data.X[rows])))
    weight_sum = abs(float(lam.sum()) - 1.0)
    level = eps * (data.y[rows] - data.X[rows] @ np.asarray(fit.theta)) - fit.rho
    return stationarity, weight_sum, float(np.max(np.abs(level)))


def check_optimality(
    data: Dataset, fit: CandidateFit, strict: bool = False, tol: float = DEFAULT_TOL
) -> bool:
    """Check the necessary minimax optimality conditions at ``fit``.

    The weighted signed regressors of the active rows must cancel, the
    weights must be a probability vector, and each active residual must sit
    at level ``rho`` with its sign. ``strict`` additionally requires every
    weight to exceed ``tol`` (a sharp vertex). Malformed fits give False.
    """
    try:
        p = data.p
        if len(fit.active) != p + 1 or len(set(fit.active)) != p + 1:
            return False
        if not all(0 <= i < data.n for i in fit.active):
            return False
        if len(fit.eps) != p + 1 or any(e not in (-1, 1) for e in fit.eps):
            return False
        lam = np.asarray(fit.lam, dtype=float)
        if lam.shape != (p + 1,) or np.asarray(fit.theta).shape != (p,):
            return False
        if np.any(lam < -tol):
            return False
        if strict and np.any(lam <= tol):
            return False
        return max(optimality_residuals(data, fit)) <= tol
    except (TypeError, ValueError, IndexError):
        return False
