"""Domain types, order statistics and the LMS objective.

Indices are 0-based everywhere inside the library. Reports and the CLI
convert to 1-based observation numbers at the serialization boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

DEFAULT_TOL = 1e-9

IndexSet = tuple[int, ...]


class LMSError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LMSError, ValueError):
    """An argument is outside the domain of an operation."""


class DatasetError(LMSError, ValueError):
    """A dataset violates the shape or rank assumptions."""

    def __init__(self, message: str, deficient_columns: Sequence[int] = ()):
        super().__init__(message)
        self.deficient_columns = tuple(deficient_columns)


class DegenerateSubsetError(LMSError):
    """The regressor rows of an index subset do not have full rank."""


class UnderdeterminedError(LMSError):
    """An index subset has too few members to pin down a fit."""


class ClassificationUnavailableError(LMSError):
    """Local-minimum classification was requested for a degenerate fit."""


class SizeGuardError(LMSError):
    """A brute-force routine refused an instance that is too large."""


class NoCandidateError(LMSError):
    """A search produced no valid candidate point."""


def as_index_set(indices: Sequence[int]) -> IndexSet:
    """Return ``indices`` as a sorted, duplicate-free tuple of ints."""
    out = tuple(sorted(int(i) for i in indices))
    if len(set(out)) != len(out):
        raise DomainError(f"duplicate indices in {list(indices)}")
    return out


def _dependent_columns(X: NDArray) -> list[int]:
    """Columns that add nothing to the rank of the columns before them."""
    dependent = []
    rank = 0
    for j in range(X.shape[1]):
        r = np.linalg.matrix_rank(X[:, : j + 1])
        if r == rank:
            dependent.append(j)
        rank = r
    return dependent


@dataclass(frozen=True)
class Dataset:
    """An (n x p) design matrix ``X`` with responses ``y``.

    Construction validates ``n >= p + 1``, ``n / 2 >= p`` and ``rank(X) == p``.
    Both arrays are copied and made read-only.
    """

    X: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DatasetError(
                f"X must be (n, p) and y (n,); got {X.shape} and {y.shape}"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DatasetError("X and y must be finite")
        n, p = X.shape
        if p < 1:
            raise DatasetError("model dimension p must be at least 1")
        if n < p + 1:
            raise DatasetError(f"need n >= p + 1 observations; got n={n}, p={p}")
        if n < 2 * p:
            raise DatasetError(f"need n/2 >= p; got n={n}, p={p}")
        if np.linalg.matrix_rank(X) < p:
            dep = _dependent_columns(X)
            names = ", ".join(f"x{j + 1}" for j in dep)
            raise DatasetError(
                f"design matrix is rank deficient; dependent columns: {names}",
                deficient_columns=dep,
            )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def h(self) -> int:
        """Median rank ``floor(n/2) + 1``."""
        return self.n // 2 + 1

    @property
    def lms_k(self) -> int:
        """Drop count ``n - h`` at which ``f_k`` is the LMS objective."""
        return self.n - self.h

    def with_y(self, y: ArrayLike) -> "Dataset":
        return Dataset(self.X, np.asarray(y, dtype=float))


@dataclass(frozen=True)
class CandidateFit:
    """A candidate point built from ``p + 1`` active observations.

    ``eps`` and ``lam`` are aligned with ``active``. At the point ``theta``,
    ``eps[i] * (y[a] - x[a] @ theta) == rho`` for every active ``a`` and
    ``sum(lam * eps * x[active]) == 0``.
    """

    theta: NDArray[np.float64]
    rho: float
    active: IndexSet
    eps: tuple[int, ...]
    lam: NDArray[np.float64]
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "theta": [float(t) for t in self.theta],
            "rho": float(self.rho),
            "active": [i + 1 for i in self.active],
            "eps": list(self.eps),
            "lambda": [float(v) for v in self.lam],
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class LocalMinimumRecord:
    k: int
    fit: CandidateFit
    value: float

    def to_dict(self) -> dict:
        return {"k": self.k, "value": float(self.value), **self.fit.to_dict()}


@dataclass(frozen=True)
class TraceStep:
    indices: IndexSet
    value: float

    def to_dict(self) -> dict:
        return {"indices": [i + 1 for i in self.indices], "value": float(self.value)}


@dataclass
class SolverReport:
    """Output of an LMS solver.

    Attributes:
        optimizers: every reported optimizer (ties included), each evaluated
            at the same objective value within tolerance
        value: LMS objective at the optimizers
        subproblems_solved: number of minimax subproblems solved
        candidates_examined: number of distinct candidate points evaluated
        trace: ordered search steps; meaning of ``value`` depends on the solver
    """

    algorithm: str
    optimizers: list[CandidateFit]
    value: float
    subproblems_solved: int = 0
    candidates_examined: int = 0
    trace: list[TraceStep] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def theta(self) -> NDArray[np.float64]:
        return self.optimizers[0].theta

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "value": float(self.value),
            "value_squared": float(self.value) ** 2,
            "optimizers": [f.to_dict() for f in self.optimizers],
            "subproblems_solved": self.subproblems_solved,
            "candidates_examined": self.candidates_examined,
            "trace": [s.to_dict() for s in self.trace],
            "warnings": list(self.warnings),
        }


def kth_smallest(values: ArrayLike, k: int) -> float:
    """Return the k-th smallest element (1-based), duplicates counted."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("kth_smallest of an empty sequence")
    if not 1 <= k <= arr.size:
        raise DomainError(f"k={k} outside [1, {arr.size}]")
    return float(np.partition(arr, k - 1)[k - 1])


def kth_smallest_index(values: ArrayLike, k: int) -> int:
    """Index of the k-th smallest element; ties resolved in index order."""
    arr = np.asarray(values, dtype=float).ravel()
    if not 1 <= k <= arr.size:
        raise DomainError(f"k={k} outside [1, {arr.size}]")
    return int(np.argsort(arr, kind="stable")[k - 1])


def median_h(values: ArrayLike) -> float:
    """Median taken as the ``floor(n/2) + 1``-th smallest value.

    For even ``n`` this is the upper middle element, not the average of the
    two middle elements.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("median of an empty sequence")
    return kth_smallest(arr, arr.size // 2 + 1)


def _theta(data: Dataset, theta: ArrayLike) -> NDArray[np.float64]:
    t = np.asarray(theta, dtype=float).ravel()
    if t.shape != (data.p,):
        raise DomainError(f"theta must have length p={data.p}; got {t.size}")
    return t


def residuals(data: Dataset, theta: ArrayLike) -> NDArray[np.float64]:
    """Signed residuals ``y - X @ theta``."""
    return data.y - data.X @ _theta(data, theta)


def abs_residuals(data: Dataset, theta: ArrayLike) -> NDArray[np.float64]:
    return np.abs(residuals(data, theta))


def objective_fk(data: Dataset, theta: ArrayLike, k: int) -> float:
    """The ``(n - k)``-th smallest absolute residual at ``theta``.

    Equivalently, the smallest achievable maximum absolute residual after
    discarding any ``k`` observations.
    """
    if not 0 <= k <= data.n - (data.p + 1):
        raise DomainError(f"k={k} outside [0, {data.n - data.p - 1}]")
    return kth_smallest(abs_residuals(data, theta), data.n - k)


def objective_lms(data: Dataset, theta: ArrayLike) -> float:
    """LMS objective in absolute form: the h-th smallest absolute residual.

    Its square is the median of squared residuals, so both forms share
    their minimizers.
    """
    return kth_smallest(abs_residuals(data, theta), data.h)


def objective_lms_squared(data: Dataset, theta: ArrayLike) -> float:
    """Median (h-th smallest) of the squared residuals."""
    return median_h(residuals(data, theta) ** 2)


def profile_breakpoints(data: Dataset, tol: float = DEFAULT_TOL) -> NDArray[np.float64]:
    """Parameter values where some ``f_k`` can change slope, for ``p == 1``.

    These are the zeros of each residual and every crossing of two absolute
    residual lines. Between consecutive breakpoints the order of the absolute
    residuals is fixed, so every order statistic is linear there.
    """
    if data.p != 1:
        raise DomainError("objective profiles are only defined for p == 1")
    x = data.X[:, 0]
    y = data.y
    pts = [y[i] / x[i] for i in range(data.n) if abs(x[i]) > tol]
    for i in range(data.n):
        for j in range(i + 1, data.n):
            if abs(x[i] - x[j]) > tol:
                pts.append((y[i] - y[j]) / (x[i] - x[j]))
            if abs(x[i] + x[j]) > tol:
                pts.append((y[i] + y[j]) / (x[i] + x[j]))
    pts = np.sort(np.asarray(pts, dtype=float))
    keep = np.concatenate([[True], np.diff(pts) > tol])
    return pts[keep]


def objective_profile(
    data: Dataset, k: int | None = None, margin: float = 1.0, tol: float = DEFAULT_TOL
) -> list[tuple[float, float]]:
    """Exact piecewise-linear profile of ``f_k`` for a one-parameter model.

    Returns ``(theta, f_k(theta))`` at every breakpoint plus one point beyond
    each end, so linear interpolation between rows reproduces the function
    on the covered range. ``k`` defaults to the LMS drop count.
    """
    k = data.lms_k if k is None else k
    bp = profile_breakpoints(data, tol)
    span = max(bp[-1] - bp[0], 1.0)
    grid = np.concatenate([[bp[0] - margin * span], bp, [bp[-1] + margin * span]])
    return [(float(t), objective_fk(data, [t], k)) for t in grid]


def profile_local_minima(
    profile: Sequence[tuple[float, float]], tol: float = DEFAULT_TOL
) -> list[float]:
    """Interior profile rows strictly lower than both neighbours."""
    out = []
    for (_, a), (t, b), (_, c) in zip(profile, profile[1:], profile[2:]):
        if b < a - tol and b < c - tol:
            out.append(t)
    return out
