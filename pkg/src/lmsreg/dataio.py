"""CSV datasets, synthetic instances and report serialization."""

from __future__ import annotations

import csv
import io
import json
from typing import IO

import numpy as np

from .core import Dataset, LMSError

SCHEMA_VERSION = "1"


class InputFormatError(LMSError, ValueError):
    """A CSV file does not follow the ``x1,...,xp,y`` schema."""


def parse_csv(text: str) -> Dataset:
    """Parse ``x1,...,xp,y`` CSV text (header required) into a Dataset."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputFormatError("empty input")
    header = [c.strip() for c in rows[0]]
    p = len(header) - 1
    expected = [f"x{j + 1}" for j in range(p)] + ["y"]
    if p < 1 or header != expected:
        raise InputFormatError(f"header must be {','.join(expected) if p >= 1 else 'x1,...,xp,y'}; got {','.join(header)}")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != p + 1:
            raise InputFormatError(f"line {lineno}: expected {p + 1} fields, got {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise InputFormatError(f"line {lineno}: {exc}") from None
    if not values:
        raise InputFormatError("no observations")
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise InputFormatError("non-finite value in input")
    return Dataset(arr[:, :p], arr[:, p])


def read_csv(path: str) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())


def format_csv(data: Dataset) -> str:
    """Inverse of :func:`parse_csv`; floats use the shortest exact repr."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j + 1}" for j in range(data.p)] + ["y"])
    for xi, yi in zip(data.X, data.y):
        w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    return buf.getvalue()


def generate_instance(
    n: int,
    p: int,
    seed: int = 0,
    outlier_fraction: float = 0.3,
    noise: float = 0.1,
    outlier_shift: float = 10.0,
    intercept: bool = False,
    coef=None,
) -> tuple[Dataset, np.ndarray]:
    """Synthetic linear model with a block of gross outliers.

    Regressors are standard normal (the first column is all ones when
    ``intercept``). Coefficients default to Uniform(-2, 2). Responses are
    ``X @ coef + N(0, noise^2)``; a random ``outlier_fraction`` of rows get
    ``+ outlier_shift * (1 + |N(0, 1)|)`` added. Uses ``numpy`` PCG64 seeded
    with ``seed``.
    """
    if p < 1 or n < 2 * p or n < p + 1:
        raise ValueError(f"need p >= 1 and n >= 2p; got n={n}, p={p}")
    if not 0.0 <= outlier_fraction < 0.5:
        raise ValueError("outlier_fraction must lie in [0, 0.5)")
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.standard_normal((n, p))
    if intercept:
        X[:, 0] = 1.0
    beta = rng.uniform(-2.0, 2.0, p) if coef is None else np.asarray(coef, dtype=float)
    if beta.shape != (p,):
        raise ValueError(f"coef must have length {p}")
    y = X @ beta + noise * rng.standard_normal(n)
    n_out = int(np.floor(outlier_fraction * n))
    bad = rng.choice(n, size=n_out, replace=False)
    y[bad] += outlier_shift * (1.0 + np.abs(rng.standard_normal(n_out)))
    return Dataset(X, y), beta


def dump_json(obj, fh: IO[str]) -> None:
    json.dump(obj, fh, indent=2, sort_keys=False)
    fh.write("\n")
