"""Banded linear solves used by the time-stepping schemes."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solve_banded


class SingularSystemError(RuntimeError):
    pass


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system.

    ``lower[i]`` multiplies ``x[i - 1]`` in row ``i`` (``lower[0]`` is unused),
    ``upper[i]`` multiplies ``x[i + 1]`` (``upper[-1]`` is unused).
    """
    ab = np.empty((3, len(diag)))
    ab[0, 1:] = upper[:-1]
    ab[0, 0] = 0.0
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    ab[2, -1] = 0.0
    return solve_band(ab, (1, 1), rhs)


def solve_band(ab: np.ndarray, bandwidth: tuple[int, int], rhs) -> np.ndarray:
    """Solve with a matrix in LAPACK diagonal-ordered form."""
    try:
        x = solve_banded(bandwidth, ab, rhs, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("banded solve produced non-finite values")
    return x


def band_from_rows(rows: dict, size: int, bandwidth: tuple[int, int]) -> np.ndarray:
    """Pack ``{row: {col: value}}`` into diagonal-ordered form."""
    l, u = bandwidth
    ab = np.zeros((l + u + 1, size))
    for i, entries in rows.items():
        for j, v in entries.items():
            if abs(i - j) > (l if i > j else u):
                raise ValueError(f"entry ({i}, {j}) lies outside the band {bandwidth}")
            ab[u + i - j, j] = v
    return ab
