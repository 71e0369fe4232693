"""Error norms, observed orders and cost counters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ErrorRecord:
    step_norms: np.ndarray
    E: float
    final: float


def error_metrics(numeric, reference, h: float) -> ErrorRecord:
    """Max-norm errors per step, their time-integrated ``E`` and the final norm.

    Both inputs hold one spatial field per time step, steps along axis 0.
    """
    numeric = np.asarray(numeric, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if numeric.shape != reference.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {reference.shape}")
    if numeric.ndim == 1:
        numeric, reference = numeric[:, None], reference[:, None]
    norms = np.max(np.abs(numeric - reference), axis=tuple(range(1, numeric.ndim)))
    return ErrorRecord(norms, aggregate_error(norms, h), float(norms[-1]))


def aggregate_error(step_norms, h: float) -> float:
    """``sqrt(h * sum_j |e^j|^2)``."""
    step_norms = np.asarray(step_norms, dtype=float)
    return math.sqrt(h * float(np.sum(step_norms**2)))


def observed_order(E_coarse: float, E_fine: float) -> float:
    """``log2`` of the error ratio between a grid and its halving."""
    if not (E_coarse > 0 and E_fine > 0):
        raise ValueError(f"orders need positive errors, got {E_coarse}, {E_fine}")
    return math.log2(E_coarse / E_fine)


def slot_cap(K: int, nodes: int, NT: int, Ntau: int) -> float:
    """Largest number of stored reals the ledger length bound allows."""
    return (K + 1) * nodes * 2 * (Ntau - 1) * math.log((NT + 1) / 2) / math.log(Ntau)


@dataclass
class PerfCounters:
    flops: int = 0
    slots: int = 0
    wall: float = 0.0

    @classmethod
    def from_result(cls, result) -> PerfCounters:
        return cls(result.flops, result.slots, result.wall)


def fit_constant(ns, values, model) -> tuple[float, float]:
    """Least-squares ``c`` in ``values ~ c * model(n)`` and the largest
    relative deviation of the data from the fit."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    basis = np.array([model(n) for n in ns])
    c = float(basis @ values / (basis @ basis))
    spread = float(np.max(np.abs(values / (c * basis) - 1.0)))
    return c, spread
