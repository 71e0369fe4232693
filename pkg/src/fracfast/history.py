"""Compressed history ledger for the fast Caputo evaluators.

The interval ``[0, t_{n-1}]`` is split into subintervals whose lengths are
``h * Ntau**e`` with ``e`` non-decreasing from the newest subinterval to the
oldest.  Each subinterval carries a payload of ``K + 1`` scaled moments

    M_k = int (Pi u)'(tau) * ((tau - c) / r)**k dtau,

where ``c`` and ``r`` are the midpoint and half-width of the subinterval.
When ``2 * Ntau - 1`` consecutive subintervals have equal length the oldest
``Ntau`` of them are fused, and their moments are recombined exactly.

Two merge orders are supported.  ``cascade`` rescans from the newest
subinterval after every fusion until no run of ``2 * Ntau - 1`` equal gaps
is left, so every step ends at the fixed point.  ``sweep`` makes a single pass
per step from the oldest subinterval to the newest and fuses each run it
meets; a run created behind the scan position waits for the next step, so
up to ``2 * Ntau - 1`` equal gaps can survive one step.

Boundaries are kept as integer multiples of ``h`` so that gap comparisons are
exact.  Lists are ordered newest first: ``bounds[0] = n - 1`` and
``bounds[-1] = 0``; ``payloads[i]`` belongs to ``[bounds[i + 1], bounds[i]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np


MERGE_ORDERS = ("cascade", "sweep")


class MergeEvent(NamedTuple):
    n: int
    i0: int
    gap: int
    M: int

    def as_line(self) -> str:
        return f"{self.n},{self.i0},{self.gap},{self.M}"


@lru_cache(maxsize=64)
def recombination_matrices(Ntau: int, K: int) -> np.ndarray:
    """Matrices ``R[j]`` mapping the moments of fine subinterval ``j`` to the
    moments of the fused interval; ``j = 0`` is the newest fine subinterval.

    ``R[j][k, l] = binom(k, l) * Ntau**(-k) * (Ntau - 2 j - 1)**(k - l)``.
    """
    R = np.zeros((Ntau, K + 1, K + 1))
    for j in range(Ntau):
        shift = Ntau - 2 * j - 1
        for k in range(K + 1):
            for l in range(k + 1):
                R[j, k, l] = math.comb(k, l) * float(shift) ** (k - l) / Ntau**k
    R.setflags(write=False)
    return R


def recombine_moments(group, group_gaps, Ntau: int, K: int) -> np.ndarray:
    """Moments of the union of *Ntau* equal adjacent subintervals.

    *group* lists the payloads newest first.  The result is exact: no
    quadrature is involved, only the binomial expansion of the shifted and
    rescaled monomials.
    """
    if len(group) != Ntau or len(group_gaps) != Ntau:
        raise ValueError(f"expected {Ntau} payloads, got {len(group)}")
    if any(g != group_gaps[0] for g in group_gaps):
        raise ValueError(f"cannot recombine unequal subintervals {list(group_gaps)}")

    R = recombination_matrices(Ntau, K)
    merged = None
    for j, payload in enumerate(group):
        payload = np.asarray(payload)
        if payload.shape[0] != K + 1:
            raise ValueError(f"payload has {payload.shape[0]} moments, expected {K + 1}")
        term = np.tensordot(R[j], payload, axes=(1, 0))
        merged = term if merged is None else merged + term
    return merged


@dataclass
class HistoryLedger:
    """Nonuniform subinterval ledger at time step ``n``.

    A fresh ledger sits at ``n = 1`` with no history.  Each call to
    :meth:`push` adds the subinterval ``[t_{n-1}, t_n]`` of the step just
    completed and advances ``n``.
    """

    h: float
    Ntau: int = 2
    K: int = 0
    n: int = 1
    bounds: list = field(default_factory=lambda: [0])
    payloads: list = field(default_factory=list)
    merge_order: str = "cascade"
    trace: list | None = None
    merges: int = 0

    def __post_init__(self):
        if self.merge_order not in MERGE_ORDERS:
            raise ValueError(f"unknown merge order {self.merge_order!r}")
        if self.Ntau < 2:
            raise ValueError(f"Ntau must be at least 2, got {self.Ntau!r}")
        if self.K < 0:
            raise ValueError(f"K must be nonnegative, got {self.K!r}")

    @property
    def M(self) -> int:
        return len(self.payloads)

    @property
    def gaps(self) -> list:
        """Subinterval lengths in units of ``h``, newest first."""
        b = self.bounds
        return [b[i] - b[i + 1] for i in range(len(b) - 1)]

    def times(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float) * self.h

    def prepend(self, payload) -> HistoryLedger:
        payload = np.asarray(payload, dtype=float)
        if payload.shape[0] != self.K + 1:
            raise ValueError(
                f"payload has {payload.shape[0]} moments, expected {self.K + 1}"
            )
        self.n += 1
        self.bounds.insert(0, self.n - 1)
        self.payloads.insert(0, payload)
        return self

    def _run_at(self, i0: int) -> bool:
        b, run = self.bounds, 2 * self.Ntau - 1
        if i0 + run >= len(b):
            return False
        gap = b[i0] - b[i0 + 1]
        return all(b[i] - b[i + 1] == gap for i in range(i0 + 1, i0 + run))

    def _find_run(self) -> int | None:
        run = 2 * self.Ntau - 1
        gaps = self.gaps
        count = 1
        for i in range(1, len(gaps)):
            count = count + 1 if gaps[i] == gaps[i - 1] else 1
            if count == run:
                return i - run + 1
        return None

    def _merge_at(self, i0: int) -> None:
        # payload p covers gap p + 1, so gaps i0+Ntau..i0+2Ntau-1 are payloads first..last-1
        Ntau = self.Ntau
        first = i0 + Ntau - 1
        last = first + Ntau
        gap = self.bounds[first] - self.bounds[first + 1]
        merged = recombine_moments(self.payloads[first:last], [gap] * Ntau, Ntau, self.K)
        self.payloads[first:last] = [merged]
        del self.bounds[first + 1 : last]
        self.merges += 1
        if self.trace is not None:
            self.trace.append(MergeEvent(self.n, i0, gap * Ntau, self.M))

    def merge_pass(self) -> HistoryLedger:
        """Fuse the oldest ``Ntau`` of every run of ``2 Ntau - 1`` equal gaps."""
        if self.merge_order == "cascade":
            while (i0 := self._find_run()) is not None:
                self._merge_at(i0)
        else:
            for i0 in range(len(self.bounds) - 2 * self.Ntau, -1, -1):
                if self._run_at(i0):
                    self._merge_at(i0)
        return self

    def push(self, payload) -> HistoryLedger:
        return self.prepend(payload).merge_pass()

    def geometry(self, t_n: float | None = None):
        """Midpoints ``c_i``, half-widths ``r_i`` and lower/upper ends of every
        stored subinterval, newest first, as real times."""
        b = np.asarray(self.bounds, dtype=float) * self.h
        upper, lower = b[:-1], b[1:]
        return 0.5 * (upper + lower), 0.5 * (upper - lower), lower, upper


def length_bounds(n: int, Ntau: int) -> tuple[float, float]:
    """Lower and upper bounds on the ledger length at step ``n``."""
    log = math.log(n) / math.log(Ntau)
    upper = 2 * (Ntau - 1) * math.log((n + 1) / 2) / math.log(Ntau)
    return (Ntau - 1) * (log - 1), upper


@dataclass(frozen=True)
class StructureReport:
    ok: bool
    failed: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _exponent(gap: int, Ntau: int) -> int | None:
    e = 0
    while gap % Ntau == 0:
        gap //= Ntau
        e += 1
    return e if gap == 1 else None


def check_structure(ledger: HistoryLedger, slack: float = 1.0e-9) -> StructureReport:
    """Verify the structural invariants of *ledger*; reports the first failure."""
    b, n, Ntau = ledger.bounds, ledger.n, ledger.Ntau

    def fail(name, detail):
        return StructureReport(False, name, detail)

    if b[0] != n - 1 or b[-1] != 0:
        return fail("endpoints", f"bounds run from {b[0]} to {b[-1]}, n={n}")
    if any(b[i] <= b[i + 1] for i in range(len(b) - 1)):
        return fail("decreasing", f"bounds not strictly decreasing: {b}")
    if len(ledger.payloads) != len(b) - 1:
        return fail("payload-count", f"{len(ledger.payloads)} payloads for {len(b) - 1} gaps")
    if any(np.shape(p)[0] != ledger.K + 1 for p in ledger.payloads):
        return fail("payload-length", "payload length differs from K + 1")

    gaps = ledger.gaps
    exps = []
    for i, g in enumerate(gaps):
        e = _exponent(g, Ntau)
        if e is None:
            return fail("power-gap", f"gap {i + 1} = {g} h is not a power of {Ntau}")
        exps.append(e)
    for i in range(1, len(exps)):
        if exps[i] < exps[i - 1]:
            return fail("monotone", f"exponent drops at gap {i + 1}: {exps}")
        if exps[i] - exps[i - 1] > 1:
            return fail("ratio", f"gap ratio exceeds {Ntau} at gap {i + 1}: {gaps}")

    if exps:
        top = exps[-1]
        for e in range(top):
            c = exps.count(e)
            if not Ntau - 1 <= c <= 2 * Ntau - 2:
                return fail("count", f"{c} gaps of length {Ntau}**{e} h")
        for i, e in enumerate(exps, start=1):
            if not (i / (2 * Ntau - 2) - 1 - slack <= e <= (i - 1) / (Ntau - 1) + slack):
                return fail("exponent-range", f"exponent {e} out of range at i={i}")

    for i in range(1, len(b)):
        ratio = (b[i - 1] - b[i]) / (n - b[i])
        if ratio > 0.5 + slack:
            return fail("half-ratio", f"ratio {ratio} > 1/2 at subinterval {i}")

    if n >= 2:
        lo, hi = length_bounds(n, Ntau)
        M = ledger.M
        if not lo - slack <= M <= hi + slack:
            return fail("length", f"M={M} outside [{lo:.4f}, {hi:.4f}] at n={n}")

    return StructureReport(True)
