"""Gauss-type iteration x_{n+1} = M(x_n, y_n), y_{n+1} = N(x_n, y_n)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import MeanPair
from .errors import InvariantMeansError, MeanBoundsError, OrbitError


@dataclass(frozen=True)
class ConvergencePolicy:
    """When to stop iterating.

    The orbit stops on the diagonal, which every pair of means fixes, or once
    the envelope ``(min(x_n, y_n), max(x_n, y_n))`` moved by less than
    ``gap_tol`` and the gap changed by less than ``gap_tol`` over the last
    step, or after ``max_steps`` steps.
    """

    gap_tol: float = 1e-12
    max_steps: int = 100_000

    def __post_init__(self):
        if not (self.gap_tol > 0 and math.isfinite(self.gap_tol)):
            raise ValueError(f"gap_tol must be positive, got {self.gap_tol}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


DEFAULT_POLICY = ConvergencePolicy()
EXPORT_CAP = 10_000


@dataclass(frozen=True)
class OrbitTrace:
    pairs: tuple[tuple[float, float], ...]
    converged: bool

    @property
    def steps(self) -> int:
        return len(self.pairs) - 1

    @property
    def final(self) -> tuple[float, float]:
        return self.pairs[-1]

    @property
    def final_gap(self) -> float:
        x, y = self.pairs[-1]
        return abs(x - y)

    def envelope(self) -> list[tuple[float, float]]:
        return [(min(p), max(p)) for p in self.pairs]

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` unless the envelope is monotone and nested."""
        env = self.envelope()
        for n in range(1, len(env)):
            (lo0, hi0), (lo1, hi1) = env[n - 1], env[n]
            if not (lo0 <= lo1 and hi1 <= hi0):
                raise AssertionError(f"envelope not nested at step {n}: "
                                     f"[{lo1}, {hi1}] vs [{lo0}, {hi0}]")

    def replay_errors(self, pair: MeanPair) -> list[int]:
        """Indices n where pairs[n] is not exactly (M, N)(pairs[n-1])."""
        mf, nf = pair.m.func, pair.n.func
        return [n for n in range(1, len(self.pairs))
                if self.pairs[n] != (mf(*self.pairs[n - 1]), nf(*self.pairs[n - 1]))]


def iterate(pair: MeanPair, x: float, y: float,
            policy: ConvergencePolicy = DEFAULT_POLICY) -> OrbitTrace:
    """Generate the orbit of ``(x, y)`` under ``pair`` until it stabilizes.

    Every new pair must stay inside the envelope of the previous one; a mean
    that escapes (possible for text-defined means checked only on a grid)
    raises :class:`MeanBoundsError` carrying the step index.
    """
    x, y = float(x), float(y)
    pair.domain.require(x, y)
    pairs = [(x, y)]
    if x == y:
        return OrbitTrace(tuple(pairs), True)
    mf, nf = pair.m.func, pair.n.func
    tol = policy.gap_tol
    lo, hi = (x, y) if x <= y else (y, x)
    for step in range(1, policy.max_steps + 1):
        try:
            nx, ny = mf(x, y), nf(x, y)
        except InvariantMeansError as exc:
            raise OrbitError(str(exc), step) from exc
        except (ArithmeticError, ValueError) as exc:
            raise OrbitError(f"mean evaluation failed: {exc}", step) from exc
        nlo, nhi = (nx, ny) if nx <= ny else (ny, nx)
        if not (lo <= nlo and nhi <= hi):
            raise MeanBoundsError(
                f"step {step}: ({nx!r}, {ny!r}) escapes [{lo!r}, {hi!r}]",
                witness=(x, y), step=step)
        pairs.append((nx, ny))
        moved = max(nlo - lo, hi - nhi)
        if nx == ny or moved < tol and abs((nhi - nlo) - (hi - lo)) < tol:
            return OrbitTrace(tuple(pairs), True)
        x, y, lo, hi = nx, ny, nlo, nhi
    return OrbitTrace(tuple(pairs), False)


class LowerUpper(NamedTuple):
    lo: float
    up: float
    converged: bool
    steps: int


def lower_upper(pair: MeanPair, x: float, y: float,
                policy: ConvergencePolicy = DEFAULT_POLICY) -> LowerUpper:
    """Approximate ``Lo = lim min(x_n, y_n)`` and ``Up = lim max(x_n, y_n)``.

    ``converged=False`` means ``max_steps`` ran out; the values are then the
    last envelope and only approximate.
    """
    trace = iterate(pair, x, y, policy)
    a, b = trace.final
    return LowerUpper(min(a, b), max(a, b), trace.converged, trace.steps)


def interleave(trace: OrbitTrace) -> list[float]:
    """``x_0, y_0, x_1, y_1, ...``"""
    return [v for p in trace.pairs for v in p]


def export_indices(length: int, cap: int = EXPORT_CAP) -> list[int]:
    """Row indices kept when exporting a trace of ``length`` pairs.

    Short traces are kept whole.  Longer ones keep the first ``cap // 2`` rows,
    then logarithmically spaced rows, and always the last one.
    """
    if length <= cap:
        return list(range(length))
    head = cap // 2
    keep = set(range(head))
    span = length - head
    budget = cap - head
    for k in range(budget):
        keep.add(head - 1 + round(span ** (k / max(budget - 1, 1))))
    keep.add(length - 1)
    return sorted(i for i in keep if i < length)


def trace_rows(trace: OrbitTrace, cap: int = EXPORT_CAP) -> list[tuple[int, float, float, float]]:
    """``(n, x_n, y_n, |x_n - y_n|)`` rows, thinned for export past ``cap``."""
    return [(n, *trace.pairs[n], abs(trace.pairs[n][0] - trace.pairs[n][1]))
            for n in export_indices(len(trace.pairs), cap)]
