"""Grid-based verification of invariance, extremality, symmetry and the
functional equation Phi(x, y) = Phi(M(x, y), N(x, y)).

Every verdict here is a statement about the sampled points only; reports
carry the grid description so that is never lost.  Witnesses are chosen
deterministically: among points attaining the worst value, the
lexicographically smallest.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import DEFAULT_GRID, Grid, Mean, MeanPair
from .errors import PreconditionError
from .expr import Node
from .orbit import DEFAULT_POLICY, ConvergencePolicy, lower_upper
from .transfinite import DEFAULT_STAGE_POLICY, StagePolicy, transfinite_mean

DEFAULT_TOL = 1e-9

Point = tuple[float, float]


def _worst(items) -> tuple[float, Point | None]:
    """Max value over ``(value, point)`` items, ties broken by the smallest point."""
    best, where = 0.0, None
    for v, p in items:
        if v > best or (v == best and where is not None and p < where):
            best, where = v, p
    return best, where


@dataclass(frozen=True)
class InvarianceReport:
    name: str
    max_residual: float
    witness: Point | None
    grid_size: int
    grid: dict
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self) -> dict:
        return {
            "check": "invariance",
            "mean": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "witness": list(self.witness) if self.witness else None,
            "tol": self.tol,
            "grid_size": self.grid_size,
            "grid": self.grid,
        }


def _residuals(k: Mean, pair: MeanPair, points: Sequence[Point]):
    kf, mf, nf = k.func, pair.m.func, pair.n.func
    values, res = [], []
    for p in points:
        v = kf(*p)
        values.append(v)
        res.append((abs(v - kf(mf(*p), nf(*p))), p))
    return values, res


def invariance_residual(k: Mean, pair: MeanPair, grid: Grid = DEFAULT_GRID,
                        tol: float = DEFAULT_TOL) -> InvarianceReport:
    """``max |K(x, y) - K(M(x, y), N(x, y))|`` over the grid.

    A zero residual certifies invariance on the grid only.
    """
    if k.domain != pair.domain:
        raise PreconditionError("mean and pair live on different intervals")
    points = grid.points(pair.domain)
    if not points:
        raise ValueError("empty grid")
    _, res = _residuals(k, pair, points)
    worst, where = _worst(res)
    return InvarianceReport(k.name, worst, where, len(points), grid.describe(pair.domain), tol)


@dataclass(frozen=True)
class SymmetryReport:
    name: str
    invariance: InvarianceReport
    checked: bool
    max_asymmetry: float
    witness: Point | None

    @property
    def consistent(self) -> bool:
        """False only if an invariant mean of a symmetric pair came out
        asymmetric, which cannot happen for a correct implementation."""
        return not self.checked or self.max_asymmetry < self.invariance.tol

    def to_dict(self) -> dict:
        return {
            "check": "symmetry",
            "mean": self.name,
            "invariant": self.invariance.passed,
            "max_residual": self.invariance.max_residual,
            "symmetry_checked": self.checked,
            "max_asymmetry": self.max_asymmetry,
            "witness": list(self.witness) if self.witness else None,
            "consistent": self.consistent,
        }


def check_symmetry_of_invariant(k: Mean, pair: MeanPair, grid: Grid = DEFAULT_GRID,
                                tol: float = DEFAULT_TOL) -> SymmetryReport:
    """For a symmetric pair, confirm that a (grid-)invariant ``k`` is symmetric.

    When ``k`` is not invariant on the grid the symmetry check is skipped.
    """
    if not pair.symmetric:
        raise PreconditionError(f"pair {pair.name} is not flagged symmetric")
    inv = invariance_residual(k, pair, grid, tol)
    if not inv.passed:
        return SymmetryReport(k.name, inv, False, 0.0, None)
    kf = k.func
    worst, where = _worst((abs(kf(x, y) - kf(y, x)), (x, y))
                          for x, y in grid.points(pair.domain))
    return SymmetryReport(k.name, inv, True, worst, where)


# -- Phi = f o Tr ---------------------------------------------------------------

@dataclass(frozen=True)
class PhiDecompositionReport:
    invariance_residual: float
    invariance_witness: Point | None
    decomposition_residual: float
    decomposition_witness: Point | None
    inversion_status: str
    inversion_error: float | None
    grid: dict
    tol: float = DEFAULT_TOL

    @property
    def invariant(self) -> bool:
        return self.invariance_residual < self.tol

    @property
    def decomposes(self) -> bool:
        # Tr is itself truncated, hence the extra factor
        return self.decomposition_residual < 10 * self.tol

    @property
    def inversion_ok(self) -> bool | None:
        if self.inversion_error is None:
            return None
        return self.inversion_error < 10 * self.tol

    @property
    def passed(self) -> bool:
        return self.invariant and self.decomposes and self.inversion_ok is not False

    def to_dict(self) -> dict:
        return {
            "check": "phi",
            "passed": self.passed,
            "invariance_residual": self.invariance_residual,
            "invariance_witness": list(self.invariance_witness) if self.invariance_witness else None,
            "invariant": self.invariant,
            "decomposition_residual": self.decomposition_residual,
            "decomposition_witness":
                list(self.decomposition_witness) if self.decomposition_witness else None,
            "decomposes": self.decomposes,
            "inversion_status": self.inversion_status,
            "inversion_error": self.inversion_error,
            "tol": self.tol,
            "grid": self.grid,
        }


def _monotone_inverse(f: Callable[[float], float], ts: list[float], fs: list[float]):
    increasing = fs[0] < fs[-1]
    keys = fs if increasing else [-v for v in fs]

    def inv(v: float) -> float:
        key = v if increasing else -v
        i = bisect.bisect_left(keys, key)
        if i == 0:
            return ts[0]
        if i == len(ts):
            return ts[-1]
        lo, hi = ts[i - 1], ts[i]
        for _ in range(200):
            mid = (lo + hi) / 2
            if mid in (lo, hi):
                break
            fm = f(mid)
            if (fm < v) == increasing and fm != v:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    return inv


def check_phi_decomposition(phi: Node | Callable[[float, float], float], pair: MeanPair,
                            grid: Grid = DEFAULT_GRID,
                            policy: StagePolicy = DEFAULT_STAGE_POLICY,
                            tol: float = DEFAULT_TOL, invert: bool = True
                            ) -> PhiDecompositionReport:
    """Test ``Phi = Phi o (M, N)`` and the factorization ``Phi = f o Tr`` on the grid.

    Steps: (a) the invariance residual of ``Phi``; (b) ``f(t) = Phi(t, t)``;
    (c) ``max |Phi - f(Tr)|``; (d) when ``f`` is strictly monotone on the
    diagonal samples, recover ``Tr`` as ``f^-1(Phi)`` by bisection and compare
    with the staged iteration.  Non-injective or non-monotone ``f`` declines
    step (d).
    """
    func = phi.eval if isinstance(phi, Node) else phi
    points = grid.points(pair.domain)
    if not points:
        raise ValueError("empty grid")
    mf, nf = pair.m.func, pair.n.func
    vals = [func(*p) for p in points]
    worst_a, where_a = _worst((abs(v - func(mf(*p), nf(*p))), p) for v, p in zip(vals, points))

    def f(t):
        return func(t, t)

    tr = transfinite_mean(pair, policy).func
    trs = [tr(*p) for p in points]
    worst_c, where_c = _worst((abs(v - f(t)), p) for v, t, p in zip(vals, trs, points))

    status, inv_err = "not requested", None
    if invert:
        ts = grid.axis(pair.domain) or Grid(101, 0).axis(pair.domain)
        fs = [f(t) for t in ts]
        if len(set(fs)) < len(fs):
            status = "declined: f is not injective on the diagonal samples"
        elif not (all(a < b for a, b in zip(fs, fs[1:]))
                  or all(a > b for a, b in zip(fs, fs[1:]))):
            status = "declined: f is injective but not monotone on the diagonal samples"
        else:
            inverse = _monotone_inverse(f, ts, fs)
            inv_err = max(abs(inverse(v) - t) for v, t in zip(vals, trs))
            status = "ok"
    return PhiDecompositionReport(worst_a, where_a, worst_c, where_c, status, inv_err,
                                  grid.describe(pair.domain), tol)


# -- extremality ------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateOrdering:
    name: str
    residual: float
    excluded: bool
    below_lo: Point | None = None
    above_up: Point | None = None
    dist_lo: float = float("inf")
    dist_up: float = float("inf")
    tol: float = DEFAULT_TOL

    @property
    def within(self) -> bool:
        return self.excluded or (self.below_lo is None and self.above_up is None)

    @property
    def attains_lo(self) -> bool:
        return not self.excluded and self.dist_lo < self.tol

    @property
    def attains_up(self) -> bool:
        return not self.excluded and self.dist_up < self.tol

    def to_dict(self) -> dict:
        return {
            "mean": self.name,
            "residual": self.residual,
            "excluded": self.excluded,
            "within_lo_up": self.within,
            "below_lo_witness": list(self.below_lo) if self.below_lo else None,
            "above_up_witness": list(self.above_up) if self.above_up else None,
            "max_dist_to_lo": None if self.excluded else self.dist_lo,
            "max_dist_to_up": None if self.excluded else self.dist_up,
            "attains_lo": self.attains_lo,
            "attains_up": self.attains_up,
        }


@dataclass(frozen=True)
class OrderingReport:
    candidates: tuple[CandidateOrdering, ...]
    unconverged_points: int
    grid: dict

    @property
    def passed(self) -> bool:
        return all(c.within for c in self.candidates)

    def __getitem__(self, name: str) -> CandidateOrdering:
        for c in self.candidates:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "check": "ordering",
            "passed": self.passed,
            "unconverged_points": self.unconverged_points,
            "candidates": [c.to_dict() for c in self.candidates],
            "grid": self.grid,
        }


def ordering_check(pair: MeanPair, candidates: Sequence[Mean], grid: Grid = DEFAULT_GRID,
                   policy: ConvergencePolicy = DEFAULT_POLICY,
                   tol: float = DEFAULT_TOL) -> OrderingReport:
    """Check ``Lo - tol <= K <= Up + tol`` for each grid-invariant candidate ``K``.

    Candidates whose invariance residual is not below ``tol`` are excluded
    (and reported as such).  ``attains_lo`` / ``attains_up`` record whether a
    candidate coincides with ``Lo`` / ``Up`` on the whole grid.
    """
    points = grid.points(pair.domain)
    bounds = [lower_upper(pair, x, y, policy) for x, y in points]
    unconverged = sum(not b.converged for b in bounds)
    out = []
    for k in candidates:
        values, res = _residuals(k, pair, points)
        residual, _ = _worst(res)
        if not residual < tol:
            out.append(CandidateOrdering(k.name, residual, True, tol=tol))
            continue
        below = [p for v, b, p in zip(values, bounds, points) if v < b.lo - tol]
        above = [p for v, b, p in zip(values, bounds, points) if v > b.up + tol]
        out.append(CandidateOrdering(
            k.name, residual, False,
            min(below) if below else None, min(above) if above else None,
            max(abs(v - b.lo) for v, b in zip(values, bounds)),
            max(abs(v - b.up) for v, b in zip(values, bounds)), tol))
    return OrderingReport(tuple(out), unconverged, grid.describe(pair.domain))
