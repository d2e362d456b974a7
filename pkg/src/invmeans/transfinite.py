"""Staged iteration: limit stages alternating with single successor steps.

A *limit stage* runs the orbit until it stabilizes and records the envelope
``(a, b)``; this stands in for taking ``lim x_beta`` at a limit ordinal.  If
the gap ``b - a`` is still open, one successor step ``(M, N)`` is applied and
the next limit stage starts from there.  The common value reached on the
diagonal is the transfinite invariant mean ``Tr``.

Successor steps after a limit stage are evaluated at the *closure point*
``(a + u, b - u)``.  A truncated orbit approaches its limit from outside the
limit envelope, so ``(a, b)`` overshoots the true limit by the remaining tail
``u`` on each side.  For discontinuous means that overshoot decides the
branch; stepping in by ``u = max(gap_tol, geometric tail estimate)`` lands on
the limit side.  Continuous means see only an O(u) perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import SYMMETRIC, Grid, Mean, MeanPair, meet_join
from .errors import PreconditionError
from .orbit import DEFAULT_POLICY, ConvergencePolicy, OrbitTrace, iterate

DEFAULT_MAX_LIMIT_STAGES = 64


@dataclass(frozen=True)
class StagePolicy:
    inner: ConvergencePolicy = DEFAULT_POLICY
    max_limit_stages: int = DEFAULT_MAX_LIMIT_STAGES

    def __post_init__(self):
        if self.max_limit_stages < 1:
            raise ValueError("max_limit_stages must be >= 1")


DEFAULT_STAGE_POLICY = StagePolicy()


@dataclass(frozen=True)
class StagePair:
    kind: str  # "limit" or "successor"
    a: float
    b: float

    @property
    def gap(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class TransfiniteReport:
    tr_value: float
    stage_pairs: tuple[StagePair, ...]
    limit_stages_used: int
    successor_steps: int
    terminated_diagonal: bool
    inner_steps: tuple[int, ...] = field(default=(), repr=False)

    @property
    def limit_pairs(self) -> list[StagePair]:
        return [s for s in self.stage_pairs if s.kind == "limit"]

    @property
    def approximate(self) -> bool:
        return not self.terminated_diagonal

    def check_invariants(self) -> None:
        """a nondecreasing, b nonincreasing and the gap nonincreasing across the report."""
        sp = self.stage_pairs
        for i in range(1, len(sp)):
            if not (sp[i - 1].a <= sp[i].a and sp[i].b <= sp[i - 1].b
                    and sp[i].gap <= sp[i - 1].gap):
                raise AssertionError(f"stage {i} breaks monotone staging: {sp[i - 1]} -> {sp[i]}")

    def to_dict(self) -> dict:
        return {
            "tr_value": self.tr_value,
            "limit_stages_used": self.limit_stages_used,
            "successor_steps": self.successor_steps,
            "terminated_diagonal": self.terminated_diagonal,
            "stage_pairs": [{"kind": s.kind, "a": s.a, "b": s.b} for s in self.stage_pairs],
        }


def prepare_pair(pair: MeanPair) -> MeanPair:
    """Comparable pairs pass through; symmetric ones are replaced by ``meet_join``."""
    if pair.comparable:
        return pair
    if pair.symmetric:
        return meet_join(pair)
    raise PreconditionError(
        f"pair {pair.name} is neither comparable nor symmetric; Tr is undefined")


def _closure_radius(trace: OrbitTrace, tol: float) -> float:
    gaps = [abs(x - y) for x, y in trace.pairs[-3:]]
    tail = 0.0
    if len(gaps) == 3:
        d1, d2 = gaps[0] - gaps[1], gaps[1] - gaps[2]
        if d1 > 0 and 0 <= d2 < d1:
            r = d2 / d1
            tail = d2 * r / (1 - r)
    return max(tol, tail)


def _run(pair: MeanPair, x: float, y: float, policy: StagePolicy) -> TransfiniteReport:
    tol = policy.inner.gap_tol
    mf, nf = pair.m.func, pair.n.func
    stages: list[StagePair] = []
    inner_steps = []
    used = successors = 0
    if abs(x - y) < tol:
        return TransfiniteReport((x + y) / 2, (), 0, 0, True)
    while True:
        trace = iterate(pair, x, y, policy.inner)
        used += 1
        inner_steps.append(trace.steps)
        p, q = trace.final
        a, b = (p, q) if p <= q else (q, p)
        stages.append(StagePair("limit", a, b))
        if b - a < tol:
            return TransfiniteReport((a + b) / 2, tuple(stages), used, successors,
                                     True, tuple(inner_steps))
        if used >= policy.max_limit_stages:
            return TransfiniteReport((a + b) / 2, tuple(stages), used, successors,
                                     False, tuple(inner_steps))
        u = min(_closure_radius(trace, tol), (b - a) / 2)
        ca, cb = a + u, b - u
        if cb < ca:
            ca = cb = (a + b) / 2
        x, y = mf(ca, cb), nf(ca, cb)
        successors += 1
        a, b = (x, y) if x <= y else (y, x)
        stages.append(StagePair("successor", a, b))
        if b - a < tol:
            return TransfiniteReport((a + b) / 2, tuple(stages), used, successors,
                                     True, tuple(inner_steps))


def transfinite_iterate(pair: MeanPair, x: float, y: float,
                        policy: StagePolicy = DEFAULT_STAGE_POLICY,
                        symmetrize: bool = True) -> TransfiniteReport:
    """Alternate limit stages and successor steps until the pair is diagonal.

    The first limit pair approximates ``(Lo, Up)``.  ``tr_value`` is the
    midpoint of the final pair; when ``max_limit_stages`` runs out first the
    report has ``terminated_diagonal=False`` and the value is approximate.

    A symmetric non-comparable pair is normally replaced by its meet/join
    pair.  ``symmetrize=False`` stages the pair as given instead; since only
    the unordered pair ``{x_n, y_n}`` enters, both routes agree exactly.
    """
    x, y = float(x), float(y)
    pair.domain.require(x, y)
    if not symmetrize:
        prepare_pair(pair)  # same precondition
        return _run(pair, x, y, policy)
    return _run(prepare_pair(pair), x, y, policy)


def transfinite_mean(pair: MeanPair, policy: StagePolicy = DEFAULT_STAGE_POLICY) -> Mean:
    """``Tr`` as a mean."""
    prepared = prepare_pair(pair)

    def tr(x, y):
        return _run(prepared, x, y, policy).tr_value

    return Mean("Tr", tr, pair.domain,
                prepared.m.properties & prepared.n.properties & {SYMMETRIC})


def stage_value(pair: MeanPair, x: float, y: float, stage: int,
                policy: StagePolicy = DEFAULT_STAGE_POLICY,
                component: str = "a") -> tuple[float, bool]:
    """``x_{omega * stage}`` (or ``y_{omega * stage}`` for ``component="b"``).

    The flag is False when some limit stage hit ``max_steps`` unconverged.
    """
    if stage < 1:
        raise ValueError("stage must be >= 1")
    if component not in ("a", "b"):
        raise ValueError("component must be 'a' or 'b'")
    x, y = float(x), float(y)
    pair.domain.require(x, y)
    rep = _run(prepare_pair(pair), x, y, StagePolicy(policy.inner, stage))
    ok = all(n < policy.inner.max_steps for n in rep.inner_steps)
    if rep.terminated_diagonal:
        return rep.tr_value, ok
    last = rep.limit_pairs[-1]
    return (last.a if component == "a" else last.b), ok


def stage_mean(pair: MeanPair, stage: int, policy: StagePolicy = DEFAULT_STAGE_POLICY,
               component: str = "a") -> Mean:
    """The mean ``(x, y) -> x_{omega * stage}`` (``component="a"``) or ``y_{omega * stage}``.

    Stage 1 gives ``Lo`` and ``Up``.  Once the staging reaches the diagonal
    every later stage returns that diagonal value.
    """
    if stage < 1:
        raise ValueError("stage must be >= 1")
    if component not in ("a", "b"):
        raise ValueError("component must be 'a' or 'b'")
    prepared = prepare_pair(pair)
    capped = StagePolicy(policy.inner, stage)

    def value(x, y):
        rep = _run(prepared, x, y, capped)
        if rep.terminated_diagonal:
            return rep.tr_value
        last = rep.limit_pairs[-1]
        return last.a if component == "a" else last.b

    label = "A" if component == "a" else "B"
    return Mean(f"{label}_omega*{stage}", value, pair.domain)


# -- continuity probe ---------------------------------------------------------

@dataclass(frozen=True)
class ContinuityReport:
    h: float
    modulus: float
    jump_detected: bool
    witness: tuple[tuple[float, float], tuple[float, float]] | None
    jump: float
    grid: dict

    @property
    def message(self) -> str:
        if self.jump_detected:
            (p, q) = self.witness
            return (f"jump of {self.jump:.6g} between adjacent points {p} and {q} persists "
                    f"under refinement: no continuous invariant mean exists (heuristic)")
        return f"no discontinuity detected at grid resolution h={self.h:.6g}"

    def to_dict(self) -> dict:
        return {
            "check": "uniqueness",
            "passed": not self.jump_detected,
            "h": self.h,
            "modulus": self.modulus,
            "jump_detected": self.jump_detected,
            "jump": self.jump,
            "witness": [list(p) for p in self.witness] if self.witness else None,
            "message": self.message,
            "grid": self.grid,
        }


def find_jump(func, axis: list[float], candidates: int = 64, depth: int = 48,
              jump_tol: float = 1e-6):
    """Scan adjacent lattice nodes for a jump of ``func`` that survives bisection.

    Returns ``(modulus, witness, jump)``.  The ``candidates`` largest adjacent
    differences are each bisected ``depth`` times (keeping the half with the
    larger difference); a difference above ``jump_tol`` on the final tiny
    segment is reported as a jump.
    """
    n = len(axis)
    vals = [[func(x, y) for y in axis] for x in axis]
    edges = []
    for i in range(n):
        for j in range(n):
            if i + 1 < n:
                edges.append((abs(vals[i + 1][j] - vals[i][j]), (i, j), (i + 1, j)))
            if j + 1 < n:
                edges.append((abs(vals[i][j + 1] - vals[i][j]), (i, j), (i, j + 1)))
    modulus = max(e[0] for e in edges)
    edges.sort(key=lambda e: (-e[0], e[1], e[2]))
    for diff, (i0, j0), (i1, j1) in edges[:candidates]:
        if diff <= jump_tol:
            break
        p = (axis[i0], axis[j0])
        q = (axis[i1], axis[j1])
        fp, fq = vals[i0][j0], vals[i1][j1]
        for _ in range(depth):
            mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            if mid in (p, q):
                break
            fm = func(*mid)
            if abs(fm - fp) >= abs(fq - fm):
                q, fq = mid, fm
            else:
                p, fp = mid, fm
        if abs(fq - fp) > jump_tol:
            return modulus, ((axis[i0], axis[j0]), (axis[i1], axis[j1])), abs(fq - fp)
    return modulus, None, 0.0


def probe_continuous_uniqueness(pair: MeanPair, grid: Grid = Grid(41, 0),
                                policy: StagePolicy = DEFAULT_STAGE_POLICY,
                                jump_tol: float = 1e-6) -> ContinuityReport:
    """Heuristic continuity test of ``Tr`` on the uniform part of ``grid``.

    If some continuous invariant mean exists it equals ``Tr``, so a jump of
    ``Tr`` that persists under refinement indicates there is none.  A clean
    scan only means no jump was seen at this resolution.
    """
    if grid.nodes < 2:
        raise ValueError("continuity probe needs at least 2 nodes per axis")
    tr = transfinite_mean(pair, policy).func
    axis = grid.axis(pair.domain)
    modulus, witness, jump = find_jump(tr, axis, jump_tol=jump_tol)
    h = axis[1] - axis[0]
    return ContinuityReport(h, modulus, witness is not None, witness, jump,
                            Grid(grid.nodes, 0, grid.seed).describe(pair.domain))
