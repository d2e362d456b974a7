"""Two-variable means on a closed interval, built-in families and combinators.

A :class:`Mean` wraps a plain ``(x, y) -> float`` callable together with its
host :class:`Interval` and a set of declared property tags.  Calling the mean
checks that both arguments lie in the host interval; the raw callable
(``Mean.func``) skips that check and is what the iteration engines use once
containment of the orbit is guaranteed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, MeanBoundsError, PreconditionError

SYMMETRIC = "symmetric"
STRICT = "strict"
COMPARABLE_LE = "comparable_le"
CONTRACTIVE = "contractive_pair_member"
PROPERTY_TAGS = frozenset({SYMMETRIC, STRICT, COMPARABLE_LE, CONTRACTIVE})

MeanFunc = Callable[[float, float], float]


@dataclass(frozen=True)
class Interval:
    """Closed bounded interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise DomainError(f"degenerate interval [{lo}, {hi}]: need lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __contains__(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def require(self, *values: float) -> None:
        for v in values:
            if not self.lo <= v <= self.hi:
                raise DomainError(f"{v!r} lies outside [{self.lo}, {self.hi}]")

    def __str__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


@dataclass(frozen=True, eq=False)
class Mean:
    """A two-variable mean on ``domain``.

    ``properties`` holds declared (or grid-verified) tags drawn from
    :data:`PROPERTY_TAGS`.  Instances are immutable and compare by identity.
    """

    name: str
    func: MeanFunc = field(repr=False)
    domain: Interval
    properties: frozenset[str] = frozenset()

    def __post_init__(self):
        props = frozenset(self.properties)
        unknown = props - PROPERTY_TAGS
        if unknown:
            raise ValueError(f"unknown property tags: {sorted(unknown)}")
        object.__setattr__(self, "properties", props)

    def __call__(self, x: float, y: float) -> float:
        self.domain.require(x, y)
        return self.func(x, y)

    @property
    def symmetric(self) -> bool:
        return SYMMETRIC in self.properties

    @property
    def strict(self) -> bool:
        return STRICT in self.properties


@dataclass(frozen=True, eq=False)
class MeanPair:
    """The mean-type mapping ``(x, y) -> (m(x, y), n(x, y))``.

    ``comparable`` flags ``m <= n`` everywhere.  The flag is spot-checked on a
    coarse grid at construction; use :meth:`detect` to derive it from a grid
    instead of declaring it.
    """

    m: Mean
    n: Mean
    comparable: bool = False

    def __post_init__(self):
        if self.m.domain != self.n.domain:
            raise DomainError(
                f"means live on different intervals: {self.m.domain} vs {self.n.domain}")
        if self.comparable:
            w = _first_violation(self.m.func, self.n.func, Grid(21, 0).points(self.domain))
            if w is not None:
                raise PreconditionError(
                    f"pair flagged comparable but {self.m.name} > {self.n.name} at {w}")

    @classmethod
    def detect(cls, m: Mean, n: Mean, grid: "Grid | None" = None) -> "MeanPair":
        """Build a pair, flagging comparability iff ``m <= n`` holds on ``grid``."""
        grid = grid or Grid()
        ok = _first_violation(m.func, n.func, grid.points(m.domain)) is None
        return cls(m, n, comparable=ok)

    @property
    def domain(self) -> Interval:
        return self.m.domain

    @property
    def symmetric(self) -> bool:
        return self.m.symmetric and self.n.symmetric

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        self.domain.require(x, y)
        return self.m.func(x, y), self.n.func(x, y)

    @property
    def name(self) -> str:
        return f"({self.m.name}, {self.n.name})"


def _first_violation(lower: MeanFunc, upper: MeanFunc, points) -> tuple[float, float] | None:
    bad = [p for p in points if lower(*p) > upper(*p)]
    return min(bad) if bad else None


@dataclass(frozen=True)
class Grid:
    """Sample specification: ``nodes`` x ``nodes`` uniform lattice plus random pairs.

    Random pairs are drawn with a fixed ``seed`` so every sweep is reproducible.
    """

    nodes: int = 101
    random_points: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.nodes < 0 or self.random_points < 0:
            raise ValueError("grid sizes must be nonnegative")
        if self.nodes == 1:
            raise ValueError("a uniform axis needs at least 2 nodes")

    def axis(self, domain: Interval) -> list[float]:
        if self.nodes == 0:
            return []
        return [float(v) for v in np.linspace(domain.lo, domain.hi, self.nodes)]

    def points(self, domain: Interval) -> list[tuple[float, float]]:
        ax = self.axis(domain)
        pts = [(x, y) for x in ax for y in ax]
        if self.random_points:
            rng = np.random.default_rng(self.seed)
            raw = rng.uniform(domain.lo, domain.hi, size=(self.random_points, 2))
            pts.extend((float(a), float(b)) for a, b in raw)
        return pts

    def describe(self, domain: Interval) -> dict:
        return {
            "domain": [domain.lo, domain.hi],
            "nodes_per_axis": self.nodes,
            "random_points": self.random_points,
            "seed": self.seed,
            "size": self.nodes * self.nodes + self.random_points,
        }


DEFAULT_GRID = Grid()


# -- built-in means ---------------------------------------------------------

def _clamped(f: MeanFunc) -> MeanFunc:
    # rounding can push power-type means one ulp outside [min, max]
    def g(x: float, y: float) -> float:
        v = f(x, y)
        if x <= y:
            return x if v < x else (y if v > y else v)
        return y if v < y else (x if v > x else v)
    return g


def _power_func(p: float) -> MeanFunc:
    inv = 1.0 / p
    return lambda x, y: ((x ** p + y ** p) / 2.0) ** inv


def make_builtin(kind: str, domain: Interval, p: float | None = None) -> Mean:
    """Return one of the classical means on ``domain``.

    ``kind`` is one of ``arithmetic``, ``geometric``, ``harmonic``,
    ``power`` (requires ``p``), ``min`` or ``max``.  Harmonic and power means
    with ``p < 0`` need a strictly positive domain; geometric and power means
    with ``p > 0`` need a nonnegative one.  A geometric mean touching 0 is not
    strict (``G(0, y) = 0``) and is not tagged as such.
    """
    strict_sym = frozenset({SYMMETRIC, STRICT})
    if kind == "power":
        if p is None or not math.isfinite(p):
            raise ValueError("power mean needs a finite exponent p")
        if p == 0:
            return make_builtin("geometric", domain)
        if p == 1:
            return make_builtin("arithmetic", domain)
        if p < 0 and domain.lo <= 0:
            raise DomainError(f"power mean with p={p} needs a positive domain, got {domain}")
        if p > 0 and domain.lo < 0:
            raise DomainError(f"power mean with p={p} needs a nonnegative domain, got {domain}")
        return Mean(f"power({p:g})", _clamped(_power_func(p)), domain, strict_sym)
    if kind == "arithmetic":
        return Mean("arithmetic", lambda x, y: (x + y) / 2.0, domain, strict_sym)
    if kind == "geometric":
        if domain.lo < 0:
            raise DomainError(f"geometric mean needs a nonnegative domain, got {domain}")
        props = strict_sym if domain.lo > 0 else {SYMMETRIC}
        return Mean("geometric", _clamped(lambda x, y: math.sqrt(x * y)), domain, props)
    if kind == "harmonic":
        if domain.lo <= 0:
            raise DomainError(f"harmonic mean needs a positive domain, got {domain}")
        return Mean("harmonic", _clamped(lambda x, y: 2.0 * x * y / (x + y)), domain, strict_sym)
    if kind == "min":
        return Mean("min", lambda x, y: x if x <= y else y, domain, {SYMMETRIC})
    if kind == "max":
        return Mean("max", lambda x, y: y if x <= y else x, domain, {SYMMETRIC})
    raise ValueError(f"unknown built-in mean {kind!r}")


def _example_step(x: float, y: float) -> tuple[float, float]:
    lo, hi = (x, y) if x <= y else (y, x)
    gap = hi - lo
    if gap <= 1.0:
        mid = (x + y) / 2.0
        return mid, mid
    s = math.sqrt(gap)
    m, n = (lo + hi - s) / 2.0, (lo + hi + s) / 2.0
    # Prefer strictly interior values: near gap 1 the nearest double of an
    # interior value can be the endpoint itself.
    if m <= lo:
        m = math.nextafter(lo, math.inf)
    if n >= hi:
        n = math.nextafter(hi, -math.inf)
    # A gap above 1 must map to a gap above 1, or the image jumps to the
    # midpoint branch.  When no interior pair achieves that, widen toward
    # the endpoints; (lo, hi) itself always qualifies.
    while not n - m > 1.0:
        m = max(lo, math.nextafter(m, -math.inf))
        n = min(hi, math.nextafter(n, math.inf))
    return m, n


def _example_lower(x: float, y: float) -> float:
    return _example_step(x, y)[0]


def _example_upper(x: float, y: float) -> float:
    return _example_step(x, y)[1]


def make_example_pair(domain: Interval | None = None) -> MeanPair:
    """The discontinuous symmetric pair: midpoint for gaps up to 1, and
    midpoint minus (resp. plus) half the square root of the gap beyond it.

    The domain must be longer than 1, otherwise the second branch never fires.
    """
    domain = domain or Interval(0.0, 10.0)
    if not domain.length > 1:
        raise DomainError(f"example pair needs an interval longer than 1, got {domain}")
    tags = {SYMMETRIC, STRICT, CONTRACTIVE}
    m = Mean("M", _example_lower, domain, tags)
    n = Mean("N", _example_upper, domain, tags)
    return MeanPair(m, n, comparable=True)


def make_kc(c: float, domain: Interval) -> Mean:
    """``K_c``: midpoint for gaps up to 1, midpoint shifted by ``c/2`` beyond.

    Only ``c`` in [-1, 1] yields a mean; larger shifts escape [min, max] for
    gaps slightly above 1.
    """
    c = float(c)
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"K_c needs c in [-1, 1], got {c}")

    def k(x: float, y: float) -> float:
        if abs(x - y) <= 1.0:
            return (x + y) / 2.0
        return (x + y + c) / 2.0

    return Mean(f"K_{c:g}", k, domain, {SYMMETRIC, STRICT})


# -- combinators ------------------------------------------------------------

def meet_join(pair: MeanPair) -> MeanPair:
    """Pointwise ``(min(M, N), max(M, N))``; comparable by construction."""
    mf, nf = pair.m.func, pair.n.func

    def meet(x, y):
        a, b = mf(x, y), nf(x, y)
        return a if a <= b else b

    def join(x, y):
        a, b = mf(x, y), nf(x, y)
        return b if a <= b else a

    common = pair.m.properties & pair.n.properties & {SYMMETRIC, STRICT}
    m = Mean(f"{pair.m.name}∧{pair.n.name}", meet, pair.domain, common | {COMPARABLE_LE})
    n = Mean(f"{pair.m.name}∨{pair.n.name}", join, pair.domain, common | {COMPARABLE_LE})
    return MeanPair(m, n, comparable=True)


def convex_combine(k1: Mean, k2: Mean, t: float) -> Mean:
    """``(1 - t) k1 + t k2``, written as ``k1 + t (k2 - k1)`` so equal inputs stay exact."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"convex weight must lie in [0, 1], got {t}")
    if k1.domain != k2.domain:
        raise DomainError("convex combination needs a shared domain")
    f1, f2 = k1.func, k2.func
    t = float(t)

    def k(x, y):
        a = f1(x, y)
        return a + t * (f2(x, y) - a)

    props = k1.properties & k2.properties & {SYMMETRIC, STRICT}
    return Mean(f"{1 - t:g}*{k1.name}+{t:g}*{k2.name}", _clamped(k), k1.domain, props)


# -- grid property checks ---------------------------------------------------

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    holds: bool
    witness: tuple[float, float] | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "property": self.name,
            "holds": self.holds,
            "witness": list(self.witness) if self.witness else None,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class PropertyReport:
    checks: tuple[PropertyCheck, ...]
    grid: dict

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "check": "properties",
            "passed": self.all_hold,
            "grid": self.grid,
            "results": [c.to_dict() for c in self.checks],
        }


def _scan(points, predicate) -> tuple[float, float] | None:
    bad = [p for p in points if not predicate(*p)]
    return min(bad) if bad else None


def _per_mean(name, means, points, predicate, describe) -> PropertyCheck:
    for mean in means:
        w = _scan(points, lambda x, y, f=mean.func: predicate(f, x, y))
        if w is not None:
            return PropertyCheck(name, False, w, f"{mean.name}: {describe(mean.func, *w)}")
    return PropertyCheck(name, True, None, "holds on grid")


def check_properties(pair: MeanPair, grid: Grid = DEFAULT_GRID) -> PropertyReport:
    """Sample mean bounds, symmetry, strictness, ``m <= n`` and the weak contraction
    ``|m - n| < |x - y|`` (off the diagonal, strict, no slack) on ``grid``."""
    points = grid.points(pair.domain)
    if not points:
        raise ValueError("empty grid")
    off = [p for p in points if p[0] != p[1]]
    if not off:
        raise ValueError("grid has no off-diagonal points")
    means = (pair.m, pair.n)
    mf, nf = pair.m.func, pair.n.func

    checks = (
        _per_mean("mean_bounds", means, points,
                  lambda f, x, y: min(x, y) <= f(x, y) <= max(x, y),
                  lambda f, x, y: f"value {f(x, y)!r} outside [min, max]"),
        _per_mean("symmetric", means, points,
                  lambda f, x, y: f(x, y) == f(y, x),
                  lambda f, x, y: f"{f(x, y)!r} != {f(y, x)!r}"),
        _per_mean("strict", means, off,
                  lambda f, x, y: min(x, y) < f(x, y) < max(x, y),
                  lambda f, x, y: f"value {f(x, y)!r} touches the boundary"),
    )
    w = _scan(points, lambda x, y: mf(x, y) <= nf(x, y))
    comparable = PropertyCheck(
        "comparable_le", w is None, w,
        "holds on grid" if w is None else f"{pair.m.name} > {pair.n.name}")
    w = _scan(off, lambda x, y: abs(mf(x, y) - nf(x, y)) < abs(x - y))
    weak = PropertyCheck(
        "weakIn", w is None, w,
        "holds on grid" if w is None else "|M - N| >= |x - y|")
    return PropertyReport(checks + (comparable, weak), grid.describe(pair.domain))


def check_mean_bounds(func: MeanFunc, domain: Interval, grid: Grid, name: str = "K") -> None:
    """Raise :class:`MeanBoundsError` at the smallest sampled violating point."""
    w = _scan(grid.points(domain), lambda x, y: min(x, y) <= func(x, y) <= max(x, y))
    if w is not None:
        raise MeanBoundsError(
            f"{name}{w} = {func(*w)!r} lies outside [min, max]", witness=w)

