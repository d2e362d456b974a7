"""Shift-by-two invariant sequence functionals and the invariant means they induce.

A functional ``phi`` on bounded sequences is *2-limit-like* when it ignores
the first two entries and sits between ``liminf`` and ``limsup``.  Applied to
the interleaved orbit ``x_0, y_0, x_1, y_1, ...`` it yields an invariant mean.

Besides ``liminf`` and ``limsup`` this module provides the weighted family::

    phi_w(a) = liminf a_n + w(liminf a_{2n}) * (limsup a_n - liminf a_n)

with ``a_{2n}`` taken in 1-based indexing, i.e. the entries at positions
2, 4, 6, ... of the sequence.  For an interleaved orbit these are the
``y_n``.  ``w`` maps [0, 1] to [0, 1]; sequences living in another interval
are fed to ``w`` through the fixed affine map of that interval onto [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .core import SYMMETRIC, Mean, MeanPair
from .errors import ConvergenceError
from .expr import evaluate, parse, to_source
from .orbit import DEFAULT_POLICY, ConvergencePolicy, interleave, iterate

MIN_WINDOW = 16

WeightFunc = Callable[[float], float]


@dataclass(frozen=True)
class LimitLikeSpec:
    kind: str  # "liminf", "limsup" or "phi_w"
    weight: WeightFunc | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("liminf", "limsup", "phi_w"):
            raise ValueError(f"unknown limit-like kind {self.kind!r}")
        if (self.kind == "phi_w") != (self.weight is not None):
            raise ValueError("phi_w needs a weight function, and only phi_w takes one")
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    @classmethod
    def liminf(cls) -> "LimitLikeSpec":
        return cls("liminf")

    @classmethod
    def limsup(cls) -> "LimitLikeSpec":
        return cls("limsup")

    @classmethod
    def phi_w(cls, weight: WeightFunc, label: str = "phi_w") -> "LimitLikeSpec":
        return cls("phi_w", weight, label)

    @classmethod
    def from_text(cls, text: str) -> "LimitLikeSpec":
        """``liminf``, ``limsup``, or a weight expression in the single variable ``x``."""
        text = text.strip()
        if text in ("liminf", "limsup"):
            return cls(text)
        expr = parse(text, variables=("x",))
        return cls.phi_w(lambda t: evaluate(expr, t), f"phi_w[{to_source(expr)}]")


@dataclass(frozen=True)
class TailEstimate:
    liminf_est: float
    limsup_est: float
    window: int
    exact: bool
    period: int | None = None


def default_window(length: int) -> int:
    """Last 25% of the sequence, at least 16 entries, at most all of it."""
    return min(length, max(MIN_WINDOW, length // 4))


def _detect_period(tail: Sequence[float]) -> int | None:
    w = len(tail)
    for p in range(1, w // 2 + 1):
        if all(tail[i] == tail[i - p] for i in range(p, w)):
            return p
    return None


def tail_bounds(seq: Sequence[float], window: int) -> TailEstimate:
    """Estimate liminf/limsup by the min/max of the last ``window`` entries.

    When the window is exactly periodic with period at most ``window // 2``
    the estimates are the true tail infimum and supremum, flagged ``exact``.
    """
    n = len(seq)
    if not 1 <= window <= n:
        raise ValueError(f"window {window} must lie in [1, {n}]")
    tail = list(seq[n - window:])
    period = _detect_period(tail)
    return TailEstimate(min(tail), max(tail), window, period is not None, period)


def _weight(spec: LimitLikeSpec, t: float) -> float:
    v = spec.weight(t)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"weight {spec.label} returned {v!r} at {t!r}; must lie in [0, 1]")
    return v


def _combine(spec: LimitLikeSpec, lo: float, hi: float, even_lo: float | None,
             bounds: tuple[float, float]) -> float:
    if spec.kind == "liminf":
        return lo
    if spec.kind == "limsup":
        return hi
    a, b = bounds
    t = (even_lo - a) / (b - a)
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)  # rounding only, inputs are checked
    v = lo + _weight(spec, t) * (hi - lo)
    return lo if v < lo else (hi if v > hi else v)


def _check_range(values, bounds) -> None:
    a, b = bounds
    bad = [v for v in values if not a <= v <= b]
    if bad:
        raise ValueError(f"value {bad[0]!r} outside [{a}, {b}]; phi_w needs rescalable input")


def apply_phi(spec: LimitLikeSpec, seq: Sequence[float], window: int | None = None,
              bounds: tuple[float, float] = (0.0, 1.0)) -> float:
    """Evaluate ``spec`` on the tail of a finite sequence prefix.

    ``bounds`` is the interval the sequence lives in; it fixes the affine map
    onto [0, 1] used for the weight of ``phi_w``.
    """
    if window is None:
        window = default_window(len(seq))
    est = tail_bounds(seq, window)
    even_lo = None
    if spec.kind == "phi_w":
        n = len(seq)
        tail = seq[n - window:]
        _check_range(tail, bounds)
        evens = [seq[i] for i in range(n - window, n) if i % 2 == 1]
        if not evens:
            raise ValueError("window holds no even-position entries")
        even_lo = min(evens)
    return _combine(spec, est.liminf_est, est.limsup_est, even_lo, bounds)


# -- exact checks on eventually periodic sequences ------------------------------

@dataclass(frozen=True)
class EventuallyPeriodic:
    """``prefix`` followed by ``cycle`` repeated forever."""

    prefix: tuple[float, ...]
    cycle: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(float(v) for v in self.prefix))
        object.__setattr__(self, "cycle", tuple(float(v) for v in self.cycle))
        if not self.cycle:
            raise ValueError("cycle must be nonempty")

    def entry(self, i: int) -> float:
        """0-based entry."""
        k = len(self.prefix)
        return self.prefix[i] if i < k else self.cycle[(i - k) % len(self.cycle)]

    def take(self, length: int) -> list[float]:
        return [self.entry(i) for i in range(length)]

    def shift(self, k: int) -> "EventuallyPeriodic":
        """Drop the first ``k`` entries."""
        if k <= len(self.prefix):
            return EventuallyPeriodic(self.prefix[k:], self.cycle)
        r = (k - len(self.prefix)) % len(self.cycle)
        return EventuallyPeriodic((), self.cycle[r:] + self.cycle[:r])

    @property
    def liminf(self) -> float:
        return min(self.cycle)

    @property
    def limsup(self) -> float:
        return max(self.cycle)

    @property
    def even_liminf(self) -> float:
        """liminf over 1-based even positions, i.e. 0-based odd indices."""
        k, p = len(self.prefix), len(self.cycle)
        start = k + (1 - k % 2)  # first odd index >= k
        return min(self.entry(i) for i in range(start, start + 2 * p, 2))

    def exact_phi(self, spec: LimitLikeSpec, bounds=(0.0, 1.0)) -> float:
        if spec.kind == "phi_w":
            _check_range(self.cycle, bounds)
        return _combine(spec, self.liminf, self.limsup, self.even_liminf, bounds)


def four_periodic(x: float) -> EventuallyPeriodic:
    """The sequence 0, x, 0, 1, 0, x, 0, 1, ..."""
    return EventuallyPeriodic((), (0.0, x, 0.0, 1.0))


def standard_test_sequences() -> list[EventuallyPeriodic]:
    """Twenty eventually periodic sequences in [0, 1], eight of them ``four_periodic``."""
    seqs = [four_periodic(k / 7) for k in range(8)]
    seqs += [
        EventuallyPeriodic((), (0.5,)),
        EventuallyPeriodic((1.0, 0.0, 0.3), (0.25,)),
        EventuallyPeriodic((), (0.2, 0.9)),
        EventuallyPeriodic((0.7,), (0.2, 0.9)),
        EventuallyPeriodic((), (0.1, 0.6, 0.35)),
        EventuallyPeriodic((0.0, 1.0), (0.1, 0.6, 0.35)),
        EventuallyPeriodic((0.4, 0.4, 0.4), (1.0, 0.0, 0.5, 0.75, 0.25)),
        EventuallyPeriodic((), (0.3, 0.3, 0.8, 0.1)),
        EventuallyPeriodic((0.9,), (0.0, 1.0, 1.0, 0.0, 0.5, 0.5)),
        EventuallyPeriodic((0.5, 0.5, 0.5, 0.5, 0.5), (0.125, 0.875)),
        EventuallyPeriodic((), (0.0, 1.0)),
        EventuallyPeriodic((0.25,), (1.0,)),
    ]
    return seqs


@dataclass(frozen=True)
class SequenceCheck:
    sequence: EventuallyPeriodic
    value: float
    shifted_value: float
    liminf: float
    limsup: float

    @property
    def shift_ok(self) -> bool:
        return self.value == self.shifted_value

    @property
    def sandwich_ok(self) -> bool:
        return self.liminf <= self.value <= self.limsup

    def to_dict(self) -> dict:
        return {
            "prefix": list(self.sequence.prefix),
            "cycle": list(self.sequence.cycle),
            "value": self.value,
            "shifted_value": self.shifted_value,
            "liminf": self.liminf,
            "limsup": self.limsup,
            "shift_invariant": self.shift_ok,
            "sandwiched": self.sandwich_ok,
        }


@dataclass(frozen=True)
class LimitLikeReport:
    spec: str
    results: tuple[SequenceCheck, ...]

    @property
    def shift_violations(self) -> list[SequenceCheck]:
        return [r for r in self.results if not r.shift_ok]

    @property
    def sandwich_violations(self) -> list[SequenceCheck]:
        return [r for r in self.results if not r.sandwich_ok]

    @property
    def passed(self) -> bool:
        return not self.shift_violations and not self.sandwich_violations

    def to_dict(self) -> dict:
        return {
            "check": "limitlike",
            "spec": self.spec,
            "passed": self.passed,
            "shift_violations": [r.to_dict() for r in self.shift_violations],
            "sandwich_violations": [r.to_dict() for r in self.sandwich_violations],
            "sequences": len(self.results),
        }


def _materialized_phi(spec: LimitLikeSpec, seq: EventuallyPeriodic) -> float:
    p = len(seq.cycle)
    window = 2 * p * math.ceil(MIN_WINDOW / (2 * p))
    return apply_phi(spec, seq.take(len(seq.prefix) + window + 4), window)


def check_two_limit_like(spec: LimitLikeSpec,
                         sequences: Sequence[EventuallyPeriodic] | None = None) -> LimitLikeReport:
    """Verify shift-by-two invariance and the liminf/limsup sandwich exactly.

    Each sequence is materialized far enough that the evaluation window lies
    in its periodic part, and ``phi(a)`` is compared with ``phi(a_3, a_4, ...)``
    using exact float equality.
    """
    if sequences is None:
        sequences = standard_test_sequences()
    results = []
    for seq in sequences:
        if not isinstance(seq, EventuallyPeriodic):
            raise TypeError("exact checks need EventuallyPeriodic sequences")
        results.append(SequenceCheck(
            seq, _materialized_phi(spec, seq), _materialized_phi(spec, seq.shift(2)),
            seq.liminf, seq.limsup))
    return LimitLikeReport(spec.label, tuple(results))


def first_distinguishing_point(spec1: LimitLikeSpec, spec2: LimitLikeSpec,
                               probes: Sequence[float]) -> float | None:
    """First ``x`` whose four-periodic sequence gets different values, if any."""
    for x in probes:
        s = four_periodic(x)
        if _materialized_phi(spec1, s) != _materialized_phi(spec2, s):
            return x
    return None


# -- invariant means ----------------------------------------------------------

def _limit_tail(pairs: Sequence[tuple[float, float]], count: int) -> list[float]:
    # continue a stabilized orbit by its limit pattern: the last pair repeated,
    # or the last two alternating when the orbit flips order every step
    last = pairs[-1]
    if len(pairs) >= 2:
        prev = pairs[-2]
        same = abs(last[0] - prev[0]) + abs(last[1] - prev[1])
        swapped = abs(last[0] - prev[1]) + abs(last[1] - prev[0])
        if swapped < same:
            cycle = [prev, last]
            return [v for k in range(count) for v in cycle[k % 2]]
    return [v for _ in range(count) for v in last]


def bo_value(pair: MeanPair, spec: LimitLikeSpec, x: float, y: float,
             policy: ConvergencePolicy = DEFAULT_POLICY,
             window: int | None = None) -> tuple[float, bool]:
    """``phi`` of the interleaved orbit of ``(x, y)``, plus the convergence flag.

    The orbit is iterated until it stabilizes and then continued by its limit
    pattern, so the tail window ``phi`` looks at is exactly periodic.
    """
    trace = iterate(pair, x, y, policy)
    seq = interleave(trace)
    w = window or default_window(max(len(seq), MIN_WINDOW))
    seq += _limit_tail(trace.pairs, w // 2 + 1)
    return apply_phi(spec, seq, w, (pair.domain.lo, pair.domain.hi)), trace.converged


def bo_mean(pair: MeanPair, spec: LimitLikeSpec,
            policy: ConvergencePolicy = DEFAULT_POLICY, window: int | None = None) -> Mean:
    """The invariant mean ``(x, y) -> phi(x_0, y_0, x_1, y_1, ...)``.

    Evaluation raises :class:`ConvergenceError` when the orbit does not
    stabilize within ``policy.max_steps``.
    """
    def bo(x: float, y: float) -> float:
        value, converged = bo_value(pair, spec, x, y, policy, window)
        if not converged:
            raise ConvergenceError(
                f"orbit of ({x!r}, {y!r}) did not stabilize in {policy.max_steps} steps")
        return value

    props = {SYMMETRIC} if pair.symmetric else set()
    return Mean(f"Bo[{spec.label}]", bo, pair.domain, props)
