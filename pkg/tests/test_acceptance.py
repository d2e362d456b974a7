"""Acceptance gate: one test per criterion, each reported as a PASS/FAIL line."""

import random
import string
import time
from decimal import Decimal
from itertools import combinations

import numpy as np
import pytest

from invmeans import (Grid, Interval, LimitLikeSpec, MeanPair, MeanSyntaxError, bo_mean,
                      check_two_limit_like, four_periodic, invariance_residual, iterate,
                      lower_upper, make_builtin, make_kc, meet_join, ordering_check, parse,
                      parse_mean, transfinite_iterate, transfinite_mean)
from invmeans.errors import MeanEvalError
from invmeans.limitlike import first_distinguishing_point
from oracles import AGM_1_2, k_closed_form

C_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _uniform_starts(n, seed, lo=0.0, hi=10.0):
    rng = np.random.default_rng(seed)
    return [(float(a), float(b)) for a, b in rng.uniform(lo, hi, size=(n, 2))]


@pytest.mark.criterion(1, "Lo/Up/Tr equal K_-1/K_1/K_0 on a 101x101 grid within 1e-9, < 10 s")
def test_closed_forms_on_grid(example, record_property):
    axis = Grid(101, 0).axis(example.domain)
    points = [(x, y) for x in axis for y in axis]
    # explicit straddles of the gap-1 discontinuity on top of the lattice ones
    points += [(x, x + 1 + d) for x in (0.5, 3.25, 7.0) for d in (-1e-7, 0.0, 1e-7)]
    start = time.perf_counter()
    worst = {"lo": 0.0, "up": 0.0, "tr": 0.0}
    for x, y in points:
        lu = lower_upper(example, x, y)
        tr = transfinite_iterate(example, x, y).tr_value
        worst["lo"] = max(worst["lo"], abs(lu.lo - k_closed_form(-1, x, y)))
        worst["up"] = max(worst["up"], abs(lu.up - k_closed_form(1, x, y)))
        worst["tr"] = max(worst["tr"], abs(tr - k_closed_form(0, x, y)))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max errors lo={worst['lo']:.1e} up={worst['up']:.1e} "
                              f"tr={worst['tr']:.1e}, {elapsed:.2f} s")
    assert max(worst.values()) <= 1e-9
    assert elapsed < 10.0


@pytest.mark.criterion(2, "x_n + y_n conserved within 1e-12 on 10^3 random orbits")
def test_conservation(example, record_property):
    worst = 0.0
    for x, y in _uniform_starts(1000, seed=2):
        s = x + y
        for a, b in iterate(example, x, y).pairs:
            worst = max(worst, abs(a + b - s))
    record_property("detail", f"max drift {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(3, "final gap -> 1 (1e-9) above gap 1, -> 0 (1e-12) otherwise")
def test_gap_limit(example, record_property):
    starts = _uniform_starts(1000, seed=3)
    starts += _uniform_starts(200, seed=4, hi=1.0)  # plenty of small-gap starts
    worst_one = worst_zero = 0.0
    for x, y in starts:
        gap = iterate(example, x, y).final_gap
        if abs(x - y) > 1:
            worst_one = max(worst_one, abs(gap - 1))
        else:
            worst_zero = max(worst_zero, gap)
    record_property("detail", f"|gap-1| <= {worst_one:.1e}, gap <= {worst_zero:.1e}")
    assert worst_one <= 1e-9
    assert worst_zero <= 1e-12


@pytest.mark.criterion(4, "gap > 1: one limit stage plus one successor step reach the diagonal")
def test_one_limit_stage_then_successor(example, record_property):
    starts = [(x, y) for x, y in _uniform_starts(1000, seed=5) if abs(x - y) > 1]
    axis = Grid(101, 0).axis(example.domain)
    starts += [(x, y) for x in axis[::5] for y in axis if abs(x - y) > 1]
    bad = []
    for x, y in starts:
        rep = transfinite_iterate(example, x, y)
        if not (rep.limit_stages_used == 1 and rep.successor_steps == 1
                and rep.terminated_diagonal):
            bad.append((x, y, rep.limit_stages_used, rep.successor_steps))
    record_property("detail", f"{len(starts)} starts, {len(bad)} deviations")
    assert not bad, bad[:5]


@pytest.mark.criterion(5, "Bo(liminf), Bo(limsup), Tr, K_c residual < 1e-9; geometric > 1e-2")
def test_invariance_residuals(example, record_property):
    dom = example.domain
    cands = [bo_mean(example, LimitLikeSpec.liminf()), bo_mean(example, LimitLikeSpec.limsup()),
             transfinite_mean(example)] + [make_kc(c, dom) for c in C_VALUES]
    reports = [invariance_residual(k, example) for k in cands]
    geo = invariance_residual(make_builtin("geometric", dom), example)
    record_property("detail", f"max invariant residual {max(r.max_residual for r in reports):.1e}, "
                              f"geometric {geo.max_residual:.3g} at {geo.witness}")
    for r in reports:
        assert r.max_residual < 1e-9, r.to_dict()
    assert geo.max_residual > 1e-2
    assert geo.witness is not None
    x, y = geo.witness
    g = make_builtin("geometric", dom)
    assert abs(g(x, y) - g(*example(x, y))) == geo.max_residual


@pytest.mark.criterion(6, "Lo <= K <= Up (1e-9) for every invariant candidate; K_-1, K_1 attain")
def test_extremality_ordering(example, record_property):
    dom = example.domain
    cands = [bo_mean(example, LimitLikeSpec.liminf()), bo_mean(example, LimitLikeSpec.limsup()),
             transfinite_mean(example)] + [make_kc(c, dom) for c in C_VALUES]
    rep = ordering_check(example, cands, tol=1e-9)
    record_property("detail", f"{len(rep.candidates)} candidates, "
                              f"{sum(c.excluded for c in rep.candidates)} excluded")
    assert rep.unconverged_points == 0
    assert not any(c.excluded for c in rep.candidates)
    assert rep.passed, rep.to_dict()
    assert rep["K_-1"].attains_lo and rep["K_1"].attains_up
    assert not rep["K_0"].attains_lo and not rep["K_0"].attains_up


@pytest.mark.criterion(7, "AGM(1, 2): Lo = Up = Tr within 1e-12 and equal to the oracle")
def test_agm_regression(record_property):
    dom = Interval(1.0, 2.0)
    pair = MeanPair.detect(make_builtin("arithmetic", dom), make_builtin("geometric", dom))
    lu = lower_upper(pair, 1.0, 2.0)
    tr = transfinite_iterate(pair, 1.0, 2.0).tr_value
    values = (lu.lo, lu.up, tr)
    errs = [abs(Decimal(v) - AGM_1_2) for v in values]
    record_property("detail", f"max |value - oracle| = {float(max(errs)):.1e}")
    assert lu.converged
    for a, b in combinations(values, 2):
        assert abs(a - b) <= 1e-12
    assert max(errs) <= Decimal("1e-12")


WEIGHTS = {
    "zero": "0",
    "one": "1",
    "identity": "x",
    "square": "x*x",
    "sqrt": "sqrt(x)",
    "tent": "if x <= 0.5 then 2*x else 2 - 2*x",
}


@pytest.mark.criterion(8, "liminf, limsup and six phi_w obey both laws exactly; phi_w is one-to-one")
def test_two_limit_like_laws(record_property):
    specs = [LimitLikeSpec.liminf(), LimitLikeSpec.limsup()]
    specs += [LimitLikeSpec.from_text(w) for w in WEIGHTS.values()]
    failures = []
    for spec in specs:
        rep = check_two_limit_like(spec)
        assert rep.results and any(r.sequence == four_periodic(3 / 7) for r in rep.results)
        if not rep.passed:
            failures.append(rep.to_dict())
    probes = [k / 7 for k in range(1, 7)]
    weights = [LimitLikeSpec.from_text(w) for w in WEIGHTS.values()]
    undistinguished = [(a.label, b.label) for a, b in combinations(weights, 2)
                       if first_distinguishing_point(a, b, probes) is None]
    record_property("detail", f"{len(specs)} functionals x 20 sequences, "
                              f"{len(undistinguished)} indistinguishable weight pairs")
    assert not failures, failures
    assert not undistinguished


_H = "min(x,y) + min(x,y)*abs(x-y)/(x+y)"  # harmonic mean, rounding-safe form
_SQ = "sqrt(abs(x-y))/2"
SYMMETRIC_PAIRS = {
    "arith/geo switched at x+y=10": (
        "if x + y < 10 then (x+y)/2 else sqrt(x*y)",
        "if x + y < 10 then sqrt(x*y) else (x+y)/2"),
    "arith/harm switched at xy=20": (
        f"if x*y < 20 then {_H} else (x+y)/2",
        f"if x*y < 20 then (x+y)/2 else {_H}"),
    "gap-1 pair with roles swapped at x+y=11": (
        f"if abs(x-y) <= 1 then (x+y)/2 else (if x + y < 11 then (x+y)/2 + {_SQ} "
        f"else (x+y)/2 - {_SQ})",
        f"if abs(x-y) <= 1 then (x+y)/2 else (if x + y < 11 then (x+y)/2 - {_SQ} "
        f"else (x+y)/2 + {_SQ})"),
    "power-2/geo switched at max=5": (
        "if max(x,y) < 5 then sqrt((x*x+y*y)/2) else sqrt(x*y)",
        "if max(x,y) < 5 then sqrt(x*y) else sqrt((x*x+y*y)/2)"),
    "arith/arith+gap/4 switched at max=5": (
        "if max(x,y) < 5 then (x+y)/2 else (x+y)/2 + abs(x-y)/4",
        "if max(x,y) < 5 then (x+y)/2 + abs(x-y)/4 else (x+y)/2"),
}


def build_symmetric_pair(m_text, n_text, grid=Grid(41, 200)):
    dom = Interval(1.0, 10.0)
    return MeanPair.detect(parse_mean(m_text, dom, grid), parse_mean(n_text, dom, grid), grid)


@pytest.mark.criterion(9, "5 symmetric non-comparable pairs: Lo/Up/Tr direct == via meet/join")
def test_symmetrization_equivalence(record_property):
    starts = Grid(21, 200, seed=9).points(Interval(1.0, 10.0))
    mismatches = []
    for label, (m_text, n_text) in SYMMETRIC_PAIRS.items():
        pair = build_symmetric_pair(m_text, n_text)
        assert pair.symmetric and not pair.comparable, label
        mj = meet_join(pair)
        for x, y in starts:
            direct = lower_upper(pair, x, y)
            via = lower_upper(mj, x, y)
            tr_direct = transfinite_iterate(pair, x, y, symmetrize=False).tr_value
            tr_via = transfinite_iterate(mj, x, y).tr_value
            if (direct.lo, direct.up, tr_direct) != (via.lo, via.up, tr_via):
                mismatches.append((label, x, y))
    record_property("detail", f"{len(SYMMETRIC_PAIRS)} pairs x {len(starts)} starts, "
                              f"{len(mismatches)} mismatches")
    assert not mismatches, mismatches[:5]


def _fuzz_pairs():
    d10, d1 = Interval(0.0, 10.0), Interval(1.0, 10.0)
    from invmeans import make_example_pair
    pairs = [
        make_example_pair(d10),
        MeanPair.detect(make_builtin("arithmetic", d10), make_builtin("geometric", d10)),
        MeanPair.detect(make_builtin("harmonic", d1), make_builtin("arithmetic", d1)),
        MeanPair.detect(make_builtin("power", d10, 3.0), make_builtin("min", d10)),
        MeanPair(make_kc(-1.0, d10), make_kc(1.0, d10), comparable=True),
        MeanPair.detect(parse_mean("(2*x + y)/3", d10, Grid(21, 0)),
                        parse_mean("(x + 2*y)/3", d10, Grid(21, 0))),
    ]
    pairs += [build_symmetric_pair(*texts) for texts in SYMMETRIC_PAIRS.values()]
    return pairs


_TOKENS = ["x", "y", "1", "2.5", "1e3", "+", "-", "*", "/", "(", ")", ",", "sqrt", "abs",
           "min", "max", "pow", "if", "then", "else", "<", "<=", ">", ">=", " ", "#", "\n",
           "z", "$", "..", "1e400", "0.0"]


def _random_expr(rng, depth=0):
    if depth > 4 or rng.random() < 0.3:
        return rng.choice(["x", "y", "1", "0", "2.5", "1e-300", "1e300", "0.5"])
    kind = rng.randrange(6)
    if kind == 0:
        return f"{_random_expr(rng, depth + 1)} {rng.choice('+-*/')} {_random_expr(rng, depth + 1)}"
    if kind == 1:
        return f"{rng.choice(['sqrt', 'abs'])}({_random_expr(rng, depth + 1)})"
    if kind == 2:
        args = ", ".join(_random_expr(rng, depth + 1) for _ in range(rng.randint(1, 3)))
        return f"{rng.choice(['min', 'max'])}({args})"
    if kind == 3:
        return f"pow({_random_expr(rng, depth + 1)}, {rng.choice(['2', '0.5', '-1', '0'])})"
    if kind == 4:
        return (f"if {_random_expr(rng, depth + 1)} {rng.choice(['<', '<=', '>', '>='])} "
                f"{_random_expr(rng, depth + 1)} then {_random_expr(rng, depth + 1)} "
                f"else {_random_expr(rng, depth + 1)}")
    return f"-({_random_expr(rng, depth + 1)})"


def _fuzz_sources(count, seed):
    rng = random.Random(seed)
    printable = string.printable
    for i in range(count):
        kind = i % 4
        if kind == 0:
            yield "".join(rng.choice(_TOKENS) for _ in range(rng.randint(0, 25)))
        elif kind == 1:
            yield "".join(rng.choice(printable) for _ in range(rng.randint(0, 30)))
        elif kind == 2:
            yield bytes(rng.randrange(256) for _ in range(rng.randint(0, 30)))
        else:
            src = _random_expr(rng)
            if rng.random() < 0.5:  # single-character mutation
                j = rng.randrange(len(src) + 1)
                src = src[:j] + rng.choice(_TOKENS) + src[j + 1:]
            yield src


@pytest.mark.criterion(10, "orbit invariants on 10^4 fuzzed (pair, start); parser survives 10^5 inputs")
def test_property_fuzz(record_property):
    from invmeans import ConvergencePolicy
    from invmeans.errors import MeanBoundsError

    pairs = _fuzz_pairs()
    rng = np.random.default_rng(10)
    policy = ConvergencePolicy(max_steps=200)
    violations = []
    for i in range(10_000):
        pair = pairs[i % len(pairs)]
        dom = pair.domain
        x, y = (float(v) for v in rng.uniform(dom.lo, dom.hi, size=2))
        try:
            trace = iterate(pair, x, y, policy)
            trace.check_invariants()
        except (AssertionError, MeanBoundsError) as exc:
            violations.append((pair.name, x, y, str(exc)))
            continue
        if trace.replay_errors(pair) or trace.pairs[0] != (x, y):
            violations.append((pair.name, x, y, "replay"))

    parsed = rejected = 0
    abnormal = []
    for src in _fuzz_sources(100_000, seed=11):
        try:
            expr = parse(src)
        except MeanSyntaxError:
            rejected += 1
            continue
        except Exception as exc:  # anything else is an abnormal termination
            abnormal.append((src, repr(exc)))
            continue
        parsed += 1
        try:
            expr.eval(1.5, 2.5)
        except MeanEvalError:
            pass
        except Exception as exc:
            abnormal.append((src, repr(exc)))
    record_property("detail", f"{len(violations)} orbit violations; parser: {parsed} parsed, "
                              f"{rejected} rejected, {len(abnormal)} abnormal")
    assert not violations, violations[:5]
    assert not abnormal, abnormal[:5]
