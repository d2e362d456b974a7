import math

import pytest

from invmeans import (DomainError, Grid, Interval, Mean, MeanPair, PreconditionError,
                      check_properties, convex_combine, make_builtin, make_example_pair,
                      make_kc, meet_join)
from invmeans.core import check_mean_bounds
from invmeans.errors import MeanBoundsError
from oracles import k_closed_form

D = Interval(1.0, 4.0)


class TestInterval:
    def test_contains_and_length(self):
        assert 1.0 in D and 4.0 in D and 0.5 not in D
        assert D.length == 3.0

    @pytest.mark.parametrize("lo, hi", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf),
                                        (math.nan, 1.0)])
    def test_rejects_degenerate(self, lo, hi):
        with pytest.raises(DomainError):
            Interval(lo, hi)

    def test_require_names_the_offender(self):
        with pytest.raises(DomainError, match="5.0"):
            D.require(2.0, 5.0)


class TestBuiltins:
    @pytest.mark.parametrize("kind, x, y, expected", [
        ("arithmetic", 1.0, 4.0, 2.5),
        ("geometric", 1.0, 4.0, 2.0),
        ("harmonic", 1.0, 4.0, 1.6),
        ("min", 3.0, 2.0, 2.0),
        ("max", 3.0, 2.0, 3.0),
    ])
    def test_values(self, kind, x, y, expected):
        assert make_builtin(kind, D)(x, y) == pytest.approx(expected, rel=1e-15)

    def test_power_special_cases(self):
        assert make_builtin("power", D, 0).name == "geometric"
        assert make_builtin("power", D, 1).name == "arithmetic"
        assert make_builtin("power", D, 2)(1.0, 4.0) == pytest.approx(math.sqrt(8.5))
        assert make_builtin("power", D, -1)(1.0, 4.0) == pytest.approx(1.6)

    def test_domain_requirements(self):
        z = Interval(0.0, 1.0)
        with pytest.raises(DomainError):
            make_builtin("harmonic", z)
        with pytest.raises(DomainError):
            make_builtin("power", z, -2)
        with pytest.raises(DomainError):
            make_builtin("geometric", Interval(-1.0, 1.0))
        assert not make_builtin("geometric", z).strict
        assert make_builtin("geometric", D).strict

    def test_domain_is_enforced_on_call(self):
        with pytest.raises(DomainError):
            make_builtin("arithmetic", D)(0.0, 2.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_builtin("median", D)

    def test_clamped_at_the_diagonal(self):
        h = make_builtin("harmonic", Interval(1.0, 2.0))
        for t in (1.45, 1.1, 1.9999999):
            assert h(t, t) == t


class TestExamplePair:
    def test_hand_values(self):
        pair = make_example_pair()
        assert pair(0.0, 3.0) == pytest.approx((1.5 - math.sqrt(3) / 2, 1.5 + math.sqrt(3) / 2))
        assert pair(2.0, 2.5) == (2.25, 2.25)
        assert pair(3.0, 0.0) == pair(0.0, 3.0)

    def test_needs_long_domain(self):
        with pytest.raises(DomainError):
            make_example_pair(Interval(0.0, 1.0))

    def test_gap_above_one_stays_above_one(self):
        pair = make_example_pair()
        x = 0.2
        y = math.nextafter(x + 1.0, math.inf)
        m, n = pair(x, y)
        assert abs(y - x) > 1 and n - m > 1
        assert x <= m <= n <= y

    def test_properties_on_default_grid(self):
        rep = check_properties(make_example_pair())
        assert rep["mean_bounds"].holds and rep["symmetric"].holds and rep["comparable_le"].holds
        # strictness is lost only where the float gap is 1 + 2**-52
        if not rep["strict"].holds:
            x, y = rep["strict"].witness
            assert abs(x - y) - 1 <= 4 * 2.0 ** -52


class TestKc:
    @pytest.mark.parametrize("c", [-1, -0.5, 0, 0.5, 1])
    def test_matches_closed_form(self, c):
        k = make_kc(c, Interval(0.0, 10.0))
        for x, y in Grid(11, 20).points(k.domain):
            assert k(x, y) == k_closed_form(c, x, y)

    def test_c_range(self):
        with pytest.raises(ValueError):
            make_kc(1.5, D)


class TestPairs:
    def test_different_domains_rejected(self):
        with pytest.raises(DomainError):
            MeanPair(make_builtin("min", D), make_builtin("max", Interval(0.0, 1.0)))

    def test_false_comparable_flag_rejected(self):
        with pytest.raises(PreconditionError):
            MeanPair(make_builtin("max", D), make_builtin("min", D), comparable=True)

    def test_detect(self):
        assert MeanPair.detect(make_builtin("geometric", D), make_builtin("arithmetic", D)).comparable
        assert not MeanPair.detect(make_builtin("arithmetic", D),
                                   make_builtin("geometric", D)).comparable

    def test_meet_join(self):
        pair = MeanPair(make_builtin("arithmetic", D), make_builtin("geometric", D))
        mj = meet_join(pair)
        assert mj.comparable and mj.symmetric
        assert mj(1.0, 4.0) == (2.0, 2.5)


def test_convex_combine():
    a, b = make_kc(-1, Interval(0.0, 10.0)), make_kc(1, Interval(0.0, 10.0))
    k = convex_combine(a, b, 0.75)
    assert k(0.0, 3.0) == pytest.approx(k_closed_form(0.5, 0.0, 3.0))
    assert convex_combine(a, b, 0.0)(0.0, 3.0) == a(0.0, 3.0)
    with pytest.raises(ValueError):
        convex_combine(a, b, 1.5)


def test_check_mean_bounds_reports_smallest_witness():
    with pytest.raises(MeanBoundsError) as info:
        check_mean_bounds(lambda x, y: x + y, Interval(1.0, 2.0), Grid(3, 0), "sum")
    assert info.value.witness == (1.0, 1.0)


def test_grid_is_reproducible():
    g = Grid(5, 7, seed=3)
    assert g.points(D) == g.points(D)
    assert len(g.points(D)) == g.describe(D)["size"] == 32
    assert Grid(5, 7, seed=4).points(D) != g.points(D)


def test_mean_is_a_plain_callable():
    m = Mean("first", lambda x, y: x, D)
    assert m(2.0, 3.0) == 2.0 and not m.symmetric
