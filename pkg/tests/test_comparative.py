import json

import numpy as np
import pytest

from dualrisk import (
    Agent,
    ExponentialUtility,
    IdentityWeighting,
    LinearUtility,
    PowerUtility,
    PowerWeighting,
    PrelecWeighting,
    PremiumQuery,
    QuadraticUtility,
    QuadraticWeighting,
    TKWeighting,
    concave_transform_check,
    cross_ratio_check,
    index_dominance,
    local_quadruples,
    premium_dominance,
    proposition1_report,
    rdu_premium_exact,
    sample_queries,
)
from dualrisk.comparative import DEFAULT_P_GRID, wealth_grid
from dualrisk.errors import BadQuadruple, RangeViolation

W = wealth_grid(1.0, 20.0)
P = DEFAULT_P_GRID
PRELEC = PrelecWeighting(0.65)
NEUTRAL = Agent(LinearUtility(), IdentityWeighting(), "neutral")
AVERSE = Agent(PowerUtility(0.5), QuadraticWeighting(0.5), "averse")


@pytest.fixture(scope="module")
def queries():
    return sample_queries(1000, (1.0, 20.0), seed=3)


def quadruples(rng, lo, hi, n=200):
    return np.sort(rng.uniform(lo, hi, (n, 4)), axis=1)


class TestIndexDominance:
    def test_power_ordering(self):
        a1 = Agent(PowerUtility(0.5), PRELEC)
        a2 = Agent(PowerUtility(0.2), PRELEC)
        assert index_dominance(a1, a2, W, P).holds

    def test_identical(self):
        c = index_dominance(AVERSE, AVERSE, W, P)
        assert c.holds and c.gap == 0.0 and c.violation == 0.0

    def test_convex_weighting_fails(self):
        c = index_dominance(NEUTRAL, Agent(LinearUtility(), PowerWeighting(2)), W, P)
        assert not c.holds and c.violation > 0

    def test_transitive(self, rng):
        for _ in range(50):
            g = np.sort(rng.uniform(0.1, 1.0, 3))[::-1]
            c = np.sort(rng.uniform(-0.9, 0.9, 3))
            a = [Agent(PowerUtility(g[i]), QuadraticWeighting(c[i])) for i in range(3)]
            assert index_dominance(a[0], a[1], W, P).holds
            assert index_dominance(a[1], a[2], W, P).holds
            assert index_dominance(a[0], a[2], W, P).holds


class TestConcaveTransform:
    def test_sqrt_of_linear(self):
        assert concave_transform_check(LinearUtility(), PowerUtility(0.5), W).holds

    def test_square_of_identity(self):
        assert not concave_transform_check(IdentityWeighting(), PowerWeighting(2), P).holds

    @pytest.mark.parametrize("pair", [(0.65, 0.3), (0.3, 0.65), (0.5, 0.5)])
    def test_prelec_matches_index_pattern(self, pair):
        h1, h2 = PrelecWeighting(pair[0]), PrelecWeighting(pair[1])
        a1, a2 = Agent(LinearUtility(), h1), Agent(LinearUtility(), h2)
        assert concave_transform_check(h1, h2, P).holds == index_dominance(a1, a2, W, P).holds

    def test_gap_tracks_index_difference(self):
        # the stencil gap approximates the index difference at each grid point
        U1, U2 = PowerUtility(0.8), PowerUtility(0.3)
        c = concave_transform_check(U1, U2, W)
        assert c.gap == pytest.approx(0.5 / 20.0, rel=0.05)

    def test_not_increasing(self):
        class Decreasing(LinearUtility):
            def value(self, w):
                return -np.asarray(w, dtype=float)

        with pytest.raises(RangeViolation):
            concave_transform_check(Decreasing(), LinearUtility(), W)


class TestCrossRatio:
    def test_identical(self, rng):
        q = quadruples(rng, 1, 20)
        c = cross_ratio_check(PowerUtility(0.5), PowerUtility(0.5), q)
        assert c.holds and c.gap == 0.0

    def test_concave_after_linear(self, rng):
        assert cross_ratio_check(LinearUtility(), PowerUtility(0.5), quadruples(rng, 1, 20)).holds

    def test_reversed(self, rng):
        assert not cross_ratio_check(PowerUtility(0.5), LinearUtility(), quadruples(rng, 1, 20)).holds

    def test_touching_middle_allowed(self):
        assert cross_ratio_check(LinearUtility(), PowerUtility(0.5), [(1, 2, 2, 3)]).holds

    @pytest.mark.parametrize("q", [[(1, 1, 2, 3)], [(1, 3, 2, 4)], [(1, 2, 3)]])
    def test_bad_quadruples(self, q):
        with pytest.raises(BadQuadruple):
            cross_ratio_check(LinearUtility(), PowerUtility(0.5), q)

    def test_local_quadruples_inside_grid(self):
        q = local_quadruples(P)
        assert q.shape == (P.size, 4)
        assert q.min() >= P[0] - 1e-15 and q.max() <= P[-1] + 1e-15
        assert np.all(np.diff(q, axis=1) > 0)


class TestPremiumDominance:
    def test_identical(self, queries):
        c = premium_dominance(AVERSE, AVERSE, queries)
        assert c.holds and c.gap == 0.0

    def test_ordered(self, queries):
        assert premium_dominance(NEUTRAL, AVERSE, queries).holds

    def test_reversed(self, queries):
        c = premium_dominance(AVERSE, NEUTRAL, queries)
        assert not c.holds and c.violation > 0
        q = PremiumQuery(**c.witness, utility=AVERSE.utility, weighting=AVERSE.weighting)
        q_neutral = PremiumQuery(**c.witness)
        assert rdu_premium_exact(q_neutral) - rdu_premium_exact(q) == pytest.approx(c.gap, abs=1e-12)

    def test_empty(self):
        assert premium_dominance(AVERSE, NEUTRAL, []).holds


class TestSampleQueries:
    def test_inside_ranges(self):
        qs = sample_queries(500, (1.0, 20.0), (0.01, 0.99), seed=1, n_boundary=0)
        assert len(qs) == 500
        for q in qs:
            assert 1.0 <= q.w0 - q.eps2 and q.w0 + q.eps2 <= 20.0
            assert 0.01 <= q.p0 - q.eps1 and q.p0 + q.eps1 <= 0.99
            assert not q.is_boundary

    def test_boundary_share(self):
        qs = sample_queries(100, (1.0, 20.0), seed=1)
        assert sum(q.is_boundary for q in qs) == 10

    def test_deterministic(self):
        assert sample_queries(50, (1.0, 5.0), seed=9) == sample_queries(50, (1.0, 5.0), seed=9)


class TestReport:
    def test_ordered_pair(self, queries):
        r = proposition1_report(NEUTRAL, AVERSE, W, P, queries)
        assert r.condition_i.holds and r.condition_ii.holds
        assert r.condition_iv.holds and r.condition_v.holds
        assert r.agree

    def test_identical(self, queries):
        r = proposition1_report(AVERSE, AVERSE, W, P, queries)
        assert r.agree and r.condition_i.holds
        assert r.boundary_ii.holds

    def test_crossing_prelec(self, queries):
        a1 = Agent(PowerUtility(0.5), PrelecWeighting(0.3))
        a2 = Agent(PowerUtility(0.5), PrelecWeighting(0.65))
        for x, y in ((a1, a2), (a2, a1)):
            r = proposition1_report(x, y, W, P, queries)
            assert not any((r.condition_i.holds, r.condition_ii.holds, r.condition_iv.holds, r.condition_v.holds))
            assert r.agree

    def test_serialises(self, queries):
        d = proposition1_report(NEUTRAL, AVERSE, W, P, queries[:20]).to_dict()
        json.dumps(d)
        assert d["condition_i"]["violation"] >= 0 and d["agree"] is True

    def test_random_pairs_agree(self, rng, queries):
        utilities = [lambda: LinearUtility(), lambda: PowerUtility(rng.uniform(0.1, 1)),
                     lambda: ExponentialUtility(rng.uniform(0.01, 1)), lambda: QuadraticUtility(rng.uniform(0.001, 0.02))]
        weightings = [lambda: IdentityWeighting(), lambda: PowerWeighting(rng.uniform(0.3, 3)),
                      lambda: QuadraticWeighting(rng.uniform(-0.9, 0.9)), lambda: PrelecWeighting(rng.uniform(0.1, 0.95)),
                      lambda: TKWeighting(rng.uniform(0.5, 1))]
        for _ in range(40):
            a1 = Agent(utilities[rng.integers(4)](), weightings[rng.integers(5)]())
            a2 = Agent(utilities[rng.integers(4)](), weightings[rng.integers(5)]())
            r = proposition1_report(a1, a2, W, P, queries)
            assert r.condition_i.holds == r.condition_iv.holds == r.condition_v.holds
            if r.condition_i.holds:
                assert r.condition_ii.holds
