import math

import numpy as np
import pytest

from simplex_spectra.frame import build_frame
from simplex_spectra.stationary import (ORACLE_DEDUPE, ContinuumPattern,
                                        DegenerateCombinationError, ThreeValue, TwoValue,
                                        canonical_sign, census, check_roots, dedupe,
                                        enumerate_three_value, enumerate_two_value,
                                        expected_count, is_feasible, make_point,
                                        oracle_multistart, random_feasible, solve_three_value,
                                        to_eigenpair, two_value_ab, u_to_v, upper_bound, v_to_u)
from simplex_spectra.tensor import from_frame

from conftest import cached_census

COUNT_GRID = [(n, m) for n in range(3, 8) for m in (3, 4, 5, 6) if (n, m) != (3, 4)]
# cells where enumeration disagrees with the closed-form count; see TestCountLaw
KNOWN_OFF_FORMULA = {(6, 4): 46, (6, 6): 151}


class TestTwoValue:
    def test_ab_n3(self):
        a, b = two_value_ab(3, 1)
        assert a == pytest.approx(math.sqrt(2 / 3)) and b == pytest.approx(-math.sqrt(1 / 6))
        assert (a, b) == pytest.approx((0.816497, -0.408248), abs=1e-6)

    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_n3_odd_count(self, m):
        assert len(enumerate_two_value(3, m)) == 3

    @pytest.mark.parametrize("n,m", [(4, 3), (5, 4), (6, 5), (7, 6)])
    def test_certificates(self, n, m):
        for p in enumerate_two_value(n, m):
            assert p.kkt_residual < 1e-12
            assert is_feasible(p.u)
            assert isinstance(p.structure, TwoValue)
            assert 2 * p.structure.k <= n

    def test_even_m_counts_with_sign_folding(self):
        # n = 4: k=1 (4 points) and k=2 (6 points folded to 3)
        assert len(enumerate_two_value(4, 4)) == 7

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            enumerate_two_value(2, 3)


class TestThreeValue:
    def test_1_2_1_pattern(self):
        r = 1 / math.sqrt(2)
        (sol,) = solve_three_value(4, 4, 1, 2, 1)
        np.testing.assert_allclose(sol, [r, 0, -r], atol=1e-12)
        pts = [p for p in enumerate_three_value(4, 4) if p.structure.q == 2]
        for p in pts:
            assert p.alpha == pytest.approx(0.5, abs=1e-12)
            assert p.beta == pytest.approx(0.0, abs=1e-12)
            assert sorted(np.round(p.u, 12)) == pytest.approx([-r, 0, 0, r])
        # choose the two zero slots: 6 assignments, folded by sign to 6
        assert len(pts) == 6

    def test_n3_m6_single_solution(self):
        sols = solve_three_value(3, 6, 1, 1, 1)
        assert len(sols) == 1
        pts = enumerate_three_value(3, 6)
        assert len(pts) == 3
        assert all(isinstance(p.structure, ThreeValue) for p in pts)

    def test_duplicate_starts_collapse(self):
        few = solve_three_value(5, 6, 1, 2, 2, starts=27)
        many = solve_three_value(5, 6, 1, 2, 2, starts=200)
        assert len(few) == len(many)
        np.testing.assert_allclose(few, many, atol=1e-8)

    def test_continuum_detection(self):
        with pytest.raises(ContinuumPattern):
            solve_three_value(6, 4, 2, 2, 2)

    def test_empty_partitions_recorded(self):
        empty = []
        enumerate_three_value(5, 4, empty=empty)
        assert all(sum(p) == 5 for p in empty)

    def test_rejects_odd(self):
        with pytest.raises(ValueError):
            enumerate_three_value(4, 3)

    def test_rejects_degenerate(self):
        with pytest.raises(DegenerateCombinationError):
            enumerate_three_value(3, 4)


class TestCensus:
    @pytest.mark.parametrize("n,m,count", [(4, 3, 7), (4, 4, 13), (3, 6, 6)])
    def test_examples(self, n, m, count):
        c = cached_census(n, m)
        assert c.count == count
        assert c.count_matches

    def test_bound_example(self):
        c = cached_census(4, 3)
        assert c.upper_bound == 7 and c.bound_attained

    def test_degenerate(self):
        with pytest.raises(DegenerateCombinationError):
            census(3, 4)

    def test_sorted_by_objective(self):
        obj = np.array([p.objective for p in cached_census(5, 4).points])
        assert np.all(np.diff(obj) < 1e-12)


class TestCountLaw:
    @pytest.mark.parametrize("n,m", COUNT_GRID)
    def test_count(self, n, m):
        c = cached_census(n, m)
        if (n, m) in KNOWN_OFF_FORMULA:
            # the enumeration is certified; the closed form does not describe it
            assert c.count == KNOWN_OFF_FORMULA[(n, m)]
            assert not c.count_matches
        else:
            assert c.count == expected_count(n, m)
            assert c.count_matches

    def test_six_four_is_a_continuum(self):
        c = cached_census(6, 4)
        assert c.continuum_partitions == [(2, 2, 2)]
        assert not c.isolated

    @pytest.mark.parametrize("n,m", COUNT_GRID)
    def test_bound(self, n, m):
        c = cached_census(n, m)
        assert c.upper_bound == upper_bound(m, n - 1)
        assert c.within_bound
        if m in (3, 4) and c.isolated:
            assert c.bound_attained

    def test_formulas(self):
        assert [expected_count(n, 3) for n in range(3, 7)] == [3, 7, 15, 31]
        assert [expected_count(n, 4) for n in (4, 5)] == [13, 40]
        assert expected_count(3, 6) == 6
        assert upper_bound(3, 3) == 7 and upper_bound(4, 3) == 13


class TestCertificates:
    @pytest.mark.parametrize("n,m", COUNT_GRID)
    def test_every_point(self, n, m):
        for p in cached_census(n, m).points:
            u = p.u
            assert abs(u @ u - 1) < 1e-12 and abs(u.sum()) < 1e-12
            assert p.kkt_residual < 1e-10
            assert abs(p.alpha - np.sum(u ** m)) < 1e-12
            assert abs(p.beta - np.mean(u ** (m - 1))) < 1e-12
            assert check_roots(p)

    @pytest.mark.parametrize("n,m", [(n, m) for n, m in COUNT_GRID if m % 2])
    def test_odd_sign_law(self, n, m):
        for p in cached_census(n, m).points:
            assert p.beta > 0
            # alpha vanishes exactly when k = n/2
            if 2 * p.structure.k == n:
                assert abs(p.alpha) < 1e-12
            else:
                assert p.alpha > 0


class TestCanonicalSign:
    def test_involution(self):
        rng = np.random.default_rng(0)
        for m in (3, 4, 5, 6):
            for u in random_feasible(rng, 20, 5):
                s = canonical_sign(u, m)
                assert canonical_sign(s * u, m) == 1
                assert canonical_sign(-s * u, m) == -1

    def test_make_point_negates_structure(self):
        a, b = two_value_ab(4, 1)
        u = -np.array([a, b, b, b])
        p = make_point(u, 3, TwoValue(1, a, b).negated(4))
        assert p.u[0] > 0 and p.structure.k == 1

    def test_dedupe(self):
        p = make_point(np.array([1, -1, 0]) / math.sqrt(2), 3)
        q = make_point(p.u + 1e-9, 3, canonicalize=False)
        assert len(dedupe([p, q], 1e-8)) == 1


class TestMaps:
    @pytest.mark.parametrize("n", range(3, 8))
    def test_roundtrip(self, n):
        f = build_frame(n)
        rng = np.random.default_rng(n)
        for u in random_feasible(rng, 100, n):
            np.testing.assert_allclose(v_to_u(f, u_to_v(f, u)), u, atol=1e-12)
            v = rng.standard_normal(n - 1)
            v /= np.linalg.norm(v)
            w = v_to_u(f, v)
            assert is_feasible(w)
            np.testing.assert_allclose(u_to_v(f, w), v, atol=1e-12)

    @pytest.mark.parametrize("n", range(3, 8))
    def test_frame_vectors(self, n):
        f = build_frame(n)
        for j in range(n):
            expected = np.full(n, -1 / (n - 1))
            expected[j] = 1.0
            expected *= math.sqrt((n - 1) / n)
            np.testing.assert_allclose(v_to_u(f, f.W[:, j]), expected, atol=1e-12)
            np.testing.assert_allclose(u_to_v(f, expected), f.W[:, j], atol=1e-12)

    def test_n3_leading_point(self):
        f = build_frame(3)
        u = np.array([math.sqrt(2 / 3), -math.sqrt(1 / 6), -math.sqrt(1 / 6)])
        np.testing.assert_allclose(u_to_v(f, u), f.W[:, 0], atol=1e-12)

    def test_rejects_infeasible(self):
        with pytest.raises(ValueError):
            u_to_v(build_frame(3), np.array([1.0, 0.0, 0.0]))


class TestEigenpairs:
    def test_k1_n3_m3(self):
        f = build_frame(3)
        S = from_frame(f, 3)
        top = cached_census(3, 3).points[0]
        ep = to_eigenpair(f, S, top)
        assert ep.lam == pytest.approx(0.75, abs=1e-12)
        dists = [np.linalg.norm(ep.v - f.W[:, j]) for j in range(3)]
        assert min(dists) < 1e-12

    @pytest.mark.parametrize("n,m", [(4, 3), (4, 4), (5, 5), (5, 6)])
    def test_all_certified_and_ordered(self, n, m):
        f = build_frame(n)
        S = from_frame(f, m)
        pairs = [to_eigenpair(f, S, p) for p in cached_census(n, m).points]
        assert all(e.residual < 1e-9 for e in pairs)
        lams = np.array([e.lam for e in pairs])
        assert np.all(np.diff(lams) < 1e-12)
        # lambda tracks the u-space objective through a fixed positive scale
        ratio = [e.lam / e.source.objective for e in pairs if abs(e.source.objective) > 1e-9]
        np.testing.assert_allclose(ratio, (n / (n - 1)) ** (m / 2), rtol=1e-10)

    def test_negated_odd(self):
        f = build_frame(4)
        S = from_frame(f, 3)
        p = cached_census(4, 3).points[0]
        neg = make_point(-p.u, 3, canonicalize=False)
        assert to_eigenpair(f, S, neg).lam == pytest.approx(-to_eigenpair(f, S, p).lam)


class TestOracleMultistart:
    def test_n3_m3_recovers_census(self):
        pts, _ = oracle_multistart(3, 3, 10 ** 4, seed=0)
        ref = np.array([p.u for p in cached_census(3, 3).points])
        assert len(pts) == 3
        for p in pts:
            assert np.min(np.max(np.abs(ref - p.u), axis=1)) < ORACLE_DEDUPE

    def test_n4_m4_subset(self):
        pts, _ = oracle_multistart(4, 4, 2000, seed=1)
        ref = np.array([p.u for p in cached_census(4, 4).points])
        assert pts
        for p in pts:
            assert np.min(np.max(np.abs(ref - p.u), axis=1)) < ORACLE_DEDUPE

    def test_stationary_start_unchanged(self):
        p = cached_census(4, 4).points[5]
        pts, discarded = oracle_multistart(4, 4, 1, initial=p.u)
        assert discarded == 0
        np.testing.assert_allclose(pts[0].u, p.u, atol=1e-12)

    def test_seeded(self):
        a, _ = oracle_multistart(4, 3, 50, seed=3)
        b, _ = oracle_multistart(4, 3, 50, seed=3)
        assert [p.u.tolist() for p in a] == [p.u.tolist() for p in b]

    def test_rejects_zero_starts(self):
        with pytest.raises(ValueError):
            oracle_multistart(3, 3, 0)
