import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import make_round_robin
from oracles import central_difference, equal_opponents_tpr, g_direct, grid_scan_tpr
from prerating.rating import (
    BoundaryScoreError,
    ClampBounds,
    CprSurrogateParams,
    EloParams,
    compute_c,
    expected_score,
    g,
    g_prime,
    solve_boundary,
    solve_tpr,
    solve_tpr_batch,
    tpr_map,
)
from prerating.tournament import GameRecord, Player, Tournament

ratings = st.floats(0, 4000, allow_nan=False)
opponent_lists = st.lists(st.floats(1000, 3000, allow_nan=False), min_size=1, max_size=12)


class TestExpectedScore:
    def test_equal(self):
        assert expected_score(2500, 2500) == 0.5

    def test_400_up(self):
        assert expected_score(2900, 2500) == pytest.approx(10 / 11, abs=1e-15)

    def test_400_down(self):
        assert expected_score(2100, 2500) == pytest.approx(1 / 11, abs=1e-15)

    def test_custom_params(self):
        p = EloParams(scale=200, base=math.e)
        assert expected_score(200, 0, p) == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-15)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError):
            expected_score(bad, 2000)

    def test_extreme_gap_no_overflow(self):
        assert expected_score(0, 1e6) == pytest.approx(0.0, abs=1e-300)
        assert expected_score(1e6, 0) == 1.0

    @given(ratings, ratings)
    def test_complement(self, a, b):
        assert abs(expected_score(a, b) + expected_score(b, a) - 1.0) <= 1e-15

    @given(ratings, ratings, ratings)
    def test_monotone(self, own, opp, bump):
        assume(bump > 1e-6)
        assert expected_score(own + bump, opp) > expected_score(own, opp) or expected_score(own, opp) == 1.0
        assert expected_score(own, opp + bump) < expected_score(own, opp) or expected_score(own, opp) == 0.0


class TestG:
    def test_symmetric(self):
        assert g(2500, [2500, 2500, 2500]) == pytest.approx(1.5, abs=1e-15)

    def test_two_opponents(self):
        assert g(3000, [2600, 2600]) == pytest.approx(20 / 11, abs=1e-14)

    def test_matches_direct_formula(self):
        opps = [2412.5, 2699.0, 2550.0, 2788.0]
        assert g(2611.0, opps) == pytest.approx(g_direct(2611.0, opps), abs=1e-14)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            g(2000, [])

    @given(opponent_lists, st.floats(-1000, 5000), st.floats(-1000, 5000))
    def test_strictly_increasing(self, opps, y1, y2):
        assume(y2 - y1 > 1e-3)
        assert g(y1, opps) < g(y2, opps)

    def test_limits(self):
        opps = [2400, 2500]
        assert g(-1e5, opps) == pytest.approx(0.0, abs=1e-12)
        assert g(1e5, opps) == pytest.approx(2.0, abs=1e-12)


class TestGPrime:
    def test_symmetric_point(self):
        assert g_prime(2500, [2500]) == pytest.approx(math.log(10) / 400 / 4, rel=1e-14)
        assert g_prime(2500, [2500]) == pytest.approx(0.001439, abs=5e-7)

    @settings(max_examples=200)
    @given(opponent_lists, st.floats(500, 3500))
    def test_central_difference(self, opps, y):
        fd = central_difference(lambda v: g_direct(v, opps), y)
        assert g_prime(y, opps) == pytest.approx(fd, rel=1e-6)
        assert g_prime(y, opps) > 0


class TestSolveTpr:
    def test_symmetric_draw(self):
        assert solve_tpr([2600, 2600], 1) == pytest.approx(2600, abs=1e-9)

    def test_single_opponent_closed_form(self):
        # own = opp + 400 log10(m / (1 - m)) with m = 10/11 gives +400
        assert solve_tpr([2500], 10 / 11) == pytest.approx(2900, abs=1e-7)

    def test_translation(self):
        opps = [2410, 2555, 2600, 2710, 2780]
        assert solve_tpr(np.add(opps, 137), 3.5) == pytest.approx(solve_tpr(opps, 3.5) + 137, abs=1e-6)

    @pytest.mark.parametrize("m", [0, 3, -1, 3.5])
    def test_boundary_rejected(self, m):
        with pytest.raises(BoundaryScoreError):
            solve_tpr([2500, 2600, 2700], m)

    def test_empty(self):
        with pytest.raises(ValueError):
            solve_tpr([], 0.5)

    @pytest.mark.parametrize("k, m", [(1, 0.5), (9, 0.5), (9, 8.99), (23, 18.5), (5, 1e-6)])
    def test_equal_opponents(self, k, m):
        assert solve_tpr([2557.0] * k, m) == pytest.approx(equal_opponents_tpr(2557.0, m, k), abs=1e-6)

    def test_needs_bracket_expansion(self):
        p = EloParams(bracket_pad=1.0)
        assert solve_tpr([2000, 2000], 1.999, p) == pytest.approx(equal_opponents_tpr(2000, 1.999, 2), abs=1e-6)

    def test_warm_start_agrees(self):
        rng = np.random.default_rng(4)
        owner = np.repeat(np.arange(5), 6)
        opp = rng.uniform(2000, 2800, owner.size)
        m = rng.uniform(0.3, 5.7, 5)
        cold = solve_tpr_batch(owner, opp, m)
        warm = solve_tpr_batch(owner, opp, m, guess=np.full(5, 100.0))
        np.testing.assert_allclose(warm, cold, atol=1e-9)

    @settings(max_examples=200)
    @given(opponent_lists, st.floats(0.001, 0.999))
    def test_residual(self, opps, frac):
        m = frac * len(opps)
        y = solve_tpr(opps, m)
        assert abs(g_direct(y, opps) - m) <= 1e-9

    @settings(max_examples=100)
    @given(opponent_lists, st.floats(0.01, 0.99))
    def test_agrees_with_grid_scan(self, opps, frac):
        m = frac * len(opps)
        assert abs(solve_tpr(opps, m) - grid_scan_tpr(opps, m)) <= 0.01

    @given(opponent_lists, st.floats(0.01, 0.99), st.floats(-500, 500))
    def test_translation_equivariance(self, opps, frac, shift):
        m = frac * len(opps)
        assert abs(solve_tpr(np.add(opps, shift), m) - (solve_tpr(opps, m) + shift)) <= 1e-6

    @given(opponent_lists, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_monotone_in_score(self, opps, f1, f2):
        assume(f2 - f1 > 1e-6)
        k = len(opps)
        assert solve_tpr(opps, f1 * k) < solve_tpr(opps, f2 * k)


class TestSolveBoundary:
    def test_perfect(self):
        # 2557 + 400 log10(8.75 / 0.25)
        y = solve_boundary([2557] * 9, 9)
        assert y == pytest.approx(2557 + 400 * math.log10(35), abs=1e-6)
        assert y == pytest.approx(3174.6, abs=0.05)

    def test_zero(self):
        y = solve_boundary([2557] * 9, 0)
        assert y == pytest.approx(2557 - 400 * math.log10(35), abs=1e-6)
        assert y == pytest.approx(1939.4, abs=0.05)

    def test_interior_rejected(self):
        with pytest.raises(ValueError, match="interior"):
            solve_boundary([2500, 2600], 1)

    def test_delta(self):
        c = CprSurrogateParams(delta=0.5)
        assert solve_boundary([2400, 2400], 2, c=c) == pytest.approx(solve_tpr([2400, 2400], 1.5), abs=1e-9)

    @pytest.mark.parametrize("bad", [0.0, -0.1, 0.51])
    def test_delta_range(self, bad):
        with pytest.raises(ValueError):
            CprSurrogateParams(delta=bad)

    def test_continuous_in_opponents(self):
        base = [2500.0, 2600.0, 2700.0]
        y0 = solve_boundary(base, 3)
        for eps in (1e-3, 1e-6):
            assert abs(solve_boundary([base[0] + eps, *base[1:]], 3) - y0) < 2 * eps

    def test_continuous_in_delta(self):
        opps = [2450.0, 2610.0, 2700.0, 2550.0]
        ys = [solve_boundary(opps, 4, c=CprSurrogateParams(d)) for d in np.linspace(0.05, 0.5, 40)]
        assert np.all(np.abs(np.diff(ys)) < 100)
        assert np.all(np.diff(ys) < 0)


class TestTprMap:
    def test_draw_equal(self, draw_pair):
        out = tpr_map(draw_pair, {"a": 2400, "b": 2400}, b=ClampBounds(hi=5000))
        assert out == pytest.approx({"a": 2400, "b": 2400}, abs=1e-9)

    def test_draw_swaps(self, draw_pair):
        out = tpr_map(draw_pair, {"a": 2000, "b": 3000}, b=ClampBounds(hi=5000))
        assert out == pytest.approx({"a": 3000, "b": 2000}, abs=1e-9)

    def test_default_clamp_is_c(self, draw_pair):
        # c = 2200 here, so a's TPR of 3000 is clamped down to it
        out = tpr_map(draw_pair, {"a": 2000, "b": 3000})
        assert out["a"] == 2200.0

    def test_boundary_routed(self):
        t = make_round_robin(4, lambda i, j: 1 if i == 0 else Fraction(1, 2))
        x = {"p0": 2500.0, "p1": 2400.0, "p2": 2450.0, "p3": 2300.0}
        out = tpr_map(t, x)
        assert out["p0"] == pytest.approx(solve_boundary([2400, 2450, 2300], 3), abs=1e-9)

    def test_coverage(self, draw_pair):
        with pytest.raises(ValueError, match="missing"):
            tpr_map(draw_pair, {"a": 2000})

    @settings(max_examples=50, deadline=None)
    @given(
        x=st.lists(st.floats(0, 6000), min_size=6, max_size=6),
        lo=st.floats(0, 2000),
        width=st.floats(1, 3000),
    )
    def test_clamp_bounds(self, x, lo, width):
        from prerating.tournament import generate_random_pairing

        t = generate_random_pairing(6, 3, seed=11)
        vec = dict(zip(t.ids, x))
        out = tpr_map(t, vec, b=ClampBounds(lo, lo + width))
        assert all(lo <= v <= lo + width for v in out.values())


class TestComputeC:
    def test_two_players(self):
        t = Tournament((Player("a", rating=2000), Player("b", rating=2200)), (GameRecord("a", "b", 1),))
        assert compute_c(t) == 2200

    def test_round_robin(self):
        t = make_round_robin(24, lambda i, j: Fraction(1, 2), rating=2557.0)
        assert compute_c(t) == 23 * 2557

    def test_multiplicity(self):
        players = (Player("a", rating=2000), Player("b", rating=2200))
        one = Tournament(players, (GameRecord("a", "b", 1),))
        two = Tournament(players, (GameRecord("a", "b", 1), GameRecord("b", "a", 0)))
        assert compute_c(two) == 2 * compute_c(one)

    def test_default_rating(self):
        t = Tournament((Player("a"), Player("b", rating=2300)), (GameRecord("a", "b", 1),), default_rating=1800)
        assert compute_c(t) == 2300

    def test_unrated(self):
        t = Tournament((Player("a"), Player("b")), (GameRecord("a", "b", 1),))
        with pytest.raises(ValueError, match="no initial rating"):
            compute_c(t)


@pytest.mark.parametrize(
    "kwargs",
    [{"scale": 0}, {"base": 1}, {"root_tol": 0}, {"bracket_pad": -1}],
)
def test_elo_params_validated(kwargs):
    with pytest.raises(ValueError):
        EloParams(**kwargs)


def test_clamp_bounds_validated():
    with pytest.raises(ValueError):
        ClampBounds(lo=100, hi=50)
    with pytest.raises(ValueError):
        ClampBounds(lo=-1)
