from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_round_robin
from prerating.tournament import (
    GameRecord,
    Player,
    Tournament,
    TournamentError,
    TournamentValidationError,
    check,
    generate_random_pairing,
    generate_round_robin,
    opponents_of,
    scores,
    validate,
)


def kinds(t):
    return {v.kind for v in validate(t)}


class TestValidate:
    def test_single_draw_is_valid(self, draw_pair):
        assert validate(draw_pair) == []
        assert scores(draw_pair) == {"a": (1, Fraction(1, 2)), "b": (1, Fraction(1, 2))}

    def test_self_play(self):
        t = Tournament((Player("a"), Player("b")), (GameRecord("a", "a", 1), GameRecord("a", "b", 0)))
        assert "self-play" in kinds(t)

    def test_unknown_player(self):
        t = Tournament((Player("a"),), (GameRecord("a", "zz", 1),))
        assert "unknown player" in kinds(t)

    def test_score_out_of_range(self):
        t = Tournament((Player("a"), Player("b")), (GameRecord("a", "b", Fraction(3, 2)),))
        assert "score out of range" in kinds(t)

    def test_zero_game_player(self):
        t = Tournament((Player("a"), Player("b"), Player("c")), (GameRecord("a", "b", 1),))
        violations = validate(t)
        assert [v.kind for v in violations] == ["player with zero games"]
        assert "'c'" in violations[0].detail

    def test_duplicate_id(self):
        t = Tournament((Player("a"), Player("a"), Player("b")), (GameRecord("a", "b", 1),))
        assert "duplicate player id" in kinds(t)

    def test_reports_every_violation(self):
        t = Tournament((Player("a"), Player("a"), Player("c")), (GameRecord("a", "a", 2), GameRecord("a", "x", 0)))
        assert kinds(t) == {"duplicate player id", "self-play", "score out of range", "unknown player",
                            "player with zero games"}

    def test_check_raises_with_violations(self):
        t = Tournament((Player("a"),), ())
        with pytest.raises(TournamentValidationError) as info:
            check(t)
        assert info.value.violations[0].kind == "player with zero games"

    def test_round_robin_24_counts(self):
        t = generate_round_robin(24, seed=3)
        assert validate(t) == []
        # every unordered pair once: 24 * 23 / 2
        assert len(t.games) == 276
        assert sum(t.points) == 276


class TestScores:
    def test_fractional_scores_exact(self):
        t = Tournament((Player("a"), Player("b")), [GameRecord("a", "b", 0.1)] * 3)
        assert scores(t)["a"] == (3, Fraction(3, 10))
        assert scores(t)["b"] == (3, Fraction(27, 10))

    def test_perfect_score(self):
        t = make_round_robin(10, lambda i, j: 1 if i == 0 else Fraction(1, 2))
        k, m = scores(t)["p0"]
        assert (k, m) == (9, 9)
        assert m == k

    def test_interzonal_fischer(self, interzonal):
        t, _ = interzonal
        assert scores(t)["1"] == (23, Fraction(37, 2))


class TestOpponents:
    def test_single_game(self):
        t = Tournament((Player("a"), Player("b")), (GameRecord("a", "b", 1),))
        assert opponents_of(t, "a") == Counter({"b": 1})

    def test_double_round_robin_multiplicity(self):
        ids = ["x", "y", "z"]
        games = [GameRecord(a, b, Fraction(1, 2)) for _ in range(2) for i, a in enumerate(ids) for b in ids[i + 1:]]
        t = Tournament(tuple(Player(i) for i in ids), tuple(games))
        for pid in ids:
            opp = opponents_of(t, pid)
            assert sum(opp.values()) == 4
            assert set(opp.values()) == {2}

    def test_round_robin_24(self):
        t = generate_round_robin(24)
        assert all(sum(opponents_of(t, pid).values()) == 23 for pid in t.ids)

    def test_unknown(self, draw_pair):
        with pytest.raises(TournamentError, match="no such player"):
            opponents_of(draw_pair, "nobody")


class TestGenerators:
    def test_all_draws(self):
        t = generate_round_robin(4, rule="draw")
        assert all(m == Fraction(3, 2) for _, m in scores(t).values())

    def test_round_robin_deterministic(self):
        assert generate_round_robin(12, seed=5) == generate_round_robin(12, seed=5)
        assert generate_round_robin(12, seed=5) != generate_round_robin(12, seed=6)

    def test_round_robin_rejects_small(self):
        with pytest.raises(ValueError):
            generate_round_robin(1)

    def test_pairing_shape(self):
        t = generate_random_pairing(18, 9, seed=1)
        assert set(t.games_played) == {9}
        assert len(t.games) == 81

    def test_pairing_minimal(self):
        t = generate_random_pairing(2, 1, seed=0)
        assert len(t.games) == 1

    def test_pairing_deterministic(self):
        assert generate_random_pairing(10, 4, seed=9) == generate_random_pairing(10, 4, seed=9)

    @pytest.mark.parametrize("n, rounds", [(1, 3), (4, 0), (5, 1)])
    def test_pairing_rejects(self, n, rounds):
        with pytest.raises(ValueError):
            generate_random_pairing(n, rounds)

    def test_odd_pairing_byes(self):
        t = generate_random_pairing(7, 4, seed=2)
        assert validate(t) == []
        assert max(t.games_played) <= 4
        assert len(t.games) == 4 * 3


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 30),
    rounds=st.integers(2, 9),
    seed=st.integers(0, 10**6),
    rule=st.sampled_from(["elo", "draw", "random"]),
)
def test_generated_tournaments_are_valid(n, rounds, seed, rule):
    for t in (generate_round_robin(n, seed, rule), generate_random_pairing(n, rounds, seed, rule)):
        assert validate(t) == []
        assert sum(t.points) == len(t.games)
        assert sum(sum(opponents_of(t, pid).values()) for pid in t.ids) == 2 * len(t.games)
        assert all(0 <= m <= k for k, m in scores(t).values())
