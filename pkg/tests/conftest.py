from fractions import Fraction

import pytest

from prerating.fixtures import load_fixture
from prerating.tournament import GameRecord, Player, Tournament

ACCEPTANCE = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  -- {detail}" if detail else ""))


def make_round_robin(n, result, rating=2400.0, default=None):
    """Round-robin among p0..p{n-1}; ``result(i, j)`` is p_i's score against p_j (i < j)."""
    players = tuple(Player(f"p{i}", f"P{i}", rating) for i in range(n))
    games = tuple(
        GameRecord(f"p{i}", f"p{j}", Fraction(result(i, j))) for i in range(n) for j in range(i + 1, n)
    )
    return Tournament(players, games, default_rating=default)


@pytest.fixture
def draw_pair():
    return Tournament(
        (Player("a", "A", 2000.0), Player("b", "B", 2200.0)),
        (GameRecord("a", "b", Fraction(1, 2)),),
    )


@pytest.fixture(scope="session")
def interzonal():
    t, meta = load_fixture("interzonal_1970")
    return t, meta
