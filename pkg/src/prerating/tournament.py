"""Tournament model: players, game records, derived scores and generators.

Scores are kept as :class:`fractions.Fraction` so that the zero and perfect
score tests (``m == 0``, ``m == k``) are exact.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

PlayerId = Hashable
RatingVector = dict  # PlayerId -> float, non-negative Elo points

RESULT_RULES = ("elo", "draw", "random")


class TournamentError(ValueError):
    """Raised for operations on players or ratings the tournament does not know."""


class TournamentValidationError(TournamentError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid tournament: {lines}")


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class Player:
    id: PlayerId
    name: str = ""
    rating: float | None = None


@dataclass(frozen=True)
class GameRecord:
    """One game; ``b`` receives ``1 - score_a``."""

    a: PlayerId
    b: PlayerId
    score_a: Fraction

    def __post_init__(self):
        if not isinstance(self.score_a, Fraction):
            object.__setattr__(self, "score_a", to_fraction(self.score_a))

    @property
    def score_b(self) -> Fraction:
        return 1 - self.score_a


def to_fraction(value) -> Fraction:
    """Exact conversion; floats go through their shortest repr so 0.1 stays 1/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite score {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class Tournament:
    players: tuple[Player, ...]
    games: tuple[GameRecord, ...]
    default_rating: float | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "games", tuple(self.games))

    @cached_property
    def ids(self) -> tuple[PlayerId, ...]:
        return tuple(p.id for p in self.players)

    @cached_property
    def index(self) -> dict[PlayerId, int]:
        return {pid: i for i, pid in enumerate(self.ids)}

    @property
    def n(self) -> int:
        return len(self.players)

    def player(self, pid: PlayerId) -> Player:
        try:
            return self.players[self.index[pid]]
        except KeyError:
            raise TournamentError(f"no such player: {pid!r}") from None

    @cached_property
    def slots(self) -> tuple[np.ndarray, np.ndarray]:
        """(owner, opponent) index arrays with one entry per player per game."""
        a = np.fromiter((self.index[g.a] for g in self.games), dtype=np.intp, count=len(self.games))
        b = np.fromiter((self.index[g.b] for g in self.games), dtype=np.intp, count=len(self.games))
        return np.concatenate([a, b]), np.concatenate([b, a])

    @cached_property
    def games_played(self) -> np.ndarray:
        owner, _ = self.slots
        return np.bincount(owner, minlength=self.n)

    @cached_property
    def points(self) -> tuple[Fraction, ...]:
        totals = [Fraction(0)] * self.n
        for g in self.games:
            totals[self.index[g.a]] += g.score_a
            totals[self.index[g.b]] += g.score_b
        return tuple(totals)

    def resolved_rating(self, pid: PlayerId) -> float | None:
        r = self.player(pid).rating
        return self.default_rating if r is None else r

    def unrated(self) -> list[PlayerId]:
        return [p.id for p in self.players if self.resolved_rating(p.id) is None]

    def initial_ratings(self) -> np.ndarray:
        missing = self.unrated()
        if missing:
            raise TournamentError(
                f"no initial rating and no default rating for players: {', '.join(map(str, missing))}"
            )
        return np.array([self.resolved_rating(pid) for pid in self.ids], dtype=float)

    def to_array(self, x: Mapping[PlayerId, float]) -> np.ndarray:
        """Order a rating vector by player; it must cover exactly this tournament's players."""
        keys = set(x)
        missing = [pid for pid in self.ids if pid not in keys]
        extra = keys - set(self.ids)
        if missing or extra:
            parts = []
            if missing:
                parts.append("missing " + ", ".join(map(str, missing)))
            if extra:
                parts.append("unknown " + ", ".join(sorted(map(str, extra))))
            raise TournamentError("rating vector does not match players: " + "; ".join(parts))
        arr = np.array([float(x[pid]) for pid in self.ids], dtype=float)
        bad = [pid for pid, v in zip(self.ids, arr) if not (math.isfinite(v) and v >= 0)]
        if bad:
            raise TournamentError("ratings must be finite and non-negative: " + ", ".join(map(str, bad)))
        return arr

    def to_vector(self, arr: Iterable[float]) -> RatingVector:
        return {pid: float(v) for pid, v in zip(self.ids, arr)}


def validate(t: Tournament) -> list[Violation]:
    """Return every invariant violation; an empty list means the tournament is valid."""
    out: list[Violation] = []
    counts = Counter(p.id for p in t.players)
    for pid, c in counts.items():
        if c > 1:
            out.append(Violation("duplicate player id", f"{pid!r} appears {c} times"))
    for p in t.players:
        if p.rating is not None and not (math.isfinite(p.rating) and p.rating >= 0):
            out.append(Violation("negative rating", f"{p.id!r} has rating {p.rating!r}"))
    if t.default_rating is not None and not (math.isfinite(t.default_rating) and t.default_rating >= 0):
        out.append(Violation("negative rating", f"default rating {t.default_rating!r}"))

    known = set(counts)
    played: Counter = Counter()
    for n, g in enumerate(t.games, start=1):
        for pid in (g.a, g.b):
            if pid not in known:
                out.append(Violation("unknown player", f"game {n}: {pid!r}"))
        if g.a == g.b:
            out.append(Violation("self-play", f"game {n}: {g.a!r} against itself"))
        if not 0 <= g.score_a <= 1:
            out.append(Violation("score out of range", f"game {n}: score {g.score_a} not in [0, 1]"))
        played[g.a] += 1
        played[g.b] += 1
    for p in t.players:
        if played[p.id] == 0:
            out.append(Violation("player with zero games", f"{p.id!r}"))
    return out


def check(t: Tournament) -> Tournament:
    violations = validate(t)
    if violations:
        raise TournamentValidationError(violations)
    return t


def opponents_of(t: Tournament, pid: PlayerId) -> Counter:
    """Opponents of ``pid`` as a multiset (repeat pairings keep their multiplicity)."""
    if pid not in t.index:
        raise TournamentError(f"no such player: {pid!r}")
    opp: Counter = Counter()
    for g in t.games:
        if g.a == pid:
            opp[g.b] += 1
        elif g.b == pid:
            opp[g.a] += 1
    return opp


def scores(t: Tournament) -> dict[PlayerId, tuple[int, Fraction]]:
    return {pid: (int(k), m) for pid, k, m in zip(t.ids, t.games_played, t.points)}


# --- generators -----------------------------------------------------------


def _player_ids(n: int) -> list[str]:
    width = len(str(n))
    return [f"p{i:0{width}d}" for i in range(1, n + 1)]


def _draw_result(rule: str, ra: float, rb: float, rng: random.Random) -> Fraction:
    if rule == "draw":
        return Fraction(1, 2)
    if rule == "random":
        return rng.choice((Fraction(0), Fraction(1, 2), Fraction(1)))
    # Win/draw/loss probabilities whose mean is the Elo expectation.
    e = 1.0 / (1.0 + 10.0 ** ((rb - ra) / 400.0))
    p_draw = min(0.3, 2 * min(e, 1 - e))
    u = rng.random()
    if u < e - p_draw / 2:
        return Fraction(1)
    if u < e + p_draw / 2:
        return Fraction(1, 2)
    return Fraction(0)


def _rated_players(n: int, rng: random.Random, rating_range: tuple[float, float]) -> list[Player]:
    lo, hi = rating_range
    return [Player(pid, pid.upper(), float(round(rng.uniform(lo, hi)))) for pid in _player_ids(n)]


def generate_round_robin(
    n: int,
    seed: int = 0,
    rule: str = "elo",
    rating_range: tuple[float, float] = (2000.0, 2800.0),
) -> Tournament:
    """Single round-robin on ``n`` seeded-random rated players."""
    if n < 2:
        raise ValueError(f"round-robin needs at least 2 players, got {n}")
    if rule not in RESULT_RULES:
        raise ValueError(f"unknown result rule {rule!r}; choose from {RESULT_RULES}")
    rng = random.Random(seed)
    players = _rated_players(n, rng, rating_range)
    games = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = players[i], players[j]
            games.append(GameRecord(a.id, b.id, _draw_result(rule, a.rating, b.rating, rng)))
    return Tournament(tuple(players), tuple(games), name=f"round-robin n={n} seed={seed}")


def generate_random_pairing(
    n: int,
    rounds: int,
    seed: int = 0,
    rule: str = "elo",
    rating_range: tuple[float, float] = (2000.0, 2800.0),
) -> Tournament:
    """Random pairings, one shuffled perfect matching per round.

    With odd ``n`` one player sits out each round; byes rotate so no player
    is left without games unless ``rounds`` is too small to reach everyone.
    """
    if n < 2:
        raise ValueError(f"pairing needs at least 2 players, got {n}")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if n % 2 and rounds < 2:
        raise ValueError("odd n needs at least 2 rounds so the bye player plays")
    if rule not in RESULT_RULES:
        raise ValueError(f"unknown result rule {rule!r}; choose from {RESULT_RULES}")
    rng = random.Random(seed)
    players = _rated_players(n, rng, rating_range)
    byes: Counter = Counter()
    games = []
    for _ in range(rounds):
        order = players[:]
        rng.shuffle(order)
        if n % 2:
            # Fewest byes so far sits out; ties broken by the shuffle.
            bye = min(order, key=lambda p: byes[p.id])
            byes[bye.id] += 1
            order.remove(bye)
        for a, b in zip(order[::2], order[1::2]):
            games.append(GameRecord(a.id, b.id, _draw_result(rule, a.rating, b.rating, rng)))
    return Tournament(tuple(players), tuple(games), name=f"pairing n={n} rounds={rounds} seed={seed}")
