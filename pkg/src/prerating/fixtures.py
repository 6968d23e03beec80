"""Bundled tournament fixtures and the score-realization helper used to build them.

Fixtures live under ``prerating/data/<name>/`` as ``players.csv``, an optional
``games.csv`` and ``manifest.json``.  The manifest carries the published
columns each golden test compares against.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from fractions import Fraction
from importlib import resources

import numpy as np
from scipy.sparse import csr_array
from scipy.sparse.csgraph import maximum_flow

from .tournament import GameRecord, Player, PlayerId, Tournament

FIXTURES = ("interzonal_1970", "palma_2017", "sharjah_2017")

# (name, points, published PPR) in published order.
INTERZONAL_1970 = (
    ("Fischer", "18.5", 2805),
    ("Larsen", "15", 2669),
    ("Geller", "15", 2669),
    ("Huebner", "15", 2669),
    ("Taimanov", "14", 2636),
    ("Uhlmann", "14", 2636),
    ("Portisch", "13.5", 2620),
    ("Smyslov", "13.5", 2620),
    ("Polugaevsky", "13", 2604),
    ("Gligoric", "13", 2604),
    ("Panno", "12.5", 2588),
    ("Mecking", "12.5", 2588),
    ("Hort", "11.5", 2556),
    ("Ivkov", "10.5", 2525),
    ("Suttles", "10", 2509),
    ("Minic", "10", 2509),
    ("Reshevsky", "9.5", 2493),
    ("Matulovic", "9", 2477),
    ("Addison", "9", 2477),
    ("Filip", "8.5", 2460),
    ("Naranja", "8.5", 2460),
    ("Ujtumen", "8.5", 2460),
    ("Rubinetti", "5", 2350),
    ("Jimenez", "5.5", 2372),
)
INTERZONAL_AVERAGE = 2557.0
# The printed points total 275, one short of a full 24-player round-robin.
# Dropping this pairing is the only single omission that reproduces every
# published PPR to within one point.
INTERZONAL_UNPLAYED = (("23", "24"),)


class UnrealizableScores(ValueError):
    pass


def realize_scores(
    ids: Sequence[PlayerId],
    points: Sequence[Fraction],
    pairings: Sequence[tuple[PlayerId, PlayerId]],
) -> list[GameRecord]:
    """Assign half-point results to ``pairings`` so each player ends on ``points``.

    Solved as an integer max-flow in half-point units: every game supplies
    two units that go to either player, and each player absorbs exactly
    ``2 * points``.
    """
    units = {pid: 2 * Fraction(m) for pid, m in zip(ids, points)}
    for pid, u in units.items():
        if u.denominator != 1:
            raise UnrealizableScores(f"{pid!r}: {points} is not a multiple of 1/2")
    if sum(units.values()) != 2 * len(pairings):
        raise UnrealizableScores(f"points total {sum(units.values()) / 2} but {len(pairings)} games")

    # nodes: 0 source, 1..G games, then players, then the sink
    n_games, pos = len(pairings), {pid: i for i, pid in enumerate(ids)}
    sink = n_games + len(ids) + 1
    rows, cols, caps = [], [], []
    for n, (a, b) in enumerate(pairings, start=1):
        rows += [0, n, n]
        cols += [n, n_games + 1 + pos[a], n_games + 1 + pos[b]]
        caps += [2, 2, 2]
    for pid, u in units.items():
        rows.append(n_games + 1 + pos[pid])
        cols.append(sink)
        caps.append(int(u))
    graph = csr_array((np.array(caps, dtype=np.int32), (rows, cols)), shape=(sink + 1, sink + 1))
    result = maximum_flow(graph, 0, sink, method="dinic")
    if result.flow_value != 2 * n_games:
        raise UnrealizableScores("no assignment of results reaches these scores")
    flow = result.flow.tocsr()
    return [
        GameRecord(a, b, Fraction(int(flow[n, n_games + 1 + pos[a]]), 2))
        for n, (a, b) in enumerate(pairings, start=1)
    ]


def build_interzonal() -> Tournament:
    """Synthesized round-robin whose points match the published 1970 Interzonal table."""
    ids = [str(i) for i in range(1, len(INTERZONAL_1970) + 1)]
    skip = {frozenset(p) for p in INTERZONAL_UNPLAYED}
    pairings = [
        (a, b)
        for i, a in enumerate(ids)
        for b in ids[i + 1 :]
        if frozenset((a, b)) not in skip
    ]
    points = [Fraction(pts) for _, pts, _ in INTERZONAL_1970]
    games = realize_scores(ids, points, pairings)
    players = tuple(Player(pid, name) for pid, (name, _, _) in zip(ids, INTERZONAL_1970))
    return Tournament(players, tuple(games), default_rating=INTERZONAL_AVERAGE, name="interzonal_1970")


def _data(name: str):
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files("prerating").joinpath("data", name)


def manifest(name: str) -> dict:
    return json.loads(_data(name).joinpath("manifest.json").read_text(encoding="utf-8"))


def fixture_text(name: str, filename: str) -> str | None:
    path = _data(name).joinpath(filename)
    return path.read_text(encoding="utf-8") if path.is_file() else None


def load_fixture(name: str) -> tuple[Tournament | None, dict]:
    """Tournament and manifest for a bundled fixture.

    The tournament is ``None`` when the fixture ships no game records.
    """
    from .io import load_tournament, parse_games, parse_players

    meta = manifest(name)
    games = fixture_text(name, "games.csv")
    if games is None:
        return None, meta
    players = parse_players(fixture_text(name, "players.csv"))
    t = load_tournament(players, parse_games(games), meta.get("default_rating"))
    return Tournament(t.players, t.games, t.default_rating, name=name), meta
