"""CSV ingestion and report emission.

File formats (UTF-8, LF line endings, header row required)::

    players.csv   id,name,rating        rating may be blank
    games.csv     a,b,score_a           score of player a; b gets 1 - score_a
    ratings.csv   id,rating             rating vectors for ``verify``

Reports are JSON (full precision, ``{"meta": ..., "rows": [...]}``), CSV or
Markdown (ratings rounded half away from zero).
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .equilibrium import EquilibriumResult, verify_equilibrium
from .rating import DEFAULT_CPR, DEFAULT_ELO, ClampBounds, CprSurrogateParams, EloParams, compute_c
from .tournament import GameRecord, Player, PlayerId, RatingVector, Tournament, check

PLAYER_COLUMNS = ("id", "name", "rating")
GAME_COLUMNS = ("a", "b", "score_a")
RATING_COLUMNS = ("id", "rating")
REPORT_FORMATS = ("json", "csv", "markdown")


@dataclass(frozen=True)
class ParseIssue:
    line: int
    column: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}" + (f", column {self.column!r}" if self.column else "")
        return f"{where}: {self.message}"


class ParseError(ValueError):
    def __init__(self, issues: list[ParseIssue], source: str = ""):
        self.issues = issues
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(map(str, issues)))


@dataclass(frozen=True)
class PlayerRow:
    id: str
    name: str
    rating: float | None


@dataclass(frozen=True)
class GameRow:
    a: str
    b: str
    score_a: Fraction


@dataclass(frozen=True)
class PlayersFile:
    rows: tuple[PlayerRow, ...]


@dataclass(frozen=True)
class GamesFile:
    rows: tuple[GameRow, ...]


def _records(text: str, required: tuple[str, ...]):
    """Yield (line number, row dict) after checking the header."""
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames
    if not header:
        raise ParseError([ParseIssue(1, "", "missing header row")])
    header = [h.strip() for h in header]
    reader.fieldnames = header
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError([ParseIssue(1, c, "missing column") for c in missing])
    for row in reader:
        if not any((v or "").strip() for k, v in row.items() if k is not None):
            continue
        yield reader.line_num, row


def _field(row, col):
    value = row.get(col)
    return "" if value is None else value.strip()


def _parse_rating(text: str) -> float:
    value = float(text)
    if not math.isfinite(value) or value < 0:
        raise ValueError("must be a finite non-negative number")
    return value


def parse_players(text: str) -> PlayersFile:
    rows, issues, seen = [], [], {}
    for line, row in _records(text, ("id", "name")):
        pid = _field(row, "id")
        if not pid:
            issues.append(ParseIssue(line, "id", "empty id"))
            continue
        if pid in seen:
            issues.append(ParseIssue(line, "id", f"duplicate id {pid!r} (first on line {seen[pid]})"))
            continue
        seen[pid] = line
        raw = _field(row, "rating")
        rating = None
        if raw:
            try:
                rating = _parse_rating(raw)
            except ValueError as exc:
                issues.append(ParseIssue(line, "rating", f"bad rating {raw!r}: {exc}"))
                continue
        rows.append(PlayerRow(pid, _field(row, "name"), rating))
    if issues:
        raise ParseError(issues)
    return PlayersFile(tuple(rows))


def parse_score(text: str) -> Fraction:
    score = Fraction(text)
    if not 0 <= score <= 1:
        raise ValueError("out of [0, 1]")
    return score


def parse_games(text: str) -> GamesFile:
    rows, issues = [], []
    for line, row in _records(text, GAME_COLUMNS):
        a, b, raw = _field(row, "a"), _field(row, "b"), _field(row, "score_a")
        if not a or not b:
            issues.append(ParseIssue(line, "a" if not a else "b", "empty player id"))
            continue
        if a == b:
            issues.append(ParseIssue(line, "b", f"self-play: {a!r} against itself"))
            continue
        try:
            score = parse_score(raw)
        except (ValueError, ZeroDivisionError) as exc:
            issues.append(ParseIssue(line, "score_a", f"bad score {raw!r}: {exc}"))
            continue
        rows.append(GameRow(a, b, score))
    if issues:
        raise ParseError(issues)
    return GamesFile(tuple(rows))


def parse_ratings(text: str) -> dict[str, float]:
    """Rating vector from a ``id,rating`` CSV or from a JSON report (its ``ppr`` column)."""
    stripped = text.lstrip("﻿").lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        return {str(row["id"]): float(row["ppr"]) for row in doc["rows"]}
    out, issues = {}, []
    for line, row in _records(text, RATING_COLUMNS):
        pid, raw = _field(row, "id"), _field(row, "rating")
        if pid in out:
            issues.append(ParseIssue(line, "id", f"duplicate id {pid!r}"))
            continue
        try:
            out[pid] = _parse_rating(raw)
        except ValueError as exc:
            issues.append(ParseIssue(line, "rating", f"bad rating {raw!r}: {exc}"))
    if issues:
        raise ParseError(issues)
    return out


def load_tournament(players: PlayersFile, games: GamesFile, default_rating: float | None = None) -> Tournament:
    """Build and validate a tournament.

    Raises:
        TournamentValidationError: carrying the full violation list.
    """
    t = Tournament(
        tuple(Player(r.id, r.name, r.rating) for r in players.rows),
        tuple(GameRecord(g.a, g.b, g.score_a) for g in games.rows),
        default_rating=default_rating,
    )
    return check(t)


# --- writers ----------------------------------------------------------------


def format_score(value: Fraction) -> str:
    """Shortest exact decimal for terminating fractions, else 12 significant digits."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    for prime in (2, 5):
        while den % prime == 0:
            den //= prime
    if den != 1:
        return f"{float(value):.12g}"
    digits = 0
    while (value * 10**digits).denominator != 1:
        digits += 1
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled.numerator), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _rating_text(r: float | None) -> str:
    if r is None:
        return ""
    return str(int(r)) if float(r).is_integer() else repr(float(r))


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def format_players(t: Tournament) -> str:
    return _write_csv(PLAYER_COLUMNS, [(p.id, p.name, _rating_text(p.rating)) for p in t.players])


def format_games(t: Tournament) -> str:
    return _write_csv(GAME_COLUMNS, [(g.a, g.b, format_score(g.score_a)) for g in t.games])


def format_ratings(x: Mapping[PlayerId, float]) -> str:
    return _write_csv(RATING_COLUMNS, [(pid, repr(float(v))) for pid, v in x.items()])


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def report_rows(
    result: EquilibriumResult,
    tpr_baseline: Mapping[PlayerId, float],
    t: Tournament,
    p: EloParams = DEFAULT_ELO,
    b: ClampBounds | None = None,
    c: CprSurrogateParams = DEFAULT_CPR,
) -> list[dict]:
    """Rows sorted by points, then PPR (both descending), then id."""
    if b is None:
        b = ClampBounds(*result.clamp)
    t.to_array(result.ratings)
    errors = verify_equilibrium(t, result.ratings, p, b, c).prediction_errors
    rows = []
    for pid, player, k, m in zip(t.ids, t.players, t.games_played, t.points):
        rows.append(
            {
                "id": pid,
                "name": player.name,
                "rating": player.rating,
                "games": int(k),
                "points": m,
                "tpr": float(tpr_baseline[pid]),
                "ppr": float(result.ratings[pid]),
                "prediction_error": float(errors[pid]),
            }
        )
    # PPRs equal up to solver noise count as tied so the id decides.
    rows.sort(key=lambda r: (-r["points"], -round(r["ppr"], 6), str(r["id"])))
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank
    return rows


def report_meta(result: EquilibriumResult, t: Tournament, c_value: float | None, extra: Mapping | None = None) -> dict:
    meta = {
        "tool": "prerating",
        "version": __version__,
        "tournament": t.name,
        "players": t.n,
        "games": len(t.games),
        "init_mode": result.init_mode,
        "average_rating": result.start_average,
        "c": c_value,
        "clamp_lo": result.clamp[0],
        "clamp_hi": result.clamp[1],
        "iterations": result.iterations,
        "residual": result.residual,
        "converged": result.converged,
        "diagnosis": result.diagnosis,
        "active_clamps": [[str(pid), side] for pid, side in result.active_clamps],
    }
    if extra:
        meta.update(extra)
    return meta


def emit_report(
    result: EquilibriumResult,
    tpr_baseline: Mapping[PlayerId, float],
    t: Tournament,
    fmt: str = "json",
    p: EloParams = DEFAULT_ELO,
    c: CprSurrogateParams = DEFAULT_CPR,
    extra_meta: Mapping | None = None,
) -> str:
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; choose from {REPORT_FORMATS}")
    rows = report_rows(result, tpr_baseline, t, p, None, c)
    try:
        c_value = compute_c(t)
    except ValueError:
        c_value = None
    meta = report_meta(result, t, c_value, extra_meta)

    if fmt == "json":
        doc = {
            "meta": meta,
            "rows": [
                {
                    "rank": r["rank"],
                    "id": r["id"],
                    "name": r["name"],
                    "rating": r["rating"],
                    "games": r["games"],
                    "points": float(r["points"]),
                    "tpr": r["tpr"],
                    "ppr": r["ppr"],
                    "prediction_error": r["prediction_error"],
                }
                for r in rows
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    table = [
        (
            r["rank"],
            r["id"],
            r["name"],
            _rating_text(None if r["rating"] is None else round_half_away(r["rating"])),
            r["games"],
            format_score(r["points"]),
            round_half_away(r["tpr"]),
            round_half_away(r["ppr"]),
            f"{r['prediction_error']:.2e}",
        )
        for r in rows
    ]
    if fmt == "csv":
        return _write_csv(("rank", "id", "name", "rating", "games", "points", "tpr", "ppr", "prediction_error"), table)

    lines = [
        "| Rank | Id | Name | Rtg | Games | Pts | TPR | PPR | Pred. error |",
        "|---:|---|---|---:|---:|---:|---:|---:|---:|",
    ]
    lines += ["| " + " | ".join(str(cell) for cell in row) + " |" for row in table]
    lines.append("")
    status = "converged" if meta["converged"] else f"NOT converged ({meta['diagnosis']})"
    lines.append(
        f"init: {meta['init_mode']} (average {meta['average_rating']:.1f}); "
        f"iterations: {meta['iterations']}; residual: {meta['residual']:.3e}; {status}"
    )
    if meta["active_clamps"]:
        lines.append("active clamps: " + ", ".join(f"{pid} ({side})" for pid, side in meta["active_clamps"]))
    return "\n".join(lines) + "\n"


def read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_files(players_path, games_path, default_rating: float | None = None) -> Tournament:
    """Parse and validate a players/games pair; parse errors name the offending file."""
    texts = {}
    for label, path in (("players", players_path), ("games", games_path)):
        texts[label] = read_text(path)
    try:
        players = parse_players(texts["players"])
    except ParseError as exc:
        raise ParseError(exc.issues, str(players_path)) from None
    try:
        games = parse_games(texts["games"])
    except ParseError as exc:
        raise ParseError(exc.issues, str(games_path)) from None
    return load_tournament(players, games, default_rating)


def vector_from_ratings(t: Tournament, ratings: Mapping[str, float]) -> RatingVector:
    """Key a parsed ratings file by the tournament's own ids (which may not be strings)."""
    by_text = {str(pid): pid for pid in t.ids}
    return {by_text.get(k, k): v for k, v in ratings.items()}
