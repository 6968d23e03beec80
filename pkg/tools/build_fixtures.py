"""Regenerate the bundled fixture files under src/prerating/data/.

    python tools/build_fixtures.py
"""

import json
import os

from prerating.fixtures import (
    INTERZONAL_1970,
    INTERZONAL_AVERAGE,
    INTERZONAL_UNPLAYED,
    build_interzonal,
)
from prerating.io import format_games, format_players

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "src", "prerating", "data")

# Swiss events, 18 players, 9 rounds: (name, rating, points, TPR, PPR) as published.
PALMA_2017 = [
    ("Aronian", 2801, "5.5", 2821, 2857),
    ("Jakovenko", 2721, "5.5", 2824, 2840),
    ("Nakamura", 2780, "5", 2788, 2830),
    ("Svidler", 2763, "5", 2779, 2815),
    ("Tomashevsky", 2702, "5", 2788, 2813),
    ("Harikrishna", 2738, "5", 2764, 2789),
    ("Ding Liren", 2774, "5", 2768, 2783),
    ("Rapport", 2692, "5", 2758, 2743),
    ("Radjabov", 2741, "5", 2760, 2743),
    ("Vachier-Lagrave", 2796, "4.5", 2741, 2768),
    ("Eljanov", 2707, "4.5", 2724, 2706),
    ("Inarkiev", 2683, "4.5", 2735, 2699),
    ("Giri", 2762, "4", 2696, 2695),
    ("Vallejo Pons", 2705, "4", 2682, 2643),
    ("Li Chao", 2741, "4", 2660, 2623),
    ("Riazantsev", 2651, "3.5", 2641, 2622),
    ("Hammer", 2629, "3", 2590, 2562),
    ("Gelfand", 2719, "3", 2582, 2555),
]
SHARJAH_2017 = [
    ("Vachier-Lagrave", 2796, "5.5", 2823, 2860),
    ("Grischuk", 2742, "5.5", 2828, 2852),
    ("Mamedyarov", 2766, "5.5", 2813, 2851),
    ("Nepomniachtchi", 2749, "5", 2764, 2795),
    ("Nakamura", 2785, "5", 2776, 2812),
    ("Jakovenko", 2709, "5", 2781, 2818),
    ("Adams", 2751, "5", 2776, 2795),
    ("Ding", 2760, "5", 2748, 2753),
    ("Eljanov", 2759, "4.5", 2693, 2675),
    ("Rapport", 2692, "4.5", 2726, 2694),
    ("Li Chao", 2720, "4.5", 2722, 2700),
    ("Vallejo Pons", 2709, "4.5", 2714, 2688),
    ("Hou Yifan", 2651, "4", 2685, 2689),
    ("Aronian", 2785, "4", 2696, 2693),
    ("Salem", 2656, "3.5", 2624, 2592),
    ("Tomashevsky", 2711, "3.5", 2629, 2591),
    ("Hammer", 2628, "3.5", 2648, 2617),
    ("Riazantsev", 2671, "3", 2590, 2560),
]
NO_PAIRINGS = (
    "Round-by-round pairings were not available when this fixture was compiled; "
    "add games.csv (a,b,score_a) from the official crosstable to enable the golden test."
)


def write(name, files, meta):
    d = os.path.join(DATA, name)
    os.makedirs(d, exist_ok=True)
    for fname, text in files.items():
        with open(os.path.join(d, fname), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    with open(os.path.join(d, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(meta, indent=2, ensure_ascii=False) + "\n")


def interzonal():
    t = build_interzonal()
    meta = {
        "name": "interzonal_1970",
        "event": "Palma de Mallorca Interzonal 1970 (single round-robin)",
        "players": t.n,
        "games": len(t.games),
        "default_rating": INTERZONAL_AVERAGE,
        "average_rating": INTERZONAL_AVERAGE,
        "init": "average",
        "synthesized": True,
        "games_note": (
            "Results are synthesized to realize the published points exactly; any realization "
            "with the same per-player points and pairings gives the same equilibrium. The printed "
            "points total 275, so one pairing is left unplayed: "
            + ", ".join("-".join(p) for p in INTERZONAL_UNPLAYED)
            + " (the only single omission that reproduces the published PPR column within 1 point)."
        ),
        "unplayed_pairings": [list(p) for p in INTERZONAL_UNPLAYED],
        "expected": [
            {"id": str(i), "name": name, "points": float(pts), "ppr": ppr,
             "provenance": "published PPR table, Interzonal 1970"}
            for i, (name, pts, ppr) in enumerate(INTERZONAL_1970, start=1)
        ],
        "excluded_rows": [],
    }
    write("interzonal_1970", {"players.csv": format_players(t), "games.csv": format_games(t)}, meta)


def swiss(name, event, rows):
    players = "id,name,rating\n" + "".join(f"{i},{n},{r}\n" for i, (n, r, *_ ) in enumerate(rows, start=1))
    meta = {
        "name": name,
        "event": event,
        "players": len(rows),
        "games": None,
        "rounds": 9,
        "init": "average",
        "synthesized": False,
        "games_note": NO_PAIRINGS,
        "expected": [
            {"id": str(i), "name": n, "rating": r, "points": float(pts), "tpr": tpr, "ppr": ppr,
             "provenance": f"published TPR/PPR table, {event}"}
            for i, (n, r, pts, tpr, ppr) in enumerate(rows, start=1)
        ],
        "excluded_rows": [
            {"id": str(i), "name": n, "reason": "no pairing record"} for i, (n, *_ ) in enumerate(rows, start=1)
        ],
    }
    write(name, {"players.csv": players}, meta)


if __name__ == "__main__":
    interzonal()
    swiss("palma_2017", "FIDE Grand Prix 2017, Palma de Mallorca", PALMA_2017)
    swiss("sharjah_2017", "FIDE Grand Prix 2017, Sharjah", SHARJAH_2017)
