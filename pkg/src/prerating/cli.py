"""Command-line interface.

Exit codes: 0 converged / verified, 1 input error, 2 numerical non-convergence
(or a failed verification).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .equilibrium import (
    CLUSTER_THRESHOLD,
    INIT_MODES,
    UPDATE_SCHEMES,
    EquilibriumConfig,
    explore_equilibria,
    initial_vector,
    solve_equilibrium,
    verify_equilibrium,
)
from .fixtures import FIXTURES, fixture_text, load_fixture, manifest
from .io import (
    REPORT_FORMATS,
    ParseError,
    emit_report,
    format_games,
    format_players,
    load_files,
    parse_ratings,
    read_text,
    report_rows,
    round_half_away,
    vector_from_ratings,
    write_text,
)
from .rating import ClampBounds, CprSurrogateParams, EloParams, tpr_map
from .tournament import (
    RESULT_RULES,
    Tournament,
    TournamentError,
    generate_random_pairing,
    generate_round_robin,
)

log = logging.getLogger("prerating")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2

_ELO = EloParams()
_EQ = EquilibriumConfig()
_CPR = CprSurrogateParams()


class InputError(Exception):
    pass


# --- argument groups ------------------------------------------------------------


def _add_input(p):
    g = p.add_argument_group("tournament input")
    g.add_argument("--players", help="players CSV (id,name,rating)")
    g.add_argument("--games", help="games CSV (a,b,score_a)")
    g.add_argument("--fixture", choices=FIXTURES, help="use a bundled fixture instead of files")
    g.add_argument("--default-rating", type=float, default=None,
                   help="rating for players without one (fixtures supply their own)")


def _add_model(p):
    g = p.add_argument_group("rating model")
    g.add_argument("--scale", type=float, default=_ELO.scale, help="Elo scale")
    g.add_argument("--base", type=float, default=_ELO.base, help="Elo base")
    g.add_argument("--root-tol", type=float, default=_ELO.root_tol, help="TPR root tolerance in score units")
    g.add_argument("--bracket-pad", type=float, default=_ELO.bracket_pad, help="initial root bracket padding")
    g.add_argument("--delta", type=float, default=_CPR.delta,
                   help="zero/perfect scores are solved as delta / k - delta")
    g.add_argument("--clamp-lo", type=float, default=0.0, help="lower rating clamp")
    g.add_argument("--clamp-hi", type=float, default=None,
                   help="upper rating clamp (default: largest opponent-rating sum c)")
    g.add_argument("--sup-tol", type=float, default=_EQ.sup_tol, help="fixed-point tolerance in rating points")


def _add_solver(p):
    g = p.add_argument_group("equilibrium iteration")
    g.add_argument("--init", choices=INIT_MODES, default=_EQ.init, help="starting vector")
    g.add_argument("--init-file", help="custom starting vector (id,rating CSV); overrides --init")
    g.add_argument("--damping", type=float, default=_EQ.damping, help="x <- (1-d) x + d TPR(x)")
    g.add_argument("--max-iters", type=int, default=_EQ.max_iters, help="iteration cap")
    g.add_argument("--scheme", choices=UPDATE_SCHEMES, default=_EQ.update_scheme, help="update order")
    g.add_argument("--threads", type=int, default=None, help="worker cap for parallel starts")


def _add_output(p):
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=REPORT_FORMATS, default="markdown", help="report format")
    g.add_argument("--out", help="write the report here instead of standard output")
    g.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="prerating",
        description="Tournament performance ratings and performance rating equilibria.",
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="solve for an equilibrium and write a report", formatter_class=fmt)
    _add_input(p)
    _add_model(p)
    _add_solver(p)
    _add_output(p)

    p = sub.add_parser("verify", help="check how well a rating vector predicts the scores", formatter_class=fmt)
    _add_input(p)
    _add_model(p)
    p.add_argument("--ratings", required=True, help="ratings CSV (id,rating) or a JSON report")
    p.add_argument("--format", choices=("markdown", "json"), default="markdown", help="report format")
    p.add_argument("--out", help="write the report here instead of standard output")

    p = sub.add_parser("simulate", help="generate a synthetic tournament and solve it", formatter_class=fmt)
    g = p.add_argument_group("generator")
    g.add_argument("--round-robin", type=int, metavar="N", help="single round-robin with N players")
    g.add_argument("--pairing", choices=("random",), help="random pairings (use with --n and --rounds)")
    g.add_argument("--n", type=int, help="players for --pairing")
    g.add_argument("--rounds", type=int, help="rounds for --pairing")
    g.add_argument("--seed", type=int, default=0, help="generator seed")
    g.add_argument("--result-rule", choices=RESULT_RULES, default="elo", help="how game results are drawn")
    g.add_argument("--write-tournament", metavar="DIR", help="save players.csv and games.csv to DIR")
    _add_model(p)
    _add_solver(p)
    _add_output(p)

    p = sub.add_parser("explore", help="solve from several starts and cluster the equilibria", formatter_class=fmt)
    _add_input(p)
    _add_model(p)
    _add_solver(p)
    p.add_argument("--start", action="append", default=[], metavar="SPEC",
                   help="average | initial | uniform:R | shift:D | file:PATH (repeatable)")
    p.add_argument("--random-starts", type=int, default=0, help="additional seeded random starts")
    p.add_argument("--seed", type=int, default=0, help="seed for random starts")
    p.add_argument("--threshold", type=float, default=CLUSTER_THRESHOLD,
                   help="results closer than this (sup-norm) share a cluster")
    p.add_argument("--format", choices=("markdown", "json"), default="markdown", help="report format")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")

    p = sub.add_parser("fixture", help="export a bundled fixture as CSV files", formatter_class=fmt)
    p.add_argument("name", choices=FIXTURES)
    p.add_argument("--out", required=True, metavar="DIR", help="directory for players.csv / games.csv / manifest.json")
    return parser


# --- helpers ----------------------------------------------------------------------


def _tournament(args) -> Tournament:
    if args.fixture:
        t, meta = load_fixture(args.fixture)
        if t is None:
            raise InputError(
                f"fixture {args.fixture!r} ships no game records: {meta.get('games_note', 'pairings unavailable')}"
            )
        if args.default_rating is not None:
            t = Tournament(t.players, t.games, args.default_rating, name=t.name)
        return t
    if not (args.players and args.games):
        raise InputError("pass --players and --games, or --fixture")
    t = load_files(args.players, args.games, args.default_rating)
    return Tournament(t.players, t.games, t.default_rating, name=os.path.basename(args.games))


def _model(args):
    p = EloParams(scale=args.scale, base=args.base, root_tol=args.root_tol, bracket_pad=args.bracket_pad)
    b = ClampBounds(lo=args.clamp_lo, hi=args.clamp_hi)
    c = CprSurrogateParams(delta=args.delta)
    return p, b, c


def _config(args, t: Tournament) -> EquilibriumConfig:
    init = args.init
    if args.init_file:
        init = vector_from_ratings(t, parse_ratings(read_text(args.init_file)))
    return EquilibriumConfig(
        init=init,
        damping=args.damping,
        sup_tol=args.sup_tol,
        max_iters=args.max_iters,
        update_scheme=args.scheme,
    )


def _emit(args, text: str) -> None:
    if args.out:
        write_text(args.out, text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _settings(args, p, c, cfg) -> dict:
    return {
        "damping": cfg.damping,
        "sup_tol": cfg.sup_tol,
        "max_iters": cfg.max_iters,
        "update_scheme": cfg.update_scheme,
        "delta": c.delta,
        "scale": p.scale,
        "base": p.base,
        "root_tol": p.root_tol,
    }


def _solve_and_report(args, t: Tournament) -> int:
    p, b, c = _model(args)
    cfg = _config(args, t)
    log.info("solving %s: %d players, %d games", t.name, t.n, len(t.games))
    result = solve_equilibrium(t, p, b, c, cfg)
    baseline = tpr_map(t, t.to_vector(t.initial_ratings()), p, b, c)
    text = emit_report(result, baseline, t, args.format, p, c, _settings(args, p, c, cfg))
    _emit(args, text)
    if args.figures:
        from .plots import render_report_figures

        rows = report_rows(result, baseline, t, p, b, c)
        for path in render_report_figures(args.figures, result, rows):
            log.info("wrote %s", path)
    if not result.converged:
        print(f"not converged after {result.iterations} iterations: {result.diagnosis} "
              f"(residual {result.residual:.3e})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# --- subcommands --------------------------------------------------------------------


def cmd_compute(args) -> int:
    return _solve_and_report(args, _tournament(args))


def cmd_verify(args) -> int:
    t = _tournament(args)
    p, b, c = _model(args)
    x = vector_from_ratings(t, parse_ratings(read_text(args.ratings)))
    try:
        t.to_array(x)
    except TournamentError as exc:
        raise InputError(f"{args.ratings}: {exc}") from None
    v = verify_equilibrium(t, x, p, b, c)
    ok = v.residual <= args.sup_tol
    if args.format == "json":
        doc = {
            "meta": {"residual": v.residual, "sup_tol": args.sup_tol, "verified": ok,
                     "max_interior_error": v.max_interior_error},
            "rows": [
                {"id": pid, "name": t.player(pid).name, "rating": x[pid], "points": float(m),
                 "expected": v.expected_scores[pid], "prediction_error": v.prediction_errors[pid],
                 "tpr": v.tpr[pid]}
                for pid, m in zip(t.ids, t.points)
            ],
        }
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    else:
        lines = ["| Id | Name | Rating | Pts | Expected | Pred. error | TPR |", "|---|---|---:|---:|---:|---:|---:|"]
        for pid, m in zip(t.ids, t.points):
            lines.append(
                f"| {pid} | {t.player(pid).name} | {round_half_away(x[pid])} | {float(m):g} | "
                f"{v.expected_scores[pid]:.4f} | {v.prediction_errors[pid]:.2e} | {round_half_away(v.tpr[pid])} |"
            )
        lines.append("")
        lines.append(f"residual: {v.residual:.3e} (tolerance {args.sup_tol:g}); "
                     f"{'equilibrium' if ok else 'NOT an equilibrium'}")
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_simulate(args) -> int:
    if args.round_robin is not None:
        if args.pairing:
            raise InputError("choose one of --round-robin and --pairing")
        t = generate_round_robin(args.round_robin, seed=args.seed, rule=args.result_rule)
    elif args.pairing:
        if args.n is None or args.rounds is None:
            raise InputError("--pairing random needs --n and --rounds")
        t = generate_random_pairing(args.n, args.rounds, seed=args.seed, rule=args.result_rule)
    else:
        raise InputError("pass --round-robin N or --pairing random --n N --rounds R")
    if args.write_tournament:
        os.makedirs(args.write_tournament, exist_ok=True)
        write_text(os.path.join(args.write_tournament, "players.csv"), format_players(t))
        write_text(os.path.join(args.write_tournament, "games.csv"), format_games(t))
    return _solve_and_report(args, t)


def _parse_start(spec: str, t: Tournament, args) -> dict:
    kind, _, value = spec.partition(":")
    if kind == "average":
        return initial_vector(t, EquilibriumConfig(init="average"))
    if kind == "initial":
        return initial_vector(t, EquilibriumConfig(init="initial_ratings"))
    if kind == "uniform":
        return {pid: float(value) for pid in t.ids}
    if kind == "shift":
        base = initial_vector(t, EquilibriumConfig(init="average"))
        return {pid: r + float(value) for pid, r in base.items()}
    if kind == "file":
        return vector_from_ratings(t, parse_ratings(read_text(value)))
    raise InputError(f"bad --start {spec!r}; use average, initial, uniform:R, shift:D or file:PATH")


def cmd_explore(args) -> int:
    t = _tournament(args)
    p, b, c = _model(args)
    cfg = _config(args, t)
    try:
        starts = [_parse_start(s, t, args) for s in args.start]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.random_starts:
        from .equilibrium import random_starts

        starts += random_starts(t, args.random_starts, args.seed)
    if not starts:
        starts = [initial_vector(t, cfg)]
    ex = explore_equilibria(t, p, b, c, starts, cfg, threshold=args.threshold, threads=args.threads)
    labels = list(args.start) + [f"random#{i}" for i in range(args.random_starts)]
    if len(labels) < len(ex.results):
        labels = ["default"]

    if args.format == "json":
        doc = {
            "meta": {"clusters": ex.n_clusters, "threshold": args.threshold,
                     "all_converged": all(r.converged for r in ex.results)},
            "runs": [
                {"start": lab, "cluster": cl, "converged": r.converged, "iterations": r.iterations,
                 "residual": r.residual, "diagnosis": r.diagnosis, "ratings": r.ratings}
                for lab, cl, r in zip(labels, ex.labels, ex.results)
            ],
            "distances": ex.distances.tolist(),
        }
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    else:
        lines = ["| Start | Cluster | Converged | Iterations | Residual | Mean rating |",
                 "|---|---:|---|---:|---:|---:|"]
        for lab, cl, r in zip(labels, ex.labels, ex.results):
            mean = float(np.mean(list(r.ratings.values())))
            lines.append(f"| {lab} | {cl} | {'yes' if r.converged else 'no'} | {r.iterations} | "
                         f"{r.residual:.3e} | {mean:.2f} |")
        lines += ["", f"distinct equilibria: {ex.n_clusters} (threshold {args.threshold:g})", "",
                  "pairwise sup-distances:", ""]
        for row in ex.distances:
            lines.append("  " + " ".join(f"{d:9.3f}" for d in row))
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    if args.figures:
        from .plots import plot_distance_matrix

        os.makedirs(args.figures, exist_ok=True)
        plot_distance_matrix(ex, os.path.join(args.figures, "distances.png"))
    return EXIT_OK if all(r.converged for r in ex.results) else EXIT_NOT_CONVERGED


def cmd_fixture(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for fname in ("players.csv", "games.csv"):
        text = fixture_text(args.name, fname)
        if text is not None:
            write_text(os.path.join(args.out, fname), text)
    write_text(os.path.join(args.out, "manifest.json"), json.dumps(manifest(args.name), indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "explore": cmd_explore,
    "fixture": cmd_fixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except OSError as exc:
        name = exc.filename or ""
        print(f"error: cannot access {name!r}: {exc.strerror or exc}", file=sys.stderr)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (InputError, TournamentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
