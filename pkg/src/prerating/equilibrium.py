"""Performance rating equilibria: fixed points of the TPR map.

A rating vector ``x*`` is an equilibrium when every player's performance
rating against opponents rated ``x*`` is ``x*`` itself, i.e. each player's
rating predicts the score they actually made.  Equilibria are found by
(optionally damped) fixed-point iteration.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist, squareform
from scipy.special import expit

from .rating import (
    DEFAULT_CPR,
    DEFAULT_ELO,
    ClampBounds,
    CprSurrogateParams,
    EloParams,
    score_targets,
    solve_tpr_batch,
    tpr_array,
)
from .tournament import PlayerId, RatingVector, Tournament, TournamentError, check

INIT_MODES = ("average", "initial_ratings")
UPDATE_SCHEMES = ("simultaneous", "sequential")
CLUSTER_THRESHOLD = 0.5


@dataclass(frozen=True)
class EquilibriumConfig:
    """Iteration settings.

    ``init`` is ``"average"``, ``"initial_ratings"`` or a custom rating
    vector (a mapping covering every player).
    """

    init: str | Mapping[PlayerId, float] = "average"
    damping: float = 1.0
    sup_tol: float = 1e-7
    max_iters: int = 10000
    update_scheme: str = "simultaneous"

    def __post_init__(self):
        if isinstance(self.init, str) and self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES} or a rating vector, got {self.init!r}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if not self.sup_tol > 0:
            raise ValueError(f"sup_tol must be > 0, got {self.sup_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.update_scheme not in UPDATE_SCHEMES:
            raise ValueError(f"update_scheme must be one of {UPDATE_SCHEMES}, got {self.update_scheme!r}")

    @property
    def init_mode(self) -> str:
        return self.init if isinstance(self.init, str) else "custom"


@dataclass(frozen=True)
class EquilibriumResult:
    ratings: RatingVector
    residual: float
    iterations: int
    converged: bool
    trajectory: tuple[float, ...] = ()
    init_mode: str = "average"
    start: RatingVector = field(default_factory=dict, repr=False)
    clamp: tuple[float, float] = (0.0, float("inf"))
    active_clamps: tuple[tuple[PlayerId, str], ...] = ()
    diagnosis: str = "converged"

    @property
    def start_average(self) -> float:
        return float(np.mean(list(self.start.values()))) if self.start else float("nan")


@dataclass(frozen=True)
class Verification:
    """Prediction errors (score units) and the TPR-map residual (rating units)."""

    prediction_errors: dict[PlayerId, float]
    expected_scores: dict[PlayerId, float]
    tpr: RatingVector
    residual: float
    boundary_players: tuple[PlayerId, ...]
    clamped_players: tuple[PlayerId, ...]

    @property
    def max_interior_error(self) -> float:
        """Largest prediction error over interior-score players not held by a clamp."""
        skip = set(self.boundary_players) | set(self.clamped_players)
        errs = [e for pid, e in self.prediction_errors.items() if pid not in skip]
        return max(errs, default=0.0)

    def is_equilibrium(self, sup_tol: float = 1e-7) -> bool:
        return self.residual <= sup_tol


@dataclass(frozen=True)
class Exploration:
    results: list[EquilibriumResult]
    distances: np.ndarray
    labels: tuple[int, ...]

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels))

    def representatives(self) -> list[EquilibriumResult]:
        seen: dict[int, EquilibriumResult] = {}
        for label, res in zip(self.labels, self.results):
            seen.setdefault(label, res)
        return [seen[k] for k in sorted(seen)]


def initial_vector(t: Tournament, cfg: EquilibriumConfig = EquilibriumConfig()) -> RatingVector:
    if not isinstance(cfg.init, str):
        t.to_array(cfg.init)
        return {pid: float(cfg.init[pid]) for pid in t.ids}
    if cfg.init == "initial_ratings":
        return t.to_vector(t.initial_ratings())
    known = [t.resolved_rating(pid) for pid in t.ids]
    known = [r for r in known if r is not None]
    if not known:
        raise TournamentError(
            "average start needs at least one rating; unrated players: " + ", ".join(map(str, t.ids))
        )
    avg = float(np.mean(known))
    return {pid: avg for pid in t.ids}


def _active_clamps(t: Tournament, x: np.ndarray, bounds: tuple[float, float]):
    lo, hi = bounds
    out = []
    for pid, v in zip(t.ids, x):
        if v <= lo:
            out.append((pid, "lo"))
        elif v >= hi:
            out.append((pid, "hi"))
    return tuple(out)


def _sequential_sweep(t, x, p, bounds, targets, damping, per_player):
    x = x.copy()
    for i, opp_idx in enumerate(per_player):
        owner = np.zeros(opp_idx.size, dtype=np.intp)
        y = solve_tpr_batch(owner, x[opp_idx], targets[i : i + 1], p, x[i : i + 1])[0]
        y = min(max(y, bounds[0]), bounds[1])
        x[i] = (1.0 - damping) * x[i] + damping * y
    return x


def _diagnose(trajectory, x, x_before, t, p, bounds, targets, d) -> str:
    """Name the failure mode from the tail of a non-converged run."""
    if len(trajectory) < 3:
        return "iteration limit reached"
    last = trajectory[-1]
    after = (1.0 - d) * x + d * tpr_array(t, x, p, bounds, targets, guess=x)
    if np.max(np.abs(after - x_before)) < 0.1 * last:
        return "oscillating (period 2)"
    rate = last / trajectory[-2] if trajectory[-2] > 0 else 0.0
    if rate >= 0.9999:
        shift = x - x_before
        if np.ptp(shift) < 0.01 * last:
            return f"drifting (uniform shift {np.mean(shift):+.3g} per iteration)"
        return f"drifting (step ratio {rate:.6f})"
    return f"slow contraction (step ratio {rate:.6f})"


def solve_equilibrium(
    t: Tournament,
    p: EloParams = DEFAULT_ELO,
    b: ClampBounds = ClampBounds(),
    c: CprSurrogateParams = DEFAULT_CPR,
    cfg: EquilibriumConfig = EquilibriumConfig(),
) -> EquilibriumResult:
    """Iterate ``x <- (1 - d) x + d TPR(x)`` from the configured start.

    Iteration stops once a step moves no rating by more than ``sup_tol`` and
    the residual ``max|TPR(x) - x|``, recomputed at that point, is also
    within ``sup_tol``.  Running out of iterations is reported through
    ``converged=False``, never raised.
    """
    check(t)
    bounds = b.resolve(t)
    targets, _ = score_targets(t, c)
    start = initial_vector(t, cfg)
    x = np.clip(t.to_array(start), *bounds)
    d = cfg.damping

    per_player = None
    if cfg.update_scheme == "sequential":
        owner, opp_idx = t.slots
        per_player = [opp_idx[owner == i] for i in range(t.n)]

    trajectory = []
    converged = False
    residual = None
    iterations = 0
    x_before = x
    for iterations in range(1, cfg.max_iters + 1):
        if per_player is None:
            y = tpr_array(t, x, p, bounds, targets, guess=x)
            x_new = y if d == 1.0 else (1.0 - d) * x + d * y
        else:
            x_new = _sequential_sweep(t, x, p, bounds, targets, d, per_player)
        step = float(np.max(np.abs(x_new - x)))
        trajectory.append(step)
        if step == 0.0 and per_player is None:
            # x is already fixed; the image just computed is the residual check.
            residual = float(np.max(np.abs(y - x)))
            converged = True
            break
        x_before, x = x, x_new
        if step <= cfg.sup_tol:
            residual = float(np.max(np.abs(tpr_array(t, x, p, bounds, targets, guess=x) - x)))
            if residual <= cfg.sup_tol:
                converged = True
                break
            residual = None
    if residual is None:
        residual = float(np.max(np.abs(tpr_array(t, x, p, bounds, targets, guess=x) - x)))
    diagnosis = "converged" if converged else _diagnose(trajectory, x, x_before, t, p, bounds, targets, d)

    return EquilibriumResult(
        ratings=t.to_vector(x),
        residual=residual,
        iterations=iterations,
        converged=converged,
        trajectory=tuple(trajectory),
        init_mode=cfg.init_mode,
        start=start,
        clamp=bounds,
        active_clamps=_active_clamps(t, x, bounds),
        diagnosis=diagnosis,
    )


def expected_totals(t: Tournament, x: np.ndarray, p: EloParams = DEFAULT_ELO) -> np.ndarray:
    owner, opp_idx = t.slots
    e = expit((x[owner] - x[opp_idx]) * p.slope)
    return np.bincount(owner, weights=e, minlength=t.n)


def verify_equilibrium(
    t: Tournament,
    x: Mapping[PlayerId, float],
    p: EloParams = DEFAULT_ELO,
    b: ClampBounds = ClampBounds(),
    c: CprSurrogateParams = DEFAULT_CPR,
) -> Verification:
    """How well ``x`` predicts the actual scores, and how far it is from a fixed point."""
    check(t)
    arr = t.to_array(x)
    bounds = b.resolve(t)
    targets, boundary = score_targets(t, c)
    expected = expected_totals(t, arr, p)
    actual = np.array([float(m) for m in t.points])
    image = tpr_array(t, arr, p, bounds, targets, guess=arr)
    return Verification(
        prediction_errors=t.to_vector(np.abs(expected - actual)),
        expected_scores=t.to_vector(expected),
        tpr=t.to_vector(image),
        residual=float(np.max(np.abs(image - arr))),
        boundary_players=tuple(pid for pid, flag in zip(t.ids, boundary) if flag),
        clamped_players=tuple(pid for pid, _ in _active_clamps(t, arr, bounds)),
    )


def random_starts(t: Tournament, count: int, seed: int = 0, spread: float = 400.0) -> list[RatingVector]:
    """``count`` starts drawn uniformly within ``spread`` of the average rating."""
    centre = next(iter(initial_vector(t).values()))
    rng = np.random.default_rng(seed)
    return [
        t.to_vector(np.maximum(centre + rng.uniform(-spread, spread, size=t.n), 0.0))
        for _ in range(count)
    ]


def explore_equilibria(
    t: Tournament,
    p: EloParams = DEFAULT_ELO,
    b: ClampBounds = ClampBounds(),
    c: CprSurrogateParams = DEFAULT_CPR,
    starts: Sequence[Mapping[PlayerId, float]] | int = 4,
    cfg: EquilibriumConfig = EquilibriumConfig(),
    threshold: float = CLUSTER_THRESHOLD,
    seed: int = 0,
    threads: int | None = None,
) -> Exploration:
    """Solve from several starts and group the end points.

    Results closer than ``threshold`` rating points (sup-norm, single
    linkage) share a cluster.  An integer ``starts`` draws that many random
    starts from ``seed``.
    """
    check(t)
    if isinstance(starts, int):
        starts = random_starts(t, starts, seed)
    if not starts:
        raise ValueError("no starting vectors")
    configs = [
        EquilibriumConfig(
            init=dict(s),
            damping=cfg.damping,
            sup_tol=cfg.sup_tol,
            max_iters=cfg.max_iters,
            update_scheme=cfg.update_scheme,
        )
        for s in starts
    ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda conf: solve_equilibrium(t, p, b, c, conf), configs))

    points = np.array([t.to_array(r.ratings) for r in results])
    if len(results) == 1:
        return Exploration(results, np.zeros((1, 1)), (1,))
    dist = pdist(points, metric="chebyshev")
    labels = fcluster(linkage(dist, method="single"), t=threshold, criterion="distance")
    # Renumber clusters by first appearance.
    order: dict[int, int] = {}
    for lab in labels:
        order.setdefault(int(lab), len(order) + 1)
    return Exploration(results, squareform(dist), tuple(order[int(lab)] for lab in labels))
