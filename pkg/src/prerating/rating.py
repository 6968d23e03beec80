"""Elo expected scores and tournament performance ratings (TPR).

The performance rating of a player with score ``m`` against opponents
``o_1..o_k`` is the unique ``y`` with ``g(y) = m`` where ``g`` sums the
expected scores.  ``g`` is strictly increasing, so the root is found by
bracketed bisection, accelerated by safeguarded Newton steps.  Zero and perfect scores have
no root; they are mapped onto a nearby interior score (see
:func:`solve_boundary`).
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .tournament import PlayerId, RatingVector, Tournament, check

_MAX_STEPS = 400
_MAX_EXPANSIONS = 60
_WARM_PAD = 50.0
_ULP = 4 * np.finfo(float).eps


class BoundaryScoreError(ValueError):
    pass


@dataclass(frozen=True)
class EloParams:
    scale: float = 400.0
    base: float = 10.0
    root_tol: float = 1e-9
    bracket_pad: float = 4000.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not self.base > 1:
            raise ValueError(f"base must be > 1, got {self.base}")
        if not self.root_tol > 0:
            raise ValueError(f"root_tol must be > 0, got {self.root_tol}")
        if not self.bracket_pad > 0:
            raise ValueError(f"bracket_pad must be > 0, got {self.bracket_pad}")

    @property
    def slope(self) -> float:
        """Logistic slope per rating point, ln(base) / scale."""
        return math.log(self.base) / self.scale


@dataclass(frozen=True)
class ClampBounds:
    """Output range of the TPR map; ``hi=None`` means the tournament's c."""

    lo: float = 0.0
    hi: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lo) and self.lo >= 0):
            raise ValueError(f"clamp lo must be finite and >= 0, got {self.lo}")
        if self.hi is not None and not self.hi > self.lo:
            raise ValueError(f"clamp hi must exceed lo ({self.lo}), got {self.hi}")

    def resolve(self, t: Tournament) -> tuple[float, float]:
        hi = compute_c(t) if self.hi is None else self.hi
        if not hi > self.lo:
            raise ValueError(f"clamp hi {hi} does not exceed lo {self.lo}")
        return self.lo, hi


@dataclass(frozen=True)
class CprSurrogateParams:
    """Zero/perfect scores are solved as if the player scored ``delta`` / ``k - delta``."""

    delta: float = 0.25

    def __post_init__(self):
        if not 0 < self.delta <= 0.5:
            raise ValueError(f"delta must be in (0, 0.5], got {self.delta}")


DEFAULT_ELO = EloParams()
DEFAULT_CPR = CprSurrogateParams()


def _finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite rating {v!r}")


def expected_score(own: float, opp: float, p: EloParams = DEFAULT_ELO) -> float:
    """Expected score of a player rated ``own`` against one rated ``opp``."""
    _finite(own, opp)
    return float(expit((own - opp) * p.slope))


def _opponents(opp_ratings: Sequence[float]) -> np.ndarray:
    opp = np.asarray(opp_ratings, dtype=float).ravel()
    if opp.size == 0:
        raise ValueError("empty opponent list")
    if not np.all(np.isfinite(opp)):
        raise ValueError("non-finite opponent rating")
    return opp


def g(y: float, opp_ratings: Sequence[float], p: EloParams = DEFAULT_ELO) -> float:
    """Total expected score of rating ``y`` against ``opp_ratings``."""
    opp = _opponents(opp_ratings)
    _finite(y)
    return float(expit((y - opp) * p.slope).sum())


def g_prime(y: float, opp_ratings: Sequence[float], p: EloParams = DEFAULT_ELO) -> float:
    """Derivative of :func:`g` with respect to ``y``; strictly positive."""
    opp = _opponents(opp_ratings)
    _finite(y)
    e = expit((y - opp) * p.slope)
    return float(p.slope * (e * (1.0 - e)).sum())


# --- batched root finding ---------------------------------------------------


def _g_batch(y, owner, opp, n, slope):
    e = expit((y[owner] - opp) * slope)
    return np.bincount(owner, weights=e, minlength=n), e


def solve_tpr_batch(
    owner: np.ndarray,
    opp: np.ndarray,
    m: np.ndarray,
    p: EloParams = DEFAULT_ELO,
    guess: np.ndarray | None = None,
) -> np.ndarray:
    """Solve ``g_i(y_i) = m_i`` for several players at once.

    ``owner[s]`` is the player index for game slot ``s`` and ``opp[s]`` the
    opponent rating in that slot.  Every ``m_i`` must lie strictly between 0
    and the player's game count.  ``guess`` only seeds the bracket.

    Each player keeps a bracket ``[lo, hi]`` around its root.  Newton steps
    are taken while they land inside the bracket and at least halve the
    score error; otherwise the bracket is bisected.  Once the score error
    is within ``root_tol`` one more Newton step is tried as a polish.
    """
    m = np.asarray(m, dtype=float)
    n = m.size
    k = np.bincount(owner, minlength=n).astype(float)
    if np.any(k == 0):
        raise ValueError("player without games")
    if np.any(m <= 0) or np.any(m >= k):
        raise BoundaryScoreError("boundary score: use boundary extension")
    slope = p.slope

    if guess is None:
        lo = np.full(n, np.inf)
        hi = np.full(n, -np.inf)
        np.minimum.at(lo, owner, opp)
        np.maximum.at(hi, owner, opp)
        pad = np.full(n, p.bracket_pad)
    else:
        lo = hi = np.asarray(guess, dtype=float)
        pad = np.full(n, min(p.bracket_pad, _WARM_PAD))
    lo = lo - pad
    hi = hi + pad

    # Widen geometrically until the root is enclosed.
    for _ in range(_MAX_EXPANSIONS):
        g_lo, _ = _g_batch(lo, owner, opp, n, slope)
        g_hi, _ = _g_batch(hi, owner, opp, n, slope)
        low_bad = g_lo > m
        high_bad = g_hi < m
        if not (low_bad.any() or high_bad.any()):
            break
        pad = np.where(low_bad | high_bad, pad * 2, pad)
        lo = np.where(low_bad, lo - pad, lo)
        hi = np.where(high_bad, hi + pad, hi)
    else:
        raise ArithmeticError("could not bracket performance rating")

    y = 0.5 * (lo + hi) if guess is None else np.clip(guess, lo, hi)
    prev = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    for _ in range(_MAX_STEPS):
        gy, e = _g_batch(y, owner, opp, n, slope)
        r = gy - m
        lo = np.where(r < 0, y, lo)
        hi = np.where(r > 0, y, hi)
        done |= (np.abs(r) <= p.root_tol) | (hi - lo <= _ULP * np.maximum(np.abs(lo), 1.0))
        if done.all():
            break
        d = slope * np.bincount(owner, weights=e * (1.0 - e), minlength=n)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            newton = y - r / d
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi) & (np.abs(r) <= 0.5 * prev)
        step = np.where(ok, newton, 0.5 * (lo + hi))
        prev = np.where(done, prev, np.abs(r))
        y = np.where(done, y, step)
    else:
        raise ArithmeticError("performance rating did not converge")

    # Polish: one Newton step, kept only where it reduces the score error.
    d = slope * np.bincount(owner, weights=e * (1.0 - e), minlength=n)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cand = y - r / d
    cand = np.where(np.isfinite(cand), np.clip(cand, lo, hi), y)
    gc, _ = _g_batch(cand, owner, opp, n, slope)
    return np.where(np.abs(gc - m) < np.abs(r), cand, y)


def solve_tpr(opp_ratings: Sequence[float], m: float, p: EloParams = DEFAULT_ELO) -> float:
    """Unclamped performance rating for score ``m`` against ``opp_ratings``.

    Raises:
        BoundaryScoreError: if ``m`` is 0 or equal to the number of games.
    """
    opp = _opponents(opp_ratings)
    m = float(m)
    if not 0 < m < opp.size:
        raise BoundaryScoreError(f"boundary score {m} of {opp.size}: use boundary extension")
    owner = np.zeros(opp.size, dtype=np.intp)
    return float(solve_tpr_batch(owner, opp, np.array([m]), p)[0])


def boundary_target(m, k: int, c: CprSurrogateParams = DEFAULT_CPR) -> float:
    if m == 0:
        return c.delta
    if m == k:
        return k - c.delta
    raise ValueError(f"interior score {m} of {k}: use solve_tpr")


def solve_boundary(
    opp_ratings: Sequence[float],
    m,
    p: EloParams = DEFAULT_ELO,
    c: CprSurrogateParams = DEFAULT_CPR,
) -> float:
    """Performance rating for a zero or perfect score.

    The score is pulled ``delta`` points inside ``(0, k)`` and solved as an
    ordinary TPR.  This is continuous in the opponents' ratings, which is
    what the equilibrium argument needs, but it is not the exact complete
    performance rating of the literature.
    """
    opp = _opponents(opp_ratings)
    return solve_tpr(opp, boundary_target(m, opp.size, c), p)


# --- the TPR map --------------------------------------------------------------


def score_targets(t: Tournament, c: CprSurrogateParams = DEFAULT_CPR) -> tuple[np.ndarray, np.ndarray]:
    """Per-player score targets after the boundary substitution, and the boundary mask."""
    k = t.games_played
    targets = np.empty(t.n)
    boundary = np.zeros(t.n, dtype=bool)
    for i, (mi, ki) in enumerate(zip(t.points, k)):
        if mi == 0 or mi == ki:
            targets[i] = boundary_target(mi, int(ki), c)
            boundary[i] = True
        else:
            targets[i] = float(mi)
    return targets, boundary


def tpr_array(
    t: Tournament,
    x: np.ndarray,
    p: EloParams,
    bounds: tuple[float, float],
    targets: np.ndarray,
    guess: np.ndarray | None = None,
) -> np.ndarray:
    """TPR map on an index-ordered array; ``targets`` from :func:`score_targets`."""
    owner, opp_idx = t.slots
    y = solve_tpr_batch(owner, x[opp_idx], targets, p, guess)
    return np.clip(y, bounds[0], bounds[1])


def tpr_map(
    t: Tournament,
    x: Mapping[PlayerId, float],
    p: EloParams = DEFAULT_ELO,
    b: ClampBounds = ClampBounds(),
    c: CprSurrogateParams = DEFAULT_CPR,
) -> RatingVector:
    """Clamped performance rating of every player against opponents rated ``x``."""
    check(t)
    arr = t.to_array(x)
    targets, _ = score_targets(t, c)
    return t.to_vector(tpr_array(t, arr, p, b.resolve(t), targets))


def compute_c(t: Tournament) -> float:
    """Largest sum of initial opponent ratings over all players (with multiplicity)."""
    r = t.initial_ratings()
    owner, opp_idx = t.slots
    return float(np.bincount(owner, weights=r[opp_idx], minlength=t.n).max())

