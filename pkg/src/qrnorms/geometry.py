"""Word metrics on finite quotients, injectivity radius, lifting and clustering.

Distances are graph distances in the Schreier graph of the left action
(``x -> s.x`` for ``s`` in the symmetric generating set).  For a normal
quotient this is the word metric ``d(u.o, v.o) = l_n(v u^-1)``, i.e. the
right-invariant version of the usual left-invariant metric; the two are
exchanged by inversion, which preserves balls around the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .quotients import FiniteQuotient
from .words import Word, ball_words

DEFAULT_BALL_CAP = 10**7


@dataclass(frozen=True)
class DistanceField:
    level: int
    origin: int
    dist: np.ndarray

    def ball(self, radius: int) -> np.ndarray:
        return np.flatnonzero((self.dist >= 0) & (self.dist <= radius))


def distances(q: FiniteQuotient, origin: int, max_depth: int | None = None) -> DistanceField:
    """BFS distances from ``origin``; points beyond ``max_depth`` get -1."""
    moves = q.moves()
    dist = np.full(q.size, -1, dtype=np.int64)
    dist[origin] = 0
    frontier = np.array([origin])
    d = 0
    while frontier.size and (max_depth is None or d < max_depth):
        d += 1
        nxt = np.unique(np.concatenate([m[frontier] for m in moves]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    return DistanceField(q.level, origin, dist)


def ball(q: FiniteQuotient, center: int, radius: int) -> np.ndarray:
    """Sorted points at distance <= radius from ``center``."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = distances(q, center, max_depth=radius).dist
    return np.flatnonzero(d >= 0)


def diameter(q: FiniteQuotient) -> int:
    # vertex-transitive when the quotient is a group, but files need not be
    return max(int(distances(q, x).dist.max()) for x in range(q.size))


@dataclass(frozen=True)
class AlphaResult:
    value: int | None  # None when no relator was found within the cap
    witness: Word | None
    acts_trivially: bool  # witness fixes every point (normality witness)
    cap: int

    def __int__(self) -> int:
        if self.value is None:
            raise ValueError(f"alpha exceeds cap {self.cap}")
        return self.value


def alpha(q: FiniteQuotient, cap: int = 64) -> AlphaResult:
    """Length of the shortest nontrivial reduced word fixing the basepoint.

    Non-backtracking BFS over states (point, last letter); the first return
    to the basepoint gives the minimum.
    """
    letters = [s * i for i in range(1, q.rank + 1) for s in (1, -1)]
    perms = {x: q.letter_perm(x).tolist() for x in letters}
    start = (q.basepoint, 0)
    parent: dict[tuple[int, int], tuple[int, int] | None] = {start: None}
    frontier = [start]
    depth = 0
    while frontier and depth < cap:
        depth += 1
        nxt = []
        for state in frontier:
            p, last = state
            for x in letters:
                if x == -last:
                    continue
                y = perms[x][p]
                new = (y, x)
                if y == q.basepoint:
                    applied = [x]
                    s = state
                    while s[1] != 0:
                        applied.append(s[1])
                        s = parent[s]
                    # letters were applied first-to-last, so the word reads in reverse
                    w = Word(tuple(applied))
                    img = q.act_all(w)
                    return AlphaResult(depth, w, bool(np.array_equal(img, np.arange(q.size))), cap)
                if new not in parent:
                    parent[new] = state
                    nxt.append(new)
        frontier = nxt
    return AlphaResult(None, None, False, cap)


def ball_size(radius: int, rank: int = 2) -> int:
    if radius <= 0:
        return 1
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2)


@dataclass(frozen=True)
class LiftReport:
    passed: bool
    radius: int
    reason: str = ""
    counterexample: tuple[Word, Word] | None = None


def check_isometric_lifting(q: FiniteQuotient, radius: int, cap: int = DEFAULT_BALL_CAP) -> LiftReport:
    """Verify that u -> u.o is an isometry from B_R(e) in F onto the radius-R ball at o."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    n = ball_size(radius, q.rank)
    if n > cap:
        raise ValueError(f"ball of radius {radius} has {n} words, above cap {cap}")
    words = list(ball_words(radius, q.rank))
    images = np.array([q.evaluate(w) for w in words])
    seen: dict[int, Word] = {}
    for w, x in zip(words, images.tolist()):
        if x in seen:
            return LiftReport(False, radius, "not injective", (seen[x], w))
        seen[x] = w
    target = ball(q, q.basepoint, radius)
    if set(target.tolist()) != set(seen):
        return LiftReport(False, radius, "image is not the ball")
    for u, x in zip(words, images.tolist()):
        d = distances(q, x, max_depth=2 * radius).dist
        uinv = u.inverse()
        for v, y in zip(words, images.tolist()):
            if d[y] != len(v * uinv):
                return LiftReport(False, radius, "distance not preserved", (u, v))
    return LiftReport(True, radius)


def cluster_support(q: FiniteQuotient, points, threshold: int) -> list[list[int]]:
    """Single-linkage parts of ``points``: x ~ y when d(x, y) < threshold.

    Distinct parts are at distance >= threshold.  Parts are sorted lists,
    ordered by their smallest point.
    """
    pts = sorted(set(int(x) for x in points))
    if not pts:
        raise ValueError("empty point set")
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    members = set(pts)
    ds = DisjointSet(pts)
    for x in pts:
        d = distances(q, x, max_depth=threshold - 1).dist
        for y in np.flatnonzero(d >= 0).tolist():
            if y in members:
                ds.merge(x, y)
    return sorted((sorted(s) for s in ds.subsets()), key=lambda s: s[0])
