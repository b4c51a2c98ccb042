"""Følner sets in the iterated Z/2 covers of the wedge of two circles.

On a level built by ``ag_cover`` with unwound coordinates e_1..e_m, the set
A = {(v, alpha) : alpha_i = 0 for i > k} has |A| = |X_prev| * 2^k and
exactly 2 (m - k) 2^k boundary edges (both orientations of each crossing
geometric edge appear once in the labelled edge list).  Its normalized
indicator is almost invariant under every generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quotients import FiniteQuotient, LabeledGraph, QuotientTower
from .spectra import assemble
from .sparse_norms import min_invariance_deficiency
from .words import Word, averaging_element


@dataclass(frozen=True, eq=False)
class FolnerLevel:
    level: int
    points: np.ndarray
    size: int
    boundary: int
    k: int  # k_{n-1}: free coordinates kept
    unwound: int  # m: coordinates unwound to build this level (r_{n-1} when full)
    base_rank: int  # r_{n-1}: cotree rank of the level below
    base_size: int  # |X_{n-1}|
    partial: bool

    @property
    def size_formula(self) -> int:
        return self.base_size * 2**self.k

    @property
    def boundary_formula(self) -> int:
        return 2 * (self.unwound - self.k) * 2**self.k


@dataclass(frozen=True)
class FolnerFamily:
    levels: tuple[FolnerLevel, ...]

    def __getitem__(self, level: int) -> FolnerLevel:
        for f in self.levels:
            if f.level == level:
                return f
        raise KeyError(level)

    @property
    def gamma(self) -> list[int]:
        return [f.size for f in self.levels]


def _cover_graph(tower: QuotientTower, n: int) -> LabeledGraph:
    g = tower.levels[n].graph
    if g is None or g.base_vertex_count is None:
        raise ValueError(f"level {n} was not built by ag_cover")
    return g


def boundary(g: LabeledGraph, A) -> int:
    """Number of labelled edges with exactly one endpoint in A."""
    inside = np.zeros(g.vertex_count, dtype=bool)
    inside[np.asarray(list(A), dtype=np.int64)] = True
    src = np.repeat(inside, g.rank).reshape(g.vertex_count, g.rank)
    return int(np.count_nonzero(src != inside[g.targets]))


def choose_k(tower: QuotientTower) -> list[int]:
    """k_{n-1} = m - min(m - 1, ceil(log2(|X_{n-1}| + 1))) for each built level n >= 1."""
    ks = []
    for n in range(1, len(tower)):
        m = len(_cover_graph(tower, n).unwound)
        if m < 2:
            raise ValueError(f"level {n} unwinds {m} coordinate(s); need at least 2")
        drop = min(m - 1, math.ceil(math.log2(tower.levels[n - 1].size + 1)))
        ks.append(m - drop)
    return ks


def build_A(tower: QuotientTower, k: Sequence[int]) -> FolnerFamily:
    """A_n for n = 1..len(k): the points whose trailing unwound coordinates vanish."""
    if len(k) > len(tower) - 1:
        raise ValueError("more k values than cover levels")
    out = []
    for j, kj in enumerate(k):
        n = j + 1
        g = _cover_graph(tower, n)
        m = len(g.unwound)
        if not 1 <= kj < m:
            raise ValueError(f"k_{j} = {kj} outside 1..{m - 1}")
        # index alpha * V + v with alpha < 2^k
        pts = np.arange(g.base_vertex_count << kj)
        out.append(
            FolnerLevel(n, pts, pts.size, boundary(g, pts), kj, m, g.base_cotree_rank,
                        g.base_vertex_count, g.partial)
        )
    return FolnerFamily(tuple(out))


@dataclass(frozen=True, eq=False)
class AlmostInvariant:
    vector: np.ndarray
    residuals: dict[str, float]
    bound: float  # 2 |dA| / |A|, a bound on every squared residual
    ok: bool


def almost_invariant(fam: FolnerFamily, level: int, q: FiniteQuotient) -> AlmostInvariant:
    """Normalized indicator of A_n and its exact per-generator residuals."""
    f = fam[level]
    if f.points.size and f.points.max() >= q.size:
        raise ValueError("Følner set does not fit in the quotient")
    xi = np.zeros(q.size)
    xi[f.points] = 1.0 / math.sqrt(f.size)
    residuals = {}
    for i, name in enumerate(q.names, start=1):
        moved = np.zeros_like(xi)
        moved[q.act_all(Word((i,)))] = xi
        residuals[name] = float(np.linalg.norm(moved - xi))
    bound = 2 * f.boundary / f.size
    ok = all(r**2 <= bound + 1e-12 for r in residuals.values())
    return AlmostInvariant(xi, residuals, bound, ok)


@dataclass
class FolnerRow:
    level: int
    nu: int
    size: int
    boundary: int
    ratio_boundary: float
    ratio_volume: float
    residual_a: float
    residual_b: float
    bound: float
    k: int
    unwound: int
    size_formula_ok: bool
    boundary_formula_ok: bool
    bound_ok: bool
    deficiency: float
    gamma_over_index: float
    partial: bool

    FIELDS = (
        "level", "nu", "size", "boundary", "ratio_boundary", "ratio_volume", "residual_a",
        "residual_b", "bound", "k", "unwound", "size_formula_ok", "boundary_formula_ok",
        "bound_ok", "deficiency", "gamma_over_index", "partial",
    )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}

    @property
    def ok(self) -> bool:
        return self.size_formula_ok and self.boundary_formula_ok and self.bound_ok


def folner_report(fam: FolnerFamily, tower: QuotientTower) -> list[FolnerRow]:
    """Per-level counts, ratios, residuals and the deficiency of A_n itself.

    The deficiency column is ``min_invariance_deficiency`` at budget |A_n|
    with the Følner-seeded strategy, so it is an upper bound for the true
    minimum.
    """
    x = averaging_element()
    rows = []
    for f in fam.levels:
        q = tower.levels[f.level]
        ai = almost_invariant(fam, f.level, q)
        dfc, _ = min_invariance_deficiency(assemble(x, q), f.size, "folner-seeded", [f.points])
        res = list(ai.residuals.values()) + [float("nan")] * 2
        rows.append(
            FolnerRow(
                f.level, q.size, f.size, f.boundary, f.boundary / f.size, f.size / q.size,
                res[0], res[1], ai.bound, f.k, f.unwound,
                f.size == f.size_formula, f.boundary == f.boundary_formula, ai.ok, dfc,
                f.size / (q.size / f.base_size), f.partial,
            )
        )
    return rows
