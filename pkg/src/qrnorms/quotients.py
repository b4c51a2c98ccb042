"""Finite quotients X_n = G/G_n as permutation actions of the generators.

Three sources are supported: iterated Z/2-homology covers of the wedge of two
circles (``ag_base``/``ag_cover``), congruence images of SL2(Z) subgroups
(``sl2_quotient``), and permutation files (``load_quotient``).

Conventions: points are ``0..nu-1``; generator ``i`` (1-based) acts by the
permutation ``action[i-1]``; a word acts right to left, so ``(uv).x = u.(v.x)``.
For a covering graph the ``i``-th generator moves ``v`` along its outgoing
edge labelled ``i``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .words import GENERATOR_NAMES, Word


class QuotientError(ValueError):
    pass


# --------------------------------------------------------------------------
# labelled covering graphs


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Schreier/Cayley graph with one outgoing edge per (vertex, label).

    Edge ``v * rank + l`` goes from ``v`` to ``targets[v, l]`` with label ``l``.
    Graphs produced by ``ag_cover`` also remember their product structure:
    vertex ``alpha * base_vertex_count + v`` is the pair ``(v, alpha)`` with
    ``alpha`` a bitmask over the unwound base edges ``unwound``.
    """

    targets: np.ndarray
    tree_marks: frozenset[int]
    cotree_order: tuple[int, ...]
    base_vertex_count: int | None = None
    unwound: tuple[int, ...] = ()
    base_cotree_rank: int | None = None

    @property
    def vertex_count(self) -> int:
        return int(self.targets.shape[0])

    @property
    def rank(self) -> int:
        return int(self.targets.shape[1])

    @property
    def edge_count(self) -> int:
        return int(self.targets.size)

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        v, l = np.divmod(np.arange(self.edge_count), self.rank)
        return list(zip(v.tolist(), self.targets.ravel().tolist(), l.tolist()))

    def edge(self, index: int) -> tuple[int, int, int]:
        v, l = divmod(index, self.rank)
        return v, int(self.targets[v, l]), l

    @property
    def cotree_rank(self) -> int:
        return len(self.cotree_order)

    @property
    def partial(self) -> bool:
        return self.base_cotree_rank is not None and len(self.unwound) < self.base_cotree_rank


def spanning_tree(targets: np.ndarray, root: int = 0) -> frozenset[int]:
    """BFS spanning tree from ``root``; neighbours visited in edge-index order."""
    nv, rank = targets.shape
    incident: list[list[tuple[int, int]]] = [[] for _ in range(nv)]
    for e, w in enumerate(targets.ravel().tolist()):
        v = e // rank
        if v == w:
            continue  # loops never enter a tree
        incident[v].append((e, w))
        incident[w].append((e, v))
    for lst in incident:
        lst.sort()
    seen = np.zeros(nv, dtype=bool)
    seen[root] = True
    tree = []
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e, w in incident[v]:
            if not seen[w]:
                seen[w] = True
                tree.append(e)
                queue.append(w)
    if not seen.all():
        raise QuotientError("graph is disconnected")
    return frozenset(tree)


def _make_graph(targets: np.ndarray, **extra) -> LabeledGraph:
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    targets.setflags(write=False)
    tree = spanning_tree(targets)
    cotree = tuple(e for e in range(targets.size) if e not in tree)
    return LabeledGraph(targets, tree, cotree, **extra)


def ag_base(rank: int = 2) -> LabeledGraph:
    """Wedge of ``rank`` circles: one vertex, one loop per generator."""
    return _make_graph(np.zeros((1, rank), dtype=np.int64))


def ag_cover(g: LabeledGraph, unwind: Sequence[int] | None = None) -> LabeledGraph:
    """Z/2 cover unwinding the cotree edges in ``unwind`` (default: all of them).

    Edge ``e_i`` in ``unwind`` takes ``(v, alpha)`` to ``(w, alpha + e_i)``; every
    other edge takes ``(v, alpha)`` to ``(w, alpha)``.
    """
    unwind = tuple(g.cotree_order if unwind is None else unwind)
    if not unwind:
        raise QuotientError("unwind set is empty")
    cot = set(g.cotree_order)
    bad = [e for e in unwind if e not in cot]
    if bad or len(set(unwind)) != len(unwind):
        raise QuotientError(f"unwind set must be distinct cotree edges, got {bad or unwind}")
    nv, rank = g.targets.shape
    m = len(unwind)
    flip = np.zeros(g.edge_count, dtype=np.int64)
    for i, e in enumerate(unwind):
        flip[e] = 1 << i
    flip = flip.reshape(nv, rank)
    alpha = np.arange(1 << m, dtype=np.int64)[:, None, None]
    new_alpha = alpha ^ flip[None, :, :]
    targets = (new_alpha * nv + g.targets[None, :, :]).reshape(nv << m, rank)
    return _make_graph(
        targets,
        base_vertex_count=nv,
        unwound=unwind,
        base_cotree_rank=g.cotree_rank,
    )


# --------------------------------------------------------------------------
# quotients and towers


@dataclass(frozen=True, eq=False)
class FiniteQuotient:
    """Transitive permutation action of the free group on ``size`` points."""

    level: int
    action: np.ndarray  # shape (rank, size)
    basepoint: int = 0
    names: tuple[str, ...] = ()
    label: str = ""
    graph: LabeledGraph | None = field(default=None, repr=False)
    partial: bool = False
    points: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        action = np.ascontiguousarray(self.action, dtype=np.int64)
        if action.ndim != 2 or action.shape[1] < 1:
            raise QuotientError("action must be a (rank, size) array")
        n = action.shape[1]
        for i, perm in enumerate(action):
            if perm.min() < 0 or perm.max() >= n or np.unique(perm).size != n:
                raise QuotientError(f"generator {i + 1} does not act by a permutation")
        inverse = np.empty_like(action)
        for i, perm in enumerate(action):
            inverse[i, perm] = np.arange(n)
        action.setflags(write=False)
        inverse.setflags(write=False)
        object.__setattr__(self, "action", action)
        object.__setattr__(self, "_inverse", inverse)
        if not self.names:
            object.__setattr__(self, "names", tuple(GENERATOR_NAMES[: action.shape[0]]))
        if not 0 <= self.basepoint < n:
            raise QuotientError("basepoint out of range")
        if len(self.orbit(self.basepoint)) != n:
            raise QuotientError("action is not transitive")

    @property
    def size(self) -> int:
        return int(self.action.shape[1])

    @property
    def rank(self) -> int:
        return int(self.action.shape[0])

    def letter_perm(self, letter: int) -> np.ndarray:
        if abs(letter) > self.rank:
            raise QuotientError(f"letter {letter} outside rank {self.rank}")
        return self.action[letter - 1] if letter > 0 else self._inverse[-letter - 1]

    def moves(self) -> list[np.ndarray]:
        """Permutations of the symmetric generating set, ordered a, A, b, B, ..."""
        return [self.letter_perm(s * i) for i in range(1, self.rank + 1) for s in (1, -1)]

    def act_all(self, w: Word) -> np.ndarray:
        """``img[x] = w.x`` for every point."""
        img = np.arange(self.size)
        for letter in reversed(w.letters):
            img = self.letter_perm(letter)[img]
        return img

    def act(self, w: Word, x: int) -> int:
        for letter in reversed(w.letters):
            x = int(self.letter_perm(letter)[x])
        return x

    def orbit(self, x: int) -> list[int]:
        seen = {x}
        queue = deque([x])
        perms = [p.tolist() for p in self.action] + [p.tolist() for p in self._inverse]
        while queue:
            y = queue.popleft()
            for p in perms:
                z = p[y]
                if z not in seen:
                    seen.add(z)
                    queue.append(z)
        return sorted(seen)

    def evaluate(self, w: Word) -> int:
        """Image of the basepoint, i.e. the coset q_n(w)."""
        return self.act(w, self.basepoint)


def graph_to_quotient(g: LabeledGraph, level: int, label: str = "ag") -> FiniteQuotient:
    return FiniteQuotient(level, g.targets.T.copy(), 0, label=label, graph=g, partial=g.partial)


@dataclass(frozen=True, eq=False)
class TowerLink:
    """Equivariant projection from level n onto level n-1."""

    projection: np.ndarray
    lower_size: int

    def __post_init__(self):
        p = np.ascontiguousarray(self.projection, dtype=np.int64)
        p.setflags(write=False)
        object.__setattr__(self, "projection", p)

    @property
    def upper_size(self) -> int:
        return int(self.projection.size)

    @property
    def fiber_size(self) -> int:
        return self.upper_size // self.lower_size

    def fiber_counts(self) -> np.ndarray:
        return np.bincount(self.projection, minlength=self.lower_size)


def check_link(link: TowerLink, lower: FiniteQuotient, upper: FiniteQuotient) -> list[str]:
    """Failures of the link invariants (empty list when the link is valid)."""
    out = []
    p = link.projection
    if p.size != upper.size or link.lower_size != lower.size:
        return [f"link sizes {p.size}->{link.lower_size} do not match {upper.size}->{lower.size}"]
    if p.min() < 0 or p.max() >= lower.size:
        return ["projection out of range"]
    counts = link.fiber_counts()
    if upper.size % lower.size or not np.all(counts == upper.size // lower.size):
        out.append(f"unequal fibers: sizes {sorted(set(counts.tolist()))}")
    if upper.rank != lower.rank:
        out.append("rank mismatch")
        return out
    for i in range(upper.rank):
        if not np.array_equal(p[upper.action[i]], lower.action[i][p]):
            bad = int(np.flatnonzero(p[upper.action[i]] != lower.action[i][p])[0])
            out.append(f"not equivariant for generator {upper.names[i]} at point {bad}")
    if p[upper.basepoint] != lower.basepoint:
        out.append("basepoint not mapped to basepoint")
    return out


def ag_link(lower: FiniteQuotient, upper: FiniteQuotient) -> TowerLink:
    """Projection (v, alpha) -> v of an ``ag_cover``-built level."""
    g = upper.graph
    if g is None or g.base_vertex_count != lower.size:
        raise QuotientError("upper level was not built by ag_cover over the lower level")
    link = TowerLink(np.arange(upper.size) % lower.size, lower.size)
    failures = check_link(link, lower, upper)
    if failures:
        raise QuotientError("; ".join(failures))
    return link


@dataclass(frozen=True, eq=False)
class QuotientTower:
    levels: tuple[FiniteQuotient, ...]
    links: tuple[TowerLink, ...]
    kind: str = "tower"  # "tower" for nested levels, "family" otherwise

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, n: int) -> FiniteQuotient:
        return self.levels[n]

    @property
    def sizes(self) -> list[int]:
        return [q.size for q in self.levels]

    def link(self, n: int) -> TowerLink:
        """Link from level n down to level n-1."""
        if n < 1:
            raise IndexError("level 0 has no link")
        return self.links[n - 1]


def ag_tower(levels: int, unwind: Sequence[int | None] | None = None) -> QuotientTower:
    """AG tower with levels ``0..levels``.

    ``unwind[j]`` is the number of cotree edges unwound to build level ``j+1``
    (the first ones in cotree order); ``None`` means all of them.  Levels
    built from a proper subset are marked ``partial``.
    """
    unwind = list(unwind or [])
    unwind += [None] * (levels - len(unwind))
    g = ag_base()
    qs = [graph_to_quotient(g, 0)]
    links = []
    for n in range(1, levels + 1):
        m = unwind[n - 1]
        sel = g.cotree_order if m is None else g.cotree_order[:m]
        if m is not None and not 1 <= m <= g.cotree_rank:
            raise QuotientError(f"unwind size {m} outside 1..{g.cotree_rank}")
        if len(g.cotree_order) > 24 and m is None:
            raise QuotientError(f"full cover of level {n - 1} has 2^{g.cotree_rank} sheets; pass an unwind size")
        g = ag_cover(g, sel)
        q = graph_to_quotient(g, n)
        links.append(ag_link(qs[-1], q))
        qs.append(q)
    return QuotientTower(tuple(qs), tuple(links))


# --------------------------------------------------------------------------
# SL2 congruence images

SANOV_GENERATORS = (((1, 2), (0, 1)), ((1, 0), (2, 1)))


def _mat_key(m: np.ndarray, modulus: int) -> tuple[int, int, int, int]:
    return tuple(int(x) % modulus for x in m.ravel())


def sl2_quotient(modulus: int, gens=SANOV_GENERATORS, level: int = 0) -> FiniteQuotient:
    """Left-multiplication action on the subgroup of SL2(Z/m) generated by ``gens``."""
    if modulus < 1:
        raise QuotientError("modulus must be positive")
    mats = [np.array(g, dtype=np.int64) % modulus for g in gens]
    invs = []
    for g in mats:
        det = int(round(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])) % modulus
        try:
            dinv = pow(det, -1, modulus) if modulus > 1 else 0
        except ValueError:
            raise QuotientError(f"generator {g.tolist()} is not invertible mod {modulus}") from None
        adj = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]], dtype=np.int64)
        invs.append((dinv * adj) % modulus)
    ident = np.eye(2, dtype=np.int64) % modulus
    index = {_mat_key(ident, modulus): 0}
    elems = [ident]
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for g in itertools.chain(mats, invs):
            y = (g @ x) % modulus
            k = _mat_key(y, modulus)
            if k not in index:
                index[k] = len(elems)
                elems.append(y)
                queue.append(y)
    action = np.array(
        [[index[_mat_key((g @ x) % modulus, modulus)] for x in elems] for g in mats],
        dtype=np.int64,
    )
    return FiniteQuotient(level, action, 0, label=f"sl2 mod {modulus}",
                          points=tuple(_mat_key(x, modulus) for x in elems))


def sl2_tower(prime: int, levels: int, gens=SANOV_GENERATORS) -> QuotientTower:
    """Nested tower: trivial level 0, then moduli p, p^2, ..., p^levels."""
    qs = [sl2_quotient(1, gens, 0)]
    links = []
    for n in range(1, levels + 1):
        q = sl2_quotient(prime**n, gens, n)
        low = qs[-1]
        lower_mod = prime ** (n - 1)
        lookup = {pt: i for i, pt in enumerate(low.points)}
        proj = np.array([lookup[tuple(x % lower_mod for x in pt)] for pt in q.points])
        link = TowerLink(proj, low.size)
        failures = check_link(link, low, q)
        if failures:
            raise QuotientError("; ".join(failures))
        qs.append(q)
        links.append(link)
    return QuotientTower(tuple(qs), tuple(links))


def sl2_family(moduli: Sequence[int], gens=SANOV_GENERATORS) -> QuotientTower:
    """Non-nested family (e.g. distinct primes), for gap surveys only."""
    qs = tuple(sl2_quotient(m, gens, n) for n, m in enumerate(moduli))
    return QuotientTower(qs, (), kind="family")


# --------------------------------------------------------------------------
# permutation files


def format_quotient(q: FiniteQuotient) -> str:
    lines = [f"nu {q.size} gens {q.rank}"]
    for name, perm in zip(q.names, q.action):
        lines.append(name + " " + " ".join(str(int(x)) for x in perm))
    lines.append(f"basepoint {q.basepoint}")
    return "\n".join(lines) + "\n"


def save_quotient(q: FiniteQuotient, path: str | Path) -> None:
    Path(path).write_text(format_quotient(q))


def parse_quotient(text: str, level: int = 0) -> FiniteQuotient:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise QuotientError("empty permutation file")
    head = rows[0]
    if len(head) != 4 or head[0] != "nu" or head[2] != "gens":
        raise QuotientError("header must read 'nu <N> gens <k>'")
    try:
        nu, k = int(head[1]), int(head[3])
    except ValueError:
        raise QuotientError("header sizes must be integers") from None
    body = rows[1:]
    if len(body) != k + 1:
        raise QuotientError(f"expected {k} generator lines and a basepoint line")
    names, perms = [], []
    for row in body[:k]:
        if len(row) != nu + 1:
            raise QuotientError(f"generator line {row[0]!r} has {len(row) - 1} images, expected {nu}")
        names.append(row[0])
        try:
            perms.append([int(x) for x in row[1:]])
        except ValueError:
            raise QuotientError(f"non-integer image in line {row[0]!r}") from None
    last = body[k]
    if len(last) != 2 or last[0] != "basepoint":
        raise QuotientError("last line must read 'basepoint <i>'")
    return FiniteQuotient(level, np.array(perms, dtype=np.int64).reshape(k, nu), int(last[1]),
                          names=tuple(names), label="file")


def load_quotient(path: str | Path, level: int = 0) -> FiniteQuotient:
    return parse_quotient(Path(path).read_text(), level)


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [(name, detail) for name, ok, detail in self.checks if not ok]


def tower_validate(t: QuotientTower) -> ValidationReport:
    report = ValidationReport()
    for q in t.levels:
        inv_ok = all(
            np.array_equal(q.letter_perm(-i)[q.letter_perm(i)], np.arange(q.size))
            for i in range(1, q.rank + 1)
        )
        report.add(f"level {q.level}: generator inverses", inv_ok)
        report.add(f"level {q.level}: transitive", len(q.orbit(q.basepoint)) == q.size)
        g = q.graph
        if g is not None:
            report.add(f"level {q.level}: spanning tree size", len(g.tree_marks) == g.vertex_count - 1)
            report.add(
                f"level {q.level}: Euler formula",
                g.cotree_rank == g.edge_count - g.vertex_count + 1,
                f"r={g.cotree_rank}",
            )
    if t.kind == "family":
        return report
    for n in range(1, len(t.levels)):
        lo, hi = t.levels[n - 1], t.levels[n]
        ratio_ok = hi.size > lo.size and hi.size % lo.size == 0 and hi.size // lo.size >= 2
        report.add(f"level {n}: size ratio", ratio_ok, f"{lo.size} -> {hi.size}")
        if n - 1 < len(t.links):
            failures = check_link(t.links[n - 1], lo, hi)
            report.add(f"level {n}: link", not failures, "; ".join(failures))
        else:
            report.add(f"level {n}: link", False, "missing link")
    return report
