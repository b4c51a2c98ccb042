"""Growth functions and support-constrained norms on a single level.

N_s(a, n) is the largest ||lambda_n(a) xi|| over unit vectors xi with at
most ``s`` nonzero coordinates; with s = k * gamma_n it is the per-level
quantity behind the norm of pi_gamma.  The invariance deficiency is the
smallest ||(lambda_n(x) - 1) xi|| over the same vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .quotients import FiniteQuotient, QuotientTower
from .spectra import (
    DEFAULT_TOL,
    SparseOperator,
    assemble,
    deterministic_start,
    op_norm,
    regular_norm,
    rho_norm,
)
from .words import GroupAlgebraElement, Word

EXHAUSTIVE_CAP = 2 * 10**6
_BATCH = 4096


# --------------------------------------------------------------------------
# growth functions


@dataclass(frozen=True)
class GrowthFunction:
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if any(v < 1 for v in vals):
            raise ValueError("growth values must be >= 1")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("growth function must be nondecreasing")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def check_sizes(self, sizes: Sequence[int]) -> None:
        if len(sizes) != len(self.values):
            raise ValueError("growth function and tower have different lengths")
        for n, (g, nu) in enumerate(zip(self.values, sizes)):
            if g > nu:
                raise ValueError(f"gamma_{n} = {g} exceeds nu_{n} = {nu}")

    @classmethod
    def minimal(cls, levels: int) -> GrowthFunction:
        return cls((1,) * levels)

    @classmethod
    def maximal(cls, sizes: Sequence[int]) -> GrowthFunction:
        return cls(tuple(sizes))

    @classmethod
    def load(cls, path) -> GrowthFunction:
        with open(path) as fh:
            return cls(tuple(int(line) for line in fh if line.strip()))


@dataclass(frozen=True)
class GrowthComparison:
    """Finite-prefix diagnostics for the orders on growth functions.

    ``precedes`` (gamma < gamma') is flagged when gamma_n/gamma'_n strictly
    decreases along the built levels; ``le`` unless the ratio strictly
    increases; ``equivalent`` when both directions hold.
    """

    ratios: tuple[Fraction, ...]
    ratio_min: Fraction
    ratio_max: Fraction
    le: bool
    ge: bool
    equivalent: bool
    precedes: bool
    succeeds: bool


def compare_growth(g1: GrowthFunction, g2: GrowthFunction) -> GrowthComparison:
    if len(g1) != len(g2):
        raise ValueError("growth functions cover different numbers of levels")
    ratios = tuple(Fraction(a, b) for a, b in zip(g1.values, g2.values))
    dec = len(ratios) >= 2 and all(b < a for a, b in zip(ratios, ratios[1:]))
    inc = len(ratios) >= 2 and all(b > a for a, b in zip(ratios, ratios[1:]))
    le, ge = not inc, not dec
    return GrowthComparison(ratios, min(ratios), max(ratios), le, ge, le and ge, dec, inc)


@dataclass
class SupportBoundedVector:
    level: int
    entries: dict[int, complex]
    budget: int

    def __post_init__(self):
        self.entries = {int(k): complex(v) for k, v in self.entries.items() if v != 0}
        if len(self.entries) > self.budget:
            raise ValueError(f"support {len(self.entries)} exceeds budget {self.budget}")

    def dense(self, size: int) -> np.ndarray:
        v = np.zeros(size, dtype=complex)
        for k, c in self.entries.items():
            v[k] = c
        return v

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.entries.values()))

    def multiplier(self, gamma_n: int) -> Fraction:
        return Fraction(self.budget, gamma_n)


# --------------------------------------------------------------------------
# support-constrained norms


def _columns(M: SparseOperator, T) -> np.ndarray:
    return M.matrix[:, list(T)].toarray()


def _gram(M: SparseOperator) -> np.ndarray:
    A = M.matrix
    return (A.conj().T @ A).toarray()


def sparse_norm_on_support(M: SparseOperator, T: Iterable[int]) -> float:
    """Largest singular value of the columns of M indexed by T."""
    T = sorted(set(int(t) for t in T))
    if not T:
        raise ValueError("empty support")
    G = _columns(M, T)
    G = G.conj().T @ G
    return math.sqrt(max(float(np.linalg.eigvalsh(G)[-1]), 0.0))


def _batched_extreme(K: np.ndarray, supports: np.ndarray, largest: bool) -> np.ndarray:
    sub = K[supports[:, :, None], supports[:, None, :]]
    ev = np.linalg.eigvalsh(sub)
    return ev[:, -1] if largest else ev[:, 0]


def _exhaustive(K: np.ndarray, s: int, largest: bool, cap: int):
    n = K.shape[0]
    total = comb(n, s)
    if total > cap:
        raise ValueError(f"C({n},{s}) = {total} supports exceeds cap {cap}")
    best_val, best_sup = None, None
    it = combinations(range(n), s)
    while True:
        chunk = list(next(it, None) for _ in range(_BATCH))
        chunk = [c for c in chunk if c is not None]
        if not chunk:
            break
        sups = np.array(chunk, dtype=np.int64)
        vals = _batched_extreme(K, sups, largest)
        j = int(np.argmax(vals) if largest else np.argmin(vals))  # first index wins ties
        v = float(vals[j])
        if best_val is None or (v > best_val if largest else v < best_val):
            best_val, best_sup = v, tuple(int(t) for t in sups[j])
    return best_val, best_sup


def sparse_norm_exhaustive(M: SparseOperator, s: int, cap: int = EXHAUSTIVE_CAP):
    """Exact N_s by enumerating every support of size s; returns (value, support)."""
    if not 1 <= s <= M.dim:
        raise ValueError("budget must lie in 1..nu")
    val, sup = _exhaustive(_gram(M), s, True, cap)
    return math.sqrt(max(val, 0.0)), sup


def _top_s(v: np.ndarray, s: int) -> np.ndarray:
    # stable sort on -|v| keeps the lowest index among ties
    return np.sort(np.argsort(-np.abs(v), kind="stable")[:s])


def sparse_norm_truncated_power(
    M: SparseOperator,
    s: int,
    restarts: int | None = None,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = 1000,
    polish: int = 3,
):
    """Truncated power method for N_s; returns (value, support).

    Starts: the deterministic start, every column indicator (when
    ``restarts`` is None and nu is small) or ``restarts`` seeded random
    vectors.  Each run keeps the s largest magnitudes of M*M v; every
    support visited is re-solved exactly, and the ``polish`` best ones are
    then improved by single-element swaps while that helps.
    """
    n = M.dim
    if not 1 <= s <= n:
        raise ValueError("budget must lie in 1..nu")
    A = M.matrix
    AH = A.conj().T.tocsc()
    starts = [deterministic_start(n)]
    if restarts is None:
        if n <= 64:
            starts += [np.eye(n)[i] for i in range(n)]
        restarts = 8
    rng = np.random.default_rng(seed)
    cplx = not M.is_real()
    for _ in range(restarts):
        v = rng.standard_normal(n)
        if cplx:
            v = v + 1j * rng.standard_normal(n)
        starts.append(v)

    cache: dict[tuple[int, ...], float] = {}

    def visit(sup) -> None:
        key = tuple(int(t) for t in sup)
        if key not in cache:
            cache[key] = sparse_norm_on_support(M, key)

    for v0 in starts:
        sup = _top_s(v0, s)
        v = np.zeros(n, dtype=complex if cplx else float)
        v[sup] = v0[sup]
        if not np.any(v):
            v[sup] = 1.0
        v /= np.linalg.norm(v)
        visit(sup)
        for _ in range(max_iter):
            w = AH @ (A @ v)
            sup = _top_s(w, s)
            visit(sup)
            nv = np.zeros_like(v)
            nv[sup] = w[sup]
            nrm = np.linalg.norm(nv)
            if nrm == 0:
                break
            nv /= nrm
            done = np.linalg.norm(nv - v) <= tol
            v = nv
            if done:
                break
    # polish the best few supports by exact single swaps
    for sup in sorted(cache, key=lambda key: -cache[key])[:polish]:
        cur = sup
        improved = True
        while improved:
            improved = False
            outside = [j for j in range(n) if j not in cur]
            for i in range(len(cur)):
                for j in outside:
                    cand = tuple(sorted(cur[:i] + cur[i + 1 :] + (j,)))
                    visit(cand)
                    if cache[cand] > cache[cur] + 1e-15:
                        cur, improved = cand, True
                        break
                if improved:
                    break
    # every visited support is re-solved exactly; ties go to the first visited
    best_sup = max(cache, key=lambda key: cache[key])
    return cache[best_sup], best_sup


def max_column_norm(M: SparseOperator) -> float:
    A = M.matrix
    return float(np.sqrt(np.asarray(abs(A).power(2).sum(axis=0)).ravel().max()))


def sparse_norm(M: SparseOperator, s: int, strategy: str = "auto", cap: int = EXHAUSTIVE_CAP, **kw):
    """Dispatch: ``exhaustive``, ``power`` or ``auto`` (exhaustive under the cap)."""
    if strategy == "auto":
        strategy = "exhaustive" if comb(M.dim, s) <= cap else "power"
    if strategy == "exhaustive":
        return sparse_norm_exhaustive(M, s, cap)
    if strategy == "power":
        return sparse_norm_truncated_power(M, s, **kw)
    raise ValueError(f"unknown strategy {strategy!r}")


# --------------------------------------------------------------------------
# invariance deficiency


def _deficiency_gram(M: SparseOperator) -> np.ndarray:
    D = M.matrix.toarray() - np.eye(M.dim)
    return D.conj().T @ D


def invariance_deficiency_on_support(M: SparseOperator, T: Iterable[int]) -> float:
    """min ||(M - 1) xi|| over unit xi supported in T."""
    T = sorted(set(int(t) for t in T))
    if not T:
        raise ValueError("empty support")
    D = _columns(M, T)
    D[T, np.arange(len(T))] -= 1.0
    return float(np.linalg.svd(D, compute_uv=False)[-1])


def min_invariance_deficiency(
    M: SparseOperator,
    s: int,
    strategy: str = "auto",
    folner_sets: Sequence[Iterable[int]] = (),
    cap: int = EXHAUSTIVE_CAP,
):
    """Smallest deficiency over supports of size s; returns (value, support).

    ``exhaustive`` is exact; ``greedy`` grows the support one column at a
    time; ``folner-seeded`` evaluates the supplied sets (each of size <= s)
    and keeps the best.  ``auto`` picks exhaustive under the cap.
    """
    n = M.dim
    if not 1 <= s <= n:
        raise ValueError("budget must lie in 1..nu")
    if strategy == "auto":
        strategy = "exhaustive" if comb(n, s) <= cap else "greedy"
    if strategy == "exhaustive":
        val, sup = _exhaustive(_deficiency_gram(M), s, False, cap)
        return math.sqrt(max(val, 0.0)), sup
    if strategy == "greedy":
        K = _deficiency_gram(M)
        diag = np.real(np.diag(K))
        chosen = [int(np.argmin(diag))]
        val = float(diag[chosen[0]])
        while len(chosen) < s:
            rest = np.setdiff1d(np.arange(n), chosen)
            sups = np.concatenate(
                [np.broadcast_to(np.array(chosen), (rest.size, len(chosen))), rest[:, None]], axis=1
            )
            vals = np.concatenate(
                [_batched_extreme(K, sups[i : i + _BATCH], False) for i in range(0, rest.size, _BATCH)]
            )
            j = int(np.argmin(vals))
            chosen.append(int(rest[j]))
            val = float(vals[j])
        return math.sqrt(max(val, 0.0)), tuple(sorted(chosen))
    if strategy == "folner-seeded":
        best = None
        for A in folner_sets:
            A = tuple(sorted(set(int(t) for t in A)))
            if len(A) > s:
                raise ValueError(f"seed set of size {len(A)} exceeds budget {s}")
            v = invariance_deficiency_on_support(M, A)
            if best is None or v < best[0]:
                best = (v, A)
        if best is None:
            raise ValueError("folner-seeded strategy needs at least one set")
        return best
    raise ValueError(f"unknown strategy {strategy!r}")


def tau_lower_bound(delta: float, s: int, nu: int) -> float:
    """delta * sqrt(1 - s/nu): floor on the deficiency of any s-sparse unit vector."""
    if not 0 <= s <= nu or delta < 0:
        raise ValueError("need 0 <= s <= nu and delta >= 0")
    return delta * math.sqrt(max(0.0, 1.0 - s / nu))


# --------------------------------------------------------------------------
# sparse-approximation facts


def best_sparse_approx_error_sq(m: int, s: int) -> Fraction:
    """Exact squared distance from the unit flat vector on m points to s-sparse vectors."""
    if not 0 <= s <= m or m < 1:
        raise ValueError("need 0 <= s <= m and m >= 1")
    return best_s_term_error_sq([Fraction(1, m)] * m, s)


def best_sparse_approx_error(m: int, s: int) -> float:
    return math.sqrt(best_sparse_approx_error_sq(m, s))


def best_s_term_error_sq(weights: Sequence, s: int):
    """Squared l2 error of the best s-term approximation, given the squared entries.

    Works with Fractions for exact arithmetic: the optimum keeps the s
    largest entries and the error is the sum of the rest.
    """
    w = sorted(weights, reverse=True)
    if not 0 <= s <= len(w):
        raise ValueError("need 0 <= s <= number of entries")
    return sum(w[s:], type(w[0])(0) if w else 0)


def sup_norm_energy_bound(xi: np.ndarray) -> bool:
    """||xi||^2 <= |supp xi| * ||xi||_inf^2."""
    xi = np.asarray(xi)
    s = int(np.count_nonzero(xi))
    if s == 0:
        return True
    return float(np.vdot(xi, xi).real) <= s * float(np.max(np.abs(xi))) ** 2 * (1 + 1e-12)


def support_invariance_check(q: FiniteQuotient, g: Word, xi: np.ndarray) -> bool:
    """|supp lambda_n(g) xi| == |supp xi| (generators permute points)."""
    xi = np.asarray(xi)
    moved = np.zeros_like(xi)
    moved[q.act_all(g)] = xi
    return int(np.count_nonzero(moved)) == int(np.count_nonzero(xi))


# --------------------------------------------------------------------------
# per-level report


@dataclass
class InterpolationRow:
    level: int
    nu: int
    gamma: int
    budget: int
    sparse_norm: float
    sparse_strategy: str
    lambda_norm: float
    rho_norm: float | None
    regular_norm: float
    alpha: int | None
    budget_over_alpha: float | None
    gamma_over_nu: float
    gamma_over_index: float | None
    partial: bool = False

    FIELDS = (
        "level", "nu", "gamma", "budget", "sparse_norm", "sparse_strategy", "lambda_norm",
        "rho_norm", "regular_norm", "alpha", "budget_over_alpha", "gamma_over_nu",
        "gamma_over_index", "partial",
    )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def norm_interpolation_report(
    a: GroupAlgebraElement,
    tower: QuotientTower,
    gamma: GrowthFunction,
    k: int = 1,
    regular_radius: int = 8,
    tol: float = DEFAULT_TOL,
    cap: int = EXHAUSTIVE_CAP,
) -> list[InterpolationRow]:
    """One row per level; per-level values only, no limits.

    ``gamma_over_index`` divides by nu_n / nu_{n-1}; both candidate
    denominators for the free-group hypothesis are reported.
    """
    from .geometry import alpha as alpha_fn

    gamma.check_sizes(tower.sizes)
    reg = regular_norm(a, regular_radius, tol=tol).value
    rows = []
    for n, q in enumerate(tower.levels):
        M = assemble(a, q)
        budget = min(k * gamma[n], q.size)
        if budget == q.size:
            sn, strat = op_norm(M, tol).value, "full"
        elif comb(q.size, budget) <= cap:
            sn, strat = sparse_norm_exhaustive(M, budget, cap)[0], "exhaustive"
        else:
            sn, strat = sparse_norm_truncated_power(M, budget, tol=tol)[0], "power"
        lam = op_norm(M, tol).value
        rho = None
        if n >= 1 and tower.kind == "tower":
            rho = rho_norm(a, q, tower.link(n), tol).value
        al = alpha_fn(q).value
        index = q.size / tower.levels[n - 1].size if n >= 1 and tower.kind == "tower" else None
        rows.append(
            InterpolationRow(
                n, q.size, gamma[n], budget, sn, strat, lam, rho, reg, al,
                budget / al if al else None, gamma[n] / q.size,
                gamma[n] / index if index else None, q.partial,
            )
        )
    return rows
