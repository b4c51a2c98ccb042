"""Quasi-regular operators lambda_n(a) and their spectral quantities.

``assemble`` builds lambda_n(a) with the convention lambda_n(g) delta_x =
delta_{g.x}.  Norms come from power iteration on M*M with a certified
residual; every reported value is a Rayleigh quotient and hence a lower
bound for the true norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, get_blas_funcs

from .quotients import FiniteQuotient, TowerLink
from .words import GroupAlgebraElement, Word

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
DENSE_ORACLE_MAX = 512
_START_SEED = 20240611


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Square sparse matrix of lambda_n(a), stored column-compressed."""

    matrix: sp.csc_matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.row, coo.col))
        return [(int(coo.row[i]), int(coo.col[i]), complex(coo.data[i])) for i in order]

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator(sp.csc_matrix(self.matrix @ other.matrix))
        return self.matrix @ other

    def adjoint(self) -> SparseOperator:
        return SparseOperator(sp.csc_matrix(self.matrix.conj().T))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data) or not np.any(self.matrix.data.imag)


@dataclass(frozen=True)
class SpectralResult:
    value: float
    residual: float
    iterations: int
    tol: float
    converged: bool = True

    def __float__(self) -> float:
        return self.value


def assemble(a: GroupAlgebraElement, q: FiniteQuotient) -> SparseOperator:
    """Matrix of lambda_n(a): entry (g.x, x) accumulates a_g."""
    n = q.size
    rows, cols, data = [], [], []
    cols_base = np.arange(n)
    for g, c in a.items():
        rows.append(q.act_all(g))
        cols.append(cols_base)
        data.append(np.full(n, c))
    if not rows:
        return SparseOperator(sp.csc_matrix((n, n), dtype=float))
    values = np.concatenate(data)
    if not np.any(values.imag):
        values = values.real
    m = sp.coo_matrix((values, (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    m = sp.csc_matrix(m)
    m.sum_duplicates()
    m.eliminate_zeros()
    return SparseOperator(m)


def deterministic_start(n: int) -> np.ndarray:
    """All-ones vector perturbed by index-dependent offsets.

    The offsets come from a fixed-seed generator.  An arithmetic pattern
    such as frac(i * golden) satisfies linear relations that can make the
    start exactly orthogonal to a character of a small abelian quotient.
    """
    return 1.0 + 0.5 * np.random.default_rng(_START_SEED).random(n)


def _normalize(v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    return v / nv if nv > 0 else v


def power_top(
    apply: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, np.ndarray, float, int, bool]:
    """Power iteration for the top eigenpair of a PSD operator.

    Returns ``(theta, v, residual, iterations, converged)`` with
    ``residual = ||A v - theta v||``.
    """
    v = _normalize(np.asarray(v0))
    if not np.any(v):
        return 0.0, v, 0.0, 0, True
    theta, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = apply(v)
        theta = float(np.vdot(v, w).real)
        res = float(np.linalg.norm(w - theta * v))
        if res <= tol:
            return theta, v, res, it, True
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, v, 0.0, it, True
        v = w / nw
    return theta, v, res, max_iter, False


def _starts(n: int, restarts: int, seed: int, complex_: bool) -> list[np.ndarray]:
    out = [deterministic_start(n)]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        v = rng.standard_normal(n)
        if complex_:
            v = v + 1j * rng.standard_normal(n)
        out.append(v)
    return out


def _norm_from_gram(apply, n, tol, max_iter, restarts, seed, complex_) -> SpectralResult:
    best = None
    for v0 in _starts(n, restarts, seed, complex_):
        theta, _, res, it, ok = power_top(apply, v0, tol, max_iter)
        cand = SpectralResult(math.sqrt(max(theta, 0.0)), res, it, tol, ok)
        if best is None or cand.value > best.value:
            best = cand
    return best


def op_norm(
    M: SparseOperator,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    restarts: int = 0,
    seed: int = 0,
) -> SpectralResult:
    """Operator norm ||M|| by power iteration on M*M."""
    A = M.matrix
    AH = A.conj().T.tocsc()
    return _norm_from_gram(lambda v: AH @ (A @ v), M.dim, tol, max_iter, restarts, seed,
                           not M.is_real())


def trivial_vector(q: FiniteQuotient) -> np.ndarray:
    return np.full(q.size, 1.0 / math.sqrt(q.size))


@dataclass(frozen=True)
class GapResult:
    delta: float
    mu2: float | None
    residual: float
    iterations: int
    degenerate: bool = False
    converged: bool = True


def _check_averaging(x: GroupAlgebraElement) -> None:
    if not x.is_self_adjoint(tol=1e-12):
        raise ValueError("spectral gap needs a self-adjoint element")
    coeffs = np.array(list(x.values()))
    if np.any(np.abs(coeffs.imag) > 0) or np.any(coeffs.real < 0) or abs(coeffs.real.sum() - 1) > 1e-12:
        raise ValueError("spectral gap needs nonnegative real coefficients summing to 1")


def spectral_gap(
    q: FiniteQuotient,
    x: GroupAlgebraElement,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GapResult:
    """delta = 1 - mu2, mu2 the top eigenvalue of lambda_n(x) off the constants.

    For nu = 1 the complement is empty; the result is flagged ``degenerate``
    and carries delta = 2, the largest possible value of |mu - 1|.
    """
    _check_averaging(x)
    if q.size == 1:
        return GapResult(2.0, None, 0.0, 0, degenerate=True)
    M = assemble(x, q).matrix

    def apply(v):
        # (M + I)/2 has spectrum in [0, 1]; deflate the constants every step
        w = 0.5 * (M @ v + v)
        return w - w.mean()

    v0 = deterministic_start(q.size)
    theta, _, res, it, ok = power_top(apply, v0 - v0.mean(), tol, max_iter)
    mu2 = 2.0 * theta - 1.0
    return GapResult(1.0 - mu2, mu2, 2.0 * res, it, converged=ok)


# --------------------------------------------------------------------------
# level links


def uplift(link: TowerLink, xi: np.ndarray) -> np.ndarray:
    """U xi(x) = xi(q(x)) / sqrt(fiber size); an isometric intertwiner."""
    xi = np.asarray(xi)
    if xi.shape[0] != link.lower_size:
        raise ValueError("vector does not live on the lower level")
    return xi[link.projection] / math.sqrt(link.fiber_size)


def downsum(link: TowerLink, xi: np.ndarray) -> np.ndarray:
    """Adjoint of ``uplift``: scaled fiber sums."""
    xi = np.asarray(xi)
    out = np.zeros(link.lower_size, dtype=xi.dtype)
    np.add.at(out, link.projection, xi)
    return out / math.sqrt(link.fiber_size)


def project_old(link: TowerLink, xi: np.ndarray) -> np.ndarray:
    """Q_n xi: orthogonal projection onto the lifted lower-level subspace."""
    return uplift(link, downsum(link, xi))


def project_new(link: TowerLink, xi: np.ndarray) -> np.ndarray:
    """P_n xi = xi - Q_n xi."""
    return np.asarray(xi) - project_old(link, xi)


def rho_norm(
    a: GroupAlgebraElement,
    q: FiniteQuotient,
    link: TowerLink,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    restarts: int = 0,
    seed: int = 0,
) -> SpectralResult:
    """Norm of lambda_n(a) on the orthogonal complement of the lifted level n-1."""
    if link.upper_size != q.size:
        raise ValueError("link does not end at this quotient")
    if link.lower_size == q.size:
        raise ValueError("complement of the lifted subspace is zero")
    A = assemble(a, q).matrix
    AH = A.conj().T.tocsc()

    def apply(v):
        v = project_new(link, v)
        return project_new(link, AH @ (A @ v))

    starts = [project_new(link, v) for v in _starts(q.size, restarts, seed, not a.is_real())]
    best = None
    for v0 in starts:
        theta, _, res, it, ok = power_top(apply, v0, tol, max_iter)
        cand = SpectralResult(math.sqrt(max(theta, 0.0)), res, it, tol, ok)
        if best is None or cand.value > best.value:
            best = cand
    return best


# --------------------------------------------------------------------------
# regular representation on a ball of the free group


class FreeBall:
    """The ball B_R(e) of F_rank as an array-encoded tree.

    Node ``h`` stores its first letter and ``parent`` = h with the first
    letter removed, so left multiplication by a letter either cancels
    (move to the parent) or prepends (move to a child).  Letters are coded
    ``2(i-1)`` for generator i and ``2(i-1)+1`` for its inverse.
    """

    def __init__(self, radius: int, rank: int = 2, cap: int = 10**7):
        from .geometry import ball_size

        size = ball_size(radius, rank)
        if size > cap:
            raise ValueError(f"ball of radius {radius} has {size} words, above cap {cap}")
        self.radius, self.rank, self.size = radius, rank, size
        nl = 2 * rank
        first = np.full(size, -1, dtype=np.int8)
        parent = np.full(size, -1, dtype=np.int32)
        length = np.zeros(size, dtype=np.int8)
        child = np.full((size, nl), -1, dtype=np.int32)
        layer = np.array([0], dtype=np.int32)
        nxt = 1
        for r in range(1, radius + 1):
            nodes = np.repeat(layer, nl)
            codes = np.tile(np.arange(nl, dtype=np.int8), layer.size)
            keep = codes != (first[nodes] ^ 1)
            if r == 1:
                keep[:] = True
            nodes, codes = nodes[keep], codes[keep]
            idx = np.arange(nxt, nxt + nodes.size, dtype=np.int32)
            child[nodes, codes] = idx
            first[idx], parent[idx], length[idx] = codes, nodes, r
            nxt += nodes.size
            layer = idx
        self.length, self._first, self._parent = length, first, parent
        self.left = []
        for c in range(nl):
            cancel = first == (c ^ 1)
            self.left.append(np.where(cancel, parent, child[:, c]).astype(np.int32))

    @staticmethod
    def code(letter: int) -> int:
        return 2 * (abs(letter) - 1) + (letter < 0)

    def word(self, h: int) -> Word:
        letters = []
        while h > 0:
            c = int(self._first[h])
            letters.append(-(c // 2 + 1) if c & 1 else c // 2 + 1)
            h = int(self._parent[h])
        return Word(tuple(letters))

    def left_map(self, w: Word) -> np.ndarray:
        """``img[h]`` = index of w*h, or -1 when it leaves the ball."""
        img = np.arange(self.size, dtype=np.int32)
        for letter in reversed(w.letters):
            ok = img >= 0
            img[ok] = self.left[self.code(letter)][img[ok]]
        return img


def _lanczos(apply, v0, tol, max_iter, both_ends):
    """Lanczos without reorthogonalisation for an extremal Ritz pair.

    Returns ``(value, residual_bound, iterations, converged)``; for
    ``both_ends`` the value is max(|theta_min|, |theta_max|).
    """
    q = _normalize(v0)
    q_prev = np.zeros_like(q)
    alphas, betas = [], []
    beta = 0.0
    value, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = apply(q)
        alpha = float(np.vdot(q, w).real)
        axpy = get_blas_funcs("axpy", (w, q))
        w = axpy(q, w, a=-alpha)
        if beta:
            w = axpy(q_prev, w, a=-beta)
        alphas.append(alpha)
        beta = float(np.linalg.norm(w))
        evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
        cands = [(abs(evals[-1]), beta * abs(evecs[-1, -1]))]
        if both_ends:
            cands.append((abs(evals[0]), beta * abs(evecs[-1, 0])))
        value, res = max(cands)
        if res <= tol or beta == 0.0:
            return value, res, it, True
        betas.append(beta)
        q_prev, q = q, w / beta
    return value, res, max_iter, False


def regular_norm(
    a: GroupAlgebraElement,
    radius: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = 2000,
    cap: int = 10**7,
) -> SpectralResult:
    """Norm of the compression of lambda(a) to l^2(B_R(e)) in l^2(F_2).

    A lower bound for ||lambda(a)||, nondecreasing in R.  Uses Lanczos on
    the compression itself when ``a`` is self-adjoint, else on C*C.
    """
    fb = FreeBall(radius, max(2, a.rank), cap)
    real = a.is_real()
    dtype = float if real else complex
    hermitian = a.is_self_adjoint(tol=0.0)
    terms = [(c.real if real else c, g) for g, c in a.items()]
    # gathers on a zero-padded vector: index -1 reads the pad
    # terms sharing a coefficient are summed first and scaled once
    def grouped(pairs):
        out: dict = {}
        for c, g in pairs:
            out.setdefault(c, []).append(fb.left_map(g).astype(np.intp))
        return list(out.items())

    pull = grouped((c, g.inverse()) for c, g in terms)
    push = [] if hermitian else grouped((np.conj(c), g) for c, g in terms)
    ext = np.zeros(fb.size + 1, dtype=dtype)
    buf = np.empty(fb.size, dtype=dtype)
    acc = np.empty(fb.size, dtype=dtype)

    def _gather(groups, v):
        ext[:-1] = v
        out = np.zeros(fb.size, dtype=dtype)
        for c, maps in groups:
            np.take(ext, maps[0], out=acc)
            for idx in maps[1:]:
                np.take(ext, idx, out=buf)
                np.add(acc, buf, out=acc)
            np.multiply(acc, c, out=acc)
            out += acc
        return out

    def C(v):
        return _gather(pull, v)

    def CH(v):
        return _gather(push, v)

    lengths = fb.length.astype(float)
    base = max(2 * fb.rank - 1, 1)
    v0 = base ** (-lengths / 2) * np.cos(np.pi * lengths / (2 * radius + 2))
    v0 = v0 * deterministic_start(fb.size)
    if hermitian:
        value, res, it, ok = _lanczos(C, v0.astype(dtype), tol, max_iter, both_ends=True)
    else:
        theta, res, it, ok = _lanczos(lambda v: CH(C(v)), v0.astype(dtype), tol, max_iter, False)
        value = math.sqrt(max(theta, 0.0))
    return SpectralResult(float(value), float(res), it, tol, ok)


def dense_eigvalsh(M: SparseOperator) -> np.ndarray:
    """Exact spectrum of a Hermitian operator (oracle use, nu <= 512)."""
    if M.dim > DENSE_ORACLE_MAX:
        raise ValueError(f"dense oracle limited to dimension {DENSE_ORACLE_MAX}")
    return np.linalg.eigvalsh(M.dense())
