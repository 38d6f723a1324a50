"""Random and structured finite complexes used by tests and experiments."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .hodge import FiniteHodgeComplex, StarOperator


def random_spd(rng: np.random.Generator, n: int, spread: float = 1.0) -> np.ndarray:
    """Q diag(exp(U(-spread, spread))) Q^T with Haar-ish Q."""
    if n == 0:
        return np.zeros((0, 0))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.exp(rng.uniform(-spread, spread, n))
    g = (q * w) @ q.T
    return 0.5 * (g + g.T)


def random_invertible(rng: np.random.Generator, n: int, spread: float = 0.5) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0))
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q1 * np.exp(rng.uniform(-spread, spread, n))) @ q2


def _canonical(ranks: Sequence[int], betti: Sequence[int], scales=None):
    """Block differentials: C^q = [target of d_{q-1} | harmonic | source of d_q]."""
    top = len(betti) - 1
    if len(ranks) != top:
        raise ValueError("need one rank per differential")
    r = [0] + list(ranks) + [0]
    dims = [r[q] + betti[q] + r[q + 1] for q in range(top + 1)]
    d = []
    for q in range(top):
        m = np.zeros((dims[q + 1], dims[q]))
        k = ranks[q]
        block = np.eye(k) if scales is None else np.diag(scales[q])
        m[:k, dims[q] - k:] = block
        d.append(m)
    return dims, d


def change_basis(c: FiniteHodgeComplex, mats: Sequence[np.ndarray]) -> FiniteHodgeComplex:
    """Isometric relabelling x -> P x: d -> P d P^-1, gram -> P^-T gram P^-1."""
    inv = [np.linalg.inv(p) if p.size else p for p in mats]
    d = [mats[q + 1] @ dq @ inv[q] for q, dq in enumerate(c.d)]
    g = [iv.T @ gq @ iv for iv, gq in zip(inv, c.gram)]
    g = [0.5 * (x + x.T) for x in g]
    return FiniteHodgeComplex.build(d, g, dims=c.dims, check=False)


def random_complex(rng: np.random.Generator, ranks: Sequence[int], betti: Sequence[int],
                   spread: float = 0.5, scramble: bool = True) -> FiniteHodgeComplex:
    """Complex with prescribed ranks and Betti numbers, random grams and bases."""
    scales = [np.exp(rng.uniform(-spread, spread, k)) for k in ranks]
    dims, d = _canonical(ranks, betti, scales)
    c = FiniteHodgeComplex.build(d, [random_spd(rng, n, spread) for n in dims], dims=dims, check=False)
    if scramble:
        c = change_basis(c, [random_invertible(rng, n, spread) for n in dims])
    return c


def random_shape(rng: np.random.Generator, top: int, max_rank: int = 3, acyclic: bool = False):
    ranks = [int(rng.integers(1, max_rank + 1)) for _ in range(top)]
    betti = [0] * (top + 1) if acyclic else [int(rng.integers(0, 3)) for _ in range(top + 1)]
    return ranks, betti


def dual_double(c: FiniteHodgeComplex, middle_signs: Sequence[int] = (), rng: np.random.Generator | None = None,
                spread: float = 0.5) -> tuple[FiniteHodgeComplex, StarOperator]:
    """D = C + C^dual on degrees 0..2N with an isometric degree-reversing star.

    ``c`` must have identity grams. D^q = C^q + C^{2N-q}-slot with d_D acting
    as d on the first summand and as the transpose (with sign) on the second,
    and star swaps the summands. Optional extra harmonic middle-degree lines
    carry star = +-1, giving a nonzero signature. With ``rng`` the result is
    scrambled by random bases and the star is transported along.
    """
    n = c.top
    for g in c.gram:
        if g.size and not np.allclose(g, np.eye(g.shape[0])):
            raise ValueError("dual_double expects identity grams")
    top = 2 * n
    lower = [c.dims[q] if q <= n else 0 for q in range(top + 1)]
    upper = [c.dims[top - q] if q >= n else 0 for q in range(top + 1)]
    extra = [len(middle_signs) if q == n else 0 for q in range(top + 1)]
    dims = [a + b + e for a, b, e in zip(lower, upper, extra)]
    d = []
    for q in range(top):
        m = np.zeros((dims[q + 1], dims[q]))
        if q < n:
            m[: lower[q + 1], : lower[q]] = c.d[q]
        else:
            # second summand: (C^{2N-q})^* -> (C^{2N-q-1})^*, via (-1)^q d^T
            src, dst = top - q, top - q - 1
            off_s, off_d = lower[q], lower[q + 1]
            m[off_d: off_d + c.dims[dst], off_s: off_s + c.dims[src]] = (-1) ** q * c.d[dst].T
        d.append(m)
    stars = []
    for q in range(top + 1):
        s = np.zeros((dims[top - q], dims[q]))
        if q < n:
            s[lower[top - q]: lower[top - q] + upper[top - q], : lower[q]] = np.eye(lower[q])
        elif q > n:
            s[: lower[top - q], lower[q]: lower[q] + upper[q]] = np.eye(upper[q])
        else:
            k = c.dims[n]
            s[k: 2 * k, :k] = np.eye(k)
            s[:k, k: 2 * k] = np.eye(k)
            e = len(middle_signs)
            s[2 * k:, 2 * k:] = np.diag(np.asarray(middle_signs, dtype=float)) if e else np.zeros((0, 0))
        stars.append(s)
    dc = FiniteHodgeComplex.build(d, None, dims=dims, check=True)
    star = StarOperator(tuple(stars))
    if rng is not None:
        mats = [random_invertible(rng, k, spread) for k in dims]
        dc = change_basis(dc, mats)
        inv = [np.linalg.inv(p) if p.size else p for p in mats]
        star = StarOperator(tuple(mats[top - q] @ s @ inv[q] for q, s in enumerate(stars)))
    return dc, star


def direct_sum(*cs: FiniteHodgeComplex) -> FiniteHodgeComplex:
    import scipy.linalg as sla

    top = cs[0].top
    if any(c.top != top for c in cs):
        raise ValueError("summands need the same top degree")
    d = [sla.block_diag(*[c.d[q] for c in cs]) for q in range(top)]
    g = [sla.block_diag(*[c.gram[q] for c in cs]) for q in range(top + 1)]
    dims = [sum(c.dims[q] for c in cs) for q in range(top + 1)]
    return FiniteHodgeComplex.build(d, g, dims=dims, check=False)
