"""Exterior algebra of R^n in the basis e_I, I increasing, with Koszul complexes.

A single Fourier mode of a twisted flat torus reduces the de Rham complex to
the Koszul complex ``a ^ .`` on Lambda^* R^n, whose Laplacian is |a|^2 in
every degree. Direct sums over modes give finite models with the same
degree multiplicities as the torus spectra.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
import sympy as sp

from .hodge import FiniteHodgeComplex, StarOperator


@lru_cache(maxsize=None)
def basis(n: int, q: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), q))


@lru_cache(maxsize=None)
def _index(n: int, q: int) -> dict:
    return {I: k for k, I in enumerate(basis(n, q))}


def _perm_sign(seq: Sequence[int]) -> int:
    s, seq = 1, list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


@lru_cache(maxsize=None)
def wedge_unit(n: int, q: int, i: int) -> tuple[tuple[int, int, int], ...]:
    """Nonzero entries (row, col, sign) of e_i ^ . : Lambda^q -> Lambda^{q+1}."""
    idx = _index(n, q + 1)
    out = []
    for col, I in enumerate(basis(n, q)):
        if i in I:
            continue
        sign = (-1) ** sum(1 for j in I if j < i)
        out.append((idx[tuple(sorted(I + (i,)))], col, sign))
    return tuple(out)


def wedge_matrix(a: Sequence, q: int, exact: bool = False):
    """Matrix of a ^ . : Lambda^q R^n -> Lambda^{q+1} R^n."""
    n = len(a)
    shape = (comb(n, q + 1), comb(n, q))
    if exact:
        m = sp.zeros(*shape)
        for i, ai in enumerate(a):
            ai = sp.Rational(Fraction(ai))
            for r, c, s in wedge_unit(n, q, i):
                m[r, c] += s * ai
        return m
    m = np.zeros(shape)
    for i, ai in enumerate(a):
        for r, c, s in wedge_unit(n, q, i):
            m[r, c] += s * float(ai)
    return m


@lru_cache(maxsize=None)
def hodge_star_entries(n: int, q: int) -> tuple[tuple[int, int, int], ...]:
    """*e_I = sign(I, I^c) e_{I^c} for the Euclidean metric and orientation e_1..e_n."""
    idx = _index(n, n - q)
    out = []
    for col, I in enumerate(basis(n, q)):
        comp = tuple(j for j in range(n) if j not in I)
        out.append((idx[comp], col, _perm_sign(I + comp)))
    return tuple(out)


def hodge_star(n: int, q: int, exact: bool = False):
    shape = (comb(n, n - q), comb(n, q))
    m = sp.zeros(*shape) if exact else np.zeros(shape)
    for r, c, s in hodge_star_entries(n, q):
        m[r, c] = s
    return m


def _block_diag_exact(blocks):
    return sp.diag(*blocks) if blocks else sp.zeros(0, 0)


def koszul_complex(modes: Sequence[Sequence], top: int | None = None, exact: bool = False) -> FiniteHodgeComplex:
    """Direct sum over modes a of (Lambda^* R^n, a ^ .), unit grams, degrees 0..top."""
    n = len(modes[0])
    top = n if top is None else top
    import scipy.linalg as sla

    d = [sla.block_diag(*[wedge_matrix(a, q) for a in modes]) for q in range(top)]
    dims = [comb(n, q) * len(modes) for q in range(top + 1)]
    exact_d = exact_gram = None
    if exact:
        exact_d = tuple(_block_diag_exact([wedge_matrix(a, q, exact=True) for a in modes]) for q in range(top))
        exact_gram = tuple(sp.eye(k) for k in dims)
    return FiniteHodgeComplex.build(d, None, dims=dims, exact_d=exact_d, exact_gram=exact_gram)


def koszul_star(n: int, n_modes: int) -> StarOperator:
    import scipy.linalg as sla

    return StarOperator(tuple(sla.block_diag(*[hodge_star(n, q)] * n_modes) for q in range(n + 1)))
