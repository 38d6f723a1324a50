"""Shell enumeration of shifted integer lattices and rigorous tail bounds."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ConvergenceBudgetExceeded

DEFAULT_BUDGET = 2_000_000


def enumerate_shell(form, shift, cutoff: float, budget: int = DEFAULT_BUDGET):
    """All xi in Z^n with (xi+shift)^T form (xi+shift) <= cutoff.

    Returns ``(xi, values)`` sorted by rounded value, ties broken
    lexicographically in xi, so the order never depends on scheduling.
    """
    form = np.asarray(form, dtype=float)
    shift = np.asarray(shift, dtype=float)
    n = form.shape[0]
    inv_diag = np.diag(np.linalg.inv(form))
    radius = np.sqrt(np.maximum(cutoff, 0.0) * inv_diag)
    lo = np.ceil(-radius - shift).astype(int)
    hi = np.floor(radius - shift).astype(int)
    sizes = np.maximum(hi - lo + 1, 0)
    box = int(np.prod(sizes.astype(float)))
    if box > budget:
        raise ConvergenceBudgetExceeded(
            f"shell of cutoff {cutoff:.3g} needs {box} candidate points (budget {budget})"
        )
    if box == 0:
        return np.zeros((0, n), dtype=int), np.zeros(0)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(n)]
    chunks_xi = []
    chunks_val = []
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0), dtype=int)
    for first in axes[0]:
        xi = np.concatenate([np.full((rest.shape[0], 1), first), rest], axis=1)
        x = xi + shift
        val = np.einsum("ij,jk,ik->i", x, form, x)
        keep = val <= cutoff
        chunks_xi.append(xi[keep])
        chunks_val.append(val[keep])
    xi = np.concatenate(chunks_xi, axis=0).astype(int)
    val = np.concatenate(chunks_val)
    keys = [xi[:, i] for i in range(n - 1, -1, -1)] + [np.round(val, 9)]
    order = np.lexsort(keys)
    return xi[order], val[order]


def point_count_bound(level: float, mu_min: float, n: int) -> float:
    """Upper bound on #{x in Z^n + shift : mu_min |x|^2 <= level}."""
    rho = math.sqrt(max(level, 0.0) / mu_min)
    return (2.0 * rho + 1.0) ** n


def tail_bound(
    g: Callable[[float], float],
    cutoff: float,
    mu_min: float,
    n: int,
    step: float,
    max_steps: int = 100_000,
) -> float:
    """Bound sum of g(v) over lattice values v > cutoff, for decreasing g >= 0.

    The values are split into slabs (L_j, L_{j+1}] with L_j = cutoff + j*step;
    each slab holds at most ``point_count_bound(L_{j+1})`` points, each
    contributing at most g(L_j).
    """
    total = 0.0
    for j in range(max_steps):
        lev = cutoff + j * step
        gv = g(lev)
        if gv == 0.0:
            break
        term = point_count_bound(lev + step, mu_min, n) * gv
        total += term
        if j > 4 and term < 1e-18 * total:
            break
    return total
