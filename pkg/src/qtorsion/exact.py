"""Rational-arithmetic torsion: no eigensolver, no rounding.

For a complex with rational differentials and grams the squared torsion is a
rational number. With ``B_q`` a rational basis of the coclosed complement
``gram^-1 im(d^T)`` the restricted operator ``d*d`` has determinant
``det(B^T d^T G' d B) / det(B^T G B)``, and its product over q with
alternating signs gives ``exp(2 log tau)``.
"""

from __future__ import annotations

from typing import Sequence

import sympy as sp

from .errors import ValidationError


def as_rational_matrix(rows) -> sp.Matrix:
    if isinstance(rows, sp.MatrixBase):
        return sp.Matrix(rows).applyfunc(sp.nsimplify)
    return sp.Matrix([[sp.Rational(str(x)) if not isinstance(x, sp.Basic) else x for x in row] for row in rows])


def det_prime(m: sp.Matrix) -> sp.Rational:
    """Product of nonzero eigenvalues, from the lowest nonzero charpoly coefficient."""
    k = m.shape[0]
    if k == 0:
        return sp.Integer(1)
    coeffs = m.charpoly().all_coeffs()[::-1]  # coeffs[j] multiplies x^j
    for j, c in enumerate(coeffs):
        if c != 0:
            return sp.Rational((-1) ** (k - j) * c)
    return sp.Integer(1)


def _coclosed_basis(d: sp.Matrix, gram: sp.Matrix) -> sp.Matrix:
    cols = d.T.columnspace()
    if not cols:
        return sp.zeros(gram.shape[0], 0)
    return gram.LUsolve(sp.Matrix.hstack(*cols))


def restricted_det(d: sp.Matrix, g_src: sp.Matrix, g_dst: sp.Matrix) -> sp.Rational:
    """det' of d*d : C^q -> C^q, computed on the coclosed complement."""
    b = _coclosed_basis(d, g_src)
    if b.shape[1] == 0:
        return sp.Integer(1)
    num = (b.T * d.T * g_dst * d * b).det()
    den = (b.T * g_src * b).det()
    return sp.Rational(num / den)


def _require(c):
    if c.exact_d is None or c.exact_gram is None:
        raise ValidationError("complex carries no rational data")
    return list(c.exact_d), list(c.exact_gram)


def torsion_square(c) -> sp.Rational:
    """R with log tau = (1/2) log R, tau = prod_q det'(d_q* d_q)^{(-1)^q / 2}."""
    ds, gs = _require(c)
    out = sp.Integer(1)
    for q, dq in enumerate(ds):
        out *= restricted_det(dq, gs[q], gs[q + 1]) ** ((-1) ** q)
    return sp.Rational(out)


def laplacians(c) -> list[sp.Matrix]:
    ds, gs = _require(c)
    deltas = [gs[q].LUsolve(dq.T * gs[q + 1]) for q, dq in enumerate(ds)]
    out = []
    for q, g in enumerate(gs):
        m = sp.zeros(g.shape[0], g.shape[0])
        if q > 0:
            m += ds[q - 1] * deltas[q - 1]
        if q < len(ds):
            m += deltas[q] * ds[q]
        out.append(m)
    return out


def weighted_det_product(dets: Sequence[sp.Rational], weights: Sequence[int]) -> sp.Rational:
    out = sp.Integer(1)
    for dt, w in zip(dets, weights):
        out *= sp.Rational(dt) ** w
    return sp.Rational(out)


def torsion_square_charpoly(c) -> sp.Rational:
    """Same R from Laplacian char polys: prod_q det' Delta_q^{(-1)^(q+1) q}."""
    laps = laplacians(c)
    return weighted_det_product([det_prime(m) for m in laps], [(-1) ** (q + 1) * q for q in range(len(laps))])


def selfdual_ratio(c) -> sp.Rational:
    """exp(log tau_SD) for a rational complex of top degree 4n."""
    laps = laplacians(c)
    top = len(laps) - 1
    if top % 4:
        raise ValidationError("self-dual torsion needs top degree 4n")
    n = top // 4
    weights = [(-1) ** (q + 1) * q for q in range(2 * n)] + [-n]
    return weighted_det_product([det_prime(laps[q]) for q in range(2 * n + 1)], weights)
