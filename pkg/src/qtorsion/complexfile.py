"""Plain-text serialization of finite complexes.

Format (``#`` starts a comment, blank lines are ignored)::

    complex 2            # top degree N
    dims 1 2 1           # N+1 integers
    d 0                  # block header, then dims[1] rows of dims[0] entries
    1
    -1/2
    gram 1               # optional; identity when absent
    2 0
    0 1
    star 1               # optional; C^1 -> C^{N-1}
    0 1
    1 0

Entries are integers, decimals or fractions ``p/q``; all are read exactly, so
every parsed complex also carries rational data.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy as sp

from .errors import ValidationError
from .hodge import FiniteHodgeComplex, StarOperator


def _entry(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad matrix entry {tok!r}") from exc


def _lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def parse_complex(text: str) -> tuple[FiniteHodgeComplex, StarOperator | None]:
    lines = list(_lines(text))
    if not lines or not lines[0].startswith("complex"):
        raise ValidationError("file must start with 'complex <top degree>'")
    try:
        top = int(lines[0].split()[1])
        head, *dim_tokens = lines[1].split()
        dims = [int(x) for x in dim_tokens]
    except (IndexError, ValueError) as exc:
        raise ValidationError("malformed header") from exc
    if head != "dims" or len(dims) != top + 1 or min(dims, default=0) < 0:
        raise ValidationError("second line must be 'dims' with top+1 nonnegative integers")
    blocks: dict[tuple[str, int], list[list[Fraction]]] = {}
    i = 2
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] not in ("d", "gram", "star"):
            raise ValidationError(f"expected a block header, got {lines[i]!r}")
        kind, q = parts[0], int(parts[1])
        limit = top if kind == "d" else top + 1
        if not 0 <= q < limit:
            raise ValidationError(f"degree {q} out of range for block {kind}")
        rows_n, cols_n = {"d": (dims[min(q + 1, top)], dims[q]), "gram": (dims[q], dims[q]),
                          "star": (dims[top - q], dims[q])}[kind]
        rows = []
        for r in range(rows_n):
            i += 1
            if i >= len(lines):
                raise ValidationError(f"block {kind} {q} ends early")
            vals = [_entry(t) for t in lines[i].split()]
            if len(vals) != cols_n:
                raise ValidationError(f"block {kind} {q}, row {r}: expected {cols_n} entries, got {len(vals)}")
            rows.append(vals)
        if (kind, q) in blocks:
            raise ValidationError(f"duplicate block {kind} {q}")
        blocks[(kind, q)] = rows
        i += 1

    def exact(kind, q, shape, default):
        rows = blocks.get((kind, q))
        if rows is None:
            return default(shape)
        return sp.Matrix(shape[0], shape[1], [sp.Rational(x.numerator, x.denominator) for r in rows for x in r])

    ed = [exact("d", q, (dims[q + 1], dims[q]), lambda s: sp.zeros(*s)) for q in range(top)]
    eg = [exact("gram", q, (dims[q], dims[q]), lambda s: sp.eye(s[0])) for q in range(top + 1)]

    def num(m):
        return np.array(m.tolist(), dtype=float).reshape(m.shape)

    c = FiniteHodgeComplex.build([num(m) for m in ed], [num(m) for m in eg], dims=dims,
                                 exact_d=tuple(ed), exact_gram=tuple(eg))
    star = None
    if any(k == "star" for k, _ in blocks):
        star = StarOperator(tuple(
            num(exact("star", q, (dims[top - q], dims[q]), lambda s: sp.zeros(*s))) if ("star", q) in blocks else None
            for q in range(top + 1)
        ))
    return c, star


def read_complex(path) -> tuple[FiniteHodgeComplex, StarOperator | None]:
    with open(path, encoding="utf-8") as fh:
        return parse_complex(fh.read())


def _fmt_entry(x) -> str:
    if isinstance(x, sp.Basic):
        return str(sp.Rational(x))
    fx = float(x)
    return str(int(fx)) if fx.is_integer() else repr(fx)


def format_complex(c: FiniteHodgeComplex, star: StarOperator | None = None) -> str:
    out = [f"complex {c.top}", "dims " + " ".join(str(k) for k in c.dims)]

    def block(name, q, mat):
        out.append(f"{name} {q}")
        for r in range(mat.shape[0]):
            out.append(" ".join(_fmt_entry(mat[r, j]) for j in range(mat.shape[1])))

    src_d = c.exact_d if c.exact_d is not None else c.d
    src_g = c.exact_gram if c.exact_gram is not None else c.gram
    for q, m in enumerate(src_d):
        block("d", q, m)
    for q, m in enumerate(src_g):
        block("gram", q, m)
    if star is not None:
        for q, m in enumerate(star.maps):
            if m is not None:
                block("star", q, m)
    return "\n".join(out) + "\n"
