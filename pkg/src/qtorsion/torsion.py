"""Weighted assembly of per-degree zeta data into torsion reports.

Every report stores its table of (weight, zeta'(0)) rows so that
``log_torsion == sum(weight * zeta_prime0)`` can be recomputed from the
report alone. Determinant convention: ``log det' = -zeta'(0)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from math import comb

from .errors import DimensionError, KindMismatch, ValidationError
from .models import (
    FlatTorusModel,
    dolbeault_spectrum,
    selfdual_middle_spectrum,
    torus_form_spectrum,
    FormSpectrumStream,
)
from .special import EPS
from .zeta import ZetaResult, circle_zeta, lattice_zeta0

KINDS = ("real", "complex", "selfdual", "antiselfdual", "quaternionic")
CONVENTIONS = {
    "real": "half-exponent",
    "selfdual": "unnormalized",
    "antiselfdual": "unnormalized",
    "quaternionic": "half-exponent",
}
CSV_COLUMNS = ("model_id", "kind", "q", "multiplicity", "zeta0", "zeta_prime0", "logdet", "log_torsion", "error_bound")


@dataclass(frozen=True)
class Row:
    q: int
    label: str
    multiplicity: int
    weight: float
    zeta0: float
    zeta_prime0: float
    error_bound: float
    method: str
    empty: bool = False

    @property
    def logdet(self) -> float:
        return -self.zeta_prime0


@dataclass(frozen=True)
class TorsionReport:
    model_id: str
    kind: str
    rows: tuple[Row, ...]
    log_torsion: float
    error_bound: float
    convention: str
    model: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def recompute(self) -> float:
        return math.fsum(r.weight * r.zeta_prime0 for r in self.rows)

    @property
    def geometry(self) -> tuple:
        return (self.model.get("gram"), self.model.get("scale"))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [dict(asdict(r), logdet=r.logdet) for r in self.rows]
        return d


def _scaled(base: ZetaResult, mult: int) -> ZetaResult:
    return ZetaResult(mult * base.zeta_at_0, mult * base.zeta_prime_at_0, mult * base.error_bound, base.method, base.checks)


def stream_zeta(stream: FormSpectrumStream, model: FlatTorusModel, tol: float = 1e-10) -> ZetaResult:
    """zeta data of one degree: base lattice computed once, scaled by multiplicity."""
    base = stream.base
    if base.dim == 1:
        length = math.sqrt(float(model.gram[0][0])) * model.conformal_scale
        z = circle_zeta(base.theta[0], length)
    else:
        z = lattice_zeta0(base, tol)
    return _scaled(z, stream.multiplicity_factor)


def _row(stream, weight, model, tol) -> Row:
    z = stream_zeta(stream, model, tol)
    return Row(stream.degree, stream.label, stream.multiplicity_factor, float(weight),
               z.zeta_at_0, z.zeta_prime_at_0, z.error_bound, z.method)


def _describe(model: FlatTorusModel) -> dict:
    return {"name": model.name, "n": model.n, "gram": [list(r) for r in model.gram],
            "theta": list(model.theta), "scale": model.conformal_scale}


def _assemble(model, kind, rows, convention, checks=None, flags=()) -> TorsionReport:
    value = math.fsum(r.weight * r.zeta_prime0 for r in rows)
    bound = math.fsum(abs(r.weight) * r.error_bound for r in rows)
    bound += 4 * EPS * math.fsum(abs(r.weight * r.zeta_prime0) for r in rows)
    return TorsionReport(model.name, kind, tuple(rows), value, bound, convention, _describe(model),
                         dict(checks or {}), tuple(flags))


def real_torsion(model: FlatTorusModel, tol: float = 1e-10) -> TorsionReport:
    """log tau_R = (1/2) sum_q (-1)^q q zeta'_q(0)."""
    rows = [_row(torus_form_spectrum(model, q), 0.5 * (-1) ** q * q, model, tol) for q in range(model.n + 1)]
    weight_sum = sum((-1) ** q * q * comb(model.n, q) for q in range(model.n + 1))
    return _assemble(model, "real", rows, CONVENTIONS["real"], {"binomial_weight_sum": weight_sum})


def complex_torsion(model: FlatTorusModel, convention: str = "full", tol: float = 1e-10) -> TorsionReport:
    """log tau_C = sum_q (-1)^q q zeta'_{0,q}(0) over Dolbeault degrees.

    ``convention="half"`` adds the factor 1/2 used for the real torsion.
    """
    if convention not in ("full", "half"):
        raise ValidationError("convention must be 'full' or 'half'")
    factor = 1.0 if convention == "full" else 0.5
    m = model.n // 2
    rows = [_row(dolbeault_spectrum(model, q), factor * (-1) ** q * q, model, tol) for q in range(m + 1)]
    weight_sum = sum((-1) ** q * q * comb(m, q) for q in range(m + 1))
    flags = ("odd_complex_dimension",) if m % 2 else ()
    tag = "unnormalized" if convention == "full" else "half-exponent"
    return _assemble(model, "complex", rows, tag, {"binomial_weight_sum": weight_sum}, flags)


def _require_t4(model: FlatTorusModel):
    if model.n != 4:
        raise DimensionError(f"self-dual torsion on tori needs n = 4, got {model.n}")


def _middle_check(model, tol):
    full = stream_zeta(torus_form_spectrum(model, 2), model, tol)
    plus = stream_zeta(selfdual_middle_spectrum(model), model, tol)
    return {
        "middle_residual": abs(full.zeta_prime_at_0 - 2.0 * plus.zeta_prime_at_0),
        "middle_bound": full.error_bound + 2.0 * plus.error_bound,
    }, plus


def selfdual_torsion(model: FlatTorusModel, tol: float = 1e-10) -> TorsionReport:
    """sum_{q<2} (-1)^(q+1) q log det'_q - log det'_2, written in zeta' terms.

    The row for Omega^2_+ carries weight 0: it is the cross-check
    zeta'_2 = 2 zeta'_{2+}, not part of the sum.
    """
    _require_t4(model)
    rows = [_row(torus_form_spectrum(model, q), (-1) ** q * q, model, tol) for q in range(2)]
    rows.append(_row(torus_form_spectrum(model, 2), 1.0, model, tol))
    checks, plus = _middle_check(model, tol)
    rows.append(Row(2, "2+", 3, 0.0, plus.zeta_at_0, plus.zeta_prime_at_0, plus.error_bound, plus.method))
    return _assemble(model, "selfdual", rows, CONVENTIONS["selfdual"], checks)


def antiselfdual_torsion(model: FlatTorusModel, tol: float = 1e-10) -> TorsionReport:
    """Mirror weights: sum_{q>2} (-1)^(q+1) q log det'_q - log det'_2."""
    _require_t4(model)
    rows = [_row(torus_form_spectrum(model, 2), 1.0, model, tol)]
    rows += [_row(torus_form_spectrum(model, q), (-1) ** q * q, model, tol) for q in range(3, 5)]
    checks, _ = _middle_check(model, tol)
    return _assemble(model, "antiselfdual", rows, CONVENTIONS["antiselfdual"], checks)


def quaternionic_torsion(model: FlatTorusModel, tol: float = 1e-10) -> TorsionReport:
    """(1/2) sum_q (-1)^q q zeta'_q over Omega^0, Omega^1, Omega^2_+ of a 4-torus."""
    _require_t4(model)
    streams = [torus_form_spectrum(model, 0), torus_form_spectrum(model, 1), selfdual_middle_spectrum(model)]
    rows = [_row(s, 0.5 * (-1) ** q * q, model, tol) for q, s in enumerate(streams)]
    return _assemble(model, "quaternionic", rows, CONVENTIONS["quaternionic"])


TORSION_KINDS = {
    "real": real_torsion,
    "complex": complex_torsion,
    "selfdual": selfdual_torsion,
    "antiselfdual": antiselfdual_torsion,
    "quaternionic": quaternionic_torsion,
}


def torsion_ratio(r1: TorsionReport, r2: TorsionReport) -> tuple[float, float]:
    """(log tau_1 - log tau_2, combined bound) for two twists on one geometry."""
    if r1.kind != r2.kind or r1.convention != r2.convention:
        raise KindMismatch(f"cannot compare {r1.kind}/{r1.convention} with {r2.kind}/{r2.convention}")
    if r1.geometry != r2.geometry:
        raise ValidationError("ratio needs the same metric and scale on both sides")
    diff = r1.log_torsion - r2.log_torsion
    return diff, r1.error_bound + r2.error_bound + 2 * EPS * abs(diff)


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def to_csv(reports, digits: int = 10) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for r in rep.rows:
            w.writerow([rep.model_id, rep.kind, r.label, r.multiplicity, _fmt(r.zeta0, digits),
                        _fmt(r.zeta_prime0, digits), _fmt(r.logdet, digits), _fmt(rep.log_torsion, digits),
                        f"{r.error_bound:.3e}"])
    return buf.getvalue()


def _round_floats(obj, digits):
    if isinstance(obj, float):
        return float(_fmt(obj, digits)) if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, digits) for v in obj]
    return obj


def to_json(reports, meta: dict | None = None, digits: int = 10) -> str:
    doc = {"meta": meta or {}, "reports": [_round_floats(r.as_dict(), digits) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
