"""Seeded property suites shared by the ``verify`` subcommand and the tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import exact as ex
from . import hodge as hg
from . import quaternion as qt
from .exterior import koszul_complex
from .generators import dual_double, random_complex, random_shape
from .models import FlatTorusModel, conformal_rescale, random_kaehler_gram, random_model, random_theta
from .torsion import antiselfdual_torsion, complex_torsion, real_torsion, selfdual_torsion
from .zeta import ShiftedLattice, circle_zeta, epstein_zeta0, richardson_circle_zeta, theta_transform_selftest


@dataclass
class SuiteResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    cases: int
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


def random_dual_complex(rng: np.random.Generator, half_top: int = 2, signature_lines: int = 0):
    """A complex of top degree 2*half_top with an isometric star, scrambled."""
    ranks, betti = random_shape(rng, half_top, max_rank=3)
    base = random_complex(rng, ranks, betti, scramble=False)
    base = hg.FiniteHodgeComplex.build(base.d, None, dims=base.dims)
    signs = list(rng.choice([-1, 1], signature_lines)) if signature_lines else []
    return dual_double(base, signs, rng=rng)


def random_acyclic(rng: np.random.Generator, top: int = 3, max_rank: int = 3):
    ranks, betti = random_shape(rng, top, max_rank, acyclic=True)
    return random_complex(rng, ranks, betti)


# ---------------------------------------------------------------- hodge suites


def suite_adjoint(seed: int, cases: int = 50, pairs: int = 100) -> SuiteResult:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(cases):
        ranks, betti = random_shape(rng, 2, 3)
        c = random_complex(rng, ranks, betti)
        for q in range(c.top):
            de = hg.adjoint(c, q)
            a = rng.standard_normal((c.dims[q], pairs))
            b = rng.standard_normal((c.dims[q + 1], pairs))
            lhs = np.einsum("ip,ij,jp->p", c.d[q] @ a, c.gram[q + 1], b)
            rhs = np.einsum("ip,ij,jp->p", a, c.gram[q], de @ b)
            scale = 1.0 + np.abs(lhs).max()
            worst = max(worst, float(np.abs(lhs - rhs).max() / scale))
    return SuiteResult("adjoint", worst < 1e-12, worst, 1e-12, cases)


def suite_ladder(seed: int, cases: int = 50) -> SuiteResult:
    """Per-eigenvalue ladder N'_q = N_{q+1} and duality N_q = N'_{N-q}, exactly."""
    rng = _rng(seed, 2)
    iso, ladder_bad, dual_bad, literal_fail = 0.0, 0, 0, 0
    for _ in range(cases):
        c, _ = random_dual_complex(rng, half_top=int(rng.integers(1, 3)))
        top = c.top
        for lad in hg.spectral_ladder(c):
            iso = max(iso, lad.isometry_residual)
            ladder_bad += not lad.ladder_holds()
            dual_bad += any(lad.N[q] != lad.Nprime[top - q] for q in range(top + 1))
            literal_fail += any(lad.N[q] != lad.N[top - q] for q in range(top + 1))
    ok = ladder_bad == 0 and dual_bad == 0 and iso < 1e-9
    detail = {"ladder_mismatches": ladder_bad, "duality_mismatches": dual_bad,
              "literal_N_q_eq_N_2n_minus_q_failures": literal_fail}
    return SuiteResult("ladder", ok, iso, 1e-9, cases, detail)


def suite_mckean_singer(seed: int, cases: int = 50, times=(0.1, 1.0, 10.0)) -> SuiteResult:
    rng = _rng(seed, 3)
    worst = 0.0
    for _ in range(cases):
        ranks, betti = random_shape(rng, int(rng.integers(2, 5)), 3)
        c = random_complex(rng, ranks, betti)
        chi = hg.euler_characteristic(c)
        vals = [hg.mckean_singer_trace(c, t) for t in times]
        worst = max(worst, max(abs(v - chi) for v in vals), max(vals) - min(vals))
    return SuiteResult("mckean_singer", worst < 1e-10, worst, 1e-10, cases)


def suite_signature(seed: int, cases: int = 50, times=(0.5, 2.0)) -> SuiteResult:
    rng = _rng(seed, 4)
    worst = 0.0
    sigs = []
    for _ in range(cases):
        c, star = random_dual_complex(rng, half_top=int(rng.integers(1, 3)), signature_lines=int(rng.integers(0, 4)))
        harm = hg.harmonic_signature(c, star)
        vals = [hg.signature_trace(c, star, t) for t in times]
        worst = max(worst, max(abs(v - harm) for v in vals))
        sigs.append(round(harm))
    detail = {"nonzero_signatures": sum(1 for s in sigs if s)}
    return SuiteResult("signature", worst < 1e-10, worst, 1e-10, cases, detail)


# ---------------------------------------------------------------- variation suites


def _variation_cases(seed: int, cases: int, h: float, richardson: bool):
    rng = _rng(seed, 5)
    rs, quat, conf_alpha, conf_cancel = 0.0, 0.0, 0.0, 0.0
    for i in range(cases):
        c = random_acyclic(rng, top=int(rng.integers(2, 5)))
        fam = hg.MetricFamily.random_smooth(c, rng)
        rs = max(rs, hg.variation_identity_rs(fam, c, t=1.0, h=h, richardson=richardson).residual)
        if i % 5 == 0:
            d, _ = random_dual_complex(rng, half_top=2)
            chk = hg.variation_identity_rs(hg.MetricFamily.conformal_scaling(d), d, t=1.0, h=h, richardson=richardson)
            rs = max(rs, chk.residual)
            conf_alpha = max(conf_alpha, chk.middle_alpha)
            conf_cancel = max(conf_cancel, abs(chk.cancellation))
        m = qt.random_model(rng, 1, consistent=bool(i % 2))
        fam_q = qt.GammaFamily.random(m, rng)
        chk = qt.quaternionic_variation(fam_q, t=1.0, h=h, richardson=richardson)
        quat = max(quat, chk.formula_residual, chk.trace_residual)
    return rs, quat, conf_alpha, conf_cancel


def suite_variation(seed: int, cases: int = 50, hs=(1e-5,), richardson: bool = True) -> SuiteResult:
    """Ray-Singer and quaternionic variation identities; with several h the
    raw central-difference residuals are also reported with their ratios."""
    per_h = []
    for h in hs:
        rs, quat, alpha, cancel = _variation_cases(seed, cases, h, richardson and len(hs) == 1)
        per_h.append({"h": h, "rs": rs, "quaternionic": quat, "middle_alpha": alpha, "cancellation": cancel})
    finest = min(per_h, key=lambda p: p["h"])
    worst = max(finest["rs"], finest["quaternionic"])
    ok = worst < 1e-6 and all(p["middle_alpha"] == 0.0 and p["cancellation"] < 1e-10 for p in per_h)
    detail = {"per_h": per_h}
    if len(hs) > 1:
        ratios = [
            {"rs": a["rs"] / b["rs"], "quaternionic": a["quaternionic"] / b["quaternionic"]}
            for a, b in zip(per_h[:-1], per_h[1:])
        ]
        detail["ratios"] = ratios
        step = hs[0] / hs[1]
        # second order: the first refinement shrinks residuals by about step^2
        ok = ok and all(r > 0.3 * step**2 for r in ratios[0].values())
    return SuiteResult("variation", ok, worst, 1e-6, cases, detail)


def suite_harmonic(seed: int, cases: int = 50) -> SuiteResult:
    rng = _rng(seed, 6)
    worst = 0.0
    for _ in range(cases):
        top = int(rng.integers(2, 5))
        ranks, _ = random_shape(rng, top, 3, acyclic=True)
        c1 = random_complex(rng, ranks, [0] * (top + 1))
        c2 = random_complex(rng, ranks, [0] * (top + 1))
        c2 = c2.with_grams(c1.gram)
        fam = hg.MetricFamily.random_smooth(c1, rng)
        deriv, predicted = hg.harmonic_variation_limit(fam, (c1, c2))
        worst = max(worst, abs(deriv), abs(predicted))
    return SuiteResult("harmonic", worst < 1e-6, worst, 1e-6, cases)


# ---------------------------------------------------------------- zeta and torsion suites


def zeta_thetas(count: int = 20) -> list[float]:
    return [k / (count + 1) for k in range(1, count + 1)]


def suite_zeta(seed: int, count: int = 20) -> SuiteResult:
    rng = _rng(seed, 7)
    worst_ratio = 0.0
    for th in zeta_thetas(count):
        results = [circle_zeta(th), epstein_zeta0(ShiftedLattice.build([[1.0]], [th])), richardson_circle_zeta(th)]
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = results[i], results[j]
                worst_ratio = max(worst_ratio, abs(a.zeta_prime_at_0 - b.zeta_prime_at_0) / (a.error_bound + b.error_bound))
    selftest = 0.0
    for n in range(1, 5):
        lat = random_model(rng, n).scalar_lattice()
        for t in (0.05, 0.5, 1.0):
            selftest = max(selftest, theta_transform_selftest(lat, t))
    ok = worst_ratio <= 1.0 and selftest < 1e-10
    return SuiteResult("zeta", ok, selftest, 1e-10, count, {"worst_difference_over_bound": worst_ratio})


def suite_torsion(seed: int, cases: int = 10) -> SuiteResult:
    rng = _rng(seed, 8)
    detail = {}
    detail["circle"] = max(abs(real_torsion(FlatTorusModel.circle(th)).log_torsion - math.log(abs(2 * math.sin(math.pi * th))))
                           for th in (1 / 6, 1 / 4, 1 / 3, 1 / 2))
    detail["even_vanishing"] = max(abs(real_torsion(random_model(rng, 2 + 2 * (i % 2))).log_torsion) for i in range(cases))
    cplx = []
    for _ in range(5):
        m = FlatTorusModel.build(random_kaehler_gram(rng, 4), random_theta(rng, 4))
        cplx.append(abs(complex_torsion(m).log_torsion))
    detail["complex_vanishing"] = max(cplx)
    sd = []
    for _ in range(5):
        m = random_model(rng, 4)
        vals = [selfdual_torsion(conformal_rescale(m, c)).log_torsion for c in (1, 2, 3, 10)]
        sd.append(max(vals) - min(vals))
        sd.append(abs(selfdual_torsion(m).log_torsion + antiselfdual_torsion(m).log_torsion))
    detail["selfdual"] = max(sd)
    worst = max(detail.values())
    return SuiteResult("torsion", worst < 1e-9, worst, 1e-9, cases, detail)


def suite_quaternion(seed: int, cases: int = 5) -> SuiteResult:
    rng = _rng(seed, 9)
    dims_ok = qt.fiber_dims(1).dims == (1, 4, 3) and qt.fiber_dims(2).dims == (1, 8, 18, 16, 5)
    exact_ok = True
    adj = 0.0
    for _ in range(cases):
        modes = [tuple(int(x) for x in rng.integers(-3, 4, 4)) for _ in range(2)]
        modes = [a if any(a) else (1, 0, 0, 0) for a in modes]
        m = qt.selfdual_fiber_model(modes)
        adj = max(adj, qt.adjoint_residual(m))
        exact_ok &= qt.quaternionic_torsion_square(m) == ex.selfdual_ratio(koszul_complex(modes, exact=True))
    ok = dims_ok and exact_ok and adj < 1e-12
    return SuiteResult("quaternion", ok, adj, 1e-12, cases, {"dims_ok": dims_ok, "exact_equal": exact_ok})


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "adjoint": suite_adjoint,
    "ladder": suite_ladder,
    "mckean_singer": suite_mckean_singer,
    "signature": suite_signature,
    "variation": suite_variation,
    "harmonic": suite_harmonic,
    "zeta": suite_zeta,
    "torsion": suite_torsion,
    "quaternion": suite_quaternion,
}


def run_suite(name: str, seed: int, **kwargs) -> SuiteResult:
    start = time.perf_counter()
    res = SUITES[name](seed, **kwargs)
    res.seconds = time.perf_counter() - start
    return res
