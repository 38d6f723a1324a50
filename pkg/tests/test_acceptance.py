"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (see conftest); the lines are printed
again in the terminal summary.
"""

import cmath
import math
import time

import numpy as np
import pytest

from qtorsion import exact as ex
from qtorsion import hodge as hg
from qtorsion import quaternion as qt
from qtorsion.exterior import koszul_complex
from qtorsion.models import (
    FlatTorusModel,
    conformal_rescale,
    random_kaehler_gram,
    random_model,
    random_spd_gram,
    random_theta,
)
from qtorsion.suites import random_dual_complex, suite_harmonic, suite_variation, zeta_thetas
from qtorsion.torsion import (
    antiselfdual_torsion,
    complex_torsion,
    real_torsion,
    selfdual_torsion,
    torsion_ratio,
)
from qtorsion.zeta import (
    ShiftedLattice,
    circle_zeta,
    epstein_zeta0,
    richardson_circle_zeta,
    theta_transform_selftest,
)

SEED = 20240601


def test_01_circle_positive_control(acceptance):
    worst, slowest = 0.0, 0.0
    for th in (1 / 6, 1 / 4, 1 / 3, 1 / 2):
        start = time.perf_counter()
        rep = real_torsion(FlatTorusModel.circle(th))
        slowest = max(slowest, time.perf_counter() - start)
        oracle = math.log(abs(cmath.exp(2j * math.pi * th) - 1))
        worst = max(worst, abs(rep.log_torsion - oracle))
    ok = acceptance("1. circle positive control", worst < 1e-9 and slowest < 1.0,
                    f"max error {worst:.2e}, slowest run {slowest:.3f}s")
    assert ok


def test_02_even_dimensional_vanishing(acceptance):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = 0.0
    for i in range(10):
        n = 2 if i < 5 else 4
        m = FlatTorusModel.build(random_spd_gram(rng, n), random_theta(rng, n))
        worst = max(worst, abs(real_torsion(m).log_torsion))
    elapsed = time.perf_counter() - start
    ok = acceptance("2. even-dimensional vanishing", worst < 1e-9 and elapsed < 10.0,
                    f"max |log tau_R| {worst:.2e} over 5 T2 + 5 T4, {elapsed:.2f}s")
    assert ok


def test_03_complex_torsion_vanishing_and_duality(acceptance):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(5):
        m = FlatTorusModel.build(random_kaehler_gram(rng, 4), random_theta(rng, 4))
        worst = max(worst, abs(complex_torsion(m).log_torsion))
    ladder_bad = duality_bad = clusters = 0
    for _ in range(50):
        c, star = random_dual_complex(rng, half_top=int(rng.integers(1, 3)))
        assert star.isometry_residual(c) < 1e-9
        for lad in hg.spectral_ladder(c):
            clusters += 1
            ladder_bad += not lad.ladder_holds()
            # duality: star maps E_q onto E'_{2n-q}
            duality_bad += any(lad.N[q] != lad.Nprime[c.top - q] for q in range(c.top + 1))
    ok = acceptance(
        "3. complex torsion vanishing + duality mechanism",
        worst < 1e-9 and ladder_bad == 0 and duality_bad == 0,
        f"max |log tau_C| {worst:.2e}; {clusters} eigenvalue clusters on 50 complexes, "
        f"{ladder_bad} ladder and {duality_bad} duality mismatches",
    )
    assert ok


def _t4_models(rng, count):
    models = [FlatTorusModel.unit([0.5, 0, 0, 0])]
    while len(models) < count:
        models.append(FlatTorusModel.build(random_spd_gram(rng, 4), random_theta(rng, 4)))
    return models


def test_04_selfdual_torsion_on_t4(acceptance):
    rng = np.random.default_rng(SEED + 4)
    rel, middle_ok, product = 0.0, True, 0.0
    for m in _t4_models(rng, 3):
        sd = selfdual_torsion(m)
        scalar = epstein_zeta0(ShiftedLattice.build(np.linalg.inv(np.asarray(m.gram)), m.theta))
        rel = max(rel, abs(sd.log_torsion - (-2.0 * scalar.log_det_prime)))
        middle_ok &= sd.checks["middle_residual"] <= sd.checks["middle_bound"]
        product = max(product, abs(sd.log_torsion + antiselfdual_torsion(m).log_torsion))
    ok = acceptance("4. self-dual torsion on twisted T4", rel < 1e-9 and middle_ok and product < 1e-9,
                    f"|assembled - relation| {rel:.2e}, middle check {'ok' if middle_ok else 'off'}, "
                    f"|log tau_SD + log tau_ASD| {product:.2e}")
    assert ok


def test_05_conformal_invariance(acceptance):
    rng = np.random.default_rng(SEED + 5)
    drift = 0.0
    for m in _t4_models(rng, 5):
        vals = [selfdual_torsion(conformal_rescale(m, c)).log_torsion for c in (1, 2, 3, 10)]
        drift = max(drift, max(vals) - min(vals))
    ok = acceptance("5. conformal invariance (constant factor)", drift < 1e-9,
                    f"max drift {drift:.2e} over c in {{1,2,3,10}}, 5 models")
    assert ok


def test_06_metric_independence(acceptance):
    circle = [real_torsion(FlatTorusModel.circle(0.3, L)).log_torsion for L in (0.5, 1, 2, 5)]
    circle_drift = max(circle) - min(circle)
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for n in (2, 4):
        th1, th2 = random_theta(rng, n), random_theta(rng, n)
        base = random_spd_gram(rng, n)
        direction = rng.standard_normal((n, n))
        direction = 0.5 * (direction + direction.T)
        ratios, values = [], []
        for s in np.linspace(0.0, 0.3, 4):
            g = base + s * direction
            assert np.linalg.eigvalsh(g).min() > 0
            r1 = real_torsion(FlatTorusModel.build(g, th1))
            r2 = real_torsion(FlatTorusModel.build(g, th2))
            values += [r1.log_torsion, r2.log_torsion]
            ratios.append(torsion_ratio(r1, r2)[0])
        worst = max(worst, max(abs(v) for v in values), max(ratios) - min(ratios))
    ok = acceptance("6. metric independence", circle_drift < 1e-10 and worst < 1e-9,
                    f"circle L-sweep drift {circle_drift:.2e}; torus deformation worst {worst:.2e}")
    assert ok


def test_07_variation_identities(acceptance):
    main = suite_variation(SEED, cases=50, hs=(1e-5,))
    order = suite_variation(SEED, cases=10, hs=(1e-3, 1e-4))
    harmonic = suite_harmonic(SEED, cases=50)
    ratios = order.detail["ratios"][0]
    ok = acceptance(
        "7. variation identities",
        main.passed and order.passed and harmonic.passed,
        f"max residual {main.residual:.2e} at h=1e-5; h-refinement ratios "
        f"rs {ratios['rs']:.1f}, quaternionic {ratios['quaternionic']:.1f}; "
        f"acyclic-pair derivative {harmonic.residual:.2e}",
    )
    assert ok


def test_08_mckean_singer_and_signature(acceptance):
    rng = np.random.default_rng(SEED + 8)
    ms, sig = 0.0, 0.0
    for _ in range(50):
        c, star = random_dual_complex(rng, half_top=int(rng.integers(1, 3)), signature_lines=int(rng.integers(0, 3)))
        vals = [hg.mckean_singer_trace(c, t) for t in (0.1, 1.0, 10.0)]
        ms = max(ms, max(vals) - min(vals), abs(vals[0] - hg.euler_characteristic(c)))
        harm = hg.harmonic_signature(c, star)
        sig = max(sig, *(abs(hg.signature_trace(c, star, t) - harm) for t in (0.5, 2.0)))
    ok = acceptance("8. McKean-Singer and signature traces", ms < 1e-10 and sig < 1e-10,
                    f"McKean-Singer spread {ms:.2e}, signature residual {sig:.2e} on 50 complexes")
    assert ok


def test_09_zeta_cross_validation(acceptance):
    worst = 0.0
    for th in zeta_thetas(20):
        res = [circle_zeta(th), epstein_zeta0(ShiftedLattice.build([[1.0]], [th])), richardson_circle_zeta(th)]
        for i in range(3):
            for j in range(i + 1, 3):
                gap = abs(res[i].zeta_prime_at_0 - res[j].zeta_prime_at_0)
                worst = max(worst, gap / (res[i].error_bound + res[j].error_bound))
    rng = np.random.default_rng(SEED + 9)
    selftest = 0.0
    for n in (1, 2, 3, 4):
        lat = ShiftedLattice.build(np.linalg.inv(random_spd_gram(rng, n)), random_theta(rng, n))
        for t in (0.05, 0.5, 1.0):
            selftest = max(selftest, theta_transform_selftest(lat, t))
    ok = acceptance("9. zeta engine cross-validation", worst <= 1.0 and selftest < 1e-10,
                    f"max |difference|/bound {worst:.3f} on 20 thetas; theta self-test {selftest:.2e}")
    assert ok


def test_10_quaternionic_fiber_bookkeeping(acceptance):
    dims = qt.fiber_dims(1).dims
    selfdual_dims = (1, 4, 3)  # Omega^0, Omega^1, Omega^2_+ on a 4-manifold
    rng = np.random.default_rng(SEED + 10)
    equal = 0
    trials = 4
    for k in range(trials):
        modes = [tuple(int(x) or 1 for x in rng.integers(-3, 4, 4)) for _ in range(k + 1)]
        r_h = qt.quaternionic_torsion_square(qt.selfdual_fiber_model(modes))
        r_sd = ex.selfdual_ratio(koszul_complex(modes, exact=True))
        # log tau_H = (1/2) log R_H and log tau_SD = log R_SD
        equal += r_h == r_sd
    ok = acceptance("10. quaternionic fiber bookkeeping", dims == selfdual_dims and equal == trials,
                    f"dims {dims}; exact R_H == R_SD on {equal}/{trials} models, so log tau_SD = 2 log tau_H")
    assert ok
