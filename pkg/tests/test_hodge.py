import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtorsion import hodge as hg
from qtorsion.errors import (
    DimensionMismatch,
    EigenvalueClusterAmbiguity,
    MiddleDegreeMissing,
    NonSmoothFamily,
    ValidationError,
)
from qtorsion.generators import change_basis, direct_sum, random_complex, random_invertible, random_shape
from qtorsion.suites import random_acyclic, random_dual_complex

seeds = st.integers(0, 2**31 - 1)


def two_term(c=2.0, g0=1.0, g1=1.0):
    return hg.FiniteHodgeComplex.build([[[c]]], [[[g0]], [[g1]]])


# ---------------------------------------------------------------- construction


def test_rejects_non_complex():
    with pytest.raises(ValidationError):
        hg.FiniteHodgeComplex.build([np.ones((1, 1)), np.ones((1, 1))])


def test_rejects_bad_gram():
    with pytest.raises(ValidationError):
        hg.FiniteHodgeComplex.build([np.ones((1, 1))], [np.eye(1), -np.eye(1)])
    with pytest.raises(ValidationError):
        hg.FiniteHodgeComplex.build([np.ones((2, 1))], [np.eye(1), np.array([[1.0, 2.0], [0.0, 1.0]])])


def test_empty_degrees_allowed():
    c = hg.FiniteHodgeComplex.build([np.zeros((0, 2)), np.zeros((1, 0))], dims=[2, 0, 1])
    assert hg.kernel_dims(c) == (2, 0, 1)
    assert hg.euler_characteristic(c) == 3


# ---------------------------------------------------------------- adjoint and Laplacian


def test_euclidean_adjoint_is_transpose():
    d = np.arange(6.0).reshape(3, 2)
    c = hg.FiniteHodgeComplex.build([d], check=False)
    np.testing.assert_array_equal(hg.adjoint(c, 0), d.T)


def test_scalar_adjoint():
    c = two_term(3.0, 2.0, 5.0)
    assert hg.adjoint(c, 0)[0, 0] == pytest.approx(3.0 * 5.0 / 2.0)


def test_adjoint_random_543():
    rng = np.random.default_rng(543)
    from qtorsion.generators import random_spd

    d0 = rng.standard_normal((4, 5))
    d1 = rng.standard_normal((3, 4)) @ (np.eye(4) - d0 @ np.linalg.pinv(d0))
    c = hg.FiniteHodgeComplex.build([d0, d1], [random_spd(rng, k) for k in (5, 4, 3)])
    for q in range(2):
        de = hg.adjoint(c, q)
        for _ in range(100):
            a, b = rng.standard_normal(c.dims[q]), rng.standard_normal(c.dims[q + 1])
            lhs = (c.d[q] @ a) @ c.gram[q + 1] @ b
            assert abs(lhs - a @ c.gram[q] @ (de @ b)) < 1e-12 * (1 + abs(lhs))


def test_zero_differentials_are_harmonic():
    c = hg.FiniteHodgeComplex.build([np.zeros((3, 2))])
    assert not np.any(hg.laplacian(c, 0)) and not np.any(hg.laplacian(c, 1))
    assert hg.kernel_dims(c) == (2, 3)


def test_two_term_laplacians():
    c = two_term(1.7)
    assert hg.laplacian(c, 0)[0, 0] == pytest.approx(1.7**2)
    assert hg.laplacian(c, 1)[0, 0] == pytest.approx(1.7**2)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_laplacian_self_adjoint_psd_and_commutes(seed):
    rng = np.random.default_rng(seed)
    ranks, betti = random_shape(rng, 3, 3)
    c = random_complex(rng, ranks, betti)
    laps = [hg.laplacian(c, q) for q in range(c.top + 1)]
    for q, lap in enumerate(laps):
        s = c.gram[q] @ lap
        assert np.abs(s - s.T).max() < 1e-10 * max(1.0, np.abs(s).max())
        assert hg.eigensystem(c, q)[0].min() >= 0
    for q in range(c.top):
        scale = max(1.0, np.abs(laps[q + 1]).max() * np.abs(c.d[q]).max())
        assert np.abs(c.d[q] @ laps[q] - laps[q + 1] @ c.d[q]).max() < 1e-11 * scale
        de = hg.adjoint(c, q)
        assert np.abs(de @ laps[q + 1] - laps[q] @ de).max() < 1e-11 * max(1.0, np.abs(de).max() * np.abs(laps[q]).max())


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_kernel_equals_rank_betti(seed):
    rng = np.random.default_rng(seed)
    ranks, betti = random_shape(rng, int(rng.integers(1, 5)), 3)
    c = random_complex(rng, ranks, betti)
    assert hg.kernel_dims(c) == tuple(betti) == hg.betti_numbers(c)


# ---------------------------------------------------------------- ladders


def test_ladder_two_term():
    (lad,) = hg.spectral_ladder(two_term(2.0))
    assert lad.eigenvalue == pytest.approx(4.0)
    assert lad.Nprime[0] == 1 and lad.N[1] == 1 and lad.N[0] == 0 and lad.Nprime[1] == 0


def test_ladder_direct_sum_scales():
    c = direct_sum(two_term(2.0), two_term(2.0), two_term(2.0))
    (lad,) = hg.spectral_ladder(c)
    assert lad.Nprime == (3, 0) and lad.N == (0, 3)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_ladder_random_acyclic_three_term(seed):
    rng = np.random.default_rng(seed)
    c = random_acyclic(rng, top=2)
    for lad in hg.spectral_ladder(c):
        assert lad.ladder_holds()
        assert sum((-1) ** q * (a + b) for q, (a, b) in enumerate(zip(lad.N, lad.Nprime))) == 0
        assert lad.isometry_residual < 1e-9


def test_duality_of_ladder_and_literal_form():
    rng = np.random.default_rng(5)
    literal_failures = 0
    for _ in range(20):
        c, _ = random_dual_complex(rng, half_top=2)
        for lad in hg.spectral_ladder(c):
            assert all(lad.N[q] == lad.Nprime[c.top - q] for q in range(c.top + 1))
            literal_failures += any(lad.N[q] != lad.N[c.top - q] for q in range(c.top + 1))
    # N_q = N_{2n-q} without the prime is not a consequence of duality
    assert literal_failures > 0


def test_cluster_ambiguity_raises():
    d = np.diag([1.0, 1.0 + 1e-8])
    c = hg.FiniteHodgeComplex.build([d])
    with pytest.raises(EigenvalueClusterAmbiguity):
        hg.spectral_ladder(c)
    assert len(hg.spectral_ladder(c, rtol=1e-6)) == 1


# ---------------------------------------------------------------- traces


def test_mckean_singer_acyclic_zero():
    c = random_acyclic(np.random.default_rng(1))
    for t in (0.1, 1.0, 10.0):
        assert abs(hg.mckean_singer_trace(c, t)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_mckean_singer_constant(seed):
    rng = np.random.default_rng(seed)
    ranks, betti = random_shape(rng, 3, 3)
    c = random_complex(rng, ranks, betti)
    vals = [hg.mckean_singer_trace(c, t) for t in np.geomspace(0.1, 10, 5)]
    assert max(vals) - min(vals) < 1e-10
    assert abs(vals[-1] - hg.euler_characteristic(c)) < 1e-10


def test_mckean_singer_rejects_nonpositive_t():
    with pytest.raises(ValidationError):
        hg.mckean_singer_trace(two_term(), 0.0)


def test_signature_acyclic_zero():
    rng = np.random.default_rng(2)
    for _ in range(5):
        c, star = random_dual_complex(rng, half_top=1)
        if not any(hg.kernel_dims(c)):
            break
    assert not any(hg.kernel_dims(c))
    assert abs(hg.signature_trace(c, star, 0.7)) < 1e-12


def test_identity_star_is_not_t_independent():
    c = two_term(2.0)
    c = hg.FiniteHodgeComplex.build([np.array([[1.0]]), np.array([[0.0]])], dims=[1, 1, 1], check=True)
    star = hg.StarOperator.middle_only(c, np.eye(1))
    assert abs(hg.signature_trace(c, star, 0.5) - hg.signature_trace(c, star, 2.0)) > 0.1


def test_signature_needs_even_top():
    c = two_term()
    with pytest.raises(MiddleDegreeMissing):
        hg.StarOperator.middle_only(c, np.eye(1))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_signature_t_independent(seed):
    rng = np.random.default_rng(seed)
    c, star = random_dual_complex(rng, half_top=2, signature_lines=int(rng.integers(0, 4)))
    harm = hg.harmonic_signature(c, star)
    for t in (0.5, 2.0):
        assert abs(hg.signature_trace(c, star, t) - harm) < 1e-10
    assert star.isometry_residual(c) < 1e-9
    p = star.p_plus(c)
    g = c.gram[c.top // 2]
    assert np.abs(p @ p - p).max() < 1e-9
    assert np.abs(g @ p - (g @ p).T).max() < 1e-9


# ---------------------------------------------------------------- variation


def test_constant_family_zero():
    c = random_acyclic(np.random.default_rng(3))
    chk = hg.variation_identity_rs(hg.MetricFamily.constant(c), c)
    assert max(abs(x) for x in chk.lhs + chk.rhs) < 1e-12


def test_conformal_scaling_family():
    rng = np.random.default_rng(4)
    c, _ = random_dual_complex(rng, half_top=2)
    chk = hg.variation_identity_rs(hg.MetricFamily.conformal_scaling(c), c)
    assert chk.residual < 1e-6
    assert chk.middle_alpha == 0.0
    assert abs(chk.cancellation) < 1e-10
    assert chk.formula_residual < 1e-6


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_random_smooth_family(seed):
    rng = np.random.default_rng(seed)
    c = random_acyclic(rng, top=3)
    chk = hg.variation_identity_rs(hg.MetricFamily.random_smooth(c, rng), c, t=1.0)
    assert chk.residual < 1e-6
    assert chk.formula_residual < 1e-6


def test_second_order_decay():
    rng = np.random.default_rng(9)
    c = random_acyclic(rng, top=3)
    fam = hg.MetricFamily.random_smooth(c, rng)
    r = [hg.variation_identity_rs(fam, c, h=h, richardson=False).residual for h in (1e-2, 1e-3)]
    assert 50 < r[0] / r[1] < 200


def test_alpha_numeric_matches_exact():
    rng = np.random.default_rng(10)
    c = random_acyclic(rng)
    fam = hg.MetricFamily.random_smooth(c, rng)
    numeric = hg.MetricFamily(fam.gram)
    for a, b in zip(fam.alpha(0.3), numeric.alpha(0.3)):
        assert np.abs(a - b).max() < 1e-7


def test_non_smooth_family_detected():
    c = two_term()

    def gram(u):
        return [np.eye(1) * (2.0 + np.cbrt(u)), np.eye(1)]

    with pytest.raises(NonSmoothFamily):
        hg.laplacian_derivative_fd(c, hg.MetricFamily(gram), 0.0)


def test_harmonic_variation_identical_pair_zero():
    rng = np.random.default_rng(12)
    c = random_acyclic(rng)
    fam = hg.MetricFamily.random_smooth(c, rng)
    deriv, pred = hg.harmonic_variation_limit(fam, (c, c))
    assert deriv == 0.0 and pred == 0.0


def test_harmonic_variation_acyclic_pair():
    rng = np.random.default_rng(13)
    ranks, _ = random_shape(rng, 3, 3, acyclic=True)
    c1 = random_complex(rng, ranks, [0] * 4)
    c2 = random_complex(rng, ranks, [0] * 4).with_grams(c1.gram)
    deriv, pred = hg.harmonic_variation_limit(hg.MetricFamily.random_smooth(c1, rng), (c1, c2))
    assert abs(deriv) < 1e-6 and abs(pred) < 1e-12


def test_harmonic_variation_kernel_in_degree_zero():
    rng = np.random.default_rng(14)
    c1 = random_complex(rng, [2, 1], [1, 1, 0])
    c2 = random_complex(rng, [3, 1], [0, 0, 0])
    assert c1.dims == c2.dims
    c2 = c2.with_grams(c1.gram)
    fam = hg.MetricFamily.random_smooth(c1, rng)
    deriv, pred = hg.harmonic_variation_limit(fam, (c1, c2))
    alpha = fam.alpha(0.0)
    expected = 0.5 * (np.trace(alpha[0] @ hg.harmonic_projector(c1, 0)) - np.trace(alpha[1] @ hg.harmonic_projector(c1, 1)))
    assert pred == pytest.approx(expected, abs=1e-12)
    assert abs(deriv - pred) < 1e-6


def test_harmonic_variation_dimension_mismatch():
    rng = np.random.default_rng(15)
    c1 = random_complex(rng, [1], [0, 0])
    c2 = random_complex(rng, [2], [0, 0])
    with pytest.raises(DimensionMismatch):
        hg.harmonic_variation_limit(hg.MetricFamily.constant(c1), (c1, c2))


def test_torsion_variation_formula_matches_fd():
    rng = np.random.default_rng(16)
    c = random_complex(rng, [2, 2], [1, 0, 1])
    fam = hg.MetricFamily.random_smooth(c, rng)
    h = 1e-5
    fd = (hg.finite_torsion(hg.complex_at(c, fam, h)).log_torsion - hg.finite_torsion(hg.complex_at(c, fam, -h)).log_torsion) / (2 * h)
    assert fd == pytest.approx(hg.torsion_variation_formula(c, fam, 0.0), abs=1e-7)


# ---------------------------------------------------------------- finite torsion


def test_two_term_torsion():
    t = hg.finite_torsion(two_term(2.0))
    assert t.log_torsion == pytest.approx(math.log(2.0), abs=1e-15)
    assert t.acyclic


def test_shift_mirror_sum_is_eigenvalue_product():
    rng = np.random.default_rng(17)
    c = random_acyclic(rng, top=2)
    zero = hg.FiniteHodgeComplex.build([np.zeros((0, k)) for k in c.dims[:1]], dims=[c.dims[0], 0])
    shifted = hg.FiniteHodgeComplex.build(
        [np.zeros((c.dims[0], 0))] + list(c.d), [np.eye(0)] + list(c.gram), dims=[0] + list(c.dims)
    )
    padded = hg.FiniteHodgeComplex.build(list(c.d) + [np.zeros((0, c.dims[-1]))], list(c.gram) + [np.eye(0)],
                                         dims=list(c.dims) + [0])
    total = direct_sum(padded, shifted)
    # a degree shift flips the sign of the contribution
    assert hg.finite_torsion(shifted).log_torsion == pytest.approx(-hg.finite_torsion(c).log_torsion, abs=1e-12)
    assert hg.finite_torsion(total).log_torsion == pytest.approx(0.0, abs=1e-12)
    brute = 0.5 * sum((-1) ** (q + 1) * q * sum(math.log(x) for x in np.linalg.eigvals(hg.laplacian(total, q)).real
                                                if x > 1e-9) for q in range(total.top + 1))
    assert hg.finite_torsion(total).log_torsion == pytest.approx(brute, abs=1e-10)
    del zero


def test_torsion_change_of_orthonormal_basis():
    rng = np.random.default_rng(18)
    c = random_acyclic(rng)
    qs = [np.linalg.qr(rng.standard_normal((k, k)))[0] for k in c.dims]
    # P^-T G P^-1 with orthogonal P keeps an isometric relabelling
    c2 = change_basis(c, qs)
    assert abs(hg.finite_torsion(c).log_torsion - hg.finite_torsion(c2).log_torsion) < 1e-12


def test_general_basis_change_preserves_torsion():
    rng = np.random.default_rng(19)
    c = random_acyclic(rng)
    c2 = change_basis(c, [random_invertible(rng, k) for k in c.dims])
    assert abs(hg.finite_torsion(c).log_torsion - hg.finite_torsion(c2).log_torsion) < 1e-10


def test_conformal_rescale_torsion_matches_integrated_variation():
    rng = np.random.default_rng(20)
    c = random_acyclic(rng, top=4)
    fam = hg.MetricFamily.conformal_scaling(c)
    u1 = 0.4
    nodes, weights = np.polynomial.legendre.leggauss(12)
    us = 0.5 * u1 * (nodes + 1)
    integral = 0.5 * u1 * sum(w * hg.torsion_variation_formula(c, fam, u) for u, w in zip(us, weights))
    diff = hg.finite_torsion(hg.complex_at(c, fam, u1)).log_torsion - hg.finite_torsion(c).log_torsion
    assert diff == pytest.approx(integral, abs=1e-10)


def test_selfdual_and_antiselfdual_need_4n():
    with pytest.raises(MiddleDegreeMissing):
        hg.selfdual_finite_torsion(two_term())
