"""Finite-dimensional Hodge theory: adjoints, Laplacians, ladders, traces.

A complex is a graded sequence of inner-product spaces ``C^0 .. C^N`` with
differentials ``d[q] : C^q -> C^{q+1}`` stored as dense matrices and inner
products given by SPD gram matrices. The adjoint is taken by gram
conjugation, ``delta[q] = gram[q]^-1 d[q]^T gram[q+1]``, so a metric family
varies the grams while every ``d`` stays fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    EigenvalueClusterAmbiguity,
    MiddleDegreeMissing,
    NonSmoothFamily,
    ValidationError,
)

KERNEL_RTOL = 1e-10
CLUSTER_RTOL = 1e-9
AMBIGUITY_FACTOR = 100.0
EPS = np.finfo(float).eps


def _as_matrix(a, shape=None) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        m = m.reshape(shape) if shape is not None else np.atleast_2d(m)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class FiniteHodgeComplex:
    d: tuple[np.ndarray, ...]
    gram: tuple[np.ndarray, ...]
    exact_d: tuple | None = field(default=None, repr=False)
    exact_gram: tuple | None = field(default=None, repr=False)

    @classmethod
    def build(cls, d: Sequence, gram: Sequence | None = None, dims: Sequence[int] | None = None,
              check: bool = True, exact_d=None, exact_gram=None) -> "FiniteHodgeComplex":
        if dims is None:
            if not d:
                raise ValidationError("dims are required for a complex without differentials")
            dims = [np.shape(d[0])[1]] + [np.shape(x)[0] for x in d]
        dims = [int(x) for x in dims]
        if len(dims) != len(d) + 1:
            raise ValidationError("need exactly one differential between consecutive degrees")
        dd = tuple(_as_matrix(x, (dims[q + 1], dims[q])) for q, x in enumerate(d))
        if gram is None:
            gram = [np.eye(n) for n in dims]
        gg = tuple(_as_matrix(g, (dims[q], dims[q])) for q, g in enumerate(gram))
        c = cls(dd, gg, exact_d, exact_gram)
        c._validate_shapes()
        if check:
            c.validate()
        return c

    def _validate_shapes(self):
        if len(self.gram) != len(self.d) + 1:
            raise ValidationError("gram count must be one more than differential count")
        for q, dq in enumerate(self.d):
            if dq.shape != (self.dims[q + 1], self.dims[q]):
                raise ValidationError(f"d[{q}] has shape {dq.shape}, expected {(self.dims[q + 1], self.dims[q])}")

    def validate(self, tol: float = 1e-12):
        for q, g in enumerate(self.gram):
            if g.size == 0:
                continue
            if not np.allclose(g, g.T, rtol=0.0, atol=tol * max(1.0, np.abs(g).max())):
                raise ValidationError(f"gram[{q}] is not symmetric")
            if np.linalg.eigvalsh(g).min() <= 0.0:
                raise ValidationError(f"gram[{q}] is not positive definite")
        for q in range(len(self.d) - 1):
            a, b = self.d[q + 1], self.d[q]
            if a.size == 0 or b.size == 0:
                continue
            res = np.linalg.norm(a @ b)
            if res > tol * max(1.0, np.linalg.norm(a) * np.linalg.norm(b)):
                raise ValidationError(f"d[{q + 1}] d[{q}] != 0 (residual {res:.3e})")

    @property
    def top(self) -> int:
        return len(self.gram) - 1

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.gram)

    def with_grams(self, grams: Sequence) -> "FiniteHodgeComplex":
        return FiniteHodgeComplex.build(self.d, grams, dims=self.dims, check=False)

    @cached_property
    def _spectra(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        return tuple(_eigensystem(self, q) for q in range(self.top + 1))

    @cached_property
    def kernel_threshold(self) -> float:
        top = max((float(w.max()) for w, _ in self._spectra if w.size), default=0.0)
        return KERNEL_RTOL * top if top > 0.0 else KERNEL_RTOL


def adjoint(c: FiniteHodgeComplex, q: int) -> np.ndarray:
    """delta[q] : C^{q+1} -> C^q with <d a, b>_{q+1} = <a, delta b>_q."""
    if c.dims[q] == 0 or c.dims[q + 1] == 0:
        return np.zeros((c.dims[q], c.dims[q + 1]))
    return np.linalg.solve(c.gram[q], c.d[q].T @ c.gram[q + 1])


def laplacian(c: FiniteHodgeComplex, q: int) -> np.ndarray:
    n = c.dims[q]
    out = np.zeros((n, n))
    if q > 0:
        out += c.d[q - 1] @ adjoint(c, q - 1)
    if q < c.top:
        out += adjoint(c, q) @ c.d[q]
    return out


def _eigensystem(c: FiniteHodgeComplex, q: int):
    n = c.dims[q]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    g = c.gram[q]
    s = np.zeros((n, n))
    if q > 0 and c.dims[q - 1]:
        gd = g @ c.d[q - 1]
        s += gd @ np.linalg.solve(c.gram[q - 1], gd.T)
    if q < c.top and c.dims[q + 1]:
        s += c.d[q].T @ c.gram[q + 1] @ c.d[q]
    s = 0.5 * (s + s.T)
    w, v = sla.eigh(s, g)
    return np.maximum(w, 0.0), v


def eigensystem(c: FiniteHodgeComplex, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues of Delta_q and gram-orthonormal eigenvectors."""
    return c._spectra[q]


def kernel_dims(c: FiniteHodgeComplex) -> tuple[int, ...]:
    thr = c.kernel_threshold
    return tuple(int(np.sum(w <= thr)) for w, _ in c._spectra)


def betti_numbers(c: FiniteHodgeComplex) -> tuple[int, ...]:
    """Cohomology dimensions by rank arithmetic (no eigensolver)."""
    ranks = [np.linalg.matrix_rank(dq) if dq.size else 0 for dq in c.d]
    return tuple(
        c.dims[q] - (ranks[q] if q < c.top else 0) - (ranks[q - 1] if q > 0 else 0)
        for q in range(c.top + 1)
    )


def harmonic_projector(c: FiniteHodgeComplex, q: int) -> np.ndarray:
    """Gram-orthogonal projector onto ker Delta_q."""
    w, v = c._spectra[q]
    vk = v[:, w <= c.kernel_threshold]
    return vk @ vk.T @ c.gram[q]


def heat_operator(c: FiniteHodgeComplex, q: int, t: float) -> np.ndarray:
    w, v = c._spectra[q]
    return (v * np.exp(-t * w)) @ v.T @ c.gram[q]


def log_det_prime(c: FiniteHodgeComplex, q: int) -> float:
    w, _ = c._spectra[q]
    return math.fsum(np.log(w[w > c.kernel_threshold]))


# ---------------------------------------------------------------- ladders


@dataclass(frozen=True)
class SpectralLadder:
    eigenvalue: float
    N: tuple[int, ...]
    Nprime: tuple[int, ...]
    closed_bases: tuple[np.ndarray, ...] = field(repr=False)
    coclosed_bases: tuple[np.ndarray, ...] = field(repr=False)
    isometry_residual: float = 0.0

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.N, self.Nprime))

    def ladder_holds(self) -> bool:
        return all(self.Nprime[q] == self.N[q + 1] for q in range(len(self.N) - 1))


def _clusters(c: FiniteHodgeComplex, rtol: float):
    thr = c.kernel_threshold
    items = sorted(
        (float(lam), q, i)
        for q, (w, _) in enumerate(c._spectra)
        for i, lam in enumerate(w)
        if lam > thr
    )
    groups: list[list[tuple[float, int, int]]] = []
    for item in items:
        if groups:
            prev = groups[-1][-1][0]
            gap = item[0] - prev
            if gap <= rtol * item[0]:
                groups[-1].append(item)
                continue
            if gap <= AMBIGUITY_FACTOR * rtol * item[0]:
                raise EigenvalueClusterAmbiguity(
                    f"eigenvalues {prev!r} and {item[0]!r} are neither equal nor separated at rtol={rtol:g}"
                )
        groups.append([item])
    return groups


def _split(matrix: np.ndarray, basis: np.ndarray, cutoff: float):
    """Columns of ``basis`` spanning the null space of ``matrix @ basis``."""
    k = basis.shape[1]
    if matrix is None or matrix.shape[0] == 0:
        return basis, 0
    u, s, vt = np.linalg.svd(matrix @ basis)
    rank = int(np.sum(s > cutoff))
    null = vt[rank:].T if vt.shape[0] == k else vt.T[:, rank:]
    return basis @ null, rank


def spectral_ladder(c: FiniteHodgeComplex, rtol: float = CLUSTER_RTOL) -> list[SpectralLadder]:
    """Closed/coclosed split of each positive eigenspace, degree by degree.

    Inside H^lambda the differential has singular values 0 or sqrt(lambda), so
    ranks are read off with a cut at sqrt(lambda)/2. The isometry residual
    measures how far (1/sqrt(lambda)) d, restricted to the coclosed part, is
    from an isometry onto closed lambda-eigenvectors one degree up.
    """
    chol = [np.linalg.cholesky(g).T if g.size else g for g in c.gram]
    deltas = [adjoint(c, q) for q in range(c.top)]
    out = []
    for group in _clusters(c, rtol):
        lam = math.fsum(x[0] for x in group) / len(group)
        root = math.sqrt(lam)
        closed, coclosed, n_closed, n_coclosed = [], [], [], []
        for q in range(c.top + 1):
            idx = [i for (_, qq, i) in group if qq == q]
            basis = c._spectra[q][1][:, idx]
            k = len(idx)
            dq = chol[q + 1] @ c.d[q] if q < c.top and k else None
            e_basis, _ = _split(dq, basis, 0.5 * root)
            bq = chol[q - 1] @ deltas[q - 1] if q > 0 and k else None
            ep_basis, _ = _split(bq, basis, 0.5 * root)
            closed.append(e_basis)
            coclosed.append(ep_basis)
            n_closed.append(e_basis.shape[1])
            n_coclosed.append(ep_basis.shape[1])
        residual = 0.0
        for q in range(c.top):
            src = coclosed[q]
            if src.shape[1] == 0:
                continue
            img = c.d[q] @ src / root
            gq1 = c.gram[q + 1]
            residual = max(residual, float(np.abs(img.T @ gq1 @ img - np.eye(src.shape[1])).max()))
            lap = laplacian(c, q + 1)
            residual = max(residual, float(np.abs(lap @ img - lam * img).max()) / lam)
        out.append(SpectralLadder(lam, tuple(n_closed), tuple(n_coclosed), tuple(closed), tuple(coclosed), residual))
    return out


# ---------------------------------------------------------------- traces


def euler_characteristic(c: FiniteHodgeComplex) -> int:
    return sum((-1) ** q * k for q, k in enumerate(kernel_dims(c)))


def mckean_singer_trace(c: FiniteHodgeComplex, t: float) -> float:
    """sum_q (-1)^q tr exp(-t Delta_q); equals the Euler characteristic for every t."""
    if not t > 0.0:
        raise ValidationError("t must be positive")
    terms = []
    for q, (w, _) in enumerate(c._spectra):
        terms.extend((-1) ** q * np.exp(-t * np.sort(w)))
    return math.fsum(terms)


@dataclass(frozen=True, eq=False)
class StarOperator:
    """Degree-reversing maps ``maps[q] : C^q -> C^{N-q}`` (``None`` where absent)."""

    maps: tuple

    @classmethod
    def middle_only(cls, c: FiniteHodgeComplex, star_mid) -> "StarOperator":
        if c.top % 2:
            raise MiddleDegreeMissing("complex has no middle degree")
        maps = [None] * (c.top + 1)
        maps[c.top // 2] = np.asarray(star_mid, dtype=float)
        return cls(tuple(maps))

    def middle(self, c: FiniteHodgeComplex) -> np.ndarray:
        if c.top % 2:
            raise MiddleDegreeMissing("complex has no middle degree")
        m = self.maps[c.top // 2]
        if m is None:
            raise MiddleDegreeMissing("star is not defined on the middle degree")
        return m

    def isometry_residual(self, c: FiniteHodgeComplex) -> float:
        res = 0.0
        for q, s in enumerate(self.maps):
            if s is None or s.size == 0:
                continue
            res = max(res, float(np.abs(s.T @ c.gram[c.top - q] @ s - c.gram[q]).max()))
        return res

    def square_signs(self, c: FiniteHodgeComplex, tol: float = 1e-10) -> tuple:
        """+1 / -1 where star_{N-q} star_q = +-identity, ``None`` otherwise."""
        out = []
        for q, s in enumerate(self.maps):
            back = self.maps[c.top - q]
            if s is None or back is None:
                out.append(None)
                continue
            sq = back @ s
            eye = np.eye(sq.shape[0])
            if np.abs(sq - eye).max() <= tol:
                out.append(1)
            elif np.abs(sq + eye).max() <= tol:
                out.append(-1)
            else:
                out.append(None)
        return tuple(out)

    def p_plus(self, c: FiniteHodgeComplex) -> np.ndarray:
        s = self.middle(c)
        return 0.5 * (s + np.eye(s.shape[0]))


def signature_trace(c: FiniteHodgeComplex, star: StarOperator, t: float) -> float:
    """tr(exp(-t Delta_m) star) on the middle degree m = N/2."""
    s = star.middle(c)
    m = c.top // 2
    w, v = c._spectra[m]
    inner = v.T @ c.gram[m] @ s @ v
    return math.fsum(np.exp(-t * w) * np.diag(inner))


def harmonic_signature(c: FiniteHodgeComplex, star: StarOperator) -> float:
    """tr(star) restricted to the harmonic middle-degree forms."""
    s = star.middle(c)
    m = c.top // 2
    w, v = c._spectra[m]
    keep = w <= c.kernel_threshold
    inner = v[:, keep].T @ c.gram[m] @ s @ v[:, keep]
    return float(np.trace(inner))


# ---------------------------------------------------------------- torsion


@dataclass(frozen=True)
class FiniteTorsion:
    log_torsion: float
    log_dets: tuple[float, ...]
    kernel_dims: tuple[int, ...]

    @property
    def acyclic(self) -> bool:
        return not any(self.kernel_dims)


def finite_torsion(c: FiniteHodgeComplex) -> FiniteTorsion:
    """(1/2) sum_q (-1)^(q+1) q log det' Delta_q."""
    logdets = tuple(log_det_prime(c, q) for q in range(c.top + 1))
    value = 0.5 * math.fsum((-1) ** (q + 1) * q * ld for q, ld in enumerate(logdets))
    return FiniteTorsion(value, logdets, kernel_dims(c))


def _selfdual_n(c: FiniteHodgeComplex) -> int:
    if c.top % 4:
        raise MiddleDegreeMissing(f"self-dual torsion needs top degree 4n, got {c.top}")
    return c.top // 4


def selfdual_finite_torsion(c: FiniteHodgeComplex) -> float:
    """sum_{q<2n} (-1)^(q+1) q log det' Delta_q - n log det' Delta_2n."""
    n = _selfdual_n(c)
    terms = [(-1) ** (q + 1) * q * log_det_prime(c, q) for q in range(2 * n)]
    return math.fsum(terms) - n * log_det_prime(c, 2 * n)


def antiselfdual_finite_torsion(c: FiniteHodgeComplex) -> float:
    """Mirror weights: sum_{q>2n} (-1)^(q+1) q log det' Delta_q - n log det' Delta_2n."""
    n = _selfdual_n(c)
    terms = [(-1) ** (q + 1) * q * log_det_prime(c, q) for q in range(2 * n + 1, 4 * n + 1)]
    return math.fsum(terms) - n * log_det_prime(c, 2 * n)


# ---------------------------------------------------------------- metric variations


def central_difference(fn: Callable[[float], list], u: float, h: float, richardson: bool = True):
    """Central difference of a list-of-matrices valued function.

    With ``richardson`` the h and h/2 estimates are combined to cancel the h^2
    term; a third estimate at h/4 guards against families whose differences
    grow under refinement beyond the rounding floor.
    """

    def diff(step):
        plus, minus = fn(u + step), fn(u - step)
        return [(a - b) / (2.0 * step) for a, b in zip(plus, minus)]

    d1 = diff(h)
    if any(not np.all(np.isfinite(x)) for x in d1):
        raise NonSmoothFamily(f"non-finite difference quotient at u={u}")
    if not richardson:
        return d1
    d2 = diff(h / 2)
    d3 = diff(h / 4)
    scale = max((float(np.abs(x).max()) for x in fn(u) if x.size), default=1.0)
    floor = 1e3 * EPS * max(scale, 1.0) / h
    e1 = max((float(np.abs(a - b).max()) for a, b in zip(d1, d2) if a.size), default=0.0)
    e2 = max((float(np.abs(a - b).max()) for a, b in zip(d2, d3) if a.size), default=0.0)
    if e2 > floor and e2 > e1:
        raise NonSmoothFamily(f"difference quotients diverge under refinement ({e1:.2e} -> {e2:.2e})")
    return [(4.0 * b - a) / 3.0 for a, b in zip(d1, d2)]


@dataclass(frozen=True, eq=False)
class MetricFamily:
    """One-parameter family of grams ``gram(u)`` over fixed differentials."""

    gram: Callable[[float], Sequence[np.ndarray]]
    dgram: Callable[[float], Sequence[np.ndarray]] | None = None
    conformal: bool = False

    @classmethod
    def constant(cls, c: FiniteHodgeComplex) -> "MetricFamily":
        grams = list(c.gram)
        return cls(lambda u: grams, lambda u: [np.zeros_like(g) for g in grams])

    @classmethod
    def conformal_scaling(cls, c: FiniteHodgeComplex) -> "MetricFamily":
        """gram[q](u) = exp((N - 2q) u) gram[q](0); on a 4n-manifold this is
        exp(2(2n - q) u), the L^2 response to g -> exp(2u) g."""
        grams, top = list(c.gram), c.top

        def gram(u):
            return [math.exp((top - 2 * q) * u) * g for q, g in enumerate(grams)]

        def dgram(u):
            return [(top - 2 * q) * math.exp((top - 2 * q) * u) * g for q, g in enumerate(grams)]

        return cls(gram, dgram, conformal=True)

    @classmethod
    def random_smooth(cls, c: FiniteHodgeComplex, rng: np.random.Generator, strength: float = 0.5) -> "MetricFamily":
        """gram[q](u) = L expm(u X) L^T with X symmetric, SPD for every u."""
        chols = [np.linalg.cholesky(g) if g.size else g for g in c.gram]
        gens = []
        for g in c.gram:
            a = rng.standard_normal(g.shape)
            gens.append(strength * 0.5 * (a + a.T))

        def gram(u):
            return [lc @ sla.expm(u * x) @ lc.T if x.size else x for lc, x in zip(chols, gens)]

        def dgram(u):
            return [lc @ x @ sla.expm(u * x) @ lc.T if x.size else x for lc, x in zip(chols, gens)]

        return cls(gram, dgram)

    def grams_at(self, u: float) -> list[np.ndarray]:
        return [np.asarray(g, dtype=float) for g in self.gram(u)]

    def alpha(self, u: float, h: float = 1e-5) -> list[np.ndarray]:
        """alpha[q] = gram[q]^-1 d gram[q]/du."""
        grams = self.grams_at(u)
        if self.dgram is not None:
            dg = [np.asarray(x, dtype=float) for x in self.dgram(u)]
        else:
            dg = central_difference(self.grams_at, u, h)
        return [np.linalg.solve(g, x) if g.size else x for g, x in zip(grams, dg)]


def complex_at(c: FiniteHodgeComplex, family: MetricFamily, u: float) -> FiniteHodgeComplex:
    return c.with_grams(family.grams_at(u))


def laplacian_derivative_fd(c, family: MetricFamily, u: float, h: float = 1e-5, richardson: bool = True):
    def laps(x):
        cx = complex_at(c, family, x)
        return [laplacian(cx, q) for q in range(c.top + 1)]

    return central_difference(laps, u, h, richardson)


def laplacian_derivative_formula(c, family: MetricFamily, u: float) -> list[np.ndarray]:
    """-d alpha delta + d delta alpha - alpha delta d + delta alpha d, degree by degree."""
    cu = complex_at(c, family, u)
    al = family.alpha(u)
    deltas = [adjoint(cu, q) for q in range(c.top)]
    out = []
    for q in range(c.top + 1):
        n = c.dims[q]
        acc = np.zeros((n, n))
        if q > 0:
            d, de = c.d[q - 1], deltas[q - 1]
            acc += -d @ al[q - 1] @ de + d @ de @ al[q]
        if q < c.top:
            d, de = c.d[q], deltas[q]
            acc += -al[q] @ de @ d + de @ al[q + 1] @ d
        out.append(acc)
    return out


@dataclass(frozen=True)
class VariationCheck:
    residual: float
    per_k: tuple[float, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    formula_residual: float
    middle_alpha: float | None = None
    cancellation: float | None = None


def _tr(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", a, b))


def variation_identity_rs(family: MetricFamily, c: FiniteHodgeComplex, t: float = 1.0, u: float = 0.0,
                          h: float = 1e-5, richardson: bool = True) -> VariationCheck:
    """Both sides of the truncated variation identity, for every cut-off k.

    Left:  sum_{q<=k} (-1)^q q tr(exp(-t Delta_q) dDelta_q/du), derivative by
           central differences.
    Right: sum_{q<=k} (-1)^q tr(alpha Delta_q exp(-t Delta_q))
           - (-1)^k (k+1) tr(alpha delta d exp(-t Delta_k))
           + (-1)^k k tr(alpha d delta exp(-t Delta_{k+1})).
    Signs follow exp(-t Delta) with Delta >= 0 and alpha = gram^-1 dgram/du.
    """
    cu = complex_at(c, family, u)
    al = family.alpha(u)
    dlap = laplacian_derivative_fd(c, family, u, h, richardson)
    formula = laplacian_derivative_formula(c, family, u)
    formula_res = max((float(np.abs(a - b).max()) for a, b in zip(dlap, formula) if a.size), default=0.0)
    heat = [heat_operator(cu, q, t) for q in range(c.top + 1)]
    laps = [laplacian(cu, q) for q in range(c.top + 1)]
    deltas = [adjoint(cu, q) for q in range(c.top)]

    def x_term(k):  # tr(alpha delta d exp(-t Delta_k)) on C^k
        if k >= c.top:
            return 0.0
        return _tr(al[k] @ deltas[k] @ c.d[k], heat[k])

    def y_term(k):  # tr(alpha d delta exp(-t Delta_k)) on C^k
        if k == 0 or k > c.top:
            return 0.0
        return _tr(al[k] @ c.d[k - 1] @ deltas[k - 1], heat[k])

    lhs_terms = [(-1) ** q * q * _tr(heat[q], dlap[q]) for q in range(c.top + 1)]
    main = [(-1) ** q * _tr(al[q] @ laps[q], heat[q]) for q in range(c.top + 1)]
    lhs, rhs, per_k = [], [], []
    for k in range(c.top + 1):
        left = math.fsum(lhs_terms[: k + 1])
        right = math.fsum(main[: k + 1]) - (-1) ** k * (k + 1) * x_term(k) + (-1) ** k * k * y_term(k + 1)
        lhs.append(left)
        rhs.append(right)
        per_k.append(abs(left - right))
    middle_alpha = cancellation = None
    if c.top % 2 == 0:
        m = c.top // 2
        middle_alpha = float(np.abs(al[m]).max()) if al[m].size else 0.0
        if family.conformal and m >= 1:
            cancellation = x_term(m - 1) + y_term(m + 1)
    return VariationCheck(max(per_k), tuple(per_k), tuple(lhs), tuple(rhs), formula_res, middle_alpha, cancellation)


def torsion_variation_formula(c: FiniteHodgeComplex, family: MetricFamily, u: float) -> float:
    """d/du of finite_torsion: -(1/2) sum_q (-1)^q tr(alpha_q (1 - P_q))."""
    cu = complex_at(c, family, u)
    al = family.alpha(u)
    terms = []
    for q in range(c.top + 1):
        if not c.dims[q]:
            continue
        p = harmonic_projector(cu, q)
        terms.append((-1) ** q * float(np.trace(al[q] @ (np.eye(c.dims[q]) - p))))
    return -0.5 * math.fsum(terms)


def harmonic_variation_limit(family: MetricFamily, pair: tuple[FiniteHodgeComplex, FiniteHodgeComplex],
                             u: float = 0.0, h: float = 1e-5) -> tuple[float, float]:
    """(finite-difference d/du of the log-torsion ratio, (1/2) sum (-1)^q tr(alpha (P1 - P2))).

    Both complexes share the gram family; their alpha traces over the whole
    space cancel, leaving only the harmonic projectors.
    """
    c1, c2 = pair
    if c1.dims != c2.dims:
        raise DimensionMismatch(f"degree dimensions differ: {c1.dims} vs {c2.dims}")

    def ratio(x):
        return finite_torsion(complex_at(c1, family, x)).log_torsion - finite_torsion(complex_at(c2, family, x)).log_torsion

    plus, minus = ratio(u + h), ratio(u - h)
    deriv = (plus - minus) / (2.0 * h)
    if h > 0 and abs(plus - minus) > 0:
        half = (ratio(u + h / 2) - ratio(u - h / 2)) / h
        deriv = (4.0 * half - deriv) / 3.0
    al = family.alpha(u)
    k1, k2 = complex_at(c1, family, u), complex_at(c2, family, u)
    terms = []
    for q in range(c1.top + 1):
        if not c1.dims[q]:
            continue
        terms.append((-1) ** q * float(np.trace(al[q] @ (harmonic_projector(k1, q) - harmonic_projector(k2, q)))))
    return deriv, 0.5 * math.fsum(terms)
