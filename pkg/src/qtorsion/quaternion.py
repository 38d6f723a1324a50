"""Finite models of the quaternionic complex A^0 -> ... -> A^{2n}.

A model holds the truncated complex ``D`` on degrees 0..2n, the extended
complex ``dext`` on degrees 2n..4n, and a degree-reversing duality ``gamma``
with ``gamma[4n-q] gamma[q] = 1``. The codifferential is not a gram adjoint
but ``delta[q] = gamma[4n-q] dext[4n-q-1] gamma[q+1]``, so ``Delta^D`` is
checked for self-adjointness rather than assumed to have it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import sympy as sp

from . import exact as ex
from .errors import (
    DimensionError,
    GammaSquareDrift,
    IncompatibleGamma,
    NonRealSpectrum,
    ValidationError,
)
from .exterior import hodge_star, wedge_matrix
from .generators import random_invertible, random_spd
from .hodge import EPS, KERNEL_RTOL, central_difference

GAMMA_TOL = 1e-12
DRIFT_TOL = 1e-10
SPECTRUM_TOL = 1e-10


@dataclass(frozen=True)
class QuaternionicFiberSpec:
    n: int
    dims: tuple[int, ...]

    @property
    def euler(self) -> int:
        return sum((-1) ** q * k for q, k in enumerate(self.dims))


def fiber_dims(n: int) -> QuaternionicFiberSpec:
    """dim(Lambda^q E (x) S^q H) = C(2n, q)(q + 1) with dim E = 2n, dim H = 2."""
    if n < 1:
        raise DimensionError("quaternionic dimension must be at least 1")
    return QuaternionicFiberSpec(n, tuple(comb(2 * n, q) * (q + 1) for q in range(2 * n + 1)))


@dataclass(frozen=True, eq=False)
class QuaternionicComplexModel:
    n: int
    D: tuple[np.ndarray, ...]  # D[q] : A^q -> A^{q+1}, q < 2n
    dext: tuple[np.ndarray, ...]  # dext[j] : A^{2n+j} -> A^{2n+j+1}
    gamma: tuple[np.ndarray, ...]  # gamma[q] : A^q -> A^{4n-q}
    gram: tuple[np.ndarray, ...]
    exact: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.n
        if len(self.D) != 2 * n or len(self.dext) != 2 * n or len(self.gamma) != 4 * n + 1 or len(self.gram) != 4 * n + 1:
            raise ValidationError("model needs 2n D maps, 2n dext maps, and 4n+1 gammas and grams")
        dims = self.dims
        for q in range(2 * n):
            if self.D[q].shape != (dims[q + 1], dims[q]):
                raise ValidationError(f"D[{q}] has shape {self.D[q].shape}")
            p = 2 * n + q
            if self.dext[q].shape != (dims[p + 1], dims[p]):
                raise ValidationError(f"dext at degree {p} has shape {self.dext[q].shape}")
        for q, g in enumerate(self.gamma):
            if g.shape != (dims[4 * n - q], dims[q]):
                raise ValidationError(f"gamma[{q}] has shape {g.shape}")

    @property
    def top(self) -> int:
        return 4 * self.n

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.gram)

    def d_ext(self, p: int) -> np.ndarray:
        """Extended differential out of degree p (2n <= p < 4n)."""
        return self.dext[p - 2 * self.n]

    def with_gamma(self, gamma: Sequence[np.ndarray]) -> "QuaternionicComplexModel":
        return QuaternionicComplexModel(self.n, self.D, self.dext, tuple(gamma), self.gram)

    def gamma_square_residual(self) -> float:
        res = 0.0
        for q, g in enumerate(self.gamma):
            if g.size:
                res = max(res, float(np.abs(self.gamma[self.top - q] @ g - np.eye(g.shape[1])).max()))
        return res

    def isometry_residual(self) -> float:
        res = 0.0
        for q, g in enumerate(self.gamma):
            if g.size:
                res = max(res, float(np.abs(g.T @ self.gram[self.top - q] @ g - self.gram[q]).max()))
        return res

    def complex_residual(self) -> float:
        res = 0.0
        for maps in (self.D, self.dext):
            for a, b in zip(maps[1:], maps[:-1]):
                if a.size and b.size:
                    res = max(res, float(np.abs(a @ b).max()))
        return res

    def validate(self):
        r = self.complex_residual()
        if r > GAMMA_TOL * max(1.0, max(float(np.abs(x).max()) for x in (*self.D, *self.dext) if x.size) ** 2):
            raise ValidationError(f"D or dext does not square to zero (residual {r:.2e})")
        g = self.gamma_square_residual()
        if g > GAMMA_TOL * 10:
            raise IncompatibleGamma(f"gamma gamma != 1 (residual {g:.2e})")
        return self


def build_delta(model: QuaternionicComplexModel, check: bool = True) -> tuple[np.ndarray, ...]:
    """delta[q] = gamma[4n-q] dext[4n-q-1] gamma[q+1] : A^{q+1} -> A^q, q < 2n."""
    if check:
        res = model.gamma_square_residual()
        if res > 10 * GAMMA_TOL:
            raise IncompatibleGamma(f"gamma gamma != 1 (residual {res:.2e})")
    top = model.top
    return tuple(model.gamma[top - q] @ model.d_ext(top - q - 1) @ model.gamma[q + 1] for q in range(2 * model.n))


def laplacians(model: QuaternionicComplexModel, delta=None) -> list[np.ndarray]:
    """Delta^D_q = D delta + delta D for q = 0..2n (no delta D term at 2n)."""
    delta = build_delta(model) if delta is None else delta
    out = []
    for q in range(2 * model.n + 1):
        k = model.dims[q]
        m = np.zeros((k, k))
        if q > 0:
            m += model.D[q - 1] @ delta[q - 1]
        if q < 2 * model.n:
            m += delta[q] @ model.D[q]
        out.append(m)
    return out


def adjoint_residual(model: QuaternionicComplexModel) -> float:
    """max |delta - gram^-1 D^T gram|: zero iff delta is the gram adjoint of D."""
    delta = build_delta(model)
    res = 0.0
    for q, dq in enumerate(model.D):
        if dq.size:
            adj = np.linalg.solve(model.gram[q], dq.T @ model.gram[q + 1])
            res = max(res, float(np.abs(delta[q] - adj).max()))
    return res


def selfadjoint_residual(model: QuaternionicComplexModel) -> float:
    res = 0.0
    for q, lap in enumerate(laplacians(model)):
        if lap.size:
            s = model.gram[q] @ lap
            res = max(res, float(np.abs(s - s.T).max()))
    return res


def delta_square_residual(model: QuaternionicComplexModel) -> float:
    delta = build_delta(model)
    res = 0.0
    for a, b in zip(delta[:-1], delta[1:]):
        if a.size and b.size:
            res = max(res, float(np.abs(a @ b).max()))
    return res


# ---------------------------------------------------------------- constructions


def _pair_isometry(rng, g_q, dim_top, spread):
    gam = random_invertible(rng, g_q.shape[0], spread)
    inv = np.linalg.inv(gam)
    g_top = inv.T @ g_q @ inv
    return gam, inv, 0.5 * (g_top + g_top.T)


def _middle_reflection(rng, g, signs=None):
    k = g.shape[0]
    if k == 0:
        return np.zeros((0, 0))
    r = np.linalg.cholesky(g).T
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    s = np.asarray(signs, dtype=float) if signs is not None else rng.choice([-1.0, 1.0], k)
    return np.linalg.solve(r, q @ np.diag(s) @ q.T @ r)


def _greedy_ranks(rng, dims, acyclic):
    ranks, prev = [], 0
    for q in range(len(dims) - 1):
        room = min(dims[q] - prev, dims[q + 1])
        r = room if acyclic else int(rng.integers(max(0, room - 1), room + 1))
        ranks.append(r)
        prev = r
    return ranks


def _random_differentials(rng, dims, ranks, spread):
    mats = [random_invertible(rng, k, spread) for k in dims]
    inv = [np.linalg.inv(m) if m.size else m for m in mats]
    out, prev = [], 0
    for q, r in enumerate(ranks):
        m = np.zeros((dims[q + 1], dims[q]))
        m[:r, prev: prev + r] = np.diag(np.exp(rng.uniform(-spread, spread, r)))
        out.append(mats[q + 1] @ m @ inv[q])
        prev = r
    return out


def random_model(rng: np.random.Generator, n: int = 1, dims: Sequence[int] | None = None,
                 consistent: bool = True, acyclic: bool = True, spread: float = 0.4) -> QuaternionicComplexModel:
    """Random model on degrees 0..4n.

    ``consistent`` builds dext from the gram adjoint of D transported by
    gamma, which makes delta the adjoint of D; otherwise dext is an
    independent random complex and Delta^D is generally not self-adjoint.
    """
    dims = list(fiber_dims(n).dims if dims is None else dims)
    if len(dims) != 2 * n + 1:
        raise DimensionError("dims must cover degrees 0..2n")
    top = 4 * n
    full = dims + dims[-2::-1]
    grams = [None] * (top + 1)
    gammas = [None] * (top + 1)
    for q in range(2 * n):
        grams[q] = random_spd(rng, dims[q], spread)
        gam, inv, gtop = _pair_isometry(rng, grams[q], full[top - q], spread)
        gammas[q], gammas[top - q], grams[top - q] = gam, inv, gtop
    grams[2 * n] = random_spd(rng, dims[2 * n], spread)
    gammas[2 * n] = _middle_reflection(rng, grams[2 * n])
    D = _random_differentials(rng, dims, _greedy_ranks(rng, dims, acyclic), spread)
    if consistent:
        adj = [np.linalg.solve(grams[q], D[q].T @ grams[q + 1]) for q in range(2 * n)]
        # dext out of degree 4n-q-1 equals gamma[q] adj[q] gamma[4n-q-1]
        dext = [None] * (2 * n)
        for q in range(2 * n):
            p = top - q - 1
            dext[p - 2 * n] = gammas[q] @ adj[q] @ gammas[p]
    else:
        upper = full[2 * n:]
        dext = _random_differentials(rng, upper, _greedy_ranks(rng, upper, acyclic), spread)
    return QuaternionicComplexModel(n, tuple(D), tuple(dext), tuple(gammas), tuple(grams)).validate()


def selfdual_fiber_model(modes: Sequence[Sequence], exact: bool = True) -> QuaternionicComplexModel:
    """n = 1 model assembled from Fourier modes of a flat 4-torus.

    Per mode a: A^0 = Lambda^0, A^1 = Lambda^1, A^2 = Lambda^2_+ with basis
    h_i = sqrt2 (e_0i + *e_0i) (gram 4I), A^3 = Lambda^3, A^4 = Lambda^4.
    D_0 = a^, D_1 = sqrt2 P_+ (a^), extended maps a^ on Lambda^2_+ (again with
    the sqrt2) and on Lambda^3; gamma is the Hodge star up to the signs that
    make gamma gamma = 1 and delta the adjoint of D. The sqrt2 makes
    Delta^D_2 = D_1 D_1^* equal the Hodge Laplacian on self-dual forms.
    All entries are rational when the modes are.
    """
    n_modes = len(modes)
    star1, star2 = hodge_star(4, 1, exact=True), hodge_star(4, 2, exact=True)
    e0i = sp.zeros(6, 3)
    from .exterior import _index

    idx = _index(4, 2)
    for i in range(3):
        e0i[idx[(0, i + 1)], i] = 1
    f = e0i + star2 * e0i  # columns e_0i + *e_0i, gram 2I
    blocks = {k: [] for k in ("D0", "D1", "X2", "X3")}
    for a in modes:
        blocks["D0"].append(wedge_matrix(a, 0, exact=True))
        blocks["D1"].append(f.T * wedge_matrix(a, 1, exact=True) / 2)
        blocks["X2"].append(2 * wedge_matrix(a, 2, exact=True) * f)
        blocks["X3"].append(wedge_matrix(a, 3, exact=True))
    star0, star3, star4 = hodge_star(4, 0, exact=True), hodge_star(4, 3, exact=True), hodge_star(4, 4, exact=True)
    # signs fixed by requiring delta = gram adjoint of D (see tests)
    gam = [-star0, -star1, sp.eye(3), star3, -star4]
    grams1 = [sp.eye(1), sp.eye(4), 4 * sp.eye(3), sp.eye(4), sp.eye(1)]

    def rep(m):
        return sp.diag(*([m] * n_modes))

    exact_data = {
        "D": (sp.diag(*blocks["D0"]), sp.diag(*blocks["D1"])),
        "dext": (sp.diag(*blocks["X2"]), sp.diag(*blocks["X3"])),
        "gamma": tuple(rep(g) for g in gam),
        "gram": tuple(rep(g) for g in grams1),
    }

    def num(m):
        return np.array(m.tolist(), dtype=float).reshape(m.shape)

    model = QuaternionicComplexModel(
        1,
        tuple(num(m) for m in exact_data["D"]),
        tuple(num(m) for m in exact_data["dext"]),
        tuple(num(m) for m in exact_data["gamma"]),
        tuple(num(m) for m in exact_data["gram"]),
        exact_data if exact else None,
    )
    return model.validate()


def direct_sum(*models: QuaternionicComplexModel) -> QuaternionicComplexModel:
    n = models[0].n
    if any(m.n != n for m in models):
        raise DimensionError("summands need the same quaternionic dimension")

    def bd(attr, i):
        return sla.block_diag(*[getattr(m, attr)[i] for m in models])

    return QuaternionicComplexModel(
        n,
        tuple(bd("D", i) for i in range(2 * n)),
        tuple(bd("dext", i) for i in range(2 * n)),
        tuple(bd("gamma", i) for i in range(4 * n + 1)),
        tuple(bd("gram", i) for i in range(4 * n + 1)),
    )


# ---------------------------------------------------------------- variation


@dataclass(frozen=True, eq=False)
class GammaFamily:
    """gamma(u)[q] = T[4n-q](u) gamma0[q] T[q](u)^-1 with T[q](u) = expm(u gram^-1 S[q]).

    S[q] skew makes each T[q] a gram isometry, so gamma(u) stays an isometric
    involution pairing for every u.
    """

    model: QuaternionicComplexModel
    skew: tuple  # per degree: skew matrix or None

    @classmethod
    def random(cls, model, rng: np.random.Generator, degrees: Sequence[int] | None = None, strength: float = 0.5):
        degrees = range(model.top + 1) if degrees is None else degrees
        skew = [None] * (model.top + 1)
        for q in degrees:
            k = model.dims[q]
            a = rng.standard_normal((k, k))
            skew[q] = strength * 0.5 * (a - a.T)
        return cls(model, tuple(skew))

    @classmethod
    def constant(cls, model):
        return cls(model, (None,) * (model.top + 1))

    def _gen(self, q):
        s = self.skew[q]
        return None if s is None else np.linalg.solve(self.model.gram[q], s)

    def _t(self, q, u):
        a = self._gen(q)
        return np.eye(self.model.dims[q]) if a is None else sla.expm(u * a)

    def gamma(self, u: float) -> list[np.ndarray]:
        top = self.model.top
        ts = [self._t(q, u) for q in range(top + 1)]
        return [ts[top - q] @ g0 @ np.linalg.inv(ts[q]) for q, g0 in enumerate(self.model.gamma)]

    def dgamma(self, u: float) -> list[np.ndarray]:
        top = self.model.top
        gam = self.gamma(u)
        out = []
        for q, g in enumerate(gam):
            a_top, a_q = self._gen(top - q), self._gen(q)
            dg = np.zeros_like(g)
            if a_top is not None:
                dg = dg + a_top @ g
            if a_q is not None:
                dg = dg - g @ a_q
            out.append(dg)
        return out

    def model_at(self, u: float) -> QuaternionicComplexModel:
        return self.model.with_gamma(self.gamma(u))

    def alpha(self, u: float) -> list[np.ndarray]:
        """alpha[q] = gamma[4n-q] dgamma[q]/du (= gamma^-1 dgamma/du)."""
        gam, dg = self.gamma(u), self.dgamma(u)
        top = self.model.top
        return [gam[top - q] @ x for q, x in enumerate(dg)]


@dataclass(frozen=True)
class QuaternionicVariationCheck:
    formula_residual: float
    trace_residual: float
    lhs: float
    rhs: float
    gamma_drift: float


def _heat(m: np.ndarray, t: float) -> np.ndarray:
    return sla.expm(-t * m) if m.size else m


def quaternionic_variation(family: GammaFamily, t: float = 1.0, u: float = 0.0, h: float = 1e-5,
                           richardson: bool = True) -> QuaternionicVariationCheck:
    """Finite-difference vs closed-form dDelta/du, and the alternating trace identity

    sum_q (-1)^q q tr(dDelta_q exp(-t Delta_q)) = sum_q (-1)^q tr(alpha_q Delta_q exp(-t Delta_q)).
    """
    drift = max(family.model_at(x).gamma_square_residual() for x in (u - h, u, u + h))
    if drift > DRIFT_TOL:
        raise GammaSquareDrift(f"gamma(u)^2 drifts from 1 by {drift:.2e}")
    n2 = 2 * family.model.n

    def laps(x):
        return laplacians(family.model_at(x))

    fd = central_difference(laps, u, h, richardson)
    m = family.model_at(u)
    delta = build_delta(m)
    lap = laplacians(m, delta)
    al = family.alpha(u)
    formula = []
    for q in range(n2 + 1):
        k = m.dims[q]
        acc = np.zeros((k, k))
        if q > 0:
            d, de = m.D[q - 1], delta[q - 1]
            acc += -d @ al[q - 1] @ de + d @ de @ al[q]
        if q < n2:
            d, de = m.D[q], delta[q]
            acc += -al[q] @ de @ d + de @ al[q + 1] @ d
        formula.append(acc)
    scale = max(1.0, max(float(np.abs(x).max()) for x in lap if x.size))
    fres = max(float(np.abs(a - b).max()) for a, b in zip(fd, formula) if a.size) / scale
    heat = [_heat(x, t) for x in lap]
    lhs = math.fsum((-1) ** q * q * float(np.trace(fd[q] @ heat[q])) for q in range(n2 + 1))
    rhs = math.fsum((-1) ** q * float(np.trace(al[q] @ lap[q] @ heat[q])) for q in range(n2 + 1))
    return QuaternionicVariationCheck(fres, abs(lhs - rhs), lhs, rhs, drift)


# ---------------------------------------------------------------- torsion


@dataclass(frozen=True)
class QuaternionicTorsion:
    log_torsion: float
    log_dets: tuple[float, ...]
    kernel_dims: tuple[int, ...]
    max_imag: float


def _real_spectrum(lap: np.ndarray, scale: float) -> np.ndarray:
    if lap.size == 0:
        return np.zeros(0)
    w, v = np.linalg.eig(lap)
    if np.abs(w.imag).max() > SPECTRUM_TOL * scale or w.real.min() < -SPECTRUM_TOL * scale:
        raise NonRealSpectrum(f"Delta^D has eigenvalues off the nonnegative axis: {w[np.argmax(np.abs(w.imag))]}")
    if np.linalg.cond(v) > 1e10:
        raise NonRealSpectrum("Delta^D is not diagonalizable to working precision")
    return np.sort(w.real)


def quaternionic_torsion_finite(model: QuaternionicComplexModel) -> QuaternionicTorsion:
    """(1/2) sum_{q<=2n} (-1)^(q+1) q log det' Delta^D_q."""
    lap = laplacians(model)
    raw = [np.linalg.eigvals(x) if x.size else np.zeros(0) for x in lap]
    scale = max((float(np.abs(w).max()) for w in raw if w.size), default=1.0) or 1.0
    max_imag = max((float(np.abs(w.imag).max()) for w in raw if w.size), default=0.0)
    spectra = [_real_spectrum(x, scale) for x in lap]
    thr = KERNEL_RTOL * scale
    logdets = tuple(math.fsum(np.log(w[w > thr])) for w in spectra)
    kernels = tuple(int(np.sum(w <= thr)) for w in spectra)
    value = 0.5 * math.fsum((-1) ** (q + 1) * q * x for q, x in enumerate(logdets))
    return QuaternionicTorsion(value, logdets, kernels, max_imag)


def exact_laplacians(model: QuaternionicComplexModel) -> list[sp.Matrix]:
    if model.exact is None:
        raise ValidationError("model carries no rational data")
    D, dext, gam = model.exact["D"], model.exact["dext"], model.exact["gamma"]
    n2, top = 2 * model.n, model.top
    delta = [gam[top - q] * dext[top - q - 1 - n2] * gam[q + 1] for q in range(n2)]
    out = []
    for q in range(n2 + 1):
        k = model.dims[q]
        m = sp.zeros(k, k)
        if q > 0:
            m += D[q - 1] * delta[q - 1]
        if q < n2:
            m += delta[q] * D[q]
        out.append(m)
    return out


def quaternionic_torsion_square(model: QuaternionicComplexModel) -> sp.Rational:
    """R with log tau_H = (1/2) log R, exactly."""
    laps = exact_laplacians(model)
    return ex.weighted_det_product([ex.det_prime(m) for m in laps], [(-1) ** (q + 1) * q for q in range(len(laps))])
