"""Spectral zeta functions at s = 0 and zeta-regularized determinants.

Backends
--------
hurwitz           twisted circle, closed form through log Gamma
epstein_theta     shifted-lattice spectra, split Mellin integral with the
                  small-t half rewritten by Poisson summation
mellin_numeric    finite explicit spectra, with a quadrature cross-check
direct_richardson truncated log-sums on the circle, extrapolated in 1/N
fiber_product     rectangular 2-tori, closed-form circle determinants summed
                  over the transverse modes

Throughout, ``log det' = -zeta'(0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import lattice
from .errors import (
    AcyclicityViolation,
    ConvergenceBudgetExceeded,
    DimensionError,
    DomainError,
    EmptySpectrum,
    ValidationError,
)
from .special import EPS, LOG_2PI, hurwitz_zeta0_with_bound, hurwitz_zeta_minus_one

FOUR_PI2 = 4.0 * math.pi**2
DEFAULT_TOL = 1e-10
MAX_LATTICE_DIM = 6


@dataclass(frozen=True)
class ExplicitList:
    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.multiplicities):
            raise ValidationError("eigenvalues and multiplicities differ in length")
        if any(not (lam > 0.0) for lam in self.eigenvalues):
            raise ValidationError("explicit spectra hold strictly positive eigenvalues only")
        if any(int(m) != m or m <= 0 for m in self.multiplicities):
            raise ValidationError("multiplicities must be positive integers")

    @classmethod
    def from_values(cls, values, multiplicities=None) -> "ExplicitList":
        values = tuple(float(v) for v in values)
        if multiplicities is None:
            multiplicities = (1,) * len(values)
        return cls(values, tuple(int(m) for m in multiplicities))

    def scaled(self, c: float) -> "ExplicitList":
        return ExplicitList(tuple(c * v for v in self.eigenvalues), self.multiplicities)


@dataclass(frozen=True)
class ShiftedLattice:
    """Eigenvalues ``scale * 4 pi^2 (xi+theta)^T gram_dual (xi+theta)``, xi in Z^n."""

    gram_dual: tuple[tuple[float, ...], ...]
    theta: tuple[float, ...]
    scale: float = 1.0
    multiplicity: int = 1

    def __post_init__(self):
        g = np.asarray(self.gram_dual, dtype=float)
        n = len(self.theta)
        if g.shape != (n, n):
            raise ValidationError(f"gram_dual has shape {g.shape}, expected {(n, n)}")
        if not np.allclose(g, g.T, rtol=1e-13, atol=0.0):
            raise ValidationError("gram_dual must be symmetric")
        if np.linalg.eigvalsh(g).min() <= 0.0:
            raise ValidationError("gram_dual must be positive definite")
        if not self.scale > 0.0:
            raise ValidationError("scale must be positive")
        if self.multiplicity <= 0:
            raise ValidationError("multiplicity must be positive")

    @classmethod
    def build(cls, gram_dual, theta, scale=1.0, multiplicity=1) -> "ShiftedLattice":
        g = np.atleast_2d(np.asarray(gram_dual, dtype=float))
        th = tuple(float(x) % 1.0 for x in np.atleast_1d(theta))
        return cls(tuple(map(tuple, g)), th, float(scale), int(multiplicity))

    @property
    def dim(self) -> int:
        return len(self.theta)

    @property
    def form(self) -> np.ndarray:
        return FOUR_PI2 * self.scale * np.asarray(self.gram_dual, dtype=float)

    @property
    def acyclic(self) -> bool:
        return any(x % 1.0 != 0.0 for x in self.theta)

    def with_scale(self, scale: float) -> "ShiftedLattice":
        return ShiftedLattice(self.gram_dual, self.theta, float(scale), self.multiplicity)

    def with_multiplicity(self, multiplicity: int) -> "ShiftedLattice":
        return ShiftedLattice(self.gram_dual, self.theta, self.scale, int(multiplicity))

    def eigenvalues(self, cutoff: float, budget: int = lattice.DEFAULT_BUDGET) -> np.ndarray:
        """Scalar eigenvalues ``<= cutoff`` (without multiplicity), ascending."""
        _, vals = lattice.enumerate_shell(self.form, self.theta, cutoff, budget)
        return np.sort(vals)

    def smallest(self, count: int) -> np.ndarray:
        cutoff = float(np.linalg.eigvalsh(self.form).max()) * 4.0
        while True:
            vals = self.eigenvalues(cutoff)
            if vals.size >= count:
                # every eigenvalue below vals[count-1] is already enumerated
                return vals[:count]
            cutoff *= 2.0


@dataclass(frozen=True)
class ZetaResult:
    zeta_at_0: float
    zeta_prime_at_0: float
    error_bound: float
    method: str
    checks: dict = field(default_factory=dict, compare=False)

    @property
    def log_det_prime(self) -> float:
        return -self.zeta_prime_at_0

    def as_dict(self) -> dict:
        return {
            "zeta0": self.zeta_at_0,
            "zeta_prime0": self.zeta_prime_at_0,
            "logdet": self.log_det_prime,
            "error_bound": self.error_bound,
            "method": self.method,
        }


def hurwitz_zeta0(a: float) -> tuple[float, float]:
    """``(zeta_H(0,a), zeta_H'(0,a))``; see :mod:`qtorsion.special`."""
    value, _ = hurwitz_zeta0_with_bound(a)
    return value


def _reduce_theta(theta: float) -> float:
    th = float(theta) % 1.0
    if th == 0.0:
        raise AcyclicityViolation("integral twist leaves a zero mode on the circle")
    return th


def circle_zeta(theta: float, length: float = 1.0) -> ZetaResult:
    """Zeta data of {4 pi^2 (m+theta)^2 / L^2 : m in Z}.

    zeta(s) = (L^2/4pi^2)^s [zeta_H(2s,theta) + zeta_H(2s,1-theta)], so zeta(0) = 0
    and zeta'(0) = 2 [zeta_H'(0,theta) + zeta_H'(0,1-theta)], independent of L.
    """
    if not length > 0.0:
        raise DomainError("circle length must be positive")
    th = _reduce_theta(theta)
    (_, d1), e1 = hurwitz_zeta0_with_bound(th)
    (_, d2), e2 = hurwitz_zeta0_with_bound(1.0 - th)
    zp = 2.0 * (d1 + d2)
    # zeta_H(0,th) + zeta_H(0,1-th) = 0 identically, so the log(L^2/4pi^2) term drops
    return ZetaResult(0.0, zp, 2.0 * (e1 + e2) + 4 * EPS * abs(zp), "hurwitz")


def richardson_circle_zeta(theta: float, n0: int = 64, levels: int = 6) -> ZetaResult:
    """Circle zeta'(0) from truncated log-sums, extrapolated in 1/N.

    S_N = sum_{m=0}^{N-1} [log(m+theta) + log(m+1-theta)] has the expansion
    2N log N - 2N + C + sum_k c_k N^{-k}; the zeta-regularized sum is C and
    zeta'(0) = -2C (the 4 pi^2 / L^2 prefactor drops because zeta(0) = 0).
    """
    th = _reduce_theta(theta)
    column = []
    abs_mass = 0.0
    for j in range(levels):
        n = n0 * 2**j
        m = np.arange(n, dtype=float)
        terms = np.concatenate([np.log(m + th), np.log(m + 1.0 - th)])
        s_n = math.fsum(terms)
        abs_mass = max(abs_mass, float(np.abs(terms).sum()))
        column.append(s_n - (2.0 * n * math.log(n) - 2.0 * n))
    table = [column]
    for k in range(1, levels):
        prev = table[-1]
        table.append([prev[i + 1] + (prev[i + 1] - prev[i]) / (2**k - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    trunc = abs(best - table[-2][-1])
    # each extrapolation step can amplify rounding by at most a factor of 3
    rounding = 3.0**levels * 4 * EPS * abs_mass
    return ZetaResult(0.0, -2.0 * best, 2.0 * (trunc + rounding), "direct_richardson")


def _check_lattice(lat: ShiftedLattice):
    if lat.dim > MAX_LATTICE_DIM:
        raise DimensionError(f"lattice dimension {lat.dim} exceeds {MAX_LATTICE_DIM}")
    if not lat.acyclic:
        raise AcyclicityViolation("integral shift leaves a zero mode")


def _split_point(form: np.ndarray) -> float:
    # balances the direct and dual shell sizes; equals 1/(4 pi) for the unit torus
    n = form.shape[0]
    return math.pi / math.exp(np.linalg.slogdet(form)[1] / n)


@dataclass(frozen=True)
class _SplitSetup:
    form: np.ndarray
    dual_form: np.ndarray
    t0: float
    pref: float
    n: int


def _setup(lat: ShiftedLattice) -> _SplitSetup:
    form = lat.form
    n = lat.dim
    t0 = _split_point(form)
    dual_form = math.pi**2 * np.linalg.inv(form)
    pref = math.pi ** (n / 2) * math.exp(-0.5 * np.linalg.slogdet(form)[1])
    return _SplitSetup(form, dual_form, t0, pref, n)


def _tails(st: _SplitSetup, cutoff: float) -> tuple[float, float]:
    n, t0 = st.n, st.t0
    mu_direct = float(np.linalg.eigvalsh(st.form).min())
    mu_dual = float(np.linalg.eigvalsh(st.dual_form).min())
    gamma_n2 = math.gamma(n / 2)

    def g_direct(lam):
        return float(special.exp1(lam * t0))

    def g_dual(r):
        return st.pref * r ** (-n / 2) * gamma_n2 * float(special.gammaincc(n / 2, r / t0))

    direct = lattice.tail_bound(g_direct, cutoff / t0, mu_direct, n, 1.0 / t0)
    dual = lattice.tail_bound(g_dual, cutoff * t0, mu_dual, n, t0)
    return direct, dual


def epstein_zeta0(
    lat: ShiftedLattice,
    tol: float = DEFAULT_TOL,
    cutoff: float | None = None,
    budget: int = lattice.DEFAULT_BUDGET,
) -> ZetaResult:
    """zeta(0) and zeta'(0) for a shifted-lattice spectrum.

    With K(t) the heat trace and t0 the split point,
    Gamma(s) zeta(s) = sum_xi lambda^-s Gamma(s, lambda t0) + int_0^t0 t^(s-1) K(t) dt,
    and Poisson summation turns the second piece into
    C [t0^(s-n/2)/(s-n/2) + sum_{m != 0} cos(2 pi m.theta) r_m^(s-n/2) Gamma(n/2-s, r_m/t0)],
    where r_m = pi^2 m^T form^-1 m and C = pi^(n/2) det(form)^(-1/2).
    Both pieces are regular at s = 0, so zeta(0) = 0 and zeta'(0) is their value
    there. ``cutoff`` is the shell size in units of the exponent (lambda t0 and
    r/t0); by default it grows until both tail bounds drop below ``tol/4``.
    """
    _check_lattice(lat)
    st = _setup(lat)
    n, t0 = st.n, st.t0
    if cutoff is None:
        cutoff = 24.0
        while True:
            td, tu = _tails(st, cutoff)
            if td + tu <= tol / 4:
                break
            cutoff += 2.0
            if cutoff > 400.0:
                raise ConvergenceBudgetExceeded(f"tolerance {tol:g} unreachable")
    else:
        td, tu = _tails(st, cutoff)

    _, lam = lattice.enumerate_shell(st.form, lat.theta, cutoff / t0, budget)
    direct_terms = special.exp1(lam * t0)

    m, r = lattice.enumerate_shell(st.dual_form, np.zeros(n), cutoff * t0, budget)
    nonzero = r > 0.0
    m, r = m[nonzero], r[nonzero]
    phase = np.cos(2.0 * math.pi * (m @ np.asarray(lat.theta)))
    dual_terms = st.pref * phase * r ** (-n / 2) * special.gammaincc(n / 2, r / t0) * math.gamma(n / 2)
    constant = -st.pref * 2.0 * t0 ** (-n / 2) / n

    zp = math.fsum([*direct_terms, *dual_terms, constant])
    rounding = 16 * EPS * (float(np.abs(direct_terms).sum()) + float(np.abs(dual_terms).sum()) + abs(constant))
    mult = lat.multiplicity
    return ZetaResult(
        0.0,
        mult * zp,
        mult * (td + tu + rounding),
        "epstein_theta",
        checks={"cutoff": cutoff, "t0": t0, "n_direct": int(lam.size), "n_dual": int(r.size)},
    )


@lru_cache(maxsize=256)
def _epstein_cached(lat: ShiftedLattice, tol: float) -> ZetaResult:
    return epstein_zeta0(lat, tol)


def lattice_zeta0(lat: ShiftedLattice, tol: float = DEFAULT_TOL) -> ZetaResult:
    """Memoized :func:`epstein_zeta0`; the lattice value object is the key."""
    return _epstein_cached(lat, float(tol))


def heat_trace_direct(lat: ShiftedLattice, t: float, budget: int = lattice.DEFAULT_BUDGET) -> float:
    form = lat.form
    mu = float(np.linalg.eigvalsh(form).min())
    cutoff = 40.0
    while lattice.tail_bound(lambda v: math.exp(-v * t), cutoff / t, mu, lat.dim, 1.0 / t) > 1e-18:
        cutoff += 4.0
    _, lam = lattice.enumerate_shell(form, lat.theta, cutoff / t, budget)
    return lat.multiplicity * math.fsum(np.exp(-t * lam))


def heat_trace_poisson(lat: ShiftedLattice, t: float, budget: int = lattice.DEFAULT_BUDGET) -> float:
    st = _setup(lat)
    n = st.n
    mu = float(np.linalg.eigvalsh(st.dual_form).min())
    amp = st.pref * t ** (-n / 2)
    cutoff = 40.0
    while amp * lattice.tail_bound(lambda v: math.exp(-v / t), cutoff * t, mu, n, t) > 1e-18:
        cutoff += 4.0
    m, r = lattice.enumerate_shell(st.dual_form, np.zeros(n), cutoff * t, budget)
    phase = np.cos(2.0 * math.pi * (m @ np.asarray(lat.theta)))
    return lat.multiplicity * amp * math.fsum(phase * np.exp(-r / t))


def theta_transform_selftest(lat: ShiftedLattice, t: float) -> float:
    """|direct heat trace - Poisson-dual heat trace| at time t."""
    if not (0.01 <= t <= 100.0):
        raise DomainError("self-test time must lie in [0.01, 100]")
    return abs(heat_trace_direct(lat, t) - heat_trace_poisson(lat, t))


def mellin_zeta_numeric(spectrum: ExplicitList, s_grid=(0.5, 1.0, 2.0)) -> ZetaResult:
    """Direct zeta data of a finite spectrum, cross-checked by Mellin quadrature.

    ``checks`` holds the largest quadrature discrepancy over ``s_grid`` and the
    Frullani-quadrature discrepancy for zeta'(0) = int_0^inf (K(t) - N e^-t) dt/t.
    """
    if not spectrum.eigenvalues:
        raise EmptySpectrum("no eigenvalues")
    lam = np.asarray(spectrum.eigenvalues, dtype=float)
    mult = np.asarray(spectrum.multiplicities, dtype=float)
    z0 = float(mult.sum())
    zp = -math.fsum(mult * np.log(lam))

    def heat(t):
        return float(np.dot(mult, np.exp(-t * lam)))

    worst = 0.0
    for s in s_grid:
        direct = math.fsum(mult * lam ** (-s))
        head, _ = integrate.quad(heat, 0.0, 1.0, weight="alg", wvar=(s - 1.0, 0.0), epsabs=1e-14, epsrel=1e-13, limit=200)
        tail, _ = integrate.quad(lambda t: t ** (s - 1.0) * heat(t), 1.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
        worst = max(worst, abs((head + tail) / math.gamma(s) - direct) / max(1.0, abs(direct)))

    def frullani(t):
        if t == 0.0:
            return z0 - float(np.dot(mult, lam))
        return (heat(t) - z0 * math.exp(-t)) / t

    scales = sorted({1.0, *(1.0 / lam)})
    pieces = [0.0, *[x for x in scales if x > 0], np.inf]
    fr = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        if a == b:
            continue
        fr += integrate.quad(frullani, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    checks = {"mellin_residual": worst, "frullani_residual": abs(fr - zp)}
    return ZetaResult(z0, zp, 8 * EPS * math.fsum(mult * np.abs(np.log(lam))), "mellin_numeric", checks=checks)


def rectangular_torus_zeta_prime(theta, lengths=(1.0, 1.0), tol: float = 1e-16) -> ZetaResult:
    """Fiber-product value of zeta'(0) on a rectangular twisted 2-torus.

    For each transverse mode a_m = 2 pi |m + theta_1| / L_1 the circle factor has
    log det = a_m L_2 + log(1 - 2 cos(2 pi theta_2) e^{-a_m L_2} + e^{-2 a_m L_2});
    the linear parts resum through zeta_H(-1, .) to give
    zeta'(0) = -(2 pi L_2/L_1) [zeta_H(-1,theta_1) + zeta_H(-1,1-theta_1)] - sum_m log(...).
    """
    th1, th2 = (float(x) % 1.0 for x in theta)
    l1, l2 = (float(x) for x in lengths)
    if th1 == 0.0 and th2 == 0.0:
        raise AcyclicityViolation("integral shift leaves a zero mode")
    if th1 == 0.0:
        linear = 2.0 * hurwitz_zeta_minus_one(1.0)
    else:
        linear = hurwitz_zeta_minus_one(th1) + hurwitz_zeta_minus_one(1.0 - th1)
    c2 = math.cos(2.0 * math.pi * th2)
    terms = []
    m_max = int(math.ceil(60.0 * l1 / (2 * math.pi * l2))) + 2
    for m in range(-m_max, m_max + 1):
        x = 2.0 * math.pi * abs(m + th1) / l1 * l2
        e = math.exp(-x)
        terms.append(math.log1p(-2.0 * c2 * e + e * e))
    zp = -(2.0 * math.pi * l2 / l1) * linear - math.fsum(terms)
    return ZetaResult(0.0, zp, 64 * EPS * (1.0 + abs(zp)), "fiber_product")
