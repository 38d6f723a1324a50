"""Flat tori R^n / Z^n with a metric gram, a character twist and a constant
conformal factor, and the per-degree spectra they carry.

The scalar Laplacian twisted by chi_theta has eigenvalues
``4 pi^2 (xi+theta)^T gram^-1 (xi+theta) / c^2`` for xi in Z^n; on a flat torus
every form degree q repeats that spectrum C(n, q) times.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb

import numpy as np

from .errors import AcyclicityViolation, DimensionError, DomainError, NonKaehlerInput, ValidationError
from .zeta import ShiftedLattice

KAEHLER_TOL = 1e-12


@dataclass(frozen=True)
class FlatTorusModel:
    gram: tuple[tuple[float, ...], ...]
    theta: tuple[float, ...]
    conformal_scale: float = 1.0
    name: str = "torus"

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        n = len(self.theta)
        if n == 0:
            raise DimensionError("torus dimension must be positive")
        if g.shape != (n, n):
            raise ValidationError(f"gram has shape {g.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(g)) or not np.allclose(g, g.T, rtol=1e-12, atol=1e-14):
            raise ValidationError("gram must be finite and symmetric")
        if np.linalg.eigvalsh(g).min() <= 0.0:
            raise ValidationError("gram must be positive definite")
        if not (np.isfinite(self.conformal_scale) and self.conformal_scale > 0.0):
            raise DomainError("conformal scale must be positive")

    @classmethod
    def build(cls, gram, theta, conformal_scale: float = 1.0, name: str = "torus") -> "FlatTorusModel":
        g = np.atleast_2d(np.asarray(gram, dtype=float))
        th = tuple(float(x) % 1.0 for x in np.atleast_1d(np.asarray(theta, dtype=float)))
        return cls(tuple(map(tuple, g)), th, float(conformal_scale), name)

    @classmethod
    def circle(cls, theta: float, length: float = 1.0) -> "FlatTorusModel":
        return cls.build([[length**2]], [theta], name="circle")

    @classmethod
    def unit(cls, theta) -> "FlatTorusModel":
        th = np.atleast_1d(theta)
        return cls.build(np.eye(th.size), th, name=f"t{th.size}")

    @property
    def n(self) -> int:
        return len(self.theta)

    @property
    def acyclic(self) -> bool:
        return any(x != 0.0 for x in self.theta)

    def scalar_lattice(self) -> ShiftedLattice:
        inv = np.linalg.inv(np.asarray(self.gram, dtype=float))
        return ShiftedLattice.build(0.5 * (inv + inv.T), self.theta, 1.0 / self.conformal_scale**2)

    def require_acyclic(self):
        if not self.acyclic:
            raise AcyclicityViolation("trivial character: every degree has harmonic forms")


@dataclass(frozen=True)
class FormSpectrumStream:
    degree: int
    multiplicity_factor: int
    base: ShiftedLattice
    label: str = ""

    @property
    def spectrum(self) -> ShiftedLattice:
        return self.base.with_multiplicity(self.multiplicity_factor * self.base.multiplicity)

    def eigenvalues(self, cutoff: float) -> np.ndarray:
        return self.base.eigenvalues(cutoff)


def torus_form_spectrum(model: FlatTorusModel, q: int) -> FormSpectrumStream:
    if not 0 <= q <= model.n:
        raise DomainError(f"degree {q} outside 0..{model.n}")
    model.require_acyclic()
    return FormSpectrumStream(q, comb(model.n, q), model.scalar_lattice(), str(q))


def standard_complex_structure(n: int) -> np.ndarray:
    """J pairing (x1, x2), (x3, x4), ...: J e_{2k} = e_{2k+1}, J e_{2k+1} = -e_{2k}."""
    if n % 2:
        raise DimensionError("complex structure needs even real dimension")
    j = np.zeros((n, n))
    for k in range(0, n, 2):
        j[k + 1, k] = 1.0
        j[k, k + 1] = -1.0
    return j


def kaehler_residual(gram) -> float:
    g = np.asarray(gram, dtype=float)
    j = standard_complex_structure(g.shape[0])
    return float(np.abs(j.T @ g @ j - g).max()) / float(np.abs(g).max())


def check_kaehler(model: FlatTorusModel):
    if model.n % 2:
        raise NonKaehlerInput("odd real dimension carries no complex structure")
    res = kaehler_residual(model.gram)
    if res > KAEHLER_TOL:
        raise NonKaehlerInput(f"gram is not compatible with the standard complex structure (residual {res:.2e})")


def dolbeault_spectrum(model: FlatTorusModel, q: int) -> FormSpectrumStream:
    """(0,q)-forms: half the scalar spectrum, multiplicity C(m, q) with m = n/2."""
    check_kaehler(model)
    m = model.n // 2
    if not 0 <= q <= m:
        raise DomainError(f"degree {q} outside 0..{m}")
    model.require_acyclic()
    base = model.scalar_lattice()
    return FormSpectrumStream(q, comb(m, q), base.with_scale(0.5 * base.scale), f"0,{q}")


def dolbeault_plane_wave_eigenvalue(model: FlatTorusModel, xi) -> tuple[float, float]:
    """(Delta_dbar, Delta_d) on the plane wave exp(2 pi i (xi+theta).x), computed
    from the (0,1) part of the covector k = 2 pi (xi+theta).

    With h = gram^-1 / c^2, the (0,1) projection is k01 = (k + i J^T k)/2 and
    Delta_dbar = dbar* dbar = h(k01, conj k01) and Delta_d = h(k, k).
    """
    check_kaehler(model)
    k = 2.0 * np.pi * (np.asarray(xi, dtype=float) + np.asarray(model.theta))
    h = np.linalg.inv(np.asarray(model.gram, dtype=float)) / model.conformal_scale**2
    j = standard_complex_structure(model.n)
    k01 = 0.5 * (k + 1j * (j.T @ k))
    dbar = float(np.real(k01 @ h @ np.conj(k01)))
    return dbar, float(k @ h @ k)


def selfdual_middle_spectrum(model: FlatTorusModel) -> FormSpectrumStream:
    if model.n != 4:
        raise DimensionError(f"self-dual splitting needs a 4-torus, got n={model.n}")
    model.require_acyclic()
    return FormSpectrumStream(2, 3, model.scalar_lattice(), "2+")


def conformal_rescale(model: FlatTorusModel, c: float) -> FlatTorusModel:
    if not c > 0.0:
        raise DomainError("conformal factor must be positive")
    return replace(model, conformal_scale=model.conformal_scale * float(c))


def change_basis(model: FlatTorusModel, u) -> FlatTorusModel:
    """Relabel the lattice by a unimodular U: gram -> U^T gram U, theta -> U^T theta.

    Characters pair with lattice vectors, so the twist transforms covariantly
    (as U^T, not U^-1) when lattice coordinates transform by U.
    """
    u = np.asarray(u)
    if u.shape != (model.n, model.n) or not np.all(u == np.round(u)) or abs(round(np.linalg.det(u))) != 1:
        raise ValidationError("basis change must be a unimodular integer matrix")
    g = u.T @ np.asarray(model.gram) @ u
    th = u.T @ np.asarray(model.theta)
    return FlatTorusModel.build(0.5 * (g + g.T), th, model.conformal_scale, model.name)


def dual_character(model: FlatTorusModel) -> FlatTorusModel:
    return FlatTorusModel.build(model.gram, [-x for x in model.theta], model.conformal_scale, model.name)


def random_spd_gram(rng: np.random.Generator, n: int, spread: float = 0.4) -> np.ndarray:
    a = rng.standard_normal((n, n))
    q, _ = np.linalg.qr(a)
    g = (q * np.exp(rng.uniform(-spread, spread, n))) @ q.T
    return 0.5 * (g + g.T)


def random_kaehler_gram(rng: np.random.Generator, n: int, spread: float = 0.4) -> np.ndarray:
    """Average of S and J^T S J: SPD and J-compatible."""
    s = random_spd_gram(rng, n, spread)
    j = standard_complex_structure(n)
    return 0.5 * (s + j.T @ s @ j)


def random_theta(rng: np.random.Generator, n: int, margin: float = 0.05) -> np.ndarray:
    return rng.uniform(margin, 1.0 - margin, n)


def random_model(rng: np.random.Generator, n: int, kaehler: bool = False, name: str | None = None) -> FlatTorusModel:
    g = random_kaehler_gram(rng, n) if kaehler else random_spd_gram(rng, n)
    return FlatTorusModel.build(g, random_theta(rng, n), name=name or f"random_t{n}")
