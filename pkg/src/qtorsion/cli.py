"""Command-line front end: ``qtorsion torsion|zeta|verify``.

Exit codes: 0 success, 1 a verify suite failed, 2 invalid input,
3 a numerical budget or stability check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import (
    ConvergenceBudgetExceeded,
    EigenvalueClusterAmbiguity,
    GammaSquareDrift,
    NonRealSpectrum,
    NonSmoothFamily,
    TorsionError,
    ValidationError,
)

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (ConvergenceBudgetExceeded, EigenvalueClusterAmbiguity, NonRealSpectrum, NonSmoothFamily, GammaSquareDrift)
MODEL_KINDS = ("circle", "t2", "t4", "torus", "random")
TORSION_KINDS = ("real", "complex", "selfdual", "antiselfdual", "quaternionic")
ZETA_METHODS = ("auto", "hurwitz", "epstein", "richardson", "fiber")
CONVENTION_TAGS = {"logdet": "-zeta'(0)"}


@dataclass
class RunConfig:
    subcommand: str
    model: str = "circle"
    dimension: int | None = None
    gram: tuple[float, ...] | None = None
    theta: tuple[float, ...] | None = None
    scale: float = 1.0
    length: float = 1.0
    kind: str = "real"
    convention: str = "full"
    degree: int = 0
    method: str = "auto"
    tol: float = 1e-10
    seed: int = 0
    format: str = "json"
    output: str | None = None
    digits: int = 10
    suites: tuple[str, ...] = ()
    hs: tuple[float, ...] = ()
    cases: int | None = None
    complex_file: str | None = None
    model_id: str | None = None
    extra: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        d = asdict(self)
        d.pop("output")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------- parsing


def _floats(text: str, what: str) -> tuple[float, ...]:
    from fractions import Fraction

    try:
        vals = tuple(float(Fraction(x.strip())) for x in str(text).replace(";", ",").split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{what}: cannot parse {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{what}: need finite numbers")
    return vals


def read_config_file(path: str) -> dict:
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{n}: expected key=value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


_KEYS = {
    "model": str, "dimension": int, "gram": None, "theta": None, "scale": float, "length": float,
    "kind": str, "convention": str, "degree": int, "method": str, "tol": float, "seed": int,
    "format": str, "output": str, "digits": int, "suite": None, "h": None, "cases": int,
    "complex": str, "model_id": str,
}


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = read_config_file(args.config) if getattr(args, "config", None) else {}
    unknown = set(raw) - set(_KEYS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = RunConfig(args.command)
    try:
        for key, conv in _KEYS.items():
            if key not in raw:
                continue
            val = raw[key]
            if key in ("gram", "theta"):
                setattr(cfg, key, _floats(val, key))
            elif key == "h":
                cfg.hs = _floats(val, "h")
            elif key == "suite":
                cfg.suites = tuple(x.strip() for x in str(val).split(",") if x.strip())
            elif key == "complex":
                cfg.complex_file = str(val)
            else:
                setattr(cfg, key, conv(val))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad config value: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig):
    if cfg.model not in MODEL_KINDS:
        raise ValidationError(f"model must be one of {MODEL_KINDS}")
    if cfg.kind not in TORSION_KINDS:
        raise ValidationError(f"kind must be one of {TORSION_KINDS}")
    if cfg.convention not in ("full", "half"):
        raise ValidationError("convention must be 'full' or 'half'")
    if cfg.method not in ZETA_METHODS:
        raise ValidationError(f"method must be one of {ZETA_METHODS}")
    if cfg.format not in ("json", "csv"):
        raise ValidationError("format must be json or csv")
    for name in ("scale", "length", "tol"):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v > 0):
            raise ValidationError(f"{name} must be positive")
    if cfg.dimension is not None and not 1 <= cfg.dimension <= 6:
        raise ValidationError("dimension must be between 1 and 6")
    if not 4 <= cfg.digits <= 17:
        raise ValidationError("digits must be between 4 and 17")
    if any(not (h > 0) for h in cfg.hs):
        raise ValidationError("finite-difference steps must be positive")
    if cfg.cases is not None and cfg.cases < 1:
        raise ValidationError("cases must be positive")
    if cfg.seed < 0:
        raise ValidationError("seed must be nonnegative")


def make_model(cfg: RunConfig):
    from .models import FlatTorusModel, conformal_rescale, random_model

    if cfg.model == "circle":
        th = cfg.theta or (0.5,)
        if len(th) != 1:
            raise ValidationError("circle takes one theta value")
        model = FlatTorusModel.circle(th[0], cfg.length)
    elif cfg.model == "random":
        n = cfg.dimension or 4
        model = random_model(np.random.default_rng(cfg.seed), n, kaehler=cfg.kind == "complex", name=f"random_t{n}_s{cfg.seed}")
    else:
        n = {"t2": 2, "t4": 4}.get(cfg.model, cfg.dimension)
        if n is None:
            n = int(round(math.sqrt(len(cfg.gram)))) if cfg.gram else len(cfg.theta or ())
        if cfg.dimension is not None and cfg.dimension != n:
            raise ValidationError(f"model {cfg.model} has dimension {n}")
        theta = cfg.theta or (0.5,) + (0.0,) * (n - 1)
        if len(theta) != n:
            raise ValidationError(f"theta needs {n} entries")
        gram = np.eye(n) if cfg.gram is None else np.asarray(cfg.gram)
        if gram.size != n * n:
            raise ValidationError(f"gram needs {n * n} entries")
        model = FlatTorusModel.build(gram.reshape(n, n), theta, name=cfg.model_id or cfg.model)
    model = conformal_rescale(model, cfg.scale)
    if cfg.model_id:
        from dataclasses import replace

        model = replace(model, name=cfg.model_id)
    return model


# ---------------------------------------------------------------- output


def meta(cfg: RunConfig, extra: dict | None = None) -> dict:
    m = {
        "tool": "qtorsion",
        "version": __version__,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "conventions": dict(CONVENTION_TAGS),
    }
    m.update(extra or {})
    return m


def write_output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".qtorsion-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_with_meta(body: str, m: dict) -> str:
    head = "".join(f"# {k}={json.dumps(v, sort_keys=True)}\n" for k, v in sorted(m.items()))
    return head + body


# ---------------------------------------------------------------- commands


def run_torsion(cfg: RunConfig) -> int:
    from .torsion import TORSION_KINDS as FUNCS
    from .torsion import to_csv, to_json

    model = make_model(cfg)
    if cfg.kind == "complex":
        report = FUNCS["complex"](model, convention=cfg.convention, tol=cfg.tol)
    else:
        report = FUNCS[cfg.kind](model, tol=cfg.tol)
    m = meta(cfg, {"conventions": {**CONVENTION_TAGS, cfg.kind: report.convention}})
    if cfg.format == "csv":
        text = _csv_with_meta(to_csv([report], cfg.digits), m)
    else:
        text = to_json([report], m, cfg.digits)
    write_output(text, cfg.output)
    return EXIT_OK


def run_zeta(cfg: RunConfig) -> int:
    from .models import torus_form_spectrum
    from .torsion import _round_floats
    from .zeta import circle_zeta, epstein_zeta0, rectangular_torus_zeta_prime, richardson_circle_zeta

    model = make_model(cfg)
    stream = torus_form_spectrum(model, cfg.degree)
    lat = stream.base
    method = cfg.method
    if method == "auto":
        method = "hurwitz" if model.n == 1 else "epstein"
    if method in ("hurwitz", "richardson"):
        if model.n != 1:
            raise ValidationError(f"{method} needs a circle")
        res = circle_zeta(lat.theta[0], cfg.length * cfg.scale) if method == "hurwitz" else richardson_circle_zeta(lat.theta[0])
    elif method == "fiber":
        g = np.asarray(model.gram)
        if model.n != 2 or g[0, 1] != 0.0:
            raise ValidationError("fiber method needs a rectangular 2-torus")
        res = rectangular_torus_zeta_prime(lat.theta, (math.sqrt(g[0, 0]) * model.conformal_scale,
                                                       math.sqrt(g[1, 1]) * model.conformal_scale))
    else:
        res = epstein_zeta0(lat, cfg.tol)
    mult = stream.multiplicity_factor
    doc = {
        "meta": meta(cfg),
        "model": {"name": model.name, "n": model.n, "theta": list(model.theta), "scale": model.conformal_scale},
        "degree": cfg.degree,
        "multiplicity": mult,
        "scalar": res.as_dict(),
        "degree_total": {"zeta0": mult * res.zeta_at_0, "zeta_prime0": mult * res.zeta_prime_at_0,
                         "logdet": -mult * res.zeta_prime_at_0, "error_bound": mult * res.error_bound},
    }
    write_output(json.dumps(_round_floats(doc, cfg.digits), indent=2, sort_keys=True) + "\n", cfg.output)
    return EXIT_OK


def verify_complex_file(path: str, seed: int):
    import time

    from . import exact as ex
    from . import hodge as hg
    from .complexfile import read_complex
    from .suites import SuiteResult

    start = time.perf_counter()
    c, star = read_complex(path)
    detail = {"dims": list(c.dims), "kernel_dims": list(hg.kernel_dims(c)), "betti": [int(b) for b in hg.betti_numbers(c)]}
    checks = []
    rng = np.random.default_rng(seed)
    adj = 0.0
    for q in range(c.top):
        a, b = rng.standard_normal(c.dims[q]), rng.standard_normal(c.dims[q + 1])
        lhs = (c.d[q] @ a) @ c.gram[q + 1] @ b
        rhs = a @ c.gram[q] @ (hg.adjoint(c, q) @ b)
        adj = max(adj, abs(lhs - rhs) / (1.0 + abs(lhs)))
    checks.append(adj < 1e-12)
    ladders = hg.spectral_ladder(c)
    iso = max((lad.isometry_residual for lad in ladders), default=0.0)
    checks.append(all(lad.ladder_holds() for lad in ladders) and iso < 1e-9)
    chi = hg.euler_characteristic(c)
    ms = max(abs(hg.mckean_singer_trace(c, t) - chi) for t in (0.1, 1.0, 10.0))
    checks.append(ms < 1e-10)
    checks.append(detail["kernel_dims"] == detail["betti"])
    tors = hg.finite_torsion(c)
    detail["log_torsion"] = tors.log_torsion
    if not any(detail["kernel_dims"]):
        r = ex.torsion_square(c)
        detail["exact_torsion_square"] = str(r)
        detail["exact_minus_float"] = abs(0.5 * math.log(r) - tors.log_torsion)
        checks.append(detail["exact_minus_float"] < 1e-9)
    if star is not None and c.top % 2 == 0:
        harm = hg.harmonic_signature(c, star)
        sig = max(abs(hg.signature_trace(c, star, t) - harm) for t in (0.5, 2.0))
        detail["signature"] = harm
        detail["signature_residual"] = sig
        checks.append(sig < 1e-10)
    worst = max(adj, iso, ms)
    return SuiteResult("complex_file", all(checks), worst, 1e-9, 1, detail, time.perf_counter() - start)


def run_verify(cfg: RunConfig) -> int:
    from .suites import SUITES, run_suite
    from .torsion import _round_floats

    names = list(cfg.suites) or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValidationError(f"unknown suites {unknown}; available: {sorted(SUITES)}")
    results = []
    for name in names:
        kwargs = {}
        if name == "variation" and cfg.hs:
            kwargs["hs"] = cfg.hs
        if cfg.cases is not None and name not in ("zeta",):
            kwargs["cases"] = cfg.cases
        results.append(run_suite(name, cfg.seed, **kwargs))
    if cfg.complex_file:
        results.append(verify_complex_file(cfg.complex_file, cfg.seed))
    width = max(len(r.name) for r in results)
    lines = [f"{'suite':<{width}}  status  {'residual':>10}  {'tolerance':>9}  cases"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.residual:10.3e}  {r.tolerance:9.1e}  {r.cases}")
        if r.name == "variation" and "ratios" in r.detail:
            for p in r.detail["per_h"]:
                lines.append(f"    h={p['h']:.0e}  rs={p['rs']:.3e}  quaternionic={p['quaternionic']:.3e}")
            for k, rat in enumerate(r.detail["ratios"]):
                lines.append(f"    ratio step {k + 1}: rs={rat['rs']:.1f}  quaternionic={rat['quaternionic']:.1f}")
    sys.stderr.write("\n".join(lines) + "\n")
    if cfg.output:
        doc = {"meta": meta(cfg), "suites": [
            {k: v for k, v in asdict(r).items() if k != "seconds"} for r in results
        ]}
        write_output(json.dumps(_round_floats(doc, cfg.digits), indent=2, sort_keys=True, default=str) + "\n", cfg.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ---------------------------------------------------------------- entry point


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--model", choices=MODEL_KINDS, default=None)
    p.add_argument("--dimension", type=int)
    p.add_argument("--gram", help="row-major entries, comma separated")
    p.add_argument("--theta", help="twist, comma separated (fractions allowed)")
    p.add_argument("--scale", type=float, help="constant conformal factor c")
    p.add_argument("--length", type=float, help="circle length")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--output", "-o")
    p.add_argument("--digits", type=int, help="significant digits in written numbers")
    p.add_argument("--model-id", dest="model_id")


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtorsion", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qtorsion {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("torsion", help="assemble a torsion report")
    t.add_argument("kind", nargs="?", choices=TORSION_KINDS, default=None)
    t.add_argument("--convention", choices=("full", "half"))
    _common(t)
    z = sub.add_parser("zeta", help="zeta(0), zeta'(0) of one form degree")
    z.add_argument("--degree", type=int)
    z.add_argument("--method", choices=ZETA_METHODS)
    _common(z)
    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--suite", help="comma-separated suite names (default: all)")
    v.add_argument("--h", help="finite-difference steps for the variation suite, e.g. 1e-3,1e-4,1e-5")
    v.add_argument("--cases", type=int)
    v.add_argument("--complex", help="also check a complex stored in the plain-text matrix format")
    _common(v)
    return p


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        cfg = build_config(args)
        runner = {"torsion": run_torsion, "zeta": run_zeta, "verify": run_verify}[cfg.subcommand]
        return runner(cfg)
    except NUMERIC_ERRORS as exc:
        sys.stderr.write(f"qtorsion: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except TorsionError as exc:
        sys.stderr.write(f"qtorsion: invalid input: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
