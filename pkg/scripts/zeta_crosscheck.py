"""Three independent routes to zeta'(0) on twisted circles, and the
theta-function self-test on random lattices of dimension 1 to 4."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from qtorsion.models import random_model
from qtorsion.suites import zeta_thetas
from qtorsion.zeta import ShiftedLattice, circle_zeta, epstein_zeta0, richardson_circle_zeta, theta_transform_selftest


@dataclass
class CrosscheckConfig:
    count: int = 20
    seed: int = 0
    dims: tuple[int, ...] = (1, 2, 3, 4)
    times: tuple[float, ...] = (0.05, 0.5, 1.0)


def run(cfg: CrosscheckConfig):
    print(f"{'theta':>8}  {'hurwitz':>18}  {'epstein-hurwitz':>10}  {'richardson-hurwitz':>10}  max gap/bound")
    worst = 0.0
    for th in zeta_thetas(cfg.count):
        h = circle_zeta(th)
        e = epstein_zeta0(ShiftedLattice.build([[1.0]], [th]))
        r = richardson_circle_zeta(th)
        ratio = max(abs(h.zeta_prime_at_0 - x.zeta_prime_at_0) / (h.error_bound + x.error_bound) for x in (e, r))
        worst = max(worst, ratio)
        print(f"{th:8.5f}  {h.zeta_prime_at_0:18.15f}  {e.zeta_prime_at_0 - h.zeta_prime_at_0:10.2e}  "
              f"{r.zeta_prime_at_0 - h.zeta_prime_at_0:10.2e}  {ratio:.3f}")
    print(f"worst gap/bound {worst:.3f}")
    rng = np.random.default_rng(cfg.seed)
    for n in cfg.dims:
        lat = random_model(rng, n).scalar_lattice()
        res = max(theta_transform_selftest(lat, t) for t in cfg.times)
        print(f"dimension {n}: theta self-test residual {res:.2e}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=CrosscheckConfig.count)
    p.add_argument("--seed", type=int, default=CrosscheckConfig.seed)
    args = p.parse_args(argv)
    run(CrosscheckConfig(count=args.count, seed=args.seed))


if __name__ == "__main__":
    main()
