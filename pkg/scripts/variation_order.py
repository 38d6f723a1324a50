"""Worst variation-identity residual against the finite-difference step.

Without Richardson extrapolation the residual should fall by about 100 per
decade of h until rounding takes over near h = 1e-5.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from qtorsion.suites import suite_variation


@dataclass
class OrderConfig:
    seed: int = 0
    cases: int = 10
    hs: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)


def run(cfg: OrderConfig):
    res = suite_variation(cfg.seed, cases=cfg.cases, hs=cfg.hs, richardson=False)
    per_h = res.detail["per_h"]
    print(f"{'h':>8}  {'ray-singer':>12}  {'quaternionic':>12}")
    for p in per_h:
        print(f"{p['h']:8.0e}  {p['rs']:12.3e}  {p['quaternionic']:12.3e}")
    for k, r in enumerate(res.detail["ratios"]):
        print(f"ratio {per_h[k]['h']:.0e}/{per_h[k + 1]['h']:.0e}: {r['rs']:8.1f}  {r['quaternionic']:8.1f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=OrderConfig.seed)
    p.add_argument("--cases", type=int, default=OrderConfig.cases)
    args = p.parse_args(argv)
    run(OrderConfig(seed=args.seed, cases=args.cases))


if __name__ == "__main__":
    main()
