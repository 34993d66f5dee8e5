"""Rank histogram of the extended Darboux matrix for each preset, sweeping t on the helicoid family."""

import argparse
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from rotfield.darboux import assemble, rank
from rotfield.frames import frame
from rotfield.surfaces import preset


@dataclass
class Config:
    points: int = 10_000
    t_values: int = 9
    seed: int = 0


def survey(s, rng, n):
    u0, u1, v0, v1 = s.domain
    u, v = rng.uniform(u0, u1, n), rng.uniform(v0, v1, n)
    keep = ~s.near_excluded(u, v, 1e-3)
    return Counter(rank(assemble(frame(s.jets(u[keep], v[keep])))).tolist())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    cfg = Config(**vars(ap.parse_args()))
    rng = np.random.default_rng(cfg.seed)
    for name in ("plane", "sphere"):
        print(f"{name:>10}: {dict(survey(preset(name), rng, cfg.points))}")
    for t in np.linspace(0, math.pi, cfg.t_values + 2)[1:-1]:
        print(f"helicoid t={t:.4f}: {dict(survey(preset('helicoid', t=t), rng, cfg.points))}")


if __name__ == "__main__":
    main()
