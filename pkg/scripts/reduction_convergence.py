"""Residuals of the helicoid rotation field in the two y3 equations as the FD step shrinks."""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from rotfield.surfaces import preset
from rotfield.verify import verify_bending_field


@dataclass
class Config:
    samples: int = 100
    h0: float = 4e-2
    levels: int = 5
    seed: int = 0
    form: str = "closed"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--h0", type=float, default=Config.h0)
    ap.add_argument("--levels", type=int, default=Config.levels)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--form", choices=("closed", "direct"), default=Config.form)
    cfg = Config(**vars(ap.parse_args()))
    rng = np.random.default_rng(cfg.seed)
    for t in (math.pi / 6, math.pi / 4, math.pi / 3):
        u = rng.uniform(0.1, math.pi / 2 - 0.1, cfg.samples) + math.pi / 2 * rng.integers(0, 4, cfg.samples)
        v = rng.uniform(-1.4, 1.4, cfg.samples)
        print(f"t = {t:.4f}")
        prev = None
        for k in range(cfg.levels):
            h = cfg.h0 / 2**k
            r = verify_bending_field(preset("helicoid", t=t), "t", u, v, h_second=h, form=cfg.form)
            e18, e19 = np.nanmax(r["eq18"]), np.nanmax(r["eq19"])
            ratio = "" if prev is None else f"  ratio {prev / e18:.3f}"
            print(f"  h={h:.2e}  eq18 {e18:.3e}  eq19 {e19:.3e}{ratio}")
            prev = e18


if __name__ == "__main__":
    main()
