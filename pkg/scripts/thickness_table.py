#!/usr/bin/env python3
"""Per-depth thickness of the c-branch Cantor sets of a block configuration."""
import argparse

from horseshoe_lab.cantor import ifs_from_gamma, ifs_from_sigma, ifs_thickness
from horseshoe_lab.config import load_config
from horseshoe_lab.geometry import shape_constants


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config")
    ap.add_argument("--depth", type=int, default=14)
    args = ap.parse_args()
    cfg = load_config(args.config)
    sysm = cfg.system
    k = shape_constants(sysm)
    print(f"a1={k.a1:g} a2={k.a2:g} b1={k.b1:g} b2={k.b2:g} a1_eff={k.a1_eff:g} a2_eff={k.a2_eff:g}")
    reps = {name: ifs_thickness(make(sysm, cfg.signs), args.depth)
            for name, make in (("gamma", ifs_from_gamma), ("sigma", ifs_from_sigma))}
    print("depth  tau(gamma)          tau(sigma)")
    for g, s in zip(reps["gamma"].per_depth, reps["sigma"].per_depth):
        print(f"{g['depth']:5d}  {g['tau']:.15f}  {s['tau']:.15f}")


if __name__ == "__main__":
    main()
