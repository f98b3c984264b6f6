#!/usr/bin/env python3
"""Writes the synthetic triple-well table shipped in scenarios/data.

Smooth profile on 0-600 nm: 4 meV edges, two barriers (2.5 and 3.5 meV),
wells bottoming out near 0.35 meV and a small bump inside the middle well.
"""
import argparse

import numpy as np


def profile(x):
    edge = 4.0
    step = lambda c, w: 0.5 * (1.0 + np.tanh((x - c) / w))
    v = edge * (1.0 - step(120.0, 12.0)) + edge * step(480.0, 12.0)
    v += 2.5 * np.exp(-0.5 * ((x - 240.0) / 14.0) ** 2)
    v += 3.5 * np.exp(-0.5 * ((x - 360.0) / 14.0) ** 2)
    v += 0.02 * np.exp(-0.5 * ((x - 305.0) / 6.0) ** 2)
    return 0.35 + (edge - 0.35) * np.clip(v / edge, 0.0, 1.0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="scenarios/data/synthetic_triple_well.csv")
    ap.add_argument("--points", type=int, default=301)
    args = ap.parse_args()
    x = np.linspace(0.0, 600.0, args.points)
    v = profile(x)
    with open(args.out, "w") as f:
        f.write("# synthetic triple-well potential, qualitative stand-in for a device simulation\n")
        f.write("nm,meV\n")
        for xi, vi in zip(x, v):
            f.write(f"{xi:.3f},{vi:.6f}\n")


if __name__ == "__main__":
    main()
