#!/usr/bin/env python3
"""Regenerate the bundled synthetic terrains under assets/terrain.

All three maps are ESRI ASCII grids with 0.5 m cells. Output is deterministic.
"""

import argparse
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

CELL = 0.5


def write_esri(path, heights, cell=CELL, x0=0.0, y0=0.0):
    """heights[row, col] with row 0 at the smallest y; the file is written north to south."""
    nrows, ncols = heights.shape
    with open(path, "w") as f:
        f.write(f"ncols {ncols}\nnrows {nrows}\n")
        f.write(f"xllcenter {x0:.6f}\nyllcenter {y0:.6f}\n")
        f.write(f"cellsize {cell:.6f}\nNODATA_value -9999\n")
        for row in heights[::-1]:
            f.write(" ".join(f"{v:.6f}" for v in row) + "\n")


def grid(size):
    n = int(round(size / CELL)) + 1
    x = np.arange(n) * CELL
    return np.meshgrid(x, x)


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


def flat():
    X, _ = grid(30.0)
    return np.zeros_like(X)


def ramp():
    # Level floor, a 10 m incline of grade 0.1, then a level plateau.
    X, _ = grid(30.0)
    x0, x1, grade = 10.0, 20.0, 0.1
    ease = 1.5
    s = np.clip(X - x0, 0.0, x1 - x0)
    h = grade * s
    # Round the two kinks so the surface stays smooth.
    lo = np.abs(X - x0) < ease
    hi = np.abs(X - x1) < ease
    u = (X - x0 + ease) / (2 * ease)
    h = np.where(lo, grade * ease * (u ** 2), h)
    v = (X - x1 + ease) / (2 * ease)
    h = np.where(hi, grade * (x1 - x0) - grade * ease * ((1 - v) ** 2), h)
    return h


def craters(seed):
    X, Y = grid(40.0)
    rng = np.random.default_rng(seed)
    noise = gaussian_filter(rng.standard_normal(X.shape), sigma=6.0, mode="reflect")
    h = 0.25 * noise / np.abs(noise).max()
    sites = [
        (12.0, 13.0, 4.0, 1.4),
        (22.0, 21.0, 5.0, 1.8),
        (30.0, 29.0, 3.5, 1.2),
        (17.0, 30.0, 3.0, 1.0),
        (29.0, 12.0, 3.5, 1.1),
    ]
    for cx, cy, radius, depth in sites:
        r = np.hypot(X - cx, Y - cy) / radius
        bowl = -depth * (1.0 - smoothstep(r / 1.0))
        rim = 0.45 * depth * np.exp(-((r - 1.05) ** 2) / 0.08)
        h += bowl + rim
    # A rise toward the far corner so the route has to climb.
    h += 9.0 * smoothstep((X + Y - 20.0) / 50.0)
    return gaussian_filter(h, sigma=1.0, mode="nearest")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "assets" / "terrain")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    write_esri(args.out / "flat.asc", flat())
    write_esri(args.out / "ramp.asc", ramp())
    write_esri(args.out / "craters.asc", craters(args.seed))


if __name__ == "__main__":
    main()
