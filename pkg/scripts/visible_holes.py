"""Largest empty balls among the visible points of Z^2 and the stability of
their diffraction peaks.

    python3 scripts/visible_holes.py --radii 1 1.5 2 --search 500 2000
"""
import argparse
import math

from aperiodica.construct import find_empty_ball, visible_points
from aperiodica.diffract import grid_peaks, match_peak_sets, structure_factor_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--radii", type=float, nargs="+", default=[1.0, 1.5, 1.58, 2.0])
    ap.add_argument("--search", type=float, nargs="+", default=[500, 2000])
    ap.add_argument("--spectrum", type=int, nargs="+", default=[125, 250, 500])
    ap.add_argument("--threshold", type=float, default=1e-3)
    args = ap.parse_args()

    for S in args.search:
        for r in args.radii:
            c = find_empty_ball(r, S)
            print(f"search {S:6.0f}  radius {r:5.2f}  " + ("none" if c is None else f"centre {c}"))
    prev = None
    for R in args.spectrum:
        ps = visible_points(2, R)
        kax, I = structure_factor_grid(ps)
        peaks = grid_peaks(kax, I, args.threshold)
        stable = "" if prev is None else f"  matches previous: {match_peak_sets(prev, peaks, 1 / R)}"
        print(f"R={R:5d}  n={len(ps):7d}  density {len(ps) / (math.pi * R * R):.5f} "
              f"(6/pi^2 = {6 / math.pi ** 2:.5f})  peaks {len(peaks)}{stable}")
        prev = peaks


if __name__ == "__main__":
    main()
