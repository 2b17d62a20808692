"""Robinson tile-type densities on growing boxes against the exact values,
for the default and alternative generic sequences.

    python3 scripts/robinson_densities.py --sizes 64 128 256 512 1024
"""
import argparse

from aperiodica.construct import TILE_DENSITIES, RobinsonConfig, robinson_tile_classes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512, 1024])
    ap.add_argument("--K", type=int, default=16)
    args = ap.parse_args()

    configs = {"default": RobinsonConfig(K=args.K),
               "alt": RobinsonConfig(alpha=(1, 1, -1), beta=(-1, 1, 1), K=args.K)}
    for name, cfg in configs.items():
        print(f"{name}: limit point {tuple(str(c) for c in cfg.limit())}, generic {cfg.generic}")
        for n in args.sizes:
            tc = robinson_tile_classes(cfg, n / 2, region="box")
            dens = tc.densities()
            rel = [abs(dens[t] - float(v)) / float(v) for t, v in TILE_DENSITIES.items()]
            cells = "  ".join(f"{dens[t]:.5f}" for t in sorted(TILE_DENSITIES))
            print(f"  {n:5d}^2  {cells}  worst rel {max(rel):.4f}  undecided {len(tc.undecided)}")
    print("exact   " + "  ".join(f"{float(v):.5f}" for _, v in sorted(TILE_DENSITIES.items())))


if __name__ == "__main__":
    main()
