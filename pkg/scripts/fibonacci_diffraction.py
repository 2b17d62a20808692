"""Numeric vs predicted Bragg weights for the Fibonacci model set over a range
of sample radii, plus the stochastic-occupancy variant.

    python3 scripts/fibonacci_diffraction.py --radii 250 500 1000 2000 --out fib.json
"""
import argparse
import json

import numpy as np

from aperiodica.construct import default_window, enumerate_model_set, occupy_stochastic
from aperiodica.diffract import (background_ratio, bragg_predict, compare_spectra,
                                 integrated_intensity, measure_peaks, stochastic_expectation)
from aperiodica.scheme import builtin_scheme


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--radii", type=float, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--top", type=int, default=10)
    ap.add_argument("--occupancy", type=float, default=0.5)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    fib = builtin_scheme("fibonacci")
    W = default_window(fib)
    pred = bragg_predict(fib, W, k_cutoff=3.0, floor=1e-3)
    top = pred.strongest(args.top)
    rows = []
    for R in args.radii:
        ps = enumerate_model_set(fib, W, R)
        cmp = compare_spectra(measure_peaks(ps, top), top, background_ratio(ps, pred, 3.0))
        p = args.occupancy
        exp = stochastic_expectation(pred, pred.density, p, p)
        stop = exp.strongest(5)
        thinned = np.mean([[integrated_intensity(occupy_stochastic(ps, p, s), float(k[0]),
                                                 background=exp.background) for k in stop.k]
                           for s in range(args.seeds)], axis=0)
        rows.append({"R": R, "n": len(ps), "max_error": cmp.max_error,
                     "background_ratio": cmp.background_ratio,
                     "stochastic_max_error": compare_spectra(thinned, stop).max_error})
        print(f"R={R:7.0f}  n={len(ps):6d}  peak err {cmp.max_error:.4f}  "
              f"background {cmp.background_ratio:.4f}  thinned err {rows[-1]['stochastic_max_error']:.4f}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump({"peaks": top.k[:, 0].tolist(), "predicted": top.intensity.tolist(), "runs": rows}, f, indent=1)


if __name__ == "__main__":
    main()
