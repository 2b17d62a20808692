"""The icosian ring and its restrictions: unit group closure, the trace-form
lattices and their root counts, and a small model-set sample for each.

    python3 scripts/icosian_lattice.py
"""
import numpy as np

from aperiodica.construct import default_window, enumerate_model_set, min_gap
from aperiodica.exact import icosian_generators
from aperiodica.lattice import enumerate_ellipsoid
from aperiodica.scheme import (five_fold_axes, gram_determinant, make_icosian_scheme,
                               restrict_to_pure_quaternions, trace_form_gram)


def roots(gens):
    G = np.array(trace_form_gram(gens), dtype=float)
    v = enumerate_ellipsoid(np.linalg.cholesky(G), np.zeros(len(G)), 2 + 1e-9)
    n = np.rint(np.einsum("ij,jk,ik->i", v, G, v)).astype(int)
    return int(np.sum(n == 2))


def main():
    units = icosian_generators()
    S = set(units)
    print(f"units {len(units)}, closed under products: {all(a * b in S for a in units for b in units)}")
    full = make_icosian_scheme()
    schemes = {"icosian": (full, 3.0),
               "pure": (restrict_to_pure_quaternions(full), 5.0),
               "planar": (restrict_to_pure_quaternions(full, axis=five_fold_axes()[0]), 12.0)}
    for name, (s, R) in schemes.items():
        gens = s.meta["generators"]
        ps = enumerate_model_set(s, default_window(s), R)
        print(f"{name:8s} rank {s.rank}  d {s.d}  det {gram_determinant(gens)}  roots {roots(gens)}  "
              f"sample R={R}: {len(ps)} points, min gap {min_gap(ps.physical):.4f}, "
              f"density {ps.density:.4f}")


if __name__ == "__main__":
    main()
