"""Acceptance suite: one test per criterion at its stated tolerance.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, and also when this file is run as a script.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from aperiodica.analyze import (beta_map, find_self_similarity, invariant_density,
                                lattice_translate, meyer_check, weyl_test)
from aperiodica.construct import (RobinsonConfig, TILE_DENSITIES, default_window,
                                  enumerate_model_set, find_empty_ball, occupy_stochastic,
                                  robinson_tile_classes, robinson_window, visible_points)
from aperiodica.diffract import (background_ratio, bragg_predict, compare_spectra,
                                 grid_peaks, integrated_intensity, match_peak_sets,
                                 measure_peaks, off_peak_mesh, stochastic_expectation,
                                 structure_factor, structure_factor_grid)
from aperiodica.exact import Golden, icosian_generators
from aperiodica.lattice import enumerate_ellipsoid
from aperiodica.scheme import (gram_determinant, make_icosian_scheme,
                               trace_form_gram)
from aperiodica.window import Interval, padic_vector_distance

RESULTS = {}
TAU_F = (1 + math.sqrt(5)) / 2


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


@pytest.fixture(scope="module")
def W(fib):
    return default_window(fib)


def test_criterion_01_robinson_densities():
    t0 = time.perf_counter()
    tc = robinson_tile_classes(RobinsonConfig(), 256, region="box")
    dt = time.perf_counter() - t0
    dens = tc.densities()
    rel = {t: abs(dens[t] - float(v)) / float(v) for t, v in TILE_DENSITIES.items()}
    worst = max(rel, key=rel.get)
    ok = max(rel.values()) <= 0.01 and abs(sum(dens.values()) - 1) < 1e-12 and dt < 10
    record(1, ok, f"worst relative deviation {rel[worst]:.4f} (type {worst}), "
                  f"undecided {len(tc.undecided)}, {dt:.1f} s")


def test_criterion_02_robinson_boundary():
    cfg = RobinsonConfig(K=16)
    Wr = robinson_window(cfg)
    c = cfg.limit()
    cands = Wr.boundary_candidates()
    dist = max(padic_vector_distance(rep, c, 2) for rep, _ in cands)
    vol_err = abs(Wr.haar_volume() - Fraction(1, 3))
    ok = len(cands) > 0 and dist <= Fraction(1, 2 ** 15) and vol_err <= Fraction(1, 4 ** 16)
    record(2, ok, f"{len(cands)} boundary candidates, max distance {dist}, volume error {vol_err}")


def test_criterion_03_icosians():
    t0 = time.perf_counter()
    G = icosian_generators()
    index = {g: i for i, g in enumerate(G)}
    # 14400 exact products; a missing key means the set is not closed
    T = np.array([[index.get(a * b, -1) for b in G] for a in G])
    closed = bool(np.all(T >= 0))
    # u x v = T[T[u, x], v]; each (u, v) must permute the 120 indices
    P = T[T][:, :, :]                      # P[u, x, v]
    perms = np.sort(P, axis=1)
    permute = bool(np.all(perms == np.arange(120)[None, :, None]))
    gens = make_icosian_scheme().meta["generators"]
    Gm = np.array(trace_form_gram(gens), dtype=float)
    even = all(int(Gm[i, i]) % 2 == 0 for i in range(8))
    det = gram_determinant(gens)
    v = enumerate_ellipsoid(np.linalg.cholesky(Gm), np.zeros(8), 2 + 1e-9)
    norms = np.rint(np.einsum("ij,jk,ik->i", v, Gm, v)).astype(int)
    minimum = int(norms[norms > 0].min())
    dt = time.perf_counter() - t0
    ok = closed and permute and even and det == 1 and minimum == 2 and dt < 5
    record(3, ok, f"closed {closed}, 14400 maps permute {permute}, even {even}, det {det}, "
                  f"minimum {minimum}, roots {int(np.sum(norms == 2))}, {dt:.1f} s")


def test_criterion_04_fibonacci_diffraction(fib, W):
    t0 = time.perf_counter()
    ps = enumerate_model_set(fib, W, 1000)
    pred = bragg_predict(fib, W, k_cutoff=3.0, floor=1e-3)
    top = pred.strongest(10)
    bgr = background_ratio(ps, pred, 3.0)
    cmp = compare_spectra(measure_peaks(ps, top), top, bgr)
    dt = time.perf_counter() - t0
    ok = cmp.passed(0.02, 0.01) and dt < 30
    record(4, ok, f"{len(ps)} points, max peak error {cmp.max_error:.4f}, "
                  f"background {bgr:.4f} of I(0), {dt:.1f} s")


def test_criterion_05_weyl(fib, W):
    pvals = {}
    for R in (250, 500, 1000):
        pvals[R] = weyl_test(enumerate_model_set(fib, W, R), W, bins=20).p_value
    # the default window is symmetric, so the linear average uses [-1, tau - 1]
    W2 = Interval(Golden(-1), Golden(-1, 1))
    lin = weyl_test(enumerate_model_set(fib, W2, 1000), W2, bins=20, f=lambda U: U[:, 0])
    ok = min(pvals.values()) > 0.01 and lin.discrepancy < 0.02 and lin.gap < 1e-2
    record(5, ok, f"p-values {', '.join(f'{p:.3f}' for p in pvals.values())}, "
                  f"discrepancy {lin.discrepancy:.4f}, average gap {lin.gap:.2e}")


def test_criterion_06_meyer(fib, W):
    ps = enumerate_model_set(fib, W, 200)
    rep = meyer_check(ps)
    C = ps.coords
    diffs = {(int(a[0] - b[0]), int(a[1] - b[1])) for a in C for b in C}
    diffs = sorted((Golden(a, b) for a, b in diffs if abs(a + b * TAU_F) <= 200 + 1e-9), key=float)
    oracle = min(abs(y - x) for x, y in zip(diffs, diffs[1:]))
    doubled = meyer_check(enumerate_model_set(fib, W, 400), diff_radius=200)
    ok = rep.min_gap_exact == oracle == doubled.min_gap_exact
    record(6, ok, f"min gap {rep.min_gap_exact} (oracle {oracle}, doubled sample {doubled.min_gap_exact})")


def test_criterion_07_self_similarity(fib, W):
    ss = find_self_similarity(fib, W, Golden(0, 1), s=100)
    dens = invariant_density(ss, W)
    mass = float(dens.mass.sum())
    ok = ss.failures == 0 and ss.checked > 0 and dens.history[-1] < 1e-8 and abs(mass - 1) <= 1e-12
    record(7, ok, f"{len(ss.translations)} translations, {ss.checked} checks, {ss.failures} failures, "
                  f"last L1 change {dens.history[-1]:.1e}, mass {mass:.15f}")


def test_criterion_08_stochastic(fib, W):
    p, R = 0.5, 1000
    ps = enumerate_model_set(fib, W, R)
    pred = bragg_predict(fib, W, k_cutoff=3.0, floor=1e-3)
    exp = stochastic_expectation(pred, pred.density, p, p)
    top = exp.strongest(5)
    mesh = off_peak_mesh(pred, 0.05, 3.0, 10 / R, n=2000)
    peaks, bgs = [], []
    for seed in range(20):
        sub = occupy_stochastic(ps, p, seed)
        peaks.append([integrated_intensity(sub, float(k[0]), background=exp.background) for k in top.k])
        bgs.append(structure_factor(sub, mesh).mean())
    cmp = compare_spectra(np.mean(peaks, axis=0), top)
    bg_err = abs(np.mean(bgs) - exp.background) / exp.background
    ok = cmp.max_error <= 0.05 and bg_err <= 0.10
    record(8, ok, f"peak error {cmp.max_error:.4f}, background {np.mean(bgs):.4f} vs "
                  f"{exp.background:.4f} (error {bg_err:.4f})")


def test_criterion_09_visible():
    R = 500
    ps = visible_points(2, R)
    ax = np.arange(-R, R + 1)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    brute = int(np.sum((X ** 2 + Y ** 2 <= R * R) & (np.gcd(X, Y) == 1)))
    dens = len(ps) / (math.pi * R * R)
    rel = abs(dens - 6 / math.pi ** 2) / (6 / math.pi ** 2)
    hole = find_empty_ball(2.0, 2000)
    sets = []
    for r in (250, 500):
        kax, I = structure_factor_grid(visible_points(2, r))
        sets.append(grid_peaks(kax, I, 1e-3))
    stable = match_peak_sets(sets[0], sets[1], 1 / 250)
    ok = len(ps) == brute and rel < 0.005 and hole is not None and stable
    record(9, ok, f"count {len(ps)} (brute {brute}), density deviation {rel:.4f}, "
                  f"radius-2 hole at {hole}, peaks {len(sets[0])}/{len(sets[1])} stable {stable}")


def test_criterion_10_beta_map(fib, W):
    d50 = beta_map(enumerate_model_set(fib, W, 50), fib, W)
    ps400 = enumerate_model_set(fib, W, 400)
    d400 = beta_map(ps400, fib, W)
    rng = np.random.default_rng(2024)
    exact = 0
    for n in rng.integers(-60, 61, size=(20, 2)):
        n = (int(n[0]), int(n[1]))
        b = beta_map(lattice_translate(ps400, [-n[0], -n[1]]), fib, W)
        ustar = fib.star_exact(n)[0]
        exact += (b.lo - d400.lo, b.hi - d400.hi) == (ustar, ustar)
    ratio = float(d400.diameter) / float(d50.diameter)
    ok = ratio < 0.25 and exact == 20
    record(10, ok, f"diameter {float(d50.diameter):.4f} -> {float(d400.diameter):.4f} "
                   f"(ratio {ratio:.3f}), exact shifts {exact}/20")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
