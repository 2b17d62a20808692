import math
from collections import Counter

import numpy as np
import pytest
from scipy import integrate

from aperiodica.construct import (deform_set, default_window, enumerate_model_set,
                                  occupy_stochastic, visible_points, weight_comb)
from aperiodica.diffract import (autocorrelation, background_ratio, bragg_predict,
                                 compare_spectra, grid_peaks, integrated_intensity,
                                 match_peak_sets, measure_peaks, stochastic_expectation,
                                 structure_factor, structure_factor_grid)
from aperiodica.exact import Golden
from aperiodica.scheme import dual_lattice
from aperiodica.window import CosetUnion

TAU_F = (1 + math.sqrt(5)) / 2
SQRT5 = math.sqrt(5)


@pytest.fixture(scope="module")
def generic(fib):
    return default_window(fib)


@pytest.fixture(scope="module")
def pred(fib, generic):
    return bragg_predict(fib, generic, k_cutoff=3.0, floor=1e-3)


# -- autocorrelation ---------------------------------------------------------------

def test_autocorrelation_matches_pair_count(fib, generic):
    ps = enumerate_model_set(fib, generic, 120)
    ac = autocorrelation(ps, 100, zmax=10)
    inner = ps.coords[np.abs(ps.physical[:, 0]) <= 100]
    pairs = Counter()
    for a in inner:
        for b in inner:
            z = (int(a[0] - b[0]), int(a[1] - b[1]))
            if abs(z[0] + z[1] * TAU_F) <= 10:
                pairs[z] += 1
    assert len(pairs) == len(ac.coords)
    for z, n in pairs.items():
        assert ac.at(z) == pytest.approx(n / 200)
    assert ac.at((0, 0)) == pytest.approx(len(inner) / 200)
    assert ac.at((0, 0)) == pytest.approx(float(generic.haar_volume()) / SQRT5, rel=0.02)


def test_autocorrelation_weighted(fib, generic):
    ps = weight_comb(enumerate_model_set(fib, generic, 60), lambda U: np.exp(2j * U[:, 0]))
    ac = autocorrelation(ps, 50)
    inner = np.abs(ps.physical[:, 0]) <= 50
    assert ac.at((0, 0)) == pytest.approx(inner.sum() / 100)
    with pytest.raises(ValueError):
        autocorrelation(ps, 80)


# -- numeric structure factor ------------------------------------------------------------

def test_structure_factor_at_zero(fib, generic):
    ps = enumerate_model_set(fib, generic, 100)
    assert structure_factor(ps, [0.0])[0] == pytest.approx(len(ps) ** 2 / 200)


def test_structure_factor_lattice_periodic(robinson):
    ps = enumerate_model_set(robinson, CosetUnion(2, 2, (((0, 0), 0),)), 20)
    # the full window gives Z^2, whose structure factor has period 1
    I = structure_factor(ps, [[0, 0], [1, 0], [1, 1], [0.13, 0.0], [1.13, -1.0]])
    assert I[1] == pytest.approx(I[0]) and I[2] == pytest.approx(I[0])
    assert I[4] == pytest.approx(I[3])
    assert I[3] < 0.1 * I[0]


# -- predicted spectrum --------------------------------------------------------------

def test_prediction_normalization(fib, generic, pred):
    density = float(generic.haar_volume()) / SQRT5
    i0 = np.flatnonzero(np.linalg.norm(pred.k, axis=1) < 1e-12)
    assert len(i0) == 1
    assert pred.intensity[i0[0]] == pytest.approx(density ** 2)
    assert abs(pred.amplitude[i0[0]]) == pytest.approx(1.0)
    assert np.all(pred.intensity <= density ** 2 * (1 + 1e-12))


def test_peak_positions_in_module(fib, pred):
    D = dual_lattice(fib)
    for lab, k in zip(pred.labels, pred.k[:, 0]):
        exact = sum((D.exact[i][0] * n for i, n in enumerate(lab)), Golden(0))
        assert float(exact) == pytest.approx(k, abs=1e-9)
        # every position is (a + b tau) / sqrt5 with integers a, b
        assert (exact * Golden(-1, 2)).is_integral


def test_weights_against_sinc(fib, generic):
    pred = bragg_predict(fib, generic, k_cutoff=6.0, int_cutoff=40.0)
    ell = float(generic.length)
    D = dual_lattice(fib)
    rng = np.random.default_rng(0)
    for i in rng.choice(len(pred), size=100, replace=False):
        kstar = float(np.asarray(pred.labels[i]) @ D.basis[:, 1])
        expected = 1.0 if kstar == 0 else (math.sin(math.pi * ell * kstar) / (math.pi * ell * kstar)) ** 2
        assert abs(pred.amplitude[i]) ** 2 == pytest.approx(expected, abs=1e-12)


def test_padic_prediction(robinson):
    full = bragg_predict(robinson, CosetUnion(2, 2, (((0, 0), 0),)), k_cutoff=1.5, depth=3)
    assert np.allclose(full.k, np.rint(full.k))
    assert np.allclose(full.intensity, 1.0)
    sub = bragg_predict(robinson, CosetUnion(2, 2, (((0, 0), 1),)), k_cutoff=0.8, depth=3)
    # 2Z^2 has density 1/4 and unit-amplitude peaks on (Z/2)^2
    assert np.allclose(2 * sub.k, np.rint(2 * sub.k))
    assert np.allclose(sub.intensity, 1 / 16)
    assert len(sub) == 9
    assert full.meta["tail_bound"] < 1e-3


def test_compare_identity_and_mismatch(pred):
    c = compare_spectra(pred.intensity, pred)
    assert c.max_error == 0 and c.passed(1e-12)
    with pytest.raises(ValueError):
        compare_spectra(pred.intensity[:-1], pred)


def test_stochastic_expectation_edges(pred):
    same = stochastic_expectation(pred, 0.7, 1.0, 1.0)
    assert np.array_equal(same.intensity, pred.intensity) and same.background == 0
    dead = stochastic_expectation(pred, 0.7, 0.0, 0.0)
    assert np.all(dead.intensity == 0) and dead.background == 0
    half = stochastic_expectation(pred, 0.7, 0.5, 0.5)
    assert np.allclose(half.intensity, pred.intensity / 4)
    assert half.background == pytest.approx(0.7 * 0.25)
    with pytest.raises(ValueError):
        stochastic_expectation(pred, 0.7, 0.5, 0.1)


# -- numeric against predicted ------------------------------------------------------------

def test_error_shrinks_with_size(fib, generic, pred):
    top = pred.strongest(5)
    errs = []
    for R in (250, 1000):
        ps = enumerate_model_set(fib, generic, R)
        errs.append(compare_spectra(measure_peaks(ps, top), top).max_error)
    assert errs[1] < errs[0]
    assert errs[1] < 0.01


def test_background_small(fib, generic, pred):
    ps = enumerate_model_set(fib, generic, 500)
    assert background_ratio(ps, pred, 3.0) < 0.01


def test_stochastic_occupancy_numeric(fib, generic, pred):
    ps = enumerate_model_set(fib, generic, 4000)
    sub = occupy_stochastic(ps, 0.5, seed=11)
    exp = stochastic_expectation(pred, pred.density, 0.5, 0.5)
    top = exp.strongest(3)
    num = np.array([integrated_intensity(sub, float(k[0]), background=exp.background) for k in top.k])
    assert compare_spectra(num, top).max_error < 0.05


def test_deformed_peaks_follow_modulated_weights(fib, generic):
    """A deformation x -> x + g(x*) keeps the peak positions and multiplies each
    window amplitude by exp(-2 pi i k g(u)) inside the internal integral."""
    g = lambda U: 0.05 * np.sin(2 * np.pi * U[:, :1] / TAU_F)
    ps = deform_set(enumerate_model_set(fib, generic, 1000), g)
    top = bragg_predict(fib, generic, k_cutoff=3.0, floor=1e-3).strongest(5)
    a, b = float(generic.a), float(generic.b)
    D = dual_lattice(fib)
    expected = []
    for lab, k in zip(top.labels, top.k[:, 0]):
        ks = float(np.asarray(lab) @ D.basis[:, 1])
        f = lambda u, part: part(np.exp(2j * np.pi * (ks * u - k * g(np.array([[u]]))[0, 0])))
        re = integrate.quad(f, a, b, args=(np.real,), limit=200)[0]
        im = integrate.quad(f, a, b, args=(np.imag,), limit=200)[0]
        expected.append((re ** 2 + im ** 2) / SQRT5 ** 2)
    num = measure_peaks(ps, top)
    assert np.allclose(num, expected, rtol=0.02)


# -- integer grids ------------------------------------------------------------------------

def test_grid_lattice_has_only_origin_peak(robinson):
    ps = enumerate_model_set(robinson, CosetUnion(2, 2, (((0, 0), 0),)), 30)
    kax, I = structure_factor_grid(ps, pad=2)
    assert I[0, 0] == 1.0
    peaks = grid_peaks(kax, I, 0.5)
    assert match_peak_sets(peaks, np.zeros((1, 2)), 1e-9)


def test_visible_peaks_stable():
    sets = []
    for R in (120, 240):
        kax, I = structure_factor_grid(visible_points(2, R))
        sets.append(grid_peaks(kax, I, 0.02))
    assert len(sets[0]) > 1
    assert match_peak_sets(sets[0], sets[1], 0.01)
