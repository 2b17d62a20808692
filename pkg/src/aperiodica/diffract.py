"""Autocorrelation, numeric structure factors, predicted Bragg spectra and
their comparison, including the stochastic-occupancy law.

Normalization: intensities are per unit volume.  A Bragg peak at k carries
weight density^2 * w(k) with density = vol(W) / covolume and
w(k) = |FT(1_W)(-k*) / vol(W)|^2, so the k = 0 peak has weight density^2.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from scipy import integrate

from .construct import PointSet
from .lattice import enumerate_ellipsoid
from .scheme import CutProjectScheme, dual_lattice
from .window import Ball, Box, CosetUnion, EmptyWindow, Interval, Polytope, Window

_CHUNK = 1 << 22  # complex entries per block of the phase matrix


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("APERIODICA_THREADS", "")))
    except ValueError:
        return min(8, os.cpu_count() or 1)


@dataclass
class Spectrum:
    """Bragg peaks (k, intensity) plus an optional flat diffuse background."""

    k: np.ndarray
    intensity: np.ndarray
    amplitude: np.ndarray | None = None
    density: float = 1.0
    background: float = 0.0
    labels: list | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.intensity)

    def strongest(self, n: int, exclude_zero: bool = True, positive: bool = True) -> Spectrum:
        keep = np.ones(len(self), dtype=bool)
        if exclude_zero:
            keep &= np.linalg.norm(self.k, axis=1) > 1e-12
        if positive and self.k.shape[1] == 1:
            keep &= self.k[:, 0] > 0
        idx = np.flatnonzero(keep)
        idx = idx[np.lexsort((np.linalg.norm(self.k[idx], axis=1), -self.intensity[idx]))][:n]
        return self.subset(idx)

    def subset(self, idx) -> Spectrum:
        return Spectrum(self.k[idx], self.intensity[idx],
                        None if self.amplitude is None else self.amplitude[idx],
                        self.density, self.background,
                        None if self.labels is None else [self.labels[i] for i in np.atleast_1d(idx)],
                        dict(self.meta))


@dataclass
class Autocorrelation:
    coords: np.ndarray | None
    vectors: np.ndarray
    coeff: np.ndarray
    s: float

    def at(self, z_coords) -> float:
        z = tuple(int(x) for x in z_coords)
        for c, v in zip(self.coords, self.coeff):
            if tuple(int(x) for x in c) == z:
                return float(v.real) if abs(v.imag) < 1e-12 else v
        return 0.0


def autocorrelation(ps: PointSet, s: float, zmax: float | None = None) -> Autocorrelation:
    """eta(z) = sum over pairs x - y = z in Lambda_s of w(x) conj(w(y)), divided by vol(B_s)."""
    if s > ps.region.size * (1 + 1e-12):
        raise ValueError("averaging radius exceeds the sampled region")
    inner = ps.subset(np.linalg.norm(ps.physical, axis=1) <= s * (1 + 1e-12))
    vol = type(ps.region)("ball", s, ps.d).volume
    w = np.ones(len(inner), dtype=complex) if inner.weights is None else inner.weights
    C = inner.coords
    chunks = np.array_split(np.arange(len(inner)), max(1, min(n_threads(), len(inner))))

    def work(idx):
        diff = (C[idx, None, :] - C[None, :, :]).reshape(-1, C.shape[1])
        wt = (w[idx, None] * np.conj(w[None, :])).reshape(-1)
        if zmax is not None:
            ph = inner.scheme.physical(diff) if inner.scheme is not None else diff
            ok = np.linalg.norm(ph, axis=1) <= zmax
            diff, wt = diff[ok], wt[ok]
        return diff, wt

    with ThreadPoolExecutor(len(chunks)) as ex:
        parts = list(ex.map(work, chunks))
    diff = np.concatenate([p[0] for p in parts])
    wt = np.concatenate([p[1] for p in parts])
    uniq, inv = np.unique(diff, axis=0, return_inverse=True)
    coeff = np.zeros(len(uniq), dtype=complex)
    np.add.at(coeff, inv.reshape(-1), wt)
    coeff /= vol
    vec = inner.scheme.physical(uniq) if inner.scheme is not None else uniq.astype(float)
    if np.all(np.abs(coeff.imag) < 1e-12):
        coeff = coeff.real
    return Autocorrelation(uniq, vec, coeff, s)


def structure_factor(ps: PointSet, ks, volume: float | None = None) -> np.ndarray:
    """I(k) = |sum_x w(x) exp(-2 pi i k.x)|^2 / V for each row of ks."""
    K = np.asarray(ks, dtype=float)
    K = K.reshape(-1, 1) if K.ndim <= 1 and ps.d == 1 else np.atleast_2d(K)
    V = ps.region.volume if volume is None else volume
    X = ps.physical
    if len(X) == 0:
        return np.zeros(len(K))
    w = None if ps.weights is None else np.asarray(ps.weights, dtype=complex)
    step = max(1, _CHUNK // max(1, len(X)))
    blocks = [slice(i, min(i + step, len(K))) for i in range(0, len(K), step)]

    def work(sl):
        ph = np.exp(-2j * np.pi * (K[sl] @ X.T))
        amp = ph.sum(axis=1) if w is None else ph @ w
        return np.abs(amp) ** 2

    if len(blocks) == 1:
        return work(blocks[0]) / V
    with ThreadPoolExecutor(n_threads()) as ex:
        return np.concatenate(list(ex.map(work, blocks))) / V


def kernel_fraction(V: float, delta: float) -> float:
    """Fraction of the finite-size peak sinc^2(V k) captured within |k| <= delta."""
    val, _ = integrate.quad(lambda u: np.sinc(u) ** 2, -delta * V, delta * V, limit=400)
    return val


def integrated_intensity(ps: PointSet, k0: float, width: float | None = None, n: int = 401,
                         background: float = 0.0) -> float:
    """Peak weight at k0 for a 1-D sample: integral of I over [k0 - w, k0 + w]
    (w = 1/R by default), minus a flat background, divided by the fraction of
    the finite-size kernel inside the window."""
    if ps.d != 1:
        raise ValueError("integrated intensity is defined for one-dimensional samples; use peak_height")
    R = ps.region.size
    delta = 1 / R if width is None else width
    ks = np.linspace(k0 - delta, k0 + delta, n)
    raw = integrate.simpson(structure_factor(ps, ks), x=ks)
    return (raw - 2 * delta * background) / kernel_fraction(ps.region.volume, delta)


def peak_height(ps: PointSet, k0) -> float:
    """Peak weight estimated as I(k0) / V (exact for an on-position peak of an
    infinitely sharp sample)."""
    return float(structure_factor(ps, np.atleast_2d(k0))[0]) / ps.region.volume


# ---------------------------------------------------------------------------
# predictions

def _surface_measure(w: Window) -> float:
    """Boundary measure used in |FT(1_W)(xi)| <= area / (2 pi |xi|)."""
    if isinstance(w, Interval):
        return 2.0
    if isinstance(w, Box):
        L = np.subtract(w.hi, w.lo)
        return float(sum(2 * np.prod(np.delete(L, j)) for j in range(len(L))))
    if isinstance(w, Ball):
        return w.dim * w.haar_volume() / w.radius
    if isinstance(w, Polytope):
        return 2.0 if w.dim == 1 else float(w._hull.area)
    raise ValueError(f"no decay bound for {type(w).__name__}")


def _window_ft(w: Window, xi: np.ndarray) -> np.ndarray:
    if isinstance(w, Interval):
        return w.indicator_ft(xi[:, 0])
    if isinstance(w, (Box, Ball)):
        return np.atleast_1d(w.indicator_ft(xi))
    return np.array([w.indicator_ft(x) for x in xi])


def bragg_predict(scheme: CutProjectScheme, window: Window, k_cutoff: float, floor: float = 0.0,
                  int_cutoff: float | None = None, depth: int = 6, budget: int = 5_000_000) -> Spectrum:
    """Bragg peaks with |k| <= k_cutoff and w(k) >= floor, intensity density^2 w(k)."""
    if isinstance(window, EmptyWindow):
        return Spectrum(np.zeros((0, scheme.d)), np.zeros(0), density=0.0)
    if scheme.internal.is_padic:
        return _bragg_padic(scheme, window, k_cutoff, floor, depth)
    vol = float(window.haar_volume())
    density = vol / scheme.covolume
    if int_cutoff is None:
        if floor <= 0:
            raise ValueError("a positive floor or an explicit internal cutoff is needed")
        int_cutoff = _surface_measure(window) / (2 * np.pi * vol * math.sqrt(floor))
    D = dual_lattice(scheme)
    kc, ic = max(k_cutoff, 1e-12), max(int_cutoff, 1e-12)
    B = np.hstack([D.basis[:, : scheme.d] / kc, D.basis[:, scheme.d:] / ic])
    n = enumerate_ellipsoid(B, np.zeros(B.shape[1]), 2.0, budget=budget)
    kp, ki = D.physical(n), D.internal(n)
    ok = (np.linalg.norm(kp, axis=1) <= k_cutoff * (1 + 1e-12)) & (np.linalg.norm(ki, axis=1) <= int_cutoff)
    n, kp, ki = n[ok], kp[ok], ki[ok]
    amp = _window_ft(window, -ki) / vol
    w = np.abs(amp) ** 2
    keep = w >= floor
    order = np.lexsort((np.linalg.norm(kp[keep], axis=1), -w[keep]))
    idx = np.flatnonzero(keep)[order]
    return Spectrum(kp[idx], density ** 2 * w[idx], amp[idx], density,
                    labels=[tuple(int(x) for x in c) for c in n[idx]],
                    meta={"k_cutoff": k_cutoff, "floor": floor, "int_cutoff": int_cutoff,
                          "internal": ki[idx]})


def _bragg_padic(scheme, window: CosetUnion, k_cutoff, floor, depth) -> Spectrum:
    """Dyadic character route: xi in (p^-depth Z / Z)^m, Bragg positions k = -xi + Z^m."""
    p, m = scheme.internal.p, scheme.internal.dim
    if not isinstance(window, CosetUnion) or window.p != p or window.m != m:
        raise ValueError("p-adic scheme needs a coset-union window over the same prime and dimension")
    vol = float(window.haar_volume())
    density = vol / scheme.covolume
    den = p ** depth
    ks, ints, amps, labels = [], [], [], []
    span = int(math.ceil(k_cutoff)) + 1
    for num in product(range(den), repeat=m):
        xi = tuple(Fraction(a, den) for a in num)
        amp = window.indicator_ft(xi) / vol
        w = abs(amp) ** 2
        if w < max(floor, 1e-300):
            continue
        base = -np.array([float(x) for x in xi])
        for shift in product(range(-span, span + 1), repeat=m):
            k = base + np.array(shift)
            if np.linalg.norm(k) <= k_cutoff * (1 + 1e-12):
                ks.append(k)
                ints.append(density ** 2 * w)
                amps.append(amp)
                labels.append(xi)
    ks = np.array(ks).reshape(-1, m)
    ints, amps = np.array(ints), np.array(amps)
    order = np.lexsort((np.linalg.norm(ks, axis=1), -ints))
    # peaks with denominator beyond p^depth come only from cosets with k > depth
    tail = (p ** (-m * (depth + 1)) / (1 - p ** -m) / vol) ** 2
    return Spectrum(ks[order], ints[order], amps[order], density,
                    labels=[labels[i] for i in order],
                    meta={"k_cutoff": k_cutoff, "floor": floor, "depth": depth, "tail_bound": tail})


def stochastic_expectation(pred: Spectrum, density: float, m1: float, m2: float) -> Spectrum:
    """Peaks scaled by m1^2 plus a flat background density * (m2 - m1^2)."""
    if m2 < m1 ** 2 - 1e-15:
        raise ValueError("second moment must be at least the squared first moment")
    out = pred.subset(np.arange(len(pred)))
    out.intensity = pred.intensity * m1 ** 2
    out.background = pred.background * m1 ** 2 + density * max(m2 - m1 ** 2, 0.0)
    return out


# ---------------------------------------------------------------------------
# comparison

def off_peak_mesh(pred: Spectrum, k_lo: float, k_hi: float, avoid: float, n: int = 4000) -> np.ndarray:
    """1-D mesh on [k_lo, k_hi] keeping only points at least ``avoid`` from every predicted peak."""
    ks = np.linspace(k_lo, k_hi, n)
    peaks = np.sort(pred.k[:, 0])
    j = np.searchsorted(peaks, ks)
    d_left = np.abs(ks - peaks[np.clip(j - 1, 0, len(peaks) - 1)])
    d_right = np.abs(ks - peaks[np.clip(j, 0, len(peaks) - 1)])
    return ks[np.minimum(d_left, d_right) >= avoid]


def background_ratio(ps: PointSet, pred: Spectrum, k_hi: float, n: int = 4000,
                     avoid_factor: float = 5.0) -> float:
    """max I over an off-peak mesh on (0, k_hi], divided by I(0)."""
    width = 2 / ps.region.size
    ks = off_peak_mesh(pred, 0.0, k_hi, avoid_factor * width, n)
    I0 = structure_factor(ps, [0.0])[0]
    return float(structure_factor(ps, ks).max() / I0)


@dataclass
class Comparison:
    rel_error: np.ndarray
    numeric: np.ndarray
    predicted: np.ndarray
    background_ratio: float | None = None

    @property
    def max_error(self) -> float:
        return float(np.max(self.rel_error)) if len(self.rel_error) else 0.0

    def passed(self, peak_tol: float, background_tol: float | None = None) -> bool:
        ok = self.max_error <= peak_tol
        if background_tol is not None and self.background_ratio is not None:
            ok &= self.background_ratio < background_tol
        return bool(ok)

    def to_json(self) -> dict:
        return {"statistic": "bragg_comparison", "max_rel_error": self.max_error,
                "rel_error": self.rel_error.tolist(), "numeric": self.numeric.tolist(),
                "predicted": self.predicted.tolist(), "background_ratio": self.background_ratio}


def compare_spectra(numeric, predicted: Spectrum, background_ratio: float | None = None) -> Comparison:
    """Per-peak relative error of numeric peak weights against predictions."""
    num = np.asarray(numeric, dtype=float)
    pred = np.asarray(predicted.intensity, dtype=float)
    if num.shape != pred.shape:
        raise ValueError("numeric and predicted peak lists differ in length")
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(pred > 0, np.abs(num - pred) / pred, np.abs(num))
    return Comparison(rel, num, pred, background_ratio)


def measure_peaks(ps: PointSet, pred: Spectrum, method: str = "integrated") -> np.ndarray:
    """Numeric weights at the predicted positions; the integrated measure
    subtracts the prediction's flat background."""
    if method == "integrated":
        return np.array([integrated_intensity(ps, float(k[0]), background=pred.background) for k in pred.k])
    return np.array([peak_height(ps, k) for k in pred.k])


# ---------------------------------------------------------------------------
# integer point sets on a grid (visible points)

def structure_factor_grid(ps: PointSet, pad: int = 4, taper: bool = True):
    """|FT|^2 of an integer point set in Z^2 on the k-grid j / n (n = pad * side),
    with a radial Hann taper to suppress truncation sidelobes.

    Returns (k_axis, I) with I normalized so that I(0) = 1.
    """
    if ps.d != 2:
        raise ValueError("grid structure factor is implemented for d = 2")
    X = np.rint(ps.physical).astype(np.int64)
    R = ps.region.size
    r = np.linalg.norm(X, axis=1) / R
    h = np.cos(np.pi * r / 2) ** 2 if taper else np.ones(len(X))
    side = 2 * int(math.ceil(R)) + 1
    n = pad * side
    grid = np.zeros((n, n))
    np.add.at(grid, (X[:, 0] % n, X[:, 1] % n), h)
    F = np.fft.fft2(grid)
    I = np.abs(F) ** 2
    I /= I[0, 0]
    return np.arange(n) / n, I


def grid_peaks(k_axis: np.ndarray, I: np.ndarray, rel_threshold: float) -> np.ndarray:
    """Local maxima of a periodic 2-D grid intensity at or above the threshold."""
    from scipy import ndimage
    mx = ndimage.maximum_filter(I, size=3, mode="wrap")
    idx = np.argwhere((I == mx) & (I >= rel_threshold))
    return np.column_stack([k_axis[idx[:, 0]], k_axis[idx[:, 1]]])


def match_peak_sets(A: np.ndarray, B: np.ndarray, tol: float) -> bool:
    """Same set of positions on the unit torus up to tol (each matched both ways)."""
    if len(A) != len(B):
        return False
    if len(A) == 0:
        return True

    def torus_dist(P, Q):
        d = np.abs(P[:, None, :] - Q[None, :, :])
        d = np.minimum(d, 1 - d)
        return np.linalg.norm(d, axis=2)

    D = torus_dist(A, B)
    return bool(D.min(axis=1).max() <= tol and D.min(axis=0).max() <= tol)
