"""Finite-sample diagnostics of model sets: Delone radii, Meyer gap, patch
census and repetitivity, uniform distribution of star images, self-similarity
and its invariant density, the patch metric, and the torus (beta) map."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, sparse, stats
from scipy.spatial import cKDTree

from .construct import PointSet, enumerate_model_set, min_gap
from .exact import Golden
from .scheme import CutProjectScheme, UnsupportedError
from .window import Box, CosetUnion, Interval, Membership, Window, window_Q


def lattice_translate(ps: PointSet, shift_coords) -> PointSet:
    """The same sample moved by a lattice vector given in lattice coordinates."""
    s = np.asarray(shift_coords, dtype=np.int64)
    out = ps.subset(np.ones(len(ps), dtype=bool))
    out.coords = ps.coords + s
    out.physical = ps.physical + ps.scheme.physical(s)[0]
    out.internal = ps.internal + (s if ps.scheme.internal.is_padic else ps.scheme.star(s)[0])
    return out


# ---------------------------------------------------------------------------
# Delone and Meyer

def _mesh_cover(points, lo, hi, step, keep=None):
    axes = [np.arange(l, h + step / 2, step) for l, h in zip(lo, hi)]
    if any(len(a) == 0 for a in axes):
        return 0.0
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    if keep is not None:
        mesh = mesh[keep(mesh)]
        if len(mesh) == 0:
            return 0.0
    d, _ = cKDTree(points).query(mesh)
    return float(d.max())


def delone_radii(ps: PointSet, step: float | None = None) -> tuple[float, float]:
    """(packing radius, covering radius) of the sample.

    The covering radius is the largest distance from a mesh point to the set,
    with a boundary collar of the current estimate's width excluded.
    """
    if len(ps) < 2:
        raise ValueError("need at least two points for Delone radii")
    X = ps.physical
    gap = min_gap(X)
    r_pack = gap / 2
    if ps.d == 1:
        x = np.sort(X[:, 0])
        return r_pack, float(np.max(np.diff(x))) / 2
    lo, hi = X.min(axis=0), X.max(axis=0)
    step = step or gap / 8
    collar = 0.1 * float(np.min(hi - lo))
    est = _mesh_cover(X, lo + collar, hi - collar, step)
    collar = max(2 * est, step)
    if np.any(lo + collar >= hi - collar):
        raise ValueError("sample too small for an interior covering estimate")
    # anchor the mesh on a sample point so symmetric holes are hit exactly
    start = X[np.argmin(np.linalg.norm(X - (lo + collar), axis=1))]
    lo2 = start - np.floor((start - (lo + collar)) / step) * step
    return r_pack, _mesh_cover(X, lo2, hi - collar, step)


@dataclass
class MeyerReport:
    min_gap: float
    min_gap_exact: object
    witness: tuple
    n_differences: int
    diff_radius: float
    inner_min_gap: float | None = None

    @property
    def stable(self) -> bool:
        return self.inner_min_gap is None or math.isclose(self.min_gap, self.inner_min_gap, rel_tol=1e-12)

    def to_json(self) -> dict:
        return {"statistic": "meyer_min_gap", "value": self.min_gap,
                "exact": None if self.min_gap_exact is None else str(self.min_gap_exact),
                "sample_size": self.n_differences, "parameters": {"diff_radius": self.diff_radius},
                "inner_min_gap": self.inner_min_gap}


def _difference_set(ps: PointSet, s: float):
    """Distinct differences x - y with |x - y| <= s: (coords, physical)."""
    X = ps.physical
    pairs = cKDTree(X).query_pairs(s * (1 + 1e-12), output_type="ndarray")
    i, j = pairs[:, 0], pairs[:, 1]
    i, j = np.concatenate([i, j]), np.concatenate([j, i])
    if ps.scheme is not None:
        dc = ps.coords[i] - ps.coords[j]
        dc = np.vstack([dc, np.zeros((1, dc.shape[1]), dtype=dc.dtype)])
        dc = np.unique(dc, axis=0)
        return dc, ps.scheme.physical(dc)
    dp = np.vstack([X[i] - X[j], np.zeros((1, X.shape[1]))])
    return None, dp


def _meyer_gap(ps: PointSet, s: float):
    dc, dp = _difference_set(ps, s)
    if len(dp) < 2:
        return math.inf, None, None, len(dp)
    if ps.d == 1:
        order = np.argsort(dp[:, 0])
        gaps = np.diff(dp[order, 0])
        k = int(np.argmin(gaps))
        pair = (order[k + 1], order[k])
        g = float(gaps[k])
    else:
        dist, idx = cKDTree(dp).query(dp, k=2)
        k = int(np.argmin(dist[:, 1]))
        pair = (k, int(idx[k, 1]))
        g = float(dist[k, 1])
    exact = None
    wit = None
    if dc is not None:
        wit = tuple(int(x) for x in dc[pair[0]] - dc[pair[1]])
        if ps.scheme.exact_phys is not None and ps.d == 1:
            exact = abs(ps.scheme.physical_exact(wit)[0])
    return g, exact, wit, len(dp)


def meyer_check(ps: PointSet, diff_radius: float | None = None) -> MeyerReport:
    """Minimal positive distance within the difference set (Lambda - Lambda)
    restricted to |z| <= diff_radius, on the sample and on its inner half."""
    s = diff_radius if diff_radius is not None else ps.region.size
    g, exact, wit, n = _meyer_gap(ps, s)
    inner = ps.subset(np.linalg.norm(ps.physical, axis=1) <= ps.region.size / 2)
    g_in = _meyer_gap(inner, s)[0] if len(inner) > 2 else None
    return MeyerReport(g, exact, wit, n, s, g_in)


# ---------------------------------------------------------------------------
# patches

@dataclass
class PatchCensus:
    r: float
    classes: list
    total: int
    offcenter_diff: float | None = None  # max |frequency change| on an off-centre half-size ball

    @property
    def sensitive(self) -> bool:
        """Frequencies move by more than 0.01 when averaged off-centre."""
        return self.offcenter_diff is not None and self.offcenter_diff > 0.01

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def frequencies(self) -> dict:
        return {patch: n / self.total for patch, n in self.classes}

    def to_rows(self) -> list[dict]:
        return [{"patch": " ".join(",".join(map(str, p)) for p in patch), "count": n,
                 "frequency": n / self.total} for patch, n in self.classes]


def _patch_keys(ps: PointSet, r: float, anchors: np.ndarray):
    tree = cKDTree(ps.physical)
    exact = ps.scheme is not None
    keys = []
    for a in anchors:
        nb = tree.query_ball_point(ps.physical[a], r * (1 + 1e-12))
        if exact:
            rel = ps.coords[nb] - ps.coords[a]
            keys.append(tuple(sorted(tuple(int(x) for x in v) for v in rel)))
        else:
            rel = np.round((ps.physical[nb] - ps.physical[a]) / 1e-9).astype(np.int64)
            keys.append(tuple(sorted(tuple(v) for v in rel)))
    return keys


def _interior_anchors(ps: PointSet, margin: float) -> np.ndarray:
    c = np.asarray(ps.region.center)
    if ps.region.kind == "box":
        far = np.all(np.abs(ps.physical - c) <= ps.region.size - margin, axis=1)
    else:
        far = np.linalg.norm(ps.physical - c, axis=1) <= ps.region.size - margin
    return np.flatnonzero(far)


def patch_census(ps: PointSet, r: float) -> PatchCensus:
    """Translation classes of r-patches, anchored at each point whose r-ball
    lies inside the sampled region.  Exact (lattice coordinates) when possible."""
    if r <= 0:
        raise ValueError("patch radius must be positive")
    anchors = _interior_anchors(ps, r)
    keys = _patch_keys(ps, r, anchors)
    cnt = Counter(keys)
    classes = sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0]))
    # the same census on a ball of half the size centred half-way out
    half = ps.region.size / 2
    c = np.asarray(ps.region.center, dtype=float).copy()
    c[0] += half
    near = np.linalg.norm(ps.physical[anchors] - c, axis=1) <= half - r
    diff = None
    if near.sum() > 0 and len(anchors) > 0:
        sub = Counter(k for k, ok in zip(keys, near) if ok)
        m = int(near.sum())
        diff = max(abs(sub[k] / m - n / len(anchors)) for k, n in cnt.items())
    return PatchCensus(r, classes, len(anchors), diff)


def repetitivity_radius(ps: PointSet, patch, r: float) -> float:
    """Sample estimate of the smallest R such that every R-ball in the interior
    contains a translate of the patch: covering radius of its occurrences plus
    the patch's own extent."""
    anchors = _interior_anchors(ps, r)
    keys = _patch_keys(ps, r, anchors)
    occ = anchors[[k == patch for k in keys]]
    if len(occ) == 0:
        raise ValueError("patch does not occur in the sample")
    if ps.scheme is not None:
        extent = float(np.max(np.linalg.norm(ps.scheme.physical(np.array(patch)), axis=1)))
    else:
        extent = float(np.max(np.linalg.norm(np.array(patch) * 1e-9, axis=1)))
    P = ps.physical[occ]
    if ps.d == 1:
        x = np.sort(P[:, 0])
        lo, hi = ps.physical[anchors, 0].min(), ps.physical[anchors, 0].max()
        gaps = np.diff(np.concatenate([[lo], x, [hi]]))
        gaps[0] *= 2
        gaps[-1] *= 2
        cover = float(gaps.max()) / 2
    else:
        # mesh only over the anchor region, aligned with an occurrence
        A = ps.physical[anchors]
        lo, hi = A.min(axis=0), A.max(axis=0)
        step = min_gap(ps.physical) / 4
        lo = P[0] - np.floor((P[0] - lo) / step) * step
        c = np.asarray(ps.region.center)

        def keep_within(size):
            if ps.region.kind == "box":
                return lambda M: np.all(np.abs(M - c) <= size + 1e-9, axis=1)
            return lambda M: np.linalg.norm(M - c, axis=1) <= size + 1e-9

        # second pass drops a collar as wide as the first estimate
        est = _mesh_cover(P, lo, hi, step, keep_within(ps.region.size - r))
        cover = _mesh_cover(P, lo, hi, step, keep_within(ps.region.size - r - est))
    return cover + extent


# ---------------------------------------------------------------------------
# uniform distribution

@dataclass
class WeylReport:
    n: int
    chi2: float | None = None
    p_value: float | None = None
    bins: int | None = None
    discrepancy: float | None = None
    average: float | None = None
    integral: float | None = None

    @property
    def gap(self) -> float | None:
        if self.average is None:
            return None
        return abs(self.average - self.integral)

    def to_json(self) -> dict:
        return {"statistic": "weyl", "sample_size": self.n, "chi2": self.chi2, "p_value": self.p_value,
                "bins": self.bins, "discrepancy": self.discrepancy, "average": self.average,
                "integral": self.integral, "gap": self.gap}


def _bin_counts(stars, window: Window, bins: int):
    if isinstance(window, Interval):
        edges = np.linspace(float(window.a), float(window.b), bins + 1)
        cnt, _ = np.histogram(stars[:, 0], edges)
        return cnt, np.full(bins, 1 / bins)
    if isinstance(window, Box):
        per = max(1, int(round(bins ** (1 / window.dim))))
        edges = [np.linspace(a, b, per + 1) for a, b in zip(window.lo, window.hi)]
        cnt, _ = np.histogramdd(stars, edges)
        return cnt.ravel(), np.full(cnt.size, 1 / cnt.size)
    if isinstance(window, CosetUnion):
        vol = window.haar_volume()
        cnt, exp = [], []
        U = np.asarray(stars, dtype=np.int64)
        for rep, k in window.cosets:
            cnt.append(int(np.sum(np.all((U - np.array(rep)) % window.p ** k == 0, axis=1))))
            exp.append(float(Fraction(1, window.p ** (window.m * k)) / vol))
        return np.array(cnt), np.array(exp)
    raise UnsupportedError(f"binning not implemented for {type(window).__name__}")


def weyl_test(ps: PointSet, window: Window, bins: int = 20, f=None) -> WeylReport:
    """Chi-square of star images over Haar-equal bins, Kolmogorov discrepancy
    (intervals), and optionally the sample mean of f(x*) against the window
    average of f."""
    stars = np.asarray(ps.internal)
    n = len(stars)
    rep = WeylReport(n=n)
    cnt, probs = _bin_counts(stars, window, bins)
    keep = probs > 0
    # cosets with too few expected points are pooled into one bin
    exp = probs * cnt.sum()
    small = exp < 5
    if np.any(small) and np.sum(~small) >= 1:
        cnt = np.concatenate([cnt[~small], [cnt[small].sum()]])
        exp = np.concatenate([exp[~small], [exp[small].sum()]])
        keep = exp > 0
    res = stats.chisquare(cnt[keep], exp[keep])
    rep.chi2, rep.p_value, rep.bins = float(res.statistic), float(res.pvalue), int(keep.sum())
    if isinstance(window, Interval):
        a, b = float(window.a), float(window.b)
        rep.discrepancy = float(stats.kstest(stars[:, 0], stats.uniform(a, b - a).cdf).statistic)
    if f is not None:
        vals = np.asarray(f(stars), dtype=float).reshape(-1)
        rep.average = float(vals.mean())
        rep.integral = window_average(window, f)
    return rep


def window_average(window: Window, f) -> float:
    """(1/vol W) * integral of f over W."""
    if isinstance(window, Interval):
        a, b = float(window.a), float(window.b)
        val, _ = integrate.quad(lambda u: float(np.asarray(f(np.array([[u]]))).reshape(-1)[0]), a, b,
                                epsabs=1e-13, epsrel=1e-12)
        return val / (b - a)
    if isinstance(window, Box):
        g = lambda *u: float(np.asarray(f(np.array([u]))).reshape(-1)[0])
        val, _ = integrate.nquad(g, list(zip(window.lo, window.hi)))
        return val / window.haar_volume()
    raise UnsupportedError(f"window average not implemented for {type(window).__name__}")


def weyl_fraction(ps: PointSet, sub: Window) -> float:
    """Fraction of star images falling in the sub-window (inside or boundary)."""
    codes = sub.classify(ps.internal)
    return float(np.mean(codes >= 0)) if len(ps) else math.nan


# ---------------------------------------------------------------------------
# self-similarity

@dataclass
class SelfSimilarity:
    q: Golden
    qstar: Golden
    matrix: np.ndarray
    window_Q: Window
    translations: PointSet
    s: float
    failures: int = 0
    checked: int = 0

    def to_json(self) -> dict:
        return {"q": str(self.q), "qstar": str(self.qstar), "matrix": self.matrix.tolist(),
                "W_Q": self.window_Q.to_json(), "n_translations": len(self.translations),
                "s": self.s, "failures": self.failures, "checked": self.checked}


def _golden_coords(scheme: CutProjectScheme, x: Golden) -> tuple[int, int]:
    """Lattice coordinates of a physical Golden number in a rank-2, d=1 scheme."""
    (e0,), (e1,) = scheme.exact_phys
    e0, e1 = Golden.coerce(e0), Golden.coerce(e1)
    # solve c0 e0 + c1 e1 = x over Q componentwise
    det = e0.a * e1.b - e0.b * e1.a
    c0 = Fraction(x.a * e1.b - x.b * e1.a) / det
    c1 = Fraction(e0.a * x.b - e0.b * x.a) / det
    if c0.denominator != 1 or c1.denominator != 1:
        raise ValueError(f"{x} is not in the lattice")
    return int(c0), int(c1)


def find_self_similarity(scheme: CutProjectScheme, window: Window, q, s: float = 100.0,
                         check_radius: float | None = None) -> SelfSimilarity:
    """Inflation x -> q x with q a lattice unit; T_Q = {v in L : v* in W_Q}.

    Every v found is checked exactly: q x + v must lie in Lambda for all x in
    Lambda with |x| <= check_radius (default s).
    """
    if not (scheme.is_exact and scheme.d == 1 and scheme.rank == 2):
        raise UnsupportedError("self-similarity search needs an exact one-dimensional rank-2 scheme")
    q = Golden.coerce(q)
    if not abs(float(q)) > 1:
        raise ValueError("the inflation factor must satisfy |q| > 1")
    # matrix of x -> q x on lattice coordinates (rows: images of basis vectors)
    rows = []
    for (e,) in scheme.exact_phys:
        try:
            rows.append(_golden_coords(scheme, q * Golden.coerce(e)))
        except ValueError:
            raise ValueError("q L is not contained in L") from None
    M = np.array(rows, dtype=np.int64)
    if abs(round(np.linalg.det(M))) != 1:
        raise ValueError("q L != L (not a lattice automorphism)")
    # induced internal map: the same integer matrix acting on star images
    (i0,), (i1,) = (tuple(Golden.coerce(x) for x in r) for r in scheme.exact_int)
    qstar = (i0 * int(M[0, 0]) + i1 * int(M[0, 1])) / i0
    if i0 * int(M[1, 0]) + i1 * int(M[1, 1]) != qstar * i1:
        raise ValueError("the lattice map does not act as a scalar on internal space")
    WQ = window_Q(window, qstar)
    T = enumerate_model_set(scheme, WQ, s)
    out = SelfSimilarity(q, qstar, M, WQ, T, s)
    R = s if check_radius is None else check_radius
    lam = enumerate_model_set(scheme, window, R)
    img = lam.coords @ M
    for v in T.coords:
        for y in img + v:
            out.checked += 1
            if window.contains(scheme.star_exact(y)[0]) == Membership.OUTSIDE:
                out.failures += 1
    return out


@dataclass
class InvariantDensity:
    edges: np.ndarray
    mass: np.ndarray
    history: list
    converged: bool

    @property
    def density(self) -> np.ndarray:
        return self.mass / np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2


def _pushforward(edges: np.ndarray, qs: float, shift: float) -> sparse.csr_matrix:
    """Column-stochastic matrix sending cell masses through u -> qs u + shift,
    spreading each image interval over target cells by overlap length."""
    n = len(edges) - 1
    lo = qs * edges[:-1] + shift
    hi = qs * edges[1:] + shift
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    rows, cols, vals = [], [], []
    first = np.clip(np.searchsorted(edges, lo, side="right") - 1, 0, n - 1)
    last = np.clip(np.searchsorted(edges, hi, side="left") - 1, 0, n - 1)
    for j in range(n):
        for i in range(first[j], last[j] + 1):
            ov = min(hi[j], edges[i + 1]) - max(lo[j], edges[i])
            if ov > 0:
                rows.append(i)
                cols.append(j)
                vals.append(ov)
    P = sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))
    colsum = np.asarray(P.sum(axis=0)).ravel()
    colsum[colsum == 0] = 1
    return (P @ sparse.diags(1 / colsum)).tocsr()


def invariant_density(ss: SelfSimilarity, window: Window, n_cells: int = 400,
                      max_iter: int = 10_000, tol: float = 1e-8) -> InvariantDensity:
    """Fixed point of mu -> (1/#T) sum_v (u -> q* u + v*)_* mu on a uniform grid."""
    if not isinstance(window, Interval):
        raise UnsupportedError("invariant density is implemented for interval windows")
    if len(ss.translations) == 0:
        raise ValueError("no admissible translations in the sample")
    edges = np.linspace(float(window.a), float(window.b), n_cells + 1)
    qs = float(ss.qstar)
    P = sparse.csr_matrix((n_cells, n_cells))
    for v in ss.translations.internal[:, 0]:
        P = P + _pushforward(edges, qs, float(v))
    P = P / len(ss.translations)
    mu = np.full(n_cells, 1 / n_cells)
    hist = []
    for _ in range(max_iter):
        new = P @ mu
        new /= new.sum()
        diff = float(np.abs(new - mu).sum())
        hist.append(diff)
        mu = new
        if diff < tol:
            return InvariantDensity(edges, mu, hist, True)
    raise RuntimeError(f"invariant density did not converge in {max_iter} iterations "
                       f"(last L1 change {hist[-1]:.3g})")


# ---------------------------------------------------------------------------
# patch metric and torus parametrization

def _restrict(X, K):
    return X[np.linalg.norm(X, axis=1) <= K]


def _same_set(A, B, tol=1e-9) -> bool:
    if len(A) != len(B):
        return False
    if len(A) == 0:
        return True
    d, _ = cKDTree(B).query(A)
    d2, _ = cKDTree(A).query(B)
    return bool(d.max() <= tol and d2.max() <= tol)


def patch_match(S: PointSet, S2: PointSet, K: float, eps: float, tol: float = 1e-9) -> bool:
    """True iff (v + S) and S2 agree on the ball B_K for some |v| < eps."""
    A, B = S.physical, S2.physical
    target = _restrict(B, K)
    if len(target) == 0:
        cands = [np.zeros(A.shape[1])]
    else:
        p = target[np.argmin(np.linalg.norm(target, axis=1))]
        near = A[np.linalg.norm(A - p, axis=1) < eps]
        cands = [p - a for a in near]
    for v in cands:
        if np.linalg.norm(v) < eps and _same_set(_restrict(A + v, K), target, tol):
            return True
    return False


def patch_distance(S: PointSet, S2: PointSet, schedule=(1, 2, 4, 8, 16, 32, 64, 128, 256)) -> float:
    """Proximity score: 1/K for the largest K on the schedule with a match at eps = 1/K."""
    best = None
    for K in schedule:
        if patch_match(S, S2, K, 1 / K):
            best = K
        else:
            break
    return 1.0 if best is None else 1 / best


@dataclass(frozen=True)
class TorusPoint:
    """(u, v) in (R^d x G) / L~, reduced to the fundamental parallelepiped of
    the embedding basis (Euclidean) or to u in [0, 1)^d (p-adic)."""

    u: tuple
    v: tuple

    @classmethod
    def reduce(cls, scheme: CutProjectScheme, u, v, depth: int = 32) -> TorusPoint:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if scheme.internal.is_padic:
            n = np.floor(u).astype(np.int64)
            mod = scheme.internal.p ** depth
            return cls(tuple(u - n), tuple(int(x - m) % mod for x, m in zip(v, n)))
        E = scheme.embedding_matrix()
        x = np.concatenate([u, np.atleast_1d(np.asarray(v, dtype=float))])
        c = np.linalg.solve(E.T, x)
        c = c - np.floor(c + 1e-12)
        y = c @ E
        return cls(tuple(y[: scheme.d]), tuple(y[scheme.d:]))


@dataclass
class BetaResult:
    lo: object
    hi: object
    diameter: object
    window: Window | None = None

    @property
    def center(self):
        if self.lo is None:
            return None
        return (self.lo + self.hi) / 2


def beta_map(ps: PointSet, scheme: CutProjectScheme, window: Window) -> BetaResult:
    """The intersection of W - x* over the sample; shrinks to the torus point."""
    if len(ps) == 0:
        raise ValueError("beta map needs a nonempty patch")
    if isinstance(window, Interval):
        if window.exact and scheme.is_exact:
            stars = [scheme.star_exact(c)[0] for c in ps.coords]
            lo = window.a - min(stars)
            hi = window.b - max(stars)
        else:
            s = ps.internal[:, 0]
            lo, hi = float(window.a) - s.min(), float(window.b) - s.max()
        if hi < lo:
            raise ValueError("empty intersection: sample inconsistent with the window")
        return BetaResult(lo, hi, hi - lo)
    if isinstance(window, Box):
        lo = np.array(window.lo) - ps.internal.min(axis=0)
        hi = np.array(window.hi) - ps.internal.max(axis=0)
        if np.any(hi < lo):
            raise ValueError("empty intersection: sample inconsistent with the window")
        return BetaResult(lo, hi, float(np.linalg.norm(hi - lo)))
    if isinstance(window, CosetUnion):
        cur = list(window.cosets)
        p = window.p
        for x in np.unique(np.asarray(ps.internal, dtype=np.int64), axis=0):
            shifted = [(tuple(a - int(xi) for a, xi in zip(rep, x)), k) for rep, k in window.cosets]
            nxt = []
            for r1, k1 in cur:
                for r2, k2 in shifted:
                    k = min(k1, k2)
                    if all((a - b) % p ** k == 0 for a, b in zip(r1, r2)):
                        nxt.append((r1, k1) if k1 >= k2 else (r2, k2))
            if not nxt:
                raise ValueError("empty intersection: sample inconsistent with the window")
            cur = list(CosetUnion(p, window.m, tuple(nxt)).cosets)
        res = CosetUnion(p, window.m, tuple(cur))
        diam = max(Fraction(1, p ** k) for _, k in res.cosets)
        for i, (r1, _) in enumerate(res.cosets):
            for r2, _ in res.cosets[i + 1:]:
                nu = min(_val(a - b, p) for a, b in zip(r1, r2))
                diam = max(diam, Fraction(1, p ** nu))
        return BetaResult(None, None, diam, res)
    raise UnsupportedError(f"beta map not implemented for {type(window).__name__}")


def _val(n: int, p: int) -> float:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
