"""Finite samples of model sets and the point-set variants used for diffraction:
window translates, Robinson tile centres, visible lattice points, deformed,
weighted and randomly thinned sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .exact import Golden
from .scheme import CutProjectScheme, make_robinson_scheme
from .window import CosetUnion, EmptyWindow, Interval, Window

# float stars closer than this (relative) to a boundary are re-decided exactly
BOUNDARY_MARGIN = 1e-9


@dataclass(frozen=True)
class Region:
    """Physical sampling region: closed ball |x - center| <= size, or the
    half-open box center + [-size, size)^d."""

    kind: str
    size: float
    d: int
    center: tuple = None

    def __post_init__(self):
        if self.kind not in ("ball", "box"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.d)

    @property
    def volume(self) -> float:
        if self.kind == "box":
            return (2 * self.size) ** self.d
        return math.pi ** (self.d / 2) / math.gamma(self.d / 2 + 1) * self.size ** self.d

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.d) - np.asarray(self.center)
        if self.kind == "box":
            return np.all((X >= -self.size) & (X < self.size), axis=1)
        return np.linalg.norm(X, axis=1) <= self.size * (1 + 1e-12)

    def to_json(self) -> dict:
        return {"kind": self.kind, "size": self.size, "d": self.d, "center": list(self.center)}


@dataclass(eq=False)
class PointSet:
    """Points of a (translated) model set.  ``coords`` are lattice coordinates,
    ``physical`` the positions (including any translation), ``internal`` the
    star images (float for Euclidean G, integers for p-adic G)."""

    scheme: CutProjectScheme | None
    coords: np.ndarray
    physical: np.ndarray
    internal: np.ndarray
    region: Region
    window: Window | None = None
    weights: np.ndarray | None = None
    boundary: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.coords)
        if self.boundary is None:
            self.boundary = np.zeros(n, dtype=bool)

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def d(self) -> int:
        return self.region.d

    @property
    def density(self) -> float:
        return len(self) / self.region.volume

    def subset(self, mask) -> PointSet:
        mask = np.asarray(mask)
        return replace(self, coords=self.coords[mask], physical=self.physical[mask],
                       internal=self.internal[mask],
                       weights=None if self.weights is None else self.weights[mask],
                       boundary=self.boundary[mask], meta=dict(self.meta))

    def sorted(self) -> PointSet:
        order = np.lexsort(self.physical.T[::-1]) if len(self) else np.arange(0)
        return self.subset(order)

    def coord_set(self) -> set:
        return {tuple(int(x) for x in c) for c in self.coords}


def _empty_pointset(scheme, region, window) -> PointSet:
    rank = scheme.rank if scheme is not None else region.d
    m = scheme.internal.dim if scheme is not None else region.d
    return PointSet(scheme, np.zeros((0, rank), dtype=np.int64), np.zeros((0, region.d)),
                    np.zeros((0, m)), region, window)


def _exact_recheck(scheme, window, coords, codes, stars):
    """Re-decide points whose float star is within the margin of an endpoint."""
    if not (scheme.is_exact and isinstance(window, Interval) and window.exact):
        return codes
    tol = BOUNDARY_MARGIN * max(1.0, abs(float(window.a)), abs(float(window.b)))
    s = stars[:, 0]
    near = np.flatnonzero((np.abs(s - float(window.a)) <= tol) | (np.abs(s - float(window.b)) <= tol))
    codes = codes.copy()
    for i in near:
        codes[i] = int(window.contains(scheme.star_exact(coords[i])[0]))
    return codes


def enumerate_model_set(scheme: CutProjectScheme, window: Window, R: float, center=None,
                        budget: int = 5_000_000) -> PointSet:
    """All lattice points with |phys - center| <= R and star in W (boundary flagged)."""
    region = Region("ball", float(R), scheme.d, None if center is None else tuple(np.atleast_1d(center)))
    if window.dim != scheme.internal.dim:
        raise ValueError(f"window dimension {window.dim} does not match internal dimension "
                         f"{scheme.internal.dim}")
    if isinstance(window, EmptyWindow):
        return _empty_pointset(scheme, region, window)
    if scheme.internal.is_padic:
        coords = scheme.lattice_points(R, center=center)
        codes = window.classify(coords)
        stars = coords
    else:
        lo, hi = window.bounding_box()
        ic = (lo + hi) / 2
        irad = float(np.linalg.norm(hi - lo) / 2) * (1 + 1e-9) + 1e-12
        coords = scheme.lattice_points(R, center=center, int_center=ic, int_radius=irad, budget=budget)
        if len(coords) == 0:
            return _empty_pointset(scheme, region, window)
        stars = scheme.star(coords)
        codes = _exact_recheck(scheme, window, coords, window.classify(stars), stars)
    keep = codes >= 0
    coords = coords[keep]
    ps = PointSet(scheme, coords, scheme.physical(coords), np.asarray(stars)[keep], region, window,
                  boundary=codes[keep] == 0)
    return ps.sorted()


def translated_model_set(scheme: CutProjectScheme, window: Window, u, v, R: float) -> PointSet:
    """u + {x in L : x* in W - v}, restricted to |phys| <= R."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if scheme.internal.is_padic:
        shifted = window.translate(tuple(-int(x) for x in np.atleast_1d(v)))
    elif isinstance(v, (Golden, int, Fraction)):
        shifted = window.translate(-v)
    else:
        shifted = window.translate(-np.atleast_1d(np.asarray(v, dtype=float)))
    ps = enumerate_model_set(scheme, shifted, R, center=-u)
    ps.physical = ps.physical + u
    ps.region = Region("ball", float(R), scheme.d)
    ps.window = window
    ps.meta["translation"] = (u, v)
    return ps


# ---------------------------------------------------------------------------
# Robinson square tiling

@dataclass(frozen=True)
class RobinsonConfig:
    """Sign sequences alpha, beta (repeated periodically) and truncation depth K.

    The default alternating choice gives the limit point c = (1/3, -1/3),
    which is not in Z^2, so the window is generic.
    """

    alpha: tuple = (1, -1)
    beta: tuple = (-1, 1)
    K: int = 16

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("Robinson depth K must be at least 2")
        for s in (self.alpha, self.beta):
            if not s or any(x not in (1, -1) for x in s):
                raise ValueError("sign sequences must be nonempty over {+1, -1}")

    def a(self, i: int) -> int:
        return self.alpha[i % len(self.alpha)]

    def b(self, i: int) -> int:
        return self.beta[i % len(self.beta)]

    def c(self, k: int) -> tuple[int, int]:
        """c_1 = 0 and c_k = (sum_{i<=k-2} alpha_i 2^i, same for beta)."""
        if k < 1:
            raise ValueError("k >= 1")
        return (sum(self.a(i) << i for i in range(k - 1)),
                sum(self.b(i) << i for i in range(k - 1)))

    def limit(self) -> tuple[Fraction, Fraction]:
        """The 2-adic limit c of c_k, exact: periodic digits sum to A / (1 - 2^L)."""
        out = []
        for seq in (self.alpha, self.beta):
            L = len(seq)
            A = sum(s << i for i, s in enumerate(seq))
            out.append(Fraction(A, 1 - 2 ** L))
        return tuple(out)

    @property
    def generic(self) -> bool:
        return not all(c.denominator == 1 for c in self.limit())


def robinson_window(cfg: RobinsonConfig) -> CosetUnion:
    """Union of c_k + 2^k Z_2^2 for k = 1..K, with its limit point c recorded."""
    cosets = tuple((cfg.c(k), k) for k in range(1, cfg.K + 1))
    return CosetUnion(2, 2, cosets, limit=cfg.limit())


TILE_DENSITIES = {1: Fraction(1, 4), 2: Fraction(1, 12), 3: Fraction(1, 6),
                  4: Fraction(1, 6), 5: Fraction(1, 6), 6: Fraction(1, 6)}


def robinson_classify(X, Y, cfg: RobinsonConfig) -> tuple[np.ndarray, np.ndarray]:
    """Tile type (1..6) of each integer point and an 'undecided' mask.

    Types 1-3 come from coset descriptions: 2Z^2; the centres c_k + 2^k Z^2
    (k >= 2); and the edge crossings c_k + (+-2^{k-2}, +-2^{k-3}) (or swapped)
    mod 2^k.  Types 4-6 are geometric: on exactly one pattern-square edge but
    not its middle, at the middle, or on no edge.  Order-m squares are centred
    at c_{m+1} + 2^{m+1} Z^2 with half-side 2^{m-1}; orders m >= K are unseen,
    so points on their possible edge lines are undecided.
    """
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    K = cfg.K
    c = [None] + [cfg.c(k) for k in range(1, K + 1)]
    t1 = (X % 2 == 0) & (Y % 2 == 0)
    t2 = np.zeros(X.shape, dtype=bool)
    for k in range(2, K + 1):
        m = 1 << k
        t2 |= ((X - c[k][0]) % m == 0) & ((Y - c[k][1]) % m == 0)
    t3 = np.zeros(X.shape, dtype=bool)
    for k in range(3, K + 1):
        m = 1 << k
        for sx in (1, -1):
            for sy in (1, -1):
                for ox, oy in ((1 << (k - 2), 1 << (k - 3)), (1 << (k - 3), 1 << (k - 2))):
                    t3 |= ((X - c[k][0] - sx * ox) % m == 0) & ((Y - c[k][1] - sy * oy) % m == 0)
    n_edge = np.zeros(X.shape, dtype=np.int16)
    middle = np.zeros(X.shape, dtype=bool)
    for order in range(1, K):
        cen = c[order + 1]
        period, half = 1 << (order + 1), 1 << (order - 1)
        dx = (X - cen[0] + (1 << order)) % period - (1 << order)
        dy = (Y - cen[1] + (1 << order)) % period - (1 << order)
        on = np.maximum(np.abs(dx), np.abs(dy)) == half
        corner = (np.abs(dx) == half) & (np.abs(dy) == half)
        n_edge += on & ~corner
        middle |= on & ((dx == 0) | (dy == 0))
    undecided = ((X - c[K][0]) % (1 << (K - 1)) == 0) | ((Y - c[K][1]) % (1 << (K - 1)) == 0)
    types = np.full(X.shape, 6, dtype=np.int8)
    rest = ~(t1 | t2 | t3)
    types[rest & (n_edge == 1) & ~middle] = 4
    types[rest & (n_edge == 1) & middle] = 5
    types[t3] = 3
    types[t2] = 2
    types[t1] = 1
    return types, undecided


@dataclass
class TileClasses:
    classes: dict
    undecided: PointSet
    region: Region

    def counts(self) -> dict:
        return {t: len(ps) for t, ps in self.classes.items()}

    def densities(self) -> dict:
        """Class fractions among decided points."""
        total = sum(self.counts().values())
        return {t: n / total for t, n in self.counts().items()}


def robinson_tile_classes(cfg: RobinsonConfig, R: float, region: str = "box") -> TileClasses:
    """Split Z^2 in the box [-R, R)^2 (or ball |x| <= R) into the six tile types."""
    scheme = make_robinson_scheme()
    reg = Region(region, float(R), 2)
    lo, hi = int(math.floor(-R)), int(math.ceil(R))
    ax = np.arange(lo, hi + 1, dtype=np.int64)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[reg.contains(pts)]
    types, und = robinson_classify(pts[:, 0], pts[:, 1], cfg)

    def make(mask, t=None):
        c = pts[mask]
        ps = PointSet(scheme, c, c.astype(float), c.copy(), reg)
        if t is not None:
            ps.meta["tile_type"] = t
        return ps

    classes = {t: make((types == t) & ~und, t) for t in range(1, 7)}
    return TileClasses(classes, make(und), reg)


# ---------------------------------------------------------------------------
# visible lattice points

def visible_points(d: int, R: float) -> PointSet:
    """x in Z^d with 0 < |x| <= R and gcd of the coordinates equal to 1."""
    if d < 2:
        raise ValueError("visible points need dimension d >= 2")
    r = int(math.floor(R))
    ax = np.arange(-r, r + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.einsum("ij,ij->i", grid, grid) <= R * R
    grid = grid[keep]
    g = np.gcd.reduce(grid, axis=1)
    pts = grid[g == 1]
    reg = Region("ball", float(R), d)
    return PointSet(None, pts, pts.astype(float), pts.copy(), reg)


def find_empty_ball(r: float, search_radius: float, step: float = 0.25):
    """A centre y with |y| <= search_radius - r whose closed r-ball holds no
    visible point of Z^2, searched on a grid of the given step; None if absent.

    Grid nodes are first screened with the integer points that lie within r
    of every sub-offset of the cell; survivors are checked per offset.
    """
    S = int(math.ceil(search_radius)) + int(math.ceil(r)) + 1
    ax = np.arange(-S, S + 1, dtype=np.int64)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    visible = np.gcd(X, Y) == 1
    del X, Y
    n_sub = int(round(1 / step))
    span = int(math.ceil(r)) + 1
    rel = np.array([(a, b) for a in range(-span, span + 2) for b in range(-span, span + 2)])
    offsets = [np.array([i * step, j * step]) for i in range(n_sub) for j in range(n_sub)]
    feet = [rel[np.sum((rel - off) ** 2, axis=1) <= r * r + 1e-12] for off in offsets]
    core = set(map(tuple, feet[0])).intersection(*(map(tuple, f) for f in feet[1:]))
    fp = np.zeros((2 * span + 3, 2 * span + 3), dtype=np.int16)
    for a, b in core:
        fp[a + span + 1, b + span + 1] = 1
    hits = ndimage.correlate(visible.astype(np.int16), fp, mode="constant", cval=1)
    nodes = np.argwhere(hits == 0)
    nodes = nodes[np.linalg.norm(nodes - S, axis=1) <= search_radius - r + 2]
    best = None
    for off, foot in zip(offsets, feet):
        idx = nodes[:, None, :] + foot[None, :, :]
        inside = np.all((idx >= 0) & (idx <= 2 * S), axis=2).all(axis=1)
        idx, base = idx[inside], nodes[inside]
        empty = ~visible[idx[..., 0], idx[..., 1]].any(axis=1)
        centres = base[empty] - S + off
        if len(centres) == 0:
            continue
        norms = np.linalg.norm(centres, axis=1)
        ok = norms <= search_radius - r
        if np.any(ok):
            k = np.flatnonzero(ok)[np.argmin(norms[ok])]
            if best is None or norms[k] < np.linalg.norm(best):
                best = centres[k]
    return None if best is None else tuple(float(x) for x in best)


# ---------------------------------------------------------------------------
# deformed, weighted and stochastic variants

def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def point_uniforms(seed: int, coords: np.ndarray) -> np.ndarray:
    """One U[0,1) draw per point from a stream keyed by (seed, lattice coords),
    so results do not depend on point order or chunking (numpy SeedSequence)."""
    out = np.empty(len(coords))
    s = int(seed) & (2 ** 64 - 1)
    for i, c in enumerate(coords):
        ss = np.random.SeedSequence([s] + [_zigzag(int(x)) for x in c])
        out[i] = int(ss.generate_state(1, np.uint64)[0]) / 2.0 ** 64
    return out


def occupy_stochastic(ps: PointSet, p: float, seed: int) -> PointSet:
    """Keep each point independently with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("occupation probability must lie in [0, 1]")
    if p == 1:
        return ps.subset(np.ones(len(ps), dtype=bool))
    if p == 0 or len(ps) == 0:
        return ps.subset(np.zeros(len(ps), dtype=bool))
    out = ps.subset(point_uniforms(seed, ps.coords) < p)
    out.meta.update(occupancy=p, seed=seed)
    return out


def weight_comb(ps: PointSet, g) -> PointSet:
    """weights[i] = g(star(x_i)); g receives the (N, m) array of internal points."""
    w = np.asarray(g(ps.internal), dtype=complex).reshape(-1)
    if w.shape[0] != len(ps):
        raise ValueError("weight function returned the wrong number of values")
    out = ps.subset(np.ones(len(ps), dtype=bool))
    out.weights = w
    return out


def min_gap(X) -> float:
    X = np.asarray(X, dtype=float)
    if len(X) < 2:
        return math.inf
    if X.ndim == 1 or X.shape[1] == 1:
        return float(np.min(np.diff(np.sort(X.reshape(-1)))))
    d, _ = cKDTree(X).query(X, k=2)
    return float(d[:, 1].min())


def deform_set(ps: PointSet, g, check_bound: bool = True) -> PointSet:
    """Move each x by f(x) = g(x*); g maps (N, m) internal points to (N, d) shifts."""
    shift = np.asarray(g(ps.internal), dtype=float).reshape(len(ps), ps.d)
    if check_bound and len(ps) > 1:
        half_pack = min_gap(ps.physical) / 4
        if np.max(np.linalg.norm(shift, axis=1)) > half_pack * (1 + 1e-12):
            raise ValueError("displacement exceeds half the packing radius")
    moved = ps.physical + shift
    if min_gap(moved) < 1e-9:
        raise ValueError("deformation collides two points")
    out = ps.subset(np.ones(len(ps), dtype=bool))
    out.physical = moved
    out.meta["deformed"] = True
    return out


def poisson_points(density: float, R: float, d: int, seed: int) -> PointSet:
    """Homogeneous Poisson sample in the ball of radius R (a non-Meyer control)."""
    rng = np.random.default_rng(seed)
    reg = Region("ball", float(R), d)
    n = rng.poisson(density * reg.volume)
    dirs = rng.normal(size=(n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    X = dirs * R * rng.random(n)[:, None] ** (1 / d)
    return PointSet(None, np.arange(n)[:, None], X, np.zeros((n, 0)), reg)


def default_window(scheme: CutProjectScheme) -> Window:
    """Window used when none is given: a generic symmetric interval for the
    Fibonacci scheme, unit balls for the icosian family, the Robinson union."""
    from .window import Ball
    if scheme.name == "fibonacci":
        half = Golden(0, Fraction(1, 2))
        return Interval(-half, half)
    if scheme.name in ("icosian", "h3", "h2"):
        return Ball(np.zeros(scheme.internal.dim), 1.0)
    if scheme.name == "robinson":
        return robinson_window(RobinsonConfig())
    raise ValueError(f"scheme {scheme.name!r} has no default window; pass --window")
