"""Windows in internal space: membership, Haar volume, indicator transforms,
genericity scans and the inflation-admissible set W_Q."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy import linalg, special
from scipy.spatial import ConvexHull, Delaunay

from .exact import Golden, PAdicApprox, padic_valuation, parse_golden

# relative tolerance for float-only boundary decisions
EPS = 1e-12


class Membership(enum.IntEnum):
    OUTSIDE = -1
    BOUNDARY = 0
    INSIDE = 1


class IncompatibleError(ValueError):
    """int(W_Q) is empty: the similarity is not compatible with the window."""


def _exact(x):
    """Golden for exact inputs (int, Fraction, Golden, str); None for floats."""
    if isinstance(x, Golden):
        return x
    if isinstance(x, (int, Fraction, np.integer)):
        return Golden(int(x) if isinstance(x, np.integer) else x)
    if isinstance(x, str):
        return parse_golden(x)
    return None


def _is_exact_point(u) -> bool:
    return isinstance(u, (Golden, int, Fraction, np.integer))


class Window:
    """Base class.  Subclasses set ``dim`` and ``padic`` (a prime or None)."""

    dim: int = 1
    padic: int | None = None

    def contains(self, u) -> Membership:
        raise NotImplementedError

    def classify(self, U) -> np.ndarray:
        """Vectorized float membership codes (-1, 0, 1) for an (N, dim) array."""
        U = np.asarray(U, dtype=float).reshape(-1, self.dim)
        return np.array([int(self.contains(tuple(u))) for u in U], dtype=np.int8)

    def haar_volume(self):
        raise NotImplementedError

    def indicator_ft(self, xi):
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def translate(self, v) -> Window:
        raise NotImplementedError

    @property
    def is_regular(self) -> bool:
        # all supported variants have boundary of Haar measure zero
        return True

    def _check_dim(self, u):
        n = 1 if np.ndim(u) == 0 else len(u)
        if n != self.dim:
            raise ValueError(f"point of dimension {n} given to a {self.dim}-dimensional window")


@dataclass(frozen=True)
class Interval(Window):
    """Closed interval [a, b]; endpoints exact (Golden) or float."""

    a: object
    b: object
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        ea, eb = _exact(self.a), _exact(self.b)
        if ea is not None and eb is not None:
            object.__setattr__(self, "a", ea)
            object.__setattr__(self, "b", eb)
        if not float(self.a) < float(self.b) and not (ea is not None and eb is not None and ea < eb):
            raise ValueError("interval must have a < b (W1: closure of a nonempty interior)")

    @property
    def exact(self) -> bool:
        return isinstance(self.a, Golden) and isinstance(self.b, Golden)

    @property
    def length(self):
        return self.b - self.a if self.exact else float(self.b) - float(self.a)

    def _tol(self):
        return EPS * max(1.0, abs(float(self.a)), abs(float(self.b)))

    def contains(self, u) -> Membership:
        if isinstance(u, (tuple, list, np.ndarray)):
            self._check_dim(u)
            u = u[0]
        if self.exact and _is_exact_point(u):
            u = Golden.coerce(u)
            if u == self.a or u == self.b:
                return Membership.BOUNDARY
            return Membership.INSIDE if self.a < u < self.b else Membership.OUTSIDE
        x, tol = float(u), self._tol()
        a, b = float(self.a), float(self.b)
        if abs(x - a) <= tol or abs(x - b) <= tol:
            return Membership.BOUNDARY
        return Membership.INSIDE if a < x < b else Membership.OUTSIDE

    def classify(self, U) -> np.ndarray:
        x = np.asarray(U, dtype=float).reshape(-1)
        a, b, tol = float(self.a), float(self.b), self._tol()
        out = np.where((x > a) & (x < b), 1, -1).astype(np.int8)
        out[(np.abs(x - a) <= tol) | (np.abs(x - b) <= tol)] = 0
        return out

    def haar_volume(self):
        return self.length

    def indicator_ft(self, s):
        """Integral of exp(-2 pi i s u) over [a, b]."""
        s = np.asarray(s, dtype=float)
        a, b = float(self.a), float(self.b)
        ell = b - a
        return ell * np.exp(-1j * np.pi * s * (a + b)) * np.sinc(s * ell)

    def bounding_box(self):
        return np.array([float(self.a)]), np.array([float(self.b)])

    def translate(self, v) -> Interval:
        if isinstance(v, (tuple, list, np.ndarray)):
            v = v[0]
        if self.exact and _is_exact_point(v):
            return Interval(self.a + v, self.b + v)
        return Interval(float(self.a) + float(v), float(self.b) + float(v))

    def to_json(self) -> dict:
        from .exact import format_golden
        enc = (lambda x: format_golden(x)) if self.exact else float
        return {"kind": "interval", "a": enc(self.a), "b": enc(self.b)}


@dataclass(frozen=True)
class Box(Window):
    """Axis-parallel box, product of closed intervals (float endpoints)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if len(lo) != len(hi) or not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def classify(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float).reshape(-1, self.dim)
        lo, hi = np.array(self.lo), np.array(self.hi)
        tol = EPS * max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
        inside = np.all((U > lo + tol) & (U < hi - tol), axis=1)
        outside = np.any((U < lo - tol) | (U > hi + tol), axis=1)
        out = np.zeros(len(U), dtype=np.int8)
        out[inside] = 1
        out[outside] = -1
        return out

    def contains(self, u) -> Membership:
        self._check_dim(u)
        return Membership(int(self.classify([u])[0]))

    def haar_volume(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def indicator_ft(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.ones(len(xi), dtype=complex)
        for j, (a, b) in enumerate(zip(self.lo, self.hi)):
            out *= Interval(a, b).indicator_ft(xi[:, j])
        return out if np.ndim(xi) > 1 and len(out) > 1 else out[0]

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def translate(self, v) -> Box:
        v = np.asarray(v, dtype=float)
        return Box(tuple(np.add(self.lo, v)), tuple(np.add(self.hi, v)))

    def to_json(self) -> dict:
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


def _simplex_ft(verts: np.ndarray, xi: np.ndarray) -> complex:
    """Exact integral of exp(-2 pi i xi.x) over a simplex.

    Uses  int_S exp(<z, x>) dx = n! vol(S) * exp[t_0, ..., t_n]  (divided
    difference of exp at t_j = <z, v_j>), evaluated stably as the corner entry
    of expm of a bidiagonal matrix; coincident nodes need no special casing.
    """
    n = verts.shape[1]
    vol = abs(np.linalg.det(verts[1:] - verts[0])) / math.factorial(n)
    t = -2j * np.pi * (verts @ xi)
    M = np.diag(t) + np.diag(np.ones(n), 1)
    return math.factorial(n) * vol * linalg.expm(M)[0, n]


@dataclass(frozen=True, eq=False)
class Polytope(Window):
    """Convex hull of a vertex list in R^n (n >= 1), full-dimensional."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", V)
        if V.shape[1] == 1:
            if np.ptp(V) <= 0:
                raise ValueError("degenerate polytope")
            return
        try:
            self._hull
        except Exception as exc:  # qhull raises on flat input
            raise ValueError(f"polytope is not full-dimensional: {exc}") from None
        if self._hull.volume <= 0:
            raise ValueError("polytope is not full-dimensional")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def _hull(self):
        return ConvexHull(self.vertices)

    @cached_property
    def _simplices(self):
        hv = self.vertices[self._hull.vertices]
        tri = Delaunay(hv)
        return [hv[s] for s in tri.simplices]

    def classify(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float).reshape(-1, self.dim)
        if self.dim == 1:
            return Interval(float(self.vertices.min()), float(self.vertices.max())).classify(U)
        eq = self._hull.equations  # normal . x + offset <= 0 inside
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        s = U @ eq[:, :-1].T + eq[:, -1]
        tol = EPS * scale
        out = np.zeros(len(U), dtype=np.int8)
        out[np.all(s < -tol, axis=1)] = 1
        out[np.any(s > tol, axis=1)] = -1
        return out

    def contains(self, u) -> Membership:
        self._check_dim(u)
        return Membership(int(self.classify([u])[0]))

    def haar_volume(self):
        if self.dim == 1:
            return float(np.ptp(self.vertices))
        return float(self._hull.volume)

    def indicator_ft(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.dim == 1:
            return Interval(float(self.vertices.min()), float(self.vertices.max())).indicator_ft(xi)
        single = xi.ndim == 1
        XI = np.atleast_2d(xi)
        out = np.array([sum(_simplex_ft(S, x) for S in self._simplices) for x in XI])
        return out[0] if single else out

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def translate(self, v) -> Polytope:
        return Polytope(self.vertices + np.asarray(v, dtype=float))

    def to_json(self) -> dict:
        return {"kind": "polytope", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(Window):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def classify(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float).reshape(-1, self.dim)
        r = np.linalg.norm(U - self.center, axis=1)
        tol = EPS * max(1.0, self.radius)
        out = np.where(r < self.radius, 1, -1).astype(np.int8)
        out[np.abs(r - self.radius) <= tol] = 0
        return out

    def contains(self, u) -> Membership:
        self._check_dim(u)
        return Membership(int(self.classify([u])[0]))

    def haar_volume(self):
        n = self.dim
        return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.radius ** n

    def indicator_ft(self, xi):
        """Closed form (r/|xi|)^(n/2) J_{n/2}(2 pi r |xi|) times the centre phase."""
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim <= 1
        XI = xi.reshape(-1, self.dim)
        rho = np.linalg.norm(XI, axis=1)
        n, r = self.dim, self.radius
        out = np.full(len(XI), self.haar_volume(), dtype=complex)
        nz = rho > 1e-300
        out[nz] = (r / rho[nz]) ** (n / 2) * special.jv(n / 2, 2 * np.pi * r * rho[nz])
        out *= np.exp(-2j * np.pi * XI @ self.center)
        return out[0] if single else out

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def translate(self, v) -> Ball:
        return Ball(self.center + np.asarray(v, dtype=float), self.radius)

    def to_json(self) -> dict:
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


class EmptyWindow(Window):
    """Degenerate empty window; violates W1 and exists only so empty model
    sets can be requested explicitly."""

    def __init__(self, dim: int = 1, padic: int | None = None):
        self.dim = dim
        self.padic = padic

    def contains(self, u) -> Membership:
        return Membership.OUTSIDE

    def classify(self, U) -> np.ndarray:
        return np.full(len(np.asarray(U).reshape(-1, self.dim)), -1, dtype=np.int8)

    def haar_volume(self):
        return 0

    def indicator_ft(self, xi):
        return 0j

    def bounding_box(self):
        return np.zeros(self.dim), np.zeros(self.dim)

    def translate(self, v):
        return self

    @property
    def is_regular(self) -> bool:
        return False

    def to_json(self) -> dict:
        out = {"kind": "empty", "dim": self.dim}
        if self.padic:
            out["p"] = self.padic
        return out


# ---------------------------------------------------------------------------
# p-adic coset unions

def _as_int_vector(u) -> tuple[int, ...]:
    out = []
    for x in (u if isinstance(u, (tuple, list, np.ndarray)) else (u,)):
        out.append(int(x) if not isinstance(x, PAdicApprox) else int(x))
    return tuple(out)


def _padic_int(x: Fraction, p: int, depth: int) -> int:
    """Residue of a p-integral rational modulo p^depth."""
    x = Fraction(x)
    mod = p ** depth
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not a {p}-adic integer")
    return x.numerator * pow(x.denominator, -1, mod) % mod


@dataclass(frozen=True, eq=False)
class CosetUnion(Window):
    """Finite union of cosets a + p^k Z_p^m, canonicalized at construction.

    ``limit`` optionally records the point the (conceptually infinite) union
    accumulates at; it is the only boundary point, and lattice points congruent
    to it modulo p^max_k are reported as BOUNDARY.
    """

    p: int
    m: int
    cosets: tuple
    limit: tuple | None = None

    def __post_init__(self):
        if not self.cosets:
            raise ValueError("coset union needs at least one coset (W1)")
        canon = {}
        for rep, k in self.cosets:
            rep = tuple(int(r) % self.p ** k for r in rep)
            if len(rep) != self.m or k < 0:
                raise ValueError(f"bad coset {rep}, k={k}")
            canon[(rep, int(k))] = None
        ordered = sorted(canon, key=lambda c: (c[1], c[0]))
        kept = []
        for rep, k in ordered:
            if any(k2 <= k and all((a - b) % self.p ** k2 == 0 for a, b in zip(rep, r2))
                   for r2, k2 in kept):
                continue
            kept.append((rep, k))
        object.__setattr__(self, "cosets", tuple(kept))
        if self.limit is not None:
            object.__setattr__(self, "limit", tuple(Fraction(c) for c in self.limit))

    @property
    def dim(self) -> int:
        return self.m

    @property
    def padic(self) -> int:
        return self.p

    @property
    def depth(self) -> int:
        return max(k for _, k in self.cosets)

    def _in_union(self, u: tuple[int, ...]) -> bool:
        return any(all((x - a) % self.p ** k == 0 for x, a in zip(u, rep)) for rep, k in self.cosets)

    def contains(self, u) -> Membership:
        self._check_dim(u)
        u = _as_int_vector(u)
        if self.limit is not None:
            K = self.depth
            if all(x % self.p ** K == _padic_int(c, self.p, K) for x, c in zip(u, self.limit)):
                return Membership.BOUNDARY
        return Membership.INSIDE if self._in_union(u) else Membership.OUTSIDE

    def classify(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=np.int64).reshape(-1, self.m)
        hit = np.zeros(len(U), dtype=bool)
        for rep, k in self.cosets:
            mod = self.p ** k
            hit |= np.all((U - np.array(rep)) % mod == 0, axis=1)
        out = np.where(hit, 1, -1).astype(np.int8)
        if self.limit is not None:
            K = self.depth
            cr = np.array([_padic_int(c, self.p, K) for c in self.limit])
            out[np.all(U % self.p ** K == cr, axis=1)] = 0
        return out

    def haar_volume(self) -> Fraction:
        return sum((Fraction(1, self.p ** (self.m * k)) for _, k in self.cosets), Fraction(0))

    def indicator_ft(self, xi):
        """Sum over cosets of p^{-mk} e^{2 pi i {xi.a}} when p^k xi is integral.

        ``xi`` is a vector of rationals with p-power denominators, read mod 1.
        """
        xi = tuple(Fraction(x) for x in (xi if isinstance(xi, (tuple, list)) else (xi,)))
        if len(xi) != self.m:
            raise ValueError("character dimension mismatch")
        total = 0j
        for rep, k in self.cosets:
            if all((x * self.p ** k).denominator == 1 for x in xi):
                phase = sum((x * a for x, a in zip(xi, rep)), Fraction(0)) % 1
                total += np.exp(2j * np.pi * float(phase)) / self.p ** (self.m * k)
        return total

    def bounding_box(self):
        return np.zeros(self.m), np.ones(self.m)

    def translate(self, v) -> CosetUnion:
        v = _as_int_vector(v)
        lim = None if self.limit is None else tuple(c + x for c, x in zip(self.limit, v))
        return CosetUnion(self.p, self.m, tuple((tuple(a + x for a, x in zip(rep, v)), k)
                                                for rep, k in self.cosets), lim)

    def boundary_candidates(self) -> list[tuple[tuple[int, ...], int]]:
        """Residue classes (rep, level) that are only partially covered at the
        finest level where that can happen; the boundary of the infinite union
        lies inside them.  Found by subdividing only partial classes."""
        p, m = self.p, self.m
        found = []

        def status(rep, j):
            mod_j = p ** j
            for a, k in self.cosets:
                if k <= j and all((x - y) % p ** k == 0 for x, y in zip(rep, a)):
                    return "full"
            if any(k > j and all((x - y) % mod_j == 0 for x, y in zip(rep, a)) for a, k in self.cosets):
                return "partial"
            return "empty"

        def rec(rep, j):
            kids = []
            for digits in np.ndindex(*([p] * m)):
                child = tuple(r + d * p ** j for r, d in zip(rep, digits))
                if status(child, j + 1) == "partial":
                    kids.append(child)
            if not kids:
                found.append((rep, j))
            for child in kids:
                rec(child, j + 1)

        if status((0,) * m, 0) == "partial":
            rec((0,) * m, 0)
        return found

    def to_json(self) -> dict:
        out = {"kind": "coset_union", "p": self.p, "m": self.m,
               "cosets": [{"rep": list(r), "k": k} for r, k in self.cosets]}
        if self.limit is not None:
            out["limit"] = [str(c) for c in self.limit]
        return out


def padic_vector_distance(u, v, p: int, depth: int | None = None) -> Fraction:
    """Max-norm p-adic distance between integer/rational vectors (0 if equal)."""
    out = Fraction(0)
    for a, b in zip(u, v):
        diff = Fraction(a) - Fraction(b)
        if depth is not None:
            diff = Fraction(_padic_int(diff, p, depth)) if diff.denominator % p else diff
            if diff == 0 or padic_valuation(diff, p) >= depth:
                continue
        nu = padic_valuation(diff, p)
        if nu != math.inf:
            out = max(out, Fraction(1, p ** nu) if nu >= 0 else Fraction(p ** -nu))
    return out


# ---------------------------------------------------------------------------
# genericity and W_Q

@dataclass
class GenericityReport:
    search_radius: float
    is_generic: bool
    witnesses: list
    exact: bool

    def to_json(self) -> dict:
        return {"search_radius": self.search_radius, "is_generic": self.is_generic,
                "witnesses": [list(map(int, w)) for w in self.witnesses], "exact": self.exact}


def genericity_report(w: Window, scheme, R: float) -> GenericityReport:
    """Lattice points with |phys| <= R whose star lies on the boundary of w."""
    if isinstance(w, EmptyWindow):
        return GenericityReport(R, True, [], True)
    if scheme.internal.is_padic:
        pts = scheme.lattice_points(R)
        codes = w.classify(pts)
        wit = [tuple(int(x) for x in pts[i]) for i in np.flatnonzero(codes == 0)]
        if isinstance(w, CosetUnion) and w.limit is not None:
            # exact: boundary is {limit}; only an integral limit can be hit
            wit = [x for x in wit if all(Fraction(x_i) == c for x_i, c in zip(x, w.limit))]
        return GenericityReport(R, not wit, wit, True)
    lo, hi = w.bounding_box()
    center = (lo + hi) / 2
    rad = float(np.linalg.norm(hi - lo) / 2) * (1 + 1e-9) + 1e-12
    pts = scheme.lattice_points(R, int_center=center, int_radius=rad)
    exact = scheme.is_exact and isinstance(w, Interval) and w.exact
    wit = []
    if len(pts):
        codes = w.classify(scheme.star(pts))
        near = np.flatnonzero(codes == 0) if not exact else np.arange(len(pts))
        if exact:
            # only recheck points close to an endpoint
            st = scheme.star(pts)[:, 0]
            gap = np.minimum(np.abs(st - float(w.a)), np.abs(st - float(w.b)))
            near = np.flatnonzero(gap < 1e-6)
        for i in near:
            c = tuple(int(x) for x in pts[i])
            u = scheme.star_exact(c)[0] if exact else scheme.star(pts[i])[0]
            if w.contains(u if exact else tuple(np.atleast_1d(u))) == Membership.BOUNDARY:
                wit.append(c)
    return GenericityReport(R, not wit, wit, exact)


def window_Q(w: Window, qstar) -> Window:
    """W_Q = {u : Q* W + u subset of W} for intervals (scalar Q*) and balls.

    Raises ValueError if Q* is not contractive and IncompatibleError if the
    result has empty interior.
    """
    if isinstance(w, Interval):
        if np.ndim(qstar) != 0:
            raise ValueError("interval windows need a scalar Q*")
        exact = w.exact and _is_exact_point(qstar)
        q = Golden.coerce(qstar) if exact else float(qstar)
        if not abs(float(q)) < 1:
            raise ValueError(f"Q* = {float(q):.6g} is not contractive")
        a, b = (w.a, w.b) if exact else (float(w.a), float(w.b))
        qa, qb = q * a, q * b
        lo, hi = a - min(qa, qb), b - max(qa, qb)
        if not lo < hi:
            raise IncompatibleError("W_Q has empty interior")
        return Interval(lo, hi)
    if isinstance(w, Ball):
        Q = np.atleast_2d(np.asarray(qstar, dtype=float))
        if Q.shape == (1, 1):
            Q = Q[0, 0] * np.eye(w.dim)
        sigma = float(np.linalg.norm(Q, 2))
        if not sigma < 1:
            raise ValueError(f"Q* has operator norm {sigma:.6g}, not contractive")
        # exact for similarities; sufficient condition for general matrices
        return Ball(w.center - Q @ w.center, w.radius * (1 - sigma))
    raise NotImplementedError(f"W_Q is only implemented for intervals and balls, not {type(w).__name__}")


def window_from_json(obj: dict) -> Window:
    if not isinstance(obj, dict):
        raise ValueError("window descriptor must be a JSON object")
    try:
        return _window_from_json(obj)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed {obj.get('kind')!r} window descriptor: {exc!r}") from exc


def _window_from_json(obj: dict) -> Window:
    kind = obj.get("kind")
    if kind == "interval":
        a, b = obj["a"], obj["b"]
        conv = lambda x: parse_golden(x) if isinstance(x, str) else x
        return Interval(conv(a), conv(b))
    if kind == "box":
        return Box(tuple(obj["lo"]), tuple(obj["hi"]))
    if kind == "polytope":
        return Polytope(np.array(obj["vertices"], dtype=float))
    if kind == "ball":
        return Ball(np.array(obj["center"], dtype=float), obj["radius"])
    if kind == "coset_union":
        lim = obj.get("limit")
        return CosetUnion(int(obj["p"]), int(obj["m"]),
                          tuple((tuple(c["rep"]), int(c["k"])) for c in obj["cosets"]),
                          None if lim is None else tuple(Fraction(x) for x in lim))
    if kind == "empty":
        return EmptyWindow(int(obj.get("dim", 1)), obj.get("p"))
    raise ValueError(f"unknown window kind {kind!r}")
