"""Cut-and-project schemes: lattice, projections, star map, dual lattice.

Lattice points are always carried as integer coordinate vectors relative to
the scheme's basis; physical and internal images are computed on demand,
exactly (Golden arithmetic) where the scheme supports it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import TAU, TAU_CONJ, Golden, Icosian, icosian_generators, parse_golden
from .lattice import enumerate_ellipsoid, hnf_rows, int_det, integer_kernel


class UnsupportedError(ValueError):
    """The requested operation is not available for this scheme or window."""


@dataclass(frozen=True)
class InternalSpace:
    """Internal group G: R^dim (Lebesgue) or Z_p^dim (Haar, mu(Z_p^dim) = 1)."""

    kind: str
    dim: int
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "padic"):
            raise ValueError(f"unknown internal space kind {self.kind!r}")
        if self.kind == "padic" and self.p is None:
            raise ValueError("p-adic internal space needs a prime p")

    @property
    def is_padic(self) -> bool:
        return self.kind == "padic"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.p is not None:
            out["p"] = self.p
        return out


@dataclass(frozen=True, eq=False)
class CutProjectScheme:
    """A lattice L~ in R^d x G given by rank basis vectors.

    ``phys_basis`` holds the physical parts (rank x d).  For Euclidean G,
    ``int_basis`` holds the internal parts (rank x m); for p-adic G the
    lattice is Z^d embedded diagonally and ``int_basis`` is None.
    ``exact_phys`` / ``exact_int`` carry the same data as Golden numbers when
    the scheme is defined over Q(tau).
    """

    name: str
    d: int
    internal: InternalSpace
    phys_basis: np.ndarray
    int_basis: np.ndarray | None
    covolume: float
    exact_phys: tuple | None = None
    exact_int: tuple | None = None
    meta: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return self.phys_basis.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.exact_int is not None

    def physical(self, coords) -> np.ndarray:
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        return c @ self.phys_basis

    def star(self, coords) -> np.ndarray:
        """Internal images; float for Euclidean G, the integer vectors for p-adic G."""
        if self.internal.is_padic:
            return np.atleast_2d(np.asarray(coords, dtype=np.int64)).copy()
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        return c @ self.int_basis

    def _exact(self, rows, coords):
        coords = [int(c) for c in coords]
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} lattice coordinates, got {len(coords)}")
        dim = len(rows[0])
        out = [Golden(0)] * dim
        for ci, row in zip(coords, rows):
            if ci:
                out = [o + g * ci for o, g in zip(out, row)]
        return tuple(out)

    def star_exact(self, coords) -> tuple:
        if self.internal.is_padic:
            return tuple(int(c) for c in coords)
        if self.exact_int is None:
            raise UnsupportedError(f"scheme {self.name!r} has no exact star map")
        return self._exact(self.exact_int, coords)

    def physical_exact(self, coords) -> tuple:
        if self.exact_phys is None:
            raise UnsupportedError(f"scheme {self.name!r} has no exact physical map")
        return self._exact(self.exact_phys, coords)

    def embedding_matrix(self) -> np.ndarray:
        if self.internal.is_padic:
            raise UnsupportedError("p-adic schemes have no real embedding matrix")
        return np.hstack([self.phys_basis, self.int_basis])

    def lattice_points(self, R: float, center=None, int_center=None, int_radius=None,
                       budget: int = 5_000_000) -> np.ndarray:
        """Coordinates n with |phys(n) - center| <= R and |star(n) - int_center| <= int_radius.

        Float filter with a relative slack of 1e-9; callers decide boundary
        cases exactly.  For p-adic G the internal constraint is vacuous.
        """
        center = np.zeros(self.d) if center is None else np.asarray(center, dtype=float)
        if self.internal.is_padic:
            return _integer_ball(self.phys_basis, center, R)
        if int_radius is None:
            raise ValueError("Euclidean internal space needs an internal search radius")
        int_center = np.zeros(self.internal.dim) if int_center is None else np.asarray(int_center, float)
        R_ = max(R, 1e-12)
        rho = max(int_radius, 1e-12)
        B = np.hstack([self.phys_basis / R_, self.int_basis / rho])
        t = np.concatenate([center / R_, int_center / rho])
        cand = enumerate_ellipsoid(B, t, 2.0, budget=budget)
        if len(cand) == 0:
            return cand
        ph = cand @ self.phys_basis - center
        st = cand @ self.int_basis - int_center
        slack = 1 + 1e-9
        keep = (np.linalg.norm(ph, axis=1) <= R * slack + 1e-12) & \
               (np.linalg.norm(st, axis=1) <= int_radius * slack + 1e-12)
        return cand[keep]


def _integer_ball(basis, center, R) -> np.ndarray:
    d = basis.shape[0]
    lo = np.floor(center - R).astype(int)
    hi = np.ceil(center + R).astype(int)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = np.linalg.norm(grid - center, axis=1) <= R * (1 + 1e-12)
    return grid[keep].astype(np.int64)


def star_map(scheme: CutProjectScheme, coords):
    """The star image of one lattice point, exact when the scheme allows."""
    if scheme.internal.is_padic or scheme.is_exact:
        return scheme.star_exact(coords)
    return tuple(scheme.star(coords)[0])


# ---------------------------------------------------------------------------
# named schemes

def make_fibonacci_scheme() -> CutProjectScheme:
    """Z[tau] embedded as {(x, x')} in R x R; basis 1, tau."""
    return CutProjectScheme(
        name="fibonacci", d=1, internal=InternalSpace("euclidean", 1),
        phys_basis=np.array([[1.0], [TAU]]),
        int_basis=np.array([[1.0], [TAU_CONJ]]),
        covolume=math.sqrt(5.0),
        exact_phys=((Golden(1),), (Golden(0, 1),)),
        exact_int=((Golden(1),), (Golden(1, -1),)),
    )


# Eight unit icosians forming a Z-basis of the icosian ring (checked in tests).
ICOSIAN_BASIS = (
    ("1/2", "-1/2", "1/2", "1/2"),
    ("0", "-1/2", "-1/2+1/2*tau", "-1/2*tau"),
    ("1/2", "0", "1/2*tau", "-1/2+1/2*tau"),
    ("1/2-1/2*tau", "0", "-1/2", "-1/2*tau"),
    ("1/2*tau", "0", "1/2-1/2*tau", "1/2"),
    ("1/2", "-1/2+1/2*tau", "0", "-1/2*tau"),
    ("-1/2+1/2*tau", "-1/2*tau", "0", "-1/2"),
    ("1/2-1/2*tau", "-1/2", "-1/2*tau", "0"),
)


def icosian_basis() -> list[Icosian]:
    return [Icosian.from_components(*(parse_golden(c) for c in row)) for row in ICOSIAN_BASIS]


def _scheme_from_icosians(name, gens, phys_axes=None, int_axes=None, meta=None):
    """Scheme whose lattice is the Z-span of ``gens`` embedded as x -> (x, x*).

    phys_axes / int_axes optionally project the quaternion images onto an
    orthonormal frame (used for the planar restriction).
    """
    phys_exact = [g.components for g in gens]
    int_exact = [g.star().components for g in gens]
    phys = np.array([[float(c) for c in row] for row in phys_exact])
    intl = np.array([[float(c) for c in row] for row in int_exact])
    if phys_axes is None:
        keep = [i for i in range(4) if any(row[i] for row in phys_exact + int_exact)]
        phys, intl = phys[:, keep], intl[:, keep]
        ex_p = tuple(tuple(row[i] for i in keep) for row in phys_exact)
        ex_i = tuple(tuple(row[i] for i in keep) for row in int_exact)
    else:
        phys, intl = phys @ np.asarray(phys_axes).T, intl @ np.asarray(int_axes).T
        ex_p = ex_i = None
    emb = np.hstack([phys, intl])
    m = dict(meta or {})
    m["generators"] = tuple(gens)
    return CutProjectScheme(
        name=name, d=phys.shape[1], internal=InternalSpace("euclidean", intl.shape[1]),
        phys_basis=phys, int_basis=intl, covolume=abs(float(np.linalg.det(emb))),
        exact_phys=ex_p, exact_int=ex_i if ex_p is not None else None, meta=m,
    )


def make_icosian_scheme() -> CutProjectScheme:
    """The icosian ring in R^4 x R^4 via x -> (x, x*): rank 8, d = 4."""
    return _scheme_from_icosians("icosian", icosian_basis())


def _combine(gens, coeffs) -> Icosian:
    q = Icosian((0,) * 8)
    for c, g in zip(coeffs, gens):
        if c:
            q = q + Icosian(tuple(c * x for x in g.v))
    return q


def five_fold_axes() -> list[tuple[Golden, Golden, Golden]]:
    """Pure parts of the unit icosians with real part tau/2 (rotations by 2pi/5)."""
    half_tau = Golden(0, Fraction(1, 2))
    return [g.components[1:] for g in icosian_generators() if g.components[0] == half_tau]


def _orthonormal_complement(axis) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    trial = np.eye(3)[np.argmin(np.abs(a))]
    e1 = trial - (trial @ a) * a
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return np.vstack([e1, e2])


def restrict_to_pure_quaternions(scheme: CutProjectScheme, axis=None) -> CutProjectScheme:
    """Rank-6 sublattice with zero real part (d = 3); with ``axis`` the rank-4
    sublattice orthogonal to that pure quaternion (d = 2).

    ``axis`` is a triple of Golden numbers (e.g. an entry of five_fold_axes()).
    """
    gens = list(scheme.meta.get("generators") or [])
    if scheme.name != "icosian" or len(gens) != 8:
        raise ValueError("restriction needs the icosian scheme")
    # real-part numerator (a, b) as two integer forms on Z^8
    K = integer_kernel([[g.v[0] for g in gens], [g.v[1] for g in gens]])
    pure = [_combine(gens, row) for row in K]
    if axis is None:
        return _scheme_from_icosians("h3", pure, meta={"parent": "icosian"})
    axis = tuple(Golden.coerce(parse_golden(a) if isinstance(a, str) else a) for a in axis)

    def dot_forms(q):
        comps = q.components[1:]
        s = Golden(0)
        for c, a in zip(comps, axis):
            s = s + c * a
        return s

    rows_a, rows_b = [], []
    for q in pure:
        s = dot_forms(q) * 4  # clear the halves from both factors
        rows_a.append(int(s.a))
        rows_b.append(int(s.b))
    K2 = integer_kernel([rows_a, rows_b])
    planar = [_combine(pure, row) for row in K2]
    ax = np.array([float(a) for a in axis])
    ax_star = np.array([float(Golden.coerce(a).conj()) for a in axis])
    phys_axes = np.hstack([np.zeros((2, 1)), _orthonormal_complement(ax)])
    int_axes = np.hstack([np.zeros((2, 1)), _orthonormal_complement(ax_star)])
    return _scheme_from_icosians("h2", planar, phys_axes, int_axes,
                                 meta={"parent": "icosian", "axis": axis})


def make_robinson_scheme() -> CutProjectScheme:
    """Z^2 embedded diagonally in R^2 x Z_2^2."""
    return CutProjectScheme(
        name="robinson", d=2, internal=InternalSpace("padic", 2, p=2),
        phys_basis=np.eye(2), int_basis=None, covolume=1.0,
        exact_phys=((1, 0), (0, 1)),
    )


def make_custom_scheme(d: int, internal: InternalSpace, basis_rows, name="custom") -> CutProjectScheme:
    """Scheme from rows [phys..., internal...] of Golden/rational entries or floats."""
    rows = list(basis_rows)
    if internal.is_padic:
        arr = np.array([[float(x) for x in r] for r in rows])
        if arr.shape != (d, d) or not np.allclose(arr, np.eye(d)):
            raise ValueError("p-adic custom schemes must use the diagonal embedding of Z^d")
        return CutProjectScheme(name=name, d=d, internal=internal, phys_basis=np.eye(d),
                                int_basis=None, covolume=1.0)
    m = internal.dim
    try:
        exact = [[x if isinstance(x, Golden) else parse_golden(x) for x in r] for r in rows]
    except (TypeError, ValueError):
        exact = None
    arr = np.array([[float(x) for x in r] for r in (exact or rows)])
    if arr.shape[1] != d + m:
        raise ValueError(f"basis rows need {d + m} entries, got {arr.shape[1]}")
    if arr.shape[0] != d + m:
        raise ValueError("basis must be square: rank = d + internal dim")
    cov = abs(float(np.linalg.det(arr)))
    if cov < 1e-12:
        raise ValueError("basis is degenerate")
    return CutProjectScheme(
        name=name, d=d, internal=internal, phys_basis=arr[:, :d], int_basis=arr[:, d:],
        covolume=cov,
        exact_phys=tuple(tuple(r[:d]) for r in exact) if exact else None,
        exact_int=tuple(tuple(r[d:]) for r in exact) if exact else None,
    )


BUILTIN_SCHEMES = ("fibonacci", "icosian", "h3", "h2", "robinson")


def builtin_scheme(name: str) -> CutProjectScheme:
    if name == "fibonacci":
        return make_fibonacci_scheme()
    if name == "icosian":
        return make_icosian_scheme()
    if name == "h3":
        return restrict_to_pure_quaternions(make_icosian_scheme())
    if name == "h2":
        return restrict_to_pure_quaternions(make_icosian_scheme(), axis=five_fold_axes()[0])
    if name == "robinson":
        return make_robinson_scheme()
    raise ValueError(f"unknown builtin scheme {name!r}; choose from {BUILTIN_SCHEMES}")


# ---------------------------------------------------------------------------
# dual lattice

@dataclass(frozen=True, eq=False)
class DualLattice:
    """Rows pair integrally with the embedding basis: <k_i, b_j> = delta_ij."""

    basis: np.ndarray
    d: int
    exact: tuple | None = None

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def physical(self, coords) -> np.ndarray:
        return np.atleast_2d(np.asarray(coords, dtype=float)) @ self.basis[:, : self.d]

    def internal(self, coords) -> np.ndarray:
        return np.atleast_2d(np.asarray(coords, dtype=float)) @ self.basis[:, self.d:]


def _golden_inverse(M):
    n = len(M)
    A = [list(row) + [Golden(1 if i == j else 0) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c])
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def dual_lattice(scheme: CutProjectScheme) -> DualLattice:
    """Inverse transpose of the embedding basis (Euclidean internal space only)."""
    if scheme.internal.is_padic:
        raise UnsupportedError("dual lattice of a p-adic scheme is not a real lattice; "
                               "use the dyadic character route in diffract")
    E = scheme.embedding_matrix()
    if E.shape[0] != E.shape[1]:
        raise UnsupportedError("embedding basis is not square")
    basis = np.linalg.inv(E).T
    exact = None
    if scheme.exact_phys is not None and scheme.exact_int is not None:
        M = [list(p) + list(q) for p, q in zip(scheme.exact_phys, scheme.exact_int)]
        inv = _golden_inverse([[Golden.coerce(x) for x in row] for row in M])
        exact = tuple(tuple(inv[j][i] for j in range(len(inv))) for i in range(len(inv)))
    return DualLattice(basis=basis, d=scheme.d, exact=exact)


# ---------------------------------------------------------------------------
# sample checks of the scheme axioms

def check_injective(scheme: CutProjectScheme, bound: int = 20, tol: float = 1e-9) -> bool:
    """Physical images of all coordinates in [-bound, bound]^rank are pairwise distinct."""
    axes = [np.arange(-bound, bound + 1)] * scheme.rank
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, scheme.rank)
    ph = scheme.physical(grid)
    if scheme.is_exact and scheme.d == 1:
        # exact: a + b*tau collisions only if coordinates coincide
        keys = {scheme.physical_exact(c) for c in map(tuple, grid)}
        return len(keys) == len(grid)
    order = np.lexsort(ph.T[::-1])
    diffs = np.linalg.norm(np.diff(ph[order], axis=0), axis=1)
    if np.all(diffs > tol):
        return True
    from scipy.spatial import cKDTree
    return len(cKDTree(ph).query_pairs(tol)) == 0


def density_cover_radius(scheme: CutProjectScheme, lo, hi, cells: int = 20,
                         R_start: float = 1.0, R_max: float = 1e4):
    """Smallest R (by doubling) at which internal images of lattice points with
    |phys| <= R hit every cell of a cells^m mesh of the box [lo, hi].

    Returns the R found, or None if R_max is reached first.
    """
    if scheme.internal.is_padic:
        raise UnsupportedError("use residue classes for p-adic density checks")
    lo, hi = np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float))
    center = (lo + hi) / 2
    rad = float(np.linalg.norm(hi - lo) / 2)
    R = R_start
    while R <= R_max:
        pts = scheme.lattice_points(R, int_center=center, int_radius=rad)
        st = scheme.star(pts) if len(pts) else np.zeros((0, len(lo)))
        inside = np.all((st >= lo) & (st < hi), axis=1)
        idx = np.floor((st[inside] - lo) / (hi - lo) * cells).astype(int)
        if len({tuple(r) for r in idx}) == cells ** len(lo):
            return R
        R *= 2
    return None


def trace_form_gram(gens) -> list[list[int]]:
    """Gram matrix 2 * phi(<x, y>) with phi(p + q*tau) = p + q (the E8 scaling)."""
    out = []
    for a in gens:
        row = []
        for b in gens:
            s = Golden(0)
            for x, y in zip(a.components, b.components):
                s = s + x * y
            v = 2 * (s.a + s.b)
            if Fraction(v).denominator != 1:
                raise ArithmeticError("trace form is not integral on these generators")
            row.append(int(v))
        out.append(row)
    return out


def icosian_z_span_rank() -> int:
    return len(hnf_rows([g.v for g in icosian_generators()]))


def gram_determinant(gens) -> int:
    return int_det(trace_form_gram(gens))
