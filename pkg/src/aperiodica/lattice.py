"""Integer lattice utilities: Hermite normal form, integer kernels, and
enumeration of lattice points inside an ellipsoid (Fincke-Pohst)."""
from __future__ import annotations

import math

import numpy as np


class EnumerationBudgetError(RuntimeError):
    """Raised when an enumeration would visit more candidates than allowed."""


def hnf_rows(rows) -> list[list[int]]:
    """Row-style Hermite normal form; returns a basis of the Z-span of rows."""
    A = [list(map(int, r)) for r in rows if any(r)]
    if not A:
        return []
    ncols = len(A[0])
    basis = []
    r = 0
    for c in range(ncols):
        # gcd-reduce column c among rows r..end
        while True:
            nz = [i for i in range(r, len(A)) if A[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[piv] = A[piv], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < len(A) and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-x for x in A[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
            r += 1
            if r == len(A):
                break
    basis = [row for row in A[:r] if any(row)]
    return basis


def integer_kernel(M) -> list[list[int]]:
    """Basis (as rows) of {n in Z^k : M n = 0} for an integer matrix M (m x k)."""
    M = [list(map(int, r)) for r in M]
    k = len(M[0])
    # column operations on [M; I] tracked through the transpose
    cols = [[M[i][j] for i in range(len(M))] + [1 if t == j else 0 for t in range(k)] for j in range(k)]
    m = len(M)
    r = 0
    for i in range(m):
        while True:
            nz = [j for j in range(r, k) if cols[j][i] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda j: abs(cols[j][i]))
            cols[r], cols[piv] = cols[piv], cols[r]
            clean = True
            for j in range(r + 1, k):
                if cols[j][i]:
                    q = cols[j][i] // cols[r][i]
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[r])]
                    if cols[j][i]:
                        clean = False
            if clean:
                r += 1
                break
    return hnf_rows([c[m:] for c in cols[r:]])


def int_det(rows) -> int:
    """Exact determinant of a square integer matrix (Bareiss)."""
    A = [list(map(int, r)) for r in rows]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def solve_integer(basis_rows, v) -> list[int] | None:
    """Integer coefficients c with sum c_i basis_i = v, or None."""
    B = np.array(basis_rows, dtype=float)
    c, *_ = np.linalg.lstsq(B.T, np.asarray(v, dtype=float), rcond=None)
    ci = [int(round(x)) for x in c]
    check = [sum(ci[i] * basis_rows[i][j] for i in range(len(ci))) for j in range(len(v))]
    return ci if check == [int(x) for x in v] else None


def enumerate_ellipsoid(B, target, radius_sq: float, budget: int = 5_000_000) -> np.ndarray:
    """All integer n with |n @ B - target|^2 <= radius_sq.

    B is (rank, D) with full row rank.  Returns an (N, rank) int64 array.
    """
    B = np.asarray(B, dtype=float)
    rank = B.shape[0]
    target = np.asarray(target, dtype=float)
    G = B @ B.T
    # coordinates of the target's projection onto the row space
    y = np.linalg.solve(G, B @ target)
    resid = target - y @ B
    C = radius_sq - float(resid @ resid)
    if C < 0:
        return np.zeros((0, rank), dtype=np.int64)
    R = np.linalg.cholesky(G).T  # G = R^T R, R upper triangular
    vol = math.pi ** (rank / 2) / math.gamma(rank / 2 + 1) * C ** (rank / 2) / abs(np.prod(np.diag(R)))
    if vol > budget:
        raise EnumerationBudgetError(f"~{vol:.3g} candidates exceed budget {budget}")

    out: list[np.ndarray] = []
    n = np.zeros(rank, dtype=np.int64)
    diag = np.diag(R)
    eps = 1e-9 * max(1.0, C)

    def rec(i: int, remaining: float):
        # center of coordinate i given n[i+1:]
        s = 0.0
        for j in range(i + 1, rank):
            s += R[i, j] * (n[j] - y[j])
        c = y[i] - s / diag[i]
        half = math.sqrt(max(remaining, 0.0) + eps) / abs(diag[i])
        lo, hi = math.ceil(c - half), math.floor(c + half)
        if lo > hi:
            return
        if i == 0:
            vals = np.arange(lo, hi + 1, dtype=np.int64)
            block = np.tile(n, (len(vals), 1))
            block[:, 0] = vals
            out.append(block)
            return
        for v in range(lo, hi + 1):
            t = diag[i] * (v - c)
            n[i] = v
            rec(i - 1, remaining - t * t)
        n[i] = 0

    rec(rank - 1, C)
    if not out:
        return np.zeros((0, rank), dtype=np.int64)
    cand = np.concatenate(out)
    diff = cand @ B - target
    keep = np.einsum("ij,ij->i", diff, diff) <= radius_sq * (1 + 1e-12) + 1e-12
    return cand[keep]
