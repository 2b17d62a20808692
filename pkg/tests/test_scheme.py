import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aperiodica.exact import Golden, golden_conjugate, icosian_generators
from aperiodica.lattice import enumerate_ellipsoid, hnf_rows, int_det, integer_kernel
from aperiodica.scheme import (InternalSpace, UnsupportedError, builtin_scheme, check_injective,
                               density_cover_radius, dual_lattice, five_fold_axes, gram_determinant,
                               icosian_z_span_rank, make_custom_scheme, make_fibonacci_scheme,
                               make_icosian_scheme, restrict_to_pure_quaternions, star_map,
                               trace_form_gram)

coef = st.integers(-10**4, 10**4)


def _root_count(gens, norm=2):
    """Vectors of the given norm, found by direct enumeration of the Gram form."""
    G = np.array(trace_form_gram(gens), dtype=float)
    L = np.linalg.cholesky(G)
    v = enumerate_ellipsoid(L, np.zeros(len(G)), norm + 1e-9)
    n = np.rint(np.einsum("ij,jk,ik->i", v, G, v)).astype(int)
    return int(np.sum(n == norm)), int(n[n > 0].min())


# -- star map ------------------------------------------------------------------

@given(coef, coef)
def test_fibonacci_star_is_conjugation(a, b):
    fib = make_fibonacci_scheme()
    assert star_map(fib, (a, b)) == (golden_conjugate(Golden(a, b)),)
    assert fib.physical_exact((a, b)) == (Golden(a, b),)
    assert fib.star([a, b])[0, 0] == pytest.approx(float(golden_conjugate(Golden(a, b))), abs=1e-8)


@given(coef, coef, coef, coef)
def test_star_is_additive(a, b, c, d):
    fib = make_fibonacci_scheme()
    s = lambda x: star_map(fib, x)[0]
    assert s((a + c, b + d)) == s((a, b)) + s((c, d))


@pytest.mark.parametrize("name", ["fibonacci", "icosian", "h3", "h2", "robinson"])
def test_star_of_zero(name):
    s = builtin_scheme(name)
    z = (0,) * s.rank
    assert all(float(x) == 0 for x in star_map(s, z))
    assert np.all(s.physical(z) == 0)


def test_icosian_star_additive_float():
    s = make_icosian_scheme()
    rng = np.random.default_rng(3)
    x, y = rng.integers(-5, 6, size=(2, 8))
    assert np.allclose(s.star(x + y), s.star(x) + s.star(y))
    assert np.allclose(s.star(x)[0], [float(v) for v in star_map(s, x)])


def test_robinson_star_is_diagonal(robinson):
    assert robinson.internal == InternalSpace("padic", 2, p=2)
    assert star_map(robinson, (3, 5)) == (3, 5)
    assert np.array_equal(robinson.physical([3, 5]), [[3.0, 5.0]])


# -- named schemes ---------------------------------------------------------------

def test_fibonacci_basics(fib):
    assert (fib.rank, fib.d) == (2, 1)
    assert fib.covolume == pytest.approx(abs(np.linalg.det(fib.embedding_matrix())))
    assert fib.covolume == pytest.approx(math.sqrt(5))
    assert fib.star([0, 1])[0, 0] == pytest.approx(-0.618034, abs=1e-6)


def test_icosian_ranks():
    s = make_icosian_scheme()
    assert (s.rank, s.d, s.internal.dim) == (8, 4, 4)
    assert icosian_z_span_rank() == 8
    # over Z[tau]: the real span of the units is 4-dimensional
    comps = np.array([g.to_float() for g in icosian_generators()])
    assert np.linalg.matrix_rank(comps) == 4
    # and the 8 Z-generators are the Z-span of all 120 units
    span = hnf_rows([g.v for g in icosian_generators()])
    assert abs(int_det(span)) == abs(int_det(hnf_rows([g.v for g in s.meta["generators"]])))


def test_icosian_gram_is_e8():
    gens = make_icosian_scheme().meta["generators"]
    G = trace_form_gram(gens)
    assert all(G[i][i] % 2 == 0 for i in range(8))
    assert gram_determinant(gens) == 1
    roots, minimum = _root_count(gens)
    assert (roots, minimum) == (240, 2)


def test_pure_restriction_is_d6():
    s = restrict_to_pure_quaternions(make_icosian_scheme())
    assert (s.rank, s.d) == (6, 3)
    gens = s.meta["generators"]
    assert all(g.components[0] == Golden(0) for g in gens)
    assert gram_determinant(gens) == 4
    assert _root_count(gens) == (60, 2)


def test_planar_restriction_is_a4():
    axis = five_fold_axes()[0]
    s = restrict_to_pure_quaternions(make_icosian_scheme(), axis=axis)
    assert (s.rank, s.d) == (4, 2)
    for g in s.meta["generators"]:
        dot = sum((c * a for c, a in zip(g.components[1:], axis)), Golden(0))
        assert dot == Golden(0)
    assert gram_determinant(s.meta["generators"]) == 5
    assert _root_count(s.meta["generators"]) == (20, 2)
    # six five-fold axes of the icosahedron, each with both orientations
    axes = five_fold_axes()
    assert len(axes) == 12
    assert sum(tuple(-a for a in ax) in axes for ax in axes) == 12


def test_restriction_needs_icosian(fib):
    with pytest.raises(ValueError):
        restrict_to_pure_quaternions(fib)


def test_integer_kernel_is_kernel():
    M = [[1, 2, 3, 4], [2, 4, 7, 1]]
    K = integer_kernel(M)
    assert len(K) == 2
    assert all(sum(a * b for a, b in zip(row, k)) == 0 for row in M for k in K)


# -- dual lattice ---------------------------------------------------------------

def test_z2_self_dual():
    s = make_custom_scheme(1, InternalSpace("euclidean", 1), [[1, 0], [0, 1]])
    D = dual_lattice(s)
    assert np.allclose(D.basis, np.eye(2))


def test_fibonacci_dual_exact(fib):
    D = dual_lattice(fib)
    t, tc = Golden(0, 1), Golden(1, -1)
    det = tc - t
    # inverse transpose of [[1, 1], [tau, tau']] written out by hand
    hand = ((tc / det, -t / det), (-Golden(1) / det, Golden(1) / det))
    assert D.exact == hand
    # entries lie in (1/sqrt5) Z[tau]: sqrt5 = 2 tau - 1
    sqrt5 = Golden(-1, 2)
    for row in D.exact:
        for x in row:
            assert (x * sqrt5).is_integral
    M = ((Golden(1), Golden(1)), (t, tc))
    for i in range(2):
        for j in range(2):
            pair = D.exact[i][0] * M[j][0] + D.exact[i][1] * M[j][1]
            assert pair == Golden(1 if i == j else 0)


@pytest.mark.parametrize("name", ["fibonacci", "icosian", "h3", "h2"])
def test_dual_pairing(name):
    s = builtin_scheme(name)
    D = dual_lattice(s)
    assert np.allclose(D.basis @ s.embedding_matrix().T, np.eye(s.rank), atol=1e-10)


def test_padic_dual_unsupported(robinson):
    with pytest.raises(UnsupportedError):
        dual_lattice(robinson)


# -- scheme axioms on samples --------------------------------------------------

def test_injective(fib):
    assert check_injective(fib, bound=30)
    assert check_injective(builtin_scheme("h2"), bound=4)
    assert check_injective(make_icosian_scheme(), bound=2)


def test_dense_internal_image(fib):
    R = density_cover_radius(fib, [-1.0], [0.618], cells=50)
    assert R is not None and R < 1000
    R2 = density_cover_radius(builtin_scheme("h2"), [-1, -1], [1, 1], cells=6)
    assert R2 is not None


def test_lattice_points_match_brute_force(fib):
    pts = {tuple(p) for p in fib.lattice_points(30, int_radius=2.0)}
    brute = set()
    for a in range(-80, 81):
        for b in range(-80, 81):
            x, y = a + b * (1 + 5 ** 0.5) / 2, a + b * (1 - 5 ** 0.5) / 2
            if abs(x) <= 30 and abs(y) <= 2.0:
                brute.add((a, b))
    assert pts == brute


def test_custom_scheme_validation():
    with pytest.raises(ValueError):
        make_custom_scheme(1, InternalSpace("euclidean", 1), [[1, 1], [2, 2]])
    with pytest.raises(ValueError):
        make_custom_scheme(1, InternalSpace("euclidean", 1), [[1, 0, 0], [0, 1, 0]])
    s = make_custom_scheme(1, InternalSpace("euclidean", 1), [["1", "1"], ["tau", "1-tau"]])
    assert s.is_exact and s.covolume == pytest.approx(math.sqrt(5))
