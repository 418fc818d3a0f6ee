import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqloc.exactlp import (CertificateError, DDError, LinearProgram, as_rational, dd_facets, dd_vertices,
                            extreme_rays, integer_scaling, inverse, maximize_over_inequalities, nullspace, rank,
                            rank_mod_p, rref, solve_lp, solve_square, verify)

scipy_optimize = pytest.importorskip("scipy.optimize")


# ----------------------------------------------------------------- linalg

def test_as_rational_refuses_floats():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(2) == 2
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_integer_scaling_clears_denominators():
    ints, factor = integer_scaling([Fraction(1, 2), Fraction(-2, 3), 1])
    assert ints == [3, -4, 6]
    assert factor == 6


def test_rref_and_rank_of_dependent_rows():
    rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    reduced, pivots = rref(rows)
    assert pivots == [0, 1]
    assert rank(rows) == 2
    assert rank_mod_p(rows) == 2


def test_nullspace_is_annihilated():
    rows = [[1, 1, 0, 2], [0, 1, 1, 1]]
    basis = nullspace(rows, 4)
    assert len(basis) == 2
    for v in basis:
        for r in rows:
            assert sum(a * b for a, b in zip(r, v)) == 0


def test_solve_square_and_inverse_agree_with_numpy():
    m = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    x = solve_square(m, [1, 2, 3])
    assert np.allclose(np.array(m, dtype=float) @ np.array(x, dtype=float), [1, 2, 3])
    inv = inverse(m)
    assert np.allclose(np.array(inv, dtype=float), np.linalg.inv(np.array(m, dtype=float)))


# --------------------------------------------------------------------- LP

def test_small_lp_optimum_and_dual():
    # maximize x + y, x + 2y <= 4, 3x + y <= 6
    lp = LinearProgram([1, 1], a_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    res = solve_lp(lp)
    verify(lp, res)
    assert res.status == "optimal"
    assert res.optimum == Fraction(14, 5)
    assert res.x == (Fraction(8, 5), Fraction(6, 5))


def test_infeasible_lp_has_farkas_certificate():
    lp = LinearProgram([1], a_ub=[[1]], b_ub=[-1])
    res = solve_lp(lp)
    verify(lp, res)
    assert res.status == "infeasible"


def test_unbounded_lp_has_ray():
    lp = LinearProgram([1, 0], a_ub=[[-1, 1]], b_ub=[1])
    res = solve_lp(lp)
    verify(lp, res)
    assert res.status == "unbounded"
    assert res.ray is not None


def test_tampered_certificate_is_rejected():
    lp = LinearProgram([1, 1], a_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    res = solve_lp(lp)
    bad = type(res)(res.status, res.optimum + 1, res.x, res.y_eq, res.y_ub)
    with pytest.raises(CertificateError):
        verify(lp, bad)


def test_free_variables_and_redundant_equalities():
    # x free, x + y == 1 listed twice, maximize -x with y <= 3
    lp = LinearProgram([-1, 0], a_eq=[[1, 1], [2, 2]], b_eq=[1, 2], a_ub=[[0, 1]], b_ub=[3],
                       lower=[None, 0])
    res = solve_lp(lp)
    verify(lp, res)
    assert res.optimum == 2


def _random_lp(rng: random.Random):
    n = rng.randint(1, 4)
    m_ub = rng.randint(1, 4)
    m_eq = rng.randint(0, 2)
    c = [rng.randint(-3, 3) for _ in range(n)]
    a_ub = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m_ub)]
    b_ub = [rng.randint(-2, 5) for _ in range(m_ub)]
    a_eq = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(m_eq)]
    b_eq = [rng.randint(-2, 2) for _ in range(m_eq)]
    # a box keeps most instances bounded
    a_ub += [[int(i == j) for j in range(n)] for i in range(n)]
    b_ub += [rng.randint(1, 6) for _ in range(n)]
    return LinearProgram(c, a_eq, b_eq, a_ub, b_ub)


def test_lp_agrees_with_floating_oracle():
    rng = random.Random(7)
    agreed = 0
    for _ in range(300):
        lp = _random_lp(rng)
        res = solve_lp(lp)
        verify(lp, res)
        ref = scipy_optimize.linprog(
            -np.array(lp.objective, dtype=float),
            A_ub=np.array(lp.a_ub, dtype=float), b_ub=np.array(lp.b_ub, dtype=float),
            A_eq=np.array(lp.a_eq, dtype=float) if lp.a_eq else None,
            b_eq=np.array(lp.b_eq, dtype=float) if lp.b_eq else None,
            bounds=[(0, None)] * lp.n_vars, method="highs")
        if ref.status == 0:
            assert res.status == "optimal"
            assert abs(float(res.optimum) + ref.fun) < 1e-7
            agreed += 1
        elif ref.status == 2:
            assert res.status == "infeasible"
    assert agreed > 100


def test_maximize_over_inequalities_matches_primal_solver():
    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(1, 3)
        G = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(1, 6))]
        G += [[int(i == j) for j in range(n)] for i in range(n)] + [[-int(i == j) for j in range(n)] for i in range(n)]
        h = [rng.randint(0, 5) for _ in G]
        c = [rng.randint(-3, 3) for _ in range(n)]
        res = maximize_over_inequalities(c, G, h)
        lp = LinearProgram(c, a_ub=G, b_ub=h, lower=[None] * n)
        verify(lp, res)
        direct = solve_lp(lp)
        assert res.status == direct.status
        if res.status == "optimal":
            assert res.optimum == direct.optimum


def test_lp_is_deterministic():
    lp = _random_lp(random.Random(11))
    assert solve_lp(lp) == solve_lp(lp)


# --------------------------------------------------------------------- dd

def test_square_has_four_facets():
    hull = dd_facets([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert hull.dimension == 2
    assert len(hull.facets) == 4
    assert not hull.equalities


def test_simplex_in_plane_reports_equality():
    hull = dd_facets([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert hull.dimension == 2
    assert len(hull.equalities) == 1
    eq = hull.equalities[0]
    assert abs(eq.offset) == 1 and all(abs(v) == 1 for v in eq.normal)
    assert len(hull.facets) == 3


def test_cross_polytope_facets():
    pts = []
    for i in range(3):
        for s in (1, -1):
            p = [0, 0, 0]
            p[i] = s
            pts.append(p)
    hull = dd_facets(pts)
    assert len(hull.facets) == 8
    assert all(f.offset == 1 for f in hull.facets)


def test_extreme_rays_of_orthant():
    rays = extreme_rays([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert sorted(r for r, _ in rays) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_dd_vertices_of_cube():
    ineqs = []
    for i in range(3):
        e = [0, 0, 0]
        e[i] = 1
        ineqs.append((e, 1))
        ineqs.append(([-v for v in e], 0))
    vs = dd_vertices(ineqs)
    assert sorted(vs) == sorted(tuple(Fraction(v) for v in p) for p in itertools.product(range(2), repeat=3))


def test_dd_rejects_empty_input():
    with pytest.raises(DDError):
        dd_facets([])


def _round_trip(points):
    hull = dd_facets(points)
    vs = dd_vertices(hull.facets, hull.equalities)
    back = dd_facets(vs)
    return hull, vs, back


@given(st.integers(min_value=3, max_value=5), st.integers(min_value=0, max_value=10 ** 6))
def test_random_polytope_round_trip(dim, seed):
    rng = random.Random(seed)
    n = rng.randint(dim + 1, 12)
    pts = {tuple(rng.randint(-4, 4) for _ in range(dim)) for _ in range(n)}
    pts = [list(p) for p in pts]
    hull, vs, back = _round_trip(pts)
    assert back.facets == hull.facets
    assert back.equalities == hull.equalities
    # recovered vertices are exactly the extreme input points
    assert set(vs) <= {tuple(Fraction(v) for v in p) for p in pts}
