"""Exact enumeration: balls, closest/shortest vectors, HKZ, unimodular completion."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from latgauss.enumeration import (
    BudgetExceeded,
    closest_vector,
    complete_to_unimodular,
    enumerate_ball,
    hkz_reduce,
    lambda1,
    shortest_vector,
    shortest_via_promise_cvp,
)
from latgauss.generators import checkerboard, integer_identity, random_integer
from latgauss.lattice import (
    LatticeBasis,
    lattice_coefficients,
    nearest_plane,
    project_lattice,
    sqdist,
    sqnorm,
)

from conftest import box_cvp, frac_vector


def ball_coeff_set(ball):
    return {tuple(int(c) for c in row) for row in ball.coeffs}


@pytest.mark.parametrize("seed", (1, 2, 3))
def test_enumerate_ball_matches_the_coefficient_box(seed):
    basis = random_integer(3, seed=seed, bound=4)
    center = frac_vector((seed, -2 * seed, 7), 3)
    radius = Fraction(9, 2)
    ball = enumerate_ball(basis, center, radius)
    got = ball_coeff_set(ball)
    expect = set()
    for coeffs in itertools.product(range(-8, 9), repeat=3):
        vec = basis.vector(coeffs)
        if sqdist(vec, center) <= radius * radius:
            expect.add(coeffs)
    assert got == expect
    for i in range(len(ball)):
        coeffs = tuple(int(c) for c in ball.coeffs[i])
        assert ball.exact_sqdist(i) == sqdist(basis.vector(coeffs), center)


def test_enumerate_ball_keeps_exact_boundary_points():
    z1 = integer_identity(1)
    ball = enumerate_ball(z1, (0,), Fraction(2))
    assert ball_coeff_set(ball) == {(-2,), (-1,), (0,), (1,), (2,)}
    ball = enumerate_ball(z1, (Fraction(1, 3),), Fraction(4, 3))
    assert ball_coeff_set(ball) == {(-1,), (0,), (1,)}


def test_enumerate_ball_radius_monotonicity():
    basis = random_integer(2, seed=5)
    sizes = [len(enumerate_ball(basis, (0, 0), Fraction(r))) for r in range(1, 6)]
    assert sizes == sorted(sizes)


def test_enumerate_ball_rank_zero():
    empty = LatticeBasis([], ambient=2)
    ball = enumerate_ball(empty, (Fraction(1, 2), 0), Fraction(1))
    assert len(ball) == 1
    assert ball.exact_sqdist(0) == Fraction(1, 4)


@pytest.mark.parametrize("seed", (4, 5, 6, 7))
def test_closest_vector_matches_brute_force(seed):
    basis = random_integer(3, seed=seed, bound=3)
    target = frac_vector((5 * seed, -3, 2 * seed + 1), 4)
    vec, coeffs, sq = closest_vector(basis, target)
    best, argmin = box_cvp(basis, target, 10)
    assert sq == best
    assert coeffs in argmin
    assert vec == basis.vector(coeffs)
    assert sq <= sqdist(nearest_plane(basis, target)[0], target)


def test_closest_vector_breaks_ties_lexicographically():
    z2 = integer_identity(2)
    vec, coeffs, sq = closest_vector(z2, (Fraction(1, 2), Fraction(1, 2)))
    assert sq == Fraction(1, 2)
    assert coeffs == (0, 0)
    vec, coeffs, _ = closest_vector(z2, (Fraction(-1, 2), Fraction(3, 2)))
    assert coeffs == (-1, 1)


def test_shortest_vector_known_lattices():
    assert lambda1(integer_identity(5)) == 1
    assert lambda1(checkerboard(4)) == 2
    vec, coeffs, sq = shortest_vector(checkerboard(4))
    assert sqnorm(vec) == sq == 2
    assert any(coeffs)


@pytest.mark.parametrize("seed", (1, 8))
def test_shortest_vector_matches_brute_force(seed):
    basis = random_integer(3, seed=seed, bound=3)
    _, _, sq = shortest_vector(basis)
    nonzero_best = min(
        sqnorm(basis.vector(c))
        for c in itertools.product(range(-6, 7), repeat=3)
        if any(c)
    )
    assert sq == nonzero_best


def test_shortest_vector_rejects_rank_zero():
    with pytest.raises(ValueError):
        shortest_vector(LatticeBasis([], ambient=1))


@pytest.mark.parametrize("seed", (2, 3, 9))
def test_hkz_reduce_properties(seed):
    basis = random_integer(4, seed=seed, bound=6)
    hkz = hkz_reduce(basis)
    for row in hkz.rows:
        assert lattice_coefficients(basis, row) is not None
    for row in basis.rows:
        assert lattice_coefficients(hkz, row) is not None
    gs = hkz.gram_schmidt
    for k in range(hkz.rank):
        proj = project_lattice(hkz, k)
        assert lambda1(proj) == gs.sqnorms[k]
    for i in range(hkz.rank):
        for j in range(i):
            assert abs(gs.mu[i][j]) <= Fraction(1, 2)


def test_budget_exceeded_propagates():
    basis = random_integer(4, seed=1)
    with pytest.raises(BudgetExceeded):
        closest_vector(basis, frac_vector((1, 2, 3, 4), 3), budget=2)
    with pytest.raises(BudgetExceeded):
        shortest_vector(basis, budget=2)


def test_budget_env_override(monkeypatch):
    from latgauss import config

    monkeypatch.setenv("LATGAUSS_BUDGET", "17")
    assert config.enum_budget() == 17
    assert config.enum_budget(99) == 99
    monkeypatch.delenv("LATGAUSS_BUDGET")
    assert config.enum_budget() == config.DEFAULT_ENUM_BUDGET


def test_complete_to_unimodular():
    from latgauss.lattice import invert_matrix

    mat = complete_to_unimodular((6, 10, 15))
    assert mat[0] == [6, 10, 15]
    inv = invert_matrix(tuple(tuple(Fraction(v) for v in row) for row in mat))
    assert all(x.denominator == 1 for row in inv for x in row)
    with pytest.raises(ValueError):
        complete_to_unimodular((2, 4, 6))


def test_shortest_via_promise_cvp_with_exact_solver():
    basis = random_integer(3, seed=6, bound=4)

    def solver(sub, target):
        vec, coeffs, _ = closest_vector(sub, target)
        return vec, coeffs

    coeffs = shortest_via_promise_cvp(basis, solver)
    assert sqnorm(basis.vector(coeffs)) == lambda1(basis)


@given(st.integers(0, 2**32 - 1), st.fractions(min_value=0, max_value=4, max_denominator=8))
def test_closest_beats_babai(seed, shift):
    basis = random_integer(2, seed=seed % 50, bound=3)
    target = (shift, Fraction(1, 3) + shift)
    _, _, sq = closest_vector(basis, target)
    assert sq <= sqdist(nearest_plane(basis, target)[0], target)
