import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entrolab.dynamics import (Henon, PerturbedToral, Rotation, StandardMap, ToralAutomorphism,
                               cat_map, identity_map, lift_matrix, make_map, map_eval,
                               map_inverse, map_jacobian, orbit, torus_distance, two_sided_orbit,
                               wrap_unit)
from entrolab.exceptions import EscapedError, PreconditionError, UnavailableError

import oracles

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
torus_points = st.tuples(unit, unit).map(np.array)
TORAL_ZOO = [cat_map(), identity_map(2), Rotation([0.618034, 0.25]), StandardMap(0.9),
             PerturbedToral([[2, 1], [1, 1]], eta=0.01)]


def test_wrap_unit_stays_half_open():
    assert wrap_unit(np.array([-1e-18]))[0] == 0.0
    assert wrap_unit(np.array([1.0]))[0] == 0.0


def test_torus_distance_wraps():
    assert torus_distance([0.1, 0.0], [0.9, 0.0]) == pytest.approx(0.2)


@given(torus_points)
def test_cat_matches_hand_formula(p):
    got = map_eval(cat_map(), p)
    want = oracles.cat_step(tuple(p))
    assert oracles.torus_sup(got, want) < 1e-12


@given(torus_points, st.floats(0, 3))
def test_standard_matches_hand_formula(p, K):
    got = map_eval(StandardMap(K), p)
    assert oracles.torus_sup(got, oracles.standard_step(tuple(p), K)) < 1e-12


def test_henon_matches_formula_and_escapes():
    h = Henon()
    p = np.array([0.1, 0.2])
    assert np.allclose(map_eval(h, p), oracles.henon_step((0.1, 0.2)))
    with pytest.raises(EscapedError):
        map_eval(h, [5.0, 0.0])
    orb = orbit(h, np.array([[1.79, 1.79]]), 4)  # leaves the box at step 2
    assert np.isnan(orb[-1]).all()


@pytest.mark.parametrize("m", TORAL_ZOO + [Henon()], ids=lambda m: m.label)
def test_inverse_round_trip(m):
    X = PointCloudLike(m, 64)
    Y = map_inverse(m, map_eval(m, X))
    d = m.distance(X, Y)
    assert np.nanmax(d) < 1e-10


def PointCloudLike(m, n):
    lo, hi = m.bounds()
    rng = np.random.default_rng(0)
    if m.periodic:
        return rng.random((n, m.dim))
    return rng.uniform(-0.5, 0.5, (n, m.dim))  # well inside the Henon box and its image


@pytest.mark.parametrize("m", TORAL_ZOO + [Henon()], ids=lambda m: m.label)
def test_jacobian_matches_central_differences(m):
    X = PointCloudLike(m, 8)
    h = 1e-6
    for x in X:
        J = map_jacobian(m, x)
        for k in range(m.dim):
            e = np.zeros(m.dim)
            e[k] = h
            diff = m(x + e) - m(x - e)
            if m.periodic:
                diff = diff - np.round(diff)
            assert np.allclose(diff / (2 * h), J[:, k], atol=1e-6)


def test_toral_rejects_non_unimodular():
    with pytest.raises(PreconditionError):
        ToralAutomorphism([[3, 1], [1, 1]])
    with pytest.raises(PreconditionError):
        ToralAutomorphism([[2.5, 1], [1, 1]])


def test_perturbation_zero_is_the_base_map():
    rng = np.random.default_rng(1)
    X = rng.random((100, 2))
    assert np.array_equal(PerturbedToral([[2, 1], [1, 1]], 0.0)(X), cat_map()(X))


def test_lifts():
    assert np.array_equal(lift_matrix(cat_map()), [[2, 1], [1, 1]])
    assert np.array_equal(lift_matrix(Rotation([0.3, 0.1])), np.eye(2))
    with pytest.raises(UnavailableError):
        lift_matrix(Henon())


@given(st.floats(0, 3), torus_points)
def test_standard_lift_action(K, p):
    # lift F(x, y) = (x + y + k, y + k) with k = K/2pi sin 2pi x; F(p + e_j) - F(p) = A e_j
    def F(q):
        k = K / (2 * math.pi) * math.sin(2 * math.pi * q[0])
        return np.array([q[0] + q[1] + k, q[1] + k])

    A = lift_matrix(StandardMap(K))
    for j in range(2):
        e = np.eye(2)[j]
        assert np.allclose(F(p + e) - F(p), A @ e)


def test_orbit_shapes_and_two_sided_centre():
    m = cat_map()
    X = np.array([[0.1, 0.2], [0.3, 0.4]])
    assert orbit(m, X, 5).shape == (5, 2, 2)
    two = two_sided_orbit(m, X, 3)
    assert two.shape == (7, 2, 2)
    assert np.array_equal(two[3], X)
    assert np.allclose(m(two[2]), two[3])


def test_make_map_kinds():
    assert make_map("cat").label == "cat"
    assert make_map("rotation", angles=[0.1]).dim == 1
    with pytest.raises(PreconditionError):
        make_map("lorenz")
