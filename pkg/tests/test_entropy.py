import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entrolab.dynamics import Henon, Rotation, StandardMap, cat_map, identity_map
from entrolab.entropy import (BallSpec, CountCurve, PointCloud, box_cover, candidate_set,
                              cover_entropy, entropy_estimate, expansiveness_profile, fit_window,
                              growth_rate, in_dynamical_ball, separated_count, separated_curve,
                              spanning_count, tail_entropy)
from entrolab.exceptions import NotInvertibleError, PreconditionError
from entrolab.metric_entropy import EmpiricalMeasure

import oracles

# n * 2^n over [8, 16]: exact rational least squares on log(n) + n log 2
N2N_SLOPE = 0.7788982497506678  # log 2 + 0.0857510691907225, frozen from the oracle


def circle_points(k, shift=0.0):
    return PointCloud(np.column_stack([(np.arange(k) / k + shift) % 1.0, np.zeros(k)]))


# ---------------------------------------------------------------------------
# dynamical balls


def test_ball_contains_centre():
    m = cat_map()
    x = np.array([0.3, 0.7])
    for mode, kw in [("forward", {"n": 10}), ("two_sided", {"n": 4}),
                     ("forward_infinite", {"horizon": 5}), ("two_sided_infinite", {"horizon": 5})]:
        assert in_dynamical_ball(m, x, x, BallSpec(0.01, mode=mode, **kw))


def test_ball_identity_is_static():
    m = identity_map(2)
    spec = BallSpec(0.1, n=10)
    assert in_dynamical_ball(m, [0.0, 0.0], [0.1, 0.0], spec)
    assert not in_dynamical_ball(m, [0.0, 0.0], [0.1000001, 0.0], spec)


def test_ball_cat_example():
    # hand iteration of (0.01, 0): sup distances 0.01, 0.02, 0.05, 0.13
    m = cat_map()
    assert in_dynamical_ball(m, [0, 0], [0.01, 0], BallSpec(0.05, n=3))
    assert not in_dynamical_ball(m, [0, 0], [0.01, 0], BallSpec(0.05, n=4))


def test_two_sided_needs_inverse():
    with pytest.raises(NotInvertibleError):
        in_dynamical_ball(Henon(b=0.0), [0.1, 0], [0.1, 0], BallSpec(0.1, n=2, mode="two_sided"))


def test_ballspec_validation():
    with pytest.raises(PreconditionError):
        BallSpec(0.0)
    with pytest.raises(PreconditionError):
        BallSpec(0.1, mode="forward_infinite")


unit = st.floats(0, 1, exclude_max=True)


@given(st.tuples(unit, unit), st.tuples(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05)),
       st.integers(1, 6), st.floats(0.01, 0.2))
def test_ball_monotone_in_n_and_eps(x, dx, n, eps):
    m = cat_map()
    x = np.array(x)
    y = (x + np.array(dx)) % 1.0
    if in_dynamical_ball(m, x, y, BallSpec(eps, n=n)):
        assert in_dynamical_ball(m, x, y, BallSpec(eps, n=max(1, n - 1)))
        assert in_dynamical_ball(m, x, y, BallSpec(eps * 1.5, n=n))


# ---------------------------------------------------------------------------
# spanning and separated counts


def test_singletons_and_large_radius():
    m = cat_map()
    K = PointCloud([[0.2, 0.3]])
    assert spanning_count(m, K, 5, 0.01) == 1
    assert separated_count(m, K, 5, 0.01) == 1
    K = PointCloud.random(m, 50, seed=0)
    assert spanning_count(m, K, 1, 0.5) == 1
    assert separated_count(m, K, 3, 0.5) == 1


def test_spanning_five_points_on_circle():
    m = identity_map(2)
    K = circle_points(5)
    # centres anywhere on the circle factor; midpoints are where pairs can share a ball
    cands = np.vstack([K.points, circle_points(5, 0.1).points])
    C = oracles.closeness([[tuple(c)] for c in cands], [[tuple(p)] for p in K.points], 0.11)
    assert oracles.true_min_spanning(C) == 3
    assert spanning_count(m, K, 7, 0.11, centers=PointCloud(cands)) == 3
    fine = PointCloud(np.column_stack([np.arange(1000) / 1000, np.zeros(1000)]))
    assert spanning_count(m, K, 7, 0.11, centers=fine) == 3
    # with centres restricted to K every point needs its own ball
    assert spanning_count(m, K, 7, 0.11) == 5


def test_separated_three_points():
    m = identity_map(2)
    K = circle_points(3)
    C = oracles.closeness([[tuple(p)] for p in K.points], [[tuple(p)] for p in K.points], 0.2)
    assert oracles.true_max_separated(C) == 3
    assert separated_count(m, K, 4, 0.2) == 3


MAPS = [cat_map(), StandardMap(1.5), Rotation([0.618034, 0.1]), identity_map(2)]


def _finite_instance(m, seed, size, n, eps):
    rng = np.random.default_rng(seed)
    pts = rng.random((size, 2))
    orbs = oracles.orbits_of(lambda p: tuple(m(np.array(p))), pts, n)
    C = oracles.closeness(orbs, orbs, eps)
    return PointCloud(pts), orbs, C


@given(st.integers(0, 3), st.integers(0, 10**6), st.integers(2, 9), st.integers(1, 3),
       st.floats(0.05, 0.4))
def test_greedy_brackets_true_counts(mi, seed, size, n, eps):
    m = MAPS[mi]
    K, _, C = _finite_instance(m, seed, size, n, eps)
    r, s = oracles.true_min_spanning(C), oracles.true_max_separated(C)
    assert r <= s
    assert spanning_count(m, K, n, eps) >= r
    assert separated_count(m, K, n, eps) <= s


@given(st.integers(0, 3), st.integers(0, 10**6), st.integers(2, 7), st.integers(2, 3),
       st.floats(0.05, 0.3))
def test_product_bound_over_time_partitions(mi, seed, size, n, eps):
    m = MAPS[mi]
    K, orbs, _ = _finite_instance(m, seed, size, n, eps)
    r2 = oracles.true_min_spanning(oracles.closeness(orbs, orbs, 2 * eps))
    for ts in oracles.compositions(n):
        prod = 1
        for a, b in zip(ts, ts[1:]):
            seg = [o[a:b] for o in orbs]
            prod *= oracles.true_min_spanning(oracles.closeness(seg, seg, eps))
        assert r2 <= prod


@given(st.integers(0, 10**6), st.floats(0.03, 0.3), st.integers(1, 5))
def test_separated_count_monotone(seed, eps, n):
    m = cat_map()
    K = PointCloud.random(m, 300, seed=seed)
    base = separated_count(m, K, n, eps)
    assert separated_count(m, K, n + 1, eps) >= base
    assert separated_count(m, K, n, eps * 1.3) <= base


def test_separated_curve_matches_pointwise_counts():
    m = cat_map()
    K = PointCloud.grid(m, 32)
    curve = separated_curve(m, K, 8, 0.1)
    assert [c for _, c in curve.entries] == [separated_count(m, K, n, 0.1) for n in range(1, 9)]


def test_henon_escaped_points_are_dropped():
    m = Henon()
    K = PointCloud.grid(m, 40)
    c = separated_count(m, K, 6, 0.2)
    assert 1 <= c < len(K)


# ---------------------------------------------------------------------------
# growth rates


def curve_of(counts, start=1):
    return CountCurve(tuple((start + i, int(c)) for i, c in enumerate(counts)), "separated_lower")


def test_growth_constant_is_zero():
    assert growth_rate(curve_of([1] * 6)).rate == 0.0
    assert growth_rate(curve_of([7] * 6)).rate == 0.0


def test_growth_geometric():
    fit = growth_rate(curve_of([2**n for n in range(1, 20)]))
    assert abs(fit.rate - math.log(2)) < 1e-12
    assert fit.residual < 1e-12


def test_growth_n_two_to_n_window():
    counts = [n * 2**n for n in range(1, 17)]
    oracle = oracles.least_squares_slope(range(8, 17), [math.log(n * 2**n) for n in range(8, 17)])
    assert oracle == pytest.approx(N2N_SLOPE, abs=1e-12)
    assert growth_rate(curve_of(counts), (8, 16)).rate == pytest.approx(N2N_SLOPE, abs=1e-12)


def test_growth_window_errors():
    with pytest.raises(PreconditionError):
        growth_rate(curve_of([1, 2, 4]), (5, 9))


def test_fit_window_stops_before_saturation():
    curve = curve_of([4, 8, 16, 32, 64, 100, 100])
    assert fit_window(curve, 100, saturation=0.5) == (2, 4)


# ---------------------------------------------------------------------------
# entropy estimates


def test_identity_and_rotation_estimates_vanish():
    for m in (identity_map(2), Rotation([0.618034, 0.0])):
        K = PointCloud.grid(m, 64)
        est = entropy_estimate(m, K, [0.1, 0.08], 10)
        assert est.bound == "lower"
        assert est.value <= 0.02
        assert all(p["rate"] <= 0.05 for p in est.per_epsilon)


def test_mesh_guard():
    m = cat_map()
    with pytest.raises(PreconditionError):
        entropy_estimate(m, PointCloud.grid(m, 16), [0.04], 8)


def test_estimate_is_worker_independent():
    m = cat_map()
    K = PointCloud.grid(m, 96)
    a = entropy_estimate(m, K, [0.1, 0.05], 8, workers=1)
    b = entropy_estimate(m, K, [0.1, 0.05], 8, workers=4)
    assert a.per_epsilon == b.per_epsilon and a.curves == b.curves


def test_cat_estimate_small_grid_is_positive():
    m = cat_map()
    K = PointCloud.grid(m, 128)
    est = entropy_estimate(m, K, [0.04], 10)
    assert 0.6 < est.value < 1.2


# ---------------------------------------------------------------------------
# covers


def test_identity_cover_count():
    for n in (1, 3, 5):
        count, rate = cover_entropy(identity_map(2), box_cover(2, 3), n, grid_per_axis=60)
        assert count <= 9


def test_rotation_cover_rates_decrease():
    m = Rotation([0.25, 0.0])
    cover = box_cover(2, 2, axes=[0])
    rates = [cover_entropy(m, cover, n, grid_per_axis=64)[1] for n in range(1, 7)]
    assert rates[3] <= 0.4
    assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))


def test_cat_cover_rate_dominates_separated_rate():
    m = cat_map()
    _, rate = cover_entropy(m, box_cover(2, 8), 8)
    sep = entropy_estimate(m, PointCloud.grid(m, 256), [1 / 8], 8).value
    assert rate >= sep


def test_cover_must_cover():
    with pytest.raises(PreconditionError):
        cover_entropy(identity_map(2), box_cover(2, 2)[:2], 1, grid_per_axis=16)


# ---------------------------------------------------------------------------
# tail entropy and profiles


def test_tail_entropy_isometries():
    for m in (identity_map(2), Rotation([0.618034, 0.3])):
        K = PointCloud.grid(m, 64)
        for x in PointCloud.random(m, 3, seed=1).points:
            assert tail_entropy(m, x, 0.1, 10, 0.025, K) == 0.0


def test_cat_candidate_sets_shrink_and_tail_vanishes():
    m = cat_map()
    K = PointCloud.grid(m, 1024)
    for x in PointCloud.random(m, 5, seed=2).points:
        sizes = [len(candidate_set(m, x, K, 0.1, T)) for T in (1, 5, 20)]
        assert sizes[0] >= sizes[1] >= sizes[2]
        assert sizes[2] <= 4
        assert tail_entropy(m, x, 0.1, 20, 0.025, K) <= 0.05


def test_tail_beta_guard():
    m = cat_map()
    with pytest.raises(PreconditionError):
        tail_entropy(m, [0.1, 0.1], 0.1, 5, 0.05, PointCloud.grid(m, 16))


def test_profile_identity_zero_and_ordering():
    m = identity_map(2)
    K = PointCloud.grid(m, 32)
    S = PointCloud.random(m, 10, seed=0)
    prof = expansiveness_profile(m, [0.2, 0.1], S, K, T=6)
    assert [h for _, h in prof] == [0.0, 0.0]
    with pytest.raises(PreconditionError):
        expansiveness_profile(m, [0.1, 0.2], S, K)


def test_profile_monotone_in_epsilon_standard_map():
    m = StandardMap(1.2)
    K = PointCloud.grid(m, 128)
    S = PointCloud.random(m, 8, seed=5)
    prof = expansiveness_profile(m, [0.2, 0.1, 0.05], S, K, T=8)
    hs = [h for _, h in prof]
    assert all(b <= a + 0.02 for a, b in zip(hs, hs[1:]))


def test_profile_measure_mode_uses_orbit():
    m = cat_map()
    K = PointCloud.grid(m, 128)
    mu = EmpiricalMeasure.from_orbit(m, [0.1234, 0.5678], 10)
    prof = expansiveness_profile(m, [0.2, 0.1], mu, K, T=10, weighting="empirical_measure")
    assert all(h <= 0.05 for _, h in prof)
