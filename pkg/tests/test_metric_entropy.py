import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entrolab.dynamics import Henon, Rotation, StandardMap, cat_map, identity_map
from entrolab.entropy import EntropyEstimate
from entrolab.exceptions import EscapedError, PreconditionError
from entrolab.metric_entropy import (BoxPartition, EmpiricalMeasure, chao_shen_entropy,
                                     metric_entropy_estimate, partition_entropy,
                                     refine_partition, variational_check, word_counts)



def lower(value):
    return EntropyEstimate(value=value, epsilon_schedule=(0.02,), n_window=(4, 16),
                           fit_residual=0.0, bound="lower")


# ---------------------------------------------------------------------------
# partitions and words


def test_box_partition_classifies_every_point_once():
    xi = BoxPartition.uniform(cat_map(), 4)
    assert xi.k == 16 and xi.mesh == 0.25 and len(xi.cells) == 16
    X = np.random.default_rng(0).random((500, 2))
    labels = xi.classify(X)
    for x, lab in zip(X, labels):
        inside = [i for i, (lo, hi) in enumerate(xi.cells) if np.all(lo <= x) and np.all(x < hi)]
        assert inside == [lab]
    assert xi.classify([[1.0, 1.0]])[0] == 15


def test_planar_partition_rejects_escaped_points():
    h = Henon()
    xi = BoxPartition.uniform(h, 4)
    with pytest.raises(EscapedError):
        xi.classify([[np.nan, 0.0]])
    with pytest.raises(EscapedError):
        refine_partition(xi, h, 5, [[1.79, 1.79]])


def test_refine_examples():
    m = identity_map(2)
    xi = BoxPartition.uniform(m, 3)
    pts = np.array([c[0] + 0.01 for c in xi.cells])
    W1 = refine_partition(xi, m, 1, pts)
    assert W1.shape == (9, 1) and sorted(W1[:, 0]) == list(range(9))
    W7 = refine_partition(xi, m, 7, pts)
    assert len(word_counts(W7)) == 9 and np.all(W7 == W7[:, :1])
    with pytest.raises(PreconditionError):
        refine_partition(xi, m, 0, pts)


def test_quarter_rotation_has_four_words():
    R = Rotation([0.25])
    xi = BoxPartition.uniform(R, 2)
    pts = np.random.default_rng(3).random((400, 1))
    W = refine_partition(xi, R, 2, pts)
    # direct intersection: [0,1/4) -> (0,0), [1/4,1/2) -> (0,1), [1/2,3/4) -> (1,1), [3/4,1) -> (1,0)
    want = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
    for x, w in zip(pts[:, 0], W):
        assert tuple(w) == want[int(x * 4)]
    assert len(word_counts(W)) == 4


@given(st.integers(1, 7))
def test_word_counts_grow_with_n(n):
    m = StandardMap(0.97)
    xi = BoxPartition.uniform(m, 4)
    pts = np.random.default_rng(n).random((2000, 2))
    a = len(word_counts(refine_partition(xi, m, n, pts)))
    b = len(word_counts(refine_partition(xi, m, n + 1, pts)))
    assert b >= a


# ---------------------------------------------------------------------------
# partition entropy


def test_partition_entropy_examples():
    assert partition_entropy(np.full(7, 1 / 7)) == pytest.approx(math.log(7), abs=1e-12)
    assert partition_entropy([1, 0, 0]) == 0.0
    assert partition_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5 * math.log(2), abs=1e-12)
    assert partition_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.0397, abs=1e-4)
    for bad in ([0.5, 0.6], [-0.1, 1.1], [], [np.nan, 1.0]):
        with pytest.raises(PreconditionError):
            partition_entropy(bad)


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_uniform_maximizes_partition_entropy(k, seed):
    p = np.random.default_rng(seed).dirichlet(np.ones(k))
    p = p / p.sum()
    if abs(p.sum() - 1) > 1e-12:
        return
    h = partition_entropy(p)
    assert h <= math.log(k) + 1e-12
    if h >= math.log(k) - 1e-9:
        assert np.max(np.abs(p - 1 / k)) < 1e-3 or k == 1


@given(st.integers(2, 16), st.floats(1e-3, 0.5))
def test_perturbed_uniform_is_strictly_lower(k, frac):
    p = np.full(k, 1 / k)
    d = frac / k
    p[0] += d
    p[-1] -= d
    assert partition_entropy(p) < math.log(k) - 1e-9


def test_chao_shen_against_high_precision_formula():
    counts = [5, 3, 3, 2, 1, 1, 7]
    N = sum(counts)
    f1 = sum(1 for c in counts if c == 1)
    with mpmath.workdps(40):
        C = 1 - mpmath.mpf(f1) / N
        want = 0
        for c in counts:
            p = C * c / N
            want -= p * mpmath.log(p) / (1 - (1 - p) ** N)
    assert chao_shen_entropy(counts) == pytest.approx(float(want), rel=1e-12)


def test_chao_shen_matches_plugin_for_large_counts():
    counts = np.array([40000, 30000, 20000, 10000])
    assert chao_shen_entropy(counts) == pytest.approx(partition_entropy(counts / counts.sum()),
                                                      abs=1e-9)


# ---------------------------------------------------------------------------
# estimates


def test_identity_estimate_is_zero():
    m = identity_map(2)
    mu = EmpiricalMeasure.uniform_samples(m, 5000, 0)
    r = metric_entropy_estimate(m, mu, BoxPartition.uniform(m, 8), (4, 12))
    assert r.value == pytest.approx(0.0, abs=1e-9)
    assert r.word_counts == (64,) * 9


@pytest.mark.parametrize("angles", [[0.25, 0.5], [0.125, 0.375], [0.5]])
@pytest.mark.parametrize("per_axis", [4, 8])
def test_rational_rotation_estimate_is_small(angles, per_axis):
    R = Rotation(angles)
    mu = EmpiricalMeasure.from_orbit(R, np.full(R.dim, 0.1234567), 20000)
    r = metric_entropy_estimate(R, mu, BoxPartition.uniform(R, per_axis), (4, 12))
    assert r.value <= 0.05


def test_cat_estimate_in_bracket():
    m = cat_map()
    mu = EmpiricalMeasure.uniform_samples(m, 10**5, 11)
    r = metric_entropy_estimate(m, mu, BoxPartition.uniform(m, 16), (4, 10))
    assert 0.6 <= r.value <= 1.1
    assert r.undersampled  # singletons dominate at n = 10, which is why the coverage fix is used


def test_measure_weights_and_provenance():
    mu = EmpiricalMeasure.from_orbit(cat_map(), [0.1, 0.2], 100, burn_in=5)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert mu.provenance["kind"] == "orbit" and mu.support_orbit.shape == (100, 2)
    with pytest.raises(EscapedError):
        EmpiricalMeasure.from_orbit(Henon(), [1.79, 1.79], 10)


def test_estimate_rejects_bad_window_and_estimator():
    m = cat_map()
    mu = EmpiricalMeasure.uniform_samples(m, 100, 0)
    xi = BoxPartition.uniform(m, 2)
    with pytest.raises(PreconditionError):
        metric_entropy_estimate(m, mu, xi, (5, 5))
    with pytest.raises(PreconditionError):
        metric_entropy_estimate(m, mu, xi, (2, 4), estimator="grassberger")


@pytest.mark.parametrize("m", [cat_map(), StandardMap(0.97), StandardMap(4.0)], ids=lambda m: m.label)
def test_entropy_of_refinements(m):
    # orbit measure of length 10^4: H non-decreasing in n and subadditive up to 0.01
    mu = EmpiricalMeasure.from_orbit(m, [0.1234, 0.5678], 10000)
    xi = BoxPartition.uniform(m, 2)
    r = metric_entropy_estimate(m, mu, xi, (1, 8), estimator="plugin")
    H = dict(zip(r.n_values, r.plugin_entropies))
    assert all(H[n + 1] >= H[n] - 1e-12 for n in range(1, 8))
    assert all(a <= b for a, b in zip(r.word_counts, r.word_counts[1:]))
    for n1 in range(1, 8):
        for n2 in range(1, 9 - n1):
            assert H[n1 + n2] <= H[n1] + H[n2] + 0.01


# ---------------------------------------------------------------------------
# variational check


def test_variational_examples():
    assert variational_check(0.0, lower(0.5), 0.15).passed
    v = variational_check(0.96, lower(0.96), 0.15)
    assert v.passed and v.verdict == "pass"
    v = variational_check(1.5, lower(0.9), 0.15)
    assert not v.passed and v.verdict == "fail" and "lower bound" in v.caveat
    point = EntropyEstimate(0.9, (0.1,), (2, 8), 0.0, bound="point")
    assert variational_check(1.5, point, 0.15).caveat is None


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 0.5))
def test_variational_is_arithmetic(hm, ht, tol):
    assert variational_check(hm, lower(ht), tol).passed == (hm <= ht + tol)
