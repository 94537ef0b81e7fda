import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_from_codes, random_stochastic
from mobilicast.clustering import Dendrogram, flatten, squared_distances, ward_cluster
from mobilicast.errors import InvalidK, ShapeMismatch
from mobilicast.evaluation import transition_model
from oracles import brute_ward, partition_after


def partition(assign):
    groups = {}
    for label, c in assign.items():
        groups.setdefault(c, set()).add(label)
    return sorted(map(sorted, groups.values()))


def test_three_points_k2():
    dendro, assign = ward_cluster([("a", [0.0]), ("b", [1.0]), ("c", [10.0])], 2)
    assert partition(assign) == [["a", "b"], ["c"]]
    assert assign == {"a": 0, "b": 0, "c": 1}
    first, second = dendro.merges
    assert (first.cluster_a, first.cluster_b, first.new_size) == (0, 1, 2)
    assert first.merge_height == pytest.approx(1.0)
    # Ward distance between {0,1} and {10}: sqrt(2 * 2*1/3 * 9.5^2)
    assert second.merge_height == pytest.approx(math.sqrt(2 * 2 / 3) * 9.5)


def test_k_equals_n_and_k1():
    vecs = [(str(i), [float(i * i)]) for i in range(5)]
    assert len(set(ward_cluster(vecs, 5)[1].values())) == 5
    assert set(ward_cluster(vecs, 1)[1].values()) == {0}


def test_identical_vectors_merge_at_zero():
    dendro, _ = ward_cluster([("x", [1, 2]), ("y", [1, 2]), ("z", [5, 5])], 1)
    assert dendro.merges[0].merge_height == 0.0


def test_errors():
    with pytest.raises(InvalidK):
        ward_cluster([("a", [0]), ("b", [1])], 3)
    with pytest.raises(InvalidK):
        ward_cluster([("a", [0]), ("b", [1])], 0)
    with pytest.raises(ShapeMismatch):
        ward_cluster([("a", [0]), ("b", [1, 2])], 1)
    with pytest.raises(ShapeMismatch):
        ward_cluster([("a", [0])], 1)
    with pytest.raises(ValueError):
        ward_cluster([("a", [0]), ("a", [1])], 1)
    with pytest.raises(InvalidK):
        Dendrogram(("a",), ()).labels_for_k(2)


def test_flatten():
    t = transition_model(corpus_from_codes([[1, 3, 1]]))
    v = flatten(t)
    assert v.shape == (121,) and v.sum() == 2
    with pytest.raises(ValueError):
        flatten(transition_model(corpus_from_codes([[1, 3, 1]]), order=2))


def test_squared_distances():
    x = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert squared_distances(x).tolist() == [[0, 25], [25, 0]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(1, 4))
def test_agrees_with_brute_force(seed, n, dim):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, dim)).round(3)
    labels = [f"c{i}" for i in range(n)]
    dendro, _ = ward_cluster(list(zip(labels, pts.tolist())), 1)
    brute = brute_ward(pts.tolist())
    assert [m.merge_height for m in dendro.merges] == pytest.approx([h for _, h in brute], rel=1e-9, abs=1e-12)
    for k in range(1, n + 1):
        want = {frozenset(labels[i] for i in c) for c in partition_after(brute, n, k)}
        got = dendro.labels_for_k(k)
        assert {frozenset(l for l in labels if got[l] == g) for g in set(got.values())} == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_matches_scipy(seed, n):
    hierarchy = pytest.importorskip("scipy.cluster.hierarchy")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    dendro, _ = ward_cluster([(f"c{i}", p) for i, p in enumerate(pts.tolist())], 1)
    ref = hierarchy.linkage(pts, method="ward")
    ours = np.array([[min(m.cluster_a, m.cluster_b), max(m.cluster_a, m.cluster_b), m.merge_height, m.new_size]
                     for m in dendro.merges])
    np.testing.assert_allclose(ours[:, 2], ref[:, 2], rtol=1e-9)
    np.testing.assert_array_equal(ours[:, 3], ref[:, 3])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 8), st.integers(1, 7))
def test_input_order_irrelevant(seed, n, k):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    items = [(f"c{i}", v) for i, v in enumerate(rng.normal(size=(n, 2)).tolist())]
    shuffled = [items[i] for i in rng.permutation(n)]
    a, b = ward_cluster(items, k), ward_cluster(shuffled, k)
    assert a[1] == b[1] and a[0] == b[0]


def test_two_families():
    rng = np.random.default_rng(4)
    p1, p2 = random_stochastic(rng), random_stochastic(rng)
    noisy = lambda p: (p + rng.uniform(0, 0.01, p.shape)).reshape(-1)  # noqa: E731
    vecs = [("a1", noisy(p1)), ("a2", noisy(p1)), ("b1", noisy(p2)), ("b2", noisy(p2)), ("b3", noisy(p2))]
    _, assign = ward_cluster(vecs, 2)
    assert partition(assign) == [["a1", "a2"], ["b1", "b2", "b3"]]
