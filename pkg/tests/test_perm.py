import numpy as np
import pytest

from ctxmatch.errors import DimensionError, ParameterError
from ctxmatch.perm import (Permutation, overlap, random_permutation,
                           random_with_unfixed, unfixed_edges, unfixed_points)

from oracles import unfixed_edge_set, unfixed_point_set


def test_rejects_non_bijections():
    with pytest.raises(ParameterError):
        Permutation([0, 0, 2])
    with pytest.raises(ParameterError):
        Permutation([0, 1, 3])
    with pytest.raises(DimensionError):
        Permutation([[0, 1], [1, 0]])


def test_identity_and_transposition():
    p = Permutation.identity(4)
    assert p.tolist() == [0, 1, 2, 3]
    t = Permutation.transposition(4, 1, 3)
    assert t.tolist() == [0, 3, 2, 1]
    assert t.compose(t) == p
    with pytest.raises(ParameterError):
        Permutation.transposition(4, 2, 2)


def test_compose_convention():
    # compose is function composition: (p o q)(i) = p(q(i))
    p = Permutation([1, 2, 0])
    q = Permutation([0, 2, 1])
    pq = p.compose(q)
    for i in range(3):
        assert pq(i) == p(q(i))


def test_inverse():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = random_permutation(6, rng)
        assert p.compose(p.inverse()) == Permutation.identity(6)
        assert p.inverse().compose(p) == Permutation.identity(6)


def test_swap_images():
    p = Permutation([2, 0, 1, 3])
    q = p.swap_images(0, 3)
    assert q.tolist() == [3, 0, 1, 2]
    assert q == p.compose(Permutation.transposition(4, 0, 3))


def test_mapping_is_read_only():
    p = Permutation([1, 0])
    with pytest.raises(ValueError):
        p.mapping[0] = 0


def test_overlap():
    assert overlap(Permutation([0, 1, 2]), Permutation([0, 2, 1])) == 1
    assert overlap(Permutation.identity(5), Permutation.identity(5)) == 5


def test_displacement_sets_match_definition():
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = random_permutation(7, rng)
        m = p.tolist()
        assert unfixed_points(p) == unfixed_point_set(m)
        assert unfixed_edges(p) == unfixed_edge_set(m)


def test_swapped_pair_edge_is_fixed():
    # the edge {i,j} of a transposition keeps its image set
    t = Permutation.transposition(5, 1, 4)
    edges = unfixed_edges(t)
    assert (1, 4) not in edges
    assert len(edges) == 2 * 3  # each endpoint against the 3 other nodes


def test_random_with_unfixed_counts():
    rng = np.random.default_rng(3)
    for t in (0, 2, 3, 5):
        for _ in range(20):
            p = random_with_unfixed(8, t, rng)
            assert len(unfixed_points(p)) == t
    with pytest.raises(ParameterError):
        random_with_unfixed(8, 1, rng)
