import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcshubbard.lattice import (
    Boundary,
    LatticeError,
    LatticeSpec,
    build_lattice,
    graph_distances,
    neighbors,
    translate_sites,
)


def test_ring_of_four():
    g = build_lattice(LatticeSpec((4,)))
    assert g.N == 4
    assert len(g.bonds) == 4
    assert ["AB"[s] for s in g.sublattice] == ["A", "B", "A", "B"]


def test_square_4x4():
    g = build_lattice(LatticeSpec((4, 4)))
    assert g.N == 16
    assert len(g.bonds) == 32
    assert all(len(neighbors(g, s)) == 4 for s in range(g.N))


@pytest.mark.parametrize("dims,boundary", [((3,), "periodic"), ((2,), "periodic"),
                                           ((4, 5), "periodic"), ((1,), "open"), ((), "open")])
def test_rejects_bad_sizes(dims, boundary):
    with pytest.raises(LatticeError):
        LatticeSpec(dims, boundary)


def test_neighbors_periodic_and_open():
    ring = build_lattice(LatticeSpec((4,)))
    assert {n for n, _, _ in neighbors(ring, 0)} == {1, 3}
    chain = build_lattice(LatticeSpec((4,), Boundary.OPEN))
    assert [n for n, _, _ in neighbors(chain, 0)] == [1]
    with pytest.raises(LatticeError):
        neighbors(ring, 4)


def test_bond_orientation_signs():
    g = build_lattice(LatticeSpec((6,)))
    for b in g.bonds:
        assert g.is_A(b.i) and not g.is_A(b.j)
        assert (g.coords[b.j][0] - g.coords[b.i][0]) % 6 == b.sign % 6


def test_row_major_indexing():
    g = build_lattice(LatticeSpec((4, 6)))
    for idx, c in enumerate(g.coords):
        assert g.site_index(c) == idx == c[0] * 6 + c[1]


def test_deterministic():
    a = build_lattice(LatticeSpec((4, 4)))
    b = build_lattice(LatticeSpec((4, 4)))
    assert a.bonds == b.bonds


def test_graph_distances_ring():
    g = build_lattice(LatticeSpec((8,)))
    assert list(graph_distances(g, [0])) == [0, 1, 2, 3, 4, 3, 2, 1]


dims_strategy = st.lists(st.sampled_from([4, 6, 8]), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(dims_strategy)
def test_periodic_invariants(dims):
    g = build_lattice(LatticeSpec(tuple(dims)))
    d = len(dims)
    assert len(g.bonds) == d * g.N
    degree = np.bincount([s for b in g.bonds for s in (b.i, b.j)], minlength=g.N)
    assert np.all(degree == 2 * d)
    for b in g.bonds:
        assert g.sublattice[b.i] != g.sublattice[b.j]
    for s in range(g.N):
        assert len(neighbors(g, s)) == 2 * d


@settings(max_examples=20, deadline=None)
@given(dims_strategy, st.data())
def test_translation_permutes_bonds(dims, data):
    g = build_lattice(LatticeSpec(tuple(dims)))
    axis = data.draw(st.integers(0, len(dims) - 1))
    shift = [0] * len(dims)
    shift[axis] = 1
    perm = translate_sites(g, shift)
    pairs = {frozenset((b.i, b.j)) for b in g.bonds}
    moved = {frozenset((int(perm[b.i]), int(perm[b.j]))) for b in g.bonds}
    assert moved == pairs


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(2, 5), min_size=1, max_size=3))
def test_open_bipartite(dims):
    g = build_lattice(LatticeSpec(tuple(dims), Boundary.OPEN))
    for b in g.bonds:
        assert g.sublattice[b.i] == 0 and g.sublattice[b.j] == 1
    expected = sum((L - 1) * g.N // L for L in dims)
    assert len(g.bonds) == expected
