"""Bipartite hypercubic lattices with periodic or open boundaries.

Sites are indexed row-major over their coordinates. The sublattice of a site
is the parity of its coordinate sum (even -> A, odd -> B). Every bond is
stored once, oriented from its A site to its B site, together with the
direction index and the sign of the displacement ``j - i`` along it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class LatticeError(ValueError):
    """Invalid lattice specification or query."""


@dataclass(frozen=True)
class LatticeSpec:
    dims: tuple[int, ...]
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        dims = tuple(int(L) for L in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if len(dims) < 1:
            raise LatticeError("lattice needs at least one dimension")
        for L in dims:
            if L < 2:
                raise LatticeError(f"linear size {L} < 2")
            if self.boundary is Boundary.PERIODIC:
                if L % 2:
                    raise LatticeError(
                        f"odd linear size {L} is not bipartite under periodic boundary"
                    )
                if L < 4:
                    # L = 2 would put two bonds between the same pair of sites
                    raise LatticeError(f"periodic linear size {L} < 4")


class Bond(NamedTuple):
    i: int          # A site
    j: int          # B site
    direction: int  # 0-based axis index
    sign: int       # +1 if j = i + e_direction, -1 if j = i - e_direction


@dataclass(frozen=True)
class LatticeGraph:
    spec: LatticeSpec
    coords: np.ndarray = field(repr=False)
    sublattice: np.ndarray = field(repr=False)  # 0 for A, 1 for B
    bonds: tuple[Bond, ...] = field(repr=False)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.spec.dims

    @property
    def d(self) -> int:
        return len(self.spec.dims)

    @property
    def N(self) -> int:
        return int(np.prod(self.spec.dims))

    @property
    def periodic(self) -> bool:
        return self.spec.boundary is Boundary.PERIODIC

    def is_A(self, site: int) -> bool:
        return self.sublattice[site] == 0

    def site_index(self, coord) -> int:
        return int(np.ravel_multi_index(tuple(coord), self.dims))

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.N, self.N), dtype=int)
        for b in self.bonds:
            adj[b.i, b.j] = adj[b.j, b.i] = 1
        return adj


def _shift(coord, axis, step, dims, periodic):
    c = list(coord)
    c[axis] += step
    if periodic:
        c[axis] %= dims[axis]
    elif not 0 <= c[axis] < dims[axis]:
        return None
    return tuple(c)


def build_lattice(spec: LatticeSpec) -> LatticeGraph:
    """Construct the lattice graph for ``spec``.

    Bonds are listed in site order of their A endpoint, then by direction,
    then with the ``+`` bond before the ``-`` bond.
    """
    dims = spec.dims
    periodic = spec.boundary is Boundary.PERIODIC
    coords = np.array(list(itertools.product(*(range(L) for L in dims))), dtype=int)
    sublattice = coords.sum(axis=1) % 2
    bonds = []
    for i, c in enumerate(coords):
        if sublattice[i] != 0:
            continue
        for axis in range(len(dims)):
            for sign in (+1, -1):
                nb = _shift(c, axis, sign, dims, periodic)
                if nb is None:
                    continue
                j = int(np.ravel_multi_index(nb, dims))
                bonds.append(Bond(i, j, axis, sign))
    return LatticeGraph(spec, coords, sublattice, tuple(bonds))


def neighbors(graph: LatticeGraph, site: int) -> list[tuple[int, int, int]]:
    """Return ``(neighbor, direction, sign)`` for every bond touching ``site``.

    ``sign`` is the sign of the displacement from ``site`` to the neighbor.
    """
    if not 0 <= site < graph.N:
        raise LatticeError(f"site {site} out of range for N={graph.N}")
    out = []
    for b in graph.bonds:
        if b.i == site:
            out.append((b.j, b.direction, b.sign))
        elif b.j == site:
            out.append((b.i, b.direction, -b.sign))
    return out


def translate_sites(graph: LatticeGraph, shift) -> np.ndarray:
    """Permutation ``p`` with ``p[l]`` the image of site ``l`` under ``shift``.

    Only meaningful under periodic boundaries.
    """
    new = (graph.coords + np.asarray(shift, dtype=int)) % np.asarray(graph.dims)
    return np.ravel_multi_index(new.T, graph.dims)


def graph_distances(graph: LatticeGraph, sources) -> np.ndarray:
    """Breadth-first graph distance from the nearest site in ``sources``."""
    dist = np.full(graph.N, -1, dtype=int)
    adj = [[] for _ in range(graph.N)]
    for b in graph.bonds:
        adj[b.i].append(b.j)
        adj[b.j].append(b.i)
    frontier = list(sources)
    for s in frontier:
        dist[s] = 0
    while frontier:
        nxt = []
        for s in frontier:
            for nb in adj[s]:
                if dist[nb] < 0:
                    dist[nb] = dist[s] + 1
                    nxt.append(nb)
        frontier = nxt
    return dist
