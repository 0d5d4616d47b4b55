"""Liouvillian gap over families of charge configurations.

The gap is ``-max M`` over the scanned sectors, with ``M`` the largest
nonzero real part inside one sector. Only a handful of sectors matter: the
uniform one, single flips and, in one dimension, flipped segments; in higher
dimensions small flipped blocks are scanned as a check.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .effective import gap_asymptotes
from .lattice import LatticeGraph, graph_distances, translate_sites
from .sector import (
    ModelParams,
    NonSolvableError,
    SectorConfig,
    sector_max_nonzero,
    solve_sector,
)

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_N = 14
BLOCK_SIDE_CAP = 4

Family = Union[str, Sequence[SectorConfig]]


@dataclass
class ScanPlan:
    gamma_grid: Sequence[float]
    family: Family = "paper_default"
    record_modes: bool = False
    block_cap: int = BLOCK_SIDE_CAP

    def __post_init__(self):
        grid = np.asarray(self.gamma_grid, dtype=float)
        if np.any(grid <= 0):
            raise ValueError("gamma grid must be positive")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("gamma grid must be strictly increasing")
        self.gamma_grid = [float(g) for g in grid]


@dataclass
class GapResult:
    gamma: float
    gap: float
    argmax_config: Optional[SectorConfig]
    slowest_mode: Optional[np.ndarray] = field(default=None, repr=False)
    per_config: Optional[dict] = field(default=None, repr=False)

    @property
    def argmax_flips(self) -> int:
        return -1 if self.argmax_config is None else self.argmax_config.n_flipped

    @property
    def argmax_shape(self) -> str:
        return "" if self.argmax_config is None else self.argmax_config.shape

    @property
    def defined(self) -> bool:
        return math.isfinite(self.gap)


def _block_sites(graph: LatticeGraph, sides, origin=None) -> list[int]:
    origin = origin or (0,) * graph.d
    ranges = [range(o, o + s) for o, s in zip(origin, sides)]
    return [graph.site_index(tuple(c % L for c, L in zip(coord, graph.dims)))
            for coord in itertools.product(*ranges)]


def _shape_tag(sides) -> str:
    if len(sides) == 1:
        return f"segment-{sides[0]}"
    if all(s == 1 for s in sides):
        return "point"
    return "block-" + "x".join(str(s) for s in sides)


def _canonical_sides(sides, dims) -> tuple:
    """Smallest side tuple reachable by permuting axes of equal length."""
    best = tuple(sides)
    for perm in itertools.permutations(range(len(dims))):
        if all(dims[p] == dims[a] for a, p in enumerate(perm)):
            best = min(best, tuple(sides[p] for p in perm))
    return best


def _orbit(graph: LatticeGraph, sides) -> list[list[int]]:
    if graph.periodic:
        origins = itertools.product(*(range(L) for L in graph.dims))
    else:
        origins = itertools.product(*(range(L - s + 1) for L, s in zip(graph.dims, sides)))
    return [_block_sites(graph, sides, o) for o in origins]


def candidate_configs(graph: LatticeGraph, family: Family = "paper_default",
                      params: Optional[ModelParams] = None,
                      block_cap: int = BLOCK_SIDE_CAP) -> list[SectorConfig]:
    """Charge configurations to scan.

    ``paper_default`` gives the uniform sector plus flipped segments (1D) or
    axis-aligned blocks with sides up to ``min(block_cap, L_i / 2)``.
    ``flipped`` is the same list without the uniform sector; since a single
    flip always contains the ``-gamma/2`` vacuum mode, dropping the uniform
    sector never changes the gap. Representatives sit at the origin; every
    placement is enumerated when translation covariance is unavailable (open
    boundary or per-direction couplings). ``exhaustive`` gives one of each
    ``{D, -D}`` pair.
    """
    N = graph.N
    if not isinstance(family, str):
        return list(family)
    if family == "exhaustive":
        if N > EXHAUSTIVE_MAX_N:
            raise ValueError(f"exhaustive family limited to N <= {EXHAUSTIVE_MAX_N}, got N={N}")
        out = []
        for idx in range(1 << (N - 1)):
            cfg = SectorConfig.from_index(N, idx)
            out.append(SectorConfig(cfg.D, f"flip-{cfg.n_flipped}"))
        return out
    if family not in ("paper_default", "flipped"):
        raise ValueError(f"unknown family {family!r}")

    covariant = graph.periodic and (params is None or params.uniform)
    out = [SectorConfig(np.ones(N, dtype=np.int8), "uniform")]
    seen = {out[0]}
    if graph.d == 1:
        side_ranges = [range(1, graph.dims[0] // 2 + 1)]
    else:
        side_ranges = [range(1, max(1, min(block_cap, L // 2)) + 1) for L in graph.dims]
    shapes = []
    for sides in itertools.product(*side_ranges):
        canon = _canonical_sides(sides, graph.dims)
        if canon not in shapes:
            shapes.append(canon)
    for sides in shapes:
        placements = [_block_sites(graph, sides)] if covariant else _orbit(graph, sides)
        for sites in placements:
            cfg = SectorConfig.from_flipped(N, sites, _shape_tag(sides))
            if cfg not in seen:
                seen.add(cfg)
                out.append(cfg)
    return out[1:] if family == "flipped" else out


def _tie_tol(gamma: float) -> float:
    return 1e-10 * max(1.0, gamma)


def _pick_best(entries, gamma):
    """``entries``: ``(M, config)``. Largest ``M``; near-ties go to fewer flips,
    then the smaller label."""
    entries = sorted(entries, key=lambda e: e[1].label)
    top = max(e[0] for e in entries)
    if top == -math.inf:
        return top, None
    tied = [e for e in entries if e[0] >= top - _tie_tol(gamma)]
    return min(tied, key=lambda e: (e[1].n_flipped, e[1].label))


def _require_solvable(graph, params):
    if not params.is_solvable(graph):
        raise NonSolvableError(f"gap scan needs t == delta (t={params.t}, delta={params.delta})")


def sector_values(graph: LatticeGraph, params: ModelParams, configs, workers: int = 1) -> list[float]:
    """``M`` of every config, in input order."""
    def one(cfg):
        return sector_max_nonzero(solve_sector(graph, params, cfg))[0]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, configs))
    return [one(c) for c in configs]


def liouvillian_gap(graph: LatticeGraph, params: ModelParams, gamma: Optional[float] = None,
                    family: Family = "paper_default", record_modes: bool = False,
                    workers: int = 1, block_cap: int = BLOCK_SIDE_CAP) -> GapResult:
    """Gap ``-max M`` over the configuration family at one dissipation rate."""
    if gamma is not None:
        params = params.with_gamma(gamma)
    _require_solvable(graph, params)
    configs = candidate_configs(graph, family, params, block_cap)
    values = sector_values(graph, params, configs, workers)
    best_M, best_cfg = _pick_best(list(zip(values, configs)), params.gamma)
    result = GapResult(params.gamma, -best_M, best_cfg)
    if record_modes:
        result.per_config = {c.label: v for c, v in sorted(zip(configs, values), key=lambda e: e[0].label)}
        if best_cfg is not None and best_cfg.n_flipped > 0:
            result.slowest_mode = slowest_mode_profile(graph, params, params.gamma, best_cfg).weights
    return result


@dataclass
class ZenoScan:
    results: list[GapResult]
    gamma_star: float
    gamma_c_estimate: float

    @property
    def ratio(self) -> float:
        return self.gamma_star / self.gamma_c_estimate


def zeno_scan(graph: LatticeGraph, params: ModelParams, plan: ScanPlan, workers: int = 1) -> ZenoScan:
    """Gap curve over ``plan.gamma_grid``; the crossover is its maximum."""
    _require_solvable(graph, params)
    configs = candidate_configs(graph, plan.family, params, plan.block_cap)
    results = [
        liouvillian_gap(graph, params, g, configs, plan.record_modes, workers)
        for g in plan.gamma_grid
    ]
    finite = [r for r in results if r.defined]
    gamma_star = max(finite, key=lambda r: r.gap).gamma if finite else math.nan
    est = gap_asymptotes(params, graph.d).gamma_c_estimate
    log.info("Zeno crossover at gamma*=%.4g (estimate %.4g)", gamma_star, est)
    return ZenoScan(results, gamma_star, est)


@dataclass(frozen=True)
class CrossingInterval:
    gamma_lo: float
    gamma_hi: float
    flips: int
    shape: str


def crossing_intervals(results: Sequence[GapResult]) -> list[CrossingInterval]:
    """Group consecutive grid points sharing the argmax flip count."""
    out = []
    for r in results:
        if out and out[-1].flips == r.argmax_flips:
            prev = out[-1]
            out[-1] = CrossingInterval(prev.gamma_lo, r.gamma, prev.flips, r.argmax_shape)
        else:
            out.append(CrossingInterval(r.gamma, r.gamma, r.argmax_flips, r.argmax_shape))
    return out


def sector_crossing_report(graph: LatticeGraph, params: ModelParams, gamma_grid,
                           family: Family = "flipped", workers: int = 1,
                           record_modes: bool = False) -> tuple[list[CrossingInterval], list[GapResult]]:
    """Intervals of the grid over which one flip count hosts the gap.

    The default family leaves out the uniform sector, whose ``-gamma/2``
    only ties the single-flip vacuum; near-ties favour fewer flips.
    """
    _require_solvable(graph, params)
    if len(gamma_grid) == 0:
        return [], []
    scan = zeno_scan(graph, params, ScanPlan(gamma_grid, family, record_modes), workers)
    return crossing_intervals(scan.results), scan.results


def has_transition(intervals: Sequence[CrossingInterval], before: int, after: int) -> bool:
    return any(a.flips == before and b.flips == after for a, b in zip(intervals, intervals[1:]))


@dataclass
class ModeProfile:
    weights: np.ndarray
    score: float
    mode_index: int
    energy: complex


def slowest_mode_profile(graph: LatticeGraph, params: ModelParams, gamma: float,
                         config: SectorConfig) -> ModeProfile:
    """Site weights ``|psi_l|^2`` of the single-particle mode that decides the
    sector maximum, and the weight within distance 1 of a flipped site.

    The deciding mode is the toggled one when the top occupation is steady,
    otherwise the occupied mode with the largest ``Im E`` or, with nothing
    occupied, the empty mode with the largest ``Im E``.
    """
    params = params.with_gamma(gamma)
    _require_solvable(graph, params)
    if config.n_flipped == 0:
        raise ValueError("slowest-mode profile needs at least one flipped site")
    spec = solve_sector(graph, params, config, vectors=True)
    _, m = sector_max_nonzero(spec)
    im = spec.eigenvalues.imag
    top = im > 1e-12
    toggled = np.flatnonzero(m != top)
    if toggled.size:
        a = int(toggled[0])
    elif m.any():
        a = int(np.flatnonzero(m)[np.argmax(im[m])])
    else:
        a = int(np.argmax(im))
    psi = spec.eigenvectors[:, a]
    w = np.abs(psi) ** 2
    w /= w.sum()
    near = graph_distances(graph, config.flipped_sites) <= 1
    return ModeProfile(w, float(w[near].sum()), a, complex(spec.eigenvalues[a]))


def orbit_configs(graph: LatticeGraph, config: SectorConfig) -> list[SectorConfig]:
    """All distinct lattice translates of ``config`` (periodic lattices)."""
    seen, out = set(), []
    for shift in itertools.product(*(range(L) for L in graph.dims)):
        perm = translate_sites(graph, shift)
        D = np.empty_like(config.D)
        D[perm] = config.D
        cfg = SectorConfig(D, config.shape)
        if cfg not in seen:
            seen.add(cfg)
            out.append(cfg)
    return out
