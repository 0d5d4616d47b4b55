"""Strong- and weak-dissipation limits: domain walls, spin models, Zeno estimate.

In the strong-dissipation limit each site is either empty (spin up) or
doubly occupied (spin down) in the doubled-fermion picture, and second-order
hopping produces an XYZ-type spin model. At ``t == delta`` it is an Ising
model in ``tau^y`` whose energy counts domain walls of the charges ``D_l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .lattice import LatticeGraph
from .oracle import DEFAULT_CAP, OracleSizeError
from .sector import ModelParams, NonSolvableError, SectorConfig

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# columns: tau^y = +1 and tau^y = -1 eigenvectors in the (empty, doubly occupied) basis
TAU_Y_BASIS = np.array([[1, 1], [1j, -1j]]) / np.sqrt(2)


@dataclass(frozen=True)
class EffectiveCouplings:
    J_perp: float
    J: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "EffectiveCouplings":
        t, d, g = params.t, params.delta, params.gamma
        if g <= 0:
            raise ValueError("effective couplings need gamma > 0")
        return cls((t * t - d * d) / g, (t * t + d * d) / g)


def domain_wall_length(config: SectorConfig, graph: LatticeGraph) -> int:
    D = config.D if isinstance(config, SectorConfig) else np.asarray(config)
    return sum(1 for b in graph.bonds if D[b.i] * D[b.j] < 0)


def ising_prediction(config: SectorConfig, params: ModelParams, graph: LatticeGraph) -> float:
    """Slowest real part ``-4 t^2 L_D / gamma`` predicted for a sector at large gamma."""
    if not params.is_solvable(graph):
        raise NonSolvableError("Ising limit needs t == delta")
    if not params.uniform:
        raise ValueError("Ising prediction assumes uniform couplings")
    return -4 * params.t ** 2 * domain_wall_length(config, graph) / params.gamma


@dataclass(frozen=True)
class GapAsymptotes:
    small_gamma: float
    large_gamma: float
    gamma_c_estimate: float


def gap_asymptotes(params: ModelParams, d: int) -> GapAsymptotes:
    """``gamma/2`` below the Zeno point, ``8 t^2 d / gamma`` above it, and the
    crossing estimate ``4 t sqrt(d)`` where the two meet."""
    t, g = params.t, params.gamma
    large = 8 * t * t * d / g if g > 0 else math.inf
    return GapAsymptotes(g / 2, large, 4 * abs(t) * math.sqrt(d))


def _site_op(op: np.ndarray, site: int, N: int) -> np.ndarray:
    return reduce(np.kron, [op if l == site else np.eye(2) for l in range(N)])


def build_spin_effective(graph: LatticeGraph, params: ModelParams, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``H_eff = -i sum_b [J_perp (-tz tz + tx tx) + J (ty ty + 1)]`` on ``2**N`` states.

    Basis bit ``N-1-l`` set means site ``l`` doubly occupied (spin down).
    """
    N = graph.N
    if N > cap:
        raise OracleSizeError(f"N={N} exceeds the cap {cap}")
    cp = EffectiveCouplings.from_params(params)
    dim = 1 << N
    H = np.zeros((dim, dim), dtype=complex)
    ops = {name: [_site_op(m, l, N) for l in range(N)] for name, m in (("x", SX), ("y", SY), ("z", SZ))}
    eye = np.eye(dim)
    for b in graph.bonds:
        x, y, z = (ops[k] for k in "xyz")
        H += cp.J_perp * (-z[b.i] @ z[b.j] + x[b.i] @ x[b.j])
        H += cp.J * (y[b.i] @ y[b.j] + eye)
    return -1j * H


def to_tau_y_basis(H: np.ndarray, N: int) -> np.ndarray:
    """Rewrite a spin operator in the product basis of ``tau^y`` eigenstates
    (bit set means ``tau^y = -1``)."""
    V = reduce(np.kron, [TAU_Y_BASIS] * N)
    return V.conj().T @ H @ V


def tau_D_map(spins, graph: LatticeGraph) -> SectorConfig:
    """``D = tau^y`` on A sites and ``D = -tau^y`` on B sites."""
    spins = np.asarray(spins)
    return SectorConfig(np.where(graph.sublattice == 0, spins, -spins))


def D_tau_map(config: SectorConfig, graph: LatticeGraph) -> np.ndarray:
    return np.where(graph.sublattice == 0, config.D, -config.D).astype(int)
