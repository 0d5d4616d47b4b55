"""Per-sector free-fermion problem at the solvable point ``t == delta``.

With every on-site charge ``D_l = +-1`` fixed, the rotated Liouvillian is a
quadratic form ``sum_ij h_ij a_i^+ a_j`` plus the constant
``i*gamma/4 * sum_l (D_l - 1)``, where ``h`` carries hopping ``2t`` on every
bond and the imaginary potential ``-i*gamma/2 * D_l`` on site ``l``.
Liouvillian eigenvalues of the sector are

    lambda_m = -i * sum_a m_a E_a + gamma/4 * sum_l (D_l - 1)

for occupations ``m_a in {0, 1}`` of the single-particle modes ``E_a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from .lattice import Bond, LatticeGraph

TOL_IM = 1e-12


class NonSolvableError(ValueError):
    """Couplings are off the solvable point ``t == delta``."""


class SolverError(RuntimeError):
    """The dense eigensolver failed or returned an inconsistent spectrum."""


@dataclass(frozen=True)
class BondCoupling:
    """Per-direction couplings of the staggered p-wave model.

    ``t_ab, delta_ab`` act on bonds from an A site to its B neighbour in the
    positive direction; ``t_ba, delta_ba`` on bonds from a B site to its A
    neighbour in the positive direction. The uniform model has
    ``t_ab = t_ba = t``, ``delta_ab = delta`` and ``delta_ba = -delta``.
    """

    t_ab: float
    delta_ab: float
    t_ba: float
    delta_ba: float

    @classmethod
    def uniform(cls, t: float, delta: float) -> "BondCoupling":
        return cls(t, delta, t, -delta)

    def for_sign(self, sign: int) -> tuple[float, float]:
        """``(t, delta)`` of the term ``t c_i^+ c_j + delta c_i^+ c_j^+ + h.c.``
        with ``i`` in A and ``j = i + sign * e_a``."""
        if sign > 0:
            return self.t_ab, self.delta_ab
        return self.t_ba, -self.delta_ba

    @property
    def solvable(self) -> bool:
        return math.isclose(self.t_ab, self.delta_ab, rel_tol=0, abs_tol=1e-14) and \
            math.isclose(self.t_ba, -self.delta_ba, rel_tol=0, abs_tol=1e-14)


@dataclass(frozen=True)
class ModelParams:
    t: float = 1.0
    delta: float = 1.0
    gamma: float = 0.0
    bond_overrides: Optional[Mapping[int, BondCoupling]] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.bond_overrides is not None:
            object.__setattr__(self, "bond_overrides", dict(self.bond_overrides))

    def with_gamma(self, gamma: float) -> "ModelParams":
        return ModelParams(self.t, self.delta, gamma, self.bond_overrides)

    @property
    def uniform(self) -> bool:
        return not self.bond_overrides

    def direction_coupling(self, direction: int) -> BondCoupling:
        if self.bond_overrides and direction in self.bond_overrides:
            return self.bond_overrides[direction]
        return BondCoupling.uniform(self.t, self.delta)

    def bond_coupling(self, bond: Bond) -> tuple[float, float]:
        """A-first ``(t, delta)`` for one bond."""
        return self.direction_coupling(bond.direction).for_sign(bond.sign)

    def is_solvable(self, graph: Optional[LatticeGraph] = None) -> bool:
        if graph is None:
            dirs = set(self.bond_overrides or ())
            ok = all(self.direction_coupling(a).solvable for a in dirs)
            return ok and math.isclose(self.t, self.delta, rel_tol=0, abs_tol=1e-14)
        return all(
            math.isclose(*self.bond_coupling(b), rel_tol=0, abs_tol=1e-14)
            for b in graph.bonds
        )

    @property
    def solvable(self) -> bool:
        return self.is_solvable()


@dataclass(frozen=True)
class SectorConfig:
    D: np.ndarray
    shape: str = ""

    def __post_init__(self):
        D = np.asarray(self.D, dtype=np.int8)
        if D.ndim != 1 or not np.all(np.abs(D) == 1):
            raise ValueError("D must be a 1-D array of +-1")
        D.setflags(write=False)
        object.__setattr__(self, "D", D)

    @classmethod
    def from_flipped(cls, N: int, sites, shape: str = "") -> "SectorConfig":
        D = np.ones(N, dtype=np.int8)
        D[list(sites)] = -1
        return cls(D, shape)

    @classmethod
    def from_index(cls, N: int, index: int) -> "SectorConfig":
        """Bit ``N-1-l`` of ``index`` set means ``D_l = -1``."""
        bits = (index >> np.arange(N - 1, -1, -1)) & 1
        return cls(1 - 2 * bits)

    @property
    def N(self) -> int:
        return self.D.size

    @property
    def n_flipped(self) -> int:
        return int(np.count_nonzero(self.D < 0))

    @property
    def flipped_sites(self) -> np.ndarray:
        return np.flatnonzero(self.D < 0)

    def negated(self) -> "SectorConfig":
        return SectorConfig(-self.D, self.shape)

    @property
    def label(self) -> str:
        bits = "".join("1" if x < 0 else "0" for x in self.D)
        return f"{self.shape}:{bits}" if self.shape else bits

    def __eq__(self, other):
        return isinstance(other, SectorConfig) and np.array_equal(self.D, other.D)

    def __hash__(self):
        return hash(self.D.tobytes())


@dataclass
class SectorSpectrum:
    eigenvalues: np.ndarray
    D: np.ndarray
    gamma: float
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.eigenvalues.size

    @property
    def constant(self) -> complex:
        """Additive energy ``i*gamma/4 * sum_l (D_l - 1)``."""
        return 0.25j * self.gamma * float(np.sum(self.D - 1))

    @property
    def lambda_offset(self) -> float:
        """Real constant of every Liouvillian eigenvalue in the sector."""
        return 0.25 * self.gamma * float(np.sum(self.D - 1))


def tol_zero(gamma: float, N: int) -> float:
    return 1e-10 * max(1.0, gamma * N)


def _as_D(config, N: int) -> np.ndarray:
    D = config.D if isinstance(config, SectorConfig) else np.asarray(config)
    if D.shape != (N,):
        raise ValueError(f"config has {D.size} charges, lattice has {N} sites")
    return D


def build_h(graph: LatticeGraph, params: ModelParams, config) -> np.ndarray:
    """Single-particle matrix ``h({D_l})`` for the sector ``config``."""
    if not params.is_solvable(graph):
        raise NonSolvableError(
            f"sector reduction needs t == delta on every bond (t={params.t}, delta={params.delta})"
        )
    N = graph.N
    D = _as_D(config, N)
    h = np.zeros((N, N), dtype=complex)
    for b in graph.bonds:
        t_b, _ = params.bond_coupling(b)
        h[b.i, b.j] += 2 * t_b
        h[b.j, b.i] += 2 * t_b
    h[np.diag_indices(N)] = -0.5j * params.gamma * D
    return h


def diagonalize(h: np.ndarray, D=None, gamma: float = 0.0, vectors: bool = False) -> SectorSpectrum:
    """Dense diagonalization of ``h``.

    ``D`` and ``gamma`` only feed the sector constant; when ``D`` is omitted
    it is read off the diagonal of ``h``.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("h must be square")
    N = h.shape[0]
    if D is None:
        D = np.ones(N, dtype=np.int8)
        if gamma > 0:
            D = np.rint(np.real(np.diag(h) / (-0.5j * gamma))).astype(np.int8)
    try:
        if vectors:
            E, V = scipy.linalg.eig(h, check_finite=True)
        else:
            E, V = scipy.linalg.eigvals(h, check_finite=True), None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(E)):
        raise SolverError("eigensolver returned non-finite eigenvalues")
    scale = max(1.0, float(np.max(np.abs(h))) if N else 1.0)
    if abs(E.sum() - np.trace(h)) > 1e-8 * N * scale:
        raise SolverError("eigenvalue sum disagrees with trace(h)")
    return SectorSpectrum(E, np.asarray(D, dtype=np.int8), float(gamma), V)


def solve_sector(graph: LatticeGraph, params: ModelParams, config, vectors: bool = False) -> SectorSpectrum:
    D = _as_D(config, graph.N)
    return diagonalize(build_h(graph, params, D), D, params.gamma, vectors)


def assemble_lambda(spectrum: SectorSpectrum, occupation) -> complex:
    m = np.asarray(occupation, dtype=bool)
    if m.shape != (spectrum.N,):
        raise ValueError("occupation length must equal the number of modes")
    return complex(-1j * spectrum.eigenvalues[m].sum() + spectrum.lambda_offset)


def all_lambdas(spectrum: SectorSpectrum) -> np.ndarray:
    """Every ``lambda_m`` of the sector, occupation ``m`` read as a bitmask
    (mode ``a`` is bit ``a``)."""
    sums = np.zeros(1, dtype=complex)
    for E in spectrum.eigenvalues:
        sums = np.concatenate([sums, sums + E])
    return -1j * sums + spectrum.lambda_offset


def sector_max_nonzero(spectrum: SectorSpectrum, tol: Optional[float] = None,
                       tol_im: float = TOL_IM) -> tuple[float, np.ndarray]:
    """Largest real part among the sector's Liouvillian eigenvalues, skipping
    steady modes (``|Re lambda| <= tol``).

    Returns ``(M, m)`` with ``m`` the maximizing occupation. ``M`` is
    ``-inf`` when the sector has no decaying mode.
    """
    if tol is None:
        tol = tol_zero(spectrum.gamma, spectrum.N)
    im = spectrum.eigenvalues.imag
    occ = im > tol_im
    best = float(im[occ].sum()) + spectrum.lambda_offset
    if abs(best) > tol:
        return best, occ

    # Steady top: the runner-up differs from it by a single mode.
    candidates = []
    for a in np.flatnonzero(occ):
        candidates.append((best - im[a], a))
    for a in np.flatnonzero(~occ & (np.abs(im) > tol_im)):
        candidates.append((best + im[a], a))
    candidates = [c for c in candidates if abs(c[0]) > tol]
    if not candidates:
        return -math.inf, occ
    value, a = max(candidates, key=lambda c: (c[0], -c[1]))
    m = occ.copy()
    m[a] = not m[a]
    return value, m


def dispersion_0flipped(k, params: ModelParams) -> complex:
    """Closed-form band ``4t sum_a cos k_a - i gamma/2`` of the all-``+1`` sector."""
    if not params.uniform:
        raise ValueError("closed-form dispersion needs uniform couplings")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return complex(4 * params.t * np.cos(k).sum() - 0.5j * params.gamma)


def momentum_grid(dims) -> np.ndarray:
    """All allowed momenta of a periodic lattice, one row per ``k`` vector."""
    axes = [2 * np.pi * np.arange(L) / L for L in dims]
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(dims), -1).T
