"""Brute-force many-body Lindbladian on small lattices.

Fock states of ``N`` spinless modes are integers whose bit ``N-1-l`` is the
occupation of site ``l``; Jordan-Wigner strings run over lower site indices.
Density matrices are vectorized ket-first, ``|n><m| -> |n>|m>``, which is
numpy's row-major flatten: ``vec(A rho B) = (A kron B.T) vec(rho)``.

For the doubled-fermion picture the ``2N`` modes are ordered with the
ket (``c``) modes first and the bra (``c~``) modes after, so the doubled
Fock index of ``|n>|m>`` is again ``n * 2**N + m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .lattice import LatticeGraph
from .sector import ModelParams, NonSolvableError, SolverError, all_lambdas, solve_sector, tol_zero
from .sector import SectorConfig
from .spectra import multiset_mismatch

DEFAULT_CAP = 6


class OracleSizeError(ValueError):
    """Lattice too large for dense many-body construction."""


class SpectrumMismatchError(AssertionError):
    """Sector decomposition disagrees with the brute-force spectrum."""


def _check_cap(N: int, cap: int) -> None:
    if N > cap:
        raise OracleSizeError(f"N={N} exceeds the oracle cap {cap}")


@lru_cache(maxsize=16)
def annihilators(n_modes: int) -> tuple[sp.csr_matrix, ...]:
    """Jordan-Wigner annihilation operators ``c_0 .. c_{n-1}`` as sparse matrices."""
    dim = 1 << n_modes
    states = np.arange(dim)
    ops = []
    for l in range(n_modes):
        bit = n_modes - 1 - l
        occupied = (states >> bit) & 1 == 1
        src = states[occupied]
        # modes with index < l sit in the higher bits
        string = np.array([bin(s >> (bit + 1)).count("1") for s in src], dtype=int)
        data = np.where(string % 2, -1.0, 1.0)
        ops.append(sp.csr_matrix((data, (src ^ (1 << bit), src)), shape=(dim, dim)))
    return tuple(ops)


def number_operators(n_modes: int) -> list[sp.csr_matrix]:
    return [(c.T @ c).tocsr() for c in annihilators(n_modes)]


def particle_numbers(n_modes: int) -> np.ndarray:
    states = np.arange(1 << n_modes)
    return np.array([bin(s).count("1") for s in states])


def parity_operator(N: int) -> np.ndarray:
    """``S = prod_l (-1)^{n_l}`` as a dense diagonal matrix."""
    return np.diag((-1.0) ** particle_numbers(N))


def _quadratic_terms(graph: LatticeGraph, params: ModelParams, c, tilde_sign=None):
    """``sum_b t_b c_i^+ c_j + delta_b c_i^+ c_j^+ + h.c.`` on the operators ``c``."""
    dim = c[0].shape[0]
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for b in graph.bonds:
        t_b, d_b = params.bond_coupling(b)
        ci, cj = c[b.i], c[b.j]
        hop = ci.T @ cj
        pair = ci.T @ cj.T
        H = H + t_b * (hop + hop.T) + d_b * (pair + pair.T)
    return H


def build_H0(graph: LatticeGraph, params: ModelParams, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Many-body Hamiltonian with hopping and staggered pairing on every A-B bond."""
    _check_cap(graph.N, cap)
    return _quadratic_terms(graph, params, annihilators(graph.N)).toarray()


@dataclass
class Superoperator:
    """Liouvillian acting on ket-first vectorized ``2**N x 2**N`` density matrices."""

    matrix: np.ndarray
    N: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        D = 1 << self.N
        return (self.matrix @ rho.reshape(-1)).reshape(D, D)

    def apply_adjoint(self, X: np.ndarray) -> np.ndarray:
        """Heisenberg-picture action, adjoint under the Hilbert-Schmidt product."""
        D = 1 << self.N
        return (self.matrix.conj().T @ X.reshape(-1)).reshape(D, D)


def build_superoperator_direct(graph: LatticeGraph, params: ModelParams,
                               cap: int = DEFAULT_CAP) -> Superoperator:
    """``rho -> -i[H0, rho] + gamma sum_l (n_l rho n_l - {n_l, rho}/2)``."""
    N = graph.N
    _check_cap(N, cap)
    H = build_H0(graph, params, cap)
    D = 1 << N
    I = np.eye(D)
    L = -1j * (np.kron(H, I) - np.kron(I, H.T))
    g = params.gamma
    if g:
        for n in number_operators(N):
            n = n.toarray()
            L += g * (np.kron(n, n) - 0.5 * np.kron(n, I) - 0.5 * np.kron(I, n))
    return Superoperator(L, N)


def bra_parity_gauge(N: int) -> np.ndarray:
    """Diagonal signs ``(-1)^{N_m (N_m - 1) / 2}`` on the bra particle number.

    Conjugating by this gauge turns the Jordan-Wigner ``c~`` modes of the
    doubled Fock space into the right-multiplication maps with the
    ``(-1)^{N_m + N_n}`` factors of the vectorization rules.
    """
    Nm = particle_numbers(N)
    g = (-1.0) ** (Nm * (Nm - 1) // 2)
    return np.tile(g, 1 << N)


def _doubled_modes(N: int):
    ops = annihilators(2 * N)
    return ops[:N], ops[N:]


def build_superoperator_fermionic(graph: LatticeGraph, params: ModelParams,
                                  cap: int = DEFAULT_CAP) -> Superoperator:
    """Liouvillian assembled from two fermion species on ``2N`` modes.

    ``-i sum_b [t_b (c_i^+ c_j - c~_i^+ c~_j) + delta_b (c_i^+ c_j^+ + c~_i^+ c~_j^+) + h.c.]
    + gamma sum_l (n_l - 1/2)(n~_l - 1/2) - N gamma/4``, returned in the
    density-matrix basis.
    """
    N = graph.N
    _check_cap(N, cap)
    c, ct = _doubled_modes(N)
    dim = 1 << (2 * N)
    K = sp.csr_matrix((dim, dim), dtype=complex)
    for b in graph.bonds:
        t_b, d_b = params.bond_coupling(b)
        hop = c[b.i].T @ c[b.j] - ct[b.i].T @ ct[b.j]
        pair = c[b.i].T @ c[b.j].T + ct[b.i].T @ ct[b.j].T
        K = K + t_b * (hop + hop.T) + d_b * (pair + pair.T)
    L = -1j * K
    eye = sp.identity(dim, format="csr")
    for l in range(N):
        n, nt = c[l].T @ c[l], ct[l].T @ ct[l]
        L = L + params.gamma * ((n - 0.5 * eye) @ (nt - 0.5 * eye))
    L = L - 0.25 * N * params.gamma * eye
    g = bra_parity_gauge(N)
    return Superoperator(g[:, None] * L.toarray() * g[None, :], N)


def _rotation_phases(graph: LatticeGraph) -> np.ndarray:
    """Diagonal of ``U = prod exp[i pi/2 (n~_A - n~_B)]`` on the doubled space."""
    N = graph.N
    m = np.arange(1 << N)
    bits = (m[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    stagger = np.where(graph.sublattice == 0, 1, -1)
    phase = np.exp(0.5j * np.pi * (bits @ stagger))
    return np.tile(phase, 1 << N)


def rotate_to_bcs_hubbard(L: Superoperator, graph: LatticeGraph) -> np.ndarray:
    """``H = i U^+ L U`` in the doubled-fermion basis (ket modes = spin up)."""
    g = bra_parity_gauge(L.N)
    Lf = g[:, None] * L.matrix * g[None, :]
    u = _rotation_phases(graph)
    return 1j * (u.conj()[:, None] * Lf * u[None, :])


def build_bcs_hubbard(graph: LatticeGraph, params: ModelParams, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Non-Hermitian BCS-Hubbard Hamiltonian with imaginary Hubbard ``i*gamma``,
    assembled term by term on ``2N`` modes (up spins first)."""
    N = graph.N
    _check_cap(N, cap)
    up, dn = _doubled_modes(N)
    H = _quadratic_terms(graph, params, up) + _quadratic_terms(graph, params, dn)
    eye = sp.identity(1 << (2 * N), format="csr")
    for l in range(N):
        nu, nd = up[l].T @ up[l], dn[l].T @ dn[l]
        H = H + 1j * params.gamma * ((nu - 0.5 * eye) @ (nd - 0.5 * eye))
    H = H - 0.25j * N * params.gamma * eye
    return H.toarray()


@dataclass
class SteadyStates:
    rho_plus: np.ndarray
    rho_minus: np.ndarray

    @property
    def rho_even(self) -> np.ndarray:
        return self.rho_minus + self.rho_plus

    @property
    def rho_odd(self) -> np.ndarray:
        return self.rho_minus - self.rho_plus

    def rho_q(self, q: float) -> np.ndarray:
        return self.rho_minus + q * self.rho_plus


def steady_states(graph: LatticeGraph) -> SteadyStates:
    """``rho- = I / 2^N`` and ``rho+ = S / 2^N``; their sum and difference are
    the maximally mixed states of even and odd particle number."""
    D = 1 << graph.N
    return SteadyStates(parity_operator(graph.N) / D, np.eye(D) / D)


def is_psd(rho: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol)


def full_spectrum(L: Superoperator) -> np.ndarray:
    try:
        ev = scipy.linalg.eigvals(L.matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise SolverError("non-finite Liouvillian eigenvalues")
    return ev


def gap_from_spectrum(ev: np.ndarray, tol: float) -> float:
    """``-max Re(lambda)`` over ``|Re(lambda)| > tol``; ``inf`` if nothing decays."""
    re = ev.real[np.abs(ev.real) > tol]
    return math.inf if re.size == 0 else float(-re.max())


def exact_gap(L: Superoperator, gamma: float, tol: float | None = None) -> float:
    if tol is None:
        tol = tol_zero(gamma, L.N)
    return gap_from_spectrum(full_spectrum(L), tol)


def kernel_dimension(L: Superoperator, tol: float = 1e-10) -> int:
    s = scipy.linalg.svdvals(L.matrix)
    return int(np.count_nonzero(s < tol))


def sector_union_spectrum(graph: LatticeGraph, params: ModelParams) -> np.ndarray:
    """All ``lambda_m`` over all ``2**N`` sectors and occupations."""
    out = []
    for idx in range(1 << graph.N):
        out.append(all_lambdas(solve_sector(graph, params, SectorConfig.from_index(graph.N, idx))))
    return np.concatenate(out)


@dataclass
class PartitionReport:
    n_eigenvalues: int
    n_sectors: int
    max_mismatch: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_mismatch < self.tol


def sector_partition_check(graph: LatticeGraph, params: ModelParams, tol: float = 1e-8,
                           cap: int = DEFAULT_CAP, raise_on_failure: bool = True) -> PartitionReport:
    """Compare the sector-assembled spectrum with the brute-force one."""
    _check_cap(graph.N, cap)
    if not params.is_solvable(graph):
        raise NonSolvableError("partition check needs t == delta")
    exact = full_spectrum(build_superoperator_direct(graph, params, cap))
    union = sector_union_spectrum(graph, params)
    mismatch = multiset_mismatch(exact, union, radius=max(10 * tol, 1e-6))
    report = PartitionReport(exact.size, 1 << graph.N, mismatch, tol)
    if raise_on_failure and not report.passed:
        raise SpectrumMismatchError(
            f"sector spectrum differs from brute force by {mismatch:.3e} (tol {tol:.1e})"
        )
    return report
