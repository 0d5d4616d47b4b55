"""Exact sector solution of the dephasing BCS-Hubbard Liouvillian."""
from .lattice import Boundary, LatticeGraph, LatticeSpec, build_lattice, neighbors
from .sector import (
    BondCoupling,
    ModelParams,
    NonSolvableError,
    SectorConfig,
    SectorSpectrum,
    SolverError,
    assemble_lambda,
    build_h,
    diagonalize,
    dispersion_0flipped,
    sector_max_nonzero,
    solve_sector,
)
from .gap import GapResult, ScanPlan, candidate_configs, liouvillian_gap, zeno_scan

__version__ = "0.1.0"
