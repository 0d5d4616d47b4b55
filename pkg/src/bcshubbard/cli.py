"""Command-line front end.

Each subcommand reads one YAML config and writes a table as CSV (with
``#`` metadata lines) or as a JSON array of row objects.

Exit codes: 0 ok, 2 config error, 3 non-solvable couplings, 4 solver
failure, 5 failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import effective, gap, oracle, sector
from .config import ConfigError, RunConfig, load_config
from .lattice import LatticeError, LatticeGraph, build_lattice
from .spectra import multiset_mismatch

log = logging.getLogger("bcshubbard")

EXIT_OK, EXIT_CONFIG, EXIT_NONSOLVABLE, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4, 5


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


@dataclass
class ResultTable:
    header: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    failed: bool = False

    def add(self, *row):
        self.rows.append(list(row))


def _fmt(x, precision: int) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x + 0.0:.{precision}g}"
    return "" if x is None else str(x)


def render(table: ResultTable, fmt: str = "csv", precision: int = 12) -> str:
    cells = [[_fmt(v, precision) for v in row] for row in table.rows]
    if fmt == "json":
        objs = []
        for row, raw in zip(cells, table.rows):
            obj = {}
            for key, text, value in zip(table.header, row, raw):
                if isinstance(value, (float, np.floating, int, np.integer)) and not isinstance(value, bool):
                    num = float(text) if text not in ("", "nan", "inf", "-inf") else None
                    obj[key] = int(num) if isinstance(value, (int, np.integer)) else num
                else:
                    obj[key] = text if not isinstance(value, (bool, np.bool_)) else bool(value)
            objs.append(obj)
        return json.dumps(objs, indent=1) + "\n"
    buf = io.StringIO()
    for k, v in table.metadata.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    w.writerows(cells)
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------


def _graph(cfg: RunConfig) -> LatticeGraph:
    return build_lattice(cfg.lattice_spec())


def _family(cfg: RunConfig, graph: LatticeGraph):
    fam = cfg.scan.family
    if fam == "exhaustive" and graph.N > min(cfg.scan.exhaustive_cap, gap.EXHAUSTIVE_MAX_N):
        raise ConfigError(f"exhaustive family needs N <= {cfg.scan.exhaustive_cap}, got N={graph.N}")
    return fam


def _require_solvable(graph, params):
    if not params.is_solvable(graph):
        raise sector.NonSolvableError(f"t={params.t} != delta={params.delta}")


def cmd_solve_sector(cfg: RunConfig, flipped=(), negate: bool = False) -> ResultTable:
    graph = _graph(cfg)
    params = cfg.model_params(cfg.single_gamma())
    _require_solvable(graph, params)
    if any(not 0 <= s < graph.N for s in flipped):
        raise ConfigError(f"flipped sites must lie in [0, {graph.N})")
    config = sector.SectorConfig.from_flipped(graph.N, flipped)
    if negate:
        config = config.negated()
    spec = sector.solve_sector(graph, params, config)
    M, _ = sector.sector_max_nonzero(spec)
    prec = cfg.output.precision
    E = spec.eigenvalues.copy()
    # solver noise must not leak into the table: {D} and {-D} print identically
    chop = 1e-12 * max(1.0, float(np.abs(E).max()))
    E.real[np.abs(E.real) < chop] = 0.0
    E.imag[np.abs(E.imag) < chop] = 0.0
    E = E[np.lexsort((np.round(E.imag, prec - 2), np.round(E.real, prec - 2)))]
    table = ResultTable(["alpha", "re_E", "im_E"])
    for a, e in enumerate(E):
        table.add(a, e.real, e.imag)
    table.add("constant", spec.constant.real, spec.constant.imag)
    table.add("sector_max", M, 0.0)
    return table


def cmd_zeno_scan(cfg: RunConfig, workers: int = 1) -> ResultTable:
    graph = _graph(cfg)
    params = cfg.model_params()
    _require_solvable(graph, params)
    table = ResultTable(["gamma", "gap", "argmax_flips", "argmax_shape",
                         "small_gamma_pred", "large_gamma_pred"])
    grid = cfg.gamma_grid()
    if grid.size == 0:
        return table
    plan = gap.ScanPlan(grid, _family(cfg, graph), False, cfg.scan.block_cap)
    scan = gap.zeno_scan(graph, params, plan, workers)
    for r in scan.results:
        asym = effective.gap_asymptotes(params.with_gamma(r.gamma), graph.d)
        table.add(r.gamma, r.gap, r.argmax_flips, r.argmax_shape, asym.small_gamma, asym.large_gamma)
    table.metadata["gamma_star"] = _fmt(scan.gamma_star, cfg.output.precision)
    table.metadata["gamma_c_estimate"] = _fmt(scan.gamma_c_estimate, cfg.output.precision)
    return table


def _column_name(cfg: sector.SectorConfig, used: set) -> str:
    name = cfg.shape or cfg.label
    return name if name not in used else cfg.label


def cmd_crossing_report(cfg: RunConfig, workers: int = 1) -> ResultTable:
    graph = _graph(cfg)
    params = cfg.model_params()
    _require_solvable(graph, params)
    fam = _family(cfg, graph)
    if fam == "paper_default":
        fam = "flipped"
    configs = gap.candidate_configs(graph, fam, params, cfg.scan.block_cap)
    header = ["gamma", "flips_of_argmax", "segment_length", "argmax_shape"]
    columns = []
    if cfg.scan.record_modes:
        used = set()
        for c in configs:
            name = _column_name(c, used)
            used.add(name)
            columns.append((c.label, name))
        header += [name for _, name in columns]
    table = ResultTable(header)
    grid = cfg.gamma_grid()
    if grid.size == 0:
        return table
    intervals, results = gap.sector_crossing_report(
        graph, params, grid, configs, workers, record_modes=cfg.scan.record_modes
    )
    for r in results:
        shape = r.argmax_shape
        seg = int(shape.split("-")[1]) if shape.startswith("segment-") else None
        row = [r.gamma, r.argmax_flips, seg, shape]
        if cfg.scan.record_modes:
            row += [abs(r.per_config[label]) for label, _ in columns]
        table.add(*row)
    table.metadata["intervals"] = "; ".join(
        f"[{_fmt(i.gamma_lo, 6)}, {_fmt(i.gamma_hi, 6)}] flips={i.flips}" for i in intervals
    )
    return table


def _check_row(table, name, value, tol, ok=None):
    if ok is None:
        ok = value < tol
    table.add(name, value, tol, "pass" if ok else "fail")
    table.failed |= not ok


def cmd_oracle_check(cfg: RunConfig) -> ResultTable:
    graph = _graph(cfg)
    cap = cfg.oracle.cap
    if graph.N > cap:
        raise ConfigError(f"oracle-check needs N <= {cap}, got N={graph.N}")
    params = cfg.model_params(cfg.single_gamma())
    table = ResultTable(["check", "value", "tol", "status"])

    L = oracle.build_superoperator_direct(graph, params, cap)
    D = 1 << graph.N
    eye = np.eye(D).reshape(-1)
    _check_row(table, "trace_preservation", float(np.abs(eye @ L.matrix).max()), 1e-12)

    Lf = oracle.build_superoperator_fermionic(graph, params, cap)
    _check_row(table, "fermionic_construction", float(np.abs(Lf.matrix - L.matrix).max()), 1e-12)
    H = oracle.rotate_to_bcs_hubbard(L, graph)
    Hd = oracle.build_bcs_hubbard(graph, params, cap)
    _check_row(table, "bcs_hubbard_rotation", float(np.abs(H - Hd).max()), 1e-10)

    ev = oracle.full_spectrum(L)
    _check_row(table, "conjugation_symmetry", multiset_mismatch(ev, ev.conj()), 1e-10)
    _check_row(table, "nonpositive_real_part", float(ev.real.max()), 1e-10)

    st = oracle.steady_states(graph)
    for name, rho in (("steady_rho_even", st.rho_even), ("steady_rho_odd", st.rho_odd)):
        _check_row(table, name, float(np.linalg.norm(L.apply(rho))), 1e-10)
    tr = abs(complex(np.trace(st.rho_plus)))
    _check_row(table, "trace_rho_plus", tr, 0.0, ok=tr == 0.0)
    _check_row(table, "parity_conservation", float(np.linalg.norm(L.apply_adjoint(oracle.parity_operator(graph.N)))), 1e-12)

    if params.is_solvable(graph):
        rep = oracle.sector_partition_check(graph, params, cap=cap, raise_on_failure=False)
        _check_row(table, "sector_partition", rep.max_mismatch, rep.tol)
    else:
        table.add("sector_partition", None, 1e-8, "skipped (non-solvable)")

    table.add("kernel_dimension", oracle.kernel_dimension(L), None, "info")
    table.add("exact_gap", oracle.gap_from_spectrum(ev, sector.tol_zero(params.gamma, graph.N)), None, "info")
    return table


def cmd_steady_state(cfg: RunConfig, q_values=(-1.0, -0.5, 0.0, 0.5, 1.0)) -> ResultTable:
    graph = _graph(cfg)
    cap = cfg.oracle.cap
    if graph.N > cap:
        raise ConfigError(f"steady-state needs N <= {cap}, got N={graph.N}")
    params = cfg.model_params(cfg.model.gamma or 0.0)
    L = oracle.build_superoperator_direct(graph, params, cap)
    st = oracle.steady_states(graph)
    table = ResultTable(["state", "trace", "min_eigenvalue", "residual", "psd"])
    states = [("rho_plus", st.rho_plus), ("rho_minus", st.rho_minus),
              ("rho_even", st.rho_even), ("rho_odd", st.rho_odd)]
    states += [(f"rho_q={q:g}", st.rho_q(q)) for q in q_values]
    for name, rho in states:
        table.add(name, float(np.trace(rho).real), float(np.linalg.eigvalsh(rho).min()),
                  float(np.linalg.norm(L.apply(rho))), oracle.is_psd(rho))
    return table


# -- entry point ---------------------------------------------------------------


def _parse_sites(text: str):
    if not text:
        return ()
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad site list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcshubbard", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="YAML run configuration")
        sp.add_argument("-o", "--output", help="output path (overrides output.path)")
        sp.add_argument("--format", choices=["csv", "json"], help="overrides output.format")
        sp.add_argument("--precision", type=int, help="significant digits")
        return sp

    sp = add("solve-sector", "single-particle spectrum of one charge sector")
    sp.add_argument("--flipped", type=_parse_sites, default=(), help="comma-separated sites with D=-1")
    sp.add_argument("--negate", action="store_true", help="use the globally flipped sector")
    for name, help_ in (("zeno-scan", "gap curve over a gamma grid"),
                        ("crossing-report", "which sector hosts the gap along a gamma grid")):
        sp = add(name, help_)
        sp.add_argument("--workers", type=int, default=1, help="parallel sector evaluations")
    add("oracle-check", "brute-force cross-checks on a small lattice")
    add("steady-state", "bistable steady states and their properties")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output.path = args.output
        if args.format:
            cfg.output.format = args.format
        if args.precision:
            cfg.output.precision = args.precision
        if args.command == "solve-sector":
            table = cmd_solve_sector(cfg, args.flipped, args.negate)
        elif args.command == "zeno-scan":
            table = cmd_zeno_scan(cfg, args.workers)
        elif args.command == "crossing-report":
            table = cmd_crossing_report(cfg, args.workers)
        elif args.command == "oracle-check":
            table = cmd_oracle_check(cfg)
        else:
            table = cmd_steady_state(cfg)
    except (ConfigError, LatticeError, oracle.OracleSizeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except sector.NonSolvableError as exc:
        print(f"non-solvable parameters: {exc}", file=sys.stderr)
        return EXIT_NONSOLVABLE
    except sector.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    table.metadata = {
        "bcshubbard": _version(),
        "command": args.command,
        "config": json.dumps(cfg.to_dict(), sort_keys=True),
        **table.metadata,
    }
    text = render(table, cfg.output.format, cfg.output.precision)
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_CHECK if table.failed else EXIT_OK


def main():
    sys.exit(run())
