import csv
import io
import json

import numpy as np
import pytest

from bcshubbard import cli, sector
from bcshubbard.config import ConfigError, emit_config, parse_config

BASE = """
lattice: {dims: [4], boundary: periodic}
model: {t: 1.0, delta: 1.0, gamma: 0.7}
"""

SCAN = """
lattice: {dims: [40]}
model:
  t: 1.0
  delta: 1.0
  gamma_grid: {min: 0.1, max: 100, points: 13}
"""


def _write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _rows(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def _meta(text):
    return dict(line[2:].split(": ", 1) for line in text.splitlines() if line.startswith("# "))


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_round_trip():
    cfg = parse_config(SCAN + "scan: {family: flipped, record_modes: true}\noutput: {precision: 8}\n")
    again = parse_config(emit_config(cfg))
    assert again == cfg
    assert np.allclose(again.gamma_grid(), np.geomspace(0.1, 100, 13))


def test_config_explicit_values_and_linear():
    cfg = parse_config("lattice: {dims: [4]}\nmodel: {gamma_grid: {values: [0.5, 1, 2]}}\n")
    assert list(cfg.gamma_grid()) == [0.5, 1, 2]
    cfg = parse_config("lattice: {dims: [4]}\nmodel: {gamma_grid: {min: 1, max: 3, points: 3, spacing: linear}}\n")
    assert list(cfg.gamma_grid()) == [1, 2, 3]


@pytest.mark.parametrize("text", [
    "lattice: {dims: [4], colour: red}\n",
    "lattice: {dims: [4]}\nmodel: {gamma: -1}\n",
    "lattice: {dims: [4]}\nscan: {family: everything}\n",
    "lattice: {dims: [4]}\noutput: {format: xml}\n",
    "- not a mapping\n",
])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        cfg = parse_config(text)
        cfg.model_params()


def test_exit_config_error(tmp_path, capsys):
    code, out, err = _run(capsys, "solve-sector", _write(tmp_path, "lattice: {dims: [5]}\nmodel: {gamma: 1}\n"))
    assert code == 2 and "config error" in err and out == ""
    code, _, _ = _run(capsys, "oracle-check", _write(tmp_path, "lattice: {dims: [8]}\nmodel: {gamma: 1}\n"))
    assert code == 2
    code, _, _ = _run(capsys, "solve-sector", str(tmp_path / "missing.yaml"))
    assert code == 2


def test_exit_non_solvable(tmp_path, capsys):
    path = _write(tmp_path, "lattice: {dims: [4]}\nmodel: {t: 1, delta: 0.5, gamma: 0.7}\n")
    for cmd in ("solve-sector", "zeno-scan", "crossing-report"):
        code, _, err = _run(capsys, cmd, path)
        assert code == 3 and "non-solvable" in err


def test_exit_solver_failure(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise sector.SolverError("eigensolver did not converge")
    monkeypatch.setattr(sector, "solve_sector", boom)
    code, _, err = _run(capsys, "solve-sector", _write(tmp_path, BASE))
    assert code == 4 and "solver failure" in err


def test_solve_sector_table(tmp_path, capsys):
    code, out, _ = _run(capsys, "solve-sector", _write(tmp_path, BASE), "--flipped", "0")
    assert code == 0
    rows = _rows(out)
    assert [r["alpha"] for r in rows] == ["0", "1", "2", "3", "constant", "sector_max"]
    assert float(rows[-2]["re_E"]) == 0 and float(rows[-2]["im_E"]) == pytest.approx(-0.35)
    meta = _meta(out)
    assert meta["command"] == "solve-sector"
    assert json.loads(meta["config"])["model"]["gamma"] == 0.7


def test_solve_sector_negated_is_conjugate(tmp_path, capsys):
    path = _write(tmp_path, "lattice: {dims: [8]}\nmodel: {gamma: 1.3}\n")
    _, a, _ = _run(capsys, "solve-sector", path, "--flipped", "0,1,5")
    _, b, _ = _run(capsys, "solve-sector", path, "--flipped", "0,1,5", "--negate")
    ra, rb = _rows(a), _rows(b)
    assert ra[-1]["re_E"] == rb[-1]["re_E"]
    Ea = np.array([float(r["re_E"]) + 1j * float(r["im_E"]) for r in ra[:-2]])
    Eb = np.array([float(r["re_E"]) + 1j * float(r["im_E"]) for r in rb[:-2]])
    assert np.allclose(np.sort_complex(Ea.conj()), np.sort_complex(Eb), atol=1e-10)


def test_solve_sector_bad_sites(tmp_path, capsys):
    code, _, _ = _run(capsys, "solve-sector", _write(tmp_path, BASE), "--flipped", "9")
    assert code == 2


def test_zeno_scan_table(tmp_path, capsys):
    code, out, _ = _run(capsys, "zeno-scan", _write(tmp_path, SCAN))
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 13
    assert list(rows[0]) == ["gamma", "gap", "argmax_flips", "argmax_shape",
                             "small_gamma_pred", "large_gamma_pred"]
    gstar = float(_meta(out)["gamma_star"])
    assert 2 <= gstar <= 8


def test_zeno_scan_single_and_empty(tmp_path, capsys):
    code, out, _ = _run(capsys, "zeno-scan", _write(tmp_path, "lattice: {dims: [40]}\nmodel: {gamma: 0.05}\n"))
    rows = _rows(out)
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["gap"]) == pytest.approx(0.025, abs=1e-9)
    empty = "lattice: {dims: [40]}\nmodel: {gamma_grid: {values: []}}\n"
    code, out, _ = _run(capsys, "zeno-scan", _write(tmp_path, empty))
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body == ["gamma,gap,argmax_flips,argmax_shape,small_gamma_pred,large_gamma_pred"]


def test_crossing_report(tmp_path, capsys):
    code, out, _ = _run(capsys, "crossing-report", _write(tmp_path, SCAN))
    assert code == 0
    flips = [int(r["flips_of_argmax"]) for r in _rows(out)]
    assert flips[0] == 1 and flips[-1] == 2
    assert sorted(set(flips)) == [1, 2]


def test_crossing_report_record_modes(tmp_path, capsys):
    text = "lattice: {dims: [8]}\nmodel: {gamma_grid: {values: [0.5, 50]}}\nscan: {record_modes: true}\n"
    code, out, _ = _run(capsys, "crossing-report", _write(tmp_path, text))
    assert code == 0
    assert len(_rows(out)[0]) > 4


def test_oracle_check_passes(tmp_path, capsys):
    code, out, _ = _run(capsys, "oracle-check", _write(tmp_path, BASE))
    assert code == 0
    status = {r["check"]: r["status"] for r in _rows(out)}
    assert status["sector_partition"] == "pass"
    assert status["trace_rho_plus"] == "pass"
    assert "fail" not in status.values()


def test_oracle_check_non_solvable_skips_partition(tmp_path, capsys):
    path = _write(tmp_path, "lattice: {dims: [4]}\nmodel: {t: 1, delta: 0.5, gamma: 0.7}\n")
    code, out, _ = _run(capsys, "oracle-check", path)
    assert code == 0
    status = {r["check"]: r["status"] for r in _rows(out)}
    assert status["sector_partition"].startswith("skipped")


def test_oracle_check_failure_exit(tmp_path, capsys, monkeypatch):
    from bcshubbard import oracle
    real = oracle.build_superoperator_fermionic

    def broken(graph, params, cap=oracle.DEFAULT_CAP):
        L = real(graph, params, cap)
        L.matrix[0, 0] += 1e-3
        return L
    monkeypatch.setattr(oracle, "build_superoperator_fermionic", broken)
    code, out, _ = _run(capsys, "oracle-check", _write(tmp_path, BASE))
    assert code == 5
    status = {r["check"]: r["status"] for r in _rows(out)}
    assert status["fermionic_construction"] == "fail"


def test_steady_state(tmp_path, capsys):
    code, out, _ = _run(capsys, "steady-state", _write(tmp_path, BASE))
    assert code == 0 and len(_rows(out)) >= 5


def test_output_file_and_determinism(tmp_path, capsys):
    path = _write(tmp_path, SCAN)
    target = tmp_path / "out.csv"
    assert cli.run(["zeno-scan", path, "-o", str(target)]) == 0
    first = target.read_bytes()
    assert cli.run(["zeno-scan", path, "-o", str(target), "--workers", "2"]) == 0
    assert target.read_bytes() == first
    assert capsys.readouterr().out == ""


def test_json_output(tmp_path, capsys):
    code, out, _ = _run(capsys, "solve-sector", _write(tmp_path, BASE), "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert isinstance(data, list) and data[-1]["alpha"] == "sector_max"


def test_format_helper():
    assert cli._fmt(-0.0, 6) == "0"
    assert cli._fmt(float("inf"), 6) == "inf"
    assert cli._fmt(True, 6) == "true"
    assert cli._fmt(0.123456789, 4) == "0.1235"
