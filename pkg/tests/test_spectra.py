import numpy as np
import pytest

from bcshubbard.spectra import multiset_mismatch, read_spectrum_csv, sort_spectrum, write_spectrum_csv


@pytest.mark.parametrize("n", [10, 3000])
def test_mismatch_permutation_invariant(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert multiset_mismatch(a, rng.permutation(a)) == 0
    assert multiset_mismatch(a, rng.permutation(a) + 1e-9) == pytest.approx(1e-9, rel=1e-3)


@pytest.mark.parametrize("n", [10, 3000])
def test_mismatch_detects_multiplicity(n):
    a = np.arange(n, dtype=complex)
    b = a.copy()
    b[1] = b[0]
    assert multiset_mismatch(a, b) >= 1 - 1e-12


def test_mismatch_degenerate_clusters_large():
    # heavy exact degeneracy with solver-sized noise, above the dense limit
    rng = np.random.default_rng(1)
    centers = rng.normal(size=40) + 1j * rng.normal(size=40)
    a = np.repeat(centers, 64)
    b = rng.permutation(a) + 1e-14 * rng.normal(size=a.size)
    assert multiset_mismatch(a, b) < 1e-13


def test_mismatch_sizes():
    assert multiset_mismatch([], []) == 0
    assert multiset_mismatch([1], [1, 2]) == np.inf


def test_csv_round_trip(tmp_path):
    vals = np.array([1 - 2j, -0.5 + 0j, 3e-17 + 1j])
    path = tmp_path / "s.csv"
    write_spectrum_csv(path, vals)
    back = read_spectrum_csv(path)
    assert np.allclose(back, sort_spectrum(vals), atol=1e-15)
    assert path.read_text().splitlines()[0] == "re,im"
