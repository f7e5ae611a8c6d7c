"""Smoke tests for the python bindings: quick consistency checks against
closed forms; the C++ suites carry the real coverage."""

import math

import numpy as np
import pytest

import nlsv


@pytest.fixture(scope="module")
def grid():
    return nlsv.make_grid(24, 16.0)


def gaussian(grid, amp=1.0, width=1.0):
    n, L = grid.n, grid.box_length
    x = -L / 2 + (L / n) * np.arange(n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    return (amp * np.exp(-(X**2 + Y**2 + Z**2) / width**2)).astype(np.complex128)


def test_grid_and_norms(grid):
    assert grid.spacing == pytest.approx(16.0 / 24)
    f = gaussian(grid)
    # ||exp(-|x|^2)||_2 = (pi/2)^{3/4}
    assert nlsv.lp_norm(grid, f, 2.0) == pytest.approx((math.pi / 2) ** 0.75, rel=1e-4)
    with pytest.raises(Exception):
        nlsv.make_grid(7, 1.0)


def test_kato_norm_gaussian_well(grid):
    V = nlsv.sample_potential({"kind": "gaussian_well", "depth": 2.0, "width": 1.0}, grid)
    assert nlsv.kato_norm(V) == pytest.approx(4 * math.pi, rel=0.03)
    report = nlsv.kato_report(V, [1.0, 2.0])
    assert report["negative_part_norm"] == pytest.approx(nlsv.kato_norm(V), rel=1e-12)


def test_spectrum_and_projection():
    g = nlsv.make_grid(24, 16.0)
    V = nlsv.sample_potential({"kind": "gaussian_well", "depth": 10.0, "width": 1.0}, g)
    sd = nlsv.analyze_spectrum(V, k_max=4)
    assert sd.count >= 1
    assert sd.eigenvalues[0] < -1.0
    assert sd.bs_norm <= 0.5
    psi = sd.eigenvector(0)
    proj = nlsv.continuous_projection(sd, g, psi)
    assert nlsv.lp_norm(g, proj, 2.0) < 1e-7


def test_fractional_power_matches_multiplier():
    g = nlsv.make_grid(16, 12.0)
    V = nlsv.zero_potential(g)
    sd = nlsv.analyze_spectrum(V, k_max=1)
    f = nlsv.random_band_limited(g, 11)
    got = nlsv.fractional_power_apply(V, 0.0, -1.0, f, sd)
    n, L = g.n, g.box_length
    k = 2 * math.pi * np.fft.fftfreq(n, d=1.0 / n) / L
    KX, KY, KZ = np.meshgrid(k, k, k, indexing="ij")
    want = np.fft.ifftn(np.fft.fftn(f) / np.sqrt(1.0 + KX**2 + KY**2 + KZ**2))
    assert np.max(np.abs(got - want)) < 1e-5 * np.max(np.abs(want))


def test_evolve_conserves_mass_and_energy(grid):
    V = nlsv.sample_potential({"kind": "gaussian_well", "depth": 2.0, "width": 1.0}, grid)
    tr = nlsv.evolve(V, gaussian(grid, amp=0.4), T=0.1, dt=1e-3, sign=-1, n_store=5)
    dm, de = nlsv.conservation_report(tr)
    assert dm < 1e-12
    assert de < 1e-5
    a = nlsv.find_form_constant(V)
    assert nlsv.h1_bound_check(tr, V, a, tr.mass[0], tr.energy[0])


def test_picard_small_data_contracts():
    g = nlsv.make_grid(16, 16.0)
    V = nlsv.zero_potential(g)
    sd = nlsv.analyze_spectrum(V, k_max=1)
    res = nlsv.picard_solve(V, sd, gaussian(g, amp=0.05), T=0.05, n_t=9)
    assert res["contracted"]
    assert all(r < 0.5 for r in res["ratios"])


def test_admissible_pairs():
    pairs = nlsv.admissible_pairs(1.0, 5)
    assert pairs[0][1] == 2.0
    q, r = pairs[2]
    assert r == pytest.approx(2.4)
    assert q == pytest.approx(8.0)
