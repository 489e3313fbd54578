"""Acceptance criteria, one test per criterion; the terminal summary prints a PASS/FAIL line for each."""

import math

import numpy as np
import pytest
import sympy

from bandbracket.bracketing import _neumann_laplacian, bracket, build_HD, build_HN, build_neumann_graph, verify_and_certify
from bandbracket.floquet import band_intervals, fiber_batch, laplacian_batch, sample_bands
from bandbracket.graph_model import degrees, shift_gauge, sorted_potentials
from bandbracket.hermitian import HermitianMatrix, weyl_check
from checks import envelope_violations, sample_violations
from randspec import random_offsets, random_valid_spec

SQ3 = math.sqrt(3.0)
TOL = 1e-9

FIG1_BANDS = [(0, 2), (6 - 2 * SQ3, 4), (6, 6 + 2 * SQ3)]
FIG1_LAMBDA_N = [0, 2, 6 - 2 * SQ3, 4, 4, 4, 6 + 2 * SQ3]


def printed_HN():
    """The 7x7 Neumann matrix for the fig1 graph, exact."""
    r2 = sympy.sqrt(2)
    return sympy.Matrix([
        [6, -2, -r2, -2, -2, -r2, -2],
        [-2, 4, 0, 0, 0, 0, 0],
        [-r2, 0, 2, 0, 0, 0, 0],
        [-2, 0, 0, 4, 0, 0, 0],
        [-2, 0, 0, 0, 4, 0, 0],
        [-r2, 0, 0, 0, 0, 2, 0],
        [-2, 0, 0, 0, 0, 0, 4],
    ])


def neumann_components(ng):
    parent = list(range(ng.nu_N))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in ng.edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in range(ng.nu_N)})


@pytest.fixture(scope="module")
def generated():
    """The 200 random valid specs shared by the property criteria."""
    rng = np.random.default_rng(20240601)
    return [random_valid_spec(rng) for _ in range(200)]


@pytest.fixture(scope="module")
def fig1_bands(fig1):
    return band_intervals(sample_bands(fig1, 64))


@pytest.mark.acceptance(1, "fig1 bands at N=64")
def test_criterion_1_fig1_bands(fig1_bands):
    np.testing.assert_allclose(fig1_bands.bands, FIG1_BANDS, atol=TOL, rtol=0)


@pytest.mark.acceptance(2, "fig1 H_N exact, H_D = (6), sigma(H_N)")
def test_criterion_2_neumann_matrix(fig1):
    ng = build_neumann_graph(fig1)
    hn = build_HN(ng, fig1).entries
    exact = printed_HN()
    # entry-for-entry: every computed double is the correctly rounded exact value
    for i in range(7):
        for j in range(7):
            assert hn[i, j] == complex(float(exact[i, j]))
    assert np.array_equal(build_HD(ng, fig1).entries, [[6]])
    exact_eigs = sorted(float(v) for v, m in exact.eigenvals().items() for _ in range(m))
    np.testing.assert_allclose(exact_eigs, FIG1_LAMBDA_N, atol=1e-12, rtol=0)
    np.testing.assert_allclose(bracket(fig1).spectra.lambdaN, FIG1_LAMBDA_N, atol=TOL, rtol=0)


@pytest.mark.acceptance(3, "fig1 J, J~, J cap J~ and certified gaps")
def test_criterion_3_certified_gap(fig1, fig1_bands):
    rep = verify_and_certify(fig1_bands, bracket(fig1))
    np.testing.assert_allclose(rep.J, [(0, 6), (2, 12), (6 - 2 * SQ3, 12)], atol=TOL, rtol=0)
    np.testing.assert_allclose(rep.Jt, [(0, 4), (0, 4), (6, 6 + 2 * SQ3)], atol=TOL, rtol=0)
    np.testing.assert_allclose(rep.Jcap, [(0, 4), (2, 4), (6, 6 + 2 * SQ3)], atol=TOL, rtol=0)
    assert rep.inclusion_ok
    assert len(rep.certified_gaps) == 1
    np.testing.assert_allclose(rep.certified_gaps[0], (4, 6), atol=TOL, rtol=0)
    lo, hi = 2, 6 - 2 * SQ3
    assert all(b <= lo or a >= hi for a, b in rep.certified_gaps)


@pytest.mark.acceptance(4, "fig1 estimates est1, est2 and total band length")
def test_criterion_4_estimates(fig1, fig1_bands):
    rep = verify_and_certify(fig1_bands, bracket(fig1))
    assert abs(rep.est1 - (22 + 2 * SQ3)) <= 1e-6
    assert abs(rep.est2 - (8 + 2 * SQ3)) <= 1e-6
    assert abs(rep.total_band_length - 4 * SQ3) <= 1e-6
    assert (round(rep.est1, 1), round(rep.est2, 1), round(rep.total_band_length, 1)) == (25.5, 11.5, 6.9)


@pytest.mark.acceptance(5, "square lattice: band [0,8], lambda_N, est1 tight, counts tight")
def test_criterion_5_square(square):
    bands = band_intervals(sample_bands(square, 32))
    np.testing.assert_allclose(bands.bands, [(0, 8)], atol=TOL, rtol=0)
    assert bands.gaps == ()
    br = bracket(square)
    np.testing.assert_allclose(br.spectra.lambdaN, [0, 3, 9], atol=TOL, rtol=0)
    assert abs(br.est1 - 8) <= 1e-12
    ng = br.graph
    assert ng.nu_N == ng.nu + square.dimension == ng.nu + ng.beta // 2 == 3
    assert ng.nu_D == 0


@pytest.mark.acceptance(6, "four bracketing inequalities and envelope on 200 random specs")
def test_criterion_6_samplewise(generated):
    dims = set()
    total = 0
    for spec in generated:
        dims.add(spec.dimension)
        assert spec.nu <= 6
        table = sample_bands(spec, 8)
        br = bracket(spec)
        total += sample_violations(table, br, TOL)
        total += envelope_violations(table, sorted_potentials(spec), br.kappa_plus, TOL)
        verify_and_certify(band_intervals(table), br)
    assert dims == {1, 2, 3}
    assert total == 0


@pytest.mark.acceptance(7, "gauge invariance, zero row sums, Delta_N PSD with kernel, Weyl")
def test_criterion_7_structural(generated):
    rng = np.random.default_rng(7)
    for spec in generated[:40]:
        thetas = rng.uniform(0, 2 * np.pi, size=(16, spec.dimension))
        base = np.linalg.eigvalsh(fiber_batch(spec, thetas))
        for _ in range(50):
            shifted = shift_gauge(spec, random_offsets(rng, spec))
            np.testing.assert_allclose(np.linalg.eigvalsh(fiber_batch(shifted, thetas)), base, atol=TOL, rtol=0)
    for spec in generated:
        d0 = laplacian_batch(spec, np.zeros((1, spec.dimension)))[0]
        assert np.all(d0.sum(axis=1) == 0)
        ng = build_neumann_graph(spec)
        dn = _neumann_laplacian(ng)
        kernel = 1 / np.sqrt(np.asarray(ng.rho, dtype=float))
        assert np.abs(dn @ kernel).max() <= 1e-12
        evals = np.linalg.eigvalsh(dn)
        assert evals[0] >= -TOL
        # one kernel vector per component; a single one whenever Gamma_N is connected
        assert np.sum(evals < 1e-9) == neumann_components(ng)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        a, b = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(2))
        assert weyl_check(HermitianMatrix(a + a.conj().T), HermitianMatrix(b + b.conj().T), TOL)


@pytest.mark.acceptance(8, "counting bounds on every generated spec; star has nu_D = nu-1")
def test_criterion_8_counting(generated, star):
    for spec in generated:
        ng = build_neumann_graph(spec)
        assert ng.nu + spec.dimension <= ng.nu_N <= ng.nu + ng.beta // 2
        assert 0 <= ng.nu_D <= ng.nu - 1
        assert sum(degrees(spec).kappa) >= ng.beta
    ng = build_neumann_graph(star)
    assert ng.nu_D == ng.nu - 1


@pytest.mark.acceptance(9, "square lattice spectrum symmetric under lambda -> 8 - lambda")
def test_criterion_9_bipartite(square):
    vals = np.sort(sample_bands(square, 32).values.ravel())
    np.testing.assert_allclose(vals, np.sort(8 - vals), atol=TOL, rtol=0)
