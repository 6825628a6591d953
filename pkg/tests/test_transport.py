import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from steklov_lab import geometry as geo
from steklov_lab.dtn import SteklovSpectrum, schur_dtn, steklov_spectrum
from steklov_lab.errors import ParameterError
from steklov_lab.fem import assemble_boundary_mass, robin_solve
from steklov_lab.mesh import GAMMA, refine
from steklov_lab.transport import (annulus_flux_oracle, domain_monotonicity_probe, flux_direct,
                                   flux_spectral, one_gamma_in_domain_check)


def _spectrum(mesh):
    A = schur_dtn(mesh)
    M = assemble_boundary_mass(mesh, GAMMA)
    return A, M, steklov_spectrum(A, M, method="lapack")


@pytest.fixture(scope="module")
def annulus_e(annulus_e_mesh):
    return (annulus_e_mesh, *_spectrum(annulus_e_mesh))


@pytest.fixture(scope="module")
def koch_interior(koch_mesh):
    return (koch_mesh, *_spectrum(koch_mesh))


@pytest.fixture(scope="module")
def koch_truncated(koch_truncated_mesh):
    return (koch_truncated_mesh, *_spectrum(koch_truncated_mesh))


# ---- direct flux ------------------------------------------------------

def test_flux_of_zero_source(annulus_e_mesh):
    assert flux_direct(annulus_e_mesh, 1.0, psi=0.0) == 0.0


def test_flux_radial_oracle(annulus_e_mesh):
    phi = flux_direct(annulus_e_mesh, 1.0)
    assert annulus_flux_oracle(1.0, 1.0, math.e) == pytest.approx(math.pi, rel=1e-15)
    assert abs(phi - math.pi) / math.pi <= 0.02


def test_flux_dirichlet_limit(annulus_e_mesh):
    phi = flux_direct(annulus_e_mesh, 1e6)
    assert abs(phi - 2 * math.pi) / (2 * math.pi) <= 0.02


def test_direct_flux_matches_robin_solution(koch_truncated_mesh):
    sol = robin_solve(koch_truncated_mesh, 2.0, 2.0)
    assert flux_direct(koch_truncated_mesh, 2.0) == sol.total_flux


# ---- spectral flux ----------------------------------------------------

@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("case", ["annulus_e", "koch_truncated"])
def test_spectral_identity(request, case, lam):
    mesh, A, M, spec = request.getfixturevalue(case)
    rep = flux_spectral(spec, M, lam, phi_direct=flux_direct(mesh, lam))
    assert rep.relative_gap <= 1e-8
    assert rep.phi_partial[-1] == rep.phi_spectral_full
    assert np.all(np.diff(rep.phi_partial) >= -1e-14 * abs(rep.phi_spectral_full))


def test_spectral_identity_general_source(koch_truncated):
    mesh, A, M, spec = koch_truncated
    rng = np.random.default_rng(2)
    psi = rng.random(M.n)
    direct = flux_direct(mesh, 0.7, psi=psi)
    rep = flux_spectral(spec, M, 0.7, psi=psi, phi_direct=direct)
    assert rep.relative_gap <= 1e-8


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_interior_flux_vanishes(koch_interior, lam):
    # without a sink the harmonic solution is constant and nothing crosses Gamma
    mesh, A, M, spec = koch_interior
    scale = lam * M.total_mass
    assert abs(flux_direct(mesh, lam)) <= 1e-12 * scale
    assert abs(flux_spectral(spec, M, lam).phi_spectral_full) <= 1e-12 * scale


def test_low_modes_carry_the_annulus_flux(annulus_e):
    mesh, A, M, spec = annulus_e
    rep = flux_spectral(spec, M, 1.0)
    assert rep.phi_partial[10] >= 0.99 * rep.phi_spectral_full


def test_flux_linear_for_small_lambda(annulus_e):
    _, A, M, spec = annulus_e
    a = flux_spectral(spec, M, 1e-6).phi_spectral_full / 1e-6
    b = flux_spectral(spec, M, 2e-6).phi_spectral_full / 2e-6
    assert a == pytest.approx(b, rel=1e-5)
    assert a == pytest.approx(M.total_mass, rel=1e-5)


@given(lam1=st.floats(1e-3, 50.0), factor=st.floats(1.01, 10.0))
def test_flux_increases_with_lambda(koch_truncated, lam1, factor):
    _, _, M, spec = koch_truncated
    a = flux_spectral(spec, M, lam1).phi_spectral_full
    b = flux_spectral(spec, M, lam1 * factor).phi_spectral_full
    assert b > a


def test_incomplete_spectrum_is_flagged(annulus_e):
    _, A, M, _ = annulus_e
    low = steklov_spectrum(A, M, k_max=8, method="lapack")
    rep = flux_spectral(low, M, 1.0)
    assert not rep.complete
    assert len(rep.phi_partial) == 8


def test_flux_report_csv(tmp_path, koch_interior):
    mesh, A, M, spec = koch_interior
    rep = flux_spectral(spec, M, 1.0, phi_direct=flux_direct(mesh, 1.0))
    rep.write_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "k,mu,c_k,partial_sum"
    assert lines[-2].startswith("phi_direct,")
    assert lines[-1].startswith("phi_spectral_full,")
    assert len(lines) == len(spec) + 3
    assert float(lines[-1].split(",")[1]) == rep.phi_spectral_full


def test_negative_lambda_rejected(koch_interior):
    _, _, M, spec = koch_interior
    with pytest.raises(ParameterError):
        flux_spectral(spec, M, -1.0)


# ---- domain monotonicity probes --------------------------------------

@pytest.fixture(scope="module")
def probe_setup():
    gamma = geo.circle_polygon(1.0, 128)
    outers = [geo.circle_polygon(L, 128) for L in (2.0, 4.0, 8.0)]
    probes = [[1.5, 0.0], [0.0, -1.5], [-1.1, 1.0]]
    return gamma, outers, probes


def test_probe_values_increase_with_truncation(probe_setup):
    gamma, outers, probes = probe_setup
    table = domain_monotonicity_probe(gamma, outers, 1.0, 1.0, probes, 0.08)
    assert table.values.shape == (3, 3)
    assert table.nondecreasing(1e-6)
    # and they track the radial oracle c * ln(L / r)
    r = 1.5
    for j, L in enumerate((2.0, 4.0, 8.0)):
        exact = math.log(L / r) / (math.log(L) + 1.0)
        assert table.values[0, j] == pytest.approx(exact, rel=0.01)


def test_probe_zero_source(probe_setup):
    gamma, outers, probes = probe_setup
    table = domain_monotonicity_probe(gamma, outers[:2], 1.0, 0.0, probes, 0.1)
    assert np.all(table.values == 0.0)


def test_probe_on_gamma_is_the_trace(coarse_annulus):
    gamma, s = coarse_annulus.domain.gamma, coarse_annulus.domain.s
    table = domain_monotonicity_probe(gamma, [s], 1.0, 1.0, [gamma.vertices[5]], 0.2, grading=0.0)
    sol = robin_solve(coarse_annulus, 1.0, 1.0)
    dofs = coarse_annulus.tagged_vertices(GAMMA)
    k = int(np.nonzero(np.all(coarse_annulus.vertices[dofs] == gamma.vertices[5], axis=1))[0][0])
    assert table.values[0, 0] == pytest.approx(sol.trace_on_gamma[k], abs=1e-12)


def test_probe_outside_the_domain(probe_setup):
    gamma, outers, _ = probe_setup
    with pytest.raises(ParameterError):
        domain_monotonicity_probe(gamma, outers[:1], 1.0, 1.0, [[0.0, 0.0]], 0.1)


def test_probe_table_csv(tmp_path, probe_setup):
    gamma, outers, probes = probe_setup
    table = domain_monotonicity_probe(gamma, outers[:2], 1.0, 1.0, probes[:1], 0.1,
                                      labels=["L=2", "L=4"])
    table.write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,y,L=2,L=4"


# ---- the constant function in the operator domain --------------------

def test_tail_ratio_vanishes_on_symmetric_circle(symmetric_annulus):
    _, M, spec = _spectrum(symmetric_annulus)
    assert one_gamma_in_domain_check(spec, M) <= 1e-6


def test_tail_ratio_small_on_unstructured_circle(annulus_e):
    _, _, M, spec = annulus_e
    # mesh asymmetry leaks a little of the constant into high modes
    assert one_gamma_in_domain_check(spec, M) <= 1e-3


def test_tail_ratio_decreases_under_refinement(koch_truncated_mesh):
    _, M0, s0 = _spectrum(koch_truncated_mesh)
    _, M1, s1 = _spectrum(refine(koch_truncated_mesh))
    assert one_gamma_in_domain_check(s1, M1) < one_gamma_in_domain_check(s0, M0)


def test_tail_ratio_of_one_mode():
    spec = SteklovSpectrum(np.array([2.0]), np.array([[1.0]]), np.zeros(1), 1)
    assert one_gamma_in_domain_check(spec, np.eye(1)) == 0.0
