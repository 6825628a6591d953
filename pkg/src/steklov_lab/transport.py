"""Laplacian-transport observables: total flux across Gamma, computed directly
from the Robin solution and as a Steklov series.

With source ``psi = lam * 1_Gamma`` the two agree exactly at matrix level:

    Phi = sum_k lam * mu_k * c_k**2 / (lam + mu_k),   c_k = (1_Gamma, V_k)_M.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dtn import SteklovSpectrum, _mass_array
from .errors import ParameterError
from .fem import GAMMA, robin_solve, sample_on_boundary
from .geometry import TRUNCATED, MeasuredBoundary, make_domain
from .mesh import interpolate, triangulate


@dataclass(frozen=True, eq=False)
class FluxReport:
    lam: float
    phi_direct: float
    phi_spectral_full: float
    phi_partial: np.ndarray
    mu: np.ndarray
    c: np.ndarray
    complete: bool = True

    @property
    def relative_gap(self) -> float:
        return abs(self.phi_spectral_full - self.phi_direct) / abs(self.phi_direct)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k,mu,c_k,partial_sum\n")
            for k, (mu, ck, s) in enumerate(zip(self.mu.tolist(), self.c.tolist(),
                                                self.phi_partial.tolist())):
                fh.write(f"{k},{mu:.17g},{ck:.17g},{s:.17g}\n")
            fh.write(f"phi_direct,{self.phi_direct:.17g},,\n")
            fh.write(f"phi_spectral_full,{self.phi_spectral_full:.17g},,\n")


def flux_direct(mesh, lam: float, psi=None, solver: str = "direct") -> float:
    """Total flux 1^T M (psi - lam * trace) of the Robin solution; psi defaults to lam * 1."""
    if psi is None:
        psi = float(lam)
    return robin_solve(mesh, lam, psi, solver=solver).total_flux


def flux_spectral(spectrum: SteklovSpectrum, M, lam: float, psi=None,
                  phi_direct: Optional[float] = None) -> FluxReport:
    """Steklov-series flux.  ``psi`` is the Robin data on the Gamma dofs
    (default ``lam * 1``); for general psi the summand is
    c_k(psi) c_k(1) mu_k / (lam + mu_k)."""
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    m = _mass_array(M)
    one = np.ones(len(m))
    psi_v = lam * one if psi is None else np.asarray(psi, dtype=float) * one
    V = spectrum.eigenvectors
    mu = spectrum.eigenvalues
    c_one = V.T @ (m @ one)
    c_psi = V.T @ (m @ psi_v)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(lam + mu != 0, mu / (lam + mu), 0.0)
    terms = c_psi * c_one * weight
    partial = np.cumsum(terms)
    full = float(partial[-1]) if len(partial) else 0.0
    direct = np.nan if phi_direct is None else float(phi_direct)
    return FluxReport(float(lam), direct, full, partial, mu.copy(), c_one, spectrum.complete)


def annulus_flux_oracle(lam: float, inner: float, outer: float) -> float:
    """Exact flux for psi = lam on the circle of radius ``inner``, u = 0 at ``outer``."""
    return 2.0 * np.pi * lam / (1.0 + lam * inner * np.log(outer / inner))


@dataclass(frozen=True, eq=False)
class ProbeTable:
    probes: np.ndarray
    labels: list
    values: np.ndarray  # (n_probes, n_truncations)

    def nondecreasing(self, slack: float = 1e-6) -> bool:
        return bool(np.all(np.diff(self.values, axis=1) >= -slack))

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,y," + ",".join(self.labels) + "\n")
            for p, row in zip(self.probes.tolist(), self.values.tolist()):
                fh.write(",".join(f"{x:.17g}" for x in [*p, *row]) + "\n")


def domain_monotonicity_probe(gamma: MeasuredBoundary, s_list: Sequence[MeasuredBoundary],
                              lam: float, psi, probes, h_target: float,
                              grading: float = 0.1, labels=None) -> ProbeTable:
    """Evaluate the Robin solution of each truncation at fixed probe points.

    The truncations should be nested and increasing; all meshes share the
    same Gamma discretization.
    """
    pts = np.atleast_2d(np.asarray(probes, dtype=float))
    cols = []
    for s in s_list:
        dom = make_domain(TRUNCATED, gamma, s)
        mesh = triangulate(dom, h_target, grading=grading)
        sol = robin_solve(mesh, lam, psi)
        cols.append(interpolate(mesh, sol.nodal(), pts))
    if labels is None:
        labels = [f"S{k}" for k in range(len(s_list))]
    return ProbeTable(pts, list(labels), np.column_stack(cols))


def one_gamma_in_domain_check(spectrum: SteklovSpectrum, M, k0: Optional[int] = None) -> float:
    """Share of sum_k mu_k^2 c_k^2 carried by modes above ``k0`` (default n/2)."""
    n = len(spectrum)
    if n <= 1:
        return 0.0
    m = _mass_array(M)
    c = spectrum.eigenvectors.T @ (m @ np.ones(len(m)))
    w = spectrum.eigenvalues ** 2 * c ** 2
    total = w.sum()
    if total == 0:
        return 0.0
    if k0 is None:
        k0 = n // 2
    return float(w[k0 + 1:].sum() / total)


__all__ = [
    "FluxReport", "ProbeTable", "annulus_flux_oracle", "domain_monotonicity_probe",
    "flux_direct", "flux_spectral", "one_gamma_in_domain_check", "sample_on_boundary", "GAMMA",
]
