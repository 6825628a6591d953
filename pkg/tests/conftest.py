"""Shared meshes, hypothesis profile and the acceptance summary hook."""
from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from steklov_lab import geometry as geo
from steklov_lab.cli import RunConfig, build_outer
from steklov_lab.dtn import schur_dtn, steklov_spectrum
from steklov_lab.fem import assemble_boundary_mass
from steklov_lab.mesh import GAMMA, S, Mesh, triangulate

settings.register_profile("lab", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.function_scoped_fixture])
settings.load_profile("lab")


# ---- acceptance bookkeeping -------------------------------------------

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()
_ITEM_CRITERION: dict = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, title = mark.args
        _ITEM_CRITERION[item.nodeid] = number
        entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": []})
        entry["title"] = title


def pytest_runtest_logreport(report):
    number = _ITEM_CRITERION.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[number]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict:7s} {entry['title']} ({len(outcomes)} checks)")


# ---- geometry and meshes ----------------------------------------------

@pytest.fixture(scope="session")
def unit_circle():
    return geo.circle_polygon(1.0, 256)


@pytest.fixture(scope="session")
def disk_mesh(unit_circle):
    return triangulate(geo.make_domain(geo.INTERIOR, unit_circle), 0.05)


@pytest.fixture(scope="session")
def annulus_e_mesh(unit_circle):
    """Gamma = unit circle, S = circle of radius e; the flux/Robin oracle domain."""
    outer = geo.circle_polygon(math.e, 256)
    return triangulate(geo.make_domain(geo.TRUNCATED, unit_circle, outer), 0.05)


@pytest.fixture(scope="session")
def coarse_annulus():
    gamma = geo.circle_polygon(1.0, 64)
    outer = geo.circle_polygon(3.0, 64)
    return triangulate(geo.make_domain(geo.TRUNCATED, gamma, outer), 0.2)


@pytest.fixture(scope="session")
def koch_mesh():
    return triangulate(geo.make_domain(geo.INTERIOR, geo.koch_snowflake(1.0, 3)), 3.0 ** -3)


@pytest.fixture(scope="session")
def koch_truncated_mesh():
    gamma = geo.koch_snowflake(1.0, 3)
    return triangulate(geo.make_domain(geo.TRUNCATED, gamma, geo.circle_polygon(2.0, 128)),
                       3.0 ** -3, grading=0.1)


def polar_annulus(n_theta: int, n_rings: int, inner: float, outer: float) -> Mesh:
    """Structured annulus mesh invariant under rotation by 2*pi/n_theta.

    Ring radii are geometric; every quad is cut by the same diagonal, so the
    discrete operators commute with the cyclic rotation of the Gamma dofs.
    """
    gamma = geo.circle_polygon(inner, n_theta)
    s = geo.circle_polygon(outer, n_theta)
    dom = geo.make_domain(geo.TRUNCATED, gamma, s)
    radii = inner * (outer / inner) ** (np.arange(n_rings + 1) / n_rings)
    t = 2.0 * np.pi * np.arange(n_theta) / n_theta
    verts = np.concatenate([np.column_stack([r * np.cos(t), r * np.sin(t)]) for r in radii])
    # reuse the exact polygon vertices so the boundary nodes sit on Gamma and S
    verts[:n_theta] = gamma.vertices
    verts[-n_theta:] = s.vertices

    def vid(j, i):
        return j * n_theta + (i % n_theta)

    tris = []
    for j in range(n_rings):
        for i in range(n_theta):
            a, b, c, d = vid(j, i), vid(j, i + 1), vid(j + 1, i + 1), vid(j + 1, i)
            tris += [[a, b, c], [a, c, d]]
    tris = np.array(tris, dtype=np.int64)
    p = verts[tris]
    area = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) \
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tris[area < 0] = tris[area < 0][:, [0, 2, 1]]

    nv = len(verts)
    tag = np.zeros(nv, dtype=np.int64)
    vedge = np.full(nv, -1, dtype=np.int64)
    ring = np.arange(n_theta)
    tag[ring], vedge[ring] = GAMMA, ring
    last = (n_rings) * n_theta + ring
    tag[last], vedge[last] = S, ring
    be = np.vstack([np.c_[ring, (ring + 1) % n_theta],
                    np.c_[last, n_rings * n_theta + (ring + 1) % n_theta]])
    etag = np.repeat([GAMMA, S], n_theta)
    epoly = np.concatenate([ring, ring])
    epar = np.tile([0.0, 1.0], (2 * n_theta, 1))
    emass = np.concatenate([gamma.segment_masses, s.segment_masses])
    return Mesh(verts, tris, tag, vedge, np.zeros(nv), be, etag, epoly, epar, emass, dom)


@pytest.fixture(scope="session")
def symmetric_annulus():
    return polar_annulus(64, 24, 1.0, 4.0)


class AnnulusCase:
    """Truncated-exterior problem for Gamma = circle(1, 256) with circular S at radius L."""

    def __init__(self, L: float, h: float = 0.04, grading: float = 0.1):
        cfg = RunConfig(experiment="steklov", h=h, grading=grading)
        self.L = L
        self.gamma = geo.circle_polygon(1.0, 256)
        self.mesh = triangulate(geo.make_domain(geo.TRUNCATED, self.gamma,
                                                build_outer("circle", L, cfg)), h, grading=grading)
        self.A = schur_dtn(self.mesh)
        self.M = assemble_boundary_mass(self.mesh, GAMMA)
        self.spectrum = steklov_spectrum(self.A, self.M)


@pytest.fixture(scope="session")
def annulus_case():
    cache = {}

    def get(L: float, h: float = 0.04) -> AnnulusCase:
        key = (float(L), float(h))
        if key not in cache:
            cache[key] = AnnulusCase(L, h)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def disk_spectrum(disk_mesh):
    A = schur_dtn(disk_mesh)
    M = assemble_boundary_mass(disk_mesh, GAMMA)
    return A, M, steklov_spectrum(A, M)
