"""Dirichlet-to-Neumann spectra and Robin transport on polygonal and Koch-prefractal boundaries."""

from .geometry import (KOCH_DIMENSION, DomainSpec, MeasuredBoundary, Point2, Polygon,
                       circle_polygon, dset_dimension_estimate, koch_prefractal, koch_snowflake,
                       make_domain, square_polygon)
from .mesh import GAMMA, S, Mesh, MeshQuality, refine, triangulate, validate_mesh
from .fem import (BoundaryMassMatrix, RobinSolution, SparseSymmetricMatrix, apply_dirichlet,
                  assemble_boundary_mass, assemble_stiffness, discrete_green_check, robin_solve,
                  solve_spd)
from .dtn import (DtnMatrix, SteklovSpectrum, operator_distance, poincare_constant,
                  resolvent_apply, schur_dtn, steklov_spectrum)
from .transport import (FluxReport, domain_monotonicity_probe, flux_direct, flux_spectral,
                        one_gamma_in_domain_check)

__version__ = "0.1.0"
