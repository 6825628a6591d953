"""P1 finite elements: stiffness and mass assembly, Dirichlet elimination,
preconditioned CG, and the Robin problem

    (grad u, grad v) + lam <u, v>_Gamma = <psi, v>_Gamma,   u = 0 on S.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AssemblyError, ParameterError, SingularProblemError, SolverError
from .mesh import GAMMA, INTERIOR_TAG, S, Mesh

DEFAULT_TOL = 1e-12


class SparseSymmetricMatrix:
    """Symmetric sparse matrix stored as the CSR lower triangle.

    Entries are summed on construction; only ``row >= col`` is kept, so the
    caller passes each off-diagonal contribution once (either triangle).
    """

    def __init__(self, n: int, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        lo = np.maximum(rows, cols)
        hi = np.minimum(rows, cols)
        lower = sp.coo_matrix((np.asarray(vals, dtype=float), (lo, hi)), shape=(n, n)).tocsr()
        lower.sum_duplicates()
        lower.sort_indices()
        self.n = int(n)
        self.indptr = lower.indptr
        self.indices = lower.indices
        self.data = lower.data
        self._full = None

    @classmethod
    def from_scipy(cls, a) -> "SparseSymmetricMatrix":
        low = sp.tril(sp.csr_matrix(a)).tocoo()
        return cls(a.shape[0], low.row, low.col, low.data)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def lower(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def tocsr(self) -> sp.csr_matrix:
        """Full symmetric matrix (cached)."""
        if self._full is None:
            low = self.lower
            diag = sp.diags(low.diagonal())
            self._full = (low + low.T - diag).tocsr()
        return self._full

    def toarray(self) -> np.ndarray:
        return self.tocsr().toarray()

    def diagonal(self) -> np.ndarray:
        return self.lower.diagonal()

    def __matmul__(self, x):
        return self.tocsr() @ x

    def submatrix(self, idx) -> "SparseSymmetricMatrix":
        idx = np.asarray(idx)
        return SparseSymmetricMatrix.from_scipy(self.tocsr()[idx][:, idx])


MatrixLike = Union[SparseSymmetricMatrix, sp.spmatrix, np.ndarray]


def _as_operator(K: MatrixLike):
    if isinstance(K, SparseSymmetricMatrix):
        return K.tocsr()
    return K


def _diagonal(K: MatrixLike) -> np.ndarray:
    if isinstance(K, np.ndarray):
        return np.diag(K).copy()
    return np.asarray(K.diagonal()).ravel()


def local_stiffness(p: np.ndarray):
    """P1 gradient matrices for triangles ``p`` of shape (nt, 3, 2); also returns areas."""
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    k = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    return k, area


def _check_areas(mesh: Mesh, area: np.ndarray):
    p = mesh.vertices[mesh.triangles]
    h2 = (np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2) ** 2).max(axis=1)
    bad = np.nonzero(area < 1e-14 * h2)[0]
    if len(bad):
        raise AssemblyError(f"degenerate triangle {bad[0]} (area {area[bad[0]]:.3e})")


def assemble_stiffness(mesh: Mesh) -> SparseSymmetricMatrix:
    """Exact P1 stiffness matrix over all mesh vertices."""
    k, area = local_stiffness(mesh.vertices[mesh.triangles])
    _check_areas(mesh, area)
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    keep = rows >= cols
    return SparseSymmetricMatrix(mesh.n_vertices, rows[keep], cols[keep], k.reshape(-1)[keep])


def assemble_domain_mass(mesh: Mesh) -> SparseSymmetricMatrix:
    """Consistent P1 mass matrix, area/12 * [[2,1,1],[1,2,1],[1,1,2]] per triangle."""
    area = mesh.signed_areas()
    _check_areas(mesh, area)
    local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    vals = (area[:, None, None] * local[None]).ravel()
    keep = rows >= cols
    return SparseSymmetricMatrix(mesh.n_vertices, rows[keep], cols[keep], vals[keep])


@dataclass(frozen=True, eq=False)
class BoundaryMassMatrix:
    """Discrete L2(boundary, m_d) inner product on the tagged boundary vertices."""

    dofs: np.ndarray
    matrix: SparseSymmetricMatrix
    which: int = GAMMA
    lumped: bool = False

    @property
    def n(self) -> int:
        return len(self.dofs)

    @property
    def total_mass(self) -> float:
        one = np.ones(self.n)
        return float(one @ (self.matrix @ one))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def inner(self, a, b) -> float:
        return float(np.asarray(a) @ (self.matrix @ np.asarray(b)))

    def norm(self, a) -> float:
        return float(np.sqrt(max(self.inner(a, a), 0.0)))


def assemble_boundary_mass(mesh: Mesh, which: int = GAMMA, lumped: bool = False) -> BoundaryMassMatrix:
    """Edge-wise mass m_e/6 * [[2,1],[1,2]] (or m_e/2 * I when lumped)."""
    sel = mesh.edge_tag == which
    if not sel.any():
        raise ParameterError(f"mesh has no boundary edges tagged {which}")
    dofs = mesh.tagged_vertices(which)
    local_of = np.full(mesh.n_vertices, -1, dtype=np.int64)
    local_of[dofs] = np.arange(len(dofs))
    e = local_of[mesh.boundary_edges[sel]]
    m = mesh.edge_mass[sel]
    if lumped:
        rows = e.ravel()
        cols = rows
        vals = np.repeat(m / 2.0, 2)
    else:
        rows = np.concatenate([e[:, 0], e[:, 1], e[:, 1]])
        cols = np.concatenate([e[:, 0], e[:, 1], e[:, 0]])
        vals = np.concatenate([m / 3.0, m / 3.0, m / 6.0])
    mat = SparseSymmetricMatrix(len(dofs), rows, cols, vals)
    return BoundaryMassMatrix(dofs, mat, which, lumped)


def apply_dirichlet(K: SparseSymmetricMatrix, mesh: Mesh, tag: int = S):
    """Eliminate rows/columns of ``tag`` vertices; returns (K_ff, free vertex ids)."""
    free = np.nonzero(mesh.vertex_tag != tag)[0]
    if len(free) == 0:
        raise ParameterError("every vertex is constrained; the reduced system is empty")
    if len(free) == mesh.n_vertices:
        return K, free
    return K.submatrix(free), free


class CGResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residuals: list


def conjugate_gradient(K: MatrixLike, b, tol: float = DEFAULT_TOL,
                       max_iter: Optional[int] = None, x0=None,
                       kernel=None) -> CGResult:
    """Jacobi-preconditioned CG; residuals are relative to ||b||.

    ``kernel`` (a vector spanning the null space of a semidefinite K) turns
    on deflation: b and every iterate are kept orthogonal to it.
    """
    A = _as_operator(K)
    b = np.asarray(b, dtype=float)
    n = len(b)
    if max_iter is None:
        max_iter = 20 * n
    z_kernel = None
    if kernel is not None:
        z_kernel = np.asarray(kernel, dtype=float)
        z_kernel = z_kernel / np.linalg.norm(z_kernel)
        b = b - (z_kernel @ b) * z_kernel
    diag = _diagonal(A)
    if np.any(diag <= 0):
        raise SolverError("non-positive diagonal entry; matrix is not SPD")
    inv_diag = 1.0 / diag
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return CGResult(np.zeros(n), 0, [0.0])
    r = b - A @ x
    if z_kernel is not None:
        r -= (z_kernel @ r) * z_kernel
    history = [np.linalg.norm(r) / bnorm]
    if history[-1] <= tol:
        return CGResult(x, 0, history)
    z = inv_diag * r
    if z_kernel is not None:
        z -= (z_kernel @ z) * z_kernel
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        history.append(np.linalg.norm(r) / bnorm)
        if history[-1] <= tol:
            if z_kernel is not None:
                x -= (z_kernel @ x) * z_kernel
            return CGResult(x, it, history)
        z = inv_diag * r
        if z_kernel is not None:
            z -= (z_kernel @ z) * z_kernel
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not reach relative residual {tol:g} in {max_iter} iterations "
        f"(last {history[-1]:.3e})", history)


def solve_spd(K: MatrixLike, b, tol: float = DEFAULT_TOL, max_iter: Optional[int] = None,
              kernel=None) -> np.ndarray:
    return conjugate_gradient(K, b, tol=tol, max_iter=max_iter, kernel=kernel).x


def factorized(K: MatrixLike):
    """Sparse direct solver for repeated right-hand sides.

    SPD input is assumed: symmetric ordering and diagonal pivots keep the
    fill (and the factorization time) low.
    """
    A = sp.csc_matrix(_as_operator(K))
    return spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                     options=dict(SymmetricMode=True)).solve


def is_m_matrix(K: MatrixLike, rtol: float = 1e-12) -> bool:
    """True when all off-diagonal entries are non-positive (up to roundoff)."""
    A = sp.coo_matrix(_as_operator(K))
    off = A.row != A.col
    scale = np.abs(A.data).max() if A.nnz else 1.0
    return bool(np.all(A.data[off] <= rtol * scale))


@dataclass(frozen=True, eq=False)
class RobinSolution:
    """Discrete Robin solution; ``u`` lives on the free (non-S) vertices."""

    u: np.ndarray
    dof_map: np.ndarray
    lam: float
    psi: np.ndarray
    trace_on_gamma: np.ndarray
    total_flux: float
    gamma_dofs: np.ndarray
    n_vertices: int

    def nodal(self) -> np.ndarray:
        """Full vertex vector, zero on the Dirichlet boundary."""
        out = np.zeros(self.n_vertices)
        out[self.dof_map] = self.u
        return out


def sample_on_boundary(mesh: Mesh, values, which: int = GAMMA) -> np.ndarray:
    """Nodal data on the ordered boundary dofs from a callable, scalar or array."""
    dofs = mesh.tagged_vertices(which)
    if callable(values):
        x = mesh.vertices[dofs]
        return np.asarray(values(x[:, 0], x[:, 1]), dtype=float) * np.ones(len(dofs))
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(len(dofs), float(arr))
    if arr.shape != (len(dofs),):
        raise ParameterError(f"expected {len(dofs)} boundary values, got shape {arr.shape}")
    return arr


def robin_system(mesh: Mesh, lam: float, M: Optional[BoundaryMassMatrix] = None):
    """Robin matrix K_ff + lam R M R^T on the free dofs, plus bookkeeping."""
    if M is None:
        M = assemble_boundary_mass(mesh, GAMMA)
    K = assemble_stiffness(mesh)
    K_ff, free = apply_dirichlet(K, mesh, S)
    pos = np.full(mesh.n_vertices, -1, dtype=np.int64)
    pos[free] = np.arange(len(free))
    g = pos[M.dofs]
    n = len(free)
    R = sp.csr_matrix((np.ones(len(g)), (g, np.arange(len(g)))), shape=(n, len(g)))
    system = (K_ff.tocsr() + lam * (R @ M.matrix.tocsr() @ R.T)).tocsr()
    return system, R, free, M


def robin_solve(mesh: Mesh, lam: float, psi: Union[Callable, float, np.ndarray],
                solver: str = "direct", tol: float = DEFAULT_TOL,
                lumped: bool = False) -> RobinSolution:
    """Solve the Robin problem on Gamma (Dirichlet on S when present)."""
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    if lam == 0 and not mesh.is_truncated:
        raise SingularProblemError(
            "lam = 0 on an interior domain is the pure Neumann problem; constants span the kernel")
    M = assemble_boundary_mass(mesh, GAMMA, lumped=lumped)
    psi_v = sample_on_boundary(mesh, psi)
    system, R, free, M = robin_system(mesh, lam, M)
    rhs = R @ (M.matrix @ psi_v)
    if solver == "direct":
        u = factorized(system)(rhs)
    elif solver == "cg":
        u = solve_spd(system, rhs, tol=tol)
    else:
        raise ParameterError(f"unknown solver '{solver}'")
    trace = R.T @ u
    flux = float(np.ones(M.n) @ (M.matrix @ (psi_v - lam * trace)))
    return RobinSolution(u, free, float(lam), psi_v, trace, flux, M.dofs, mesh.n_vertices)


def harmonic_extension(mesh: Mesh, boundary_values: np.ndarray) -> np.ndarray:
    """Discrete-harmonic nodal field with the given values on all boundary vertices.

    ``boundary_values`` is a full-length vertex vector; interior entries are ignored.
    """
    K = assemble_stiffness(mesh).tocsr()
    inner = np.nonzero(mesh.vertex_tag == INTERIOR_TAG)[0]
    bnd = np.nonzero(mesh.vertex_tag != INTERIOR_TAG)[0]
    u = np.array(boundary_values, dtype=float)
    if len(inner):
        K_ii = K[inner][:, inner]
        K_ib = K[inner][:, bnd]
        u[inner] = factorized(K_ii)(-(K_ib @ u[bnd]))
    return u


def discrete_green_check(mesh: Mesh, u, v, harmonic_tol: float = 1e-8) -> float:
    """|v^T K u - (Tr v)^T g| with g the discrete normal derivative (K u) on the boundary.

    Requires u to be discrete-harmonic at interior vertices.
    """
    K = assemble_stiffness(mesh).tocsr()
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    Ku = K @ u
    inner = mesh.vertex_tag == INTERIOR_TAG
    scale = abs(K).max() * np.linalg.norm(u)
    if np.linalg.norm(Ku[inner]) > harmonic_tol * max(scale, 1e-300):
        raise ParameterError("u is not discrete-harmonic at the interior vertices")
    bnd = ~inner
    return float(abs(v @ Ku - v[bnd] @ Ku[bnd]))


def write_nodal_csv(path, values, indices=None) -> None:
    values = np.asarray(values, dtype=float)
    if indices is None:
        indices = np.arange(len(values))
    with open(path, "w") as fh:
        fh.write("vertex_index,value\n")
        for i, x in zip(np.asarray(indices).tolist(), values.tolist()):
            fh.write(f"{i},{x:.17g}\n")


def read_nodal_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(np.int64), data[:, 1]
