"""Discrete Dirichlet-to-Neumann (Poincare-Steklov) operator on Gamma.

The operator is the Schur complement of the stiffness matrix onto the Gamma
vertices, ``A = K_GG - K_GI K_II^{-1} K_IG``, after the S vertices have been
eliminated (Dirichlet).  Its spectrum is taken in the geometry of the
boundary mass matrix M: ``A v = mu M v``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numba
import numpy as np
import scipy.linalg as sla

from .errors import (EigensolverError, MatrixError, NumericalQualityError, ParameterError,
                     SingularProblemError)
from .fem import (DEFAULT_TOL, BoundaryMassMatrix, apply_dirichlet, assemble_boundary_mass,
                  assemble_domain_mass, assemble_stiffness, factorized, solve_spd)
from .geometry import INTERIOR, TRUNCATED
from .mesh import GAMMA, S, Mesh


@dataclass(frozen=True, eq=False)
class DtnMatrix:
    A: np.ndarray
    gamma_dofs: np.ndarray
    kind: str
    asymmetry: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.gamma_dofs)


@dataclass(frozen=True, eq=False)
class SteklovSpectrum:
    """Eigenpairs of A v = mu M v, ascending, with V^T M V = I."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    n_total: int
    kind: str = TRUNCATED

    @property
    def complete(self) -> bool:
        return len(self.eigenvalues) == self.n_total

    def __len__(self):
        return len(self.eigenvalues)


def _mass_array(M) -> np.ndarray:
    if isinstance(M, BoundaryMassMatrix):
        return M.toarray()
    return np.asarray(M, dtype=float)


def _dtn_array(A) -> np.ndarray:
    if isinstance(A, DtnMatrix):
        return A.A
    return np.asarray(A, dtype=float)


def _kind(A) -> str:
    return A.kind if isinstance(A, DtnMatrix) else TRUNCATED


def schur_dtn(mesh: Mesh, solver: str = "direct", tol: float = DEFAULT_TOL,
              threads: int = 1, max_asymmetry: float = 1e-8) -> DtnMatrix:
    """Dense Schur complement of the (Dirichlet-reduced) stiffness onto Gamma."""
    K = assemble_stiffness(mesh)
    K_ff, free = apply_dirichlet(K, mesh, S)
    Kf = K_ff.tocsr()
    pos = np.full(mesh.n_vertices, -1, dtype=np.int64)
    pos[free] = np.arange(len(free))
    gamma_dofs = mesh.tagged_vertices(GAMMA)
    g = pos[gamma_dofs]
    is_g = np.zeros(len(free), dtype=bool)
    is_g[g] = True
    i = np.nonzero(~is_g)[0]
    K_gg = Kf[g][:, g].toarray()
    if len(i) == 0:
        A = K_gg
    else:
        K_ii = Kf[i][:, i]
        K_ig = Kf[i][:, g].toarray()
        if solver == "direct":
            X = factorized(K_ii)(K_ig)
        elif solver == "cg":
            def column(j):
                return solve_spd(K_ii, K_ig[:, j], tol=tol)
            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                cols = list(pool.map(column, range(K_ig.shape[1])))
            X = np.column_stack(cols)
        else:
            raise ParameterError(f"unknown solver '{solver}'")
        A = K_gg - K_ig.T @ X
    scale = np.abs(A).max()
    asym = float(np.abs(A - A.T).max() / scale) if scale > 0 else 0.0
    if asym > max_asymmetry:
        raise NumericalQualityError(f"Schur complement asymmetry {asym:.3e} exceeds {max_asymmetry:g}")
    A = 0.5 * (A + A.T)
    kind = TRUNCATED if mesh.is_truncated else INTERIOR
    meta = {"n_interior": int(len(i)), "n_vertices": mesh.n_vertices}
    return DtnMatrix(A, gamma_dofs, kind, asym, meta)


@numba.njit(cache=True)
def _jacobi_sweep(a, v):
    """One cyclic-by-row sweep of Jacobi rotations, in place."""
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            app = a[p, p]
            aqq = a[q, q]
            tau = (aqq - app) / (2.0 * apq)
            if abs(tau) > 1e150:
                t = 0.5 / tau
            elif tau >= 0.0:
                t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            for k in range(n):
                akp = a[k, p]
                akq = a[k, q]
                a[k, p] = c * akp - s * akq
                a[k, q] = s * akp + c * akq
            for k in range(n):
                apk = a[p, k]
                aqk = a[q, k]
                a[p, k] = c * apk - s * aqk
                a[q, k] = s * apk + c * aqk
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(n):
                vkp = v[k, p]
                vkq = v[k, q]
                v[k, p] = c * vkp - s * vkq
                v[k, q] = s * vkp + c * vkq


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 30):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate every off-diagonal pair once, row by row, until the
    off-diagonal Frobenius norm is below ``tol`` times the full norm.
    Returns (eigenvalues, eigenvectors) unsorted.
    """
    src = np.asarray(a, dtype=float)
    n = src.shape[0]
    # padded row stride avoids cache-set aliasing on power-of-two sizes
    a = np.zeros((n, n + 8))[:, :n]
    a[:] = src
    v = np.zeros((n, n + 8))[:, :n]
    np.fill_diagonal(v, 1.0)
    total = np.linalg.norm(a)
    if n == 1 or total == 0.0:
        return a.diagonal().copy(), np.eye(n)

    def off_norm():
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        return np.linalg.norm(off)

    for _ in range(max_sweeps):
        if off_norm() <= tol * total:
            break
        _jacobi_sweep(a, v)
    else:
        if off_norm() > tol * total:
            raise EigensolverError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return a.diagonal().copy(), np.ascontiguousarray(v)


def _sign_normalize(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        big = np.nonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
        if len(big) and col[big[0]] < 0:
            out[:, k] = -col
    return out


def steklov_spectrum(A, M, k_max: Optional[int] = None, method: str = "jacobi",
                     tie_tol: float = 1e-10) -> SteklovSpectrum:
    """Generalized symmetric eigenpairs by Cholesky reduction M = L L^T."""
    a = _dtn_array(A)
    m = _mass_array(M)
    if a.shape != m.shape:
        raise ParameterError(f"A {a.shape} and M {m.shape} differ in size")
    try:
        L = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise MatrixError("boundary mass matrix is not positive definite") from exc
    tmp = sla.solve_triangular(L, a, lower=True)
    c = sla.solve_triangular(L, tmp.T, lower=True)
    c = 0.5 * (c + c.T)
    if method == "jacobi":
        w, y = jacobi_eigh(c)
    elif method == "lapack":
        w, y = np.linalg.eigh(c)
    else:
        raise ParameterError(f"unknown eigensolver '{method}'")
    vecs = sla.solve_triangular(L.T, y, lower=False)
    vecs = _sign_normalize(vecs)
    order = _ordering(w, vecs, tie_tol)
    w, vecs = w[order], vecs[:, order]
    n_total = len(w)
    if k_max is not None:
        w, vecs = w[:k_max], vecs[:, :k_max]
    res = np.linalg.norm(a @ vecs - (m @ vecs) * w[None, :], axis=0)
    return SteklovSpectrum(w, vecs, res, n_total, _kind(A))


def _ordering(w: np.ndarray, vecs: np.ndarray, tie_tol: float) -> np.ndarray:
    order = list(np.argsort(w, kind="stable"))
    out = []
    k = 0
    while k < len(order):
        j = k + 1
        while j < len(order) and w[order[j]] - w[order[k]] <= tie_tol * (1.0 + abs(w[order[k]])):
            j += 1
        group = order[k:j]
        group.sort(key=lambda idx: tuple(np.round(vecs[:, idx], 12)), reverse=True)
        out.extend(group)
        k = j
    return np.array(out, dtype=np.int64)


def resolvent_apply(A, M, lam: float, psi) -> np.ndarray:
    """phi solving (lam M + A) phi = M psi."""
    a = _dtn_array(A)
    m = _mass_array(M)
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    if lam == 0 and _kind(A) == INTERIOR:
        raise SingularProblemError("interior DtN has constants in its kernel; lam must be > 0")
    try:
        return sla.cho_solve(sla.cho_factor(lam * m + a), m @ np.asarray(psi, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise MatrixError("lam M + A is not positive definite") from exc


def _inverse(a: np.ndarray, m: np.ndarray, lam: Optional[float], deflate: bool) -> np.ndarray:
    if lam is not None:
        return np.linalg.inv(a + lam * m)
    if not deflate:
        return np.linalg.inv(a)
    one = np.ones(len(a))
    w = m @ one
    total = one @ w
    shifted = a + np.outer(w, w) / total
    return np.linalg.inv(shifted) - np.outer(one, one) / total


def operator_distance(A1, A2, M, lam: Optional[float] = None) -> float:
    """M-operator norm of A1^{-1} - A2^{-1} (or of the resolvents at ``lam``).

    Interior operators are inverted on the M-orthogonal complement of the
    constants, and the difference is restricted to that complement.
    """
    a1, a2 = _dtn_array(A1), _dtn_array(A2)
    m = _mass_array(M)
    if a1.shape != a2.shape or a1.shape != m.shape:
        raise ParameterError("operators and mass matrix must share the Gamma dofs")
    if isinstance(A1, DtnMatrix) and isinstance(A2, DtnMatrix):
        if not np.array_equal(A1.gamma_dofs, A2.gamma_dofs):
            raise ParameterError("operators are defined on different Gamma dof sets")
    deflate = lam is None and (_kind(A1) == INTERIOR or _kind(A2) == INTERIOR)
    x = _inverse(a1, m, lam, deflate and _kind(A1) == INTERIOR) \
        - _inverse(a2, m, lam, deflate and _kind(A2) == INTERIOR)
    if deflate:
        one = np.ones(len(m))
        w = m @ one
        P = np.eye(len(m)) - np.outer(one, w) / (one @ w)
        x = P @ x @ P.T
    L = np.linalg.cholesky(m)
    y = L.T @ x @ L
    return float(np.abs(np.linalg.eigvalsh(0.5 * (y + y.T))).max())


def poincare_constant(mesh: Mesh, tol: float = 1e-12, max_iter: int = 2000) -> float:
    """Sharp constant C in ||v|| <= C ||grad v|| for v vanishing on S.

    Inverse power iteration for the smallest eigenvalue of K_ff v = l M v.
    """
    if not mesh.is_truncated:
        raise ParameterError("the Poincare constant needs a Dirichlet boundary S")
    K_ff, free = apply_dirichlet(assemble_stiffness(mesh), mesh, S)
    M = assemble_domain_mass(mesh).tocsr()[free][:, free]
    K = K_ff.tocsr()
    solve = factorized(K)
    x = np.ones(len(free))
    lam_old = np.inf
    for _ in range(max_iter):
        y = solve(M @ x)
        y /= np.sqrt(y @ (M @ y))
        lam = float(y @ (K @ y))
        x = y
        if abs(lam - lam_old) <= tol * lam:
            break
        lam_old = lam
    return 1.0 / np.sqrt(lam)


def write_spectrum_csv(path, spectrum: SteklovSpectrum) -> None:
    with open(path, "w") as fh:
        fh.write("k,mu,residual\n")
        for k, (mu, r) in enumerate(zip(spectrum.eigenvalues.tolist(), spectrum.residuals.tolist())):
            fh.write(f"{k},{mu:.17g},{r:.17g}\n")


def write_eigenvectors(path, spectrum: SteklovSpectrum) -> None:
    """Row-major text dump of the eigenvector matrix (rows = Gamma dofs)."""
    with open(path, "w") as fh:
        for row in spectrum.eigenvectors:
            fh.write(" ".join(f"{x:.17g}" for x in row.tolist()) + "\n")


def dtn_and_mass(mesh: Mesh, **kwargs):
    """Convenience: DtN matrix and Gamma mass matrix of one mesh."""
    return schur_dtn(mesh, **kwargs), assemble_boundary_mass(mesh, GAMMA)
