"""Dense symmetric eigensolver, PSD square root and vector norms.

Matrices and vectors are plain ``numpy`` float arrays. The eigensolver is a
cyclic Jacobi method, which is plenty for the desk-scale problems this
package targets (m up to a few dozen).
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError, NotPSDError, SymmetryError

SYMMETRY_TOL = 1e-12
PSD_CLAMP = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns are eigenvectors

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def as_matrix(M, name="matrix"):
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise InputError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def check_symmetric(M, tol=SYMMETRY_TOL):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise SymmetryError(f"matrix is not square: {M.shape}")
    scale = max(np.linalg.norm(M), 1.0)
    asym = np.linalg.norm(M - M.T)
    if asym > tol * scale:
        raise SymmetryError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    return M


def sym_eigen(M, tol=1e-14, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : array_like
        Symmetric matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius mass of ``V^T M V`` falls
        below ``tol * ||M||_F``.
    max_sweeps : int
        Cap on full sweeps before a :class:`ConvergenceError` is raised.

    Returns
    -------
    SpectralDecomposition
        Eigenvalues sorted in descending order with matching orthonormal
        eigenvectors.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    D = 0.5 * (M + M.T)
    V = np.eye(n)
    fro = np.linalg.norm(D)
    target = tol * fro

    def off(X):
        return np.linalg.norm(X - np.diag(np.diag(X)))

    sweeps = 0
    while off(D) > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = D[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (D[q, q] - D[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # D <- J^T D J with J the (p, q) rotation
                Dp = D[:, p].copy()
                Dq = D[:, q].copy()
                D[:, p] = c * Dp - s * Dq
                D[:, q] = s * Dp + c * Dq
                Dp = D[p, :].copy()
                Dq = D[q, :].copy()
                D[p, :] = c * Dp - s * Dq
                D[q, :] = s * Dp + c * Dq
                D[p, q] = D[q, p] = 0.0
                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq

    evals = np.diag(D).copy()
    order = np.argsort(-evals, kind="stable")
    return SpectralDecomposition(evals[order], V[:, order])


def matrix_sqrt_psd(M, clamp=PSD_CLAMP):
    """Symmetric square root of a PSD matrix.

    Eigenvalues in ``[-clamp*||M||, 0)`` are treated as rounding noise and set
    to zero; anything more negative raises :class:`NotPSDError`.
    """
    eig = sym_eigen(M)
    lam = eig.eigenvalues
    scale = max(abs(lam[0]), abs(lam[-1]))
    if lam[-1] < -clamp * scale:
        raise NotPSDError(f"matrix has eigenvalue {lam[-1]:.3e} < 0")
    root = np.sqrt(np.clip(lam, 0.0, None))
    V = eig.eigenvectors
    S = (V * root) @ V.T
    return 0.5 * (S + S.T)


def vector_norm(x, which="l2"):
    x = np.asarray(x, dtype=float)
    if which == "l1":
        return float(np.sum(np.abs(x)))
    if which == "l2":
        return float(np.sqrt(np.dot(x, x)))
    if which == "linf":
        return float(np.max(np.abs(x))) if x.size else 0.0
    raise ValueError(f"unknown norm {which!r}")
