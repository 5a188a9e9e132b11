"""Dense Hermitian linear algebra at desk scale.

The eigensolver is a cyclic complex Jacobi method. A LAPACK route
(``numpy.linalg.eigh``) is available through ``method="lapack"`` for hot
loops such as the descent verifier; both return the same contract.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi sweep budget is exhausted."""


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues (non-increasing) and matching orthonormal eigenvectors.

    ``vectors[:, i]`` is the eigenvector for ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_hermitian(A, tol: float = 1e-12) -> np.ndarray:
    """Validate ``A`` and return its symmetrized complex copy."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    skew = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    if skew > tol * (1.0 + np.max(np.abs(A), initial=0.0)):
        raise ValueError(f"matrix is not Hermitian (max |A - A*| = {skew:.3e})")
    return 0.5 * (A + A.conj().T)


def _offdiag_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off))


def _jacobi(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = A.shape[0]
    A = A.copy()
    V = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(A))
    if n < 2 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    target = JACOBI_TOL * scale
    for _ in range(JACOBI_MAX_SWEEPS):
        if _offdiag_norm(A) < target:
            return np.real(np.diag(A)).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ U
    raise ConvergenceError(
        f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps "
        f"(off-diagonal residual {_offdiag_norm(A):.3e}, target {target:.3e})"
    )


def herm_eig(A, method: str = "jacobi") -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Hermitian matrix (checked to 1e-12, then symmetrized).
    method : {"jacobi", "lapack"}
        ``"jacobi"`` runs the cyclic Jacobi kernel; ``"lapack"`` defers to
        ``numpy.linalg.eigh``.
    """
    H = as_hermitian(A)
    if method == "jacobi":
        w, V = _jacobi(H)
    elif method == "lapack":
        w, V = np.linalg.eigh(H)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return EigDecomposition(values=w[order], vectors=V[:, order])


def eigvalsh_desc(A, method: str = "jacobi") -> np.ndarray:
    if method == "lapack":
        return np.linalg.eigvalsh(as_hermitian(A))[::-1]
    return herm_eig(A, method=method).values


def rank_one_sum(vectors, dim: int | None = None) -> np.ndarray:
    """Return ``sum_i g_i g_i^*`` for the rows ``g_i`` of ``vectors``."""
    G = np.asarray(vectors, dtype=complex)
    if G.size == 0:
        if dim is None:
            raise ValueError("dimension required for an empty family")
        return np.zeros((dim, dim), dtype=complex)
    if G.ndim != 2:
        raise ValueError("vectors must be a 2-d array of shape (k, d)")
    if dim is not None and G.shape[1] != dim:
        raise ValueError(f"dimension mismatch: vectors have dim {G.shape[1]}, expected {dim}")
    S = G.T @ G.conj()
    return 0.5 * (S + S.conj().T)


def singular_values(A, method: str = "jacobi") -> np.ndarray:
    """Singular values of a Hermitian matrix: sorted absolute eigenvalues."""
    return np.sort(np.abs(eigvalsh_desc(A, method=method)))[::-1]
