"""Dense complex linear-algebra kernels for the small matrices used everywhere else."""
from __future__ import annotations

import numpy as np

__all__ = [
    "HERM_ATOL",
    "UNITARY_ATOL",
    "PSD_CLAMP",
    "TRACE_ATOL",
    "as_matrix",
    "svd",
    "herm_eig",
    "matrix_sqrt_psd",
    "fidelity",
    "nuclear_norm_2x2",
    "is_unitary",
    "haar_unitary",
    "haar_special_orthogonal",
]

HERM_ATOL = 1e-10
UNITARY_ATOL = 1e-9
PSD_CLAMP = 1e-10
TRACE_ATOL = 1e-9


def as_matrix(a) -> np.ndarray:
    """Coerce to a complex ndarray and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    return m


def is_unitary(m: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= atol


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD with right factor returned as V (columns), M = U diag(s) V†."""
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m)
    return u, s, vh.conj().T


def herm_eig(h, atol: float = HERM_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    h = as_matrix(h)
    asym = np.abs(h - h.conj().T).max()
    if asym > atol:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    vals, vecs = np.linalg.eigh(h)
    # eigh is ascending; flip to descending, ties keep eigh's ordering
    order = np.arange(vals.size)[::-1]
    return vals[order], vecs[:, order]


def matrix_sqrt_psd(h, clamp: float = PSD_CLAMP, atol: float = HERM_ATOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in [-clamp, 0) are clamped to 0."""
    vals, vecs = herm_eig(h, atol=atol)
    if vals.min() < -clamp:
        raise ValueError(f"matrix is not PSD (eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    s = (vecs * np.sqrt(vals)) @ vecs.conj().T
    return (s + s.conj().T) / 2


def fidelity(rho, sigma, atol: float = TRACE_ATOL) -> float:
    """Tr sqrt(rho^{1/2} sigma rho^{1/2}) for density matrices rho, sigma."""
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    for m in (rho, sigma):
        if abs(np.trace(m) - 1.0) > atol:
            raise ValueError(f"trace deviates from 1 by {abs(np.trace(m)) - 1.0:.3e}")
    s = matrix_sqrt_psd(rho, atol=atol)
    vals, _ = herm_eig(s @ sigma @ s, atol=atol)
    return float(np.sqrt(np.clip(vals, 0.0, None)).sum())


def nuclear_norm_2x2(m) -> float:
    """Sum of the two singular values of a 2x2 matrix, in closed form."""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    fro2 = float((np.abs(m) ** 2).sum())
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return float(np.sqrt(fro2 + 2.0 * abs(det)))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random n x n unitary via phase-fixed QR."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_special_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(n)."""
    z = rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]
    return q
