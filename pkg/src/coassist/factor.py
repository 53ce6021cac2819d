"""Matrix factorizations: Takagi, orthogonal-phase splitting of unitaries, magic-basis maps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, svd, UNITARY_ATOL

__all__ = [
    "DEG_TOL",
    "MAGIC_T",
    "TakagiFactorization",
    "OrthoPhaseDecomp",
    "takagi",
    "ortho_phase_decompose",
    "local_to_magic",
    "magic_to_local",
]

# singular values closer than this are treated as a degenerate group
DEG_TOL = 1e-8
_DEG_LADDER = (DEG_TOL, 1e-6, 1e-4)

MAGIC_T = np.array(
    [
        [1, 0, 0, 1],
        [0, 1j, 1j, 0],
        [0, -1, 1, 0],
        [1j, 0, 0, -1j],
    ],
    dtype=complex,
) / np.sqrt(2)


@dataclass(frozen=True)
class TakagiFactorization:
    """Unitary u and nonnegative sigma with u.T @ Q @ u = diag(sigma)."""

    u: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class OrthoPhaseDecomp:
    """Real orthogonal o1, o2 and phases deltas with U = o1 diag(e^{i deltas}) o2.T."""

    o1: np.ndarray
    o2: np.ndarray
    deltas: np.ndarray


def _degenerate_groups(values: np.ndarray, tol: float) -> list[list[int]]:
    """Split indices of a descending array into groups chained within tol."""
    groups: list[list[int]] = [[0]]
    for i in range(1, values.size):
        if values[i - 1] - values[i] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _sym_unitary_sqrt(z: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric unitary, itself symmetric unitary.

    Re(z) and Im(z) are commuting real symmetric matrices, so z = O e^{i theta} O.T
    for a real orthogonal O; the root halves the angles.
    """
    re = (np.real(z) + np.real(z).T) / 2
    im = (np.imag(z) + np.imag(z).T) / 2
    revals, o = np.linalg.eigh(re)
    # diagonalize Im(z) inside each degenerate eigenspace of Re(z)
    for grp in _degenerate_groups(-revals, 1e-10):
        if len(grp) > 1:
            idx = np.array(grp)
            block = o[:, idx].T @ im @ o[:, idx]
            _, w = np.linalg.eigh((block + block.T) / 2)
            o[:, idx] = o[:, idx] @ w
    theta = np.arctan2(np.diagonal(o.T @ im @ o), np.diagonal(o.T @ re @ o))
    return (o * np.exp(0.5j * theta)) @ o.T


def _canonical_subspace_basis(b: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(b): pivoted Gram-Schmidt on its projector."""
    k = b.shape[1]
    rem = b @ b.conj().T
    cols = []
    for _ in range(k):
        norms = np.linalg.norm(rem, axis=0)
        j = int(np.argmax(norms))
        v = rem[:, j] / norms[j]
        cols.append(v)
        rem = rem - np.outer(v, v.conj() @ rem)
    return np.array(cols).T


def _takagi_attempt(u_l: np.ndarray, s: np.ndarray, v_r: np.ndarray, tol: float) -> np.ndarray:
    # q = u_l diag(s) v_r†; symmetry forces m = u_l.T v_r block diagonal over
    # degenerate singular groups, with symmetric unitary blocks where s > 0
    u_l = u_l.copy()
    zero = [g for g in _degenerate_groups(s, tol) if s[g[0]] <= 1e-12]
    for grp in zero:
        # null columns are free; pick a canonical basis of the kernel
        u_l[:, grp] = _canonical_subspace_basis(u_l[:, grp])
    m = u_l.T @ v_r
    sqrt_m = np.zeros_like(m)
    for grp in _degenerate_groups(s, tol):
        idx = np.ix_(grp, grp)
        if s[grp[0]] <= 1e-12:
            sqrt_m[idx] = np.eye(len(grp))
        else:
            sqrt_m[idx] = _sym_unitary_sqrt(m[idx])
    return u_l.conj() @ sqrt_m


def takagi(q, sym_atol: float = 1e-9) -> TakagiFactorization:
    """Factor a complex symmetric matrix as u.T @ q @ u = diag(sigma), sigma >= 0."""
    q = as_matrix(q)
    asym = np.abs(q - q.T).max()
    if asym > sym_atol:
        raise ValueError(f"matrix is not complex symmetric (asymmetry {asym:.3e})")
    u_l, s, v_r = svd(q)
    scale = max(1.0, s[0] if s.size else 1.0)
    best_u, best_res = None, np.inf
    for tol in _DEG_LADDER:
        u = _takagi_attempt(u_l, s, v_r, tol)
        res = np.abs(u.T @ q @ u - np.diag(s)).max() / scale
        if res < best_res:
            best_u, best_res = u, res
        if best_res < 1e-12:
            break
    return TakagiFactorization(u=best_u, sigma=s)


def _ortho_phase_attempt(u: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = u.shape[0]
    o1, s_r, o2 = svd(u.real)
    o1, o2 = o1.real.copy(), o2.real.copy()
    a = (o1.T @ u @ o2).imag
    for grp in _degenerate_groups(s_r, tol):
        idx = np.array(grp)
        if len(grp) == 1:
            continue
        block = a[np.ix_(idx, idx)]
        if s_r[grp[0]] <= 1e-12:
            # real part vanishes here, so the block is orthogonal; polar-split it
            ua, _, va = svd(block)
            o1[:, idx] = o1[:, idx] @ ua.real
            o2[:, idx] = o2[:, idx] @ va.real
        else:
            # unitarity makes the block symmetric; rotate both sides by its eigenbasis
            _, w = np.linalg.eigh((block + block.T) / 2)
            o1[:, idx] = o1[:, idx] @ w
            o2[:, idx] = o2[:, idx] @ w
    ut = o1.T @ u @ o2
    deltas = np.arctan2(np.diagonal(ut).imag, np.diagonal(ut).real)
    # fold into (-pi/2, pi/2] by absorbing a sign into the o1 column
    for i in range(n):
        if deltas[i] > np.pi / 2:
            deltas[i] -= np.pi
            o1[:, i] = -o1[:, i]
        elif deltas[i] <= -np.pi / 2:
            deltas[i] += np.pi
            o1[:, i] = -o1[:, i]
    return o1, o2, deltas


def ortho_phase_decompose(u, atol: float = UNITARY_ATOL) -> OrthoPhaseDecomp:
    """Split a unitary as o1 diag(e^{i d}) o2.T with o1, o2 real orthogonal, d in (-pi/2, pi/2]."""
    u = as_matrix(u)
    n = u.shape[0]
    err = np.abs(u.conj().T @ u - np.eye(n)).max()
    if err > atol:
        raise ValueError(f"matrix is not unitary (deviation {err:.3e})")
    best, best_res = None, np.inf
    for tol in _DEG_LADDER:
        o1, o2, deltas = _ortho_phase_attempt(u, tol)
        res = np.abs((o1 * np.exp(1j * deltas)) @ o2.T - u).max()
        if res < best_res:
            best, best_res = (o1, o2, deltas), res
        if best_res < 1e-12:
            break
    o1, o2, deltas = best
    return OrthoPhaseDecomp(o1=o1, o2=o2, deltas=deltas)


def local_to_magic(u1, u2, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Map an SU(2) x SU(2) pair to the real orthogonal T (u1 x u2) T†."""
    u1, u2 = as_matrix(u1), as_matrix(u2)
    for u in (u1, u2):
        if not np.allclose(u.conj().T @ u, np.eye(2), atol=atol):
            raise ValueError("factor is not unitary")
        det = np.linalg.det(u)
        if abs(det - 1.0) > atol:
            raise ValueError(f"factor determinant {det:.6f} is not 1; rephase into SU(2)")
    o = MAGIC_T @ np.kron(u1, u2) @ MAGIC_T.conj().T
    return o.real


def magic_to_local(o, atol: float = UNITARY_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Recover u1, u2 in SU(2) with T† o T = u1 x u2 from o in SO(4)."""
    o = as_matrix(o)
    if np.abs(o.imag).max() > atol or not np.allclose(o.T @ o, np.eye(4), atol=atol):
        raise ValueError("input is not real orthogonal")
    det = np.linalg.det(o).real
    if abs(det - 1.0) > atol:
        raise ValueError(f"determinant {det:.6f} is not +1")
    m = MAGIC_T.conj().T @ o @ MAGIC_T
    # nearest Kronecker factor: the block rearrangement of m has rank one
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, v = svd(r)
    u1 = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    u1 = u1 / np.sqrt(np.linalg.det(u1))
    # the cofactor average pairs u2 consistently with the chosen sign of u1
    blocks = m.reshape(2, 2, 2, 2)
    u2 = np.einsum("ij,ikjl->kl", u1.conj(), blocks) / 2
    if np.abs(np.kron(u1, u2) - m).max() > 1e-7:
        raise ValueError("input does not factor as a local pair")
    # canonical sign: largest entry of u1 gets positive real part
    k = np.argmax(np.abs(u1))
    pivot = u1.flat[k]
    if pivot.real < 0 or (pivot.real == 0 and pivot.imag < 0):
        u1, u2 = -u1, -u2
    return u1, u2
