"""Shared constructions for tests: forward-built states with known structure."""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from coassist import FourQubitPure, coeff_matrix, q_matrix, random_state, takagi
from coassist.assist import SQRT_YY
from coassist.factor import MAGIC_T


def haar_so4(rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((4, 4))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 3] = -q[:, 3]
    return q


def complex_orthogonal(rng: np.random.Generator, scale: float = 0.4) -> np.ndarray:
    """Random complex orthogonal matrix, exp of a complex antisymmetric generator."""
    a = rng.standard_normal((4, 4)) * scale
    b = rng.standard_normal((4, 4)) * scale
    m = (a - a.T) / 2 + 1j * (b - b.T) / 2
    return expm(m)


def pattern_f(phi: float, perm=None, flips=None) -> np.ndarray:
    """Unit-modulus diagonal whose phases follow the locally-attainable pattern."""
    phases = np.array([phi, -phi, np.pi / 2 - phi, phi - np.pi / 2])
    if perm is not None:
        phases = phases[list(perm)]
    if flips is not None:
        phases = phases + np.pi * np.asarray(flips)
    return np.exp(1j * phases)


def forward_state(rng: np.random.Generator, f: np.ndarray, sigma=None, rank: int = 4) -> FourQubitPure:
    """Assemble a state from prescribed canonical factors (inverse of the decomposition)."""
    if sigma is None:
        sigma = np.sort(rng.uniform(0.2, 1.0, 4))[::-1]
    sigma = np.asarray(sigma, dtype=float).copy()
    if rank == 3:
        sigma[3] = 0.0
    omega = complex_orthogonal(rng)
    p1 = haar_so4(rng)
    p2 = haar_so4(rng)
    x = SQRT_YY.conj().T @ omega @ np.diag(np.sqrt(sigma)) @ p1 @ np.diag(f) @ p2.T @ MAGIC_T
    amps = x.reshape(16)
    return FourQubitPure(amps / np.linalg.norm(amps))


def channel_zeroed(seed: int, idx: int, keep: int) -> FourQubitPure:
    """Random state projected to the top `keep` Takagi channels of its Q."""
    psi0 = random_state(seed, idx)
    x = coeff_matrix(psi0)
    fac = takagi(q_matrix(psi0))
    b = SQRT_YY @ x @ fac.u
    xr = SQRT_YY.conj().T @ (b[:, :keep] @ fac.u[:, :keep].conj().T)
    amps = xr.reshape(16)
    return FourQubitPure(amps / np.linalg.norm(amps))
