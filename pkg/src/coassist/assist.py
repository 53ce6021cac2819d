"""Assistance concurrence: joint optimum, local measurement search, locality certification.

Measurement convention: a unitary V describes the joint measurement whose basis
vectors are the columns of V*, so the average concurrence reads sum_k |(V^T Q V)_kk|.
The same reading applies to the 2x2 blocks held by each assistant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .factor import MAGIC_T, magic_to_local, ortho_phase_decompose, takagi
from .linalg import fidelity, nuclear_norm_2x2
from .state import SQRT_YY, FourQubitPure, coeff_matrix, q_matrix, spin_flip_mixed

__all__ = [
    "RANK_TOL",
    "PATTERN_TOL",
    "JointMeasurement",
    "LocalBasis",
    "CflatResult",
    "CanonicalDecomposition",
    "LocalityCertificate",
    "csharp",
    "csharp_fidelity",
    "avg_concurrence",
    "cflat_given_w",
    "communication_free_basis",
    "cflat",
    "canonical_decomposition",
    "locality_certificate",
    "extract_local_basis",
    "rank2_local_basis",
    "rank_class",
    "report",
]

RANK_TOL = 1e-9
PATTERN_TOL = 1e-6
UNITARY_ATOL = 1e-9
_ZERO_BLOCK_TOL = 1e-12
_I2 = np.eye(2)


def _as_unitary(m, size: int, atol: float = UNITARY_ATOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {m.shape}")
    dev = np.abs(m.conj().T @ m - np.eye(size)).max()
    if dev > atol:
        raise ValueError(f"matrix is not unitary: deviation {dev:.3e}")
    return m


@dataclass(frozen=True)
class JointMeasurement:
    """Joint 4-outcome measurement on CD; basis vectors are the columns of v*."""

    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _as_unitary(self.v, 4))


@dataclass(frozen=True)
class LocalBasis:
    """Measurement bases of the assistants.

    Without feed_forward the induced joint matrix is w_c (x) w_d; with it, D's
    block depends on C's outcome and the joint matrix is (w_c (x) 1) blockdiag(v_d0, v_d1).
    """

    w_c: np.ndarray
    w_d: np.ndarray | None = None
    feed_forward: tuple[np.ndarray, np.ndarray] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "w_c", _as_unitary(self.w_c, 2))
        if self.w_d is not None:
            object.__setattr__(self, "w_d", _as_unitary(self.w_d, 2))
        if self.feed_forward is not None:
            v0, v1 = self.feed_forward
            object.__setattr__(self, "feed_forward", (_as_unitary(v0, 2), _as_unitary(v1, 2)))
        if self.w_d is None and self.feed_forward is None:
            raise ValueError("basis needs either w_d or feed_forward blocks")

    def joint(self) -> np.ndarray:
        if self.feed_forward is not None:
            v0, v1 = self.feed_forward
            block = np.zeros((4, 4), dtype=complex)
            block[:2, :2] = v0
            block[2:, 2:] = v1
            return np.kron(self.w_c, _I2) @ block
        return np.kron(self.w_c, self.w_d)


class CflatResult(NamedTuple):
    value: float
    basis: LocalBasis


def csharp(psi: FourQubitPure) -> float:
    """Concurrence of assistance under joint CD measurements: sum of singular values of Q."""
    return float(np.linalg.svd(q_matrix(psi), compute_uv=False).sum())


def csharp_fidelity(rho_ab) -> float:
    """Same quantity computed as the fidelity between rho_AB and its spin flip."""
    rho_ab = np.asarray(rho_ab, dtype=complex)
    return fidelity(rho_ab, spin_flip_mixed(rho_ab))


def avg_concurrence(psi: FourQubitPure, meas) -> float:
    """Average concurrence left with AB when CD measure jointly in basis meas."""
    if isinstance(meas, JointMeasurement):
        v = meas.v
    elif isinstance(meas, LocalBasis):
        v = meas.joint()
    else:
        v = _as_unitary(meas, 4)
    q = q_matrix(psi)
    return float(np.abs(np.einsum("ki,kl,li->i", v, q, v)).sum())


def _party_blocks(q: np.ndarray, w: np.ndarray, party: str) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal 2x2 blocks of the transpose congruence of Q by the measuring party's basis."""
    if party == "C":
        big = np.kron(w, _I2)
        qp = big.T @ q @ big
        return qp[:2, :2], qp[2:, 2:]
    if party == "D":
        big = np.kron(_I2, w)
        qp = big.T @ q @ big
        i0, i1 = [0, 2], [1, 3]
        return qp[np.ix_(i0, i0)], qp[np.ix_(i1, i1)]
    raise ValueError(f"party must be 'C' or 'D', got {party!r}")


def cflat_given_w(psi: FourQubitPure, w, party: str = "C") -> float:
    """Best average concurrence when the given party measures in basis w.

    The other assistant responds optimally per outcome; that optimum is the sum
    of the nuclear norms of the two conditional 2x2 blocks.
    """
    w = _as_unitary(w, 2)
    q1, q2 = _party_blocks(q_matrix(psi), w, party)
    return nuclear_norm_2x2(q1) + nuclear_norm_2x2(q2)


def communication_free_basis(psi: FourQubitPure, w, party: str = "C") -> LocalBasis:
    """Single fixed basis for the responding party matching the feed-forward optimum.

    Both conditional blocks admit optimal response bases differing only by a real
    rotation and column phases; factoring their relative unitary into
    orthogonal-phase-orthogonal form yields one basis serving both outcomes.
    """
    w = _as_unitary(w, 2)
    q1, q2 = _party_blocks(q_matrix(psi), w, party)
    t1, t2 = takagi(q1), takagi(q2)
    s1, s2 = float(t1.sigma.sum()), float(t2.sigma.sum())
    if s1 <= _ZERO_BLOCK_TOL and s2 <= _ZERO_BLOCK_TOL:
        partner = np.eye(2, dtype=complex)
    elif s1 <= _ZERO_BLOCK_TOL:
        partner = t2.u
    elif s2 <= _ZERO_BLOCK_TOL:
        partner = t1.u
    else:
        # t1.u O1 D = t2.u O2 for the orthogonal-phase factors of K, so both
        # outcome optima are reachable in the common basis t2.u O2.
        k = t1.u.conj().T @ t2.u
        od = ortho_phase_decompose(k)
        partner = t2.u @ od.o2
    if party == "C":
        return LocalBasis(w_c=w, w_d=partner)
    return LocalBasis(w_c=partner, w_d=w)


def _basis_columns(theta, phi):
    """Columns of the 2-parameter basis family, broadcast over grids."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    e = np.exp(1j * phi)
    u0 = np.stack([c * np.ones_like(e), s * e], axis=-1)
    u1 = np.stack([-s * np.conj(e), c * np.ones_like(e)], axis=-1)
    return u0, u1


def _basis_matrix(theta: float, phi: float) -> np.ndarray:
    u0, u1 = _basis_columns(np.asarray(theta), np.asarray(phi))
    return np.stack([u0, u1], axis=-1)


def _nuc_batch(m: np.ndarray) -> np.ndarray:
    fro2 = np.abs(m[..., 0, 0]) ** 2 + np.abs(m[..., 0, 1]) ** 2 + np.abs(m[..., 1, 0]) ** 2 + np.abs(m[..., 1, 1]) ** 2
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return np.sqrt(fro2 + 2.0 * np.abs(det))


def _grid_objective(qt: np.ndarray, theta: np.ndarray, phi: np.ndarray, party: str) -> np.ndarray:
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    u0, u1 = _basis_columns(tt.ravel(), pp.ravel())
    if party == "C":
        m0 = np.einsum("gc,gC,cdCe->gde", u0, u0, qt)
        m1 = np.einsum("gc,gC,cdCe->gde", u1, u1, qt)
    else:
        m0 = np.einsum("gd,gD,cdCD->gcC", u0, u0, qt)
        m1 = np.einsum("gd,gD,cdCD->gcC", u1, u1, qt)
    return (_nuc_batch(m0) + _nuc_batch(m1)).reshape(tt.shape)


def _point_objective(qt: np.ndarray, party: str):
    def fun(x):
        u0, u1 = _basis_columns(np.asarray(x[0]), np.asarray(x[1]))
        if party == "C":
            m0 = np.einsum("c,C,cdCe->de", u0, u0, qt)
            m1 = np.einsum("c,C,cdCe->de", u1, u1, qt)
        else:
            m0 = np.einsum("d,D,cdCD->cC", u0, u0, qt)
            m1 = np.einsum("d,D,cdCD->cC", u1, u1, qt)
        return -float(_nuc_batch(m0) + _nuc_batch(m1))

    return fun


def _basis_angles(w: np.ndarray) -> tuple[float, float]:
    """Angles whose basis family member equals w up to column phases."""
    a, b = w[0, 0], w[1, 0]
    theta = 2.0 * np.arctan2(abs(b), abs(a))
    phi = float(np.angle(b) - np.angle(a)) if abs(b) > 1e-15 and abs(a) > 1e-15 else 0.0
    return float(theta), phi


def _optimize_party(
    q: np.ndarray,
    party: str,
    grid: tuple[int, int],
    refine: int,
    xatol: float,
    maxiter: int,
    extra_starts: list[tuple[float, float]],
) -> tuple[float, np.ndarray]:
    qt = q.reshape(2, 2, 2, 2)
    n_t, n_p = grid
    theta = (np.arange(n_t) + 0.5) * (np.pi / n_t)
    phi = np.arange(n_p) * (2.0 * np.pi / n_p)
    vals = _grid_objective(qt, theta, phi, party)
    order = np.argsort(vals.ravel())[::-1][:refine]
    starts = [(theta[i // n_p], phi[i % n_p]) for i in order]
    starts.extend(extra_starts)
    fun = _point_objective(qt, party)
    best_val, best_x = -np.inf, None
    for x0 in starts:
        res = optimize.minimize(
            fun,
            np.asarray(x0, dtype=float),
            method="Nelder-Mead",
            options={"xatol": xatol, "fatol": 1e-13, "maxiter": maxiter},
        )
        if -res.fun > best_val:
            best_val, best_x = -float(res.fun), res.x
    return best_val, _basis_matrix(best_x[0], best_x[1])


def cflat(
    psi: FourQubitPure,
    ordering: str = "both",
    grid: tuple[int, int] = (32, 64),
    refine: int = 5,
    xatol: float = 1e-9,
    maxiter: int = 250,
) -> CflatResult:
    """Best average concurrence over local von Neumann strategies, with its basis.

    Runs a uniform grid plus simplex refinement over the measuring party's basis,
    for the orderings requested, and converts the winner to a communication-free
    product basis that attains the same value.
    """
    q = q_matrix(psi)
    sigma = np.linalg.svd(q, compute_uv=False)
    extra: list[tuple[float, float]] = []
    if int((sigma > RANK_TOL).sum()) <= 2:
        walgate = rank2_local_basis(psi)
        extra.append(_basis_angles(walgate.w_c))
    orderings = {"both": ("C", "D"), "C": ("C",), "D": ("D",)}
    if ordering not in orderings:
        raise ValueError(f"ordering must be one of {sorted(orderings)}, got {ordering!r}")
    parties = orderings[ordering]
    best = (-np.inf, "C", None)
    for party in parties:
        starts = extra if party == "C" else []
        val, w = _optimize_party(q, party, grid, refine, xatol, maxiter, starts)
        if val > best[0]:
            best = (val, party, w)
    value, party, w = best
    basis = communication_free_basis(psi, w, party=party)
    return CflatResult(float(value), basis)


def rank_class(psi: FourQubitPure) -> int:
    """Number of singular values of Q above tolerance."""
    sigma = np.linalg.svd(q_matrix(psi), compute_uv=False)
    return int((sigma > RANK_TOL).sum())


def _orthogonal_spinor(a: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(a[1]), np.conj(a[0])])


def _bloch_spinor(n: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])


def rank2_local_basis(psi: FourQubitPure) -> LocalBasis:
    """Constructive optimal local strategy for states whose Q has rank at most 2.

    Writing the two Takagi channel vectors as 2x2 coefficient matrices K1, K2,
    a C basis attains the optimum iff each basis spinor is orthogonal (in Bloch
    coordinates) to the Hermitian part of (conj K1) K2^T; such a basis always
    exists because that matrix is traceless. D's response per outcome is the
    Takagi basis of the conditional block.
    """
    q = q_matrix(psi)
    fac = takagi(q)
    sigma = fac.sigma
    rank = int((sigma > RANK_TOL).sum())
    if rank > 2:
        raise ValueError(f"expected rank at most 2, got rank {rank}")
    if rank <= 1:
        a_cols = np.eye(2, dtype=complex)
    else:
        k1 = np.conj(fac.u[:, 0]).reshape(2, 2)
        k2 = np.conj(fac.u[:, 1]).reshape(2, 2)
        g = np.conj(k1) @ k2.T
        j = (g - g.conj().T) / 2j
        bloch = np.array([2.0 * j[0, 1].real, -2.0 * j[0, 1].imag, (j[0, 0] - j[1, 1]).real])
        norm = np.linalg.norm(bloch)
        if norm < 1e-12:
            n = np.array([0.0, 0.0, 1.0])
        else:
            bloch = bloch / norm
            trial = np.eye(3)[np.argmin(np.abs(bloch))]
            n = np.cross(bloch, trial)
            n = n / np.linalg.norm(n)
        a0 = _bloch_spinor(n)
        a_cols = np.stack([a0, _orthogonal_spinor(a0)], axis=-1)
    qt = q.reshape(2, 2, 2, 2)
    responses = []
    for k in range(2):
        mk = np.einsum("c,C,cdCe->de", a_cols[:, k], a_cols[:, k], qt)
        responses.append(takagi(mk).u)
    return LocalBasis(w_c=a_cols, feed_forward=(responses[0], responses[1]))


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Factorization of the coefficient matrix isolating the diagonal phase factor.

    Reconstruction: sqrt_yy^dagger . omega . sqrt(diag(sigma)) . p1 . diag(f) . p2^T . T
    equals exp(1j*phase) times the coefficient matrix. The global phase is forced:
    p1, p2, f all have determinant one, pinning the determinant phase of the product.
    """

    omega: np.ndarray
    sigma: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    f: np.ndarray
    phase: float
    rank: int

    def reconstruct(self) -> np.ndarray:
        return (
            SQRT_YY.conj().T
            @ self.omega
            @ np.diag(np.sqrt(self.sigma))
            @ self.p1
            @ np.diag(self.f)
            @ self.p2.T
            @ MAGIC_T
        )


def _bilinear_null_completion(omega3: np.ndarray) -> np.ndarray:
    """Fourth column completing a complex-orthogonal 4x3 frame."""
    _, _, vh = np.linalg.svd(omega3.T)
    v = vh[-1].conj()
    scale = v @ v
    if abs(scale) < 1e-8:
        raise ValueError("null direction is isotropic; cannot complete orthogonal frame")
    return v / np.sqrt(scale)


def canonical_decomposition(psi: FourQubitPure) -> CanonicalDecomposition:
    """Factor the state as sqrt_yy^dagger Omega sqrt(Sigma) P1 F P2^T T (rank >= 3 only)."""
    q = q_matrix(psi)
    fac = takagi(q)
    u, sigma = fac.u.copy(), fac.sigma
    rank = int((sigma > RANK_TOL).sum())
    if rank < 3:
        raise ValueError(f"decomposition requires rank 3 or 4, got rank {rank}")
    if rank == 4:
        gamma = float(np.angle(np.linalg.det(u))) / 4.0
        # a column sign flip negates det(u); use it to keep the state rephasing minimal
        if gamma > np.pi / 8.0:
            u[:, 3] = -u[:, 3]
            gamma -= np.pi / 4.0
        elif gamma <= -np.pi / 8.0:
            u[:, 3] = -u[:, 3]
            gamma += np.pi / 4.0
        u = u * np.exp(-1j * gamma)
    else:
        gamma = 0.0
        u[:, 3] = u[:, 3] * np.exp(-1j * np.angle(np.linalg.det(u)))
    x = coeff_matrix(psi) * np.exp(1j * gamma)
    b = SQRT_YY @ x @ u
    omega = np.zeros((4, 4), dtype=complex)
    omega[:, :rank] = b[:, :rank] / np.sqrt(sigma[:rank])
    if rank == 3:
        tail = float(np.linalg.norm(b[:, 3]))
        if tail > 1e-6:
            raise ValueError(f"rank-3 channel carries weight {tail:.3e}")
        omega[:, 3] = _bilinear_null_completion(omega[:, :3])
    tu = MAGIC_T @ u
    od = ortho_phase_decompose(tu)
    o3, o4, deltas = od.o1.copy(), od.o2, od.deltas.copy()
    if np.linalg.det(o3) * np.linalg.det(o4) < 0:
        o3[:, 3] = -o3[:, 3]
        deltas[3] = deltas[3] + np.pi
    sign = float(np.sign(np.linalg.det(o4)))
    o7 = np.diag([1.0, 1.0, 1.0, sign])
    p1 = o4 @ o7
    p2 = o3 @ o7
    f = np.exp(-1j * deltas)
    return CanonicalDecomposition(
        omega=omega, sigma=sigma, p1=p1, p2=p2, f=f, phase=gamma, rank=rank
    )


_PATTERN_CASES: list[tuple[tuple[int, ...], tuple[int, ...]]] = [
    (perm, signs)
    for perm in itertools.permutations(range(4))
    for signs in itertools.product((1, -1), repeat=4)
    if signs.count(-1) % 2 == 0
]


def _enclosing_arc(angles: np.ndarray) -> tuple[float, float]:
    """Center and half-width of the smallest arc containing the given angles."""
    a = np.sort(np.mod(angles, 2.0 * np.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2.0 * np.pi]]))
    i = int(np.argmax(gaps))
    width = 2.0 * np.pi - gaps[i]
    start = a[(i + 1) % len(a)]
    center = start + width / 2.0
    return float(np.mod(center, 2.0 * np.pi)), float(width / 2.0)


def _fit_pattern(f: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Best fit of the diagonal phases to {phi, -phi, pi/2-phi, phi-pi/2}.

    Minimizes the maximal angular deviation over all slot reorderings and even
    sign flips (both absorbable into the decomposition with unit determinants).
    Returns (phi in (0, pi/2], residual, the absorbing orthogonal factor for p2).
    """
    phases = np.angle(f)
    best = (np.inf, 0.0, None)
    for perm, signs in _PATTERN_CASES:
        g = phases[list(perm)] + np.array([0.0 if s == 1 else np.pi for s in signs])
        est = np.array([g[0], -g[1], np.pi / 2.0 - g[2], g[3] + np.pi / 2.0])
        center, resid = _enclosing_arc(est)
        if resid < best[0]:
            o7 = np.zeros((4, 4))
            for j, p in enumerate(perm):
                o7[p, j] = 1.0
            if np.linalg.det(o7) < 0:
                o7[:, 3] = -o7[:, 3]
            d_flip = np.diag([float(s) for s in signs])
            best = (resid, center, o7 @ d_flip)
    resid, center, absorb = best
    phi = float(np.mod(center, np.pi / 2.0))
    if phi <= 0.0:
        phi = np.pi / 2.0
    return phi, float(resid), absorb


@dataclass(frozen=True)
class LocalityCertificate:
    """Decision of whether local von Neumann measurements attain the joint optimum."""

    rank_class: int
    sigma: np.ndarray
    f_phases: np.ndarray | None
    phi: float | None
    pattern_residual: float
    verdict: str
    local_basis: LocalBasis | None


def extract_local_basis(dec: CanonicalDecomposition) -> LocalBasis:
    """Product basis attaining the joint optimum for phase-pattern states."""
    phi, resid, absorb = _fit_pattern(dec.f)
    if resid > PATTERN_TOL:
        raise ValueError(
            f"phase pattern residual {resid:.3e} exceeds {PATTERN_TOL}; no local basis extracted"
        )
    p2_eff = dec.p2 @ absorb
    u1, u2 = magic_to_local(p2_eff)
    return LocalBasis(w_c=u1, w_d=u2)


def locality_certificate(psi: FourQubitPure) -> LocalityCertificate:
    """Rank classification plus the diagonal-phase pattern test."""
    sigma = np.linalg.svd(q_matrix(psi), compute_uv=False)
    rank = int((sigma > RANK_TOL).sum())
    if rank <= 2:
        return LocalityCertificate(
            rank_class=rank,
            sigma=sigma,
            f_phases=None,
            phi=None,
            pattern_residual=0.0,
            verdict="always_local",
            local_basis=rank2_local_basis(psi),
        )
    try:
        dec = canonical_decomposition(psi)
    except ValueError:
        return LocalityCertificate(
            rank_class=rank,
            sigma=sigma,
            f_phases=None,
            phi=None,
            pattern_residual=np.inf,
            verdict="local_insufficient",
            local_basis=None,
        )
    phi, resid, _ = _fit_pattern(dec.f)
    if resid <= PATTERN_TOL:
        return LocalityCertificate(
            rank_class=rank,
            sigma=sigma,
            f_phases=np.angle(dec.f),
            phi=phi,
            pattern_residual=resid,
            verdict="local_sufficient",
            local_basis=extract_local_basis(dec),
        )
    return LocalityCertificate(
        rank_class=rank,
        sigma=sigma,
        f_phases=np.angle(dec.f),
        phi=phi,
        pattern_residual=resid,
        verdict="local_insufficient",
        local_basis=None,
    )


def _complex_matrix_json(m: np.ndarray) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in np.asarray(m)]


def report(psi: FourQubitPure) -> dict:
    """Bundle of joint value, local value, gain, and certificate for serialization."""
    cs = csharp(psi)
    value, basis = cflat(psi)
    cert = locality_certificate(psi)
    gain = (cs - value) / value if value > 1e-12 else None
    return {
        "csharp": cs,
        "cflat": value,
        "relative_gain": gain,
        "rank_class": cert.rank_class,
        "verdict": cert.verdict,
        "phi": cert.phi,
        "pattern_residual": None if np.isinf(cert.pattern_residual) else cert.pattern_residual,
        "basis": {
            "w_c": _complex_matrix_json(basis.w_c),
            "w_d": _complex_matrix_json(basis.w_d),
        },
    }
