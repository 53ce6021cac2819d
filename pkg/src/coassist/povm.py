"""Four-outcome POVM search on one assistant.

The first measuring party applies a four-outcome POVM; the remaining assistant
then measures a pure three-party state, whose assisted optimum is the fidelity
bound computed per outcome. Optimized values are lower bounds on the
POVM-assisted concurrence: the search is multi-start and derivative-free, and
no claim of global optimality is made.

Element convention: the optimizer works with four row vectors a_k stacked into
an isometry (sum of outer(conj(a_k), a_k) is the identity). Each a_k plays the
same bilinear role as a basis column in the von Neumann optimizer, so the
physical projector direction of element k is conj(a_k).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .assist import _nuc_batch, _optimize_party, csharp_fidelity
from .state import FourQubitPure, q_matrix, rho_ab

POVM_ATOL = 1e-9
_PROB_FLOOR = 1e-12


def _as_element(m, atol: float = POVM_ATOL) -> np.ndarray:
    e = np.asarray(m, dtype=complex)
    if e.shape != (2, 2):
        raise ValueError(f"POVM element must be 2x2, got {e.shape}")
    if np.abs(e - e.conj().T).max() > atol:
        raise ValueError("POVM element is not Hermitian")
    if np.linalg.eigvalsh(e).min() < -atol:
        raise ValueError("POVM element is not positive semidefinite")
    return e


@dataclass(frozen=True)
class Povm4:
    """Four 2x2 Hermitian PSD elements summing to the identity."""

    elements: tuple

    def __post_init__(self):
        elems = tuple(self.elements)
        if len(elems) != 4:
            raise ValueError(f"expected 4 POVM elements, got {len(elems)}")
        elems = tuple(_as_element(e) for e in elems)
        total = sum(elems)
        if np.abs(total - np.eye(2)).max() > POVM_ATOL:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", elems)

    def to_json(self) -> list:
        return [
            [[[float(c.real), float(c.imag)] for c in row] for row in e]
            for e in self.elements
        ]


class ConditionalState(NamedTuple):
    """One measurement branch: its probability, keeper-pair density matrix, and purification."""

    prob: float
    rho_ab: np.ndarray
    state: FourQubitPure


class PovmResult(NamedTuple):
    value: float
    povm: Povm4


def _element_sqrt(e: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(e)
    lam = np.clip(lam, 0.0, None)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def _apply_to_party(amps: np.ndarray, m: np.ndarray, party: str) -> np.ndarray:
    t = amps.reshape(2, 2, 2, 2)
    if party == "C":
        out = np.einsum("ic,abcd->abid", m, t)
    elif party == "D":
        out = np.einsum("id,abcd->abci", m, t)
    else:
        raise ValueError(f"party must be 'C' or 'D', got {party!r}")
    return out.reshape(16)


def conditional_states(psi: FourQubitPure, povm: Povm4, party: str = "C") -> list:
    """Measurement branches with probability above 1e-12, in element order.

    Each branch applies M_k = sqrt(E_k) to the measuring party; the branch
    probability is <psi|E_k|psi> and the returned state purifies the
    conditional keeper-pair density matrix.
    """
    if not isinstance(povm, Povm4):
        povm = Povm4(tuple(povm))
    out = []
    for e in povm.elements:
        post = _apply_to_party(psi.amplitudes, _element_sqrt(e), party)
        p = float(np.vdot(post, post).real)
        if p <= _PROB_FLOOR:
            continue
        branch = FourQubitPure(post / np.sqrt(p))
        out.append(ConditionalState(prob=p, rho_ab=rho_ab(branch), state=branch))
    return out


def povm_value(psi: FourQubitPure, povm: Povm4, party: str = "C") -> float:
    """Average assisted concurrence left with the keeper pair, branch by branch."""
    return float(
        sum(c.prob * csharp_fidelity(c.rho_ab) for c in conditional_states(psi, povm, party))
    )


def projective_povm(w: np.ndarray) -> Povm4:
    """Two-outcome von Neumann measurement of basis w as a four-outcome POVM.

    The columns of w enter in the same bilinear role as in the von Neumann
    optimizer, so each element projects onto the conjugate of a column; two
    zero elements pad the outcome count.
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (2, 2) or np.abs(w.conj().T @ w - np.eye(2)).max() > 1e-9:
        raise ValueError("w must be a 2x2 unitary basis matrix")
    zero = np.zeros((2, 2), dtype=complex)
    e0 = np.outer(w[:, 0].conj(), w[:, 0])
    e1 = np.outer(w[:, 1].conj(), w[:, 1])
    return Povm4((e0, e1, zero, zero))


def _rows_to_povm(a: np.ndarray) -> Povm4:
    return Povm4(tuple(np.outer(a[k].conj(), a[k]) for k in range(4)))


def _retract(x: np.ndarray) -> np.ndarray:
    """Map 16 real coordinates to a 4x2 isometry (rows summing to a valid POVM)."""
    a = (x[:8] + 1j * x[8:]).reshape(4, 2)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    scale = np.ones(2, dtype=complex)
    nz = np.abs(d) > 1e-12
    scale[nz] = d[nz] / np.abs(d[nz])
    return q * scale[None, :]


def _rows_objective(qt: np.ndarray, party: str):
    if party == "C":
        subscripts = "kc,kC,cdCe->kde"
    elif party == "D":
        subscripts = "kd,kD,cdCD->kcC"
    else:
        raise ValueError(f"party must be 'C' or 'D', got {party!r}")

    def fun(x):
        a = _retract(x)
        m = np.einsum(subscripts, a, a, qt)
        return -float(_nuc_batch(m).sum())

    return fun


def _pack_rows(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def povm_optimize(
    psi: FourQubitPure,
    party: str = "C",
    restarts: int = 64,
    seed: int = 0,
) -> PovmResult:
    """Multi-start search over rank-1 four-outcome POVMs for the measuring party.

    Restart 0 starts from the best projective basis, so the result never falls
    below the von Neumann optimum; the remaining restarts draw random
    isometries. Deterministic for fixed seed and restart count. The value is a
    lower bound on the POVM-assisted optimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    q = q_matrix(psi)
    qt = q.reshape(2, 2, 2, 2)
    fun = _rows_objective(qt, party)

    _, w = _optimize_party(q, party, grid=(32, 64), refine=5, xatol=1e-9, maxiter=250,
                           extra_starts=[])
    a0 = np.zeros((4, 2), dtype=complex)
    a0[0] = w[:, 0]
    a0[1] = w[:, 1]
    starts = [_pack_rows(a0)]
    rng = np.random.default_rng(seed)
    for _ in range(restarts - 1):
        starts.append(rng.standard_normal(16))

    best_val, best_x = -np.inf, starts[0]
    for x0 in starts:
        res = optimize.minimize(
            fun,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-11, "maxiter": 1500},
        )
        if -res.fun > best_val:
            best_val, best_x = -float(res.fun), res.x
    # closed-form branch values, not the fidelity route: rank-1 branches make
    # them equal, and this one is free of sqrt noise near singular conditionals
    return PovmResult(value=best_val, povm=_rows_to_povm(_retract(best_x)))
