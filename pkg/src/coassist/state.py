"""Four-qubit pure states: construction, fixtures, derived matrices, permutations, sampling."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import as_matrix

__all__ = [
    "NORM_ATOL",
    "SIGMA_Y",
    "YY",
    "SQRT_YY",
    "FourQubitPure",
    "coeff_matrix",
    "rho_ab",
    "rho_cd",
    "q_matrix",
    "spin_flip_pure",
    "spin_flip_mixed",
    "concurrence_pure",
    "permute_parties",
    "pair_permutation",
    "random_state",
    "fixture",
    "FIXTURE_NAMES",
    "parse_state",
    "load_state",
    "save_state",
]

NORM_ATOL = 1e-10
_PARSE_NORM_ATOL = 1e-6

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)
# symmetric square root of sigma_y x sigma_y
SQRT_YY = 0.5 * np.array(
    [
        [1 + 1j, 0, 0, -1 + 1j],
        [0, 1 + 1j, 1 - 1j, 0],
        [0, 1 - 1j, 1 + 1j, 0],
        [-1 + 1j, 0, 0, 1 + 1j],
    ]
)


@dataclass(frozen=True, eq=False)
class FourQubitPure:
    """Sixteen amplitudes of |psi>_ABCD, indexed |b_A b_B b_C b_D> with c1 = |0000>."""

    amplitudes: np.ndarray
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 16:
            raise ValueError(f"expected 16 amplitudes, got {amps.size}")
        if not np.isfinite(amps).all():
            raise ValueError("amplitudes contain non-finite values")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_ATOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def coeff_matrix(psi: FourQubitPure) -> np.ndarray:
    """4x4 matrix X with row index = AB bits, column index = CD bits."""
    return psi.amplitudes.reshape(4, 4).copy()


def rho_ab(psi: FourQubitPure) -> np.ndarray:
    x = coeff_matrix(psi)
    return x @ x.conj().T


def rho_cd(psi: FourQubitPure) -> np.ndarray:
    xt = coeff_matrix(psi).T
    return xt @ xt.conj().T


def q_matrix(psi: FourQubitPure) -> np.ndarray:
    x = coeff_matrix(psi)
    return x.T @ YY @ x


def spin_flip_pure(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if phi.size != 4:
        raise ValueError("expected a two-qubit state vector of length 4")
    return YY @ phi.conj()


def spin_flip_mixed(rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    return YY @ rho.conj() @ YY


def concurrence_pure(phi, atol: float = 1e-9) -> float:
    """2|ad - bc| for a normalized two-qubit vector (a, b, c, d)."""
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if phi.size != 4:
        raise ValueError("expected a two-qubit state vector of length 4")
    norm = np.linalg.norm(phi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state norm {norm!r} deviates from 1")
    a, b, c, d = phi
    return float(2.0 * abs(a * d - b * c))


_PARTIES = "ABCD"


def permute_parties(psi: FourQubitPure, perm: str) -> FourQubitPure:
    """Relabel qubits so that new party k holds what old party perm[k] held."""
    perm = str(perm).upper()
    if sorted(perm) != list(_PARTIES):
        raise ValueError(f"perm must be a permutation of 'ABCD', got {perm!r}")
    axes = [perm.index(p) for p in _PARTIES]
    amps = psi.amplitudes.reshape(2, 2, 2, 2).transpose(axes).reshape(-1)
    return FourQubitPure(amps, label=psi.label)


def pair_permutation(pair: str) -> str:
    """Permutation string making the named pair the keepers (new A, B)."""
    pair = str(pair).upper()
    if len(pair) != 2 or pair[0] not in _PARTIES or pair[1] not in _PARTIES or pair[0] == pair[1]:
        raise ValueError(f"invalid keeper pair {pair!r}")
    rest = "".join(p for p in _PARTIES if p not in pair)
    return pair + rest


def random_state(seed: int, index: int = 0) -> FourQubitPure:
    """Random state: real gaussian amplitudes, each under an independent uniform phase.

    The moduli follow |N(0,1)| rather than the Rayleigh law of a rotation-invariant
    complex gaussian, so this ensemble is phase- and real-orthogonally invariant but
    not unitarily invariant; it is the ensemble behind the campaign reference means.

    Stream-split rule: state `index` under `seed` draws from a Philox generator
    keyed by seed with counter block (0, 0, 0, index), so any subset of indices
    can be generated independently and in any order.
    """
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))
    r = rng.standard_normal(16)
    theta = rng.uniform(0.0, 2.0 * np.pi, 16)
    amps = r * np.exp(1j * theta)
    return FourQubitPure(amps / np.linalg.norm(amps))


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
_BELL = {
    "phi+": (_ket("00") + _ket("11")) / np.sqrt(2),
    "phi-": (_ket("00") - _ket("11")) / np.sqrt(2),
    "psi+": (_ket("01") + _ket("10")) / np.sqrt(2),
    "psi-": (_ket("01") - _ket("10")) / np.sqrt(2),
}

FIXTURE_NAMES = ("ghz", "swap", "comm75", "povm31")


def fixture(name: str) -> FourQubitPure:
    """Named example states, parties ordered A, B, C, D."""
    if name == "ghz":
        amps = (_ket("0000") + _ket("1111")) / np.sqrt(2)
        return FourQubitPure(amps, label="ghz")
    if name == "swap":
        # |Phi+>_AC |Phi+>_BD: a Bell pair across A-C and another across B-D
        amps = np.zeros(16, dtype=complex)
        for a in range(2):
            for b in range(2):
                amps[8 * a + 4 * b + 2 * a + b] = 0.5
        return FourQubitPure(amps, label="swap")
    if name == "comm75":
        amps = (
            np.kron(_BELL["phi+"], _ket("00"))
            + np.kron(_BELL["phi-"], _ket("01"))
            + np.kron(_BELL["psi+"], np.kron(_ket("1"), _PLUS))
            + np.kron(_BELL["psi-"], np.kron(_ket("1"), _MINUS))
        )
        # the printed 1/4 prefactor leaves norm 1/2; renormalized here
        amps = amps / np.linalg.norm(amps)
        return FourQubitPure(amps, label="comm75 (renormalized)")
    if name == "povm31":
        # Plus kets enter unnormalized, |0>+|1>, so the first branch carries
        # twice the weight of the others after global renormalization.
        amps = (
            2.0 * np.kron(_BELL["phi+"], np.kron(_PLUS, _PLUS))
            + np.kron(_BELL["phi-"], _ket("00"))
            + np.kron(_BELL["psi-"], _ket("11"))
        ) / np.sqrt(6)
        return FourQubitPure(amps, label="povm31 (renormalized)")
    raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURE_NAMES}")


def parse_state(obj) -> FourQubitPure:
    """Build a state from the JSON object format {"amplitudes": [[re, im] x 16], "label": ...}."""
    if not isinstance(obj, dict) or "amplitudes" not in obj:
        raise ValueError("state object must be a mapping with an 'amplitudes' key")
    raw = obj["amplitudes"]
    if not isinstance(raw, list) or len(raw) != 16:
        raise ValueError("'amplitudes' must be a list of exactly 16 [re, im] pairs")
    amps = np.empty(16, dtype=complex)
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ValueError(f"amplitude {i} is not a [re, im] pair")
        re, im = float(entry[0]), float(entry[1])
        if not (np.isfinite(re) and np.isfinite(im)):
            raise ValueError(f"amplitude {i} is not finite")
        amps[i] = re + 1j * im
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > _PARSE_NORM_ATOL:
        raise ValueError(f"state norm {norm!r} deviates from 1 beyond {_PARSE_NORM_ATOL}")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ValueError("'label' must be a string")
    return FourQubitPure(amps / norm, label=label)


def load_state(path) -> FourQubitPure:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return parse_state(obj)


def save_state(path, psi: FourQubitPure) -> None:
    obj = {"amplitudes": [[float(c.real), float(c.imag)] for c in psi.amplitudes]}
    if psi.label is not None:
        obj["label"] = psi.label
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")
