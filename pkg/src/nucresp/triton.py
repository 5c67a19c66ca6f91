"""Three-nucleon toy model on a two-by-two lattice with one static nucleon.

Two mobile nucleons A and B use two qubits each in first quantization:
qubits (0, 1) hold the site of A and (2, 3) the site of B.  The static
nucleon sits on site ``|00>``.  Energies are in units of the hopping ``t``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .circuits import Circuit, diagonal_circuit
from .pauli import PauliString, PauliSum
from .simulator import DensityMatrix, StateVector, run_pure

N_QUBITS = 4
STATIC_SITE = 0
C3_STATES = ("0000",)
C2_DYN_STATES = ("0101", "1010", "1111")
C2_SA_STATES = ("0001", "0010", "0011")


@dataclass(frozen=True)
class TritonParams:
    t: float = 1.0
    U: float = -7.0
    V: float = 28.0

    @property
    def reduced(self) -> bool:
        """Three-body term cancels the two-body doubling: the Pauli form simplifies."""
        return abs(self.V + 4 * self.U) <= 1e-12 * max(1.0, abs(self.U))


@dataclass(frozen=True)
class TritonObservables:
    C3: float
    C2_dyn: float
    C2_sA: float
    energy: float | None = None

    def to_dict(self) -> dict:
        d = {"C3": self.C3, "C2_dyn": self.C2_dyn, "C2_sA": self.C2_sA}
        if self.energy is not None:
            d["energy"] = self.energy
        return d


@dataclass(frozen=True)
class TrialResult:
    theta: float
    phi: float
    energy: float
    variant: str


def potential_diagonal(p: TritonParams) -> np.ndarray:
    """Contact energies per basis state ``|site_A site_B>``.

    Each mobile nucleon meets the static one through U when it sits on the
    static site; two mobile nucleons on one site add U; all three add V.
    """
    d = np.zeros(16)
    for b in range(16):
        a, bb = b >> 2, b & 3
        n_on = np.bincount([STATIC_SITE, a, bb], minlength=4)
        pairs = sum(m * (m - 1) // 2 for m in n_on)
        triples = sum(m * (m - 1) * (m - 2) // 6 for m in n_on)
        d[b] = p.U * pairs + p.V * triples
    return d


def hopping_matrix(p: TritonParams) -> np.ndarray:
    """``-2t sum_k X_k``; a two-site periodic direction counts its bond twice."""
    return PauliSum(N_QUBITS, [(-2 * p.t, PauliString.single(N_QUBITS, k, "X")) for k in range(N_QUBITS)]).to_matrix().real


def diagonal_part(p: TritonParams) -> np.ndarray:
    """Diagonal of H including the ``8t`` kinetic offset."""
    return potential_diagonal(p) + 8 * p.t


def build_hamiltonian(p: TritonParams = TritonParams()) -> np.ndarray:
    return hopping_matrix(p) + np.diag(diagonal_part(p))


def reduced_pauli(p: TritonParams) -> PauliSum:
    """Closed Pauli form, exact when ``V = -4U``."""
    n = N_QUBITS
    terms = [(8 * p.t + p.U / 2, PauliString(n))]
    terms += [(-2 * p.t, PauliString.single(n, k, "X")) for k in range(n)]
    for pair in ((0, 3), (1, 2)):
        terms.append((-p.U / 4, PauliString.from_ops(n, {q: "Z" for q in pair})))
    for tri in itertools.combinations(range(n), 3):
        terms.append((-p.U / 4, PauliString.from_ops(n, {q: "Z" for q in tri})))
    return PauliSum(n, terms)


@lru_cache(maxsize=32)
def _eigh(p: TritonParams) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(build_hamiltonian(p))


def exact_ground_state(p: TritonParams = TritonParams()) -> tuple[float, StateVector]:
    w, v = _eigh(p)
    psi = v[:, 0].astype(complex)
    k = np.argmax(np.abs(psi))
    psi *= abs(psi[k]) / psi[k]
    return float(w[0]), StateVector(N_QUBITS, psi)


def energy(state: StateVector, p: TritonParams = TritonParams()) -> float:
    a = state.amplitudes
    return float(np.vdot(a, build_hamiltonian(p) @ a).real)


def trial_circuit(theta: float, phi: float, variant: str = "plain") -> Circuit:
    """Two-angle ansatz: Ry layer, CZ pair, Ry layer, CZ pair."""
    if variant not in ("plain", "symmetric"):
        raise ValueError(f"unknown trial variant {variant!r}")
    c = Circuit(N_QUBITS)
    for q in range(4):
        c.add("RY", q, angle=theta)
    c.add("CZ", 0, 3).add("CZ", 1, 2)
    if variant == "plain":
        c.add("RY", 2, angle=phi).add("RY", 3, angle=phi)
    else:
        for q in range(4):
            c.add("RY", q, angle=phi / 2)
    c.add("CZ", 0, 3).add("CZ", 1, 2)
    return c


def trial_state(theta: float, phi: float, variant: str = "plain") -> StateVector:
    return run_pure(trial_circuit(theta, phi, variant))


@lru_cache(maxsize=16)
def optimize_trial(p: TritonParams = TritonParams(), variant: str = "plain", grid: int = 64) -> TrialResult:
    """Coarse grid over [0, 2pi)^2, then a Nelder-Mead polish from the best cell."""
    H = build_hamiltonian(p)

    def f(x):
        a = trial_state(x[0], x[1], variant).amplitudes
        return float(np.vdot(a, H @ a).real)

    axis = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    best = min(((f((a, b)), a, b) for a in axis for b in axis), key=lambda r: r[0])
    res = minimize(f, best[1:], method="Nelder-Mead", options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 4000})
    theta, phi = (float(np.mod(v + np.pi, 2 * np.pi) - np.pi) for v in res.x)
    return TrialResult(theta, phi, float(res.fun), variant)


def _reduced_step(tau: float, p: TritonParams) -> Circuit:
    # exp(-i tau (-U/4) Z..Z) = R_Z..Z(-tau U / 2); exp(2 i t tau X) = Rx(-4 t tau)
    a = -tau * p.U / 2
    c = Circuit(N_QUBITS, global_phase=-tau * (8 * p.t + p.U / 2))
    c.add("CNOT", 0, 2).add("CNOT", 0, 3).add("CNOT", 1, 2)
    c.add("RZ", 2, angle=a)  # Z0 Z1 Z2
    c.add("RZ", 3, angle=a)  # Z0 Z3
    c.add("CNOT", 0, 2).add("CNOT", 1, 3)
    c.add("RZ", 2, angle=a)  # Z1 Z2
    c.add("RZ", 3, angle=a)  # Z0 Z1 Z3
    c.add("CNOT", 2, 3)
    c.add("RZ", 3, angle=a)  # Z0 Z2 Z3
    c.add("CNOT", 0, 3).add("CNOT", 1, 3)
    c.add("RZ", 3, angle=a)  # Z1 Z2 Z3
    c.add("CNOT", 2, 3).add("CNOT", 1, 2)
    for q in range(4):
        c.add("RX", q, angle=-4 * p.t * tau)
    return c


def trotter_step_circuit(tau: float, p: TritonParams = TritonParams()) -> Circuit:
    """First-order step ``exp(-i tau K) exp(-i tau V)``, potential first.

    The reduced couplings give the 10-CNOT form; otherwise the diagonal is
    synthesised exactly with 14 CNOT and 15 Rz.
    """
    if p.reduced:
        return _reduced_step(tau, p)
    c = diagonal_circuit(tau * diagonal_part(p))
    for q in range(4):
        c.add("RX", q, angle=-4 * p.t * tau)
    return c


def trotter_step_matrix(tau: float, p: TritonParams = TritonParams()) -> np.ndarray:
    from scipy.linalg import expm

    return expm(-1j * tau * hopping_matrix(p)) @ np.diag(np.exp(-1j * tau * diagonal_part(p)))


def evolve(state: StateVector, time: float, p: TritonParams = TritonParams(), mode: str = "exact", steps: int = 1) -> StateVector:
    if time < 0:
        raise ValueError("time must be nonnegative")
    if mode == "exact":
        w, v = _eigh(p)
        a = v @ (np.exp(-1j * time * w) * (v.conj().T @ state.amplitudes))
        return StateVector(N_QUBITS, a)
    if mode != "trotter":
        raise ValueError(f"unknown evolution mode {mode!r}")
    if steps < 1:
        raise ValueError("need at least one Trotter step")
    step = trotter_step_circuit(time / steps, p)
    for _ in range(steps):
        state = run_pure(step, state)
    return state


def _weight(probs: np.ndarray, labels) -> float:
    return float(sum(probs[int(b, 2)] for b in labels))


def contacts(state: StateVector | DensityMatrix | np.ndarray, p: TritonParams | None = None) -> TritonObservables:
    """Contact probabilities from a state, density matrix or probability vector."""
    if isinstance(state, (StateVector, DensityMatrix)):
        probs = state.probabilities()
    else:
        probs = np.asarray(state, dtype=float)
    if probs.size != 16:
        raise ValueError("contacts need a 4-qubit state")
    e = energy(state, p) if p is not None and isinstance(state, StateVector) else None
    return TritonObservables(_weight(probs, C3_STATES), _weight(probs, C2_DYN_STATES), _weight(probs, C2_SA_STATES), e)
