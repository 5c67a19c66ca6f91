"""Statevector and density-matrix simulation with CNOT depolarizing noise."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import TWO_QUBIT, Circuit, Gate, apply_gate
from .pauli import PauliSum, to_matrix
from .readout import ConfusionMatrix

DENSITY_QUBIT_LIMIT = 8
STATE_QUBIT_LIMIT = 12


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 2**self.n:
            raise ValueError(f"{self.amplitudes.size} amplitudes for {self.n} qubits")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1
        return cls(n, a)

    @classmethod
    def basis(cls, label: str) -> "StateVector":
        a = np.zeros(2 ** len(label), dtype=complex)
        a[int(label, 2)] = 1
        return cls(len(label), a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass
class DensityMatrix:
    n: int
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (2**self.n, 2**self.n):
            raise ValueError(f"density matrix shape {self.rho.shape} for {self.n} qubits")

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(n, np.eye(2**n) / 2**n)

    def probabilities(self) -> np.ndarray:
        return np.clip(self.rho.diagonal().real, 0.0, None)

    def validate(self, atol: float = 1e-10) -> None:
        if not np.allclose(self.rho, self.rho.conj().T, atol=atol):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(self.rho).real - 1) > atol:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.rho).min() < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")


@dataclass(frozen=True)
class NoiseModel:
    """Two-qubit depolarizing after every entangling gate, plus readout flips."""

    p2: float = 0.02
    readout: ConfusionMatrix | None = None
    k: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p2 <= 1.0:
            raise ValueError(f"p2={self.p2} outside [0, 1]")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"amplification k={self.k} must be an odd positive integer")

    @classmethod
    def default(cls, n: int = 4, k: int = 1) -> "NoiseModel":
        return cls(0.02, ConfusionMatrix.uniform(n, 0.03, 0.03), k)

    def amplified(self, k: int) -> "NoiseModel":
        return NoiseModel(self.p2, self.readout, k)


@dataclass
class MeasuredDistribution:
    n: int
    counts: np.ndarray
    shots: int = field(init=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if self.counts.size != 2**self.n or (self.counts < 0).any():
            raise ValueError("counts must be nonnegative with one bin per bitstring")
        self.shots = int(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.shots

    @property
    def stderr(self) -> np.ndarray:
        p = self.probabilities
        return np.sqrt(p * (1 - p) / self.shots)

    def to_dict(self) -> dict:
        labels = [format(i, f"0{self.n}b") for i in range(2**self.n)]
        return {"shots": self.shots, "counts": {b: int(c) for b, c in zip(labels, self.counts) if c}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MeasuredDistribution":
        labels = list(d["counts"])
        if not labels:
            raise ValueError("empty distribution")
        n = len(labels[0])
        counts = np.zeros(2**n, dtype=np.int64)
        for b, c in d["counts"].items():
            if len(b) != n or set(b) - {"0", "1"}:
                raise ValueError(f"bad bitstring {b!r}")
            counts[int(b, 2)] += int(c)
        out = cls(n, counts)
        if "shots" in d and int(d["shots"]) != out.shots:
            raise ValueError(f"shots={d['shots']} but counts sum to {out.shots}")
        return out

    @classmethod
    def from_json(cls, text: str) -> "MeasuredDistribution":
        return cls.from_dict(json.loads(text))


def run_pure(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    state = initial or StateVector.zero(circuit.n)
    if state.n != circuit.n:
        raise ValueError(f"{circuit.n}-qubit circuit on a {state.n}-qubit state")
    if state.n > STATE_QUBIT_LIMIT:
        raise ValueError(f"{state.n} qubits exceeds the statevector limit")
    return StateVector(state.n, circuit.apply(state.amplitudes))


def fold(circuit: Circuit, k: int) -> Circuit:
    """Replace each two-qubit gate G by G (G^-1 G)^((k-1)/2): k copies, k-fold noise."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"fold factor {k} must be odd")
    out = Circuit(circuit.n, global_phase=circuit.global_phase)
    for g in circuit.gates:
        out.gates.append(g)
        if g.kind in TWO_QUBIT:
            for _ in range((k - 1) // 2):
                out.gates.append(g.inverse())
                out.gates.append(g)
    return out


def _conjugate(rho: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    half = apply_gate(rho, gate, n)
    return apply_gate(half.conj().T, gate, n).conj().T


def depolarize_pair(rho: np.ndarray, a: int, b: int, p: float, n: int) -> np.ndarray:
    """``(1-p) rho + p (I/4 x Tr_ab rho)`` on qubits ``a`` and ``b``."""
    if p == 0:
        return rho
    rest = [q for q in range(n) if q not in (a, b)]
    order = [a, b, *rest, n + a, n + b, *(n + q for q in rest)]
    dr = 2 ** len(rest)
    t = np.transpose(rho.reshape((2,) * (2 * n)), order).reshape(4, dr, 4, dr)
    reduced = np.einsum("iris->rs", t)
    mixed = np.einsum("ij,rs->irjs", np.eye(4) / 4, reduced)
    back = np.argsort(order)
    mixed = np.transpose(mixed.reshape((2,) * (2 * n)), back).reshape(rho.shape)
    return (1 - p) * rho + p * mixed


def run_noisy(circuit: Circuit, noise: NoiseModel, initial: StateVector | DensityMatrix | None = None) -> DensityMatrix:
    n = circuit.n
    if n > DENSITY_QUBIT_LIMIT:
        raise ValueError(f"{n} qubits exceeds the density-matrix limit of {DENSITY_QUBIT_LIMIT}")
    if initial is None:
        rho = StateVector.zero(n).density().rho
    elif isinstance(initial, StateVector):
        rho = initial.density().rho
    else:
        rho = initial.rho.copy()
    for g in fold(circuit, noise.k).gates:
        rho = _conjugate(rho, g, n)
        if g.kind in TWO_QUBIT:
            rho = depolarize_pair(rho, *g.qubits, noise.p2, n)
    return DensityMatrix(n, rho)


def probabilities(state: StateVector | DensityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(state, (StateVector, DensityMatrix)):
        return state.probabilities()
    return np.asarray(state, dtype=float)


def sample(
    state: StateVector | DensityMatrix | np.ndarray,
    shots: int,
    readout: ConfusionMatrix | None = None,
    rng: np.random.Generator | int | None = None,
) -> MeasuredDistribution:
    if shots < 1:
        raise ValueError("need at least one shot")
    p = probabilities(state)
    n = int(np.log2(p.size))
    if readout is not None:
        p = readout.apply(p)
    p = np.clip(p, 0, None)
    p = p / p.sum()
    rng = np.random.default_rng(rng)
    return MeasuredDistribution(n, rng.multinomial(shots, p))


def expectation(state: StateVector | DensityMatrix, observable: PauliSum | np.ndarray) -> float:
    m = to_matrix(observable) if isinstance(observable, PauliSum) else np.asarray(observable)
    if not np.allclose(m, m.conj().T, atol=1e-12):
        raise ValueError("observable is not Hermitian")
    if isinstance(state, StateVector):
        v = np.vdot(state.amplitudes, m @ state.amplitudes)
    else:
        v = np.trace(state.rho @ m)
    if abs(v.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary part {v.imag}")
    return float(v.real)
