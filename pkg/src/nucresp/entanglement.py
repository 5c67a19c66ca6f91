"""Reduced density matrices, entropies and two-qubit concurrence.

Entropies are in nats; entanglement of formation is in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .simulator import DensityMatrix, StateVector
from .triton import TritonParams, evolve, optimize_trial, trial_state

# eigenvalues below this fraction of the largest are round-off
_RANK_TOL = 1e-13
_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def partial_trace(state: StateVector | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (returned in the order given)."""
    n = state.n
    keep = list(keep)
    if not keep or len(keep) >= n or len(set(keep)) != len(keep) or not all(0 <= q < n for q in keep):
        raise ValueError(f"keep={keep} is not a nonempty proper subset of {n} qubits")
    rest = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    if isinstance(state, StateVector):
        psi = np.transpose(state.amplitudes.reshape((2,) * n), keep + rest).reshape(dk, -1)
        return DensityMatrix(len(keep), psi @ psi.conj().T)
    t = state.rho.reshape((2,) * (2 * n))
    t = np.transpose(t, keep + rest + [n + q for q in keep] + [n + q for q in rest])
    dr = 2 ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return DensityMatrix(len(keep), np.einsum("ajbj->ab", t))


def entropy(rho: DensityMatrix | np.ndarray, tol: float = 1e-9) -> float:
    """Von Neumann entropy in nats."""
    m = rho.rho if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = np.linalg.eigvalsh(m)
    if w.min() < -tol:
        raise ValueError(f"density matrix has eigenvalue {w.min():.3g}")
    w = w[w > 1e-15]
    return max(0.0, float(-(w * np.log(w)).sum()))


def concurrence(rho: DensityMatrix | np.ndarray, tol: float = 1e-9) -> float:
    """Wootters concurrence from the ensemble of subnormalised eigenvectors.

    With ``rho = X X^dagger``, the lambdas are the singular values of
    ``X^T (Y x Y) X``; this equals the square-root spectrum of
    ``rho (Y x Y) rho* (Y x Y)`` but avoids square roots of round-off
    eigenvalues, so pure states come out exact.
    """
    m = rho.rho if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit density matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    keep = w > _RANK_TOL * max(w.max(), 1e-300)
    X = v[:, keep] * np.sqrt(w[keep])
    lam = np.linalg.svd(X.T @ _YY @ X, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1:].sum()))


def _h2(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def entanglement_of_formation(c: float) -> float:
    """Bits of entanglement for concurrence ``c``."""
    if not -1e-12 <= c <= 1 + 1e-12:
        raise ValueError(f"concurrence {c} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    return _h2((1 + np.sqrt(1 - c * c)) / 2)


@dataclass(frozen=True)
class EntanglementPoint:
    time: float
    S_0: float
    S_01: float
    S_03: float
    C_01: float
    C_02: float
    C_03: float
    EF_03: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def diagnostics(state: StateVector, time: float = 0.0) -> EntanglementPoint:
    c03 = concurrence(partial_trace(state, [0, 3]))
    return EntanglementPoint(
        time=time,
        S_0=entropy(partial_trace(state, [0])),
        S_01=entropy(partial_trace(state, [0, 1])),
        S_03=entropy(partial_trace(state, [0, 3])),
        C_01=concurrence(partial_trace(state, [0, 1])),
        C_02=concurrence(partial_trace(state, [0, 2])),
        C_03=c03,
        EF_03=entanglement_of_formation(c03),
    )


def trajectory(
    times: Sequence[float],
    params: TritonParams = TritonParams(),
    mode: str = "trotter",
    steps: int = 1,
    variant: str = "plain",
) -> list[EntanglementPoint]:
    """Pairwise entanglement along the evolution of the optimized trial state.

    The default follows the single-step circuit, the evolution actually run on
    hardware; ``mode="exact"`` uses the exact propagator instead.
    """
    opt = optimize_trial(params, variant)
    psi0 = trial_state(opt.theta, opt.phi, variant)
    return [diagnostics(evolve(psi0, float(t), params, mode, steps), float(t)) for t in times]
