"""Per-qubit readout confusion model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _apply_per_qubit(mats: list[np.ndarray], probs: np.ndarray) -> np.ndarray:
    n = len(mats)
    t = np.asarray(probs, dtype=float).reshape((2,) * n + (-1,))
    for q, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [q])), 0, q)
    return t.reshape(2**n, -1)


@dataclass(frozen=True)
class ConfusionMatrix:
    """``p0[q]`` = P(read 1 | prepared 0), ``p1[q]`` = P(read 0 | prepared 1)."""

    p0: tuple[float, ...]
    p1: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p0", tuple(float(v) for v in self.p0))
        object.__setattr__(self, "p1", tuple(float(v) for v in self.p1))
        if len(self.p0) != len(self.p1):
            raise ValueError("p0 and p1 need one entry per qubit")
        for v in self.p0 + self.p1:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"flip probability {v} outside [0, 1]")

    @classmethod
    def uniform(cls, n: int, p0: float = 0.03, p1: float = 0.03) -> "ConfusionMatrix":
        return cls((p0,) * n, (p1,) * n)

    @property
    def n(self) -> int:
        return len(self.p0)

    def qubit_matrix(self, q: int) -> np.ndarray:
        # columns are the prepared state, rows the reported one
        a, b = self.p0[q], self.p1[q]
        return np.array([[1 - a, b], [a, 1 - b]])

    def full(self) -> np.ndarray:
        m = np.ones((1, 1))
        for q in range(self.n):
            m = np.kron(m, self.qubit_matrix(q))
        return m

    def is_invertible(self) -> bool:
        return all(abs(1 - a - b) > 1e-12 for a, b in zip(self.p0, self.p1))

    def apply(self, probs: np.ndarray) -> np.ndarray:
        p = np.asarray(probs, dtype=float)
        return _apply_per_qubit([self.qubit_matrix(q) for q in range(self.n)], p).reshape(p.shape)

    def inverse_matrices(self) -> list[np.ndarray]:
        if not self.is_invertible():
            raise np.linalg.LinAlgError("readout matrix is singular (p0 + p1 = 1)")
        return [np.linalg.inv(self.qubit_matrix(q)) for q in range(self.n)]

    def invert(self, probs: np.ndarray) -> np.ndarray:
        p = np.asarray(probs, dtype=float)
        return _apply_per_qubit(self.inverse_matrices(), p).reshape(p.shape)

    def inverse_full(self) -> np.ndarray:
        m = np.ones((1, 1))
        for inv in self.inverse_matrices():
            m = np.kron(m, inv)
        return m
