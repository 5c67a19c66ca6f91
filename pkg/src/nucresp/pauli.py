"""Bit-packed Pauli strings and real-coefficient Pauli sums.

Qubit ``q`` is bit ``q`` of the X/Z masks.  In string form the leftmost
character is qubit 0, and in dense matrices qubit 0 is the most significant
tensor factor.  A string with both bits set on a qubit denotes ``Y``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

MATRIX_QUBIT_LIMIT = 12

_PHASES = (1, 1j, -1, -1j)
_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of single-qubit Paulis."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 0 or self.x & ~full or self.z & ~full:
            raise ValueError(f"masks do not fit in {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        phase = 0
        s = label.strip()
        for prefix, p in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if s.startswith(prefix):
                phase, s = p, s[len(prefix):]
                break
        x = z = 0
        for q, ch in enumerate(s):
            try:
                bx, bz = _BITS[ch.upper()]
            except KeyError:
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(s), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        bx, bz = _BITS[kind]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str]) -> "PauliString":
        x = z = 0
        for q, kind in ops.items():
            bx, bz = _BITS[kind]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z)

    @property
    def label(self) -> str:
        return "".join(_CHARS[(self.x >> q) & 1, (self.z >> q) & 1] for q in range(self.n))

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n) if (m >> q) & 1]

    def is_diagonal(self) -> bool:
        return self.x == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        sign = ("", "i", "-", "-i")[self.phase]
        return sign + self.label

    def to_matrix(self, limit: int = MATRIX_QUBIT_LIMIT) -> np.ndarray:
        return to_matrix(self, limit)


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with the exact phase."""
    _check_sizes(a, b)
    x, z = a.x ^ b.x, a.z ^ b.z
    # sigma(x, z) = i^(x.z) X^x Z^z, and Z^z1 X^x2 = (-1)^(z1.x2) X^x2 Z^z1
    k = (
        a.phase
        + b.phase
        + _popcount(a.x & a.z)
        + _popcount(b.x & b.z)
        + 2 * _popcount(a.z & b.x)
        - _popcount(x & z)
    )
    return PauliString(a.n, x, z, k)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


def _index_mask(mask: int, n: int) -> int:
    # qubit q is bit (n-1-q) of a computational-basis index
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def _string_action(p: PauliString):
    """Return (column -> row permutation, per-column values) for ``p``."""
    n = p.n
    idx = np.arange(1 << n)
    xi, zi = _index_mask(p.x, n), _index_mask(p.z, n)
    parity = np.zeros(1 << n, dtype=np.int64)
    zz = idx & zi
    while np.any(zz):
        parity ^= zz & 1
        zz = zz >> 1
    vals = _PHASES[(p.phase + _popcount(p.x & p.z)) % 4] * (1 - 2 * parity)
    return idx ^ xi, vals.astype(complex)


class PauliSum:
    """Real linear combination of Pauli strings, keyed by ``(x, z)`` masks."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Iterable[tuple[complex, PauliString]] = (), tol: float = 1e-12):
        self.n = n
        acc: dict[tuple[int, int], complex] = {}
        for coeff, p in terms:
            if p.n != n:
                raise ValueError(f"term on {p.n} qubits in a {n}-qubit sum")
            acc[p.key] = acc.get(p.key, 0.0) + coeff * p.coefficient
        clean: dict[tuple[int, int], float] = {}
        for key, c in acc.items():
            if abs(c.imag) > tol * max(1.0, abs(c.real)):
                raise ValueError(f"non-Hermitian coefficient {c} on {PauliString(n, *key).label}")
            if c.real != 0.0:
                clean[key] = float(c.real)
        self._terms = clean

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        for (x, z), c in self._terms.items():
            yield c, PauliString(self.n, x, z)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.n, [*self, *other])

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, [(c * scalar, p) for c, p in self])

    __rmul__ = __mul__

    def coefficient(self, p: PauliString | str) -> float:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return self._terms.get(p.key, 0.0)

    @property
    def constant(self) -> float:
        return self._terms.get((0, 0), 0.0)

    def drop_identity(self) -> tuple["PauliSum", float]:
        rest = PauliSum(self.n, [(c, p) for c, p in self if p.key != (0, 0)])
        return rest, self.constant

    def terms(self) -> list[tuple[float, PauliString]]:
        return list(self)

    def to_matrix(self, limit: int = MATRIX_QUBIT_LIMIT) -> np.ndarray:
        return to_matrix(self, limit)

    def to_json(self) -> str:
        return json.dumps([{"coeff": c, "pauli": p.label} for c, p in self])

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        items = json.loads(text)
        if not items:
            return cls(0)
        strings = [(float(d["coeff"]), PauliString.from_label(d["pauli"])) for d in items]
        return cls(strings[0][1].n, strings)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}*{p.label}" for c, p in self) or "0"
        return f"PauliSum(n={self.n}: {body})"


def abs_norm(s: PauliSum) -> float:
    return float(sum(abs(c) for c, _ in s))


def to_matrix(op: PauliString | PauliSum, limit: int = MATRIX_QUBIT_LIMIT) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a string or sum."""
    if op.n > limit:
        raise ValueError(f"{op.n} qubits exceeds the dense-matrix limit of {limit}")
    dim = 1 << op.n
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    items = [(1.0, op)] if isinstance(op, PauliString) else list(op)
    for c, p in items:
        rows, vals = _string_action(p)
        out[rows, cols] += c * vals
    return out
