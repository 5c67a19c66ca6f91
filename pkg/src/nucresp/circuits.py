"""Gate-level circuits, Pauli-rotation gadgets and dense unitaries.

Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.  Qubit 0 is the most
significant tensor factor, matching :mod:`nucresp.pauli`.  A circuit carries
a global phase so that ``unitary()`` is exact, not only up to phase.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gate_costs import GateCost

ROTATIONS = frozenset({"RX", "RY", "RZ"})
ONE_QUBIT = frozenset({"RX", "RY", "RZ", "X", "H", "S", "Sdag"})
TWO_QUBIT = frozenset({"CNOT", "CZ", "SWAP"})
KINDS = ONE_QUBIT | TWO_QUBIT

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": _H,
    "S": np.diag([1, 1j]),
    "Sdag": np.diag([1, -1j]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
_INVERSE = {"S": "Sdag", "Sdag": "S"}


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    raise ValueError(f"{kind} is not a rotation")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity:
            raise ValueError(f"repeated qubit in {self.kind}{self.qubits}")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ValueError(f"{self.kind} angle mismatch")

    def matrix(self) -> np.ndarray:
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.angle)
        return _FIXED[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.qubits, -self.angle)
        return Gate(_INVERSE.get(self.kind, self.kind), self.qubits)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.angle is not None:
            d["angle"] = self.angle
        return d


def apply_gate(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to a batch of states shaped ``(2**n, k)``."""
    k = psi.shape[1]
    t = psi.reshape((2,) * n + (k,))
    m = gate.matrix()
    qs = gate.qubits
    if len(qs) == 1:
        t = np.tensordot(m, t, axes=([1], [qs[0]]))
        t = np.moveaxis(t, 0, qs[0])
    else:
        t = np.tensordot(m.reshape(2, 2, 2, 2), t, axes=([2, 3], [qs[0], qs[1]]))
        t = np.moveaxis(t, (0, 1), qs)
    return t.reshape(2**n, k)


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def add(self, kind: str, *qubits: int, angle: float | None = None) -> "Circuit":
        g = Gate(kind, qubits, angle)
        if max(g.qubits) >= self.n:
            raise ValueError(f"qubit {max(g.qubits)} out of range for {self.n} qubits")
        self.gates.append(g)
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n > self.n:
            raise ValueError("cannot append a wider circuit")
        self.gates.extend(other.gates)
        self.global_phase += other.global_phase
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        out = Circuit(max(self.n, other.n), list(self.gates), self.global_phase)
        return out.extend(other)

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n, [g.inverse() for g in reversed(self.gates)], -self.global_phase)

    def counts(self) -> Counter:
        return Counter(g.kind for g in self.gates)

    def gate_cost(self) -> GateCost:
        c = self.counts()
        return GateCost(
            cnot=c["CNOT"] + c["CZ"] + 3 * c["SWAP"],
            rz=sum(c[k] for k in ROTATIONS),
            clifford1=c["X"] + c["H"] + c["S"] + c["Sdag"],
        )

    def depth(self) -> int:
        level = [0] * self.n
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        vec = psi.ndim == 1
        out = psi.reshape(2**self.n, -1).astype(complex)
        for g in self.gates:
            out = apply_gate(out, g, self.n)
        out = out * np.exp(1j * self.global_phase)
        return out[:, 0] if vec else out

    def unitary(self, limit: int = 10) -> np.ndarray:
        if self.n > limit:
            raise ValueError(f"{self.n} qubits exceeds the dense-unitary limit of {limit}")
        return self.apply(np.eye(2**self.n, dtype=complex))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "gates": [g.to_dict() for g in self.gates]})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        d = json.loads(text)
        gates = [Gate(g["kind"], tuple(g["qubits"]), g.get("angle")) for g in d["gates"]]
        return cls(int(d["n"]), gates)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    """True when ``u = e^{i phi} v`` for some phase."""
    if u.shape != v.shape:
        return False
    idx = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[idx]) < atol:
        return np.allclose(u, v, atol=atol)
    ph = u[idx] / v[idx]
    if abs(abs(ph) - 1) > atol * 10:
        return False
    return np.allclose(u, ph * v, atol=atol)


def _width(qubits: Iterable[int], n: int | None) -> int:
    top = max(qubits) + 1
    if n is not None and n < top:
        raise ValueError(f"qubit {top - 1} out of range for {n} qubits")
    return n if n is not None else top


def z_product_gadget(qubits: Sequence[int], angle: float, n: int | None = None) -> Circuit:
    """``exp(-i angle Z...Z)`` on 1 to 3 qubits via a CNOT ladder."""
    qubits = list(qubits)
    if not 1 <= len(qubits) <= 3:
        raise ValueError("gadgets cover one- to three-body products")
    return z_string_rotation(qubits, angle, n)


def z_string_rotation(qubits: Sequence[int], angle: float, n: int | None = None) -> Circuit:
    """``exp(-i angle Z...Z)`` on any number of qubits."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubits in {qubits}")
    c = Circuit(_width(qubits, n))
    ladder = [("CNOT", a, b) for a, b in zip(qubits, qubits[1:])]
    for kind, a, b in ladder:
        c.add(kind, a, b)
    c.add("RZ", qubits[-1], angle=2 * angle)
    for kind, a, b in reversed(ladder):
        c.add(kind, a, b)
    return c


def controlled_rz(control: int, target: int, angle: float, n: int | None = None) -> Circuit:
    """Exact ``|0><0| x I + |1><1| x Rz(angle)`` with 2 CNOT and 2 Rz."""
    if control == target:
        raise ValueError("control and target coincide")
    c = Circuit(_width((control, target), n))
    c.add("RZ", target, angle=angle / 2)
    c.add("CNOT", control, target)
    c.add("RZ", target, angle=-angle / 2)
    c.add("CNOT", control, target)
    return c


def xxyy_string_gadget(p: int, q: int, angle: float, n: int | None = None) -> Circuit:
    """``exp(-i angle (X Z..Z X + Y Z..Z Y) / 2)`` on orbitals ``p < q``."""
    if p >= q:
        raise ValueError(f"need p < q, got p={p}, q={q}")
    c = Circuit(_width((p, q), n))
    chain = list(range(p, q + 1))
    for into, back in ((("H",), ("H",)), (("Sdag", "H"), ("H", "S"))):
        for k in into:
            c.add(k, p)
            c.add(k, q)
        c.extend(z_string_rotation(chain, angle / 2, c.n))
        for k in back:
            c.add(k, p)
            c.add(k, q)
    return c


def u1_cell_circuit(beta: float, gamma: float, eta: float, delta: float = 1.0,
                    qubits: Sequence[int] = (0, 1, 2, 3), n: int | None = None) -> Circuit:
    """Naive ``exp(-i delta (beta sum Z + gamma sum ZZ + eta sum ZZZ))`` on one 4-species site."""
    from itertools import combinations

    qubits = list(qubits)
    if len(qubits) != 4:
        raise ValueError("a cell has four species")
    c = Circuit(_width(qubits, n))
    for order, g in ((1, beta), (2, gamma), (3, eta)):
        for sub in combinations(qubits, order):
            c.extend(z_product_gadget(sub, delta * g, c.n))
    return c


def walsh_coefficients(phases: np.ndarray) -> np.ndarray:
    """``a[S]`` with ``phases[x] = sum_S a[S] (-1)^{popcount(S & x)}``.

    Bit ``j`` of a basis index addresses qubit ``n-1-j``.
    """
    a = np.asarray(phases, dtype=float).copy()
    h = 1
    while h < len(a):
        for i in range(0, len(a), 2 * h):
            x, y = a[i:i + h].copy(), a[i + h:i + 2 * h].copy()
            a[i:i + h], a[i + h:i + 2 * h] = x + y, x - y
        h *= 2
    return a / len(a)


def diagonal_circuit(phases: Sequence[float], qubits: Sequence[int] | None = None, n: int | None = None) -> Circuit:
    """Exact ``diag(exp(-i phases))`` by Gray-code parity walks.

    Uses ``2**m - 2`` CNOT and ``2**m - 1`` Rz for ``m`` qubits.
    """
    phases = np.asarray(phases, dtype=float)
    m = int(np.log2(len(phases)))
    if 2**m != len(phases):
        raise ValueError("phase table length must be a power of two")
    qubits = list(range(m)) if qubits is None else list(qubits)
    if len(qubits) != m:
        raise ValueError("one qubit per address bit")
    a = walsh_coefficients(phases)
    c = Circuit(_width(qubits, n) if m else (n or 1))
    # Z_S has coefficient a[S]; S is a bitmask where bit j <-> qubits[m-1-j]
    c.global_phase = -a[0]
    for top in range(m - 1, -1, -1):
        target = qubits[m - 1 - top]
        lower = top  # bits 0..top-1 are the controls of this stage
        prev = 0
        for k in range(2**lower):
            g = k ^ (k >> 1)
            if k:
                changed = (g ^ prev).bit_length() - 1
                c.add("CNOT", qubits[m - 1 - changed], target)
            coeff = a[(1 << top) | g]
            c.add("RZ", target, angle=2 * coeff)
            prev = g
        if lower:
            c.add("CNOT", qubits[m - 1 - (prev.bit_length() - 1)], target)
    return c


def controlled(circ: Circuit, control: int) -> Circuit:
    """Controlled version of a rotation-parametrised circuit.

    Valid when the circuit reduces to the identity with all angles set to zero
    (true for every gadget here): each rotation becomes a controlled rotation
    and the global phase is reinstated as an Rz on the control.
    """
    skeleton = Circuit(circ.n, [g for g in circ.gates if g.kind not in ROTATIONS])
    if circ.n <= 10 and not np.allclose(skeleton.unitary(), np.eye(2**circ.n), atol=1e-12):
        raise ValueError("circuit is not a conjugated rotation product")
    if control < circ.n and any(control in g.qubits for g in circ.gates):
        raise ValueError("control qubit overlaps the circuit")
    out = Circuit(max(circ.n, control + 1))
    for g in circ.gates:
        if g.kind not in ROTATIONS:
            out.gates.append(g)
            continue
        t = g.qubits[0]
        pre, post = {"RZ": ((), ()), "RX": (("H",), ("H",)), "RY": (("Sdag", "H"), ("H", "S"))}[g.kind]
        for k in pre:
            out.add(k, t)
        out.extend(controlled_rz(control, t, g.angle, out.n))
        for k in post:
            out.add(k, t)
    if circ.global_phase:
        out.add("RZ", control, angle=circ.global_phase)
        out.global_phase = circ.global_phase / 2
    return out
