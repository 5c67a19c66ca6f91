from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nucresp.circuits import (
    Circuit,
    Gate,
    controlled,
    controlled_rz,
    diagonal_circuit,
    equal_up_to_phase,
    u1_cell_circuit,
    xxyy_string_gadget,
    z_product_gadget,
    z_string_rotation,
)
from nucresp.lattice_model import C0_DEFAULT, D0_DEFAULT, onsite_polynomial
from nucresp.pauli import PauliString

GRID = np.linspace(-np.pi, np.pi, 21)


def pauli(n: int, ops: dict[int, str]) -> np.ndarray:
    return PauliString.from_ops(n, ops).to_matrix()


def zz(n: int, qubits) -> np.ndarray:
    return pauli(n, {q: "Z" for q in qubits})


def test_one_body_is_single_rz():
    c = z_product_gadget([0], 0.7)
    assert [(g.kind, g.angle) for g in c.gates] == [("RZ", 1.4)]


@pytest.mark.parametrize("qubits", [(0,), (0, 1), (1, 0), (0, 2), (0, 1, 2), (2, 0, 1), (0, 1, 3)])
def test_z_gadgets_match_exponential(qubits):
    n = max(qubits) + 1
    for theta in GRID:
        target = expm(-1j * theta * zz(n, qubits))
        assert equal_up_to_phase(z_product_gadget(qubits, theta, n).unitary(), target, 1e-12)


def test_gadget_counts():
    for k in (1, 2, 3):
        cnt = z_product_gadget(range(k), 0.3).counts()
        assert cnt["CNOT"] == 2 * (k - 1) and cnt["RZ"] == 1
    with pytest.raises(ValueError):
        z_product_gadget([0, 0], 0.1)
    with pytest.raises(ValueError):
        z_product_gadget([0, 1, 2, 3], 0.1)


@pytest.mark.parametrize("length", [4, 5, 6])
def test_long_z_strings(length):
    for theta in GRID:
        assert equal_up_to_phase(z_string_rotation(range(length), theta).unitary(), expm(-1j * theta * zz(length, range(length))))


def controlled_rz_dense(theta: float) -> np.ndarray:
    rz = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    return np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), rz]])


def test_controlled_rz():
    assert np.allclose(controlled_rz(0, 1, 0.0).unitary(), np.eye(4))
    for theta in list(GRID) + [np.pi]:
        # exact, not just up to phase
        assert np.allclose(controlled_rz(0, 1, theta).unitary(), controlled_rz_dense(theta), atol=1e-12)
    assert controlled_rz(0, 1, 1.0).counts() == {"CNOT": 2, "RZ": 2}
    with pytest.raises(ValueError):
        controlled_rz(1, 1, 0.2)


def xxyy_dense(n: int, p: int, q: int, theta: float) -> np.ndarray:
    tail = {k: "Z" for k in range(p + 1, q)}
    gen = pauli(n, {p: "X", q: "X", **tail}) + pauli(n, {p: "Y", q: "Y", **tail})
    return expm(-1j * theta * gen / 2)


@pytest.mark.parametrize("p,q", [(0, 1), (1, 2), (0, 2), (0, 3), (1, 4), (0, 5)])
def test_xxyy_gadget(p, q):
    n = q + 1
    for theta in GRID:
        assert equal_up_to_phase(xxyy_string_gadget(p, q, theta, n).unitary(), xxyy_dense(n, p, q, theta))


def test_xxyy_examples_and_counts():
    assert equal_up_to_phase(xxyy_string_gadget(0, 1, 0.0).unitary(), np.eye(4))
    assert np.allclose(xxyy_string_gadget(0, 1, 0.3).unitary(), xxyy_dense(2, 0, 1, 0.3), atol=1e-12)
    for p, q in ((0, 1), (0, 4), (2, 7)):
        cnt = xxyy_string_gadget(p, q, 0.2).counts()
        assert cnt["RZ"] == 2 and cnt["CNOT"] == 4 * (q - p) and cnt["H"] == 8
        assert cnt["S"] + cnt["Sdag"] == 4
    with pytest.raises(ValueError):
        xxyy_string_gadget(2, 2, 0.1)


def cell_dense(beta, gamma, eta, delta):
    gen = np.zeros((16, 16))
    for order, g in ((1, beta), (2, gamma), (3, eta)):
        for sub in itertools.combinations(range(4), order):
            gen = gen + g * zz(4, sub).real
    return expm(-1j * delta * gen)


def test_u1_cell():
    assert equal_up_to_phase(u1_cell_circuit(0, 0, 0).unitary(), np.eye(16))
    poly = onsite_polynomial(4, C0_DEFAULT, D0_DEFAULT)
    beta, gamma, eta = (poly[frozenset(range(k))] for k in (1, 2, 3))
    c = u1_cell_circuit(beta, gamma, eta, 0.01)
    assert equal_up_to_phase(c.unitary(), cell_dense(beta, gamma, eta, 0.01))
    assert c.counts() == {"CNOT": 28, "RZ": 14}
    rng = np.random.default_rng(0)
    for _ in range(20):
        b, g, e, d = rng.normal(size=4)
        assert equal_up_to_phase(u1_cell_circuit(b, g, e, d).unitary(), cell_dense(b, g, e, d))


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_diagonal_synthesis_exact(m):
    rng = np.random.default_rng(m)
    for _ in range(20):
        phases = rng.uniform(-4, 4, 2**m)
        c = diagonal_circuit(phases)
        assert np.allclose(c.unitary(), np.diag(np.exp(-1j * phases)), atol=1e-10)
        assert c.counts()["RZ"] == 2**m - 1 and c.counts().get("CNOT", 0) == 2**m - 2


def controlled_dense(u: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    return np.block([[np.eye(d), np.zeros((d, d))], [np.zeros((d, d)), u]])


def _relabel(circ: Circuit, shift: int, n: int) -> Circuit:
    out = Circuit(n, global_phase=circ.global_phase)
    out.gates = [Gate(g.kind, tuple(q + shift for q in g.qubits), g.angle) for g in circ.gates]
    return out


@pytest.mark.parametrize("build", [
    lambda th: z_string_rotation([0, 1, 2], th),
    lambda th: xxyy_string_gadget(0, 2, th),
    lambda th: diagonal_circuit(np.array([0.0, th, 2 * th, -th, 0.5, th / 3, 1.0, -2.0])),
    lambda th: Circuit(2).add("RX", 0, angle=th).add("RY", 1, angle=-th).add("CNOT", 0, 1).add("RZ", 1, angle=th).add("CNOT", 0, 1),
])
def test_controlled_reinstates_phase(build):
    for theta in GRID:
        circ = build(theta)
        n = circ.n
        # control on qubit 0 (most significant), circuit shifted up by one
        shifted = _relabel(circ, 1, n + 1)
        cc = controlled(shifted, 0)
        assert np.allclose(cc.unitary(), controlled_dense(circ.unitary()), atol=1e-10)


def test_controlled_rejects_non_rotation_circuits():
    with pytest.raises(ValueError):
        controlled(Circuit(2).add("X", 1), 0)
    with pytest.raises(ValueError):
        controlled(z_string_rotation([0, 1], 0.3), 1)


def test_gate_validation():
    for bad in (("FOO", (0,), None), ("RX", (0,), None), ("H", (0,), 0.1), ("CNOT", (1, 1), None), ("CNOT", (0,), None)):
        with pytest.raises(ValueError):
            Gate(*bad)
    with pytest.raises(ValueError):
        Circuit(2).add("H", 2)


one_qubit = st.builds(lambda k, q, a: (k, (q,), a if k.startswith("R") else None),
                      st.sampled_from(["RX", "RY", "RZ", "X", "H", "S", "Sdag"]), st.integers(0, 3), st.floats(-7, 7))
two_qubit = st.builds(lambda k, qs: (k, tuple(qs), None), st.sampled_from(["CNOT", "CZ", "SWAP"]),
                      st.lists(st.integers(0, 3), min_size=2, max_size=2, unique=True))
circuits = st.lists(st.one_of(one_qubit, two_qubit), max_size=25).map(
    lambda gs: Circuit(4, [Gate(*g) for g in gs]))


@given(circuits)
def test_inverse_roundtrip(circ):
    assert np.allclose((circ + circ.inverse()).unitary(), np.eye(16), atol=1e-12)


@given(circuits)
def test_counts_and_json(circ):
    back = Circuit.from_json(circ.to_json())
    assert back.gates == circ.gates and back.n == circ.n
    cost = circ.gate_cost()
    cnt = circ.counts()
    assert cost.cnot == cnt["CNOT"] + cnt["CZ"] + 3 * cnt["SWAP"]
    assert cost.rz == cnt["RX"] + cnt["RY"] + cnt["RZ"]


def test_json_schema(validate):
    validate("circuit", xxyy_string_gadget(0, 3, 0.4).to_json())


def test_equal_up_to_phase():
    u = expm(-1j * 0.3 * zz(2, [0, 1]))
    assert equal_up_to_phase(np.exp(0.7j) * u, u)
    assert not equal_up_to_phase(2 * u, u)
    assert not equal_up_to_phase(u, np.eye(2))
