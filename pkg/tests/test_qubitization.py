from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nucresp.gate_costs import total_cost
from nucresp.lattice_model import LatticeSpec, build_kinetic, build_potential, delta_h
from nucresp.qubitization import iterate_cost, log_gap, plan, register_size, rescaling, speedup_ratio
from nucresp.trotter_bounds import ancilla_count, qpe_schedule

AR = LatticeSpec(A=40)


def test_register_boundaries():
    assert register_size(1) == 0
    assert register_size(2**10) == 10
    assert register_size(2**10 + 1) == 11
    assert register_size(38000) == 16
    with pytest.raises(OverflowError):
        register_size(2**70)
    with pytest.raises(ValueError):
        register_size(0)


@given(st.integers(2, 2**40))
def test_register_brackets_gamma(gamma):
    n = register_size(gamma)
    assert 2**n >= gamma > 2 ** (n - 1)


def test_argon_iterate():
    q = plan(AR, 10.0)
    assert (q.Gamma_K, q.Gamma_V, q.Gamma, q.N_A) == (24000, 14000, 38000, 16)
    assert q.per_iterate.cnot == 17 * 32768 + 160 - 34 == 557182
    assert q.iterate.ancillas == 31
    assert q.per_iterate.rz == 3 * (2**16 - 16 - 2)
    assert q.per_iterate.t_gate == 15 * 32768 + 14 * 16 - 37
    assert q.total == q.per_iterate * (2**q.W_q - 1)
    assert q.to_dict()["N_A"] == 16


@given(st.integers(2, 40), st.sampled_from([1, 2]))
def test_component_subtotals(N, prepares):
    it = iterate_cost(N, prepares)
    half = 2 ** (N - 1)
    assert it.prepare_cnot == prepares * (2**N - 2 * N - 2)
    assert it.reflection_cnot == 6 * N - 6
    assert it.select_cnot == 15 * half + 6 * N - 26
    if prepares == 1:
        assert it.cnot == 17 * half + 10 * N - 34
        assert it.one_qubit_unitaries == 2**N - N - 2
        assert it.t_gates == 15 * half + 14 * N - 37


def test_lambda_closed_form():
    assert rescaling(AR) == pytest.approx(1865982.45, abs=0.01)
    assert plan(AR, 10.0).W_q == math.ceil(math.log2(1865982.45 / 10)) == 18


@pytest.mark.parametrize("spec", [LatticeSpec(D=1, N_L=2, N_f=2, A=1), LatticeSpec(D=1, N_L=3, N_f=3, A=1)], ids=str)
@pytest.mark.parametrize("mode", ["closed", "pauli"])
def test_lambda_bounds_operator_norm(spec, mode):
    H = build_kinetic(spec).to_matrix() + build_potential(spec).to_matrix()
    assert rescaling(spec, mode) >= np.linalg.norm(H, 2)


def test_alpha_ratio_is_eight():
    for A in range(4, 101):
        assert speedup_ratio(AR.with_(A=A), 10.0, "alpha") == 8


def test_beta_ratio_at_argon():
    r = speedup_ratio(AR, 10.0, "beta-kv")
    assert 64 <= r <= 256 and r == 128
    assert speedup_ratio(AR, 10.0, "alpha", exact=True) == pytest.approx((2**18 - 1) / (2**15 - 1))


def test_finer_resolution_adds_three_or_four_ancillas():
    for A in (4, 40, 100):
        spec = AR.with_(A=A)
        assert plan(spec, 1.0).W_q - plan(spec, 10.0).W_q in (3, 4)


@pytest.mark.parametrize("split", ["alpha", "beta-kv"])
def test_qubitization_register_tracks_trotter(split):
    for A in range(4, 101, 4):
        spec = AR.with_(A=A)
        W = ancilla_count(delta_h(spec, split), 10.0)
        Wq = plan(spec, 10.0).W_q
        assert Wq >= W
        assert abs(Wq - (W + log_gap(spec, split))) <= 1


def test_trotter_beats_qubitization():
    for A in range(4, 101, 3):
        spec = AR.with_(A=A)
        trotter = total_cost(qpe_schedule(spec, "beta-kv", 2, "commutator", 10.0), spec.M, parallel=True)
        assert plan(spec, 10.0).total.cnot > trotter.cnot


def test_two_prepares_cost_more():
    assert plan(AR, 10.0, prepares=2).per_iterate.cnot > plan(AR, 10.0).per_iterate.cnot
    with pytest.raises(ValueError):
        rescaling(AR, "bogus")
