"""Resource model for phase estimation on the controlled qubiterate.

Costs follow the linear-combination-of-unitaries construction with a binary
ancilla register of N_A qubits indexing Gamma = 38 M Pauli terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gate_costs import GateCost
from .lattice_model import LatticeSpec, Split, delta_h, norms, onsite_polynomial
from .trotter_bounds import ancilla_count

GAMMA_K_PER_SITE = 24
GAMMA_V_PER_SITE = 14
MAX_ANCILLA = 62


@dataclass(frozen=True)
class IterateCost:
    prepare_cnot: int
    prepare_u2: int
    reflection_cnot: int
    reflection_t: int
    select_cnot: int
    select_t: int
    ancillas: int

    @property
    def cnot(self) -> int:
        return self.prepare_cnot + self.reflection_cnot + self.select_cnot

    @property
    def one_qubit_unitaries(self) -> int:
        return self.prepare_u2

    @property
    def t_gates(self) -> int:
        return self.reflection_t + self.select_t

    def gate_cost(self) -> GateCost:
        # three z-rotations per generic one-qubit unitary, T gates counted as rotations
        return GateCost(cnot=self.cnot, rz=3 * self.one_qubit_unitaries, t_gate=self.t_gates)


@dataclass(frozen=True)
class QubitizationPlan:
    M: int
    Gamma_K: int
    Gamma_V: int
    Gamma: int
    N_A: int
    lam: float
    W_q: int
    iterate: IterateCost
    per_iterate: GateCost
    total: GateCost

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "Gamma_K": self.Gamma_K,
            "Gamma_V": self.Gamma_V,
            "Gamma": self.Gamma,
            "N_A": self.N_A,
            "lambda": self.lam,
            "W_q": self.W_q,
            "per_iterate": self.per_iterate.to_dict(),
            "total": self.total.to_dict(),
        }


def register_size(gamma: int) -> int:
    """Smallest N with 2**N >= gamma."""
    if gamma < 1:
        raise ValueError("need at least one term")
    n = (gamma - 1).bit_length()
    if n > MAX_ANCILLA:
        raise OverflowError(f"{gamma} terms need a {n}-qubit index register")
    return n


def iterate_cost(N_A: int, prepares: int = 1) -> IterateCost:
    """One controlled qubiterate; ``prepares=2`` uses prepare and its inverse."""
    half = 2 ** (N_A - 1)
    return IterateCost(
        prepare_cnot=prepares * (2**N_A - 2 * N_A - 2),
        prepare_u2=prepares * (2**N_A - N_A - 2),
        reflection_cnot=6 * N_A - 6,
        reflection_t=8 * N_A - 9,
        select_cnot=15 * half + 6 * N_A - 26,
        select_t=15 * half + 6 * N_A - 28,
        ancillas=2 * N_A - 1,
    )


def rescaling(spec: LatticeSpec, mode: str = "closed") -> float:
    """Sum of term weights lambda.

    ``closed`` uses the coefficient-norm bounds K_abs + V_abs.  ``pauli`` sums
    the actual Pauli coefficients per site and adds one for the identity shift.
    """
    nb = norms(spec)
    if mode == "closed":
        return nb.K_abs + nb.V_abs
    if mode == "pauli":
        poly = onsite_polynomial(spec.N_f, spec.C0, spec.D0)
        per_site = sum(abs(c) for k, c in poly.items() if k)
        return nb.K_abs + spec.M * per_site + 1.0
    raise ValueError(f"unknown rescaling mode {mode!r}")


def plan(spec: LatticeSpec, delta_omega: float = 10.0, prepares: int = 1, lambda_mode: str = "closed") -> QubitizationPlan:
    gk, gv = GAMMA_K_PER_SITE * spec.M, GAMMA_V_PER_SITE * spec.M
    n_a = register_size(gk + gv)
    lam = rescaling(spec, lambda_mode)
    w_q = ancilla_count(lam, delta_omega)
    it = iterate_cost(n_a, prepares)
    per = it.gate_cost()
    return QubitizationPlan(
        M=spec.M,
        Gamma_K=gk,
        Gamma_V=gv,
        Gamma=gk + gv,
        N_A=n_a,
        lam=lam,
        W_q=w_q,
        iterate=it,
        per_iterate=per,
        total=per * (2**w_q - 1),
    )


def speedup_ratio(
    spec: LatticeSpec,
    delta_omega: float = 10.0,
    split: Split | str = Split.BETA_KV,
    exact: bool = False,
    lambda_mode: str = "closed",
) -> float:
    """How much cheaper one qubiterate must be than one base-time evolution.

    The default compares register sizes, 2**(W_q - W).  With ``exact`` the
    application counts (2**W_q - 1) / (2**W - 1) are compared instead.
    """
    q = plan(spec, delta_omega, lambda_mode=lambda_mode)
    W = ancilla_count(delta_h(spec, split), delta_omega)
    if exact:
        return (2**q.W_q - 1) / (2**W - 1)
    return float(2 ** (q.W_q - W))


def log_gap(spec: LatticeSpec, split: Split | str = Split.BETA_KV) -> int:
    """``ceil(log2(lambda / deltaH))``: the expected W_q - W offset."""
    return math.ceil(math.log2(rescaling(spec) / delta_h(spec, split)))
