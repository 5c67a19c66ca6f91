"""Trotter step-count estimators and the phase-estimation time ladder.

Energies are in MeV and times in 1/MeV (hbar = 1).  ``eps`` is always the
tolerated energy error, i.e. the propagator error divided by the time.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .lattice_model import LatticeSpec, Split, delta_h, n_kinetic_terms, norms


class Bound(str, Enum):
    ANALYTIC = "analytic"
    COMMUTATOR = "commutator"


class AncillaRule(str, Enum):
    # 2^W >= deltaH / resolution: QPE over the range deltaH resolves steps of deltaH / 2^W
    RESOLUTION = "resolution"
    # 2^W >= deltaH / eps, eps = resolution / 2
    HALF_RESOLUTION = "half-resolution"


def _ceil(x: float) -> int:
    # guard against 4.000000000001 -> 5 from rounding in the closed forms
    return max(1, math.ceil(x - 1e-9 * max(1.0, abs(x))))


def lambda_of(spec: LatticeSpec, split: Split | str) -> float:
    nb = norms(spec)
    if Split(split) is Split.ALPHA:
        return abs(spec.t) * n_kinetic_terms(spec) + nb.V_phys
    return nb.K_phys + nb.V_phys


def commutator_norm(spec: LatticeSpec, split: Split | str) -> float:
    """Upper bound on the first-order commutator sum C."""
    nb = norms(spec)
    if Split(split) is Split.ALPHA:
        nk, t = n_kinetic_terms(spec), abs(spec.t)
        return 2 * nk * t * nb.V_phys + nk * (nk - 1) * t**2
    return 2 * nb.K_phys * nb.V_phys


def nested_commutator_norm(spec: LatticeSpec, split: Split | str) -> float:
    """Upper bound on the nested-commutator sum T of the second-order formulas."""
    nb = norms(spec)
    K, V = nb.K_phys, nb.V_phys
    split = Split(split)
    if split is Split.ALPHA:
        nk, t = n_kinetic_terms(spec), abs(spec.t)
        return (
            4 * nk**2 * t**2 * V
            + 4 * nk * t * V**2
            + 2 * nk * (nk - 1) * t**3
            + (2 / 3) * nk * (2 * nk**2 - 3 * nk + 1) * t**3
        )
    if split is Split.BETA_VK:
        return 2 * K * V * (2 * K + V)
    return 2 * K * V * (2 * V + K)


def r_linear_analytic(tau: float, Lambda: float, eps: float) -> int:
    return _ceil(max(tau * Lambda, math.e * tau * Lambda**2 / eps))


def r_higher_analytic(tau: float, Lambda: float, eps: float, k: int) -> int:
    """Steps for the order-2k symmetric formula from the norm-only bound."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rho = 2 * tau * 5 ** (k - 1) * Lambda
    return _ceil(rho * max(1.0, (2 * math.e * Lambda * 5 ** (k - 1) / (3 * eps)) ** (1 / (2 * k))))


def gamma_linear(r: int, tau: float, Lambda: float, C: float) -> float:
    h = tau / r
    if h * Lambda > 700:
        return math.inf
    return C / 2 * h + h**2 * Lambda**3 / 3 * math.exp(h * Lambda)


def min_steps(error: Callable[[int], float], eps: float) -> int:
    """Smallest r >= 1 with error(r) <= eps for an error decreasing in r."""
    if error(1) <= eps:
        return 1
    hi = 2
    while error(hi) > eps:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if error(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def r_linear_commutator_raw(tau: float, Lambda: float, C: float, eps: float) -> int:
    return min_steps(lambda r: gamma_linear(r, tau, Lambda, C), eps)


def r_linear_commutator(spec: LatticeSpec, split: Split | str, tau: float, eps: float) -> int:
    return r_linear_commutator_raw(tau, lambda_of(spec, split), commutator_norm(spec, split), eps)


def r_second_from_T(tau: float, T: float, eps: float) -> int:
    # closed-form minimiser of (tau/r)^2 T / 12 <= eps
    if T <= 0:
        return 1
    return _ceil(tau * math.sqrt(T / (12 * eps)))


def r_second_commutator(spec: LatticeSpec, split: Split | str, tau: float, eps: float) -> int:
    return r_second_from_T(tau, nested_commutator_norm(spec, split), eps)


def steps(spec: LatticeSpec, split: Split | str, order: int, bound: Bound | str, tau: float, eps: float) -> int:
    bound = Bound(bound)
    if order < 1 or (order > 1 and order % 2):
        raise ValueError(f"order must be 1 or even, got {order}")
    if bound is Bound.ANALYTIC:
        lam = lambda_of(spec, split)
        if order == 1:
            return r_linear_analytic(tau, lam, eps)
        return r_higher_analytic(tau, lam, eps, order // 2)
    if order == 1:
        return r_linear_commutator(spec, split, tau, eps)
    if order == 2:
        return r_second_commutator(spec, split, tau, eps)
    raise ValueError("commutator bounds are only available for orders 1 and 2")


@dataclass(frozen=True)
class TrotterPlan:
    split: Split
    order: int
    bound: Bound
    delta_omega: float
    eps_tau: float
    deltaH: float
    tau_base: float
    W: int
    r_base: int
    r_ladder: tuple[int, ...]
    r_total_same: int
    r_total_same_plain: int
    r_total_adaptive: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["split"] = self.split.value
        d["bound"] = self.bound.value
        d["r_ladder"] = list(self.r_ladder)
        return d


def ancilla_count(deltaH: float, delta_omega: float, rule: AncillaRule | str = AncillaRule.RESOLUTION) -> int:
    if delta_omega <= 0:
        raise ValueError("resolution must be positive")
    target = delta_omega if AncillaRule(rule) is AncillaRule.RESOLUTION else delta_omega / 2
    if target >= deltaH:
        raise ValueError(f"resolution {delta_omega} MeV does not resolve the spread {deltaH:.4g} MeV")
    ratio = deltaH / target
    return max(1, math.ceil(math.log2(ratio) - 1e-12))


def qpe_schedule(
    spec: LatticeSpec,
    split: Split | str = Split.BETA_KV,
    order: int = 2,
    bound: Bound | str = Bound.COMMUTATOR,
    delta_omega: float = 10.0,
    rule: AncillaRule | str = AncillaRule.RESOLUTION,
) -> TrotterPlan:
    """Step counts for the controlled evolutions ``U(2^j tau_base)``, j < W."""
    split, bound = Split(split), Bound(bound)
    dh = delta_h(spec, split)
    W = ancilla_count(dh, delta_omega, rule)
    eps = delta_omega / 2
    tau = 2 * math.pi / dh
    ladder = tuple(steps(spec, split, order, bound, tau * 2**j, eps) for j in range(W))
    n_apps = 2**W - 1
    r_base = ladder[0]
    r_apportioned = steps(spec, split, order, bound, tau, eps / n_apps)
    return TrotterPlan(
        split=split,
        order=order,
        bound=bound,
        delta_omega=delta_omega,
        eps_tau=eps,
        deltaH=dh,
        tau_base=tau,
        W=W,
        r_base=r_base,
        r_ladder=ladder,
        r_total_same=n_apps * r_apportioned,
        r_total_same_plain=n_apps * r_base,
        r_total_adaptive=sum(ladder),
    )


# ---- dense reference formulas for small lattices ------------------------------


def _expms(mats, tau):
    from scipy.linalg import expm

    return [expm(-1j * tau * m) for m in mats]


def product_formula(mats, tau: float, order: int) -> np.ndarray:
    """Dense first-order or symmetric order-2k product of ``exp(-i tau H_j)``.

    ``mats`` are applied in list order, so the last factor is leftmost.
    """
    if order == 1:
        out = np.eye(mats[0].shape[0], dtype=complex)
        for u in _expms(mats, tau):
            out = u @ out
        return out
    if order == 2:
        half = _expms(mats, tau / 2)
        out = np.eye(mats[0].shape[0], dtype=complex)
        for u in half:
            out = u @ out
        for u in reversed(half):
            out = u @ out
        return out
    if order % 2:
        raise ValueError("higher orders must be even")
    k = order // 2
    p = 1 / (4 - 4 ** (1 / (2 * k - 1)))
    outer = product_formula(mats, p * tau, order - 2)
    inner = product_formula(mats, (1 - 4 * p) * tau, order - 2)
    return outer @ outer @ inner @ outer @ outer


def split_matrices(spec: LatticeSpec, split: Split | str) -> list[np.ndarray]:
    """Dense pieces of H in product-formula order (potential first for K+V)."""
    from .lattice_model import build_kinetic, build_potential

    K, V = build_kinetic(spec), build_potential(spec)
    split = Split(split)
    if split is Split.ALPHA:
        return [V.to_matrix()] + [c * p.to_matrix() for c, p in K]
    if split is Split.BETA_VK:
        return [K.to_matrix(), V.to_matrix()]
    return [V.to_matrix(), K.to_matrix()]


def number_sector(n_qubits: int, A: int) -> np.ndarray:
    """Indices of computational basis states with ``A`` occupied orbitals."""
    idx = np.arange(2**n_qubits)
    return idx[np.array([bin(i).count("1") == A for i in idx])]


def dense_error(spec: LatticeSpec, split: Split | str, order: int, tau: float, r: int) -> float:
    """Spectral-norm error of ``r`` steps on the A-particle sector."""
    from scipy.linalg import expm

    mats = split_matrices(spec, split)
    H = sum(mats)
    step = product_formula(mats, tau / r, order)
    approx = np.linalg.matrix_power(step, r)
    sec = number_sector(spec.n_qubits, spec.A)
    diff = (expm(-1j * tau * H) - approx)[np.ix_(sec, sec)]
    return float(np.linalg.norm(diff, 2))
