"""Pionless-EFT lattice Hamiltonian in Pauli form, term counts and norm bounds.

Orbital ``(site i, species f)`` lives on qubit ``N_f * i + f`` so that the
species of one site are adjacent.  Boundaries are periodic; a direction with
only two sites connects the same pair twice, which doubles that bond.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum

from .pauli import PauliString, PauliSum

T_HOP = 10.5794
C0_DEFAULT = -98.2265511
D0_DEFAULT = 127.839693
B_MAX_DEFAULT = 16.0


class Split(str, Enum):
    """Product-formula splittings.

    ALPHA separates every kinetic Pauli pair, BETA keeps K and V whole.
    BETA_KV / BETA_VK pick the symmetric second-order ordering; at first
    order the three beta variants coincide.
    """

    ALPHA = "alpha"
    BETA = "beta"
    BETA_KV = "beta-kv"
    BETA_VK = "beta-vk"

    @property
    def is_beta(self) -> bool:
        return self is not Split.ALPHA


@dataclass(frozen=True)
class LatticeSpec:
    D: int = 3
    N_L: int = 10
    N_f: int = 4
    a: float = 1.4
    t: float = T_HOP
    C0: float = C0_DEFAULT
    D0: float = D0_DEFAULT
    A: int = 40
    b_max: float = B_MAX_DEFAULT

    def __post_init__(self):
        if self.D < 1 or self.N_L < 1 or self.N_f < 1:
            raise ValueError("D, N_L and N_f must be positive")
        if self.A < 0 or self.A > self.N_f * self.M:
            raise ValueError(f"A={self.A} does not fit in {self.N_f * self.M} orbitals")

    @property
    def M(self) -> int:
        return self.N_L**self.D

    @property
    def n_qubits(self) -> int:
        return self.N_f * self.M

    def with_(self, **changes) -> "LatticeSpec":
        return replace(self, **changes)

    @classmethod
    def for_sites(cls, M: int, D: int = 3, **kw) -> "LatticeSpec":
        """Spec for a cubic box with ``M`` sites; ``M`` must be a perfect power."""
        n_l = round(M ** (1.0 / D))
        for cand in (n_l - 1, n_l, n_l + 1):
            if cand > 0 and cand**D == M:
                return cls(D=D, N_L=cand, **kw)
        raise ValueError(f"M={M} is not a perfect {D}-th power")


@dataclass(frozen=True)
class NormBounds:
    """Operator-norm bounds in MeV; ``*_phys`` restrict to the A-nucleon sector."""

    K_abs: float
    K_phys: float
    V_abs: float
    V2_phys: float
    V3_phys: float
    V_phys: float
    n2: float
    n3: float
    n4: float
    deltaH: float
    deltaH_loose: float
    deltaH_alpha: float

    def to_dict(self) -> dict:
        return asdict(self)


def site_coords(i: int, N_L: int, D: int) -> tuple[int, ...]:
    return tuple((i // N_L**d) % N_L for d in range(D))


def site_index(coords, N_L: int) -> int:
    return sum((c % N_L) * N_L**d for d, c in enumerate(coords))


def bonds(spec: LatticeSpec) -> dict[tuple[int, int], int]:
    """Unordered nearest-neighbour site pairs with their multiplicity."""
    out: dict[tuple[int, int], int] = {}
    for i in range(spec.M):
        c = site_coords(i, spec.N_L, spec.D)
        for d in range(spec.D):
            nb = list(c)
            nb[d] += 1
            j = site_index(nb, spec.N_L)
            if j == i:
                continue
            key = (min(i, j), max(i, j))
            out[key] = out.get(key, 0) + 1
    return out


def hopping_pairs(spec: LatticeSpec) -> list[tuple[int, int, float]]:
    """Orbital pairs ``(p, q, coeff)`` with ``p < q``; coeff multiplies XZ..ZX + YZ..ZY."""
    if spec.D not in (1, 2, 3):
        raise ValueError(f"unsupported dimension D={spec.D}")
    if spec.t == 0:
        return []
    out = []
    for (i, j), mult in sorted(bonds(spec).items()):
        for f in range(spec.N_f):
            out.append((spec.N_f * i + f, spec.N_f * j + f, mult * spec.t / 2))
    return out


def _hop_strings(n: int, p: int, q: int) -> tuple[PauliString, PauliString]:
    zmask = sum(1 << k for k in range(p + 1, q))
    ends = (1 << p) | (1 << q)
    return PauliString(n, ends, zmask), PauliString(n, ends, zmask | ends)


def build_kinetic(spec: LatticeSpec) -> PauliSum:
    n = spec.n_qubits
    terms = []
    for p, q, c in hopping_pairs(spec):
        xx, yy = _hop_strings(n, p, q)
        terms.append((c, xx))
        terms.append((c, yy))
    return PauliSum(n, terms)


def onsite_polynomial(N_f: int, C0: float, D0: float) -> dict[frozenset, float]:
    """Z-expansion of C0*sum_{f<f'} n n + D0*sum_{f<f'<f''} n n n on one site.

    Keys are the sets of species carrying a Z; ``frozenset()`` is the constant.
    """
    coeffs: dict[frozenset, float] = {}
    for order, g in ((2, C0), (3, D0)):
        if g == 0:
            continue
        for subset in itertools.combinations(range(N_f), order):
            # prod (1 - Z)/2 = 2^-k sum_{T subset} (-1)^|T| Z_T
            for r in range(order + 1):
                for T in itertools.combinations(subset, r):
                    key = frozenset(T)
                    coeffs[key] = coeffs.get(key, 0.0) + g * (-1) ** r / 2**order
    return {k: v for k, v in coeffs.items() if abs(v) > 1e-15}


def build_potential(spec: LatticeSpec) -> PauliSum:
    """Diagonal contact potential; the identity term carries the constant."""
    if spec.N_f < 2:
        raise ValueError("the contact potential needs N_f >= 2")
    n = spec.n_qubits
    poly = onsite_polynomial(spec.N_f, spec.C0, spec.D0)
    terms = []
    for i in range(spec.M):
        base = spec.N_f * i
        for key, c in poly.items():
            zmask = sum(1 << (base + f) for f in key)
            terms.append((c, PauliString(n, 0, zmask)))
    return PauliSum(n, terms)


def potential_offset(spec: LatticeSpec) -> float:
    return spec.M * onsite_polynomial(spec.N_f, spec.C0, spec.D0).get(frozenset(), 0.0)


def n_kinetic_terms(spec: LatticeSpec) -> int:
    """Kinetic string count with each bond taken from both ends (4 D M N_f)."""
    return 4 * spec.D * spec.M * spec.N_f


def n_potential_terms(spec: LatticeSpec) -> int:
    nf = spec.N_f
    per_site = nf * (1 + (nf - 1) / 2 * (1 + (nf - 2) / 3))
    return round(spec.M * per_site)


def norms(spec: LatticeSpec) -> NormBounds:
    A, D, M, nf = spec.A, spec.D, spec.M, spec.N_f
    c0, d0, t = abs(spec.C0), abs(spec.D0), abs(spec.t)
    k_abs = 2 * D * M * nf * t
    k_phys = A * D * spec.t * math.pi**2
    v_abs = M * (6 * c0 + 8 * d0)
    v3 = 4 * d0 * (A // 4)
    v2 = c0 * max(A // 2, 3 * (A // 3), 6 * (A // 4))
    n2 = c0 * (A // 2)
    n3 = abs(spec.D0 + 3 * spec.C0) * (A // 3)
    n4 = abs(4 * spec.D0 + 6 * spec.C0) * (A // 4)
    v_phys = max(n2, n3, n4)
    binding = A * spec.b_max
    return NormBounds(
        K_abs=k_abs,
        K_phys=abs(k_phys),
        V_abs=v_abs,
        V2_phys=v2,
        V3_phys=v3,
        V_phys=v_phys,
        n2=n2,
        n3=n3,
        n4=n4,
        deltaH=abs(k_phys) + v_phys + binding,
        deltaH_loose=abs(k_phys) + v2 + v3 + binding,
        deltaH_alpha=k_abs + v_phys + binding,
    )


def delta_h(spec: LatticeSpec, split: Split | str = Split.BETA) -> float:
    """Energy-spread bound setting the QPE base time for a given splitting.

    The per-term splitting cannot use the physical kinetic bound, so it falls
    back on the absolute kinetic norm.
    """
    nb = norms(spec)
    return nb.deltaH_alpha if Split(split) is Split.ALPHA else nb.deltaH
