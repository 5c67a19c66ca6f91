"""Gate-cost accounting for the lattice propagators.

U1 is the potential propagator, U2 the whole kinetic propagator (Givens
network), and U3/U4 the per-term kinetic propagators used by the alpha split.
Each table row carries a serial count and a parallel (depth) count.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .lattice_model import LatticeSpec, Split, hopping_pairs
from .trotter_bounds import TrotterPlan

NAIVE_ENUMERATION_LIMIT = 4096


@dataclass(frozen=True)
class GateCost:
    cnot: int = 0
    rz: int = 0
    c_rz: int = 0
    t_gate: int = 0
    clifford1: int = 0

    def __add__(self, other: "GateCost") -> "GateCost":
        return GateCost(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def __mul__(self, k: int) -> "GateCost":
        if k < 0:
            raise ValueError("negative multiplicity")
        return GateCost(*(getattr(self, f.name) * k for f in fields(self)))

    __rmul__ = __mul__

    @property
    def rotations(self) -> int:
        """Rotations in the CNOT+Rz basis (T gates counted as rotations)."""
        return self.rz + self.c_rz + self.t_gate

    def primitive(self) -> "GateCost":
        """Expand every controlled rotation into 2 CNOT + 2 Rz."""
        return GateCost(
            cnot=self.cnot + 2 * self.c_rz,
            rz=self.rz + 2 * self.c_rz,
            c_rz=0,
            t_gate=self.t_gate,
            clifford1=self.clifford1,
        )

    def controlled(self) -> "GateCost":
        """Treat every plain rotation as controlled by an ancilla."""
        return GateCost(self.cnot, 0, self.c_rz + self.rz, self.t_gate, self.clifford1)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CostEntry:
    serial: GateCost
    parallel: GateCost

    def pick(self, parallel: bool) -> GateCost:
        return self.parallel if parallel else self.serial


_ZERO = CostEntry(GateCost(), GateCost())


def u1_cost(M: int, variant: str = "parallel_opt") -> CostEntry:
    """Potential propagator on M four-species sites."""
    if M <= 0:
        return _ZERO
    rows = {
        "naive": ((14 * M, 28 * M), (14, 28)),
        "serial_opt": ((14 * M, 14 * M), (14, 14)),
        "parallel_opt": ((14 * M, 16 * M), (7, 8)),
    }
    try:
        (rs, cs), (rp, cp) = rows[variant]
    except KeyError:
        raise ValueError(f"unknown U1 variant {variant!r}") from None
    return CostEntry(GateCost(cnot=cs, c_rz=rs), GateCost(cnot=cp, c_rz=rp))


def u2_cost(M: int, controlled: bool = True) -> CostEntry:
    """Kinetic propagator built from 2M(4M-1) Givens rotations."""
    if M <= 0:
        return _ZERO
    if not controlled:
        return CostEntry(
            GateCost(cnot=20 * M * (4 * M - 1), rz=32 * M * M),
            GateCost(cnot=80 * M - 28, rz=16 * M - 4),
        )
    # only the 4M diagonal phases need the control
    return CostEntry(
        GateCost(cnot=4 * M * (20 * M - 3), rz=8 * M * (4 * M - 1), c_rz=4 * M),
        GateCost(cnot=80 * M - 30, rz=16 * M - 6, c_rz=1),
    )


def u3_cost(M: int, variant: str = "fswap", spec: LatticeSpec | None = None) -> CostEntry:
    """All per-term hopping exponentials (U3 and U4 together).

    The naive row is an upper bound unless ``spec`` is given and small enough
    to enumerate, in which case the serial entry is exact.
    """
    if M <= 0:
        return _ZERO
    if variant == "fswap":
        return CostEntry(GateCost(cnot=6 * M * (4 * M - 1), c_rz=24 * M), GateCost(cnot=12 * M, c_rz=8 * M))
    if variant != "naive":
        raise ValueError(f"unknown U3 variant {variant!r}")
    if spec is not None and spec.M == M and M <= NAIVE_ENUMERATION_LIMIT:
        exact = count_naive_u3(spec, controlled=True)
        return CostEntry(exact, exact)
    bound = GateCost(cnot=48 * M * M, c_rz=24 * M)
    return CostEntry(bound, bound)


def count_naive_u3(spec: LatticeSpec, controlled: bool = False) -> GateCost:
    """Exact count for one exponential per hopping pair (XX + YY with Z tail)."""
    cnot = rot = 0
    n_pairs = 0
    for p, q, _ in hopping_pairs(spec):
        cnot += 4 * (q - p)
        rot += 2
        n_pairs += 1
    cost = GateCost(cnot=cnot, rz=rot, clifford1=12 * n_pairs)
    return cost.controlled() if controlled else cost


def _outer_inner(split: Split, M: int, parallel: bool, u1: str, u3: str, spec: LatticeSpec | None):
    v = u1_cost(M, u1).pick(parallel)
    if split is Split.ALPHA:
        k = u3_cost(M, u3, spec).pick(parallel)
        return v, k
    k = u2_cost(M, controlled=True).pick(parallel)
    if split is Split.BETA_VK:
        return v, k
    return k, v


def step_cost(
    split: Split | str,
    order: int,
    M: int,
    parallel: bool = False,
    u1: str = "parallel_opt",
    u3: str = "fswap",
    spec: LatticeSpec | None = None,
) -> GateCost:
    """One unmerged Trotter step, controlled, in the CNOT + Rz basis."""
    split = Split(split)
    outer, inner = _outer_inner(split, M, parallel, u1, u3, spec)
    if order == 1:
        return (outer + inner).primitive()
    units = 5 ** (order // 2 - 1)
    return (units * (2 * outer + inner)).primitive()


def segment_cost(
    split: Split | str,
    order: int,
    M: int,
    r: int,
    parallel: bool = False,
    u1: str = "parallel_opt",
    u3: str = "fswap",
    spec: LatticeSpec | None = None,
) -> GateCost:
    """``r`` consecutive steps with adjacent outer half-steps merged."""
    split = Split(split)
    if r <= 0:
        return GateCost()
    outer, inner = _outer_inner(split, M, parallel, u1, u3, spec)
    if order == 1:
        return (r * (outer + inner)).primitive()
    n = r * 5 ** (order // 2 - 1)
    return ((n + 1) * outer + n * inner).primitive()


def total_cost(
    plan: TrotterPlan,
    M: int,
    parallel: bool = True,
    adaptive: bool = True,
    u1: str = "parallel_opt",
    u3: str = "fswap",
    spec: LatticeSpec | None = None,
) -> GateCost:
    """Cost of the whole QPE ladder; each controlled evolution is one merged segment."""
    if adaptive:
        rs = plan.r_ladder
    else:
        per = plan.r_total_same // (2**plan.W - 1)
        rs = tuple(per * 2**j for j in range(plan.W))
    total = GateCost()
    for r in rs:
        total = total + segment_cost(plan.split, plan.order, M, r, parallel, u1, u3, spec)
    return total
