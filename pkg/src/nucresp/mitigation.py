"""Readout correction, zero-noise extrapolation and run filtering.

Noise is amplified by folding two-qubit gates, giving noise levels
``k = 1, 3, 5, 7``.  Each extrapolation strategy reports how many consistency
checks it failed; the counts feed the A0/A1/A2 run filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from .circuits import Circuit
from .readout import ConfusionMatrix
from .simulator import MeasuredDistribution, NoiseModel, run_noisy, sample

__all__ = [
    "ConfusionMatrix",
    "CorrectedDistribution",
    "ExtrapolationResult",
    "MitigationReport",
    "Point",
    "Status",
    "Strategy",
    "combine",
    "compatible",
    "correct_readout",
    "decoherence_check",
    "exponential",
    "filter_level",
    "mitigate",
    "mitigate_many",
    "mitigate_points",
    "ovd",
    "polynomial",
    "richardson",
]

DEFAULT_KS = (1, 3, 5, 7)
OVD_THRESHOLD = 0.9
FILTERS = ("A0", "A1", "A2")


class Strategy(str, Enum):
    RICHARDSON = "richardson"
    POLYNOMIAL = "polynomial"
    EXPONENTIAL = "exponential"


class Status(str, Enum):
    OK = "OK"
    FAILED = "FAILED"


@dataclass(frozen=True)
class Point:
    k: int
    value: float
    sigma: float


@dataclass
class ExtrapolationResult:
    strategy: Strategy
    status: Status
    value: float | None = None
    sigma: float | None = None
    order_used: int | None = None
    error_count: int = 0
    all_points: bool = True
    trail: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "status": self.status.value,
            "value": self.value,
            "sigma": self.sigma,
            "order_used": self.order_used,
            "error_count": self.error_count,
            "all_points": self.all_points,
            "trail": self.trail,
        }


def compatible(a: float, sa: float, b: float, sb: float) -> bool:
    """Agreement at one combined standard deviation."""
    return abs(a - b) <= np.hypot(sa, sb) + 1e-12 * max(1.0, abs(a), abs(b))


def _as_points(points: Iterable) -> list[Point]:
    pts = [p if isinstance(p, Point) else Point(int(p[0]), float(p[1]), float(p[2])) for p in points]
    pts.sort(key=lambda p: p.k)
    ks = [p.k for p in pts]
    if len(set(ks)) != len(ks):
        raise ValueError(f"duplicate noise levels in {ks}")
    return pts


# ---- readout ---------------------------------------------------------------


@dataclass
class CorrectedDistribution:
    n: int
    probabilities: np.ndarray
    covariance: np.ndarray
    shots: int | None
    error_count: int = 0
    fallback: bool = False

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(np.clip(self.covariance.diagonal(), 0, None))

    def observable(self, labels: Sequence[str]) -> tuple[float, float]:
        """Summed probability of the given bitstrings and its standard error."""
        idx = [int(b, 2) for b in labels]
        v = float(self.probabilities[idx].sum())
        var = float(self.covariance[np.ix_(idx, idx)].sum())
        return v, float(np.sqrt(max(var, 0.0)))


def correct_readout(dist: MeasuredDistribution | np.ndarray, cal: ConfusionMatrix) -> CorrectedDistribution:
    """Invert per-qubit confusion; fall back to NNLS when a bin is below -2 sigma.

    A bare probability array is treated as the infinite-shot limit.
    """
    if isinstance(dist, MeasuredDistribution):
        p, shots, n = dist.probabilities, dist.shots, dist.n
        cov = (np.diag(p) - np.outer(p, p)) / shots
    else:
        p = np.asarray(dist, dtype=float)
        n, shots = int(np.log2(p.size)), None
        cov = np.zeros((p.size, p.size))
    if cal.n != n:
        raise ValueError(f"calibration for {cal.n} qubits, data for {n}")
    inv = cal.inverse_full()
    q = inv @ p
    qcov = inv @ cov @ inv.T
    sig = np.sqrt(np.clip(qcov.diagonal(), 0, None))
    if np.any(q < -2 * sig - 1e-12):
        x, _ = nnls(cal.full(), p)
        x = x / x.sum()
        return CorrectedDistribution(n, x, qcov, shots, error_count=1, fallback=True)
    return CorrectedDistribution(n, q, qcov, shots)


# ---- extrapolation ---------------------------------------------------------


def lagrange_weights_at_zero(ks: Sequence[float]) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    w = np.ones(len(ks))
    for i in range(len(ks)):
        for j in range(len(ks)):
            if i != j:
                w[i] *= -ks[j] / (ks[i] - ks[j])
    return w


def _richardson_estimates(pts: list[Point]) -> list[tuple[float, float]]:
    out = []
    for m in range(len(pts)):
        sub = pts[: m + 1]
        w = lagrange_weights_at_zero([p.k for p in sub])
        out.append((float(w @ [p.value for p in sub]), float(np.sqrt(np.sum((w * [p.sigma for p in sub]) ** 2)))))
    return out


def _lowest_compatible(est: list[tuple[float, float]], candidates: Iterable[int]) -> int | None:
    for m in candidates:
        if all(compatible(*est[m], *est[j]) for j in range(m + 1, len(est))):
            return m
    return None


def richardson(points: Iterable) -> ExtrapolationResult:
    """Lowest interpolation order agreeing with every higher order at k = 0."""
    pts = _as_points(points)
    if len(pts) < 2:
        raise ValueError("Richardson extrapolation needs at least two points")
    res = ExtrapolationResult(Strategy.RICHARDSON, Status.FAILED)
    for attempt in range(2):
        use = pts if attempt == 0 else pts[:-1]
        if len(use) < 2:
            break
        est = _richardson_estimates(use)
        res.trail.append({"ks": [p.k for p in use], "estimates": est})
        # the top order is the full interpolant and has nothing above it to agree with
        m = _lowest_compatible(est, range(len(use) - 1))
        if m is not None:
            res.status, (res.value, res.sigma), res.order_used = Status.OK, est[m], m
            res.all_points = attempt == 0
            return res
        res.error_count += 1
    return res


def _wls(pts: list[Point], order: int) -> tuple[float, float, float]:
    """Weighted least squares; returns (intercept, sigma, chi2)."""
    if len(pts) <= order:
        raise ValueError(f"order {order} fit needs more than {order} points")
    k = np.array([p.k for p in pts], dtype=float)
    y = np.array([p.value for p in pts])
    s = np.array([max(p.sigma, 1e-15) for p in pts])
    X = np.vander(k, order + 1, increasing=True)
    Xw, yw = X / s[:, None], y / s
    coef, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    cov = np.linalg.pinv(Xw.T @ Xw)
    chi2 = float(np.sum((Xw @ coef - yw) ** 2))
    return float(coef[0]), float(np.sqrt(max(cov[0, 0], 0.0))), chi2


def polynomial(points: Iterable, max_order: int = 3) -> ExtrapolationResult:
    """Lowest-order weighted fit with chi2/dof <= 1 that agrees with all higher fits."""
    pts = _as_points(points)
    res = ExtrapolationResult(Strategy.POLYNOMIAL, Status.FAILED)
    for attempt in range(2):
        use = pts if attempt == 0 else pts[:-1]
        top = min(max_order - attempt, len(use) - 1)
        if top < 1:
            break
        fits = [_wls(use, m) for m in range(top + 1)]
        res.trail.append({"ks": [p.k for p in use], "fits": fits})
        for m in range(top):
            a, sa, chi2 = fits[m]
            dof = len(use) - (m + 1)
            if chi2 / dof <= 1 and all(compatible(a, sa, b, sb) for b, sb, _ in fits[m + 1:]):
                res.status, res.value, res.sigma, res.order_used = Status.OK, a, sa, m
                res.all_points = attempt == 0
                return res
        res.error_count += 1
    return res


def _exp_pair(p1: Point, p2: Point, m_inf: float) -> tuple[float, float] | None:
    d1, d2 = p1.value - m_inf, p2.value - m_inf
    if d1 == 0:
        return None
    ratio = d2 / d1
    if not 0 < ratio <= 1:
        return None
    a = p1.k / (p2.k - p1.k)
    est = m_inf + d1 * ratio ** (-a)
    # d(est)/d(M1) and d(est)/d(M2)
    g1 = (1 + a) * ratio ** (-a)
    g2 = -a * ratio ** (-a - 1)
    return float(est), float(np.hypot(g1 * p1.sigma, g2 * p2.sigma))


def exponential(points: Iterable, depolarized: float) -> ExtrapolationResult:
    """Two-point decay ``M(k) = M_inf + (M(0) - M_inf) g^k`` toward the depolarized value."""
    pts = _as_points(points)
    if len(pts) < 2:
        raise ValueError("exponential extrapolation needs at least two points")
    res = ExtrapolationResult(Strategy.EXPONENTIAL, Status.FAILED)
    primary = _exp_pair(pts[0], pts[1], depolarized)
    res.trail.append({"ks": [pts[0].k, pts[1].k], "estimate": primary})
    if primary is None:
        return res
    for other in pts[2:]:
        check = _exp_pair(pts[0], other, depolarized)
        res.trail.append({"ks": [pts[0].k, other.k], "estimate": check})
        if check is None or not compatible(*primary, *check):
            res.error_count += 1
    res.status, (res.value, res.sigma), res.order_used = Status.OK, primary, 1
    return res


# ---- decoherence and combination -------------------------------------------


def ovd(probs: np.ndarray | MeasuredDistribution | CorrectedDistribution) -> float:
    """Overlap with the uniform distribution, ``1 - (1/2) sum |2^-n - p|``."""
    if isinstance(probs, (MeasuredDistribution, CorrectedDistribution)):
        probs = probs.probabilities
    p = np.asarray(probs, dtype=float)
    return float(1 - 0.5 * np.abs(1 / p.size - p).sum())


@dataclass(frozen=True)
class DecoherenceResult:
    decohered: bool
    error_count: int
    ovds: tuple[float, ...]


def decoherence_check(dists: Sequence, threshold: float = OVD_THRESHOLD) -> DecoherenceResult:
    """``dists`` ordered by noise level, lowest first."""
    ovds = tuple(ovd(d) for d in dists)
    if not ovds:
        raise ValueError("no distributions")
    errors = 0
    if ovds[0] >= threshold:
        errors += 1
    if sum(v > threshold for v in ovds[1:]) >= 2:
        errors += 1
    return DecoherenceResult(errors > 0, errors, ovds)


def filter_level(error_count: int) -> str:
    """Loosest-needed filter name; A_k accepts runs with at most k errors."""
    return FILTERS[error_count] if error_count < len(FILTERS) else "REJECTED"


@dataclass
class MitigationReport:
    results: dict[Strategy, ExtrapolationResult]
    value: float | None
    sigma: float | None
    error_count: int
    filter_level: str
    decohered: bool = False
    chosen: tuple[str, ...] = ()
    points: list[Point] = field(default_factory=list)
    raw_value: float | None = None
    raw_sigma: float | None = None
    readout_fallbacks: int = 0

    def accepted(self, level: str) -> bool:
        if level not in FILTERS:
            raise ValueError(f"unknown filter {level!r}")
        return self.filter_level != "REJECTED" and self.error_count <= FILTERS.index(level)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sigma": self.sigma,
            "error_count": self.error_count,
            "filter_level": self.filter_level,
            "decohered": self.decohered,
            "chosen": list(self.chosen),
            "raw_value": self.raw_value,
            "raw_sigma": self.raw_sigma,
            "readout_fallbacks": self.readout_fallbacks,
            "points": [{"k": p.k, "value": p.value, "sigma": p.sigma} for p in self.points],
            "strategies": {s.value: r.to_dict() for s, r in self.results.items()},
        }


def combine(results: Iterable[ExtrapolationResult], extra_errors: int = 0) -> MitigationReport:
    """Prefer a global linear fit, else average the OK strategies with fewest errors."""
    res = {r.strategy: r for r in results}
    if not res:
        raise ValueError("no strategies attempted")
    total = sum(r.error_count for r in res.values()) + extra_errors
    ok = [r for r in res.values() if r.ok]
    if not ok:
        return MitigationReport(res, None, None, total, "REJECTED")
    poly = res.get(Strategy.POLYNOMIAL)
    if poly is not None and poly.ok and poly.all_points and poly.order_used <= 1:
        chosen = [poly]
    else:
        best = min(r.error_count for r in ok)
        chosen = [r for r in ok if r.error_count == best]
    value = float(np.mean([r.value for r in chosen]))
    sigma = float(np.mean([r.sigma for r in chosen]))
    return MitigationReport(res, value, sigma, total, filter_level(total), chosen=tuple(r.strategy.value for r in chosen))


def mitigate_points(points: Sequence, depolarized: float, extra_errors: int = 0) -> MitigationReport:
    pts = _as_points(points)
    report = combine([richardson(pts), polynomial(pts), exponential(pts, depolarized)], extra_errors)
    report.points = pts
    return report


def mitigate_many(
    circuit: Circuit,
    observables: dict[str, Sequence[str]],
    noise: NoiseModel,
    shots: int = 8192,
    ks: Sequence[int] = DEFAULT_KS,
    rng: np.random.Generator | int | np.random.SeedSequence | None = None,
) -> dict[str, MitigationReport]:
    """Run the folded circuits once and mitigate several bitstring observables.

    Each observable is the summed weight of its bitstrings; its depolarized
    reference is that weight under the uniform distribution.
    """
    rng = np.random.default_rng(rng)
    cal = noise.readout or ConfusionMatrix.uniform(circuit.n, 0.0, 0.0)
    dists, corrected = [], []
    for k in ks:
        rho = run_noisy(circuit, noise.amplified(k))
        dists.append(sample(rho, shots, noise.readout, rng))
        corrected.append(correct_readout(dists[-1], cal))
    fallbacks = sum(c.error_count for c in corrected)
    deco = decoherence_check(corrected)
    out = {}
    for name, labels in observables.items():
        points = [Point(k, *c.observable(labels)) for k, c in zip(ks, corrected)]
        report = mitigate_points(points, len(labels) / 2**circuit.n, fallbacks + deco.error_count)
        p = dists[0].probabilities
        v = float(sum(p[int(b, 2)] for b in labels))
        report.raw_value, report.raw_sigma = v, float(np.sqrt(v * (1 - v) / shots))
        report.decohered = deco.decohered
        report.readout_fallbacks = fallbacks
        out[name] = report
    return out


def mitigate(
    circuit: Circuit,
    labels: Sequence[str],
    noise: NoiseModel,
    shots: int = 8192,
    ks: Sequence[int] = DEFAULT_KS,
    rng: np.random.Generator | int | np.random.SeedSequence | None = None,
) -> MitigationReport:
    """Single-observable form of :func:`mitigate_many`."""
    return mitigate_many(circuit, {"value": labels}, noise, shots, ks, rng)["value"]
