"""``nucresp`` command-line driver.

Every command writes a table (CSV or JSON) to stdout or, with ``--out DIR``,
to ``DIR/<command>.<fmt>`` together with a PNG figure of the same data.
Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, load, parse_noise
from .gate_costs import total_cost
from .lattice_model import LatticeSpec, Split
from .mitigation import FILTERS, MitigationReport, correct_readout, decoherence_check, mitigate_many, mitigate_points
from .qubitization import plan as qubitization_plan
from .qubitization import speedup_ratio
from .readout import ConfusionMatrix
from .simulator import MeasuredDistribution, run_noisy, sample
from .trotter_bounds import Bound, qpe_schedule
from .triton import (
    C2_DYN_STATES,
    C2_SA_STATES,
    C3_STATES,
    TritonParams,
    contacts,
    evolve,
    exact_ground_state,
    optimize_trial,
    trial_circuit,
    trial_state,
    trotter_step_circuit,
)

log = logging.getLogger("nucresp")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
CONTACT_LABELS = {"C3": C3_STATES, "C2_dyn": C2_DYN_STATES, "C2_sA": C2_SA_STATES}


class UsageError(Exception):
    pass


# ---- argument helpers ------------------------------------------------------


def int_range(text: str) -> list[int]:
    """``40``, ``4:100`` (inclusive) or ``4:100:4``."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    if len(parts) == 1:
        return parts
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}")
    lo, hi = parts[:2]
    step = parts[2] if len(parts) == 3 else 1
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or reversed range {text!r}")
    return list(range(lo, hi + 1, step))


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("output")
    g.add_argument("--config", help="INI file with [run], [lattice], [triton] and [noise] sections")
    g.add_argument("--seed", type=int, help="global seed (overrides NUCRESP_SEED and the config)")
    g.add_argument("--out", type=Path, help="directory for report files (default: stdout, no figure)")
    g.add_argument("--format", dest="fmt", choices=("csv", "json"))
    g.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None, help="render a PNG next to the report")
    g.add_argument("--jobs", type=positive_int, help="worker processes for sweeps")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _lattice_args(p: argparse.ArgumentParser, resolution: bool = True) -> None:
    p.add_argument("--A", type=int_range, default=[40], help="nucleon number or range a:b[:step]")
    p.add_argument("--M", type=positive_int, help="lattice sites (a perfect D-th power)")
    p.add_argument("--D", type=positive_int, choices=(1, 2, 3))
    p.add_argument("--Nf", type=positive_int, help="species per site")
    if resolution:
        p.add_argument("--resolution", type=positive_float, default=10.0, help="frequency resolution in MeV")


def _trotter_args(p: argparse.ArgumentParser, bound: str) -> None:
    p.add_argument("--split", choices=[s.value for s in Split], default="beta-kv")
    p.add_argument("--order", type=int, choices=(1, 2, 4, 6), default=2)
    p.add_argument("--bound", choices=[b.value for b in Bound], default=bound)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="nucresp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common], help="Trotter steps and ancillas over A")
    _lattice_args(p)
    _trotter_args(p, "commutator")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("gates", parents=[common], help="CNOT and rotation totals over A")
    _lattice_args(p)
    _trotter_args(p, "commutator")
    p.add_argument("--parallel", action=argparse.BooleanOptionalAction, default=True, help="count circuit depth per gate type")
    p.add_argument("--schedule", choices=("adaptive", "same"), default="adaptive")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("qubitize", parents=[common], help="qubitization cost and required speedup")
    _lattice_args(p)
    p.add_argument("--split", choices=[s.value for s in Split], default="beta-kv", help="Trotter split compared against")
    p.add_argument("--prepares", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_qubitize)

    tri = sub.add_parser("triton", help="three-nucleon toy model").add_subparsers(dest="triton_command", required=True)
    for name, func, helptext in (
        ("groundstate", cmd_groundstate, "exact and variational energies"),
        ("evolve", cmd_evolve, "contact densities along the evolution"),
        ("entanglement", cmd_entanglement, "entropies and concurrences along the evolution"),
    ):
        p = tri.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--t", dest="hop", type=float, help="hopping t")
        p.add_argument("--U", type=float)
        p.add_argument("--V", type=float)
        p.add_argument("--variant", choices=("plain", "symmetric"), default="plain")
        if name != "groundstate":
            p.add_argument("--t-max", type=float, default=0.6)
            p.add_argument("--points", type=positive_int, default=61)
            p.add_argument("--mode", choices=("exact", "trotter"), default="trotter" if name == "entanglement" else "exact")
            p.add_argument("--steps", type=positive_int, default=1)
        if name == "evolve":
            p.add_argument("--noise", help="'defaults' or p2=..,readout=..")
            p.add_argument("--shots", type=positive_int)
            p.add_argument("--mitigate", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("mitigate", parents=[common], help="mitigate recorded runs")
    p.add_argument("--input", type=Path, required=True, help="JSON list of {k, distribution}")
    p.add_argument("--depolarized", type=float, help="observable on the maximally mixed state (default: uniform weight)")
    p.add_argument("--filter", choices=FILTERS, default="A2")
    p.add_argument("--observable", default="0000", help="comma-separated bitstrings summed into the observable")
    p.add_argument("--p0", type=float, default=0.0, help="readout P(1|0) per qubit")
    p.add_argument("--p1", type=float, default=0.0, help="readout P(0|1) per qubit")
    p.set_defaults(func=cmd_mitigate)
    return ap


# ---- configuration and output ----------------------------------------------


def resolve_config(args) -> RunConfig:
    cfg = load(args.config)
    kw = {}
    for name, attr in (("seed", "seed"), ("out", "out"), ("fmt", "fmt"), ("jobs", "jobs"), ("plot", "plot")):
        v = getattr(args, name, None)
        if v is not None:
            kw[attr] = v
    cfg = replace(cfg, **kw)
    if hasattr(args, "A"):
        lat = cfg.lattice
        if getattr(args, "D", None):
            lat = lat.with_(D=args.D)
        if getattr(args, "Nf", None):
            lat = lat.with_(N_f=args.Nf)
        if getattr(args, "M", None):
            try:
                lat = LatticeSpec.for_sites(args.M, lat.D, N_f=lat.N_f, a=lat.a, t=lat.t, C0=lat.C0, D0=lat.D0, A=0, b_max=lat.b_max)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        cfg = replace(cfg, lattice=lat.with_(A=0))
        for A in args.A:
            if not 0 < A <= lat.N_f * lat.M:
                raise UsageError(f"A={A} outside 1..{lat.N_f * lat.M}")
    if hasattr(args, "hop"):
        tp = cfg.triton
        cfg = replace(cfg, triton=TritonParams(
            tp.t if args.hop is None else args.hop,
            tp.U if args.U is None else args.U,
            tp.V if args.V is None else args.V,
        ))
    return cfg


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render(rows: list[dict], columns: Sequence[str], fmt: str, command: str, meta: dict | None = None) -> str:
    if fmt == "json":
        doc = {"command": command, "columns": list(columns), "rows": rows, "meta": meta or {}}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def emit(cfg: RunConfig, command: str, rows, columns, meta=None, plot: Callable | None = None, extra: dict | None = None):
    text = render(rows, columns, cfg.fmt, command, meta)
    if cfg.out is None:
        sys.stdout.write(text)
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = command.replace(" ", "_")
    (cfg.out / f"{stem}.{cfg.fmt}").write_text(text)
    for name, doc in (extra or {}).items():
        (cfg.out / name).write_text(json.dumps(doc, indent=2) + "\n")
    if cfg.plot and plot is not None and rows:
        from . import plotting

        plot(plotting, cfg.out / f"{stem}.png")
    log.info("wrote %s", cfg.out)


def _map(cfg: RunConfig, fn, items):
    if cfg.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---- resource commands -----------------------------------------------------


def _check_bound(args) -> None:
    if args.bound == "commutator" and args.order > 2:
        raise UsageError("commutator bounds exist for orders 1 and 2 only; use --bound analytic")


def _estimate_row(A, lat, split, order, bound, resolution):
    p = qpe_schedule(lat.with_(A=A), split, order, bound, resolution)
    return {
        "A": A,
        "W": p.W,
        "r_base": p.r_base,
        "r_total_same": p.r_total_same,
        "r_total_adaptive": p.r_total_adaptive,
        "r_total_same_plain": p.r_total_same_plain,
    }


def cmd_estimate(args, cfg: RunConfig) -> None:
    _check_bound(args)
    fn = partial(_estimate_row, lat=cfg.lattice, split=args.split, order=args.order, bound=args.bound, resolution=args.resolution)
    rows = _map(cfg, fn, args.A)
    cols = ["A", "W", "r_base", "r_total_same", "r_total_adaptive", "r_total_same_plain"]
    meta = {"M": cfg.lattice.M, "split": args.split, "order": args.order, "bound": args.bound, "resolution": args.resolution}
    emit(cfg, "estimate", rows, cols, meta, lambda plt, path: plt.line_plot(
        rows, "A", ["r_total_same", "r_total_adaptive"], path, logy=True, ylabel="Trotter steps",
        title=f"{args.split}, order {args.order}, {args.bound} bound"))


def _gates_row(A, lat, split, order, bound, resolution, parallel, adaptive):
    spec = lat.with_(A=A)
    p = qpe_schedule(spec, split, order, bound, resolution)
    c = total_cost(p, spec.M, parallel=parallel, adaptive=adaptive, spec=spec)
    return {"A": A, "cnot_total": c.cnot, "rz_total": c.rotations, "qubits": spec.n_qubits + p.W, "W": p.W}


def cmd_gates(args, cfg: RunConfig) -> None:
    _check_bound(args)
    fn = partial(_gates_row, lat=cfg.lattice, split=args.split, order=args.order, bound=args.bound,
                 resolution=args.resolution, parallel=args.parallel, adaptive=args.schedule == "adaptive")
    rows = _map(cfg, fn, args.A)
    meta = {"M": cfg.lattice.M, "split": args.split, "order": args.order, "parallel": args.parallel}
    emit(cfg, "gates", rows, ["A", "cnot_total", "rz_total", "qubits", "W"], meta, lambda plt, path: plt.line_plot(
        rows, "A", ["cnot_total", "rz_total"], path, logy=True, ylabel="gates",
        title=f"{'parallel' if args.parallel else 'serial'} count, {args.split}, order {args.order}"))


def _qubitize_row(A, lat, resolution, split, prepares):
    spec = lat.with_(A=A)
    q = qubitization_plan(spec, resolution, prepares)
    return {
        "A": A,
        "N_A": q.N_A,
        "W_q": q.W_q,
        "cnot_total": q.total.cnot,
        "rz_total": q.total.rotations,
        "ratio_vs_trotter": speedup_ratio(spec, resolution, split),
        "lambda": q.lam,
    }


def cmd_qubitize(args, cfg: RunConfig) -> None:
    fn = partial(_qubitize_row, lat=cfg.lattice, resolution=args.resolution, split=args.split, prepares=args.prepares)
    rows = _map(cfg, fn, args.A)
    cols = ["A", "N_A", "W_q", "cnot_total", "rz_total", "ratio_vs_trotter", "lambda"]
    emit(cfg, "qubitize", rows, cols, {"M": cfg.lattice.M, "split": args.split}, lambda plt, path: plt.line_plot(
        rows, "A", ["ratio_vs_trotter"], path, logy=True, ylabel="required speedup", title=f"vs {args.split}"))


# ---- triton commands -------------------------------------------------------


def cmd_groundstate(args, cfg: RunConfig) -> None:
    p = cfg.triton
    e0, psi = exact_ground_state(p)
    rows = [{"state": "exact", "energy": e0, "theta": None, "phi": None, **contacts(psi).to_dict()}]
    for variant in ("plain", "symmetric"):
        o = optimize_trial(p, variant)
        obs = contacts(trial_state(o.theta, o.phi, variant))
        rows.append({"state": f"trial-{variant}", "energy": o.energy, "theta": o.theta, "phi": o.phi, **obs.to_dict()})
    cols = ["state", "energy", "theta", "phi", "C3", "C2_dyn", "C2_sA"]
    emit(cfg, "triton_groundstate", rows, cols, {"t": p.t, "U": p.U, "V": p.V})


def _times(args) -> list[float]:
    if args.t_max < 0:
        raise UsageError("--t-max must be nonnegative")
    return [float(x) for x in np.linspace(0.0, args.t_max, args.points)]


def _evolve_point(job):
    t, p, variant, mode, steps, noise_cfg, mitigate, seed = job
    o = optimize_trial(p, variant)
    exact = contacts(evolve(trial_state(o.theta, o.phi, variant), t, p, mode, steps)).to_dict()
    row = {"time": t, **exact}
    reports = None
    if noise_cfg is None:
        return row, reports
    circ = trial_circuit(o.theta, o.phi, variant)
    for _ in range(steps):
        circ = circ + trotter_step_circuit(t / steps, p)
    noise = noise_cfg.model(4)
    if mitigate:
        reps = mitigate_many(circ, CONTACT_LABELS, noise, noise_cfg.shots, rng=seed)
        for name, r in reps.items():
            row[f"{name}_raw"], row[f"{name}_raw_sigma"] = r.raw_value, r.raw_sigma
            row[f"{name}_mitigated"], row[f"{name}_sigma"] = r.value, r.sigma
        row["error_count"] = reps["C3"].error_count
        row["filter"] = reps["C3"].filter_level
        reports = {name: r.to_dict() for name, r in reps.items()}
    else:
        dist = sample(run_noisy(circ, noise), noise_cfg.shots, noise.readout, np.random.default_rng(seed))
        pr = dist.probabilities
        for name, labels in CONTACT_LABELS.items():
            v = float(sum(pr[int(b, 2)] for b in labels))
            row[f"{name}_raw"], row[f"{name}_raw_sigma"] = v, math.sqrt(v * (1 - v) / dist.shots)
    return row, reports


def cmd_evolve(args, cfg: RunConfig) -> None:
    if args.mitigate and not args.noise:
        raise UsageError("--mitigate needs --noise")
    noise_cfg = None
    if args.noise:
        try:
            noise_cfg = parse_noise(args.noise, cfg.noise)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.shots:
            noise_cfg = replace(noise_cfg, shots=args.shots)
        if args.mode != "trotter":
            raise UsageError("noisy runs execute the Trotter circuit; use --mode trotter")
    times = _times(args)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(times))
    jobs = [(t, cfg.triton, args.variant, args.mode, args.steps, noise_cfg, args.mitigate, s) for t, s in zip(times, seeds)]
    results = _map(cfg, _evolve_point, jobs)
    rows = [r for r, _ in results]
    cols = ["time", "C3", "C2_dyn", "C2_sA"]
    if noise_cfg is not None:
        for name in CONTACT_LABELS:
            cols += [f"{name}_raw", f"{name}_raw_sigma"]
    if args.mitigate:
        for name in CONTACT_LABELS:
            cols += [f"{name}_mitigated", f"{name}_sigma"]
        cols += ["error_count", "filter"]
    extra = None
    if args.mitigate:
        extra = {"triton_evolve_reports.json": [{"time": r["time"], "reports": rep} for r, (_, rep) in zip(rows, results)]}
        if cfg.out is None:
            log.info("mitigation reports are written only with --out")
    meta = {"mode": args.mode, "steps": args.steps, "seed": cfg.seed, "noise": None if noise_cfg is None else noise_cfg.__dict__}
    ys = ["C3", "C2_dyn", "C2_sA"] + (["C3_raw"] if noise_cfg else []) + (["C3_mitigated"] if args.mitigate else [])
    emit(cfg, "triton_evolve", rows, cols, meta, lambda plt, path: plt.line_plot(
        rows, "time", ys, path, ylabel="probability", title=f"{args.mode} evolution",
        errors={"C3_mitigated": "C3_sigma", "C3_raw": "C3_raw_sigma"}), extra)


def cmd_entanglement(args, cfg: RunConfig) -> None:
    from .entanglement import trajectory

    rows = [pt.to_dict() for pt in trajectory(_times(args), cfg.triton, args.mode, args.steps, args.variant)]
    for r in rows:
        r["S_q"] = r.pop("S_0")
    cols = ["time", "S_q", "S_01", "S_03", "C_01", "C_02", "C_03", "EF_03"]
    meta = {"mode": args.mode, "steps": args.steps, "entropy_units": "nats", "EF_units": "bits"}
    emit(cfg, "triton_entanglement", rows, cols, meta, lambda plt, path: plt.line_plot(
        rows, "time", ["S_q", "S_01", "S_03", "C_03", "EF_03"], path, title=f"{args.mode} evolution"))


# ---- mitigation from recorded runs -----------------------------------------


def cmd_mitigate(args, cfg: RunConfig) -> None:
    try:
        runs = json.loads(args.input.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    if not isinstance(runs, list) or not runs:
        raise UsageError("runs file must be a nonempty JSON list")
    try:
        runs = sorted(runs, key=lambda r: int(r["k"]))
        dists = [(int(r["k"]), MeasuredDistribution.from_dict(r["distribution"])) for r in runs]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed run entry: {exc}") from None
    n = dists[0][1].n
    labels = [b.strip() for b in args.observable.split(",")]
    if any(len(b) != n or set(b) - {"0", "1"} for b in labels):
        raise UsageError(f"observable bitstrings must have {n} binary digits")
    cal = ConfusionMatrix.uniform(n, args.p0, args.p1)
    corrected = [correct_readout(d, cal) for _, d in dists]
    fallbacks = sum(c.error_count for c in corrected)
    deco = decoherence_check(corrected)
    points = [(k, *c.observable(labels)) for (k, _), c in zip(dists, corrected)]
    depol = args.depolarized if args.depolarized is not None else len(labels) / 2**n
    report: MitigationReport = mitigate_points(points, depol, fallbacks + deco.error_count)
    report.decohered = deco.decohered
    report.readout_fallbacks = fallbacks
    low = dists[0][1]
    v = float(sum(low.probabilities[int(b, 2)] for b in labels))
    report.raw_value, report.raw_sigma = v, math.sqrt(v * (1 - v) / low.shots)
    doc = report.to_dict()
    doc["filter"] = args.filter
    doc["accepted"] = report.accepted(args.filter)
    doc["ovd"] = list(deco.ovds)
    text = json.dumps(doc, indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "mitigate.json").write_text(text)


# ---- entry point -----------------------------------------------------------


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except UsageError as exc:
        print(f"nucresp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"nucresp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"nucresp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
