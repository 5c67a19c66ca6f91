"""Run configuration from an INI file, the environment and command-line flags.

Precedence, highest first: explicit flags, ``NUCRESP_SEED``, the config file,
built-in defaults.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .lattice_model import LatticeSpec
from .readout import ConfusionMatrix
from .simulator import NoiseModel
from .triton import TritonParams

SEED_ENV = "NUCRESP_SEED"


@dataclass(frozen=True)
class NoiseConfig:
    p2: float = 0.02
    p0: float = 0.03
    p1: float = 0.03
    shots: int = 8192

    def model(self, n: int = 4) -> NoiseModel:
        return NoiseModel(self.p2, ConfusionMatrix.uniform(n, self.p0, self.p1))


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out: Path | None = None
    fmt: str = "csv"
    jobs: int = 1
    plot: bool = True
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    triton: TritonParams = field(default_factory=TritonParams)
    noise: NoiseConfig = field(default_factory=NoiseConfig)


def _coerce(cls, section: configparser.SectionProxy, base):
    kw = {}
    for f in fields(cls):
        if f.name in section:
            kind = type(getattr(base, f.name))
            kw[f.name] = kind(section[f.name]) if kind is not bool else section.getboolean(f.name)
    return replace(base, **kw)


def parse_noise(text: str, base: NoiseConfig = NoiseConfig()) -> NoiseConfig:
    """``defaults`` or comma-separated ``p2=..,readout=..,p0=..,p1=..``."""
    if text.strip() in ("", "defaults", "default"):
        return base
    kw = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"bad noise item {item!r}")
        key = key.strip()
        if key == "readout":
            kw["p0"] = kw["p1"] = float(val)
        elif key in ("p2", "p0", "p1"):
            kw[key] = float(val)
        else:
            raise ValueError(f"unknown noise key {key!r}")
    return replace(base, **kw)


def load(path: str | Path | None = None, env: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise FileNotFoundError(f"config file {path} not found")
        if cp.has_section("run"):
            run = cp["run"]
            cfg = replace(
                cfg,
                seed=run.getint("seed", cfg.seed),
                out=Path(run["out"]) if "out" in run else cfg.out,
                fmt=run.get("format", cfg.fmt),
                jobs=run.getint("jobs", cfg.jobs),
                plot=run.getboolean("plot", cfg.plot),
            )
        if cp.has_section("lattice"):
            sec = cp["lattice"]
            lat = _coerce(LatticeSpec, sec, cfg.lattice)
            if "M" in sec:
                lat = LatticeSpec.for_sites(sec.getint("M"), lat.D).with_(**{
                    f.name: getattr(lat, f.name) for f in fields(LatticeSpec) if f.name not in ("D", "N_L")
                })
            cfg = replace(cfg, lattice=lat)
        if cp.has_section("triton"):
            cfg = replace(cfg, triton=_coerce(TritonParams, cp["triton"], cfg.triton))
        if cp.has_section("noise"):
            cfg = replace(cfg, noise=_coerce(NoiseConfig, cp["noise"], cfg.noise))
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        cfg = replace(cfg, seed=int(env[SEED_ENV]))
    return cfg
