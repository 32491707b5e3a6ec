"""Run configuration: a flat dotted-key namespace stored as YAML.

Resolution order: defaults, then the preset, then a config file, then
``--set key=value`` overrides.  Every key is listed in ``DEFAULTS``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .grid import Grid, sinh_grid, uniform_grid
from .initial_data import SeedParams
from .solver import SolverConfig
from .transforms import ModelParams, Topography

OUTPUT_ENV = "WAVEBREAK_OUTPUT"

DEFAULTS: dict = {
    "run.name": "run",
    "run.output": "",  # empty: $WAVEBREAK_OUTPUT/<run.name> or ./runs/<run.name>
    "run.save_snapshots": True,
    # seed.kind: constructed | sine | sech | stream | files
    "seed.kind": "constructed",
    "seed.M": 100.0,
    "seed.delta": 0.01,
    "seed.kappa0": 3.0,
    "seed.amplitude": 1.0,
    "seed.width": 1.0,
    "seed.files.w": "",
    "seed.files.z": "",
    "seed.perturb_scale": 0.0,
    "seed.rng": 0,
    "model.H": 1.0,
    "model.eps": 1.0,
    "model.beta_star": 0.0,
    "model.h_min": 0.1,
    "topo.family": "flat",
    "topo.amplitude": 0.0,
    "topo.width": 1.0,
    "topo.center": 0.0,
    "grid.n": 8192,
    "grid.length": 16.0,
    "grid.mapping": "sinh",
    "grid.core": 3.5e-4,
    "solver.cfl": 0.4,
    "solver.stop_slope_factor": 0.05,
    "solver.snapshots_per_decade": 46.0,
    "solver.t_max": float("inf"),
    "solver.max_steps": 2_000_000,
    "solver.frame_speed": "auto",
    "diag.y_max": 1000.0,
    "diag.conv_threshold": 0.1,
    "diag.n_trajectories": 20,
    "diag.rate_band": [0.5, 2.0],
    "diag.bootstrap": True,
    "diag.exact_blowup": None,  # [T*, x*] when known in closed form
    "sweep.axis": "eps",
    "sweep.values": [0.02, 0.04, 0.08, 0.16, 0.32],
    "sweep.workers": 1,
    "sweep.t_max_factor": 40.0,
    "sweep.decades": 0.5,
    "sweep.min_decades": 1.2,
    "sweep.moser_values": [0.0032, 0.01, 0.032, 0.1, 0.32],
}

PRESETS: dict[str, dict] = {
    # exact Burgers data: z = 0, b = 0, w0 = kappa0 - a sin x, T* = 1/a
    "burgers-oracle": {
        "run.name": "burgers-oracle",
        "seed.kind": "sine",
        "seed.amplitude": 1.0,
        "grid.n": 8192,
        "grid.length": 2 * np.pi,
        "grid.mapping": "uniform",
        "diag.y_max": 1.0,
        "diag.rate_band": [0.99, 1.01],
        "diag.bootstrap": False,
    },
    # constructed self-similar seed at t = -delta
    "paper-seed": {
        "run.name": "paper-seed",
        "seed.kind": "constructed",
    },
    # uniform stream over a sinusoidal bottom: breaking driven by beta*
    "topo-sine": {
        "run.name": "topo-sine",
        "seed.kind": "stream",
        "model.eps": 0.0,
        "model.beta_star": 0.08,
        "topo.family": "sine",
        "topo.amplitude": 1.0,
        "topo.width": 4.0,
        "grid.n": 1024,
        "grid.length": 8 * np.pi,
        "grid.mapping": "uniform",
        "diag.bootstrap": False,
        "sweep.axis": "beta_star",
    },
    # small-amplitude simple wave: zeta0 = sech^2, vbar0 = zeta0 / sqrt(H)
    "eps-sweep": {
        "run.name": "eps-sweep",
        "seed.kind": "sech",
        "grid.n": 2048,
        "grid.length": 40.0,
        "grid.mapping": "uniform",
        "sweep.axis": "eps",
        "diag.bootstrap": False,
    },
}


class ConfigError(ValueError):
    pass


def parse_value(text: str):
    """Parse a ``--set`` value with YAML scalar rules (numbers, bools, lists)."""
    val = yaml.safe_load(text)
    if isinstance(val, str) and val.lower() in ("inf", "+inf", ".inf"):
        return float("inf")
    return val


def load_file(path) -> dict:
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return flatten(data)


def flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def resolve(preset: str | None = None, path=None, overrides: dict | None = None) -> dict:
    cfg = dict(DEFAULTS)
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        cfg.update(PRESETS[preset])
        cfg["run.preset"] = preset
    if path:
        cfg.update(load_file(path))
    if overrides:
        cfg.update(overrides)
    unknown = sorted(set(cfg) - set(DEFAULTS) - {"run.preset"})
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    return cfg


def dump(cfg: dict) -> str:
    return yaml.safe_dump({k: _plain(v) for k, v in sorted(cfg.items())}, sort_keys=False)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def config_hash(cfg: dict) -> str:
    """sha256 of the canonical JSON form, excluding keys that do not change numbers."""
    skip = {"run.output", "sweep.workers", "run.name"}
    body = {k: _plain(v) for k, v in cfg.items() if k not in skip}
    text = json.dumps(body, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def output_dir(cfg: dict) -> Path:
    if cfg.get("run.output"):
        return Path(cfg["run.output"])
    root = Path(os.environ.get(OUTPUT_ENV, "runs"))
    return root / str(cfg["run.name"])


@dataclass
class RunConfig:
    """Typed view of a resolved flat config."""

    raw: dict
    seed: SeedParams
    model: ModelParams
    topo: Topography
    solver: SolverConfig
    grid: Grid

    @classmethod
    def from_flat(cls, cfg: dict) -> "RunConfig":
        validate(cfg)
        seed = SeedParams(float(cfg["seed.M"]), float(cfg["seed.delta"]), float(cfg["seed.kappa0"]))
        model = ModelParams(
            float(cfg["model.H"]), float(cfg["model.eps"]), float(cfg["model.beta_star"]), float(cfg["model.h_min"])
        )
        topo = Topography.from_config(cfg)
        grid = make_grid(cfg)
        solver = SolverConfig(
            cfl=float(cfg["solver.cfl"]),
            stop_slope_factor=float(cfg["solver.stop_slope_factor"]),
            snapshots_per_decade=float(cfg["solver.snapshots_per_decade"]),
            t_max=float(cfg["solver.t_max"]),
            max_steps=int(cfg["solver.max_steps"]),
            frame_speed=frame_speed(cfg),
        )
        return cls(cfg, seed, model, topo, solver, grid)


def make_grid(cfg: dict) -> Grid:
    n, length = int(cfg["grid.n"]), float(cfg["grid.length"])
    if cfg["grid.mapping"] == "uniform":
        return uniform_grid(n, length)
    if cfg["grid.mapping"] == "sinh":
        return sinh_grid(n, length, float(cfg["grid.core"]))
    raise ConfigError(f"grid.mapping must be uniform or sinh, got {cfg['grid.mapping']!r}")


def frame_speed(cfg: dict) -> float:
    """Speed of the frame that keeps the steepening point near the grid origin."""
    v = cfg["solver.frame_speed"]
    if v != "auto":
        return float(v)
    kind, k0 = cfg["seed.kind"], float(cfg["seed.kappa0"])
    if kind == "constructed":
        # w - kappa0 vanishes at the origin and z is near its peak 0.25 M delta there
        return k0 + 0.25 * float(cfg["seed.M"]) * float(cfg["seed.delta"]) / 3
    if kind == "sine":
        return k0
    if kind == "stream":
        # mean of the two characteristic speeds kappa0 and kappa0/3 (z = 0)
        return 2 * k0 / 3
    if kind == "sech":
        return float(np.sqrt(cfg["model.H"]))
    return 0.0


SEED_KINDS = ("constructed", "sine", "sech", "stream", "files")


def validate(cfg: dict):
    """Reject inconsistent configs before any computation."""
    kind = cfg["seed.kind"]
    if kind not in SEED_KINDS:
        raise ConfigError(f"seed.kind must be one of {SEED_KINDS}, got {kind!r}")
    has_files = bool(cfg["seed.files.w"]) or bool(cfg["seed.files.z"])
    if (kind == "files") != has_files:
        raise ConfigError("exactly one of the constructed seed or explicit field files must be given")
    if kind == "files" and not (cfg["seed.files.w"] and cfg["seed.files.z"]):
        raise ConfigError("seed.files.w and seed.files.z must both be set")
    d = float(cfg["seed.delta"])
    if not 0 < d < 1:
        raise ConfigError(f"seed.delta must lie in (0, 1), got {d}")
    if not float(cfg["seed.M"]) > np.e:
        raise ConfigError("seed.M must exceed e")
    if int(cfg["grid.n"]) < 16 or int(cfg["grid.n"]) % 2:
        raise ConfigError("grid.n must be an even integer >= 16")
    if not float(cfg["grid.length"]) > 0:
        raise ConfigError("grid.length must be positive")
    if not float(cfg["seed.amplitude"]) > 0 and kind == "sine":
        raise ConfigError("seed.amplitude must be positive")
    if not list(cfg["sweep.values"]):
        raise ConfigError("sweep.values must be nonempty")
    if cfg["sweep.axis"] not in ("eps", "beta_star"):
        raise ConfigError("sweep.axis must be eps or beta_star")
    if int(cfg["sweep.workers"]) < 1:
        raise ConfigError("sweep.workers must be >= 1")
    lo, hi = cfg["diag.rate_band"]
    if not 0 < lo <= 1 <= hi:
        raise ConfigError("diag.rate_band must bracket 1")
