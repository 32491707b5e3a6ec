"""Compare breaking-time estimators along a sweep axis at several resolutions.

Usage: python3 scripts/lifespan_estimators.py eps-sweep 1024 2048
"""

import sys
from dataclasses import replace

import numpy as np

from wavebreak import config, harness
from wavebreak import diagnostics as dg
from wavebreak.solver import run

DECADES = (1.0, 0.5, 0.3)


def estimates(cfg: dict) -> dict:
    rc = config.RunConfig.from_flat(cfg)
    init = harness.build_initial(rc)
    amp = harness.front_amplitude(init.state, rc.topo, rc.model)
    floor = dg.amplitude_floor(float(rc.grid.dx_local.max()), amp)
    h = run(init.state, rc.topo, rc.model, replace(rc.solver, stop_m=0.5 * floor)).history()
    slope = np.minimum(h["min_slope"], h["min_slope_z"])
    out = {f"dec{d:g}": dg.breaking_time_from_history(h["t"], slope, floor, d) for d in DECADES}
    m = -1.0 / np.where(slope < 0, slope, -np.inf)
    j = np.flatnonzero(m >= floor)[-1]
    out["last_resolved"] = float(h["t"][j] + m[j])
    return out


def main(preset: str, sizes: list[int]):
    for n in sizes:
        base = config.resolve(preset, overrides={"grid.n": n})
        rows = []
        for cfg in harness.sweep_configs(base):
            a = max(float(cfg["model.eps"]), float(cfg["model.beta_star"]))
            rows.append((a, estimates(cfg)))
            print(n, a, {k: round(v * a, 4) for k, v in rows[-1][1].items()}, flush=True)
        for key in rows[0][1]:
            fit = dg.lifespan_regression([(a, 0.0, est[key]) for a, est in rows], min_decades=1.2)
            print(f"n={n} {key}: slope {fit.slope:+.4f}")


if __name__ == "__main__":
    main(sys.argv[1], [int(v) for v in sys.argv[2:]] or [1024])
