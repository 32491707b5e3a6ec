"""Command line: simulate, sweep, verify-seed, profile-check, plotdata.

Exit code 0 iff every evaluated assertion passes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import harness, profile
from .initial_data import SeedParams, build_seed, verify_seed
from .io import to_jsonable, write_json


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = config_mod.parse_value(v)
    for flag, key in (("M", "seed.M"), ("delta", "seed.delta"), ("kappa0", "seed.kappa0"), ("workers", "sweep.workers"), ("out", "run.output")):
        v = getattr(args, flag, None)
        if v is not None:
            out[key] = v
    return out


def _resolve(args) -> dict:
    return config_mod.resolve(args.preset, args.config, _overrides(args))


def _common(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=sorted(config_mod.PRESETS))
    p.add_argument("--config", help="YAML file with flat dotted keys (nesting also accepted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one key; repeatable")
    p.add_argument("--out", help="output directory (default $%s/<run.name>)" % config_mod.OUTPUT_ENV)
    p.add_argument("--M", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--kappa0", type=float)
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    if args.print_config:
        print(config_mod.dump(cfg), end="")
        return 0
    man = harness.run_single(cfg)
    print(json.dumps(to_jsonable({"output": str(config_mod.output_dir(cfg)), "passed": man.passed, "verdict": man.verdict, "error": man.error}), indent=2))
    return 0 if man.passed else 1


def cmd_sweep(args) -> int:
    cfg = _resolve(args)
    if args.print_config:
        print(config_mod.dump(cfg), end="")
        return 0
    res = harness.run_sweep(cfg)
    print(json.dumps(to_jsonable(res), indent=2))
    return 0 if res["passed"] else 1


def cmd_verify_seed(args) -> int:
    p = SeedParams(args.M if args.M is not None else 100.0, args.delta if args.delta is not None else 0.01, args.kappa0 if args.kappa0 is not None else 3.0)
    seed = build_seed(p)
    rep = verify_seed(seed)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        seed.save(out / "seed.csv")
        write_json(out / "seed_report.json", rep.to_dict())
    for c in rep.checks:
        print(f"{'ok  ' if c.passed else 'FAIL'} {c.name:<40} {c.region:<10} margin {c.margin:+.3e}")
    print("passed" if rep.passed else "failed")
    return 0 if rep.passed else 1


def cmd_profile_check(args) -> int:
    y = np.concatenate([-np.geomspace(1e6, 1e-6, args.n // 2), np.geomspace(1e-6, 1e6, args.n - args.n // 2)])
    rep = profile.check_profile_bounds(y)
    ids = profile.profile_identities(y)
    tay = ids["taylor"]
    id_checks = [
        ("cubic residual < 1e-12", ids["cubic_residual"] < 1e-12, ids["cubic_residual"]),
        ("ODE residual < 1e-10", ids["ode_residual"] < 1e-10, ids["ode_residual"]),
        ("dW(0) = -1", abs(tay["d1"] + 1) <= 1e-8, tay["d1"]),
        ("d3W(0) = 6", abs(tay["d3"] - 6) <= 1e-8, tay["d3"]),
        ("even derivatives vanish at 0", max(abs(tay["d2"]), abs(tay["d4"])) <= 1e-8, max(abs(tay["d2"]), abs(tay["d4"]))),
    ]
    for name, ok, val in id_checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name:<60} value {val:.3e}")
    for b in rep.checks:
        print(f"{'ok  ' if b.passed else 'FAIL'} {b.name:<60} violations {b.n_fail}")
    for k, v in rep.fitted_constants.items():
        print(f"     fitted {k} = {v:.4g} (cap {rep.constant_cap:g})")
    passed = rep.passed and all(ok for _, ok, _ in id_checks)
    print("passed" if passed else "failed")
    return 0 if passed else 1


def cmd_plotdata(args) -> int:
    res = harness.replot(args.run_dir)
    for f in res["files"]:
        print(f)
    for a in res["absent"]:
        print(f"absent: {a}")
    for a in res["disabled"]:
        print(f"disabled: {a}")
    print("passed" if res["passed"] else "failed")
    return 0 if res["passed"] and not res["absent"] else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="wavebreak", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("simulate", help="run one configuration end to end")
    _common(p)
    p.set_defaults(fn=cmd_simulate)
    p = sub.add_parser("sweep", help="lifespan sweep along eps or beta*")
    _common(p)
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("verify-seed", help="build and check the constructed initial data")
    p.add_argument("--M", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--kappa0", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_verify_seed)
    p = sub.add_parser("profile-check", help="identities and decay bounds of the stable profile")
    p.add_argument("--n", type=int, default=10_000)
    p.set_defaults(fn=cmd_profile_check)
    p = sub.add_parser("plotdata", help="re-emit plot CSVs from a saved run directory")
    p.add_argument("run_dir")
    p.set_defaults(fn=cmd_plotdata)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
