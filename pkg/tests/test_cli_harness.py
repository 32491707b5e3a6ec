import json

import numpy as np
import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from wavebreak import cli, config, harness
from wavebreak.io import read_csv, sha256, to_jsonable, write_csv

SMALL_ORACLE = ["--preset", "burgers-oracle", "--set", "grid.n=2048"]


# -- config -------------------------------------------------------------------------


def test_resolution_order(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text(yaml.safe_dump({"grid": {"n": 512}, "seed": {"amplitude": 0.5}}))
    cfg = config.resolve("burgers-oracle", f, {"grid.n": 256})
    assert cfg["grid.n"] == 256  # override beats file
    assert cfg["seed.amplitude"] == 0.5  # file beats preset
    assert cfg["grid.mapping"] == "uniform"  # preset beats default


def test_unknown_key_rejected():
    with pytest.raises(config.ConfigError):
        config.resolve(overrides={"grid.nodes": 5})
    with pytest.raises(config.ConfigError):
        config.resolve("no-such-preset")


@pytest.mark.parametrize(
    "key, value",
    [("seed.delta", 1.5), ("seed.M", 2.0), ("grid.n", 15), ("sweep.axis", "H"), ("seed.kind", "files"), ("diag.rate_band", [1.1, 2.0])],
)
def test_validation(key, value):
    with pytest.raises(config.ConfigError):
        config.validate(config.resolve(overrides={key: value}))


def test_hash_ignores_output_only():
    a = config.resolve("paper-seed")
    b = config.resolve("paper-seed", overrides={"run.output": "/elsewhere", "sweep.workers": 8})
    c = config.resolve("paper-seed", overrides={"grid.n": 4096})
    assert config.config_hash(a) == config.config_hash(b) != config.config_hash(c)


def test_dump_roundtrip(tmp_path):
    cfg = config.resolve("topo-sine")
    f = tmp_path / "c.yaml"
    f.write_text(config.dump(cfg))
    assert config.load_file(f) == {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}


@pytest.mark.parametrize("text, value", [("3", 3), ("0.5", 0.5), ("inf", float("inf")), ("[1, 2]", [1, 2]), ("true", True), ("sine", "sine")])
def test_parse_value(text, value):
    assert config.parse_value(text) == value


def test_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv(config.OUTPUT_ENV, str(tmp_path))
    assert config.output_dir(config.resolve("paper-seed")) == tmp_path / "paper-seed"


def test_frame_speeds():
    assert config.frame_speed(config.resolve("burgers-oracle")) == 3.0
    assert config.frame_speed(config.resolve("topo-sine")) == 2.0
    assert config.frame_speed(config.resolve("eps-sweep")) == 1.0
    assert config.frame_speed(config.resolve(overrides={"solver.frame_speed": -0.5})) == -0.5


# -- io -----------------------------------------------------------------------------


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_float_roundtrip(tmp_path_factory, xs):
    p = tmp_path_factory.mktemp("csv") / "a.csv"
    write_csv(p, ["x"], [[x] for x in xs])
    header, data = read_csv(p)
    assert header == ["x"]
    np.testing.assert_array_equal(data[:, 0], xs)


def test_json_has_no_bare_nonfinite():
    text = json.dumps(to_jsonable({"a": float("inf"), "b": np.float64("nan"), "c": np.arange(2)}))
    assert "Infinity" not in text and "NaN" not in text


# -- harness and CLI ----------------------------------------------------------------


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = cli.main(["simulate", *SMALL_ORACLE, "--out", str(out)])
    return out, code


def test_simulate_writes_manifest(small_run):
    out, _ = small_run
    man = json.loads((out / "manifest.json").read_text())
    assert man["error"] is None
    for name, digest in man["files"].items():
        assert sha256(out / name) == digest
    for name in ("trajectory.csv", "modulation.csv", "diagnostics.json", "verdict.json", "config.yaml"):
        assert name in man["files"]


def test_simulate_exit_code_matches_verdict(small_run):
    out, code = small_run
    verdict = json.loads((out / "verdict.json").read_text())
    assert code == (0 if verdict["passed"] else 1)


def test_plotdata_reproduces_plots(small_run, tmp_path):
    out, _ = small_run
    before = {p.name: p.read_bytes() for p in out.glob("plot_*.csv")}
    cli.main(["plotdata", str(out)])
    after = {p.name: p.read_bytes() for p in out.glob("plot_*.csv")}
    assert before == after and before


def test_config_error_exit_code(capsys):
    assert cli.main(["simulate", "--set", "seed.delta=2"]) == 2
    assert "config error" in capsys.readouterr().err


def test_print_config(capsys):
    assert cli.main(["simulate", "--preset", "paper-seed", "--M", "200", "--print-config"]) == 0
    assert "seed.M: 200.0" in capsys.readouterr().out


def test_verify_seed_cli(tmp_path):
    assert cli.main(["verify-seed", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "seed_report.json").exists()
    assert cli.main(["verify-seed", "--M", "50"]) == 1


def test_profile_check_cli():
    assert cli.main(["profile-check"]) == 0


def test_stage_failure_is_recorded(tmp_path):
    # flat data never steepens: the run ends on t_max and diagnostics fail cleanly
    cfg = config.resolve("burgers-oracle", overrides={"seed.amplitude": 1e-9, "grid.n": 256, "solver.t_max": 0.1})
    man = harness.run_single(cfg, tmp_path)
    assert not man.passed
    assert (tmp_path / "manifest.json").exists()


def small_sweep(workers, out):
    cfg = config.resolve(
        "eps-sweep",
        overrides={"grid.n": 512, "sweep.values": [0.04, 0.08, 0.16, 0.32, 0.64], "sweep.workers": workers, "run.output": str(out)},
    )
    return harness.run_sweep(cfg)


def test_sweep_independent_of_workers(tmp_path):
    small_sweep(1, tmp_path / "a")
    small_sweep(2, tmp_path / "b")
    for name in ("sweep.csv", "sweep.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_no_steepening_point():
    row = harness.lifespan_point(config.resolve("eps-sweep", overrides={"model.eps": 0.0}))
    assert row["status"] == "no steepening" and row["T_est"] is None
