import csv
import json
import math
import os

import numpy as np
import pytest

from deepthermal import dense
from deepthermal.cli import main
from deepthermal.config import ExperimentConfig, load_config
from deepthermal.errors import ConfigError
from deepthermal.experiments import (
    checkpoints,
    derive_rng,
    plus_state_correlations,
    run_experiment,
    spreading_profile,
)


def cfg(**kw):
    return ExperimentConfig(**kw)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


# ---------------------------------------------------------------- config

def test_config_defaults_and_validation():
    c = cfg()
    assert c.LA == 2 and c.LB_list == [8]
    for bad in (dict(LA=0), dict(R=-3), dict(mode="x"), dict(experiment="nope"),
                dict(L=7, LA=2, LB_list=[8]), dict(LA1=3, LA=2), dict(t_fit=[1])):
        with pytest.raises(ConfigError):
            cfg(**bad)


def test_config_coercion_and_unknown_keys():
    c = ExperimentConfig.from_dict({"LB_list": "8,16", "alpha": "1,1.5", "N": "4",
                                    "baseline": "true"})
    assert c.LB_list == [8, 16] and c.alpha == [1.0, 1.5] and c.N == 4 and c.baseline
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"N": "2.5"})


def test_load_config_toml_and_overrides(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('experiment = "w1-global"\nLB_list = [4, 6]\nN = 3\nseed = 1\n')
    c = load_config(p, {"seed": "7", "N": None}, experiment="w1-global")
    assert c.LB_list == [4, 6] and c.N == 3 and c.seed == 7
    with pytest.raises(ConfigError):
        load_config(p, experiment="diffusion")
    bad = tmp_path / "bad.toml"
    bad.write_text("N = = 3")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_checkpoints():
    assert checkpoints(cfg(t_max=10)) == [1, 2, 4, 8, 10]
    assert checkpoints(cfg(t_list=[5, 1, 5])) == [1, 5]
    assert checkpoints(cfg(t_max=0)) == [0]


def test_streams_are_independent_of_order():
    a = derive_rng(3, 8, 1, 0).random(4)
    derive_rng(3, 8, 0, 0).random(100)
    assert np.array_equal(a, derive_rng(3, 8, 1, 0).random(4))
    assert not np.array_equal(a, derive_rng(3, 8, 2, 0).random(4))


# ---------------------------------------------------------------- drivers

def test_w1_global_small():
    r = run_experiment(cfg(experiment="w1-global", LB_list=[4, 8], R=200, R_list=[50, 200],
                           N=3, baseline=True, ghe_budget=0))
    w = r.column("mean_w1")
    assert np.all(w >= 0) and len(r.rows) == 6
    assert set(r.column("source")) == {"pe", "ghe"}
    assert r.summary["slope_vs_LB_R200"]["points"] == 2


def test_w1_global_exhaustive_mode():
    r = run_experiment(cfg(experiment="w1-global", LB_list=[4], N=2, mode="exhaustive",
                           observable="npoint:1,2,3,4"))
    assert np.all(r.column("mean_w1") >= 0)


def test_w1_local_and_entropy_small():
    r = run_experiment(cfg(experiment="w1-local", LB_list=[4], t_max=4, R=100, N=2))
    assert list(r.column("t")) == [1, 2, 4]
    assert "corr:1,2_LB4_plateau" in r.summary
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="w1-entropy", LB_list=[4], ghe_budget=10))


def test_page_curve_small():
    r = run_experiment(cfg(experiment="page-curve", LA=4, LB_list=[4], R=100, N=2,
                           ghe_budget=5000))
    s = r.column("pe_mean")
    assert np.all((s >= 0) & (s <= np.arange(1, 5) * math.log(2) + 1e-8))
    assert r.column("ghe_mean_formula")[-1] == 0.0


def test_diffusion_small():
    r = run_experiment(cfg(experiment="diffusion", L=16, t_max=8, N=2))
    assert r.column("t")[0] == 0 and r.summary["norm_max_dev"] < 1e-9
    assert r.column("sigma_x")[0] == pytest.approx(0.5)
    px = r.extra_tables["px.csv"][1]
    assert all(0 <= row[2] <= 1 + 1e-12 for row in px)
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="diffusion", L=7, t_max=2, N=1))


@pytest.mark.parametrize("L", [4, 6, 8])
def test_diffusion_initial_vector_pattern(L):
    # the closed pattern used for L > 12 agrees with the dense Fock-space values
    c = plus_state_correlations(L)
    pattern = np.zeros(2 * L, dtype=complex)
    pattern[L - 1], pattern[L] = 1.0, 1.0j
    assert np.max(np.abs(c / math.sqrt(2) - pattern / math.sqrt(2))) <= 1e-9
    assert np.allclose(plus_state_correlations(14)[[13, 14]], [1, 1j])


def test_spreading_profile_normalized(rng):
    from deepthermal.numerics import haar_special_orthogonal
    r = haar_special_orthogonal(12, rng)
    p = spreading_profile(r, plus_state_correlations(6))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_ghe_cdf_driver():
    r = run_experiment(cfg(experiment="ghe-cdf", LA=4, grid=11, ghe_budget=2000))
    a = r.column("cdf_analytic")
    assert a[0] == 0.0 and a[-1] == 1.0 and np.all(np.diff(a) >= 0)
    one = run_experiment(cfg(experiment="ghe-cdf", LA=1, LA1=1, grid=5, ghe_budget=0))
    assert list(one.column("cdf_analytic")) == [0, 0, 0, 0, 1]


def test_design_distance_and_concentration_small():
    r = run_experiment(cfg(experiment="design-distance", LB_list=[4], N=2, mode="exhaustive",
                           sets="1,2;1,2", ghe_budget=10 ** 4))
    assert abs(r.column("ghe_term")[0] - 1 / 3) < 0.03
    c = run_experiment(cfg(experiment="concentration", LB_list=[4], N=20, R=100,
                           ghe_budget=10 ** 4))
    ex = c.column("exceedance")
    assert np.all((ex >= 0) & (ex <= 1))


# ---------------------------------------------------------------- CLI

def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli([], capsys)[0] == 64
    assert run_cli(["frobnicate"], capsys)[0] == 64
    assert run_cli(["w1-global", "--R", "-3", "--out-dir", str(tmp_path)], capsys)[0] == 2
    assert run_cli(["w1-global", "--no-such-flag"], capsys)[0] == 2
    assert run_cli(["diffusion", "--L", "7", "--t", "2", "--N", "1",
                    "--out-dir", str(tmp_path)], capsys)[0] == 2


def test_cli_outputs_and_manifest(tmp_path, capsys):
    code, path, _ = run_cli(["diffusion", "--L", "64", "--t", "200", "--instances", "5",
                             "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and os.path.isdir(path)
    rows = read_csv(os.path.join(path, "px.csv"))
    sums = {}
    for row in rows:
        sums[row["t"]] = sums.get(row["t"], 0.0) + float(row["p_x"])
    # 12 significant digits per entry bound the reparsed sum error
    assert all(abs(s - 1) < 1e-9 for s in sums.values())
    man = json.load(open(os.path.join(path, "manifest.json")))
    assert man["config"]["L"] == 64 and len(man["instance_seeds"]) == 5
    assert {"config", "code_version", "conventions", "wall_clock_seconds"} <= set(man)


def test_cli_ghe_cdf(tmp_path, capsys):
    code, path, _ = run_cli(["ghe-cdf", "--la", "4", "--grid", "1001", "--ghe-budget", "0",
                             "--out-dir", str(tmp_path)], capsys)
    vals = [float(r["cdf_analytic"]) for r in read_csv(os.path.join(path, "data.csv"))]
    assert code == 0 and len(vals) == 1001
    assert vals[0] == 0 and vals[-1] == 1 and all(b >= a for a, b in zip(vals, vals[1:]))


def test_cli_determinism(tmp_path, capsys):
    conf = tmp_path / "c.toml"
    conf.write_text(f'LB_list = [4, 6]\nN = 2\nR = 100\nout_dir = "{tmp_path}"\n')
    first = run_cli(["w1-global", "--config", str(conf), "--seed", "7"], capsys)[1]
    second = run_cli(["w1-global", "--config", str(conf), "--seed", "7"], capsys)[1]
    assert first != second
    data = [open(os.path.join(p, "data.csv"), "rb").read() for p in (first, second)]
    assert data[0] == data[1]
    third = run_cli(["w1-global", "--config", os.path.join(first, "manifest.json")], capsys)[1]
    assert open(os.path.join(third, "data.csv"), "rb").read() == data[0]
