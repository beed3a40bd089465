import csv
import json

import pytest

from phcpg.cli import main
from phcpg.experiments import (ConfigError, ExperimentConfig, PRESETS,
                               preset_runs, run_experiment)


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_builtin_preset_catalog_is_complete():
    expected = {
        "toda_varying_degree",
        "toda_varying_degree_different_sampling",
        "toda_varying_quadrature",
        "toda_varying_projection",
        "toda_energybalance",
        "rigid_body_energybalance",
        "rigid_body_varying_degree",
        "rigid_body_varying_degree_different_sampling",
        "damped_wave_nu0_varying_degree",
        "damped_wave_nu1_varying_degree",
        "damped_wave_nu0_varying_degree_different_sampling",
        "damped_wave_nu1_varying_degree_different_sampling",
        "damped_wave_nu0_varying_discretization",
        "damped_wave_nu1_varying_discretization",
        "damped_wave_nu0_energybalance",
        "damped_wave_nu1_energybalance",
    }
    assert expected == set(PRESETS)
    for name in expected:
        runs = preset_runs(name)
        assert runs, name
        for suffix, config in runs:
            assert isinstance(config, ExperimentConfig)


def test_converge_csv_schema_and_content(tmp_path):
    out = tmp_path / "table.csv"
    code = main(["converge", "--model", "toda", "--k", "2", "--sq", "2",
                 "--spi", "2", "--tau", "0.25,0.125", "--T", "1",
                 "--tau-ref", "1e-2", "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["tau", "err_inf", "eoc_inf", "err_nodal", "eoc_nodal"]
    assert len(rows) == 3
    assert rows[1][2] == ""  # first EOC entry is undefined
    assert float(rows[2][2]) > 2.0  # order approaching k + 1


def test_converge_nodal_mode_shares_the_schema(tmp_path):
    out = tmp_path / "nodal.csv"
    code = main(["converge-nodal", "--model", "toda", "--k", "1",
                 "--tau", "0.25,0.125", "--T", "0.5", "--tau-ref", "1e-2",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["tau", "err_inf", "eoc_inf", "err_nodal", "eoc_nodal"]


def test_run_preset_library_call(tmp_path):
    from phcpg.experiments import run_preset
    paths = run_preset("toda_varying_degree", tmp_path,
                       overrides={"tau": (0.25, 0.125), "t_end": 0.5,
                                  "tau_ref": 1e-2})
    assert len(paths) == 4
    assert all(p.exists() for p in paths)
    assert paths[0].name == "toda_varying_degree_k1.csv"


def test_energy_csv_schema(tmp_path):
    out = tmp_path / "energy.csv"
    code = main(["energy", "--model", "rigid_body", "--k", "2", "--spi", "2",
                 "--tau", "0.1", "--T", "0.5", "--newton-tol", "1e-14",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["i", "t_i", "H", "dissipation", "supply", "E"]
    assert len(rows) == 7  # header + initial row + 5 steps
    assert rows[1][3] == ""  # no balance data at t_0
    assert float(rows[-1][5]) <= 1e-11


def test_run_mode_trajectory(tmp_path):
    out = tmp_path / "traj.csv"
    code = main(["run", "--model", "toda", "--N", "2", "--k", "1",
                 "--tau", "0.1", "--T", "0.4", "--tau-ref", "0.1",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["t", "z0", "z1", "z2", "z3", "H"]
    assert len(rows) == 6
    assert float(rows[1][0]) == 0.0 and float(rows[-1][0]) == pytest.approx(0.4)


def test_json_format(tmp_path):
    out = tmp_path / "table.json"
    code = main(["converge", "--model", "toda", "--k", "1", "--tau", "0.25,0.125",
                 "--T", "0.5", "--tau-ref", "1e-2", "--format", "json",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["metadata"]["columns"][0] == "tau"
    assert payload["metadata"]["config"]["model"] == "toda"
    assert len(payload["rows"]) == 2
    assert payload["rows"][0][2] is None


def test_config_round_trip_is_byte_identical(tmp_path):
    config = ExperimentConfig(
        model="toda", mode="converge", k=2, tau=(0.25, 0.125), t_end=1.0,
        tau_ref=1e-2, model_params={"n_particles": 3, "gamma": 0.05},
    )
    first = run_experiment(config, out=tmp_path / "a.csv")
    config.to_file(tmp_path / "config.json")
    reloaded = ExperimentConfig.from_file(tmp_path / "config.json")
    second = run_experiment(reloaded, out=tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_config_file_cli_path(tmp_path):
    config = ExperimentConfig(
        model="rigid_body", mode="energy", k=1, tau=(0.1,), t_end=0.3,
        newton_tol=1e-13,
    )
    config_path = tmp_path / "c.json"
    config.to_file(config_path)
    out = tmp_path / "from_file.csv"
    code = main(["energy", "--config", str(config_path), "--out", str(out)])
    assert code == 0
    assert out.exists()
    # flags override the file
    out2 = tmp_path / "override.csv"
    code = main(["energy", "--config", str(config_path), "--tau", "0.15",
                 "--out", str(out2)])
    assert code == 0
    assert len(_read_csv(out2)) == 4  # header + initial + 2 steps


def test_preset_execution_writes_one_file_per_run(tmp_path, monkeypatch):
    # Shrink a preset's sweep so the test stays fast: run via the library
    # with overridden taus through the CLI flag.
    out_dir = tmp_path / "figs"
    code = main(["energy", "--preset", "rigid_body_energybalance",
                 "--tau", "0.25", "--T", "0.5", "--out", str(out_dir)])
    assert code == 0
    files = sorted(out_dir.glob("*.csv"))
    assert len(files) == 16  # k in 1..4 times s_pi in 1..4
    assert files[0].name == "rigid_body_energybalance_k1_spi1.csv"


def test_mode_mismatch_with_preset_is_a_config_error(tmp_path):
    code = main(["energy", "--preset", "toda_varying_degree",
                 "--out", str(tmp_path)])
    assert code == 1


def test_exit_code_on_bad_config():
    assert main(["converge", "--model", "nosuch", "--k", "2",
                 "--tau", "0.2,0.1", "--out", "x.csv"]) == 1
    assert main(["converge", "--k", "2", "--tau", "0.2,0.1",
                 "--out", "x.csv"]) == 1  # missing model
    assert main(["energy", "--model", "toda", "--k", "2",
                 "--tau", "0.2,0.1", "--out", "x.csv"]) == 1  # tau list in energy mode


def test_exit_code_on_nonconvergence(tmp_path):
    code = main(["energy", "--model", "rigid_body", "--k", "2",
                 "--tau", "0.25", "--T", "1", "--newton-max-iter", "1",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_unknown_config_keys_are_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"model": "toda", "mode": "run", "k": 1,
                                "tau": [0.1], "bogus": 3}))
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.from_file(path)
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o.csv")]) == 1


def test_wave_model_params_through_cli(tmp_path):
    out = tmp_path / "wave.csv"
    code = main(["energy", "--model", "wave", "--N", "4", "--k", "1",
                 "--spi", "2", "--tau", "0.1", "--T", "0.3",
                 "--newton-tol", "1e-13", "--gamma", "0.1", "--nu", "1.0",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert len(rows) == 5
