"""Run configuration, presets, command drivers and the CLI entry point"""

import math
import os

import pytest

import config
import main as cli
from modules.autonomous_analysis import locate_domain_samples
from modules.errors import ConfigError
from modules.melnikov_homoclinic import LoopSide, loop_condition
from modules.results import read_csv
from modules.survey import PRESETS, build_config, parse_config_file, run
from modules.unperturbed_geometry import DomainTag


# ==================== CONFIGURATION ====================


def test_preset_file_and_overrides_stack(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# fig 6 variant\np3 = 0.8\np-max = 3\np4 = 2.0\n", encoding="utf-8")
    cfg = build_config(repro="fig6a", config_file=str(path), overrides={"p4": 2.5, "p1": None})
    assert cfg.command == "resonance"
    assert cfg.p2 == -0.1
    assert cfg.p3 == 0.8
    assert cfg.p_max == 3
    assert cfg.p4 == 2.5
    assert cfg.p1 == 1.0
    assert cfg.domains == [DomainTag.G1_PLUS]


def test_subcommand_replaces_the_preset_command():
    assert build_config("melnikov", repro="fig6a").command == "melnikov"


def test_every_preset_validates():
    for name in PRESETS:
        assert build_config(repro=name).command == PRESETS[name]["command"]


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        build_config(repro="fig99")


def test_missing_command():
    with pytest.raises(ConfigError, match="no command"):
        build_config(overrides={"p1": 0.5})


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(config.WORKERS_ENV_VAR, "3")
    assert build_config("melnikov").workers == 3
    assert build_config("melnikov", workers=2).workers == 2
    monkeypatch.setenv(config.WORKERS_ENV_VAR, "many")
    with pytest.raises(ConfigError):
        build_config("melnikov")


@pytest.mark.parametrize(
    "command,overrides",
    [
        ("census-plane", {"n_p1": 1, "p1_min": 0.0, "p1_max": 1.0}),
        ("census-plane", {"p2_min": 1.0, "p2_max": 1.0}),
        ("melnikov", {"p4": 0.0}),
        ("separatrix", {"epsilon": 0.0, "p4": 4.0}),
        ("melnikov", {"epsilon": -0.1}),
        ("melnikov", {"p1": math.nan}),
        ("melnikov", {"unknown_key": 1}),
        ("diagram", {"families": "right,sideways"}),
        ("poincare", {"seed_x_min": 1.0, "seed_x_max": 0.0}),
    ],
)
def test_validation_errors(command, overrides):
    with pytest.raises(ConfigError):
        build_config(command, overrides=overrides)


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("command = cycles  # trailing comment\n\nn-seeds = 4\n", encoding="utf-8")
    assert parse_config_file(str(path)) == {"command": "cycles", "n_seeds": "4"}

    path.write_text("p1 0.5\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=":1:"):
        parse_config_file(str(path))
    with pytest.raises(ConfigError, match="not found"):
        parse_config_file(str(tmp_path / "missing.cfg"))


def test_echo_leaves_out_volatile_fields(out_dir):
    cfg = build_config("cycles", overrides={"out_dir": out_dir, "timestamp": False}, workers=2)
    echo = cfg.echo()
    assert not {"out_dir", "workers", "timestamp"} & set(echo)
    assert echo["domains"] == "G1_PLUS,G1_MINUS,G2"
    assert echo["families"] == "right,left"


# ==================== COMMANDS ====================


def test_melnikov_run(out_dir):
    cfg = build_config("melnikov", overrides={"p1": 0.7, "p2": 0.3, "p3": 3.0, "p4": 4.0, "out_dir": out_dir, "timestamp": False})
    result = run(cfg)
    assert not result.partial
    assert [r["side"] for r in result.records] == ["RIGHT", "LEFT"]
    names = sorted(os.path.basename(path) for path in result.files)
    assert names == ["melnikov.csv", "melnikov_profile.csv", "melnikov_profile.svg"]

    meta, rows = read_csv(os.path.join(out_dir, "melnikov.csv"))
    assert meta["command"] == "melnikov"
    assert meta["status"] == "complete"
    assert float(rows[0]["mean"]) == pytest.approx(2 * loop_condition(0.7, 0.3, LoopSide.RIGHT))
    # right loop condition is off its line, so no left-loop tangency value
    assert rows[1]["left_tangency_p3"] == "nan"
    _, profile = read_csv(os.path.join(out_dir, "melnikov_profile.csv"))
    assert len(profile) == 65


def test_cycles_run(out_dir):
    result = run(build_config("cycles", overrides={"p1": 0.9, "p2": 0.0, "samples": 50, "out_dir": out_dir}))
    assert sorted(r["domain"] for r in result.records) == ["G1_MINUS", "G1_PLUS", "G2"]
    _, census = read_csv(os.path.join(out_dir, "cycles_census.csv"))
    assert (census[0]["i"], census[0]["j"], census[0]["k"]) == ("1", "1", "1")
    _, orbits = read_csv(os.path.join(out_dir, "cycles_orbits.csv"))
    assert len(orbits) == 150


def test_census_plane_is_independent_of_workers(tmp_path):
    grid = {"p1_min": 0.0, "p1_max": 2.0, "n_p1": 3, "p2_min": 0.0, "p2_max": 1.0, "n_p2": 3, "timestamp": False}
    outputs = []
    for workers in (1, 2):
        out = str(tmp_path / f"w{workers}")
        result = run(build_config("census-plane", overrides={**grid, "out_dir": out}, workers=workers))
        assert result.cell_count == 9
        with open(os.path.join(out, "census.csv"), "rb") as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1]


def test_resonance_run(out_dir):
    result = run(build_config(repro="fig6a", overrides={"out_dir": out_dir}))
    classes = {(r["domain"], r["p"]): r["class"] for r in result.records}
    assert classes[("G1_PLUS", 2)] == "IMPASSABLE"
    _, rows = read_csv(os.path.join(out_dir, "resonance.csv"))
    assert len(rows) == result.cell_count


def test_poincare_and_portrait_runs(tmp_path):
    seeds = {"n_seeds": 3, "epsilon": 0.1, "p3": 0.5, "p4": 2.0}
    poincare = run(build_config("poincare", overrides={**seeds, "iterates": 5, "skip": 2, "out_dir": str(tmp_path / "p")}))
    assert poincare.grid["escaped"] == []
    assert poincare.cell_count == 9
    assert {r["iterate"] for r in poincare.records} == {3, 4, 5}

    portrait = run(build_config("portrait", overrides={**seeds, "t_end": 5.0, "samples": 20, "out_dir": str(tmp_path / "q")}))
    assert portrait.cell_count == 60


def test_analytic_diagram_run(out_dir):
    overrides = {"p1": 0.78, "p4": 4.0, "p2_min": -1.0, "p2_max": 2.5, "n_p2": 3, "out_dir": out_dir}
    result = run(build_config("diagram", overrides=overrides))
    labels = sorted(r["label"] for r in result.records)
    assert labels == ["M1", "M1'", "M2", "M2'", "M3", "M3'"]
    _, points = read_csv(os.path.join(out_dir, "diagram_points.csv"))
    vertex = [p for p in points if p["label"] == "M2xM3"]
    assert len(vertex) == 1
    assert float(vertex[0]["p3"]) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.slow
def test_separatrix_run(out_dir):
    result = run(build_config(repro="fig8b", overrides={"budget": 3.0, "out_dir": out_dir}))
    assert [r["family"] for r in result.records] == ["right", "left", "right_to_left", "left_to_right"]
    assert set(result.grid) == {"unstable_right", "unstable_left", "stable_right", "stable_left"}


def test_single_cell_census_at_a_domain_sample(out_dir):
    p1, p2 = locate_domain_samples()["D12"]
    overrides = {"p1_min": p1, "p1_max": p1, "n_p1": 1, "p2_min": p2, "p2_max": p2, "n_p2": 1, "out_dir": out_dir}
    result = run(build_config("census-plane", overrides=overrides))
    assert result.cell_count == 1
    record = result.records[0]
    assert (record["i"], record["j"], record["k"]) == (2, 0, 0)
    assert "D12" in record["domains"].split("|")


# ==================== CLI ====================


def test_main_runs_a_command(out_dir):
    argv = ["--out", out_dir, "--no-timestamp", "melnikov", "--p1", "0.7", "--p2", "0.3", "--p3", "3", "--p4", "4"]
    assert cli.main(argv) == config.EXIT_OK
    assert os.path.exists(os.path.join(out_dir, "melnikov.csv"))


def test_main_reports_config_errors(out_dir):
    assert cli.main(["--out", out_dir, "--set", "bogus=1", "melnikov"]) == config.EXIT_CONFIG_ERROR
    assert cli.main(["--out", out_dir, "melnikov", "--p4", "0"]) == config.EXIT_CONFIG_ERROR


def test_main_needs_a_command():
    with pytest.raises(SystemExit):
        cli.main([])
