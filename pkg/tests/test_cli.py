import csv
import math
from pathlib import Path

import numpy as np
import pytest

from sensejam import ScenarioConfig, UlaGeometry, angle_grid, make_grid, steering
from sensejam.cli import (
    ConfigError,
    apply_sweep_value,
    beampattern_export,
    dump_config,
    load_config,
    main,
    run,
)
from conftest import EAVES_THRESHOLD

SMALL_LINES = [
    "n_t = 4",
    "n_r = 4",
    "resolution_deg = 5",
    "delta_theta_deg = 10",
]


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def test_empty_config_gives_baseline_defaults(tmp_path):
    spec = load_config(_write(tmp_path, "empty.cfg", ["# nothing here"]))
    s = spec.scenario
    assert s.w_s == (500.0, 0.0)
    assert s.w_d == (250.0, 250.0)
    assert math.isclose(s.theta_d, math.radians(45.0))
    assert s.n_t == 12 and s.n_r == 12
    assert s.p_0 == 1.0 and s.p_s == 1.0
    assert s.sigma_d2 == pytest.approx(1e-11)
    assert s.beta_0 == pytest.approx(1e-3)
    assert s.tau == 0.999 and s.vartheta == 1e-4
    assert spec.mode == "JPT"
    assert spec.sweep_parameter is None


def test_unit_conversions_on_load(tmp_path):
    spec = load_config(_write(tmp_path, "u.cfg", ["p0_dbm = 30", "beta0_db = -30"]))
    assert math.isclose(spec.scenario.p_0, 1.0, rel_tol=1e-12)
    assert math.isclose(spec.scenario.beta_0, 1e-3, rel_tol=1e-12)


def test_out_of_range_value_names_key(tmp_path):
    with pytest.raises(ConfigError, match="rho"):
        load_config(_write(tmp_path, "bad.cfg", ["rho = 1.5"]))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="power_budget"):
        load_config(_write(tmp_path, "bad.cfg", ["power_budget = 3"]))


def test_duplicate_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="rho"):
        load_config(_write(tmp_path, "dup.cfg", ["rho = 0.5", "rho = 0.7"]))


def test_sweep_validation(tmp_path):
    with pytest.raises(ConfigError, match="sweep.values"):
        load_config(_write(tmp_path, "s1.cfg", ["sweep.parameter = rho"]))
    with pytest.raises(ConfigError, match="sweep.parameter"):
        load_config(_write(tmp_path, "s2.cfg", ["sweep.values = 1, 2"]))
    with pytest.raises(ConfigError, match="antenna"):
        load_config(_write(tmp_path, "s3.cfg", [
            "sweep.parameter = n_antennas", "sweep.values = 2.5, 4",
        ]))
    with pytest.raises(ConfigError, match="rho value"):
        load_config(_write(tmp_path, "s4.cfg", [
            "sweep.parameter = rho", "sweep.values = 0.5, 2.0",
        ]))


def test_mode_validation(tmp_path):
    with pytest.raises(ConfigError, match="mode"):
        load_config(_write(tmp_path, "m.cfg", ["mode = nope"]))


def test_dump_load_round_trip(tmp_path):
    base = load_config(_write(tmp_path, "a.cfg", [
        "mode = TSO_robust",
        "rho = 0.25",
        "theta_d_deg = 45",
        "sweep.parameter = delta_theta",
        "sweep.values = 0, 3, 5",
        "beta_target = 0.5, -0.25",
        "solver.rel_gap = 1e-9",
    ]))
    dumped = dump_config(base)
    again = load_config(_write(tmp_path, "b.cfg", dumped.splitlines()))
    # one dump/load cycle is a fixed point
    assert dump_config(again) == dumped
    assert again.mode == base.mode
    assert again.sweep_values == base.sweep_values
    assert again.solver == base.solver
    assert math.isclose(again.scenario.theta_d, base.scenario.theta_d,
                        rel_tol=1e-15)
    assert again.scenario.beta_target == base.scenario.beta_target


def test_apply_sweep_value_each_parameter():
    s = ScenarioConfig()
    assert apply_sweep_value(s, "rho", 0.75).rho == 0.75
    assert apply_sweep_value(s, "n_antennas", 8).n_t == 8
    assert apply_sweep_value(s, "n_antennas", 8).n_r == 8
    assert math.isclose(
        apply_sweep_value(s, "delta_theta", 3.0).delta_theta, math.radians(3.0)
    )
    assert math.isclose(
        apply_sweep_value(s, "power_budget_dbm", 33.0).p_0, 10 ** 0.3, rel_tol=1e-12
    )
    with pytest.raises(ValueError):
        apply_sweep_value(s, "bogus", 1.0)


def test_beampattern_export_constant_and_floor(tmp_path):
    grid = angle_grid((-math.pi / 2, math.pi / 2), math.radians(1.0),
                      0.0, 0.0, math.radians(45.0))
    n = 12
    path = tmp_path / "bp.csv"
    beampattern_export(np.eye(n, dtype=complex), grid, path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 181
    assert all(float(r["gain_linear"]) == pytest.approx(n) for r in rows)

    beampattern_export(np.zeros((n, n)), grid, path)
    rows = list(csv.DictReader(path.open()))
    assert all(float(r["gain_db"]) == -120.0 for r in rows)


def test_run_single_peo(tmp_path):
    cfg = _write(tmp_path, "peo.cfg", SMALL_LINES + [
        "mode = PEO",
        f"output_dir = {tmp_path / 'out'}",
    ])
    rows = run(load_config(cfg))
    assert len(rows) == 1
    row = rows[0]
    assert row.status == "Optimal"
    assert abs(row.objective - EAVES_THRESHOLD) / EAVES_THRESHOLD <= 1e-6
    assert abs(row.gamma_d - row.gamma_e) / row.gamma_e <= 1e-6
    out = tmp_path / "out"
    assert (out / "results.csv").exists()
    assert (out / "beampattern_single.csv").exists()
    assert (out / "convergence_single.csv").exists()


def test_run_sweep_continues_past_failures(tmp_path):
    # At -20 dBm the required jamming gain exceeds the whole budget, so the
    # first row fails; the second succeeds.
    cfg = _write(tmp_path, "sweep.cfg", SMALL_LINES + [
        "mode = PEO",
        "sweep.parameter = power_budget_dbm",
        "sweep.values = -20, 30",
        f"output_dir = {tmp_path / 'out'}",
    ])
    rows = run(load_config(cfg))
    assert len(rows) == 2
    assert rows[0].status.startswith("EavesdropInfeasible")
    assert rows[1].status == "Optimal"

    with (tmp_path / "out" / "results.csv").open() as f:
        table = list(csv.DictReader(f))
    assert len(table) == 2
    assert table[0]["gamma_d"] == ""  # failed rows leave numeric cells empty
    for record in table:
        for key, cell in record.items():
            if key == "status" or cell == "":
                continue
            assert math.isfinite(float(cell))


def test_run_outputs_are_deterministic(tmp_path):
    lines = SMALL_LINES + ["mode = TSO_perfect"]
    cfg1 = _write(tmp_path, "d1.cfg", lines + [f"output_dir = {tmp_path / 'o1'}"])
    cfg2 = _write(tmp_path, "d2.cfg", lines + [f"output_dir = {tmp_path / 'o2'}"])
    run(load_config(cfg1))
    run(load_config(cfg2))
    for name in ("results.csv", "beampattern_single.csv", "convergence_single.csv"):
        b1 = (tmp_path / "o1" / name).read_bytes()
        b2 = (tmp_path / "o2" / name).read_bytes()
        assert b1 == b2


def test_main_subcommand_contracts(tmp_path):
    sweep_cfg = _write(tmp_path, "sw.cfg", SMALL_LINES + [
        "mode = TSO_perfect",
        "sweep.parameter = rho",
        "sweep.values = 0.5",
        f"output_dir = {tmp_path / 'x'}",
    ])
    assert main(["solve", str(sweep_cfg)]) == 2  # sweeps need the sweep command

    single_cfg = _write(tmp_path, "one.cfg", SMALL_LINES + [
        "mode = TSO_perfect",
        f"output_dir = {tmp_path / 'y'}",
    ])
    assert main(["sweep", str(single_cfg)]) == 2
    assert main(["validate", str(single_cfg)]) == 0
    assert main(["solve", str(single_cfg)]) == 0
    assert main(["beampattern", str(single_cfg)]) == 0
    assert (tmp_path / "y" / "beampattern_single.csv").exists()
    assert main(["solve", str(tmp_path / "missing.cfg")]) == 2


def test_workers_parallel_sweep_matches_serial(tmp_path):
    base = SMALL_LINES + [
        "mode = TSO_perfect",
        "sweep.parameter = rho",
        "sweep.values = 0.25, 0.75",
    ]
    cfg_serial = _write(tmp_path, "ser.cfg", base + [
        f"output_dir = {tmp_path / 'ser'}", "workers = 1",
    ])
    cfg_par = _write(tmp_path, "par.cfg", base + [
        f"output_dir = {tmp_path / 'par'}", "workers = 2",
    ])
    run(load_config(cfg_serial))
    run(load_config(cfg_par))
    assert (tmp_path / "ser" / "results.csv").read_bytes() == \
        (tmp_path / "par" / "results.csv").read_bytes()
