"""Experiment configuration, orchestration, and CSV export.

Config files are flat ``key = value`` text with ``#`` comments.  Keys mirror
the baseline parameter table (dB/dBm units at this boundary only); unknown
keys and out-of-range values fail loudly with the key named.  The documented
schema:

scenario:
    w_s, w_d, w_e                "x, y" node positions in meters
    theta_s_deg, theta_d_deg     directions seen from the array
    delta_theta_deg              mainlobe uncertainty half-width
    p_s_dbm, p0_dbm              source power and probing power budget
    beta0_db                     reference channel gain
    sigma_d2_dbm, sigma_e2_dbm   receiver noise powers
    sigma2                       radar noise power, linear
    alpha, phi, gamma_s, rho, vartheta, tau
    n_t, n_r, spacing_over_wavelength, snapshots
    resolution_deg, detection_range_deg ("lo, hi")
    beta_e_db                    optional jamming-path gain override
    beta_target                  optional "re, im" reflection coefficient

experiment:
    mode                         PEO | TSO_perfect | TSO_robust | JPT |
                                 JPT_zero_interference
    seed, output_dir, workers
    drop_eaves_constraint_at_rho0
    sweep.parameter              delta_theta | n_antennas | rho |
                                 power_budget_dbm
    sweep.values                 comma-separated list

solver.* / srocr.*               interior-point and refinement knobs

Subcommands: ``solve``, ``sweep``, ``beampattern``, ``validate``,
``selftest``.  Sweeps write one row per value into ``results.csv`` plus
``beampattern_<value>.csv`` and ``convergence_<value>.csv``; outputs are
byte-deterministic for a fixed config and seed (wall times are printed, not
written).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import scene
from .fim import SingularFisher, crb, det_crb, fim_oracle, fim_blocks, fisher_matrix, TargetSet
from .problems import MODES, dispatch, fim_map_for, make_grid, run_scheme
from .scene import ScenarioConfig, beampattern as bp_value, gamma_d, gamma_e
from .sdpcore import (
    AffineConstraint,
    LinearFunctional,
    ObjectiveSpec,
    SolverSettings,
    solve as sdp_solve,
)
from .srocr import SrocrSettings, principal_ratio
from .ula import AngleGrid, UlaGeometry, steering, steering_derivative

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "ResultRow",
    "load_config",
    "dump_config",
    "apply_sweep_value",
    "run",
    "beampattern_export",
    "main",
]

SWEEP_PARAMETERS = ("delta_theta", "n_antennas", "rho", "power_budget_dbm")
DB_FLOOR = -120.0


class ConfigError(Exception):
    """Configuration file problem; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a scenario, a scheme, and an optional sweep."""

    scenario: ScenarioConfig
    mode: str = "JPT"
    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] | None = None
    output_dir: str = "results"
    seed: int = 0
    workers: int = 1
    drop_eaves_constraint_at_rho0: bool = False
    solver: SolverSettings = dataclasses.field(default_factory=SolverSettings)
    srocr_max_iter: int = 50
    srocr_delta0_fraction: float = 0.5


@dataclass
class ResultRow:
    """One solved point; mirrors the columns of results.csv plus wall time."""

    sweep_value: float | None
    gamma_d: float
    gamma_e: float
    det_crb: float
    crb_theta: float
    objective: float
    rank_ratio: float
    status: str
    wall_time_ms: float


# ---------------------------------------------------------------------------
# Config parsing


def _parse_pair(text: str, key: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected 'x, y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {text!r}") from None


def _parse_bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: not a boolean: {text!r}")


def _parse_values(text: str, key: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: empty value list")
    return tuple(_parse_float(p, key) for p in parts)


_SCENARIO_KEYS = {
    "w_s", "w_d", "w_e", "theta_s_deg", "theta_d_deg", "delta_theta_deg",
    "p_s_dbm", "p0_dbm", "beta0_db", "sigma_d2_dbm", "sigma_e2_dbm", "sigma2",
    "alpha", "phi", "gamma_s", "rho", "vartheta", "tau", "n_t", "n_r",
    "spacing_over_wavelength", "snapshots", "resolution_deg",
    "detection_range_deg", "beta_e_db", "beta_target",
}
_EXPERIMENT_KEYS = {
    "mode", "seed", "output_dir", "workers", "drop_eaves_constraint_at_rho0",
    "sweep.parameter", "sweep.values",
}
_SOLVER_KEYS = {
    "solver.max_outer", "solver.max_inner", "solver.mu_shrink",
    "solver.mu_min_ratio", "solver.rel_gap", "solver.newton_tol",
    "solver.kkt_tol", "solver.feas_tol",
    "srocr.max_iter", "srocr.delta0_fraction",
}


def _read_pairs(path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in pairs:
            raise ConfigError(f"{key}: specified twice (line {lineno})")
        known = _SCENARIO_KEYS | _EXPERIMENT_KEYS | _SOLVER_KEYS
        if key not in known:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        pairs[key] = value
    return pairs


def load_config(path) -> ExperimentSpec:
    """Load an experiment spec; unspecified keys take the baseline defaults."""
    pairs = _read_pairs(path)

    sc: dict = {}
    if "w_s" in pairs:
        sc["w_s"] = _parse_pair(pairs["w_s"], "w_s")
    if "w_d" in pairs:
        sc["w_d"] = _parse_pair(pairs["w_d"], "w_d")
    if "w_e" in pairs:
        sc["w_e"] = _parse_pair(pairs["w_e"], "w_e")
    for key, name in (
        ("theta_s_deg", "theta_s"),
        ("theta_d_deg", "theta_d"),
        ("delta_theta_deg", "delta_theta"),
        ("resolution_deg", "resolution"),
    ):
        if key in pairs:
            sc[name] = math.radians(_parse_float(pairs[key], key))
    if "detection_range_deg" in pairs:
        lo, hi = _parse_pair(pairs["detection_range_deg"], "detection_range_deg")
        sc["detection_range"] = (math.radians(lo), math.radians(hi))
    for key, name in (("p_s_dbm", "p_s"), ("p0_dbm", "p_0"),
                      ("sigma_d2_dbm", "sigma_d2"), ("sigma_e2_dbm", "sigma_e2")):
        if key in pairs:
            sc[name] = scene.dbm_to_watts(_parse_float(pairs[key], key))
    if "beta0_db" in pairs:
        sc["beta_0"] = scene.db_to_linear(_parse_float(pairs["beta0_db"], "beta0_db"))
    if "beta_e_db" in pairs:
        sc["beta_e"] = scene.db_to_linear(_parse_float(pairs["beta_e_db"], "beta_e_db"))
    if "beta_target" in pairs:
        re_im = _parse_pair(pairs["beta_target"], "beta_target")
        sc["beta_target"] = complex(*re_im)
    for key in ("sigma2", "alpha", "phi", "gamma_s", "rho", "vartheta", "tau",
                "spacing_over_wavelength"):
        if key in pairs:
            sc[key] = _parse_float(pairs[key], key)
    for key in ("n_t", "n_r", "snapshots"):
        if key in pairs:
            sc[key] = _parse_int(pairs[key], key)
    try:
        scenario = ScenarioConfig(**sc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    mode = pairs.get("mode", "JPT")
    if mode not in MODES:
        raise ConfigError(f"mode: unknown scheme {mode!r}, expected one of {MODES}")

    sweep_parameter = pairs.get("sweep.parameter")
    sweep_values = None
    if sweep_parameter is not None:
        if sweep_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                f"sweep.parameter: {sweep_parameter!r} not in {SWEEP_PARAMETERS}"
            )
        if "sweep.values" not in pairs:
            raise ConfigError("sweep.values: required when sweep.parameter is set")
        sweep_values = _parse_values(pairs["sweep.values"], "sweep.values")
        for v in sweep_values:
            _check_sweep_value(sweep_parameter, v)
    elif "sweep.values" in pairs:
        raise ConfigError("sweep.parameter: required when sweep.values is set")

    solver_kwargs: dict = {}
    for key in _SOLVER_KEYS:
        if key in pairs and key.startswith("solver."):
            name = key.split(".", 1)[1]
            if name in ("max_outer", "max_inner"):
                solver_kwargs[name] = _parse_int(pairs[key], key)
            else:
                solver_kwargs[name] = _parse_float(pairs[key], key)
    solver = SolverSettings(**solver_kwargs)

    srocr_max_iter = _parse_int(pairs["srocr.max_iter"], "srocr.max_iter") \
        if "srocr.max_iter" in pairs else 50
    srocr_delta0 = _parse_float(pairs["srocr.delta0_fraction"], "srocr.delta0_fraction") \
        if "srocr.delta0_fraction" in pairs else 0.5
    if not 0.0 < srocr_delta0 <= 1.0:
        raise ConfigError(
            f"srocr.delta0_fraction: must be in (0, 1], got {srocr_delta0}"
        )

    workers = _parse_int(pairs.get("workers", "1"), "workers")
    if workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {workers}")

    return ExperimentSpec(
        scenario=scenario,
        mode=mode,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        output_dir=pairs.get("output_dir", "results"),
        seed=_parse_int(pairs.get("seed", "0"), "seed"),
        workers=workers,
        drop_eaves_constraint_at_rho0=_parse_bool(
            pairs.get("drop_eaves_constraint_at_rho0", "false"),
            "drop_eaves_constraint_at_rho0",
        ),
        solver=solver,
        srocr_max_iter=srocr_max_iter,
        srocr_delta0_fraction=srocr_delta0,
    )


def _check_sweep_value(parameter: str, value: float) -> None:
    if parameter == "rho" and not 0.0 <= value <= 1.0:
        raise ConfigError(f"sweep.values: rho value {value} outside [0, 1]")
    if parameter == "n_antennas":
        if value != int(value) or value < 2:
            raise ConfigError(
                f"sweep.values: antenna count must be an integer >= 2, got {value}"
            )
    if parameter == "delta_theta" and value < 0:
        raise ConfigError(f"sweep.values: delta_theta must be >= 0, got {value}")


def dump_config(spec: ExperimentSpec) -> str:
    """Render the effective configuration; load_config round-trips it."""
    s = spec.scenario
    lines = [
        f"w_s = {s.w_s[0]!r}, {s.w_s[1]!r}",
        f"w_d = {s.w_d[0]!r}, {s.w_d[1]!r}",
        f"w_e = {s.w_e[0]!r}, {s.w_e[1]!r}",
        f"theta_s_deg = {math.degrees(s.theta_s)!r}",
        f"theta_d_deg = {math.degrees(s.theta_d)!r}",
        f"delta_theta_deg = {math.degrees(s.delta_theta)!r}",
        f"resolution_deg = {math.degrees(s.resolution)!r}",
        f"detection_range_deg = {math.degrees(s.detection_range[0])!r}, "
        f"{math.degrees(s.detection_range[1])!r}",
        f"p_s_dbm = {scene.watts_to_dbm(s.p_s)!r}",
        f"p0_dbm = {scene.watts_to_dbm(s.p_0)!r}",
        f"beta0_db = {scene.linear_to_db(s.beta_0)!r}",
        f"sigma_d2_dbm = {scene.watts_to_dbm(s.sigma_d2)!r}",
        f"sigma_e2_dbm = {scene.watts_to_dbm(s.sigma_e2)!r}",
        f"sigma2 = {s.sigma2!r}",
        f"alpha = {s.alpha!r}",
        f"phi = {s.phi!r}",
        f"gamma_s = {s.gamma_s!r}",
        f"rho = {s.rho!r}",
        f"vartheta = {s.vartheta!r}",
        f"tau = {s.tau!r}",
        f"n_t = {s.n_t}",
        f"n_r = {s.n_r}",
        f"spacing_over_wavelength = {s.spacing_over_wavelength!r}",
        f"snapshots = {s.snapshots}",
    ]
    if s.beta_e is not None:
        lines.append(f"beta_e_db = {scene.linear_to_db(s.beta_e)!r}")
    if s.beta_target is not None:
        bt = complex(s.beta_target)
        lines.append(f"beta_target = {bt.real!r}, {bt.imag!r}")
    lines += [
        f"mode = {spec.mode}",
        f"seed = {spec.seed}",
        f"output_dir = {spec.output_dir}",
        f"workers = {spec.workers}",
        f"drop_eaves_constraint_at_rho0 = {str(spec.drop_eaves_constraint_at_rho0).lower()}",
    ]
    if spec.sweep_parameter is not None:
        lines.append(f"sweep.parameter = {spec.sweep_parameter}")
        lines.append(
            "sweep.values = " + ", ".join(repr(v) for v in spec.sweep_values)
        )
    d = spec.solver
    lines += [
        f"solver.max_outer = {d.max_outer}",
        f"solver.max_inner = {d.max_inner}",
        f"solver.mu_shrink = {d.mu_shrink!r}",
        f"solver.mu_min_ratio = {d.mu_min_ratio!r}",
        f"solver.rel_gap = {d.rel_gap!r}",
        f"solver.newton_tol = {d.newton_tol!r}",
        f"solver.kkt_tol = {d.kkt_tol!r}",
        f"solver.feas_tol = {d.feas_tol!r}",
        f"srocr.max_iter = {spec.srocr_max_iter}",
        f"srocr.delta0_fraction = {spec.srocr_delta0_fraction!r}",
    ]
    return "\n".join(lines) + "\n"


def apply_sweep_value(
    scenario: ScenarioConfig, parameter: str, value: float
) -> ScenarioConfig:
    """Scenario with one swept parameter replaced (CLI units)."""
    if parameter == "delta_theta":
        return dataclasses.replace(scenario, delta_theta=math.radians(value))
    if parameter == "n_antennas":
        n = int(value)
        return dataclasses.replace(scenario, n_t=n, n_r=n)
    if parameter == "rho":
        return dataclasses.replace(scenario, rho=value)
    if parameter == "power_budget_dbm":
        return dataclasses.replace(scenario, p_0=scene.dbm_to_watts(value))
    raise ValueError(f"unknown sweep parameter {parameter!r}")


# ---------------------------------------------------------------------------
# Running experiments


def _solve_point(args) -> tuple[ResultRow, np.ndarray | None, list, AngleGrid | None]:
    scenario, mode, solver, srocr_kw, drop_flag, sweep_value = args
    srocr = SrocrSettings(
        vartheta=scenario.vartheta, tau=scenario.tau, **srocr_kw
    )
    t0 = time.perf_counter()
    try:
        if mode == "JPT":
            outcome = dispatch(
                scenario, solver_settings=solver, srocr_settings=srocr,
                drop_eaves_constraint_at_rho0=drop_flag,
            )
        else:
            outcome = run_scheme(
                mode, scenario, solver_settings=solver, srocr_settings=srocr,
                drop_eaves_constraint_at_rho0=drop_flag,
            )
    except Exception as exc:  # recorded per row; the sweep continues
        wall = (time.perf_counter() - t0) * 1e3
        stage = getattr(exc, "stage", None)
        label = type(exc).__name__ + (f"@{stage}" if stage else "")
        print(f"  point {sweep_value}: {label}: {exc}", file=sys.stderr)
        row = ResultRow(
            sweep_value=sweep_value, gamma_d=math.nan, gamma_e=math.nan,
            det_crb=math.nan, crb_theta=math.nan, objective=math.nan,
            rank_ratio=math.nan, status=label, wall_time_ms=wall,
        )
        return row, None, [], None

    wall = (time.perf_counter() - t0) * 1e3
    R = outcome.result.R
    geom = scenario.tx_geometry()
    fmap = fim_map_for(scenario, outcome.grid)
    F = fmap(R)
    # A covariance that puts no power on the target (the pure eavesdropping
    # solution may do this) has an unbounded error bound; those cells stay
    # empty.
    try:
        det_crb_v = det_crb(F)
    except SingularFisher:
        det_crb_v = math.nan
    try:
        crb_theta_v = float(crb(F)[0, 0])
    except SingularFisher:
        crb_theta_v = math.nan
    _, ratio = principal_ratio(R)
    row = ResultRow(
        sweep_value=sweep_value,
        gamma_d=gamma_d(scenario, geom, R),
        gamma_e=gamma_e(scenario),
        det_crb=det_crb_v,
        crb_theta=crb_theta_v,
        objective=outcome.result.objective,
        rank_ratio=ratio,
        status=outcome.result.status,
        wall_time_ms=wall,
    )
    return row, R, outcome.history, outcome.grid


def _format_value(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return f"{value:g}"


def _fmt_cell(x: float) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return repr(x)


def beampattern_export(
    R: np.ndarray, grid: AngleGrid, path, geom: UlaGeometry | None = None
) -> None:
    """Write the gain table of a covariance over the angle grid.

    Gains in dB are floored at -120 so exact nulls stay finite.
    """
    if geom is None:
        geom = UlaGeometry(R.shape[0])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["angle_deg", "gain_linear", "gain_db"])
        for th in grid.angles:
            gain = bp_value(R, steering(geom, float(th)))
            if gain > 10 ** (DB_FLOOR / 10.0):
                gain_db = 10.0 * math.log10(gain)
            else:
                gain_db = DB_FLOOR
            writer.writerow([repr(math.degrees(float(th))), repr(gain), repr(gain_db)])


def _write_convergence(history, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["j", "w", "delta", "opt", "feasible", "ratio"])
        for rec in history:
            writer.writerow([
                rec.iteration, repr(rec.w_target), repr(rec.delta),
                repr(rec.objective), int(rec.feasible), repr(rec.ratio),
            ])


def run(spec: ExperimentSpec) -> list[ResultRow]:
    """Execute the experiment and write CSV artifacts into output_dir."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if spec.sweep_parameter is None:
        points = [(spec.scenario, None, "single")]
    else:
        points = [
            (
                apply_sweep_value(spec.scenario, spec.sweep_parameter, v),
                v,
                _format_value(v),
            )
            for v in spec.sweep_values
        ]

    srocr_kw = {
        "max_iter": spec.srocr_max_iter,
        "delta0_fraction": spec.srocr_delta0_fraction,
    }
    jobs = [
        (scenario, spec.mode, spec.solver, srocr_kw,
         spec.drop_eaves_constraint_at_rho0, value)
        for scenario, value, _ in points
    ]

    if spec.workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(spec.workers) as pool:
            solved = list(pool.map(_solve_point, jobs))
    else:
        solved = [_solve_point(job) for job in jobs]

    rows = []
    with open(out / "results.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([
            "sweep_value", "gamma_d", "gamma_e", "det_crb", "crb_theta",
            "objective", "rank_ratio", "status",
        ])
        for (row, R, history, grid), (_, value, tag) in zip(solved, points):
            rows.append(row)
            writer.writerow([
                "" if value is None else repr(float(value)),
                _fmt_cell(row.gamma_d), _fmt_cell(row.gamma_e),
                _fmt_cell(row.det_crb), _fmt_cell(row.crb_theta),
                _fmt_cell(row.objective), _fmt_cell(row.rank_ratio),
                row.status,
            ])
            if R is not None:
                beampattern_export(
                    R, grid, out / f"beampattern_{tag}.csv",
                    geom=UlaGeometry(R.shape[0], spec.scenario.spacing_over_wavelength),
                )
                _write_convergence(history, out / f"convergence_{tag}.csv")
            print(
                f"  {spec.mode} {tag}: {row.status} objective={row.objective:.6g} "
                f"gamma_d={row.gamma_d:.6g} rank_ratio={row.rank_ratio:.6g} "
                f"({row.wall_time_ms:.0f} ms)"
            )
    return rows


# ---------------------------------------------------------------------------
# Validation / self-test suites


def _check(name: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return ok


def run_validate(spec: ExperimentSpec) -> bool:
    """Scenario-level invariant checks; prints one line per check."""
    s = spec.scenario
    geom = s.tx_geometry()
    rng = np.random.default_rng(spec.seed)
    ok = True

    thetas = rng.uniform(-np.pi / 2, np.pi / 2, size=50)
    mods = [np.abs(steering(geom, th)) for th in thetas]
    ok &= _check(
        "steering entries have unit modulus",
        max(float(np.abs(m - 1.0).max()) for m in mods) <= 1e-12,
    )

    h = 1e-6
    worst = 0.0
    for th in thetas[:20]:
        fd = (steering(geom, th + h) - steering(geom, th - h)) / (2 * h)
        an = steering_derivative(geom, th)
        denom = max(float(np.abs(an).max()), 1e-12)
        worst = max(worst, float(np.abs(fd - an).max()) / denom)
    ok &= _check("steering derivative matches finite differences", worst <= 1e-6,
                 f"worst rel {worst:.2e}")

    grid = make_grid(s)
    union = np.union1d(grid.mainlobe, grid.sidelobe)
    inter = np.intersect1d(grid.mainlobe, grid.sidelobe)
    ok &= _check(
        "mainlobe and sidelobe sets partition the grid",
        union.size == len(grid) and inter.size == 0,
    )

    x = 0.123456
    ok &= _check(
        "dB conversions round-trip",
        abs(scene.db_to_linear(scene.linear_to_db(x)) - x) <= 1e-12 * x
        and abs(scene.dbm_to_watts(scene.watts_to_dbm(x)) - x) <= 1e-12 * x,
    )

    M = rng.standard_normal((s.n_t, s.n_t)) + 1j * rng.standard_normal((s.n_t, s.n_t))
    R = M @ M.conj().T
    a = steering(geom, float(rng.uniform(-1.0, 1.0)))
    direct = bp_value(R, a)
    via_trace = float(np.einsum("ij,ji->", np.outer(a, a.conj()), R).real)
    ok &= _check("beampattern equals the trace functional",
                 abs(direct - via_trace) <= 1e-10 * max(1.0, abs(direct)))

    ok &= _check(
        "jamming never raises the eavesdropped SNR",
        gamma_d(s, geom, R) <= gamma_d(s, geom, np.zeros_like(R)) + 1e-12,
    )

    thr = scene.eaves_threshold(s)
    ok &= _check(
        "threshold sign agrees with the channel-quality comparison",
        (thr > 0) == (not scene.interference_free(s)),
        f"threshold {thr:.4g}",
    )
    return bool(ok)


def run_selftest(seed: int = 0) -> bool:
    """Oracle suites: analytic information matrix, solver, refinement."""
    rng = np.random.default_rng(seed)
    ok = True

    worst = 0.0
    for _ in range(40):
        n = int(rng.choice([2, 4, 8]))
        geom = UlaGeometry(n)
        th = float(rng.uniform(np.radians(-80), np.radians(80)))
        beta = complex(rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        tset = TargetSet(angles=(th,), betas=(beta,))
        Fa = fisher_matrix(fim_blocks(np.outer(w, w.conj()), tset, geom, geom), 1.0)
        Fo = fim_oracle(w, tset, 1.0, geom, geom)
        worst = max(worst, float(np.linalg.norm(Fa - Fo) / np.linalg.norm(Fo)))
    ok &= _check("information matrix matches the numeric oracle", worst <= 1e-6,
                 f"worst rel {worst:.2e}")

    worst = 0.0
    for k in range(10):
        n = int(rng.integers(2, 6))
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        C = (M + M.conj().T) / 2
        eye = LinearFunctional(np.eye(n, dtype=complex))
        if k % 2 == 0:
            p0 = float(rng.uniform(0.5, 2.0))
            res = sdp_solve(
                ObjectiveSpec(linear_weight=1.0, linear_term=LinearFunctional(-C)),
                [AffineConstraint(eye, "<=", p0)], n,
            )
            expect = p0 * max(float(np.linalg.eigvalsh(C)[-1]), 0.0)
            got = -res.objective
        else:
            res = sdp_solve(
                ObjectiveSpec(linear_weight=1.0, linear_term=LinearFunctional(C)),
                [AffineConstraint(eye, "==", 1.0)], n,
            )
            expect = float(np.linalg.eigvalsh(C)[0])
            got = res.objective
        worst = max(worst, abs(got - expect) / max(1.0, abs(expect)))
    ok &= _check("solver matches the dense eigensolver", worst <= 1e-6,
                 f"worst rel {worst:.2e}")

    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    _, ratio = principal_ratio(np.outer(v, v.conj()))
    ok &= _check("principal ratio is 1 on rank-one matrices",
                 abs(ratio - 1.0) <= 1e-12)
    return bool(ok)


# ---------------------------------------------------------------------------
# Entry point


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sensejam",
        description="Probing-covariance design: sensing, jamming-based "
                    "eavesdropping, and their weighted combination.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("solve", True), ("sweep", True), ("beampattern", True),
        ("validate", True), ("selftest", False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("config", help="path to a key = value config file")

    args = parser.parse_args(argv)

    if args.command == "selftest":
        return 0 if run_selftest() else 1

    try:
        spec = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        return 0 if run_validate(spec) else 1

    if args.command == "solve":
        if spec.sweep_parameter is not None:
            print("config error: 'solve' takes a config without a sweep section; "
                  "use 'sweep'", file=sys.stderr)
            return 2
        rows = run(spec)
        return 0 if all(r.status == "Optimal" for r in rows) else 1

    if args.command == "sweep":
        if spec.sweep_parameter is None:
            print("config error: 'sweep' needs sweep.parameter and sweep.values",
                  file=sys.stderr)
            return 2
        rows = run(spec)
        return 0 if all(r.status == "Optimal" for r in rows) else 1

    # beampattern: single solve, beampattern table only
    if spec.sweep_parameter is not None:
        print("config error: 'beampattern' takes a config without a sweep section",
              file=sys.stderr)
        return 2
    single = dataclasses.replace(spec, output_dir=spec.output_dir)
    row, R, _, grid = _solve_point(
        (single.scenario, single.mode, single.solver,
         {"max_iter": single.srocr_max_iter,
          "delta0_fraction": single.srocr_delta0_fraction},
         single.drop_eaves_constraint_at_rho0, None)
    )
    if R is None:
        print(f"solve failed: {row.status}", file=sys.stderr)
        return 1
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    beampattern_export(
        R, grid, out / "beampattern_single.csv",
        geom=UlaGeometry(R.shape[0], spec.scenario.spacing_over_wavelength),
    )
    print(f"  {spec.mode}: {row.status} objective={row.objective:.6g} "
          f"wrote {out / 'beampattern_single.csv'}")
    return 0 if row.status == "Optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
