"""Builders and drivers for the five covariance programs.

The schemes, by the names used in result tables:

* ``PEO``   - eavesdropping only: minimize the beampattern toward D subject
  to the success threshold (the smallest jamming level that caps D's SNR at
  the monitor's).
* ``TSO_perfect`` / ``TSO_robust`` - sensing only: minimize the determinant
  of the estimation-error bound with a dominant gain toward the target;
  the robust variant adds a ripple-bounded mainlobe across the uncertainty
  window.
* ``JPT``   - joint: weighted sum of both objectives, each normalized by
  the corresponding single-objective optimum.
* ``JPT_zero_interference`` - when the monitor's channel is already the
  better one, no jamming is needed and the joint program degenerates to
  sensing with a hard null toward D.

Every program is solved as a relaxation over PSD covariances and then
refined to rank one (see :mod:`sensejam.srocr`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fim import TargetSet, det_crb, fim_blocks, fisher_matrix
from .scene import ScenarioConfig, eaves_threshold, interference_free
from .sdpcore import (
    OPTIMAL,
    AffineConstraint,
    LinearFunctional,
    ObjectiveSpec,
    SolveResult,
    SolverSettings,
    solve,
)
from .srocr import SrocrRecord, SrocrSettings, srocr_refine
from .ula import AngleGrid, angle_grid, steering

__all__ = [
    "MODES",
    "EavesdropInfeasible",
    "Normalizers",
    "PipelineOutcome",
    "make_grid",
    "target_set",
    "fim_map_for",
    "build_pe_only",
    "build_ts_perfect",
    "build_ts_robust",
    "compute_normalizers",
    "build_joint",
    "build_zero_interference",
    "run_scheme",
    "dispatch",
]

MODES = ("PEO", "TSO_perfect", "TSO_robust", "JPT", "JPT_zero_interference")


class EavesdropInfeasible(Exception):
    """The required jamming level toward D exceeds what the power budget can
    deliver; there is no covariance that makes eavesdropping succeed."""


@dataclass(frozen=True)
class Normalizers:
    """Single-objective optima used to normalize the joint objective."""

    i_tilde: float
    det_phi_tilde: float

    def __post_init__(self) -> None:
        for name in ("i_tilde", "det_phi_tilde"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")


@dataclass
class PipelineOutcome:
    """Everything one scheme run produces."""

    kind: str
    grid: AngleGrid
    sdr: SolveResult
    result: SolveResult
    history: list[SrocrRecord] = field(default_factory=list)
    normalizers: Normalizers | None = None


def make_grid(config: ScenarioConfig) -> AngleGrid:
    return angle_grid(
        config.detection_range,
        config.resolution,
        config.theta_s,
        config.delta_theta,
        config.theta_d,
    )


def target_set(config: ScenarioConfig, grid: AngleGrid | None = None) -> TargetSet:
    """Single sensing target at the (snapped) target direction."""
    theta = grid.theta_s if grid is not None else config.theta_s
    return TargetSet(angles=(theta,), betas=(config.beta_target_value,))


def fim_map_for(config: ScenarioConfig, grid: AngleGrid | None = None):
    """Linear map R -> information matrix for the scenario's single target."""
    targets = target_set(config, grid)
    geom_t = config.tx_geometry()
    geom_r = config.rx_geometry()
    sigma2 = config.sigma2
    snapshots = config.snapshots

    def fmap(R: np.ndarray) -> np.ndarray:
        return fisher_matrix(fim_blocks(R, targets, geom_t, geom_r), sigma2, snapshots)

    return fmap


def default_start(config: ScenarioConfig) -> np.ndarray:
    """Identity start strictly inside the trace cap and the cone."""
    n = config.n_t
    return config.p_0 / (2.0 * n) * np.eye(n, dtype=complex)


def _gain(config: ScenarioConfig, theta: float) -> LinearFunctional:
    a = steering(config.tx_geometry(), theta)
    return LinearFunctional(np.outer(a, a.conj()))


def _trace_cap(config: ScenarioConfig) -> AffineConstraint:
    eye = np.eye(config.n_t, dtype=complex)
    return AffineConstraint(LinearFunctional(eye), "<=", config.p_0)


def _sidelobe_gap(config: ScenarioConfig, grid: AngleGrid, indices) -> list[AffineConstraint]:
    a_s = steering(config.tx_geometry(), grid.theta_s)
    c_s = np.outer(a_s, a_s.conj())
    cons = []
    for i in indices:
        a_n = steering(config.tx_geometry(), float(grid.angles[i]))
        coeff = c_s - np.outer(a_n, a_n.conj())
        cons.append(AffineConstraint(LinearFunctional(coeff), ">=", config.gamma_s))
    return cons


def _mainlobe_ripple(config: ScenarioConfig, grid: AngleGrid) -> list[AffineConstraint]:
    geom = config.tx_geometry()
    a_s = steering(geom, grid.theta_s)
    c_s = np.outer(a_s, a_s.conj())
    cons = []
    for i in grid.mainlobe:
        if i == grid.target_index:
            continue
        a_m = steering(geom, float(grid.angles[i]))
        c_m = np.outer(a_m, a_m.conj())
        cons.append(
            AffineConstraint(LinearFunctional(c_m - (1.0 + config.phi) * c_s), "<=", 0.0)
        )
        cons.append(
            AffineConstraint(LinearFunctional(c_m - (1.0 - config.phi) * c_s), ">=", 0.0)
        )
    return cons


def build_pe_only(
    config: ScenarioConfig, grid: AngleGrid
) -> tuple[ObjectiveSpec, list[AffineConstraint]]:
    """Eavesdropping-only program: minimize the gain toward D above the
    success threshold.

    Raises:
        EavesdropInfeasible: the threshold exceeds the largest gain the
            power budget allows (n_t * p_0).
        ValueError: the scenario needs no jamming (threshold <= 0), which
            makes this program vacuous.
    """
    thr = eaves_threshold(config)
    if thr <= 0:
        raise ValueError(
            "eavesdropping succeeds without jamming here; the "
            "eavesdropping-only program is vacuous (use the zero-interference scheme)"
        )
    max_gain = config.n_t * config.p_0
    if thr > max_gain:
        raise EavesdropInfeasible(
            f"required gain {thr:.6g} toward D exceeds the budget's maximum {max_gain:.6g}"
        )
    gain_d = _gain(config, grid.theta_d)
    objective = ObjectiveSpec(linear_weight=1.0, linear_term=gain_d)
    constraints = [
        AffineConstraint(gain_d, ">=", thr),
        _trace_cap(config),
    ]
    return objective, constraints


def _detinv_objective(config: ScenarioConfig, grid: AngleGrid) -> ObjectiveSpec:
    fmap = fim_map_for(config, grid)
    scale = det_crb(fmap(default_start(config)))
    return ObjectiveSpec(detinv_weight=1.0, fim_map=fmap, detinv_scale=scale)


def build_ts_perfect(
    config: ScenarioConfig, grid: AngleGrid
) -> tuple[ObjectiveSpec, list[AffineConstraint]]:
    """Sensing-only program with an exactly known target direction."""
    constraints = [_trace_cap(config)]
    constraints += _sidelobe_gap(config, grid, grid.all_but_target)
    return _detinv_objective(config, grid), constraints


def build_ts_robust(
    config: ScenarioConfig, grid: AngleGrid
) -> tuple[ObjectiveSpec, list[AffineConstraint]]:
    """Sensing-only program with a ripple-bounded mainlobe over the
    uncertainty window; collapses to the perfect-direction program when the
    window is empty."""
    constraints = [_trace_cap(config)]
    constraints += _sidelobe_gap(config, grid, grid.sidelobe)
    constraints += _mainlobe_ripple(config, grid)
    return _detinv_objective(config, grid), constraints


def compute_normalizers(
    config: ScenarioConfig,
    grid: AngleGrid,
    robust: bool,
    solver_settings: SolverSettings | None = None,
) -> Normalizers:
    """Solve the two single-objective relaxations and record their optima."""
    objective, constraints = build_pe_only(config, grid)
    res_pe = _solve_stage("eaves-normalizer", objective, constraints, config)
    builder = build_ts_robust if robust else build_ts_perfect
    objective, constraints = builder(config, grid)
    res_ts = _solve_stage("sensing-normalizer", objective, constraints, config,
                          solver_settings)
    fmap = fim_map_for(config, grid)
    return Normalizers(
        i_tilde=res_pe.objective,
        det_phi_tilde=det_crb(fmap(res_ts.R)),
    )


def build_joint(
    config: ScenarioConfig,
    grid: AngleGrid,
    normalizers: Normalizers,
    drop_eaves_constraint_at_rho0: bool = False,
) -> tuple[ObjectiveSpec, list[AffineConstraint]]:
    """Joint program: rho-weighted normalized gain toward D plus
    (1-rho)-weighted normalized error-bound determinant.

    The eavesdropping threshold stays active for every rho unless
    ``drop_eaves_constraint_at_rho0`` is set and rho is 0; a non-positive
    threshold is clamped to 0 so the bound never goes vacuous-negative.
    """
    rho = config.rho
    gain_d = _gain(config, grid.theta_d)
    fmap = fim_map_for(config, grid)
    objective = ObjectiveSpec(
        linear_weight=rho / normalizers.i_tilde,
        linear_term=gain_d,
        detinv_weight=1.0 - rho,
        fim_map=fmap,
        detinv_scale=normalizers.det_phi_tilde,
    )
    constraints = [_trace_cap(config)]
    if not (drop_eaves_constraint_at_rho0 and rho == 0.0):
        thr = max(eaves_threshold(config), 0.0)
        constraints.append(AffineConstraint(gain_d, ">=", thr))
    constraints += _sidelobe_gap(config, grid, grid.sidelobe)
    constraints += _mainlobe_ripple(config, grid)
    return objective, constraints


def build_zero_interference(
    config: ScenarioConfig, grid: AngleGrid
) -> tuple[ObjectiveSpec, list[AffineConstraint]]:
    """Sensing program with a hard null toward D, for scenarios where the
    monitor's channel beats the illegal one and jamming is pointless.

    Raises:
        ValueError: called on a scenario that still needs jamming.
    """
    if not interference_free(config):
        raise ValueError(
            "zero-interference program requires the monitor channel to be at "
            "least as good as the illegal one"
        )
    n = config.n_t
    a_d = steering(config.tx_geometry(), grid.theta_d)
    gain_d = _gain(config, grid.theta_d)

    fmap = fim_map_for(config, grid)
    # Normalize at a null-respecting start so the scale is representative.
    proj = np.eye(n, dtype=complex) - np.outer(a_d, a_d.conj()) / float(
        np.vdot(a_d, a_d).real
    )
    scale = det_crb(fmap(config.p_0 / (2.0 * n) * proj))
    objective = ObjectiveSpec(detinv_weight=1.0, fim_map=fmap, detinv_scale=scale)

    constraints = [
        AffineConstraint(gain_d, "==", 0.0),
        _trace_cap(config),
    ]
    constraints += _sidelobe_gap(config, grid, grid.sidelobe)
    constraints += _mainlobe_ripple(config, grid)
    return objective, constraints


def _solve_stage(
    stage: str,
    objective: ObjectiveSpec,
    constraints: list[AffineConstraint],
    config: ScenarioConfig,
    solver_settings: SolverSettings | None = None,
) -> SolveResult:
    try:
        result = solve(objective, constraints, config.n_t,
                       settings=solver_settings, r0=default_start(config))
    except Exception as exc:
        exc.stage = getattr(exc, "stage", stage)
        raise
    if result.status != OPTIMAL:
        err = RuntimeError(f"{stage} solve ended with status {result.status}")
        err.stage = stage
        raise err
    return result


def run_scheme(
    kind: str,
    config: ScenarioConfig,
    solver_settings: SolverSettings | None = None,
    srocr_settings: SrocrSettings | None = None,
    drop_eaves_constraint_at_rho0: bool = False,
) -> PipelineOutcome:
    """Build, relax-solve, and rank-one-refine one scheme.

    Stage failures re-raise the original exception with a ``stage``
    attribute naming where the pipeline stopped.
    """
    if kind not in MODES:
        raise ValueError(f"unknown scheme {kind!r}, expected one of {MODES}")
    grid = make_grid(config)
    normalizers = None

    try:
        if kind == "PEO":
            objective, constraints = build_pe_only(config, grid)
        elif kind == "TSO_perfect":
            objective, constraints = build_ts_perfect(config, grid)
        elif kind == "TSO_robust":
            objective, constraints = build_ts_robust(config, grid)
        elif kind == "JPT":
            normalizers = compute_normalizers(
                config, grid, robust=config.delta_theta > 0,
                solver_settings=solver_settings,
            )
            objective, constraints = build_joint(
                config, grid, normalizers,
                drop_eaves_constraint_at_rho0=drop_eaves_constraint_at_rho0,
            )
        else:  # JPT_zero_interference
            objective, constraints = build_zero_interference(config, grid)
    except Exception as exc:
        exc.stage = getattr(exc, "stage", f"{kind}-build")
        raise

    sdr = _solve_stage(f"{kind}-relaxation", objective, constraints, config,
                       solver_settings)

    # The settling test of the refinement runs in O(1) units: the joint
    # objective is already normalized, the others are scaled by their own
    # relaxed optimum.
    scale = 1.0 if kind == "JPT" else max(abs(sdr.objective), 1e-300)
    srocr_settings = srocr_settings or SrocrSettings(
        vartheta=config.vartheta, tau=config.tau
    )
    try:
        result, history = srocr_refine(
            objective, constraints, sdr, config.n_t,
            settings=srocr_settings, solver_settings=solver_settings,
            objective_scale=scale,
        )
    except Exception as exc:
        exc.stage = getattr(exc, "stage", f"{kind}-rank-one")
        raise
    return PipelineOutcome(
        kind=kind, grid=grid, sdr=sdr, result=result,
        history=history, normalizers=normalizers,
    )


def dispatch(
    config: ScenarioConfig,
    solver_settings: SolverSettings | None = None,
    srocr_settings: SrocrSettings | None = None,
    drop_eaves_constraint_at_rho0: bool = False,
) -> PipelineOutcome:
    """Route to the joint or the zero-interference scheme by channel quality."""
    if interference_free(config):
        kind = "JPT_zero_interference"
    else:
        kind = "JPT"
    return run_scheme(
        kind, config, solver_settings=solver_settings,
        srocr_settings=srocr_settings,
        drop_eaves_constraint_at_rho0=drop_eaves_constraint_at_rho0,
    )
