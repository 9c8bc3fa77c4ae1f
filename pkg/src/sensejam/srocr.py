"""Rank-one refinement of relaxed covariance solutions.

The covariance programs are solved without their rank-one constraint; the
relaxed optimum is then driven to (numerical) rank one by repeatedly adding
the principal-eigenvector cut

    u^H R u >= w * tr(R)

and ratcheting the eigen-ratio target w toward 1.  A feasible iteration
keeps the increment delta; an infeasible one keeps the previous covariance
and halves delta.  The loop ends when the achieved ratio reaches tau and
the augmented objective has settled within vartheta.

Randomized rank-one recovery is deliberately not offered: a randomized
beamformer can break the eavesdropping inequality the relaxed solution
satisfied, which defeats the whole design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sdpcore import (
    OPTIMAL,
    AffineConstraint,
    LinearFunctional,
    ObjectiveSpec,
    SolveResult,
    SolverSettings,
    solve,
)

__all__ = [
    "SrocrSettings",
    "SrocrRecord",
    "RankOneFailure",
    "principal_ratio",
    "srocr_refine",
    "extract_beamformer",
]


@dataclass
class SrocrSettings:
    """Knobs of the rank-one refinement loop."""

    vartheta: float = 1e-4        # objective-settling tolerance
    tau: float = 0.999            # required principal-eigenvalue ratio
    max_iter: int = 50
    delta0_fraction: float = 0.5  # delta0 = fraction * (1 - initial ratio)


@dataclass(frozen=True)
class SrocrRecord:
    """One refinement iteration: target, increment, objective, outcome."""

    iteration: int
    w_target: float
    delta: float
    objective: float
    feasible: bool
    ratio: float


class RankOneFailure(Exception):
    """Refinement hit the iteration cap before reaching the ratio target.

    Carries the best iterate so callers can inspect how close it got.
    """

    def __init__(self, message: str, result: SolveResult, ratio: float,
                 history: list[SrocrRecord]):
        super().__init__(message)
        self.result = result
        self.ratio = ratio
        self.history = history


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first significant entry is real > 0."""
    mags = np.abs(u)
    idx = int(np.argmax(mags >= 1e-8 * mags.max()))
    pivot = u[idx]
    if abs(pivot) == 0:
        return u
    return u * (pivot.conj() / abs(pivot))


def principal_ratio(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Principal eigenvector and its energy fraction u^H R u / tr(R).

    The fraction is 1 exactly when R is rank one and at least 1/n always.
    The eigenvector phase is pinned for deterministic output.
    """
    Rh = (R + R.conj().T) / 2.0
    trace = float(np.trace(Rh).real)
    if not trace > 0:
        raise ValueError(f"covariance trace must be > 0, got {trace}")
    _, vecs = np.linalg.eigh(Rh)
    u = _canonical_phase(vecs[:, -1])
    ratio = float((u.conj() @ Rh @ u).real) / trace
    return u, ratio


def extract_beamformer(R: np.ndarray, tau: float = 0.999) -> np.ndarray:
    """Beamformer sqrt(lambda_max) * u from a near-rank-one covariance.

    The global phase is fixed so the first significant entry is real and
    non-negative.

    Raises:
        ValueError: the principal ratio is below ``tau`` (the covariance is
            not rank-one enough to collapse onto one vector).
    """
    u, ratio = principal_ratio(R)
    if ratio < tau:
        raise ValueError(
            f"principal ratio {ratio:.6f} below the rank-one threshold {tau}"
        )
    lam = float((u.conj() @ R @ u).real)
    return np.sqrt(lam) * u


def _cut(u: np.ndarray, w: float) -> AffineConstraint:
    n = u.size
    coeff = np.outer(u, u.conj()) - w * np.eye(n, dtype=complex)
    return AffineConstraint(LinearFunctional(coeff), ">=", 0.0)


def srocr_refine(
    objective: ObjectiveSpec,
    constraints: list[AffineConstraint],
    start: SolveResult,
    n: int,
    settings: SrocrSettings | None = None,
    solver_settings: SolverSettings | None = None,
    objective_scale: float = 1.0,
) -> tuple[SolveResult, list[SrocrRecord]]:
    """Drive a relaxed solution to rank one with eigenvector cuts.

    Args:
        objective, constraints: the program the relaxed ``start`` solves
            (without any rank cut).
        start: relaxed solution; must have status Optimal.
        n: covariance dimension.
        settings: loop tolerances; defaults mirror the baseline scenario.
        solver_settings: forwarded to each augmented solve.
        objective_scale: divisor applied to objectives in the settling test,
            for programs whose natural objective is not O(1).

    Returns:
        (refined SolveResult, per-iteration records).

    Raises:
        RankOneFailure: iteration cap reached before the ratio target.
    """
    settings = settings or SrocrSettings()
    if start.status != OPTIMAL:
        raise ValueError(f"refinement needs an Optimal start, got {start.status}")

    R = start.R
    result = start
    u, ratio = principal_ratio(R)
    history: list[SrocrRecord] = []
    if ratio >= settings.tau:
        return result, history

    scale = objective_scale if objective_scale > 0 else 1.0
    opt_prev = start.objective / scale
    delta = settings.delta0_fraction * (1.0 - ratio)
    w = min(ratio + delta, 1.0)
    best_result, best_ratio = result, ratio

    for j in range(settings.max_iter):
        # Cold-ish start biased toward the current iterate; the blend keeps
        # the hint strictly positive definite.
        trace = float(np.trace(R).real)
        hint = 0.9 * R + 0.1 * (trace / n) * np.eye(n, dtype=complex)
        res = solve(objective, constraints + [_cut(u, w)], n,
                    settings=solver_settings, r0=hint)
        feasible = res.status == OPTIMAL
        if feasible:
            R = res.R
            result = res
            opt_cur = res.objective / scale
        else:
            delta *= 0.5
            opt_cur = opt_prev
        u, ratio = principal_ratio(R)
        history.append(SrocrRecord(
            iteration=j, w_target=w, delta=delta, objective=opt_cur,
            feasible=feasible, ratio=ratio,
        ))
        if ratio > best_ratio:
            best_result, best_ratio = result, ratio
        if ratio >= settings.tau and abs(opt_cur - opt_prev) <= settings.vartheta:
            return result, history
        opt_prev = opt_cur
        w = min(ratio + delta, 1.0)

    raise RankOneFailure(
        f"no rank-one covariance within {settings.max_iter} iterations "
        f"(best ratio {best_ratio:.6f} < tau {settings.tau})",
        best_result, best_ratio, history,
    )
