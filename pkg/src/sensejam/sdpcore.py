"""Interior-point solver for small covariance programs over the Hermitian
PSD cone.

Problem class:

    minimize    w_lin * Re tr(C_lin R)  +  w_det * (1 / det F(R)) / scale
    subject to  Re tr(C_i R) {<=, >=, ==} b_i,    R Hermitian PSD,

where F is a linear map from covariances to real symmetric matrices (the
echo information matrix in this package).  Both objective terms are convex
on the cone: the linear one trivially, the det-inverse one because
1/det F(R) = exp(-logdet F(R)) composes a convex function with an affine
map.

Algorithm: log-det barrier path following with damped Newton steps over the
real vectorization of Hermitian matrices.  Dense factorizations throughout;
intended for matrix dimensions up to ~16 with a few hundred constraints.
Equality constraints are removed exactly before the barrier loop: a
zero-rhs constraint with a PSD coefficient confines R to the coefficient's
null space (cone reduction), and any remaining equalities are eliminated
affinely; the barrier then never sees slacks at roundoff scale.
Infeasibility is certified by a phase-1 slack-minimization pass on the same
machinery.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fim import SingularFisher

__all__ = [
    "OPTIMAL",
    "INFEASIBLE",
    "MAX_ITERATIONS",
    "LinearFunctional",
    "AffineConstraint",
    "ObjectiveSpec",
    "SolverSettings",
    "SolveResult",
    "ValidationReport",
    "hermitian_basis",
    "solve",
    "det_inv_value_grad_hess",
    "validate_solution",
    "dump_trace",
]

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
MAX_ITERATIONS = "MaxIterations"


# ---------------------------------------------------------------------------
# Problem description types


@dataclass(frozen=True)
class LinearFunctional:
    """Real-valued linear functional R -> Re tr(C R) with Hermitian C."""

    coeff: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeff, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficient must be square, got shape {c.shape}")
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        if np.abs(c - c.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("coefficient matrix is not Hermitian")
        object.__setattr__(self, "coeff", c)

    def value(self, R: np.ndarray) -> float:
        return float(np.einsum("ij,ji->", self.coeff, R).real)


@dataclass(frozen=True)
class AffineConstraint:
    """One affine constraint on the covariance: functional(R) sense rhs."""

    functional: LinearFunctional
    sense: str
    rhs: float

    def __post_init__(self) -> None:
        if self.sense not in ("<=", ">=", "=="):
            raise ValueError(f"sense must be one of <=, >=, ==, got {self.sense!r}")
        if not math.isfinite(self.rhs):
            raise ValueError(f"rhs must be finite, got {self.rhs}")

    def residual(self, R: np.ndarray) -> float:
        """Slack at R; >= 0 means satisfied.  Equalities report the negated
        absolute deviation."""
        v = self.functional.value(R)
        if self.sense == "<=":
            return self.rhs - v
        if self.sense == ">=":
            return v - self.rhs
        return -abs(v - self.rhs)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Convex objective: weighted linear term plus weighted normalized
    det-inverse of the information map."""

    linear_weight: float = 0.0
    linear_term: LinearFunctional | None = None
    detinv_weight: float = 0.0
    fim_map: Callable[[np.ndarray], np.ndarray] | None = None
    detinv_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.linear_weight < 0 or self.detinv_weight < 0:
            raise ValueError("objective weights must be >= 0")
        if self.linear_weight + self.detinv_weight <= 0:
            raise ValueError("objective has no active term")
        if self.linear_weight > 0 and self.linear_term is None:
            raise ValueError("linear_weight > 0 requires linear_term")
        if self.detinv_weight > 0 and self.fim_map is None:
            raise ValueError("detinv_weight > 0 requires fim_map")
        if not self.detinv_scale > 0:
            raise ValueError(f"detinv_scale must be > 0, got {self.detinv_scale}")

    def evaluate(self, R: np.ndarray) -> float:
        """Objective value at a covariance (outside the solver)."""
        total = 0.0
        if self.linear_weight > 0:
            total += self.linear_weight * self.linear_term.value(R)
        if self.detinv_weight > 0:
            F = np.asarray(self.fim_map(R), dtype=float)
            sign, logdet = np.linalg.slogdet(F)
            if sign <= 0:
                raise SingularFisher("information map not positive definite")
            total += self.detinv_weight * math.exp(
                -logdet - math.log(self.detinv_scale)
            )
        return total


@dataclass
class SolverSettings:
    """Tolerances and iteration caps of the barrier method."""

    max_outer: int = 60            # barrier updates per phase
    max_inner: int = 100           # Newton steps per barrier weight
    mu_shrink: float = 0.2         # barrier weight multiplier per outer step
    mu_min_ratio: float = 1e-9     # stop once mu <= ratio * initial mu
    rel_gap: float = 1e-8          # duality-gap surrogate target, rel. to 1+|f|
    newton_tol: float = 1e-8       # Newton decrement target
    kkt_tol: float = 1e-7          # Optimal status threshold
    feas_tol: float = 1e-7         # violation threshold, rel. to max(1,|rhs|)
    keep_trace: bool = False       # record per-outer-iteration diagnostics


@dataclass
class SolveResult:
    """Solution covariance with convergence diagnostics.

    ``iterations`` counts Newton steps across both phases; ``kkt_residual``
    is the worst of the normalized duality-gap surrogate, the normalized
    constraint violation, and the final Newton decrement.
    """

    R: np.ndarray
    objective: float
    status: str
    iterations: int
    kkt_residual: float
    trace: list[dict] = field(default_factory=list)


@dataclass
class ValidationReport:
    """Per-constraint slacks and a PSD check for a candidate covariance."""

    residuals: list[float]
    min_eigenvalue: float
    psd_violation: bool

    def ok(self, tol: float = 1e-7) -> bool:
        return not self.psd_violation and all(r >= -tol for r in self.residuals)


# ---------------------------------------------------------------------------
# Hermitian vectorization


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of n x n Hermitian matrices under Re tr(A B).

    Order: the n diagonal units, then for each pair i < j the symmetric and
    the skew (imaginary) unit, each scaled by 1/sqrt(2).
    """
    mats = np.zeros((n * n, n, n), dtype=complex)
    m = 0
    for i in range(n):
        mats[m, i, i] = 1.0
        m += 1
    r = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            mats[m, i, j] = r
            mats[m, j, i] = r
            m += 1
            mats[m, i, j] = 1j * r
            mats[m, j, i] = -1j * r
            m += 1
    return mats


def _hvec(M: np.ndarray, basis_flat: np.ndarray) -> np.ndarray:
    """Coordinates of Hermitian M in the orthonormal basis."""
    return (basis_flat.conj() @ M.reshape(-1)).real


def validate_solution(
    R: np.ndarray, constraints: list[AffineConstraint]
) -> ValidationReport:
    """Audit a covariance against a constraint list and the PSD cone."""
    residuals = [c.residual(R) for c in constraints]
    evals = np.linalg.eigvalsh((R + R.conj().T) / 2.0)
    trace = float(np.trace(R).real)
    min_ev = float(evals[0]) if evals.size else 0.0
    return ValidationReport(
        residuals=residuals,
        min_eigenvalue=min_ev,
        psd_violation=min_ev < -1e-8 * max(trace, 1e-300),
    )


def dump_trace(records: list[dict], path) -> None:
    """Write solver trace records as line-delimited JSON."""
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


# ---------------------------------------------------------------------------
# Internal barrier machinery


class _BarrierProblem:
    """Minimize f over {x : A x < b, R(x) = r_off + sum_j x_j mats_j > 0}
    with f(x) = c.x + c0 + w_det exp(-logdet F(x) - log_scale)."""

    def __init__(self, mats, r_off, A, b, c, c0, det):
        self.mats = mats                      # (dim, n, n) direction matrices
        self.vm = mats.reshape(mats.shape[0], r_off.shape[0] * r_off.shape[0])
        self.vmc = self.vm.conj()
        self.r_off = r_off
        self.A = A
        self.b = b
        self.c = c
        self.c0 = c0
        self.det = det                        # None or (Fm, f_off, w_det, log_scale)
        self.dim = mats.shape[0]
        self.n = r_off.shape[0]

    def matrix(self, x: np.ndarray) -> np.ndarray:
        return self.r_off + np.tensordot(x, self.mats, axes=(0, 0))

    def _det_state(self, x: np.ndarray):
        Fm, f_off, w_det, log_scale = self.det
        F = f_off + np.tensordot(x, Fm, axes=(0, 0))
        sign, logdet = np.linalg.slogdet(F)
        if sign <= 0:
            return None
        return F, w_det * math.exp(-logdet - log_scale)

    def f_value(self, x: np.ndarray) -> float:
        total = float(self.c @ x) + self.c0
        if self.det is not None:
            state = self._det_state(x)
            if state is None:
                return math.inf
            total += state[1]
        return total

    def f_grad_hess(self, x: np.ndarray):
        g = self.c.copy()
        H = np.zeros((self.dim, self.dim))
        if self.det is not None:
            Fm = self.det[0]
            state = self._det_state(x)
            if state is None:
                raise SingularFisher("det term left its domain during a solve")
            F, phi = state
            finv = np.linalg.inv(F)
            gld = np.einsum("mij,ji->m", Fm, finv)
            g = g - phi * gld
            M = np.einsum("ij,mjk->mik", finv, Fm)
            t2 = np.einsum("mik,nki->mn", M, M)
            H = H + phi * (np.outer(gld, gld) + t2)
        return g, H

    def slacks(self, x: np.ndarray) -> np.ndarray:
        if self.A.shape[0] == 0:
            return np.empty(0)
        return self.b - self.A @ x

    def psd_ok(self, x: np.ndarray) -> bool:
        try:
            np.linalg.cholesky(self.matrix(x))
        except np.linalg.LinAlgError:
            return False
        return True

    def strictly_feasible(self, x: np.ndarray) -> bool:
        s = self.slacks(x)
        if s.size and s.min() <= 0:
            return False
        if not self.psd_ok(x):
            return False
        if self.det is not None and self._det_state(x) is None:
            return False
        return True

    def psi(self, x: np.ndarray, t: float) -> float:
        s = self.slacks(x)
        if s.size and s.min() <= 0:
            return math.inf
        try:
            L = np.linalg.cholesky(self.matrix(x))
        except np.linalg.LinAlgError:
            return math.inf
        fx = self.f_value(x)
        if not math.isfinite(fx):
            return math.inf
        logdet_r = 2.0 * float(np.log(np.diag(L).real).sum())
        logs = float(np.log(s).sum()) if s.size else 0.0
        return t * fx - logdet_r - logs

    def psi_grad_hess(self, x: np.ndarray, t: float):
        gf, Hf = self.f_grad_hess(x)
        S = np.linalg.inv(self.matrix(x))
        S = (S + S.conj().T) / 2.0
        g = t * gf - (self.vmc @ S.reshape(-1)).real
        K = np.kron(S, S.T)
        H = t * Hf + (self.vmc @ K @ self.vm.T).real
        s = self.slacks(x)
        if s.size:
            inv_s = 1.0 / s
            g = g + self.A.T @ inv_s
            A_sc = self.A * inv_s[:, None]
            H = H + A_sc.T @ A_sc
        return g, H


def _spd_solve(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Newton direction -H^{-1} g, adding diagonal jitter until H factors.

    A near-active constraint can push one Hessian term ~16 orders of
    magnitude above the rest, which LAPACK then treats as exactly singular;
    such failures escalate the jitter like an indefinite factorization.
    """
    if not np.all(np.isfinite(H)) or not np.all(np.isfinite(g)):
        return -g
    dim = H.shape[0]
    base = max(float(np.abs(np.diag(H)).mean()), 1e-300)
    jitter = 0.0
    for _ in range(12):
        try:
            np.linalg.cholesky(H + jitter * np.eye(dim))
            return np.linalg.solve(H + jitter * np.eye(dim), -g)
        except np.linalg.LinAlgError:
            jitter = base * 1e-14 if jitter == 0.0 else jitter * 100.0
    return np.linalg.lstsq(H, -g, rcond=None)[0]


def _newton(prob, x, t, settings, early_stop=None):
    """Damped Newton descent on psi(., t); returns (x, decrement, steps, early).

    Near the cone boundary the decrement bottoms out at the level the
    Hessian conditioning allows; a plateau detector stops the loop there
    instead of burning the step budget (the duality gap, not the decrement,
    certifies the returned point).
    """
    decrement = math.inf
    prev = math.inf
    strikes = 0
    eps = float(np.finfo(float).eps)
    for step in range(settings.max_inner):
        g, H = prob.psi_grad_hess(x, t)
        d = _spd_solve(H, g)
        gd = float(g @ d)
        if gd > 0:
            d = -g
            gd = float(g @ d)
        decrement = math.sqrt(max(0.0, -gd))
        if decrement <= settings.newton_tol:
            return x, decrement, step, False
        if decrement < 1e-3 and decrement > 0.25 * prev:
            strikes += 1
            if strikes >= 2:
                return x, decrement, step, False
        else:
            strikes = 0
        prev = decrement
        psi0 = prob.psi(x, t)
        # Accept within the float resolution of psi; differences below it
        # are unmeasurable at large barrier weights.
        noise = 4.0 * eps * abs(psi0)
        alpha = 1.0
        accepted = False
        while alpha > 1e-18:
            cand = x + alpha * d
            if prob.psi(cand, t) <= psi0 + 0.01 * alpha * gd + noise:
                x = cand
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return x, decrement, step + 1, False
        if early_stop is not None and early_stop(x):
            return x, decrement, step + 1, True
    return x, decrement, settings.max_inner, False


def _phase1(prob, x0, settings, trace):
    """Minimize the worst constraint violation s; returns (x, feasible, steps).

    Exits as soon as an iterate is strictly feasible for the original
    inequalities; certifies infeasibility once the central-path lower bound
    s - gap on the optimal violation stays positive.
    """
    dim = prob.dim
    zero_dir = np.zeros((1, prob.n, prob.n), dtype=complex)
    mats1 = np.concatenate([prob.mats, zero_dir])
    A1 = np.hstack([prob.A, -np.ones((prob.A.shape[0], 1))])
    c1 = np.zeros(dim + 1)
    c1[dim] = 1.0
    aux = _BarrierProblem(mats1, prob.r_off, A1, prob.b, c1, 0.0, None)

    viol = prob.A @ x0 - prob.b
    s0 = float(viol.max()) + 0.1 * (1.0 + float(np.abs(prob.b).max(initial=0.0)))
    x = np.concatenate([x0, [s0]])
    nu = prob.n + prob.A.shape[0]
    t = nu / (1.0 + abs(s0))

    def interior(xs: np.ndarray) -> bool:
        sl = prob.slacks(xs[:dim])
        return bool(sl.size == 0 or sl.min() > 0)

    total = 0
    for outer in range(settings.max_outer):
        x, dec, steps, early = _newton(aux, x, t, settings, early_stop=interior)
        total += steps
        s_cur = float(x[dim])
        gap = nu / t
        if settings.keep_trace:
            trace.append(
                {"phase": 1, "outer": outer, "mu": 1.0 / t, "objective": s_cur,
                 "gap": gap, "decrement": dec, "newton_steps": steps}
            )
        if early or interior(x):
            return x[:dim], True, total
        if s_cur - gap > 0:
            return x[:dim], False, total
        if gap <= settings.rel_gap * (1.0 + abs(s_cur)):
            return x[:dim], bool(s_cur < 0 and interior(x)), total
        t /= settings.mu_shrink
    return x[:dim], False, total


# ---------------------------------------------------------------------------
# Constraint preprocessing (cone reduction + affine elimination)


@dataclass
class _WorkingConstraint:
    coeff: np.ndarray
    sense: str
    rhs: float

    def holds_at_zero(self) -> bool:
        """Whether the zero functional satisfies the constraint (used after
        the coefficient vanished under a cone reduction)."""
        tol = 1e-12 * max(1.0, abs(self.rhs))
        if self.sense == "<=":
            return 0.0 <= self.rhs + tol
        if self.sense == ">=":
            return 0.0 >= self.rhs - tol
        return abs(self.rhs) <= tol


def _cone_reduce(work: list[_WorkingConstraint], n: int):
    """Split off zero-rhs semidefinite equality constraints into a null-space
    basis Q with orthonormal columns: R = Q X Q^H ranges over exactly the PSD
    matrices annihilated by the removed constraints."""
    Q = np.eye(n, dtype=complex)
    current = list(work)
    while True:
        pick = None
        for i, con in enumerate(current):
            if con.sense != "==" or con.rhs != 0.0:
                continue
            C = con.coeff
            scale = float(np.abs(C).max(initial=0.0))
            if scale == 0.0:
                continue
            evals = np.linalg.eigvalsh(C)
            if evals[0] >= -1e-10 * scale:
                pick = (i, C)
                break
            if evals[-1] <= 1e-10 * scale:
                pick = (i, -C)
                break
        if pick is None:
            return Q, current, None
        i, C = pick
        evals, vecs = np.linalg.eigh(C)
        null = vecs[:, evals <= 1e-12 * evals[-1]]
        if null.shape[1] == 0:
            return Q, current, "equality constraint admits only the zero matrix"
        current = current[:i] + current[i + 1 :]
        for con in current:
            con.coeff = null.conj().T @ con.coeff @ null
        Q = Q @ null


# ---------------------------------------------------------------------------
# Public entry points


def solve(
    objective: ObjectiveSpec,
    constraints: list[AffineConstraint],
    n: int,
    settings: SolverSettings | None = None,
    r0: np.ndarray | None = None,
) -> SolveResult:
    """Solve one covariance program; see the module docstring for the class.

    Args:
        objective: convex objective specification.
        constraints: affine constraints on the covariance.
        n: matrix dimension (number of transmit elements).
        settings: tolerances; defaults are pinned by the test suite.
        r0: optional starting covariance (must be strictly PSD to be used).
    """
    settings = settings or SolverSettings()
    if n < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {n}")
    for con in constraints:
        if con.functional.coeff.shape != (n, n):
            raise ValueError("constraint coefficient dimension mismatch")
    trace: list[dict] = []

    def failed(status: str, R: np.ndarray, iters: int) -> SolveResult:
        return SolveResult(R=R, objective=math.nan, status=status,
                           iterations=iters, kkt_residual=math.nan, trace=trace)

    zero_r = np.zeros((n, n), dtype=complex)
    work = [
        _WorkingConstraint(np.array(c.functional.coeff), c.sense, float(c.rhs))
        for c in constraints
    ]
    Q, work, reason = _cone_reduce(work, n)
    if reason is not None:
        return failed(INFEASIBLE, zero_r, 0)
    n_red = Q.shape[1]
    if n_red == 0:
        return failed(INFEASIBLE, zero_r, 0)

    kept: list[_WorkingConstraint] = []
    for con in work:
        if np.abs(con.coeff).max(initial=0.0) <= 1e-14:
            if not con.holds_at_zero():
                return failed(INFEASIBLE, zero_r, 0)
            continue
        kept.append(con)
    work = kept

    basis = hermitian_basis(n_red)
    basis_flat = basis.reshape(n_red * n_red, -1)

    rows, rhs = [], []
    for con in work:
        if con.sense == "==":
            continue
        a = _hvec(con.coeff, basis_flat)
        if con.sense == "<=":
            rows.append(a)
            rhs.append(con.rhs)
        else:
            rows.append(-a)
            rhs.append(-con.rhs)
    A = np.array(rows) if rows else np.zeros((0, n_red * n_red))
    b = np.array(rhs) if rhs else np.zeros(0)

    c_full = np.zeros(n_red * n_red)
    if objective.linear_weight > 0:
        c_lin_red = Q.conj().T @ objective.linear_term.coeff @ Q
        c_full = objective.linear_weight * _hvec(c_lin_red, basis_flat)

    eqs = [c for c in work if c.sense == "=="]
    if eqs:
        E = np.array([_hvec(c.coeff, basis_flat) for c in eqs])
        d = np.array([c.rhs for c in eqs])
        x_p = np.linalg.lstsq(E, d, rcond=None)[0]
        if np.linalg.norm(E @ x_p - d) > 1e-8 * (1.0 + np.linalg.norm(d)):
            return failed(INFEASIBLE, zero_r, 0)
        sv = np.linalg.svd(E, compute_uv=False)
        rank = int((sv > 1e-12 * sv[0]).sum())
        null = np.linalg.svd(E)[2][rank:].conj().T.real
        if null.shape[1] == 0:
            # Fully pinned variable: feasibility of the single point decides.
            null = np.zeros((E.shape[1], 0))
        mats = np.tensordot(null.T, basis, axes=(1, 0))
        r_off = np.tensordot(x_p, basis, axes=(0, 0))
        A_z = A @ null if A.shape[0] else np.zeros((0, null.shape[1]))
        b_z = b - A @ x_p if A.shape[0] else b
        c = null.T @ c_full
        c0 = float(c_full @ x_p)

        def project(M: np.ndarray) -> np.ndarray:
            return null.T @ (_hvec(M, basis_flat) - x_p)

    else:
        mats = basis
        r_off = np.zeros((n_red, n_red), dtype=complex)
        A_z, b_z = A, b
        c, c0 = c_full, 0.0

        def project(M: np.ndarray) -> np.ndarray:
            return _hvec(M, basis_flat)

    det = None
    if objective.detinv_weight > 0:
        fmap = objective.fim_map

        def fmap_red(M: np.ndarray) -> np.ndarray:
            return np.asarray(fmap(Q @ M @ Q.conj().T), dtype=float)

        f_zero = fmap_red(np.zeros((n_red, n_red), dtype=complex))
        if np.abs(f_zero).max(initial=0.0) > 1e-10:
            raise ValueError("fim_map must vanish at the zero covariance")
        probe_m = basis[0]
        if not np.allclose(
            fmap_red(2.0 * probe_m), 2.0 * fmap_red(probe_m),
            rtol=1e-8, atol=1e-10,
        ):
            raise ValueError("fim_map is not linear in the covariance")
        f_off = fmap_red(r_off)
        Fm = np.stack([fmap_red(M) for M in mats]) if mats.shape[0] else (
            np.zeros((0,) + f_off.shape)
        )
        det = (Fm, f_off, objective.detinv_weight,
               math.log(objective.detinv_scale))

    prob = _BarrierProblem(mats, r_off, A_z, b_z, c, c0, det)
    dim = prob.dim

    # Starting point: caller's hint, else scaled identities, projected onto
    # the equality slice; the first strictly feasible candidate wins, else
    # the first positive definite one (phase 1 repairs the slacks).
    candidates = []
    if r0 is not None:
        candidates.append(project(Q.conj().T @ np.asarray(r0, dtype=complex) @ Q))
    for scale_try in (0.5 / n_red, 1.0 / n_red, 1.0, 1e-2, 1e2, 1e-4):
        candidates.append(project(scale_try * np.eye(n_red)))
    z0 = None
    first_pd = None
    for cand in candidates:
        if not prob.psd_ok(cand):
            continue
        if first_pd is None:
            first_pd = cand
        if prob.strictly_feasible(cand):
            z0 = cand
            break
    if z0 is None:
        z0 = first_pd
    if z0 is None:
        return failed(INFEASIBLE, zero_r, 0)

    total_steps = 0
    if not prob.strictly_feasible(z0):
        sl = prob.slacks(z0)
        if sl.size and sl.min() <= 0:
            z0, feasible, steps = _phase1(prob, z0, settings, trace)
            total_steps += steps
            if not feasible:
                R_bad = Q @ prob.matrix(z0) @ Q.conj().T
                return failed(INFEASIBLE, R_bad, total_steps)
        if not prob.strictly_feasible(z0):
            # Slacks and cone are fine, so the det term is singular here.
            raise SingularFisher(
                "information map is singular on the feasible start"
            )

    if dim == 0:
        # Equalities pinned the matrix to a single point.
        R_final = Q @ prob.matrix(np.zeros(0)) @ Q.conj().T
        fz = prob.f_value(np.zeros(0))
        viol = max(
            (-con.residual(R_final) / max(1.0, abs(con.rhs)) for con in constraints),
            default=0.0,
        )
        status = OPTIMAL if viol <= settings.feas_tol else INFEASIBLE
        return SolveResult(R=R_final, objective=fz, status=status,
                           iterations=total_steps, kkt_residual=max(viol, 0.0),
                           trace=trace)

    nu = n_red + A_z.shape[0]
    f0 = prob.f_value(z0)
    mu0 = (1.0 + abs(f0)) / nu
    mu = mu0
    z = z0
    status = MAX_ITERATIONS
    dec = math.inf
    fz = f0
    for outer in range(settings.max_outer):
        z, dec, steps, _ = _newton(prob, z, 1.0 / mu, settings)
        total_steps += steps
        fz = prob.f_value(z)
        gap = mu * nu
        if settings.keep_trace:
            trace.append(
                {"phase": 2, "outer": outer, "mu": mu, "objective": fz,
                 "gap": gap, "decrement": dec, "newton_steps": steps}
            )
        if mu <= settings.mu_min_ratio * mu0 and gap <= settings.rel_gap * (
            1.0 + abs(fz)
        ):
            status = OPTIMAL
            break
        mu *= settings.mu_shrink

    R_final = Q @ prob.matrix(z) @ Q.conj().T
    R_final = (R_final + R_final.conj().T) / 2.0

    viol = max(
        (-con.residual(R_final) / max(1.0, abs(con.rhs)) for con in constraints),
        default=0.0,
    )
    gap_n = (mu * nu) / (1.0 + abs(fz))
    # Stationarity in objective units: the psi-suboptimality dec^2/2 maps to
    # the objective through the barrier weight.
    stat_n = mu * dec * dec / (2.0 * (1.0 + abs(fz)))
    kkt = max(gap_n, max(viol, 0.0), stat_n)
    if status == OPTIMAL and (viol > settings.feas_tol or kkt > settings.kkt_tol):
        status = MAX_ITERATIONS
    return SolveResult(R=R_final, objective=fz, status=status,
                       iterations=total_steps, kkt_residual=kkt, trace=trace)


def det_inv_value_grad_hess(
    fim_map: Callable[[np.ndarray], np.ndarray], R: np.ndarray
):
    """Smooth oracle for R -> 1/det F(R): value, gradient, Hessian action.

    The gradient is the Hermitian matrix G whose pairing Re tr(G D) gives
    the derivative along any Hermitian direction D; the returned closure
    maps D to the Hermitian matrix representing the second derivative in
    the same pairing.
    """
    n = R.shape[0]
    basis = hermitian_basis(n)
    F = np.asarray(fim_map(R), dtype=float)
    sign, logdet = np.linalg.slogdet(F)
    if sign <= 0:
        raise SingularFisher("information map not positive definite at R")
    value = float(math.exp(-logdet))
    finv = np.linalg.inv(F)
    Fm = np.stack([np.asarray(fim_map(B), dtype=float) for B in basis])

    def adjoint(M: np.ndarray) -> np.ndarray:
        weights = np.einsum("mij,ij->m", Fm, M)
        return np.tensordot(weights, basis, axes=(0, 0))

    a_finv = adjoint(finv)
    grad = -value * a_finv

    def hess_action(D: np.ndarray) -> np.ndarray:
        FD = np.asarray(fim_map(D), dtype=float)
        t1 = float(np.einsum("ij,ji->", finv, FD))
        return value * (t1 * a_finv + adjoint(finv @ FD @ finv))

    return value, grad, hess_action
