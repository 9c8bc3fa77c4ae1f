"""Fisher information of the radar echo, its inverse (the estimation bound),
and Monte-Carlo validation utilities.

The echo mean for targets at angles theta with reflection coefficients beta
is A_r(theta) diag(beta) A_t(theta)^T w under unit-power probing symbols.
The information matrix for the 3K real parameters
(theta_1..K, Re beta_1..K, Im beta_1..K) is assembled from three K x K
Hadamard-product blocks and is linear in the transmit covariance R = w w^H.

``fim_oracle`` recomputes the same matrix by numerically differentiating the
echo mean; it shares no code path with the analytic blocks and anchors the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ula import UlaGeometry, steering, steering_derivative

__all__ = [
    "SingularFisher",
    "TargetSet",
    "FimBlocks",
    "fim_blocks",
    "fisher_matrix",
    "crb",
    "det_crb",
    "fim_oracle",
    "simulate_echo",
    "ml_estimate",
]

# Reciprocal condition number below which the information matrix is treated
# as singular instead of inverted into garbage.
RCOND_SINGULAR = 1e-12


class SingularFisher(Exception):
    """Raised when the Fisher matrix is numerically singular, i.e. some
    parameter is unidentifiable under the given covariance."""


@dataclass(frozen=True)
class TargetSet:
    """Angles (radians) and complex reflection coefficients of K targets."""

    angles: tuple[float, ...]
    betas: tuple[complex, ...]

    def __post_init__(self) -> None:
        if len(self.angles) == 0:
            raise ValueError("at least one target required")
        if len(self.angles) != len(self.betas):
            raise ValueError(
                f"{len(self.angles)} angles vs {len(self.betas)} coefficients"
            )

    @property
    def k(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class FimBlocks:
    """The three K x K complex blocks of the information matrix."""

    f11: np.ndarray
    f12: np.ndarray
    f22: np.ndarray


def _responses(targets: TargetSet, geom_t: UlaGeometry, geom_r: UlaGeometry):
    at = np.column_stack([steering(geom_t, th) for th in targets.angles])
    ar = np.column_stack([steering(geom_r, th) for th in targets.angles])
    dat = np.column_stack([steering_derivative(geom_t, th) for th in targets.angles])
    dar = np.column_stack([steering_derivative(geom_r, th) for th in targets.angles])
    return at, ar, dat, dar


def fim_blocks(
    R: np.ndarray,
    targets: TargetSet,
    geom_t: UlaGeometry,
    geom_r: UlaGeometry,
) -> FimBlocks:
    """Hadamard-product blocks of the information matrix for covariance R."""
    if R.shape != (geom_t.n_elements, geom_t.n_elements):
        raise ValueError(
            f"covariance shape {R.shape} does not match {geom_t.n_elements} tx elements"
        )
    at, ar, dat, dar = _responses(targets, geom_t, geom_r)
    b = np.asarray(targets.betas, dtype=complex)
    rc = R.conj()

    g_rr = ar.conj().T @ ar
    g_rd = ar.conj().T @ dar
    g_dr = dar.conj().T @ ar
    g_dd = dar.conj().T @ dar

    m_aa = at.conj().T @ rc @ at
    m_da = dat.conj().T @ rc @ at
    m_ad = at.conj().T @ rc @ dat
    m_dd = dat.conj().T @ rc @ dat

    w = np.outer(b.conj(), b)
    f11 = g_rd * (w * m_da) + g_rr * (w * m_dd) + g_dd * (w * m_aa) + g_dr * (w * m_ad)
    f12 = g_rr * (b.conj()[:, None] * m_da) + g_dr * (b.conj()[:, None] * m_aa)
    f22 = g_rr * m_aa
    return FimBlocks(f11=f11, f12=f12, f22=f22)


def fisher_matrix(blocks: FimBlocks, sigma2: float, snapshots: int = 1) -> np.ndarray:
    """Assemble the real symmetric 3K x 3K information matrix.

    The noise enters through the 2/sigma2 prefactor; ``snapshots`` scales the
    matrix for repeated independent probings (1 for a single symbol).
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    if snapshots < 1:
        raise ValueError(f"snapshots must be >= 1, got {snapshots}")
    re11, re12, im12 = blocks.f11.real, blocks.f12.real, blocks.f12.imag
    re22, im22 = blocks.f22.real, blocks.f22.imag
    top = np.block(
        [
            [re11, re12, -im12],
            [re12.T, re22, -im22],
            [-im12.T, -im22.T, re22],
        ]
    )
    return (2.0 * snapshots / sigma2) * top


def crb(F: np.ndarray) -> np.ndarray:
    """Inverse of the information matrix.

    The information per parameter spans many orders of magnitude (angle
    information carries the squared reflection coefficient, amplitude
    information does not), so the matrix is symmetrically equilibrated to
    unit diagonal before the conditioning gate and the inversion; plain
    scaling then cannot masquerade as rank deficiency.

    Raises:
        SingularFisher: a diagonal entry is not positive (that parameter is
            unidentifiable) or the equilibrated reciprocal condition number
            falls below 1e-12.
    """
    diag = np.diag(F).copy()
    if np.any(diag <= 0):
        raise SingularFisher(
            "information matrix has a non-positive diagonal entry; some "
            "parameter receives no echo energy"
        )
    d = np.sqrt(diag)
    Fs = F / np.outer(d, d)
    s = np.linalg.svd(Fs, compute_uv=False)
    if s[-1] < RCOND_SINGULAR * s[0]:
        raise SingularFisher(
            f"information matrix is singular (equilibrated condition "
            f"{s[0] / max(s[-1], 1e-300):.3e})"
        )
    return np.linalg.inv(Fs) / np.outer(d, d)


def det_crb(F: np.ndarray) -> float:
    """Determinant of the inverse information matrix, via 1/det(F).

    Accumulates in the log domain so tiny per-factor magnitudes cannot
    underflow the product.
    """
    sign, logdet = np.linalg.slogdet(F)
    if sign <= 0:
        raise SingularFisher(f"det of information matrix is not positive (sign {sign})")
    return float(np.exp(-logdet))


def _echo_mean(
    thetas: np.ndarray,
    betas: np.ndarray,
    w: np.ndarray,
    geom_t: UlaGeometry,
    geom_r: UlaGeometry,
) -> np.ndarray:
    at = np.column_stack([steering(geom_t, th) for th in thetas])
    ar = np.column_stack([steering(geom_r, th) for th in thetas])
    return ar @ (betas * (at.T @ w))


def fim_oracle(
    w: np.ndarray,
    targets: TargetSet,
    sigma2: float,
    geom_t: UlaGeometry,
    geom_r: UlaGeometry,
    step: float = 1e-5,
    snapshots: int = 1,
) -> np.ndarray:
    """Information matrix by central differences of the echo mean.

    Independent cross-check for the analytic blocks: for the Gaussian echo
    with constant covariance, entry (i, j) is (2/sigma2) Re(d_i^H d_j) with
    d_i the derivative of the mean with respect to parameter i.  Requires a
    beamformer (rank-one covariance w w^H); general PSD covariances follow
    by linearity from their eigendecompositions.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    k = targets.k
    thetas = np.asarray(targets.angles, dtype=float)
    betas = np.asarray(targets.betas, dtype=complex)

    def mean_of(params: np.ndarray) -> np.ndarray:
        th = params[:k]
        be = params[k : 2 * k] + 1j * params[2 * k :]
        return _echo_mean(th, be, w, geom_t, geom_r)

    base = np.concatenate([thetas, betas.real, betas.imag])
    cols = []
    for i in range(3 * k):
        hi = base.copy()
        lo = base.copy()
        hi[i] += step
        lo[i] -= step
        cols.append((mean_of(hi) - mean_of(lo)) / (2.0 * step))
    d = np.column_stack(cols)
    return (2.0 * snapshots / sigma2) * (d.conj().T @ d).real


def simulate_echo(
    w: np.ndarray,
    theta: float,
    beta: complex,
    sigma2: float,
    geom_t: UlaGeometry,
    geom_r: UlaGeometry,
    seed: int,
) -> np.ndarray:
    """One noisy echo snapshot; deterministic for a fixed seed."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    rng = np.random.default_rng(seed)
    n_r = geom_r.n_elements
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(n_r) + 1j * rng.standard_normal(n_r)
    )
    return _echo_mean(np.array([theta]), np.array([beta]), w, geom_t, geom_r) + noise


def ml_estimate(
    echoes: list[np.ndarray],
    w: np.ndarray,
    angles: np.ndarray,
    geom_t: UlaGeometry,
    geom_r: UlaGeometry,
    refine_step: float = np.radians(0.01),
) -> tuple[float, complex]:
    """Grid maximum-likelihood angle/coefficient estimate from echo snapshots.

    Scans the grid, then refines once around the coarse peak down to
    ``refine_step``.  The coefficient is the closed-form least-squares
    solution at each candidate angle.
    """
    if len(echoes) == 0:
        raise ValueError("at least one echo required")
    if not np.any(np.abs(w) > 0):
        raise ValueError("beamformer must be nonzero")
    ybar = np.mean(np.stack(echoes), axis=0)

    def score(th: float) -> tuple[float, complex]:
        m = _echo_mean(np.array([th]), np.array([1.0 + 0j]), w, geom_t, geom_r)
        mm = float(np.vdot(m, m).real)
        if mm <= 1e-300:
            return 0.0, 0.0 + 0j
        proj = complex(np.vdot(m, ybar))
        return abs(proj) ** 2 / mm, proj / mm

    angles = np.asarray(angles, dtype=float)
    coarse_scores = [score(th)[0] for th in angles]
    i = int(np.argmax(coarse_scores))
    lo = angles[i] - (angles[1] - angles[0] if angles.size > 1 else refine_step)
    hi = angles[i] + (angles[1] - angles[0] if angles.size > 1 else refine_step)
    fine = np.arange(lo, hi + refine_step / 2, refine_step)
    fine_scores = [score(th)[0] for th in fine]
    j = int(np.argmax(fine_scores))
    theta_hat = float(fine[j])
    beta_hat = score(theta_hat)[1]
    return theta_hat, beta_hat
