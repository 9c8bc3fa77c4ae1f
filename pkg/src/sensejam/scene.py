"""Scenario geometry, path-loss channels, beampatterns, and link SNRs.

The scenario has three nodes: an illegal transmitter S, its receiver D, and
the monitoring array E at the origin.  E senses S with a probing beam whose
covariance is R; the same beam jams D.  Eavesdropping succeeds when the SNR
at D drops to at most the SNR at E.

All quantities in :class:`ScenarioConfig` are linear (watts, radians,
meters); dB/dBm appear only in the CLI config file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ula import UlaGeometry, steering

__all__ = [
    "ScenarioConfig",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "path_gain",
    "channel_ed",
    "beampattern",
    "gamma_d",
    "gamma_e",
    "eaves_threshold",
    "interference_free",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError(f"dB undefined for non-positive value {x}")
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    return linear_to_db(x_w) + 30.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and algorithmic parameters of one experiment scenario.

    Defaults reproduce the baseline simulation setup: S at (500, 0) m,
    D at (250, 250) m, E at the origin, a 12-element half-wavelength ULA,
    1-degree grid over [-90, 90] degrees, and unit radar noise power.
    """

    w_s: tuple[float, float] = (500.0, 0.0)
    w_d: tuple[float, float] = (250.0, 250.0)
    w_e: tuple[float, float] = (0.0, 0.0)
    theta_s: float = 0.0
    theta_d: float = math.radians(45.0)
    delta_theta: float = math.radians(5.0)
    p_s: float = 1.0
    p_0: float = 1.0
    sigma2: float = 1.0
    sigma_d2: float = 1e-11
    sigma_e2: float = 1e-11
    beta_0: float = 1e-3
    alpha: float = 2.7
    phi: float = 0.05
    gamma_s: float = 0.01
    rho: float = 0.5
    vartheta: float = 1e-4
    tau: float = 0.999
    resolution: float = math.radians(1.0)
    detection_range: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    n_t: int = 12
    n_r: int = 12
    spacing_over_wavelength: float = 0.5
    snapshots: int = 1
    # None selects the model defaults; see beta_e_value / beta_target_value.
    beta_e: float | None = None
    beta_target: complex | None = None

    def __post_init__(self) -> None:
        positive = {
            "p_s": self.p_s,
            "p_0": self.p_0,
            "sigma2": self.sigma2,
            "sigma_d2": self.sigma_d2,
            "sigma_e2": self.sigma_e2,
            "beta_0": self.beta_0,
            "resolution": self.resolution,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must be in [0, 1], got {self.phi}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.gamma_s < 0:
            raise ValueError(f"gamma_s must be >= 0, got {self.gamma_s}")
        if self.vartheta <= 0:
            raise ValueError(f"vartheta must be > 0, got {self.vartheta}")
        if self.delta_theta < 0:
            raise ValueError(f"delta_theta must be >= 0, got {self.delta_theta}")
        if self.n_t < 1 or self.n_r < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.snapshots < 1:
            raise ValueError(f"snapshots must be >= 1, got {self.snapshots}")
        if self.beta_e is not None and not self.beta_e > 0:
            raise ValueError(f"beta_e must be > 0, got {self.beta_e}")
        for name in ("d_sd", "d_se", "d_ed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"coincident node positions: {name} = 0")

    # -- derived geometry -------------------------------------------------

    @property
    def d_sd(self) -> float:
        return math.dist(self.w_s, self.w_d)

    @property
    def d_se(self) -> float:
        return math.dist(self.w_s, self.w_e)

    @property
    def d_ed(self) -> float:
        return math.dist(self.w_e, self.w_d)

    @property
    def h_sd2(self) -> float:
        """Squared magnitude of the S-D channel."""
        return path_gain(self.beta_0, self.d_sd, self.alpha)

    @property
    def h_se2(self) -> float:
        """Squared magnitude of the S-E channel."""
        return path_gain(self.beta_0, self.d_se, self.alpha)

    @property
    def beta_e_value(self) -> float:
        """Reference gain of the E-D jamming path; defaults to beta_0."""
        return self.beta_0 if self.beta_e is None else self.beta_e

    @property
    def beta_target_value(self) -> complex:
        """Target reflection coefficient; defaults to the two-way monostatic
        loss amplitude sqrt(beta_0) * d_se**-alpha with zero phase."""
        if self.beta_target is not None:
            return complex(self.beta_target)
        return complex(math.sqrt(self.beta_0) * self.d_se**-self.alpha)

    def tx_geometry(self) -> UlaGeometry:
        return UlaGeometry(self.n_t, self.spacing_over_wavelength)

    def rx_geometry(self) -> UlaGeometry:
        return UlaGeometry(self.n_r, self.spacing_over_wavelength)


def path_gain(beta_0: float, d: float, alpha: float) -> float:
    """Squared channel magnitude beta_0 * d**-alpha at distance ``d``."""
    if not d > 0:
        raise ValueError(f"distance must be > 0, got {d}")
    return beta_0 * d**-alpha


def channel_ed(config: ScenarioConfig, geom: UlaGeometry) -> np.ndarray:
    """Line-of-sight E-to-D channel row vector."""
    gain = path_gain(config.beta_0, config.d_ed, config.alpha)
    return math.sqrt(gain) * steering(geom, config.theta_d)


def beampattern(R: np.ndarray, a: np.ndarray) -> float:
    """Transmit power density a^H R a toward the direction of ``a``.

    The imaginary residue of a^H R a must be negligible (R Hermitian); a
    residue above 1e-10 relative is treated as a corrupted covariance.
    """
    if R.shape != (a.size, a.size):
        raise ValueError(f"covariance shape {R.shape} does not match array size {a.size}")
    value = complex(np.vdot(a, R @ a))
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(
            f"beampattern value {value} has non-negligible imaginary part; "
            "covariance is not Hermitian"
        )
    return value.real


def gamma_d(config: ScenarioConfig, geom: UlaGeometry, R: np.ndarray) -> float:
    """SINR at the illegal receiver D under jamming covariance ``R``."""
    interference = (
        config.beta_e_value
        * config.d_ed**-config.alpha
        * beampattern(R, steering(geom, config.theta_d))
    )
    return config.p_s * config.h_sd2 / (interference + config.sigma_d2)


def gamma_e(config: ScenarioConfig) -> float:
    """SNR of the monitored transmission at E; independent of R."""
    return config.p_s * config.h_se2 / config.sigma_e2


def eaves_threshold(config: ScenarioConfig) -> float:
    """Minimum beampattern level toward D that makes gamma_d <= gamma_e.

    May be <= 0, in which case eavesdropping succeeds without jamming.
    """
    bracket = config.h_sd2 * config.sigma_e2 / config.h_se2 - config.sigma_d2
    return config.d_ed**config.alpha / config.beta_e_value * bracket


def interference_free(config: ScenarioConfig) -> bool:
    """True when the S-E link is at least as good as S-D, so no jamming
    power is needed (selects the zero-interference program)."""
    return config.h_sd2 / config.sigma_d2 <= config.h_se2 / config.sigma_e2
