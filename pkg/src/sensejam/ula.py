"""Uniform linear array geometry, steering vectors, and angle grids.

Angles are radians everywhere in this package; degrees appear only at the
CLI boundary.  The phase reference is the first element and angles are
measured from broadside, so element n sees a phase of
2*pi*(d/lambda)*n*sin(theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UlaGeometry",
    "AngleGrid",
    "steering",
    "steering_derivative",
    "angle_grid",
]


@dataclass(frozen=True)
class UlaGeometry:
    """Element count and spacing (in wavelengths) of a uniform linear array."""

    n_elements: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if not self.spacing_over_wavelength > 0:
            raise ValueError(
                f"spacing_over_wavelength must be > 0, got {self.spacing_over_wavelength}"
            )


def steering(geom: UlaGeometry, theta: float) -> np.ndarray:
    """Complex array response for a plane wave from angle ``theta``.

    Entry n is exp(1j * 2*pi * (d/lambda) * n * sin(theta)); entry 0 is
    exactly 1 and every entry has unit modulus.
    """
    n = np.arange(geom.n_elements)
    return np.exp(2j * np.pi * geom.spacing_over_wavelength * n * np.sin(theta))


def steering_derivative(geom: UlaGeometry, theta: float) -> np.ndarray:
    """Entrywise derivative of :func:`steering` with respect to ``theta``."""
    n = np.arange(geom.n_elements)
    c = 2.0 * np.pi * geom.spacing_over_wavelength
    return 1j * c * n * np.cos(theta) * np.exp(1j * c * n * np.sin(theta))


@dataclass(frozen=True)
class AngleGrid:
    """Uniform angle grid with the index sets used by the covariance programs.

    ``mainlobe`` collects the grid points within ``delta_theta`` of the
    (snapped) target angle, ``sidelobe`` is its complement, and
    ``all_but_target`` is everything except the target point itself.
    ``mainlobe`` and ``sidelobe`` partition the grid.
    """

    angles: np.ndarray
    resolution: float
    target_index: int
    eaves_index: int
    mainlobe: np.ndarray = field(repr=False)
    sidelobe: np.ndarray = field(repr=False)
    all_but_target: np.ndarray = field(repr=False)

    @property
    def theta_s(self) -> float:
        """Target angle after snapping onto the grid."""
        return float(self.angles[self.target_index])

    @property
    def theta_d(self) -> float:
        """Eavesdropped-receiver angle after snapping onto the grid."""
        return float(self.angles[self.eaves_index])

    def __len__(self) -> int:
        return self.angles.size


def angle_grid(
    span: tuple[float, float],
    resolution: float,
    theta_s: float,
    delta_theta: float,
    theta_d: float,
) -> AngleGrid:
    """Build the detection grid and its mainlobe/sidelobe index sets.

    ``theta_s`` and ``theta_d`` are snapped to the nearest grid point so the
    constraint sets are anchored at exact grid angles.

    Args:
        span: detection range (lo, hi) in radians, lo < hi.
        resolution: grid step in radians.
        theta_s: nominal target direction, must lie inside ``span``.
        delta_theta: half-width of the mainlobe window, >= 0.
        theta_d: eavesdropped-receiver direction, must lie inside ``span``.
    """
    lo, hi = span
    if not hi > lo:
        raise ValueError(f"empty detection range: {span}")
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    if resolution > hi - lo:
        raise ValueError(
            f"resolution {resolution} exceeds detection range span {hi - lo}"
        )
    if delta_theta < 0:
        raise ValueError(f"delta_theta must be >= 0, got {delta_theta}")
    for name, value in (("theta_s", theta_s), ("theta_d", theta_d)):
        if not lo <= value <= hi:
            raise ValueError(f"{name}={value} outside detection range {span}")

    count = int(np.floor((hi - lo) / resolution + 1e-9)) + 1
    angles = lo + resolution * np.arange(count)

    target_index = int(np.argmin(np.abs(angles - theta_s)))
    eaves_index = int(np.argmin(np.abs(angles - theta_d)))

    # Tolerance absorbs float wobble so the window is symmetric on-grid.
    window = delta_theta * (1.0 + 1e-12) + 1e-12 * resolution
    near = np.abs(angles - angles[target_index]) <= window
    mainlobe = np.flatnonzero(near)
    sidelobe = np.flatnonzero(~near)
    all_but_target = np.setdiff1d(np.arange(count), [target_index])

    return AngleGrid(
        angles=angles,
        resolution=resolution,
        target_index=target_index,
        eaves_index=eaves_index,
        mainlobe=mainlobe,
        sidelobe=sidelobe,
        all_but_target=all_but_target,
    )
