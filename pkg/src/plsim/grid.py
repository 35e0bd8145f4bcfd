"""Periodic 1-D spectral lattice: transforms, dealiasing, and discrete norms.

All fields live on a uniform grid over [0, L) with periodic boundary
conditions.  Spectral coefficients use the unitary DFT convention, so a
forward followed by an inverse transform is an exact round trip up to
rounding.  Discrete norms are scaled so that they converge to the
corresponding continuum integrals as the resolution grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

Representation = Literal["physical", "spectral"]

__all__ = [
    "Grid1D",
    "Field",
    "make_grid",
    "transform",
    "to_physical",
    "to_spectral",
    "dealias",
    "dealias_mask",
    "hs_norm",
    "lp_norm",
    "laplacian",
    "random_band_limited",
    "bracket",
]


def bracket(x):
    """Japanese bracket <x> = (1 + |x|^2)^(1/2), elementwise."""
    return np.sqrt(1.0 + np.abs(np.asarray(x, dtype=float)) ** 2)


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic lattice with n_points sites on a box of size length.

    Wavenumbers follow the standard DFT layout [0, 1, ..., N/2-1, -N/2,
    ..., -1] scaled by 2*pi/length.
    """

    n_points: int
    length: float

    def __post_init__(self) -> None:
        if self.n_points < 4 or self.n_points % 2 != 0:
            raise ValueError(f"n_points must be even and >= 4, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        """Grid sites x_j = j * dx over [0, length)."""
        return np.arange(self.n_points) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers 2*pi*m/length in DFT order, m integer."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


def make_grid(n_points: int, length: float) -> Grid1D:
    """Build a Grid1D, rejecting odd or tiny point counts and bad lengths."""
    return Grid1D(n_points=int(n_points), length=float(length))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a Grid1D, physical or spectral."""

    grid: Grid1D
    values: np.ndarray
    representation: Representation = "physical"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"({self.grid.n_points},)"
            )
        if self.representation not in ("physical", "spectral"):
            raise ValueError(f"unknown representation {self.representation!r}")
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray, representation: Representation | None = None) -> "Field":
        rep = self.representation if representation is None else representation
        return Field(self.grid, values, rep)


def transform(field: Field, direction: Literal["forward", "inverse"]) -> Field:
    """Unitary DFT between physical and spectral representations.

    ``forward`` expects a physical field and returns its spectral
    coefficients; ``inverse`` does the opposite.  A representation
    mismatch is an error.
    """
    n = field.grid.n_points
    if direction == "forward":
        if field.representation != "physical":
            raise ValueError("forward transform expects a physical field")
        return Field(field.grid, np.fft.fft(field.values) / np.sqrt(n), "spectral")
    if direction == "inverse":
        if field.representation != "spectral":
            raise ValueError("inverse transform expects a spectral field")
        return Field(field.grid, np.fft.ifft(field.values) * np.sqrt(n), "physical")
    raise ValueError(f"unknown direction {direction!r}")


def to_spectral(field: Field) -> Field:
    return field if field.representation == "spectral" else transform(field, "forward")


def to_physical(field: Field) -> Field:
    return field if field.representation == "physical" else transform(field, "inverse")


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """Boolean mask keeping modes with |k| <= (2/3) of the Nyquist wavenumber."""
    k = grid.wavenumbers
    cutoff = (2.0 / 3.0) * np.max(np.abs(k))
    return np.abs(k) <= cutoff


def dealias(field: Field) -> Field:
    """Zero every coefficient above the 2/3 cutoff; idempotent.

    Controls aliasing of cubic products formed in physical space.
    """
    if field.representation != "spectral":
        raise ValueError("dealias expects a spectral field")
    return field.with_values(np.where(dealias_mask(field.grid), field.values, 0.0))


def hs_norm(field: Field, s: float) -> float:
    """Discrete Sobolev norm (L * sum_k <k>^(2s) |c_k|^2)^(1/2).

    The c_k are Fourier-series amplitudes, so s = 0 reproduces the
    continuum L^2 norm of the sampled function.  Accepts either
    representation and transforms internally.
    """
    spec = to_spectral(field)
    grid = field.grid
    amps = spec.values / np.sqrt(grid.n_points)
    weights = bracket(grid.wavenumbers) ** (2.0 * s)
    return float(np.sqrt(grid.length * np.sum(weights * np.abs(amps) ** 2)))


def lp_norm(field: Field, p: float) -> float:
    """Lebesgue norm (sum_j |u_j|^p dx)^(1/p) for p in {2, 4}."""
    if p not in (2, 4):
        raise ValueError(f"unsupported exponent p={p}, expected 2 or 4")
    if field.representation != "physical":
        raise ValueError("lp_norm expects a physical field")
    return float(np.sum(np.abs(field.values) ** p) * field.grid.dx) ** (1.0 / p)


def laplacian(field: Field) -> Field:
    """Second spatial derivative, applied spectrally; physical in, physical out."""
    if field.representation != "physical":
        raise ValueError("laplacian expects a physical field")
    k = field.grid.wavenumbers
    hat = np.fft.fft(field.values)
    return field.with_values(np.fft.ifft(-(k**2) * hat))


def random_band_limited(grid: Grid1D, band: int, rng: np.random.Generator) -> Field:
    """Random physical field with complex Gaussian amplitudes on |m| <= band.

    Modes are drawn in a fixed order (m = 0, 1, -1, 2, -2, ...) so the
    sample for a given seed does not depend on the grid resolution, as
    long as the band fits.
    """
    if band < 0 or band > grid.n_points // 2 - 1:
        raise ValueError(f"band {band} does not fit on a grid of {grid.n_points} points")
    amps = np.zeros(grid.n_points, dtype=np.complex128)
    order = [0]
    for m in range(1, band + 1):
        order.extend([m, -m])
    for m in order:
        re, im = rng.standard_normal(2)
        amps[m] = (re + 1j * im) / np.sqrt(2.0)
    values = np.fft.ifft(amps) * grid.n_points
    return Field(grid, values, "physical")
