"""Fixed-point iteration on the integral (variation-of-constants) form.

The differential models are recast as u(t) = S(t) u0 + int_0^t S(t-tau)
F(u)(tau) dtau with S the free Schrodinger propagator; the reservoir
component of the two-field model integrates without a propagator since its
equation carries no dispersion.  Iterating this map from the free evolution
measures the contraction the local solution theory asserts: successive
iterate distances should decay geometrically once the interval is short
enough.

Distances between iterates are sup-over-nodes Sobolev norms of the
difference; time integrals use trapezoidal weights on a uniform mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import Field, bracket, dealias_mask
from .models import CgpeParams, EpParams

__all__ = [
    "TimeMesh",
    "IterateHistory",
    "ContractionReport",
    "picard_cgpe",
    "picard_ep",
    "contraction_report",
    "measured_contraction_rate",
    "existence_time_bracket",
]


@dataclass(frozen=True)
class TimeMesh:
    """Uniform nodes on [0, delta]."""

    delta: float
    n_nodes: int

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.n_nodes < 3:
            raise ValueError(f"need at least 3 nodes, got {self.n_nodes}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.delta, self.n_nodes)

    @property
    def spacing(self) -> float:
        return self.delta / (self.n_nodes - 1)


@dataclass
class IterateHistory:
    """Successive iterates (node-sampled space-time arrays) and their distances.

    ``diffs[m]`` is the sup-over-nodes distance between iterates m and m+1,
    measured in the Sobolev index ``s`` (plain L^2 for the two-field model).
    """

    iterates: list
    diffs: list[float]
    initial_norm: float
    s: float
    diverged: bool = False

    def __post_init__(self) -> None:
        if len(self.diffs) != len(self.iterates) - 1:
            raise ValueError("diffs length must be len(iterates) - 1")


@dataclass(frozen=True)
class ContractionReport:
    ratios: np.ndarray
    converged: bool
    final_residual: float


def _hs_norm_rows(rows: np.ndarray, grid, s: float) -> np.ndarray:
    """Sobolev norm of each row of a (n_nodes, n_points) physical array."""
    amps = np.fft.fft(rows, axis=-1) / grid.n_points
    weights = bracket(grid.wavenumbers) ** (2.0 * s)
    return np.sqrt(grid.length * np.sum(weights * np.abs(amps) ** 2, axis=-1))


def _dealiased_cubic_rows(rows: np.ndarray, mask: np.ndarray) -> np.ndarray:
    hat = np.fft.fft(np.abs(rows) ** 2 * rows, axis=-1)
    return np.fft.ifft(np.where(mask, hat, 0.0), axis=-1)


def _diverging(diffs: list[float]) -> bool:
    if diffs and not np.isfinite(diffs[-1]):
        return True
    if len(diffs) < 4:
        return False
    a, b, c, d = diffs[-4:]
    return d > c > b > a


def picard_cgpe(
    u0: Field, mesh: TimeMesh, p: CgpeParams, s: float = 0.0, max_iter: int = 20
) -> IterateHistory:
    """Iterate the integral form of the gain-saturated cubic Schrodinger flow.

    Starts from the free evolution S(t) u0 and applies the Duhamel map with
    trapezoidal time quadrature until the sup-node H^s distance between
    iterates drops below 1e-10 (1 + ||u0||), the iteration budget runs out,
    or the distances grow for several consecutive sweeps (divergence).
    """
    if max_iter < 2:
        raise ValueError("max_iter must be >= 2")
    grid = u0.grid
    times = mesh.nodes
    mask = dealias_mask(grid)
    k2 = grid.wavenumbers**2
    # S(t_j) as spectral phases; conj gives the interaction-picture unwind
    prop = np.exp(-1j * np.outer(times, k2))
    u0_hat = np.fft.fft(u0.values)
    free = np.fft.ifft(prop * u0_hat[None, :], axis=-1)

    initial_norm = float(_hs_norm_rows(u0.values[None, :], grid, s)[0])
    tol = 1e-10 * (1.0 + initial_norm)
    current = free
    history = IterateHistory(iterates=[free], diffs=[], initial_norm=initial_norm, s=s)

    for _ in range(max_iter):
        rhs = p.xi * current - (p.sigma + 1j) * _dealiased_cubic_rows(current, mask)
        unwound = np.conj(prop) * np.fft.fft(rhs, axis=-1)
        integral = cumulative_trapezoid(unwound, dx=mesh.spacing, axis=0, initial=0.0)
        new = np.fft.ifft(prop * (u0_hat[None, :] + integral), axis=-1)
        diff = float(np.max(_hs_norm_rows(new - current, grid, s)))
        history.iterates.append(new)
        history.diffs.append(diff)
        current = new
        # at least two sweeps, so the history is always reportable
        if diff <= tol and len(history.diffs) >= 2:
            break
        if _diverging(history.diffs):
            history.diverged = True
            break
    return history


def picard_ep(
    u0: Field, n0: Field, mesh: TimeMesh, p: EpParams, max_iter: int = 20
) -> IterateHistory:
    """Simultaneous iteration of the coupled integral equations.

    The condensate equation uses the propagator-weighted quadrature; the
    reservoir equation is a plain time integral.  Distances are the sum of
    the two sup-node L^2 distances.
    """
    if max_iter < 2:
        raise ValueError("max_iter must be >= 2")
    if u0.grid != n0.grid:
        raise ValueError("u0 and n0 must share a grid")
    grid = u0.grid
    times = mesh.nodes
    mask = dealias_mask(grid)
    k2 = grid.wavenumbers**2
    prop = np.exp(-1j * np.outer(times, k2))
    u0_hat = np.fft.fft(u0.values)
    free_u = np.fft.ifft(prop * u0_hat[None, :], axis=-1)
    n0_row = n0.values.real
    flat_n = np.tile(n0_row, (mesh.n_nodes, 1))
    pump = p.pump_values[None, :]

    initial_norm = float(
        _hs_norm_rows(u0.values[None, :], grid, 0.0)[0]
        + _hs_norm_rows(n0_row[None, :].astype(complex), grid, 0.0)[0]
    )
    tol = 1e-10 * (1.0 + initial_norm)
    cur_u, cur_n = free_u, flat_n
    history = IterateHistory(iterates=[(free_u, flat_n)], diffs=[], initial_norm=initial_norm, s=0.0)

    for _ in range(max_iter):
        rhs_u = (
            -1j * p.g * _dealiased_cubic_rows(cur_u, mask)
            + ((p.R - 1j * p.lam) * cur_n - p.alpha) * cur_u
        )
        unwound = np.conj(prop) * np.fft.fft(rhs_u, axis=-1)
        integral = cumulative_trapezoid(unwound, dx=mesh.spacing, axis=0, initial=0.0)
        new_u = np.fft.ifft(prop * (u0_hat[None, :] + integral), axis=-1)

        rhs_n = pump - (p.R * np.abs(cur_u) ** 2 + p.beta) * cur_n
        new_n = n0_row[None, :] + cumulative_trapezoid(rhs_n, dx=mesh.spacing, axis=0, initial=0.0)

        diff = float(
            np.max(_hs_norm_rows(new_u - cur_u, grid, 0.0))
            + np.max(_hs_norm_rows((new_n - cur_n).astype(complex), grid, 0.0))
        )
        history.iterates.append((new_u, new_n))
        history.diffs.append(diff)
        cur_u, cur_n = new_u, new_n
        if diff <= tol and len(history.diffs) >= 2:
            break
        if _diverging(history.diffs):
            history.diverged = True
            break
    return history


def contraction_report(history: IterateHistory) -> ContractionReport:
    """Ratios of successive iterate distances and the convergence verdict."""
    if len(history.iterates) < 3:
        raise ValueError("need at least 3 iterates to report contraction")
    diffs = np.asarray(history.diffs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = diffs[1:] / diffs[:-1]
    ratios = np.where(np.isfinite(ratios), ratios, 0.0)
    tol = 1e-10 * (1.0 + history.initial_norm)
    converged = bool(len(diffs) > 0 and diffs[-1] <= tol and not history.diverged)
    final = float(diffs[-1]) if len(diffs) else 0.0
    return ContractionReport(ratios=ratios, converged=converged, final_residual=final)


def measured_contraction_rate(history: IterateHistory, skip_first: int = 1) -> float:
    """Largest ratio of successive distances, ignoring the noise floor.

    Ratios whose denominator has already collapsed to rounding level carry
    no contraction information and are excluded; returns 0.0 when nothing
    meaningful remains.
    """
    diffs = history.diffs
    floor = 1e-12 * (1.0 + history.initial_norm)
    rates = [
        diffs[m + 1] / diffs[m]
        for m in range(skip_first, len(diffs) - 1)
        if diffs[m] > floor and diffs[m + 1] > floor
    ]
    return max(rates) if rates else 0.0


def existence_time_bracket(
    run,
    delta0: float,
    max_doublings: int = 12,
) -> tuple[float, float]:
    """Bracket the largest interval half-width on which the iteration converges.

    ``run(delta)`` must return an IterateHistory.  Doubles (or halves) delta
    until the convergence verdict flips, returning (delta_ok, delta_fail)
    with delta_fail / delta_ok == 2.
    """

    def ok(delta: float) -> bool:
        history = run(delta)
        return contraction_report(history).converged

    delta = delta0
    if ok(delta):
        for _ in range(max_doublings):
            if not ok(2.0 * delta):
                return delta, 2.0 * delta
            delta *= 2.0
        raise RuntimeError(f"no divergence found up to delta = {delta}")
    for _ in range(max_doublings):
        if ok(0.5 * delta):
            return 0.5 * delta, delta
        delta *= 0.5
    raise RuntimeError(f"no convergence found down to delta = {delta}")
