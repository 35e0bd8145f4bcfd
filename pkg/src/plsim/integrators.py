"""Strang-splitting time steppers with exact substeps, and a trajectory driver.

Each step alternates a half step of the free Schrodinger flow (a unitary
spectral multiplier) with an exact solution of the x-local part of the
model.  Both substeps are closed-form maps, so the only discretization
error is the second-order splitting error.

The reservoir substep of the condensate-reservoir model uses the
variation-of-constants solution with the condensate frozen, which keeps
the reservoir density nonnegative exactly whenever it starts nonnegative
and the pump is nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticsSeries
from .grid import Field
from .models import CgpeParams, EpParams, _local_flow_factors

__all__ = [
    "CgpeState",
    "EpState",
    "Trajectory",
    "BlowUpError",
    "dispersion_half_step",
    "cgpe_local_step",
    "strang_step_cgpe",
    "reservoir_exact_update",
    "strang_step_ep",
    "integrate",
]

# A run is declared blown up once its mass exceeds this multiple of the
# initial mass, or any state value stops being finite.
BLOWUP_MASS_FACTOR = 1e6


@dataclass(frozen=True)
class CgpeState:
    u: Field
    t: float = 0.0


@dataclass(frozen=True)
class EpState:
    u: Field
    n: Field
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.u.grid != self.n.grid:
            raise ValueError("u and n must share a grid")


@dataclass(frozen=True)
class Trajectory:
    """Sampled states plus scalar diagnostics of one fixed-step run."""

    states: list
    diagnostics: DiagnosticsSeries
    dt: float
    steps: int


class BlowUpError(RuntimeError):
    """Raised when a step produces a non-finite or runaway state.

    Carries the offending time and the partial trajectory accumulated so
    far (may be None when raised by a bare stepper).
    """

    def __init__(self, time: float, trajectory: Trajectory | None = None):
        super().__init__(f"solution blew up at t = {time:.6g}")
        self.time = time
        self.trajectory = trajectory


def dispersion_half_step(f: Field, dt: float) -> Field:
    """Free flow over dt/2: multiply mode k by exp(-i k^2 dt / 2).

    Unitary, so the discrete L^2 norm is preserved exactly.  Negative dt
    gives the adjoint step.  Preserves the input representation.
    """
    if dt == 0.0:
        return f
    k = f.grid.wavenumbers
    multiplier = np.exp(-0.5j * k**2 * dt)
    if f.representation == "spectral":
        return f.with_values(multiplier * f.values)
    hat = np.fft.fft(f.values)
    return f.with_values(np.fft.ifft(multiplier * hat))


def cgpe_local_step(u: Field, dt: float, p: CgpeParams) -> Field:
    """Exact pointwise flow of du/dt = -i|u|^2 u + (xi - sigma|u|^2) u."""
    if u.representation != "physical":
        raise ValueError("local step expects a physical field")
    amplitude, phase = _local_flow_factors(np.abs(u.values) ** 2, dt, p.xi, p.sigma)
    return u.with_values(u.values * amplitude * np.exp(1j * phase))


def strang_step_cgpe(state: CgpeState, dt: float, p: CgpeParams) -> CgpeState:
    """Half dispersion, full local flow, half dispersion."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    u = dispersion_half_step(state.u, dt)
    u = cgpe_local_step(u, dt, p)
    u = dispersion_half_step(u, dt)
    t_new = state.t + dt
    if not np.all(np.isfinite(u.values)):
        raise BlowUpError(t_new)
    return CgpeState(u=u, t=t_new)


def reservoir_exact_update(n: Field, u_frozen: Field, dt: float, p: EpParams) -> Field:
    """Variation-of-constants update of dn/dt = P - (R|u|^2 + beta) n.

    With u frozen, n <- n e^{-Gamma dt} + (P/Gamma)(1 - e^{-Gamma dt}),
    Gamma = R|u|^2 + beta >= beta > 0.  Nonnegativity of n is preserved
    exactly: the update is a sum of products of nonnegative numbers.
    """
    if n.grid != u_frozen.grid:
        raise ValueError("n and u must share a grid")
    gamma = p.R * np.abs(u_frozen.values) ** 2 + p.beta
    decay = np.exp(-gamma * dt)
    pumped = p.pump_values * (-np.expm1(-gamma * dt)) / gamma
    return n.with_values(n.values.real * decay + pumped)


def _ep_local_u_update(u: Field, n: Field, dt: float, p: EpParams) -> Field:
    """Exact flow of du/dt = -i g|u|^2 u - i lam n u + (R n - alpha) u, n frozen.

    |u|^2 grows exponentially at rate 2(Rn - alpha); the accumulated
    nonlinear phase integral has the closed form |u0|^2 expm1(2 mu dt)/(2 mu).
    """
    mu = p.R * n.values.real - p.alpha
    safe_mu = np.where(mu == 0.0, 1.0, mu)
    growth = np.where(mu == 0.0, dt, np.expm1(2.0 * mu * dt) / (2.0 * safe_mu))
    phase = -(p.lam * n.values.real * dt + p.g * np.abs(u.values) ** 2 * growth)
    return u.with_values(u.values * np.exp(mu * dt + 1j * phase))


def strang_step_ep(state: EpState, dt: float, p: EpParams) -> EpState:
    """Half dispersion on u, inner Strang for the local system, half dispersion.

    The inner local substep is reservoir(dt/2), condensate(dt) with the
    reservoir frozen, reservoir(dt/2); every piece is an exact flow.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    u = dispersion_half_step(state.u, dt)
    n = reservoir_exact_update(state.n, u, 0.5 * dt, p)
    u = _ep_local_u_update(u, n, dt, p)
    n = reservoir_exact_update(n, u, 0.5 * dt, p)
    u = dispersion_half_step(u, dt)
    t_new = state.t + dt
    if not (np.all(np.isfinite(u.values)) and np.all(np.isfinite(n.values))):
        raise BlowUpError(t_new)
    return EpState(u=u, n=n, t=t_new)


def _mass(u: Field) -> float:
    return float(np.sum(np.abs(u.values) ** 2) * u.grid.dx)


def _diagnostics_row(state) -> tuple:
    u = state.u
    dx = u.grid.dx
    mass = _mass(u)
    l4 = float(np.sum(np.abs(u.values) ** 4) * dx)
    if isinstance(state, EpState):
        n = state.n.values.real
        return (state.t, mass, l4, float(np.sum(n) * dx), float(np.sum(n**2) * dx), float(np.min(n)))
    return (state.t, mass, l4)


def _build_diagnostics(rows: list[tuple], with_reservoir: bool) -> DiagnosticsSeries:
    data = np.asarray(rows, dtype=float)
    if with_reservoir:
        return DiagnosticsSeries(
            times=data[:, 0],
            mass=data[:, 1],
            l4_fourth=data[:, 2],
            n_integral=data[:, 3],
            n_sq_integral=data[:, 4],
            n_min=data[:, 5],
        )
    return DiagnosticsSeries(times=data[:, 0], mass=data[:, 1], l4_fourth=data[:, 2])


def integrate(initial, dt: float, t_end: float, sample_every: int, params) -> Trajectory:
    """Advance a state with fixed steps, recording diagnostics at samples.

    Samples land at step indices 0, sample_every, 2*sample_every, ... and
    always at the final step.  On blow-up the partial trajectory is
    attached to the raised BlowUpError.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    is_ep = isinstance(initial, EpState)
    if is_ep:
        def step(s):
            return strang_step_ep(s, dt, params)
    elif isinstance(initial, CgpeState):
        def step(s):
            return strang_step_cgpe(s, dt, params)
    else:
        raise TypeError(f"unsupported state type {type(initial).__name__}")

    n_steps = max(1, int(round(t_end / dt)))
    mass0 = _mass(initial.u)
    mass_cap = BLOWUP_MASS_FACTOR * mass0 if mass0 > 0 else np.inf
    states = [initial]
    rows = [_diagnostics_row(initial)]
    state = initial
    completed = 0

    def partial() -> Trajectory:
        return Trajectory(states=states, diagnostics=_build_diagnostics(rows, is_ep), dt=dt, steps=completed)

    for i in range(1, n_steps + 1):
        try:
            state = step(state)
        except BlowUpError as err:
            raise BlowUpError(err.time, partial()) from None
        completed = i
        state = _retimed(state, i * dt)
        if _mass(state.u) > mass_cap:
            states.append(state)
            rows.append(_diagnostics_row(state))
            raise BlowUpError(state.t, partial())
        if i % sample_every == 0 or i == n_steps:
            states.append(state)
            rows.append(_diagnostics_row(state))
    return Trajectory(states=states, diagnostics=_build_diagnostics(rows, is_ep), dt=dt, steps=n_steps)


def _retimed(state, t: float):
    # keep timestamps as exact multiples of dt instead of accumulated sums
    if isinstance(state, EpState):
        return EpState(u=state.u, n=state.n, t=t)
    return CgpeState(u=state.u, t=t)
