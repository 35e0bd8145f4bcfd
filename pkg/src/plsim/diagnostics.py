"""Time-stamped scalar diagnostics recorded along a trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DiagnosticsSeries"]


@dataclass(frozen=True)
class DiagnosticsSeries:
    """Per-sample scalars: mass integral, quartic integral, and (for the
    condensate-reservoir model) reservoir integrals and pointwise minimum.

    ``times`` must be strictly increasing; all series share one length.
    """

    times: np.ndarray
    mass: np.ndarray
    l4_fourth: np.ndarray
    n_integral: np.ndarray | None = None
    n_sq_integral: np.ndarray | None = None
    n_min: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "mass", np.asarray(self.mass, dtype=float))
        object.__setattr__(self, "l4_fourth", np.asarray(self.l4_fourth, dtype=float))
        for name in ("n_integral", "n_sq_integral", "n_min"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.asarray(value, dtype=float))
        n = len(times)
        for name in ("mass", "l4_fourth", "n_integral", "n_sq_integral", "n_min"):
            series = getattr(self, name)
            if series is not None and len(series) != n:
                raise ValueError(f"{name} has length {len(series)}, expected {n}")
        if n > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        for name in ("times", "mass", "l4_fourth", "n_integral", "n_sq_integral", "n_min"):
            series = getattr(self, name)
            if series is not None and not np.all(np.isfinite(series)):
                raise ValueError(f"{name} contains non-finite entries")
        if np.any(self.mass < 0):
            raise ValueError("mass must be nonnegative")

    @property
    def has_reservoir(self) -> bool:
        return self.n_integral is not None

    def __len__(self) -> int:
        return len(self.times)
