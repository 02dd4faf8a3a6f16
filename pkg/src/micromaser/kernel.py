"""Probe-atom response model.

An initially excited two-level probe atom crossing the cavity for a
dimensionless time tau undergoes Rabi oscillation at frequency sqrt(n+1) on
Fock level n, so the probability of leaving excited is
(1 + cos(tau * sqrt(n+1))) / 2.  Collected over a grid of interaction times
these coefficients form the linear map from the photon distribution to the
measurable excited-state probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from micromaser.photon_model import PhotonDistribution, _check_truncation


@dataclass(frozen=True)
class TauGrid:
    """Uniform grid of dimensionless interaction times.

    The grid has ``n_tau + 1`` points tau_k = tau_min + k * step for
    k = 0..n_tau, with 0 < tau_min < tau_max.
    """

    tau_min: float
    tau_max: float
    n_tau: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau_min", float(self.tau_min))
        object.__setattr__(self, "tau_max", float(self.tau_max))
        if int(self.n_tau) != self.n_tau or self.n_tau < 1:
            raise ValueError(f"n_tau must be a positive integer, got {self.n_tau}")
        object.__setattr__(self, "n_tau", int(self.n_tau))
        if not 0 < self.tau_min < self.tau_max:
            raise ValueError(
                f"need 0 < tau_min < tau_max, got [{self.tau_min}, {self.tau_max}]"
            )

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.n_tau + 1)


@dataclass(eq=False)
class KernelMatrix:
    """Excited-state coefficients c[k][n] for grid point k and Fock level n."""

    entries: np.ndarray
    taus: np.ndarray

    @property
    def n_points(self) -> int:
        return self.entries.shape[0]

    @property
    def truncation(self) -> int:
        return self.entries.shape[1] - 1

    @cached_property
    def column_weights(self) -> np.ndarray:
        """Per-level sums over grid points, reused across iterative updates."""
        return self.entries.sum(axis=0)


def build_kernel(grid, truncation: int) -> KernelMatrix:
    """Dense response matrix c[k][n] = (1 + cos(tau_k * sqrt(n+1))) / 2.

    ``grid`` is a TauGrid or, for tests, any strictly increasing 1-D array
    of nonnegative times.
    """
    truncation = _check_truncation(truncation)
    if isinstance(grid, TauGrid):
        taus = grid.points
    else:
        taus = np.asarray(grid, dtype=float)
        if taus.ndim != 1 or taus.size == 0:
            raise ValueError("interaction times must form a nonempty 1-D array")
        if np.any(taus < 0) or not np.all(np.isfinite(taus)):
            raise ValueError("interaction times must be finite and nonnegative")
        if taus.size > 1 and np.any(np.diff(taus) <= 0):
            raise ValueError("interaction times must be strictly increasing")
    rabi = np.sqrt(np.arange(truncation + 1, dtype=float) + 1.0)
    entries = 0.5 * (1.0 + np.cos(np.outer(taus, rabi)))
    return KernelMatrix(entries=entries, taus=taus)


def excited_probability(kernel: KernelMatrix, p: PhotonDistribution) -> np.ndarray:
    """Excited-state probability at every grid point: P_k = sum_n c[k][n] p_n."""
    if p.truncation != kernel.truncation:
        raise ValueError(
            f"incompatible truncation: kernel holds {kernel.truncation}, "
            f"distribution holds {p.truncation}"
        )
    return kernel.entries @ p.probs
