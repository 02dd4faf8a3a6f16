"""Monte Carlo generation of probe-atom measurement records.

Each grid point k gets an independent counter-based RNG substream keyed by
(seed, k), so simulated counts do not depend on iteration order or on how
work is split across workers.  Detections at one interaction time are
binomial: the steady state is restored between probe atoms, making every
probe an independent Bernoulli trial with the model probability P_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from micromaser.kernel import TauGrid, build_kernel, excited_probability
from micromaser.photon_model import (
    DEFAULT_TAIL_THRESHOLD,
    MaserParams,
    steady_state,
)

#: RNG algorithm identifier pinned into run manifests.
RNG_ALGORITHM = "philox4x64-10 (numpy.random.Philox, key = [seed, grid_index])"

_MAX_SEED = 2**64


@dataclass(eq=False)
class MeasurementSet:
    """Per-interaction-time counts of probe atoms detected excited.

    ``counts[k]`` is how many of ``shots_per_tau`` probe atoms left the
    cavity excited at grid point k.  ``truth_params`` is present only for
    synthetic data; ``seed`` only when this process generated the draws.
    """

    grid: TauGrid
    shots_per_tau: int
    counts: np.ndarray
    seed: int | None = None
    truth_params: MaserParams | None = None

    def __post_init__(self) -> None:
        if int(self.shots_per_tau) != self.shots_per_tau or self.shots_per_tau < 1:
            raise ValueError(
                f"shots_per_tau must be a positive integer, got {self.shots_per_tau}"
            )
        self.shots_per_tau = int(self.shots_per_tau)
        counts = np.asarray(self.counts)
        expected = self.grid.n_tau + 1
        if counts.ndim != 1 or counts.size != expected:
            raise ValueError(f"expected {expected} counts, got {counts.size}")
        validated = np.empty(expected, dtype=np.int64)
        for i, value in enumerate(counts):
            if float(value) != int(value) or not 0 <= int(value) <= self.shots_per_tau:
                raise ValueError(
                    f"invalid count at index {i}: {value!r} "
                    f"(must be an integer in [0, {self.shots_per_tau}])"
                )
            validated[i] = int(value)
        self.counts = validated

    @property
    def frequencies(self) -> np.ndarray:
        """Observed excited-state frequencies f_k = counts_k / shots_per_tau."""
        return self.counts / self.shots_per_tau


def binomial_counts(probs, shots, seed: int) -> np.ndarray:
    """Exact binomial draws, one Philox substream per index.

    ``shots`` may be a scalar or a per-index array; substream k depends only
    on (seed, k), so changing the draw at one index never disturbs another.
    """
    _check_seed(seed)
    probs = np.asarray(probs, dtype=float)
    shots_arr = np.broadcast_to(np.asarray(shots, dtype=np.int64), probs.shape)
    counts = np.empty(probs.shape, dtype=np.int64)
    for k in range(probs.size):
        key = np.array([seed, k], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        counts[k] = gen.binomial(int(shots_arr[k]), min(max(float(probs[k]), 0.0), 1.0))
    return counts


def simulate(
    params: MaserParams,
    grid: TauGrid,
    truncation: int,
    shots_per_tau: int,
    seed: int,
    *,
    tail_threshold: float = DEFAULT_TAIL_THRESHOLD,
    strict: bool = True,
) -> MeasurementSet:
    """Simulate probe-atom detection counts for a steady state.

    Counts at grid point k are binomial with ``shots_per_tau`` trials and
    success probability P_k predicted by the steady-state distribution at
    the given ``truncation``.  Fully deterministic given ``seed``.
    """
    if shots_per_tau < 1:
        raise ValueError(f"shots_per_tau must be >= 1, got {shots_per_tau}")
    p = steady_state(params, truncation, tail_threshold=tail_threshold, strict=strict)
    probs = excited_probability(build_kernel(grid, truncation), p)
    counts = binomial_counts(np.clip(probs, 0.0, 1.0), shots_per_tau, seed)
    return MeasurementSet(
        grid=grid,
        shots_per_tau=shots_per_tau,
        counts=counts,
        seed=int(seed),
        truth_params=params,
    )


def from_counts(grid: TauGrid, shots_per_tau: int, counts) -> MeasurementSet:
    """Wrap externally measured counts (no ground truth attached)."""
    return MeasurementSet(grid=grid, shots_per_tau=shots_per_tau, counts=counts)


def _check_seed(seed) -> None:
    if int(seed) != seed:
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < _MAX_SEED:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
