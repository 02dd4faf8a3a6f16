"""Maximum-likelihood inversion of probe-atom statistics.

The measured excited-state frequencies are a linear-positive statistical
model of the unknown photon distribution, so the likelihood can be climbed
with a multiplicative expectation-maximization fixed-point update.  Each
update rescales every level by how well it explains the data; the iteration
is monotone in the log-likelihood, preserves zeros, and converges to the
maximum-likelihood distribution from any strictly positive start.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from micromaser.kernel import KernelMatrix
from micromaser.photon_model import NORMALIZATION_ATOL, PhotonDistribution

#: Allowed per-iteration decrease of the log-likelihood (floating-point slack).
MONOTONE_SLACK = 1e-10


@dataclass
class EmConfig:
    """Iteration controls for the reconstruction.

    ``init`` of None starts from the uniform distribution; a custom start
    must be normalized and strictly positive everywhere (zero entries can
    never recover under multiplicative updates).  ``stop_tolerance`` > 0
    stops early once the per-iteration likelihood gain falls below it; 0
    runs exactly ``max_iterations``.
    """

    max_iterations: int
    init: PhotonDistribution | None = None
    stop_tolerance: float = 0.0
    floor_epsilon: float = 1e-300

    def __post_init__(self) -> None:
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ValueError(
                f"max_iterations must be a nonnegative integer, got {self.max_iterations}"
            )
        self.max_iterations = int(self.max_iterations)
        if self.stop_tolerance < 0:
            raise ValueError("stop_tolerance must be nonnegative")
        if not self.floor_epsilon > 0:
            raise ValueError("floor_epsilon must be positive")


@dataclass(eq=False)
class ReconstructionResult:
    """Outcome of an iterative reconstruction.

    ``loglik_trace`` holds the log-likelihood after each completed
    iteration (length ``iterations_run``).  ``residual`` is the sup-norm
    distance between the final estimate and its image under the
    stationarity map; it vanishes at a likelihood fixed point.
    """

    estimate: PhotonDistribution
    iterations_run: int
    loglik_trace: np.ndarray
    converged_early: bool
    residual: float


def uniform_init(truncation: int) -> PhotonDistribution:
    """Flat distribution over levels 0..truncation."""
    return PhotonDistribution(
        np.full(truncation + 1, 1.0 / (truncation + 1)), label="uniform-init"
    )


def log_likelihood(kernel: KernelMatrix, freqs, p: PhotonDistribution) -> float:
    """Normalized-model log-likelihood of the observed frequencies.

    L = sum_k f_k * log(P_k / sum_m P_m) with P = kernel @ p.  Terms with
    f_k = 0 contribute nothing; if any observed point has zero model
    probability the likelihood is -inf.
    """
    f = _as_frequencies(kernel, freqs)
    _check_compatible(kernel, p)
    probs = kernel.entries @ p.probs
    total = probs.sum()
    observed = f > 0
    if total <= 0 or np.any(probs[observed] <= 0):
        return float("-inf")
    return float(np.dot(f[observed], np.log(probs[observed] / total)))


def em_step(
    kernel: KernelMatrix,
    freqs,
    p: PhotonDistribution,
    floor_epsilon: float = 1e-300,
) -> PhotonDistribution:
    """One multiplicative likelihood-ascent update.

    p'_n = (p_n / sum_m p_m) * sum_k [c_kn / sum_l c_ln] * [f_k / P_k],
    renormalized to unit sum.  The update is scale-covariant, so the
    renormalization does not move the fixed points; zero entries stay zero.
    """
    f = _as_frequencies(kernel, freqs)
    _check_compatible(kernel, p)
    model = np.maximum(kernel.entries @ p.probs, floor_epsilon)
    column = kernel.column_weights
    if np.any(column <= 0):
        warnings.warn(
            "kernel has an all-zero column; flooring its weight", RuntimeWarning
        )
        column = np.maximum(column, floor_epsilon)
    updated = (p.probs / p.probs.sum()) * (kernel.entries.T @ (f / model)) / column
    total = updated.sum()
    if total <= 0:
        # all-zero frequencies leave the likelihood flat; keep the iterate
        return PhotonDistribution(p.probs.copy(), label=p.label)
    return PhotonDistribution(updated / total, label="ml-em")


def stationarity_map(
    kernel: KernelMatrix,
    freqs,
    p: PhotonDistribution,
    floor_epsilon: float = 1e-300,
) -> np.ndarray:
    """Image of ``p`` under the likelihood-stationarity map T.

    T p_n = p_n * (sum_l P_l / sum_l f_l) * sum_k [c_kn / sum_m c_mn] * [f_k / P_k].
    Maximum-likelihood distributions satisfy T p = p, so ``max |T p - p|``
    is a fixed-point residual.
    """
    f = _as_frequencies(kernel, freqs)
    _check_compatible(kernel, p)
    model = np.maximum(kernel.entries @ p.probs, floor_epsilon)
    column = np.maximum(kernel.column_weights, floor_epsilon)
    scale = model.sum() / max(f.sum(), floor_epsilon)
    return p.probs * scale * (kernel.entries.T @ (f / model)) / column


def stationarity_residual(
    kernel: KernelMatrix,
    freqs,
    p: PhotonDistribution,
    floor_epsilon: float = 1e-300,
) -> float:
    """Sup-norm fixed-point defect max_n |T p_n - p_n|."""
    return float(
        np.max(np.abs(stationarity_map(kernel, freqs, p, floor_epsilon) - p.probs))
    )


def reconstruct(
    kernel: KernelMatrix, freqs, config: EmConfig
) -> ReconstructionResult:
    """Iterate the multiplicative update from the configured start.

    Runs ``config.max_iterations`` updates (or stops early once the
    likelihood gain per iteration drops below ``config.stop_tolerance``,
    when that is positive), recording the log-likelihood after every
    iteration.  Always returns a result; monotonicity of the trace is
    asserted in debug runs.
    """
    f = _as_frequencies(kernel, freqs)
    if np.any(f < 0) or np.any(f > 1):
        raise ValueError("frequencies must lie in [0, 1]")
    p = _initial_distribution(kernel, config)

    trace: list[float] = []
    previous = log_likelihood(kernel, f, p)
    converged_early = False
    for _ in range(config.max_iterations):
        p = em_step(kernel, f, p, config.floor_epsilon)
        current = log_likelihood(kernel, f, p)
        assert current >= previous - MONOTONE_SLACK, (
            f"likelihood decreased: {previous} -> {current}"
        )
        trace.append(current)
        gain = current - previous
        previous = current
        if config.stop_tolerance > 0 and gain < config.stop_tolerance:
            converged_early = True
            break

    return ReconstructionResult(
        estimate=p,
        iterations_run=len(trace),
        loglik_trace=np.asarray(trace),
        converged_early=converged_early,
        residual=stationarity_residual(kernel, f, p, config.floor_epsilon),
    )


def _initial_distribution(kernel: KernelMatrix, config: EmConfig) -> PhotonDistribution:
    if config.init is None:
        return uniform_init(kernel.truncation)
    init = config.init
    if init.truncation != kernel.truncation:
        raise ValueError(
            f"incompatible truncation: kernel holds {kernel.truncation}, "
            f"init holds {init.truncation}"
        )
    if np.any(init.probs <= 0):
        raise ValueError("custom init must be strictly positive everywhere")
    if abs(init.probs.sum() - 1.0) > NORMALIZATION_ATOL:
        raise ValueError("custom init must be normalized")
    return init


def _as_frequencies(kernel: KernelMatrix, freqs) -> np.ndarray:
    f = np.asarray(freqs, dtype=float)
    if f.shape != (kernel.n_points,):
        raise ValueError(
            f"expected {kernel.n_points} frequencies, got shape {f.shape}"
        )
    return f


def _check_compatible(kernel: KernelMatrix, p: PhotonDistribution) -> None:
    if p.truncation != kernel.truncation:
        raise ValueError(
            f"incompatible truncation: kernel holds {kernel.truncation}, "
            f"distribution holds {p.truncation}"
        )
