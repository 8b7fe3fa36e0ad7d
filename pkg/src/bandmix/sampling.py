"""Seedable draws for mixing coefficients and band cutoffs.

One (lambda_low, lambda_high, cutoff) triple is drawn per minibatch, in that
order, from a PCG64 stream. The same seed therefore reproduces the same
augmented batches end to end; parallel workers should take child streams
from :func:`split_rng` instead of sharing one generator.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlpha, InvalidTau


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical draw sequences."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child streams for parallel workers."""
    return list(rng.spawn(n))


@dataclass(frozen=True)
class RobustmixDraw:
    """Sampled parameters for one minibatch.

    ``energy_weight`` is the measured low-band energy fraction at ``cutoff``;
    it is filled in by the augmentation step, not sampled.
    """

    lambda_low: float
    lambda_high: float
    cutoff: float
    energy_weight: float | None = None


def sample_beta(alpha: float, rng: np.random.Generator) -> float:
    """One draw from Beta(alpha, alpha)."""
    if not alpha > 0:
        raise InvalidAlpha(f"alpha must be > 0, got {alpha}")
    return float(rng.beta(alpha, alpha))


def sample_cutoff(tau: float, rng: np.random.Generator) -> float:
    """Uniform cutoff on [tau, 1]; tau = 1 pins the cutoff and disables
    band interpolation, which reduces the policy to plain mixup."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidTau(f"tau must be in [0, 1], got {tau}")
    return float(rng.uniform(tau, 1.0))


def sample_draw(alpha: float, tau: float, rng: np.random.Generator) -> RobustmixDraw:
    lam_low = sample_beta(alpha, rng)
    lam_high = sample_beta(alpha, rng)
    cutoff = sample_cutoff(tau, rng)
    return RobustmixDraw(lam_low, lam_high, cutoff)
