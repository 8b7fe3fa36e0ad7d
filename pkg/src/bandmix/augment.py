"""Batch augmentation policies.

``mixup`` trains on convex combinations of example pairs; ``robustmix``
splits each image into a low and a high frequency band, interpolates the two
bands with separate coefficients, and weights the mixed label by the measured
low-band energy share. Two ablations drop the energy weighting or the
in-band interpolation.

Pairing is deterministic: each example mixes with its mirror under batch
reversal. An odd-length batch pairs its middle element with itself, which
passes through essentially unchanged. The whole DCT is computed once per
minibatch; because filtering and linear interpolation commute, mixing the
filtered bands equals filtering the mixed images.

Mixed images are not clipped back to [0, 1]; band filtering can legitimately
overshoot the input range slightly.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidAlpha, InvalidTau, NonSquarePlane, ShapeMismatch
from .filters import band_split
from .sampling import RobustmixDraw, sample_beta, sample_cutoff, sample_draw

POLICY_BASELINE = "baseline"
POLICY_MIXUP = "mixup"
POLICY_ROBUSTMIX = "robustmix"
POLICY_NO_ENERGY_WEIGHT = "robustmix_no_energy_weight"
POLICY_NO_INBAND_MIX = "robustmix_no_inband_mix"

POLICIES = (
    POLICY_BASELINE,
    POLICY_MIXUP,
    POLICY_ROBUSTMIX,
    POLICY_NO_ENERGY_WEIGHT,
    POLICY_NO_INBAND_MIX,
)


@dataclass(frozen=True)
class AugmentConfig:
    policy: str = POLICY_ROBUSTMIX
    alpha: float = 0.2
    tau: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}, want one of {POLICIES}")
        if self.policy != POLICY_BASELINE and not self.alpha > 0:
            raise InvalidAlpha(f"alpha must be > 0, got {self.alpha}")
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidTau(f"tau must be in [0, 1], got {self.tau}")


@dataclass(frozen=True)
class MixedBatch:
    """Augmented images and soft labels plus the parameters that made them."""

    images: np.ndarray  # (N, H, W, C)
    labels: np.ndarray  # (N, K), rows stay on the simplex
    draw: RobustmixDraw


def mix(a, b, lam: float):
    """Linear interpolation lam * a + (1 - lam) * b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"mix operands differ: {a.shape} vs {b.shape}")
    lam = float(lam)
    return lam * a + (1.0 - lam) * b


def _check_pair(images, labels):
    images = np.asarray(images, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.float32)
    if images.shape[0] != labels.shape[0]:
        raise ShapeMismatch(
            f"batch sizes differ: {images.shape[0]} images, {labels.shape[0]} labels"
        )
    if images.shape[0] < 1:
        raise ShapeMismatch("empty batch")
    return images, labels


def _check_square_batch(images):
    if images.ndim != 4:
        raise ShapeMismatch(f"expected N x H x W x C images, got {images.shape}")
    if images.shape[1] != images.shape[2]:
        raise NonSquarePlane(f"planes must be square, got {images.shape[1:3]}")


def mixup_batch(images, labels, cfg: AugmentConfig, rng, *, lam=None) -> MixedBatch:
    """Plain mixup against the reversed batch with one Beta(alpha, alpha) draw.

    ``lam`` overrides the draw (test hook / forced coefficient).
    """
    images, labels = _check_pair(images, labels)
    if lam is None:
        lam = sample_beta(cfg.alpha, rng)
    lam = float(lam)
    mixed_x = mix(images, images[::-1], lam)
    mixed_y = mix(labels, labels[::-1], lam)
    return MixedBatch(mixed_x, mixed_y, RobustmixDraw(lam, lam, 1.0, 1.0))


def robustmix_batch(
    images, labels, cfg: AugmentConfig, rng, *, draw=None, threads: int = 1
) -> MixedBatch:
    """Band-interpolated mixup with energy-weighted labels.

    Per batch: split at a sampled cutoff into low band L and remainder
    H = X - L, measure the low-band energy share lam_c, then

        images: mix(L, rev L, lam_low) + mix(H, rev H, lam_high)
        labels: mix(Y, rev Y, lam_c * lam_low + (1 - lam_c) * lam_high)

    ``draw`` overrides the sampled parameters; its energy weight is always
    recomputed from the batch.
    """
    images, labels = _check_pair(images, labels)
    _check_square_batch(images)
    if draw is None:
        draw = sample_draw(cfg.alpha, cfg.tau, rng)

    low, high, lam_c = band_split(images, draw.cutoff, threads=threads)
    lam_y = lam_c * draw.lambda_low + (1.0 - lam_c) * draw.lambda_high

    mixed_x = mix(low, low[::-1], draw.lambda_low) + mix(
        high, high[::-1], draw.lambda_high
    )
    mixed_y = mix(labels, labels[::-1], lam_y)
    return MixedBatch(mixed_x, mixed_y, replace(draw, energy_weight=lam_c))


def robustmix_no_energy_weight_batch(
    images, labels, cfg: AugmentConfig, rng, *, draw=None, threads: int = 1
) -> MixedBatch:
    """Ablation: images as in robustmix, but the label coefficient uses the
    raw cutoff instead of the measured energy share."""
    images, labels = _check_pair(images, labels)
    _check_square_batch(images)
    if draw is None:
        draw = sample_draw(cfg.alpha, cfg.tau, rng)

    low, high, lam_c = band_split(images, draw.cutoff, threads=threads)
    lam_y = draw.cutoff * draw.lambda_low + (1.0 - draw.cutoff) * draw.lambda_high

    mixed_x = mix(low, low[::-1], draw.lambda_low) + mix(
        high, high[::-1], draw.lambda_high
    )
    mixed_y = mix(labels, labels[::-1], lam_y)
    return MixedBatch(mixed_x, mixed_y, replace(draw, energy_weight=lam_c))


def robustmix_no_inband_mix_batch(
    images, labels, cfg: AugmentConfig, rng, *, draw=None, threads: int = 1
) -> MixedBatch:
    """Ablation: whole bands are swapped instead of interpolated, i.e.
    robustmix with lambda_low = 1 and lambda_high = 0 forced. Only the cutoff
    is sampled."""
    if draw is None:
        draw = RobustmixDraw(1.0, 0.0, sample_cutoff(cfg.tau, rng))
    else:
        draw = replace(draw, lambda_low=1.0, lambda_high=0.0)
    return robustmix_batch(images, labels, cfg, rng, draw=draw, threads=threads)


_POLICY_FNS = {
    POLICY_MIXUP: mixup_batch,
    POLICY_ROBUSTMIX: robustmix_batch,
    POLICY_NO_ENERGY_WEIGHT: robustmix_no_energy_weight_batch,
    POLICY_NO_INBAND_MIX: robustmix_no_inband_mix_batch,
}


def apply_policy(images, labels, cfg: AugmentConfig, rng, threads: int = 1) -> MixedBatch:
    """Dispatch on cfg.policy; baseline passes the batch through untouched."""
    if cfg.policy == POLICY_BASELINE:
        images, labels = _check_pair(images, labels)
        return MixedBatch(images, labels, RobustmixDraw(1.0, 1.0, 1.0, 1.0))
    fn = _POLICY_FNS[cfg.policy]
    if cfg.policy == POLICY_MIXUP:
        return fn(images, labels, cfg, rng)
    return fn(images, labels, cfg, rng, threads=threads)
