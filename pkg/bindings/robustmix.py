"""Batch-call bindings for the bandmix augmentation engine.

External training loops call :func:`bind_mixup` and :func:`bind_robustmix`
on contiguous float32 buffers they own. The module keeps no state between
calls: the seed comes in per call, outputs go into caller-allocated buffers
when provided (filled in place, no reallocation) and are freshly allocated
otherwise, and no reference to a caller buffer survives the call. Inputs
are never written.

Numerics delegate to the engine itself, so results are bit-identical to
``bandmix.augment`` with the same seed, and errors surface as the engine's
own exception types. The heavy work happens inside numpy kernels, which
release the interpreter lock.
"""

import numpy as np

import bandmix
from bandmix.augment import AugmentConfig, mixup_batch, robustmix_batch
from bandmix.errors import ShapeMismatch
from bandmix.sampling import make_rng

__all__ = ["bind_mixup", "bind_robustmix", "version"]


def version() -> str:
    """Version of the engine these bindings delegate to."""
    return bandmix.__version__


def _check_view(name, buf, ndim):
    buf = np.asarray(buf)
    if buf.dtype != np.float32:
        raise ShapeMismatch(f"{name} must be float32, got {buf.dtype}")
    if not buf.flags.c_contiguous:
        raise ShapeMismatch(f"{name} must be C-contiguous")
    if buf.ndim != ndim:
        raise ShapeMismatch(f"{name} must have rank {ndim}, got shape {buf.shape}")
    return buf


def _check_out(name, out, like):
    if out is None:
        return np.empty_like(like)
    out = _check_view(name, out, like.ndim)
    if out.shape != like.shape:
        raise ShapeMismatch(f"{name} shape {out.shape} != input shape {like.shape}")
    if not out.flags.writeable:
        raise ShapeMismatch(f"{name} is not writeable")
    return out


def bind_mixup(images, labels, alpha, seed, out_images=None, out_labels=None):
    """Mixup one batch; returns (out_images, out_labels, lambda).

    ``images`` is (N, H, W, C) float32, ``labels`` is (N, K) float32 rows on
    the simplex. Output buffers, when given, must match the input shapes and
    are filled in place.
    """
    images = _check_view("images", images, 4)
    labels = _check_view("labels", labels, 2)
    out_images = _check_out("out_images", out_images, images)
    out_labels = _check_out("out_labels", out_labels, labels)

    cfg = AugmentConfig(policy="mixup", alpha=alpha, seed=int(seed))
    batch = mixup_batch(images, labels, cfg, make_rng(cfg.seed))
    np.copyto(out_images, batch.images)
    np.copyto(out_labels, batch.labels)
    return out_images, out_labels, batch.draw.lambda_low


def bind_robustmix(images, labels, alpha, tau, seed, out_images=None, out_labels=None):
    """Robustmix one batch; returns (out_images, out_labels, draw dict).

    Same buffer contract as :func:`bind_mixup`; planes must be square. The
    draw dict records lambda_low, lambda_high, cutoff and energy_weight.
    """
    images = _check_view("images", images, 4)
    labels = _check_view("labels", labels, 2)
    out_images = _check_out("out_images", out_images, images)
    out_labels = _check_out("out_labels", out_labels, labels)

    cfg = AugmentConfig(policy="robustmix", alpha=alpha, tau=tau, seed=int(seed))
    batch = robustmix_batch(images, labels, cfg, make_rng(cfg.seed))
    np.copyto(out_images, batch.images)
    np.copyto(out_labels, batch.labels)
    draw = {
        "lambda_low": batch.draw.lambda_low,
        "lambda_high": batch.draw.lambda_high,
        "cutoff": batch.draw.cutoff,
        "energy_weight": batch.draw.energy_weight,
    }
    return out_images, out_labels, draw
