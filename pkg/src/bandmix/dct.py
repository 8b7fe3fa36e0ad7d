"""Orthonormal 2-D DCT-II by dense matrix multiplication.

A plan holds the n x n basis matrix G with G[u, x] = s(u) cos(pi (2x+1) u / 2n),
s(0) = sqrt(1/n), s(u>0) = sqrt(2/n). Rows are orthonormal, so the transform
preserves energy and the inverse is the transpose. Filtering and energy
weighting elsewhere in the package lean on that: masked coefficient energy and
masked spatial energy are the same number up to float rounding.

The transform is a plain pair of matrix products per plane, not a fast
O(n log n) algorithm; plane sizes here are small and dense GEMM is the fastest
well-optimized primitive available. MAC accounting for the full band-split
pipeline counts six plane-sized products per channel (forward pair, plus an
inverse pair for each band).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidSize, ShapeMismatch


@dataclass(frozen=True)
class DctPlan:
    """Immutable transform plan for one spatial extent."""

    size: int
    matrix: np.ndarray  # (n, n) float32, row u = frequency u basis vector


def make_plan(n: int) -> DctPlan:
    """Build the orthonormal DCT-II matrix for extent ``n``."""
    if n < 1:
        raise InvalidSize(f"plan size must be >= 1, got {n}")
    x = np.arange(n, dtype=np.float64)
    u = x[:, None]
    g = np.cos(np.pi * (2.0 * x[None, :] + 1.0) * u / (2.0 * n))
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    g = (scale[:, None] * g).astype(np.float32)
    g.flags.writeable = False
    return DctPlan(n, g)


@lru_cache(maxsize=None)
def get_plan(n: int) -> DctPlan:
    """Shared plan cache; plans are immutable and thread-safe to reuse."""
    return make_plan(n)


def _resolve(plan, n):
    if plan is None:
        return get_plan(n)
    if plan.size != n:
        raise ShapeMismatch(f"plan size {plan.size} does not match extent {n}")
    return plan


def dct2d(plane, plan_h: DctPlan | None = None, plan_w: DctPlan | None = None):
    """Forward transform of the trailing two axes: G_H @ plane @ G_W^T.

    Accepts a single H x W plane or any stack (..., H, W); leading axes are
    transformed independently.
    """
    plane = np.asarray(plane)
    if plane.ndim < 2:
        raise ShapeMismatch(f"need at least 2 axes, got shape {plane.shape}")
    h, w = plane.shape[-2:]
    gh = _resolve(plan_h, h)
    gw = _resolve(plan_w, w)
    return np.matmul(np.matmul(gh.matrix, plane), gw.matrix.T)


def idct2d(spec, plan_h: DctPlan | None = None, plan_w: DctPlan | None = None):
    """Inverse of :func:`dct2d`: G_H^T @ spec @ G_W."""
    spec = np.asarray(spec)
    if spec.ndim < 2:
        raise ShapeMismatch(f"need at least 2 axes, got shape {spec.shape}")
    h, w = spec.shape[-2:]
    gh = _resolve(plan_h, h)
    gw = _resolve(plan_w, w)
    return np.matmul(np.matmul(gh.matrix.T, spec), gw.matrix)


def flop_estimate(h: int, w: int, channels: int) -> int:
    """MAC count for band-splitting one h x w x channels image.

    Six plane-sized matrix products per channel (forward over each axis, then
    an inverse pair for each of the two bands), each h*w*max(h,w) MACs. One
    MAC is counted as one FLOP; at 224x224x3 this is ~0.2 GFLOPs per image.
    """
    if h < 1 or w < 1 or channels < 1:
        raise InvalidSize(f"extents must be positive, got {h}x{w}x{channels}")
    return 6 * h * w * max(h, w) * channels
