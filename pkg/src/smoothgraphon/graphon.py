"""Partition and intensity mathematics for SBM-style graphons.

A partition of the unit square is the product of two segment
distributions.  The piecewise-constant graphon returns the block intensity
of the box containing ``(u1, u2)``; the smoothing graphon blends every
block intensity with weights obtained by integrating a Laplace density
centred on each coordinate over each segment.

All weight functions are vectorised over coordinates: pass a 1-d array of
``n`` coordinates and get back an ``(n, K)`` array.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SegmentDistribution",
    "Partition",
    "as_segments",
    "laplace_cdf",
    "laplace_mass",
    "segment_weights",
    "log_segment_weights",
    "block_weight",
    "block_weights",
    "mixture_intensity",
    "link_intensities",
    "piecewise_intensity",
    "segment_lookup",
    "intensity_grid",
    "check_intensities",
    "check_lambda",
]

# exp(-700) is ~1e-304; beyond this the Laplace tail is treated as exactly 0
_EXP_CUTOFF = 700.0
WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class SegmentDistribution:
    """Group proportions along one axis of the unit square.

    Attributes
    ----------
    theta : ndarray, shape (K,)
        Segment lengths, non-negative and summing to one.
    boundaries : ndarray, shape (K + 1,)
        Cumulative sums with ``boundaries[0] == 0`` and
        ``boundaries[K] == 1`` exactly.
    """

    theta: np.ndarray
    boundaries: np.ndarray

    @classmethod
    def from_theta(cls, theta):
        theta = np.array(theta, dtype=np.float64, ndmin=1)
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("theta must be a non-empty 1-d vector")
        if np.any(theta < 0) or not np.all(np.isfinite(theta)):
            raise ValueError("theta entries must be finite and non-negative")
        if abs(theta.sum() - 1.0) > 1e-9:
            raise ValueError(f"theta must sum to 1, got {theta.sum()!r}")
        bounds = np.empty(theta.size + 1)
        bounds[0] = 0.0
        np.cumsum(theta, out=bounds[1:])
        bounds[-1] = 1.0
        # cumulative rounding must never push an inner boundary past 1
        np.minimum(bounds, 1.0, out=bounds)
        theta.setflags(write=False)
        bounds.setflags(write=False)
        return cls(theta, bounds)

    @property
    def K(self):
        return self.theta.size


@dataclass(frozen=True)
class Partition:
    """Regular-grid partition formed by two segment distributions."""

    dim1: SegmentDistribution
    dim2: SegmentDistribution

    def __post_init__(self):
        if self.dim1.K != self.dim2.K:
            raise ValueError(
                f"both dimensions need the same K, got {self.dim1.K} and {self.dim2.K}")

    @classmethod
    def from_thetas(cls, theta1, theta2):
        return cls(SegmentDistribution.from_theta(theta1),
                   SegmentDistribution.from_theta(theta2))

    @property
    def K(self):
        return self.dim1.K


def as_segments(seg):
    """Accept a `SegmentDistribution` or a raw theta vector."""
    if isinstance(seg, SegmentDistribution):
        return seg
    return SegmentDistribution.from_theta(seg)


def check_lambda(lam):
    lam = float(lam)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError(f"smoothing parameter must be positive and finite, got {lam!r}")
    return lam


def check_intensities(B):
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"block intensities must be a square matrix, got shape {B.shape}")
    if np.any((B < 0) | (B > 1)) or not np.all(np.isfinite(B)):
        raise ValueError("block intensities must lie in [0, 1]")
    return B


def _half_tail(t):
    """0.5 * exp(-t) for t >= 0, exactly 0 past the cutoff."""
    t = np.asarray(t, dtype=np.float64)
    out = 0.5 * np.exp(-np.minimum(t, _EXP_CUTOFF))
    return np.where(t > _EXP_CUTOFF, 0.0, out)


def laplace_cdf(x, lam):
    """Cumulative distribution of the zero-mean Laplace density with rate `lam`.

    ``0.5 * exp(lam * x)`` for ``x < 0`` and ``1 - 0.5 * exp(-lam * x)``
    otherwise.  Only non-positive exponents are ever evaluated, so the
    function saturates to 0/1 instead of overflowing.
    """
    lam = check_lambda(lam)
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(over="ignore"):  # an infinite exponent saturates the tail to 0
        tail = _half_tail(lam * np.abs(x))
    out = np.where(x < 0, tail, 1.0 - tail)
    return out[()] if out.ndim == 0 else out


def laplace_mass(a, b, lam):
    """Laplace probability mass on ``[a, b]``, i.e. ``G(b) - G(a)``.

    Evaluated without subtracting nearly equal CDF values: each sign case
    is rewritten with ``expm1`` so that narrow or distant intervals keep
    full relative precision.  Requires ``a <= b`` elementwise.
    """
    lam = check_lambda(lam)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    with np.errstate(over="ignore"):
        return _laplace_mass(a, b, lam)


def _laplace_mass(a, b, lam):
    width = lam * (b - a)
    shrink = -np.expm1(-np.minimum(width, _EXP_CUTOFF))  # 1 - exp(-lam*(b-a))

    # a >= 0: 0.5 * exp(-lam*a) * (1 - exp(-lam*(b-a)))
    right = _half_tail(lam * np.maximum(a, 0.0)) * shrink
    # b <= 0: 0.5 * exp(lam*b) * (1 - exp(-lam*(b-a)))
    left = _half_tail(-lam * np.minimum(b, 0.0)) * shrink
    # a < 0 < b: -0.5 * (expm1(lam*a) + expm1(-lam*b)), both terms <= 0
    ea = np.expm1(-np.minimum(-lam * np.minimum(a, 0.0), _EXP_CUTOFF))
    eb = np.expm1(-np.minimum(lam * np.maximum(b, 0.0), _EXP_CUTOFF))
    straddle = -0.5 * (ea + eb)

    out = np.where(a >= 0, right, np.where(b <= 0, left, straddle))
    out = np.where(b > a, out, 0.0)
    return out[()] if out.ndim == 0 else out


def segment_weights(u, seg, lam):
    """Normalised Laplace weight of every segment relative to coordinate `u`.

    Parameters
    ----------
    u : float or array_like, shape (n,)
        Coordinates in ``[0, 1]``.
    seg : SegmentDistribution or array_like
        Segment distribution (or its theta vector) with ``K`` segments.
    lam : float
        Smoothing parameter.

    Returns
    -------
    ndarray, shape (K,) or (n, K)
        Rows are probability vectors.  A zero-length segment gets weight 0.
    """
    seg = as_segments(seg)
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any((u < 0) | (u > 1)):
        raise ValueError("coordinates must lie in [0, 1]")
    bounds = seg.boundaries
    shifted = bounds[None, :] - u[:, None]
    mass = laplace_mass(shifted[:, :-1], shifted[:, 1:], lam)
    # one normaliser per coordinate, shared across segments: the segments tile
    # [0, 1], so their masses add up to G(1 - u) - G(-u)
    total = mass.sum(axis=1)
    w = mass / total[:, None]
    return w[0] if scalar else w


def log_segment_weights(u, seg, lam):
    """Logarithm of `segment_weights`, floored at ``log(1e-300)``."""
    return np.log(np.maximum(segment_weights(u, seg, lam), WEIGHT_FLOOR))


def block_weight(u1, u2, partition, lam, k1, k2):
    """Weight of block ``(k1, k2)`` (0-based) for the coordinate pair."""
    w1 = segment_weights(u1, partition.dim1, lam)
    w2 = segment_weights(u2, partition.dim2, lam)
    return w1[..., k1] * w2[..., k2]


def block_weights(u1, u2, partition, lam):
    """All ``K x K`` block weights for a single coordinate pair."""
    w1 = segment_weights(float(u1), partition.dim1, lam)
    w2 = segment_weights(float(u2), partition.dim2, lam)
    return np.outer(w1, w2)


def mixture_intensity(u1, u2, partition, B, lam):
    """Smoothing-graphon intensity ``sum_k1k2 w1[k1] * w2[k2] * B[k1, k2]``.

    `u1` and `u2` broadcast against each other; for the full matrix over
    two coordinate vectors use ``u1[:, None]`` and ``u2[None, :]``.
    """
    B = check_intensities(B)
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    if u1.ndim == 2 and u2.ndim == 2 and u1.shape[1] == 1 and u2.shape[0] == 1:
        w1 = segment_weights(u1[:, 0], partition.dim1, lam)
        w2 = segment_weights(u2[0], partition.dim2, lam)
        return w1 @ B @ w2.T
    b1, b2 = np.broadcast_arrays(u1, u2)
    w1 = segment_weights(b1.ravel(), partition.dim1, lam)
    w2 = segment_weights(b2.ravel(), partition.dim2, lam)
    g = np.einsum("ak,kl,al->a", w1, B, w2)
    g = g.reshape(b1.shape)
    return g[()] if g.ndim == 0 else g


def link_intensities(w1, w2, B, rows, cols):
    """Mixture intensity at selected cells from precomputed weight rows.

    With per-node weight matrices computed once, this costs ``O(K^2)`` per
    requested cell, i.e. ``O(K^2 L)`` for ``L`` links.
    """
    return np.einsum("ak,kl,al->a", w1[rows], B, w2[cols])


def segment_lookup(u, seg):
    """0-based index of the segment containing `u`.

    Segments are half-open ``[L_{k-1}, L_k)`` with ``u == 1`` assigned to
    the last segment.
    """
    seg = as_segments(seg)
    u = np.asarray(u, dtype=np.float64)
    idx = np.searchsorted(seg.boundaries, u, side="right") - 1
    idx = np.clip(idx, 0, seg.K - 1)
    return idx[()] if idx.ndim == 0 else idx


def piecewise_intensity(u1, u2, partition, B):
    """Piecewise-constant SBM graphon: ``B`` of the box holding ``(u1, u2)``."""
    B = check_intensities(B)
    k1 = segment_lookup(u1, partition.dim1)
    k2 = segment_lookup(u2, partition.dim2)
    return B[k1, k2]


def intensity_grid(partition, B, lam=None, resolution=200, mode="smooth"):
    """Evaluate the graphon at cell centres of a ``resolution`` square grid.

    Cell ``(a, b)`` holds the intensity at ``((a + 0.5) / res, (b + 0.5) / res)``.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    centres = (np.arange(resolution) + 0.5) / resolution
    if mode == "smooth":
        if lam is None:
            raise ValueError("smooth mode needs a smoothing parameter")
        return mixture_intensity(centres[:, None], centres[None, :], partition, B, lam)
    if mode == "piecewise":
        return piecewise_intensity(centres[:, None], centres[None, :], partition, B)
    raise ValueError(f"unknown grid mode {mode!r}")
