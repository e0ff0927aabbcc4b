"""Vectorised draws used by both the generators and the samplers."""

import numpy as np


def categorical(probs, rng):
    """One draw per row of `probs` (last axis sums to one), 0-based."""
    probs = np.asarray(probs, dtype=np.float64)
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[:-1]) * cdf[..., -1]
    idx = (cdf <= u[..., None]).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def categorical_log(logits, rng):
    """Draw from unnormalised log-probabilities along the last axis."""
    logits = np.asarray(logits, dtype=np.float64)
    p = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return categorical(p, rng)


def bernoulli(p, rng):
    p = np.asarray(p, dtype=np.float64)
    return (rng.random(p.shape) < p).astype(np.uint8)
