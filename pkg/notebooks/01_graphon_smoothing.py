# %% [markdown]
# # Smoothing a block graphon
#
# A stochastic block model partitions the unit square into boxes and gives
# every box one link probability.  The smoothing graphon replaces the hard
# box membership of a coordinate with Laplace weights over the segments,
# so the intensity varies continuously.  One parameter, the smoothing
# parameter, interpolates between a constant graphon and the block model.

# %%
import numpy as np

from smoothgraphon.graphon import (Partition, intensity_grid, mixture_intensity,
                                   piecewise_intensity, segment_weights)

theta = np.array([0.15, 0.27, 0.08, 0.5])
partition = Partition.from_thetas(theta, theta)
B = np.array([[0.9, 0.1, 0.5, 0.2],
              [0.1, 0.8, 0.3, 0.6],
              [0.4, 0.2, 0.9, 0.1],
              [0.3, 0.7, 0.2, 0.95]])

# %% [markdown]
# ## Segment weights of one coordinate
#
# The weight of segment k is the Laplace mass of that segment around the
# coordinate, normalised over [0, 1].  Small values spread the weight in
# proportion to segment length; large values concentrate it on the segment
# holding the coordinate.

# %%
u = 0.3
for lam in (0.25, 25.0, 250.0):
    w = segment_weights(u, theta, lam)
    print(f"lambda={lam:>6}: weights={np.round(w, 4)}  sum={w.sum():.12f}")
print("segment lengths:", theta)

# %% [markdown]
# ## Intensity grids and sharpness
#
# Each grid cell holds the intensity at its centre.  The largest jump
# between neighbouring cells measures how sharp the graphon is.

# %%
grids = {lam: intensity_grid(partition, B, lam, resolution=100) for lam in (0.25, 25.0, 250.0)}
piecewise = intensity_grid(partition, B, resolution=100, mode="piecewise")
for lam, grid in grids.items():
    jump = np.abs(np.diff(grid, axis=0)).max()
    gap = np.abs(grid - piecewise).max()
    print(f"lambda={lam:>6}: max neighbour jump={jump:.3f}, max gap to block model={gap:.3f}")

# %% [markdown]
# ## The two limits
#
# A very large smoothing parameter recovers the block intensities away from
# the boundaries; a very small one gives a constant equal to the
# theta-weighted average of B.

# %%
rng = np.random.default_rng(0)
u1, u2 = rng.random((2, 5))
print("lambda=1e6 :", np.round(mixture_intensity(u1, u2, partition, B, 1e6), 6))
print("block model:", np.round(piecewise_intensity(u1, u2, partition, B), 6))
print("lambda=1e-8:", np.round(mixture_intensity(u1, u2, partition, B, 1e-8), 6))
print("average    :", round(float(theta @ B @ theta), 6))
