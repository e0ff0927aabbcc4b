"""Generative processes for the SBM, ISG, LFSG and MMSB relational models.

All four share a ``K x K`` matrix of Beta-distributed block intensities.
They differ in how a cell ``(i, j)`` picks the block(s) it draws from:

* SBM   - each node has one sender and one receiver group, found by
  locating its uniform coordinates in the two segment distributions.
* ISG   - the edge probability blends all blocks with Laplace weights of
  the coordinates (the smoothing graphon).
* LFSG  - every cell draws its own sender/receiver labels from the
  per-node Laplace weights; marginally this reproduces the ISG intensity.
* MMSB  - every cell draws labels from free per-node membership vectors.

Group labels are 0-based throughout.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import graphon
from ._sampling import bernoulli, categorical
from .graphon import Partition, segment_lookup, segment_weights
from .relational import Cell, RelationalMatrix

__all__ = [
    "ModelKind",
    "Hyperparameters",
    "LatentState",
    "MmsbState",
    "sample_prior",
    "sample_mmsb_prior",
    "generate_sbm",
    "generate_isg",
    "generate_lfsg",
    "generate_mmsb",
    "generate",
    "log_likelihood",
    "cell_probabilities",
]


class ModelKind(str, Enum):
    SBM = "sbm"
    ISG = "isg"
    LFSG = "lfsg"
    MMSB = "mmsb"


@dataclass(frozen=True)
class Hyperparameters:
    """Prior settings.

    ``B ~ Beta(alpha0, beta0)`` entrywise, ``theta ~ Dirichlet(alpha)`` for
    both dimensions (and for the MMSB membership rows), and
    ``lambda ~ Gamma(lambda_shape, rate=lambda_rate)``.
    """

    alpha0: float
    beta0: float
    alpha: tuple
    lambda_shape: float = 1.0
    lambda_rate: float = 1.0

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        object.__setattr__(self, "alpha", alpha)
        values = (self.alpha0, self.beta0, self.lambda_shape, self.lambda_rate) + alpha
        if not all(np.isfinite(v) and v > 0 for v in values):
            raise ValueError(f"all hyperparameters must be strictly positive, got {self}")

    @classmethod
    def symmetric(cls, K, alpha0=1.0, beta0=1.0, concentration=1.0):
        return cls(alpha0, beta0, (concentration,) * K)

    @classmethod
    def from_sparsity(cls, sparsity, K, concentration=1.0):
        """``alpha0 = S``, ``beta0 = 1 - S`` so that ``E[B]`` equals the sparsity."""
        if not 0 < sparsity < 1:
            raise ValueError(f"sparsity must lie strictly in (0, 1), got {sparsity!r}")
        return cls(float(sparsity), 1.0 - float(sparsity), (concentration,) * K)

    @property
    def K(self):
        return len(self.alpha)


@dataclass
class LatentState:
    """Latent variables of an SBM, ISG or LFSG model.

    Only the label fields belonging to `kind` may be populated: ``z1, z2``
    for the SBM, ``s, r`` for the LFSG, neither for the ISG.  LFSG label
    arrays are ``n x n``; cells that carry no label hold -1.
    """

    kind: ModelKind
    theta1: np.ndarray
    theta2: np.ndarray
    B: np.ndarray
    u1: np.ndarray = None
    u2: np.ndarray = None
    lam: float = None
    z1: np.ndarray = None
    z2: np.ndarray = None
    s: np.ndarray = None
    r: np.ndarray = None

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        self.theta1 = np.asarray(self.theta1, dtype=np.float64)
        self.theta2 = np.asarray(self.theta2, dtype=np.float64)
        self.B = np.asarray(self.B, dtype=np.float64)
        if self.u1 is not None:
            self.u1 = np.asarray(self.u1, dtype=np.float64)
            self.u2 = np.asarray(self.u2, dtype=np.float64)
        for name in ("z1", "z2", "s", "r"):
            if getattr(self, name) is not None:
                setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        self.validate()

    @property
    def K(self):
        return self.theta1.size

    @property
    def n(self):
        if self.u1 is not None:
            return self.u1.size
        return self.z1.size

    @property
    def partition(self):
        return Partition.from_thetas(self.theta1, self.theta2)

    def weights(self):
        """Per-node segment weights ``(w1, w2)``, each ``n x K``."""
        p = self.partition
        return (segment_weights(self.u1, p.dim1, self.lam),
                segment_weights(self.u2, p.dim2, self.lam))

    def validate(self):
        graphon.check_intensities(self.B)
        if self.B.shape[0] != self.K or self.theta2.size != self.K:
            raise ValueError("theta1, theta2 and B disagree on K")
        if self.u1 is not None:
            for u in (self.u1, self.u2):
                if np.any((u < 0) | (u > 1)):
                    raise ValueError("coordinates must lie in [0, 1]")
        has_z = self.z1 is not None or self.z2 is not None
        has_sr = self.s is not None or self.r is not None
        if self.kind is ModelKind.ISG and (has_z or has_sr):
            raise ValueError("ISG states carry no labels")
        if self.kind is ModelKind.SBM and has_sr:
            raise ValueError("SBM states carry node labels z1/z2, not pairwise labels")
        if self.kind is ModelKind.LFSG and has_z:
            raise ValueError("LFSG states carry pairwise labels s/r, not node labels")
        if self.kind is ModelKind.MMSB:
            raise ValueError("use MmsbState for the MMSB")
        if self.kind in (ModelKind.ISG, ModelKind.LFSG):
            if self.u1 is None:
                raise ValueError(f"{self.kind.value} states need coordinates")
            graphon.check_lambda(self.lam)
        for labels in (self.z1, self.z2, self.s, self.r):
            if labels is not None and np.any(labels >= self.K):
                raise ValueError(f"labels must lie in 0..{self.K - 1}")

    def copy(self):
        def dup(a):
            return None if a is None else np.array(a, copy=True)
        return replace(self, theta1=dup(self.theta1), theta2=dup(self.theta2), B=dup(self.B),
                       u1=dup(self.u1), u2=dup(self.u2), z1=dup(self.z1), z2=dup(self.z2),
                       s=dup(self.s), r=dup(self.r))


@dataclass
class MmsbState:
    """Mixed-membership state: one membership row ``F[i]`` per node."""

    F: np.ndarray
    B: np.ndarray
    s: np.ndarray = None
    r: np.ndarray = None
    kind: ModelKind = field(default=ModelKind.MMSB, init=False)

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=np.float64)
        self.B = np.asarray(self.B, dtype=np.float64)
        self.validate()

    @property
    def K(self):
        return self.F.shape[1]

    @property
    def n(self):
        return self.F.shape[0]

    def validate(self):
        graphon.check_intensities(self.B)
        if self.F.ndim != 2 or self.F.shape[1] != self.B.shape[0]:
            raise ValueError("F must be n x K with K matching B")
        if np.any(self.F < 0) or not np.allclose(self.F.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("rows of F must be probability vectors")

    def copy(self):
        return MmsbState(self.F.copy(), self.B.copy(),
                         None if self.s is None else self.s.copy(),
                         None if self.r is None else self.r.copy())


def _draw_block_intensities(h, rng):
    return rng.beta(h.alpha0, h.beta0, size=(h.K, h.K))


def sample_prior(h, n, rng, kind=ModelKind.LFSG):
    """Draw ``B``, ``theta1``, ``theta2``, coordinates and ``lambda`` from the prior.

    For the SBM the node labels are filled in from the coordinates.  LFSG
    pairwise labels are drawn together with the data by `generate_lfsg`.
    """
    kind = ModelKind(kind)
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind is ModelKind.MMSB:
        raise ValueError("use sample_mmsb_prior for the MMSB")
    B = _draw_block_intensities(h, rng)
    alpha = np.asarray(h.alpha)
    theta1 = rng.dirichlet(alpha)
    theta2 = rng.dirichlet(alpha)
    u1 = rng.random(n)
    u2 = rng.random(n)
    lam = rng.gamma(h.lambda_shape, 1.0 / h.lambda_rate)
    state = LatentState(kind, theta1, theta2, B, u1, u2, lam)
    if kind is ModelKind.SBM:
        state.z1 = segment_lookup(u1, theta1)
        state.z2 = segment_lookup(u2, theta2)
    return state


def sample_mmsb_prior(h, n, rng):
    B = _draw_block_intensities(h, rng)
    F = rng.dirichlet(np.asarray(h.alpha), size=n)
    return MmsbState(F, B)


def _require(state, kind):
    if state.kind is not kind:
        raise ValueError(f"expected a {kind.value} state, got {state.kind.value}")


def _finish(R, self_loops):
    if not self_loops:
        np.fill_diagonal(R, 0)
    return RelationalMatrix.from_dense(R, self_loops=self_loops)


def generate_sbm(state, rng, self_loops=False):
    """``R_ij ~ Bernoulli(B[z1_i, z2_j])`` with ``z`` looked up from the coordinates."""
    _require(state, ModelKind.SBM)
    if state.u1 is not None:
        state.z1 = segment_lookup(state.u1, state.theta1)
        state.z2 = segment_lookup(state.u2, state.theta2)
    P = state.B[state.z1][:, state.z2]
    return _finish(bernoulli(P, rng), self_loops)


def generate_isg(state, rng, self_loops=False):
    """``R_ij ~ Bernoulli(g(u1_i, u2_j))`` with the smoothing-graphon intensity."""
    _require(state, ModelKind.ISG)
    w1, w2 = state.weights()
    return _finish(bernoulli(w1 @ state.B @ w2.T, rng), self_loops)


def generate_lfsg(state, rng, self_loops=False):
    """Draw pairwise labels from the node weights, then ``R_ij ~ Bernoulli(B[s_ij, r_ij])``.

    Labels are stored on `state` for every cell, diagonal included.
    """
    _require(state, ModelKind.LFSG)
    n = state.n
    w1, w2 = state.weights()
    s = categorical(np.broadcast_to(w1[:, None, :], (n, n, state.K)), rng)
    r = categorical(np.broadcast_to(w2[None, :, :], (n, n, state.K)), rng)
    state.s, state.r = s, r
    return _finish(bernoulli(state.B[s, r], rng), self_loops)


def generate_mmsb(state, rng, self_loops=False):
    """``s_ij ~ Cat(F_i)``, ``r_ij ~ Cat(F_j)``, ``R_ij ~ Bernoulli(B[s_ij, r_ij])``."""
    n, K = state.F.shape
    s = categorical(np.broadcast_to(state.F[:, None, :], (n, n, K)), rng)
    r = categorical(np.broadcast_to(state.F[None, :, :], (n, n, K)), rng)
    state.s, state.r = s, r
    return _finish(bernoulli(state.B[s, r], rng), self_loops)


_GENERATORS = {
    ModelKind.SBM: generate_sbm,
    ModelKind.ISG: generate_isg,
    ModelKind.LFSG: generate_lfsg,
    ModelKind.MMSB: generate_mmsb,
}


def generate(state, rng, self_loops=False):
    """Dispatch to the generator matching ``state.kind``."""
    return _GENERATORS[state.kind](state, rng, self_loops=self_loops)


def cell_probabilities(state, rows, cols):
    """Success probability of each requested cell under the state's likelihood.

    ISG uses the mixture intensity, SBM ``B[z1, z2]`` and LFSG/MMSB the
    block of the cell's own labels.
    """
    kind = state.kind
    if kind is ModelKind.ISG:
        w1, w2 = state.weights()
        return graphon.link_intensities(w1, w2, state.B, rows, cols)
    if kind is ModelKind.SBM:
        return state.B[state.z1[rows], state.z2[cols]]
    if state.s is None:
        raise ValueError(f"{kind.value} likelihood needs pairwise labels")
    return state.B[state.s[rows, cols], state.r[rows, cols]]


def log_likelihood(state, R):
    """Bernoulli log-likelihood of the TRAIN cells of `R`.

    Returns ``-inf`` when a probability of exactly 0 or 1 contradicts an
    observed cell.
    """
    rows, cols = R.cells(Cell.TRAIN)
    if rows.size == 0:
        return 0.0
    p = cell_probabilities(state, rows, cols)
    y = R.entries[rows, cols].astype(bool)
    with np.errstate(divide="ignore"):
        terms = np.where(y, np.log(p), np.log1p(-p))
    return float(terms.sum())
