"""MCMC posterior samplers for the SBM, ISG, LFSG and MMSB.

Every sampler works on the TRAIN cells of a `RelationalMatrix` only; TEST
and EXCLUDED cells never enter a likelihood term or a count.  Each sweep
updates blocks of conditionally independent variables with one vectorised
draw: all sender coordinates at once, all sender labels at once, and so
on.  That is exact Gibbs/Metropolis-within-Gibbs because, given the rest
of the state, those variables factorise.

LFSG sweep order: coordinates, segment distributions, block intensities,
pairwise labels, smoothing parameter.  The ISG sweep is the same minus the
labels, with every acceptance ratio evaluated against the exact
mixture-intensity Bernoulli likelihood and the block intensities moved by
a logit-scale random walk.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, expit, logit, xlog1py, xlogy

from . import graphon
from ._sampling import categorical, categorical_log
from .exceptions import NumericalError
from .graphon import WEIGHT_FLOOR, link_intensities, segment_weights
from .models import LatentState, MmsbState, ModelKind, log_likelihood
from .relational import Cell

__all__ = [
    "SufficientCounts",
    "SamplerConfig",
    "Trace",
    "counts_from_labels",
    "spectral_coordinates",
    "log_ratio_u",
    "log_ratio_theta",
    "log_ratio_lambda",
    "label_probabilities",
    "update_u",
    "update_theta",
    "update_B",
    "update_labels",
    "update_lambda",
    "run_sampler",
    "run_lfsg_sampler",
    "run_isg_sampler",
    "run_sbm_sampler",
    "run_mmsb_sampler",
    "posterior_predictive",
]

# keeps log(B) and log(1 - B) finite for Beta draws that round to 0 or 1
_B_LOW = np.finfo(np.float64).tiny
_B_HIGH = 1.0 - np.finfo(np.float64).epsneg


@dataclass
class SufficientCounts:
    """Label tallies over TRAIN cells.

    ``m1[i, k]`` counts cells ``(i, j)`` with sender label ``k``;
    ``m2[i, k]`` counts cells ``(j, i)`` with receiver label ``k``.
    ``N1`` / ``N0`` count ones / zeros per ``(sender, receiver)`` block.
    """

    m1: np.ndarray
    m2: np.ndarray
    N1: np.ndarray
    N0: np.ndarray

    def __eq__(self, other):
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("m1", "m2", "N1", "N0"))


@dataclass
class SamplerConfig:
    """Chain length and kernel settings.

    The ``update_*`` switches freeze whole parameter families, which is
    how the small oracle fixtures are built; ``update_theta`` also covers
    the MMSB membership rows.  `free_B` optionally restricts block updates
    to a boolean ``K x K`` selection.

    ISG and LFSG chains without an explicit initial state start from the
    data: coordinates from `spectral_coordinates`, both segment
    distributions at the Dirichlet mean, the smoothing parameter at
    ``init_lambda`` and ``B`` at the posterior-mean block densities of the
    TRAIN cells under the segments holding the coordinates.  ``prior_init=True``
    draws every parameter from the prior instead.  The label-based LFSG
    posterior has a flat mode in which the blocks all share one intensity
    and the labels ignore the data; with the prescribed independence
    proposals a chain that starts from random coordinates often stays
    there for the whole run.
    """

    model: ModelKind
    seed: int
    iterations: int = 2000
    burn_in: int = 1000
    thin: int = 5
    alpha_u: float = 1.0
    beta_u: float = 1.0
    step_B: float = 0.2
    update_u: bool = True
    update_theta: bool = True
    update_B: bool = True
    update_labels: bool = True
    update_lambda: bool = True
    free_B: np.ndarray = None
    init_lambda: float = 5.0
    prior_init: bool = False
    check_counts: bool = False

    def __post_init__(self):
        self.model = ModelKind(self.model)
        if self.seed is None:
            raise ValueError("an explicit seed is required")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(f"need 0 <= burn_in < iterations, got {self.burn_in}, "
                             f"{self.iterations}")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if not (np.isfinite(self.init_lambda) and self.init_lambda > 0):
            raise ValueError(f"init_lambda must be positive, got {self.init_lambda!r}")
        if self.alpha_u <= 0 or self.beta_u <= 0 or self.step_B <= 0:
            raise ValueError("proposal parameters must be positive")

    @property
    def n_samples(self):
        return (self.iterations - self.burn_in) // self.thin

    def retained(self, sweep):
        """Whether 1-based `sweep` is kept."""
        return sweep > self.burn_in and (sweep - self.burn_in) % self.thin == 0


@dataclass
class Trace:
    """Retained posterior samples and running summaries of one chain.

    Per-sample parameters are stored as stacked arrays (first axis =
    sample).  ``test_scores`` is the posterior-mean predictive probability
    of every TEST cell, in ``(test_rows, test_cols)`` order.  For label
    models ``label_counts1`` / ``label_counts2`` pool ``m1`` / ``m2`` over
    the retained sweeps.
    """

    kind: ModelKind
    n: int
    K: int
    sweeps: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    B: np.ndarray
    lam: np.ndarray
    loglik: np.ndarray
    u1: np.ndarray = None
    u2: np.ndarray = None
    z1: np.ndarray = None
    z2: np.ndarray = None
    F: np.ndarray = None
    label_counts1: np.ndarray = None
    label_counts2: np.ndarray = None
    test_rows: np.ndarray = None
    test_cols: np.ndarray = None
    test_scores: np.ndarray = None
    acceptance: dict = field(default_factory=dict)

    @property
    def n_samples(self):
        return len(self.sweeps)

    @property
    def has_labels(self):
        return self.label_counts1 is not None

    def acceptance_rates(self):
        return {name: (acc / tot if tot else float("nan"))
                for name, (acc, tot) in sorted(self.acceptance.items())}

    def sample_state(self, index):
        """Rebuild the model state of retained sample `index` (labels omitted)."""
        if self.kind is ModelKind.MMSB:
            return MmsbState(self.F[index], self.B[index])
        kw = dict(theta1=self.theta1[index], theta2=self.theta2[index], B=self.B[index])
        if self.kind is ModelKind.SBM:
            return LatentState(self.kind, z1=self.z1[index], z2=self.z2[index], **kw)
        return LatentState(self.kind, u1=self.u1[index], u2=self.u2[index],
                           lam=float(self.lam[index]), **kw)


# ---------------------------------------------------------------------------
# sufficient statistics

def _train_cells(R):
    rows, cols = R.cells(Cell.TRAIN)
    return rows, cols, R.entries[rows, cols].astype(bool)


def _block_counts(sv, rv, y, K):
    flat = sv * K + rv
    N1 = np.bincount(flat[y], minlength=K * K).reshape(K, K)
    N0 = np.bincount(flat[~y], minlength=K * K).reshape(K, K)
    return N1, N0


def _counts(rows, cols, y, sv, rv, n, K):
    m1 = np.bincount(rows * K + sv, minlength=n * K).reshape(n, K)
    m2 = np.bincount(cols * K + rv, minlength=n * K).reshape(n, K)
    N1, N0 = _block_counts(sv, rv, y, K)
    return SufficientCounts(m1, m2, N1, N0)


def counts_from_labels(s, r, R, K):
    """Tally labels over the TRAIN cells of `R`; other cells contribute nothing."""
    rows, cols, y = _train_cells(R)
    sv = np.asarray(s)[rows, cols]
    rv = np.asarray(r)[rows, cols]
    if np.any((sv < 0) | (sv >= K) | (rv < 0) | (rv >= K)):
        raise ValueError(f"TRAIN-cell labels must lie in 0..{K - 1}")
    return _counts(rows, cols, y, sv.astype(np.int64), rv.astype(np.int64), R.n, K)


# ---------------------------------------------------------------------------
# acceptance ratios (log space)

def _log_weights(u, theta, lam):
    return np.log(np.maximum(segment_weights(u, theta, lam), WEIGHT_FLOOR))


def _weighted_log_ratio(logw_new, logw_old, m):
    # zero counts contribute nothing, even where a weight hit the floor
    return np.sum(np.where(m > 0, m * (logw_new - logw_old), 0.0), axis=-1)


def _beta_logpdf(x, a, b):
    return xlogy(a - 1.0, x) + xlog1py(b - 1.0, -x) - betaln(a, b)


def log_ratio_u(u_current, u_proposed, theta, lam, m, alpha_u=1.0, beta_u=1.0):
    """Per-node log acceptance ratio of independence proposals from ``Beta(alpha_u, beta_u)``.

    ``log Be(u) - log Be(u*) + sum_k m[i, k] * (log w_k(u*) - log w_k(u))``.
    """
    prior_term = (_beta_logpdf(u_current, alpha_u, beta_u)
                  - _beta_logpdf(u_proposed, alpha_u, beta_u))
    lik = _weighted_log_ratio(_log_weights(u_proposed, theta, lam),
                              _log_weights(u_current, theta, lam), m)
    return prior_term + lik


def log_ratio_theta(u, theta_current, theta_proposed, lam, m):
    """Log acceptance ratio for a segment distribution drawn from its own prior."""
    lik = _weighted_log_ratio(_log_weights(u, theta_proposed, lam),
                              _log_weights(u, theta_current, lam), m)
    return float(lik.sum())


def log_ratio_lambda(state, counts, lam_proposed):
    """Log acceptance ratio for a smoothing parameter drawn from its prior."""
    total = 0.0
    for u, theta, m in ((state.u1, state.theta1, counts.m1),
                        (state.u2, state.theta2, counts.m2)):
        total += _weighted_log_ratio(_log_weights(u, theta, lam_proposed),
                                     _log_weights(u, theta, state.lam), m).sum()
    return float(total)


def _accept(log_ratio, rng):
    log_ratio = np.asarray(log_ratio, dtype=np.float64)
    draw = np.log(rng.random(log_ratio.shape))
    return draw < log_ratio


def _tally(stats_, family, accepted):
    if stats_ is None:
        return
    acc, tot = stats_.get(family, (0, 0))
    accepted = np.atleast_1d(accepted)
    stats_[family] = (acc + int(accepted.sum()), tot + accepted.size)


# ---------------------------------------------------------------------------
# LFSG updates

def update_u(state, counts, cfg, rng, stats_=None):
    """One independence-MH step for every sender and receiver coordinate."""
    for dim in (1, 2):
        u = getattr(state, f"u{dim}")
        theta = getattr(state, f"theta{dim}")
        m = getattr(counts, f"m{dim}")
        proposal = rng.beta(cfg.alpha_u, cfg.beta_u, size=u.size)
        ok = _accept(log_ratio_u(u, proposal, theta, state.lam, m, cfg.alpha_u, cfg.beta_u),
                     rng)
        setattr(state, f"u{dim}", np.where(ok, proposal, u))
        _tally(stats_, "u", ok)
    return state


def update_theta(state, counts, h, rng, stats_=None):
    """Dirichlet independence-MH step for each segment distribution."""
    alpha = np.asarray(h.alpha)
    for dim in (1, 2):
        theta = getattr(state, f"theta{dim}")
        proposal = rng.dirichlet(alpha)
        ratio = log_ratio_theta(getattr(state, f"u{dim}"), theta, proposal, state.lam,
                                getattr(counts, f"m{dim}"))
        ok = bool(_accept(ratio, rng))
        if ok:
            setattr(state, f"theta{dim}", proposal)
        _tally(stats_, "theta", ok)
    return state


def update_B(counts, h, rng, current=None, free=None):
    """Conjugate draw ``B[k1, k2] ~ Beta(alpha0 + N1, beta0 + N0)``.

    When `free` is given only the selected entries are redrawn; the rest
    are copied from `current`.  Draws are clipped away from exact 0 and 1.
    """
    draw = rng.beta(h.alpha0 + counts.N1, h.beta0 + counts.N0)
    draw = np.clip(draw, _B_LOW, _B_HIGH)
    if free is not None:
        draw = np.where(free, draw, current)
    return draw


def label_probabilities(logw, logB, log1mB, partner, y, axis):
    """Normalised label conditionals for a batch of cells.

    ``P(label = k) ∝ w[k] * B^y * (1 - B)^(1 - y)`` where the block is
    ``(k, partner)`` for sender labels (``axis=0``) and ``(partner, k)``
    for receiver labels (``axis=1``).
    """
    if axis == 0:
        lb, l1b = logB.T[partner], log1mB.T[partner]
    else:
        lb, l1b = logB[partner], log1mB[partner]
    logits = logw + np.where(y[:, None], lb, l1b)
    with np.errstate(invalid="ignore"):  # all -inf rows are reported below
        logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    total = p.sum(axis=1, keepdims=True)
    if not np.all(total > 0) or not np.all(np.isfinite(total)):
        raise NumericalError("label conditional has no positive mass")
    return p / total


def _resample_labels(w1, w2, B, rows, cols, y, sv, rv, rng):
    logB, log1mB = np.log(B), np.log1p(-B)
    p = label_probabilities(np.log(np.maximum(w1[rows], WEIGHT_FLOOR)), logB, log1mB, rv, y, 0)
    sv = categorical(p, rng)
    p = label_probabilities(np.log(np.maximum(w2[cols], WEIGHT_FLOOR)), logB, log1mB, sv, y, 1)
    rv = categorical(p, rng)
    return sv, rv


def update_labels(state, R, rng, weights=None):
    """Redraw every TRAIN-cell sender label, then every receiver label.

    `weights` may pass precomputed ``(w1, w2)`` node weights.
    """
    rows, cols, y = _train_cells(R)
    if rows.size == 0:
        return state
    if weights is None:
        weights = state.weights() if isinstance(state, LatentState) else (state.F, state.F)
    w1, w2 = weights
    sv, rv = _resample_labels(w1, w2, state.B, rows, cols, y,
                              state.s[rows, cols], state.r[rows, cols], rng)
    state.s[rows, cols] = sv
    state.r[rows, cols] = rv
    return state


def update_lambda(state, counts, h, rng, stats_=None):
    """Independence-MH step for the smoothing parameter, proposing from its prior."""
    proposal = rng.gamma(h.lambda_shape, 1.0 / h.lambda_rate)
    ok = bool(_accept(log_ratio_lambda(state, counts, proposal), rng))
    if ok:
        state.lam = proposal
    _tally(stats_, "lambda", ok)
    return state


# ---------------------------------------------------------------------------
# chain driver

class _Recorder:
    """Collects retained samples and the running predictive mean."""

    def __init__(self, R, K, kind):
        self.kind = kind
        self.n, self.K = R.n, K
        self.test_rows, self.test_cols = R.cells(Cell.TEST)
        self.score_sum = np.zeros(self.test_rows.size)
        self.rows = {k: [] for k in ("sweeps", "theta1", "theta2", "B", "lam", "loglik",
                                     "u1", "u2", "z1", "z2", "F")}
        self.label1 = self.label2 = None
        self.stats = {}

    def record(self, sweep, state, R, counts=None):
        put = self.rows
        put["sweeps"].append(sweep)
        put["B"].append(state.B.copy())
        put["loglik"].append(log_likelihood(state, R))
        if self.kind is ModelKind.MMSB:
            put["F"].append(state.F.copy())
            put["theta1"].append(np.full(self.K, np.nan))
            put["theta2"].append(np.full(self.K, np.nan))
            put["lam"].append(np.nan)
        else:
            put["theta1"].append(state.theta1.copy())
            put["theta2"].append(state.theta2.copy())
            put["lam"].append(np.nan if state.lam is None else float(state.lam))
        if self.kind is ModelKind.SBM:
            put["z1"].append(state.z1.copy())
            put["z2"].append(state.z2.copy())
        elif self.kind in (ModelKind.ISG, ModelKind.LFSG):
            put["u1"].append(state.u1.copy())
            put["u2"].append(state.u2.copy())
        if counts is not None:
            if self.label1 is None:
                self.label1 = np.zeros_like(counts.m1)
                self.label2 = np.zeros_like(counts.m2)
            self.label1 += counts.m1
            self.label2 += counts.m2
        self.score_sum += _predict(state, self.test_rows, self.test_cols)

    def finish(self):
        def stack(key, dtype=np.float64):
            return np.array(self.rows[key], dtype=dtype) if self.rows[key] else None

        count = len(self.rows["sweeps"])
        return Trace(
            kind=self.kind, n=self.n, K=self.K,
            sweeps=np.array(self.rows["sweeps"], dtype=np.int64),
            theta1=stack("theta1"), theta2=stack("theta2"), B=stack("B"),
            lam=stack("lam"), loglik=stack("loglik"),
            u1=stack("u1"), u2=stack("u2"),
            z1=stack("z1", np.int64), z2=stack("z2", np.int64), F=stack("F"),
            label_counts1=self.label1, label_counts2=self.label2,
            test_rows=self.test_rows, test_cols=self.test_cols,
            test_scores=self.score_sum / count if count else self.score_sum,
            acceptance=dict(self.stats),
        )


def _predict(state, rows, cols):
    if isinstance(state, MmsbState):
        return np.einsum("ak,kl,al->a", state.F[rows], state.B, state.F[cols])
    if state.kind is ModelKind.SBM:
        return state.B[state.z1[rows], state.z2[cols]]
    w1, w2 = state.weights()
    return link_intensities(w1, w2, state.B, rows, cols)


def _check_kind(cfg, kind):
    if cfg.model is not kind:
        raise ValueError(f"config is for {cfg.model.value}, sampler is {kind.value}")


def _init_labels(R, w1, w2, rng):
    n, K = R.n, w1.shape[1]
    rows, cols, _ = _train_cells(R)
    s = np.full((n, n), -1, dtype=np.int64)
    r = np.full((n, n), -1, dtype=np.int64)
    s[rows, cols] = categorical(w1[rows], rng)
    r[rows, cols] = categorical(w2[cols], rng)
    return s, r


def spectral_coordinates(R):
    """Starting coordinates from a spectral ordering of the TRAIN cells.

    Rows and columns of the centred TRAIN adjacency are ranked by their
    entries in the leading singular vectors, and rank ``q`` of ``n`` maps to
    ``(q + 0.5) / n``.  Nodes with similar link patterns thus start close
    together in ``[0, 1]``.

    Returns
    -------
    u1, u2 : ndarray, shape (n,)
    """
    n = R.n
    train = R.mask == Cell.TRAIN
    if n < 2 or not train.any():
        centres = (np.arange(n) + 0.5) / max(n, 1)
        return centres, centres.copy()
    A = np.where(train, R.entries - R.entries[train].mean(), 0.0)
    left, _, right = np.linalg.svd(A)
    ranks = lambda v: np.argsort(np.argsort(v, kind="stable"), kind="stable")
    return (ranks(left[:, 0]) + 0.5) / n, (ranks(right[0]) + 0.5) / n


def _block_densities(R, z1, z2, h):
    """Posterior-mean block intensities given hard node labels."""
    rows, cols, y = _train_cells(R)
    N1, N0 = _block_counts(z1[rows], z2[cols], y, h.K)
    return np.clip((h.alpha0 + N1) / (h.alpha0 + h.beta0 + N1 + N0), _B_LOW, _B_HIGH)


def _initial_state(kind, R, h, cfg, rng):
    n, K, alpha = R.n, h.K, np.asarray(h.alpha)
    B = np.clip(rng.beta(h.alpha0, h.beta0, size=(K, K)), _B_LOW, _B_HIGH)
    if kind is ModelKind.MMSB:
        F = rng.dirichlet(alpha, size=n)
        state = MmsbState(F, B)
        state.s, state.r = _init_labels(R, F, F, rng)
        return state
    theta1, theta2 = rng.dirichlet(alpha), rng.dirichlet(alpha)
    if kind is ModelKind.SBM:
        return LatentState(kind, theta1, theta2, B,
                           z1=categorical(np.tile(theta1, (n, 1)), rng),
                           z2=categorical(np.tile(theta2, (n, 1)), rng))
    u1, u2 = rng.random(n), rng.random(n)
    if cfg.prior_init:
        lam = rng.gamma(h.lambda_shape, 1.0 / h.lambda_rate)
    else:
        theta1, theta2 = alpha / alpha.sum(), alpha / alpha.sum()
        lam = float(cfg.init_lambda)
        u1, u2 = spectral_coordinates(R)
        B = _block_densities(R, graphon.segment_lookup(u1, theta1),
                             graphon.segment_lookup(u2, theta2), h)
    # LFSG labels are filled in by _prepare
    return LatentState(kind, theta1, theta2, B, u1=u1, u2=u2, lam=lam)


def _prepare(kind, R, h, cfg, init):
    _check_kind(cfg, kind)
    if h.K < 1:
        raise ValueError("K must be at least 1")
    rng = np.random.default_rng(cfg.seed)
    state = _initial_state(kind, R, h, cfg, rng) if init is None else init.copy()
    if state.K != h.K:
        raise ValueError(f"initial state has K={state.K}, hyperparameters K={h.K}")
    if kind in (ModelKind.LFSG, ModelKind.MMSB) and state.s is None:
        w = state.weights() if kind is ModelKind.LFSG else (state.F, state.F)
        state.s, state.r = _init_labels(R, *w, rng)
        if kind is ModelKind.LFSG and cfg.update_labels:
            # The LFSG sweep updates B before the labels.  Labels drawn from
            # the weights alone ignore the data, so the first B draw would
            # flatten every block towards the sparsity, a near-fixed point of
            # the B/label updates.  One label pass against the initial B
            # lets the first B draw see the data.
            update_labels(state, R, rng, w)
    return state, rng, _Recorder(R, h.K, kind)


def _label_counts(state, R):
    return counts_from_labels(state.s, state.r, R, state.K)


def run_lfsg_sampler(R, h, cfg, init=None):
    """Metropolis-within-Gibbs for the latent-feature smoothing graphon.

    Parameters
    ----------
    R : RelationalMatrix
        Data; only TRAIN cells are used.
    h : Hyperparameters
    cfg : SamplerConfig
        Must have ``model == ModelKind.LFSG``.
    init : LatentState, optional
        Starting state (copied).  Drawn from the prior when omitted.

    Returns
    -------
    Trace
    """
    state, rng, rec = _prepare(ModelKind.LFSG, R, h, cfg, init)
    counts = _label_counts(state, R)
    # node weights only change with u, theta or lambda
    weights = None
    for sweep in range(1, cfg.iterations + 1):
        if cfg.update_u:
            update_u(state, counts, cfg, rng, rec.stats)
            weights = None
        if cfg.update_theta:
            update_theta(state, counts, h, rng, rec.stats)
            weights = None
        if cfg.update_B:
            state.B = update_B(counts, h, rng, state.B, cfg.free_B)
        if cfg.update_labels:
            if weights is None:
                weights = state.weights()
            update_labels(state, R, rng, weights)
            counts = _label_counts(state, R)
        if cfg.update_lambda:
            update_lambda(state, counts, h, rng, rec.stats)
            weights = None
        if cfg.check_counts and sweep % 100 == 0 and counts != _label_counts(state, R):
            raise NumericalError(f"label counts drifted at sweep {sweep}")
        if cfg.retained(sweep):
            rec.record(sweep, state, R, counts)
    return rec.finish()


class _IsgLikelihood:
    """Cached Bernoulli log-likelihood of the TRAIN cells under a mixture intensity."""

    def __init__(self, R):
        self.train = R.mask == Cell.TRAIN
        self.y = R.entries.astype(bool)

    def cells(self, G):
        with np.errstate(divide="ignore"):
            ll = np.where(self.y, np.log(G), np.log1p(-G))
        return np.where(self.train, ll, 0.0)


def _mh_log_ratio(proposed, current, extra=0.0):
    """``proposed - current + extra`` that rejects -inf proposals and escapes -inf states."""
    proposed = np.asarray(proposed, dtype=np.float64)
    current = np.asarray(current, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        ratio = proposed - current + extra
    ratio = np.where(np.isneginf(proposed), -np.inf, ratio)
    return np.where(np.isneginf(current) & ~np.isneginf(proposed), np.inf, ratio)


def _beta_logit_prior(b, h):
    # Beta(alpha0, beta0) density on the logit scale, Jacobian included
    return h.alpha0 * np.log(b) + h.beta0 * np.log1p(-b)


def run_isg_sampler(R, h, cfg, init=None):
    """Metropolis-within-Gibbs for the integrated smoothing graphon.

    Coordinates, segment distributions and the smoothing parameter keep
    the Beta, Dirichlet and Gamma independence proposals; each block
    intensity takes a Gaussian random-walk step of size ``cfg.step_B`` on
    the logit scale.  All ratios use the exact ISG likelihood.
    """
    state, rng, rec = _prepare(ModelKind.ISG, R, h, cfg, init)
    lik = _IsgLikelihood(R)
    alpha = np.asarray(h.alpha)

    def log_be(u):
        return _beta_logpdf(u, cfg.alpha_u, cfg.beta_u)

    free = np.ones((h.K, h.K), bool) if cfg.free_B is None else np.asarray(cfg.free_B, bool)
    w1, w2 = state.weights()
    G = w1 @ state.B @ w2.T
    ll = lik.cells(G)

    for sweep in range(1, cfg.iterations + 1):
        if cfg.update_u:
            # rows of G depend only on u1, columns only on u2
            prop = rng.beta(cfg.alpha_u, cfg.beta_u, size=state.n)
            w_new = segment_weights(prop, state.theta1, state.lam)
            G_new = w_new @ state.B @ w2.T
            ll_new = lik.cells(G_new)
            ratio = _mh_log_ratio(ll_new.sum(1), ll.sum(1),
                                  log_be(state.u1) - log_be(prop))
            ok = _accept(ratio, rng)
            state.u1 = np.where(ok, prop, state.u1)
            w1[ok], G[ok], ll[ok] = w_new[ok], G_new[ok], ll_new[ok]
            _tally(rec.stats, "u", ok)

            prop = rng.beta(cfg.alpha_u, cfg.beta_u, size=state.n)
            w_new = segment_weights(prop, state.theta2, state.lam)
            G_new = w1 @ state.B @ w_new.T
            ll_new = lik.cells(G_new)
            ratio = _mh_log_ratio(ll_new.sum(0), ll.sum(0),
                                  log_be(state.u2) - log_be(prop))
            ok = _accept(ratio, rng)
            state.u2 = np.where(ok, prop, state.u2)
            w2[ok], G[:, ok], ll[:, ok] = w_new[ok], G_new[:, ok], ll_new[:, ok]
            _tally(rec.stats, "u", ok)

        if cfg.update_theta:
            for dim in (1, 2):
                prop = rng.dirichlet(alpha)
                u = state.u1 if dim == 1 else state.u2
                w_new = segment_weights(u, prop, state.lam)
                G_new = w_new @ state.B @ w2.T if dim == 1 else w1 @ state.B @ w_new.T
                ll_new = lik.cells(G_new)
                ok = bool(_accept(_mh_log_ratio(ll_new.sum(), ll.sum()), rng))
                if ok:
                    setattr(state, f"theta{dim}", prop)
                    if dim == 1:
                        w1 = w_new
                    else:
                        w2 = w_new
                    G, ll = G_new, ll_new
                _tally(rec.stats, "theta", ok)

        if cfg.update_B:
            for k1, k2 in zip(*np.nonzero(free)):
                b = state.B[k1, k2]
                b_new = float(expit(logit(b) + cfg.step_B * rng.standard_normal()))
                b_new = min(max(b_new, _B_LOW), _B_HIGH)
                G_new = G + (b_new - b) * np.outer(w1[:, k1], w2[:, k2])
                np.clip(G_new, 0.0, 1.0, out=G_new)
                ll_new = lik.cells(G_new)
                ratio = _mh_log_ratio(ll_new.sum(), ll.sum(),
                                      _beta_logit_prior(b_new, h) - _beta_logit_prior(b, h))
                ok = bool(_accept(ratio, rng))
                if ok:
                    state.B[k1, k2] = b_new
                    G, ll = G_new, ll_new
                _tally(rec.stats, "B", ok)

        if cfg.update_lambda:
            prop = rng.gamma(h.lambda_shape, 1.0 / h.lambda_rate)
            w1_new = segment_weights(state.u1, state.theta1, prop)
            w2_new = segment_weights(state.u2, state.theta2, prop)
            G_new = w1_new @ state.B @ w2_new.T
            ll_new = lik.cells(G_new)
            ok = bool(_accept(_mh_log_ratio(ll_new.sum(), ll.sum()), rng))
            if ok:
                state.lam, w1, w2, G, ll = prop, w1_new, w2_new, G_new, ll_new
            _tally(rec.stats, "lambda", ok)

        if cfg.retained(sweep):
            rec.record(sweep, state, R)
    return rec.finish()


def _sbm_node_labels(A1, A0, logB, log1mB, log_theta, rng):
    logits = A1 @ logB.T + A0 @ log1mB.T + log_theta
    return categorical_log(logits, rng)


def run_sbm_sampler(R, h, cfg, init=None):
    """Gibbs sampler for the SBM with uncollapsed ``theta`` and ``B``.

    Each sweep draws all sender labels given the receiver labels, then all
    receiver labels, then ``theta`` from its Dirichlet conditional and
    ``B`` from its Beta conditional.
    """
    state, rng, rec = _prepare(ModelKind.SBM, R, h, cfg, init)
    rows, cols, y = _train_cells(R)
    n, K = R.n, h.K
    alpha = np.asarray(h.alpha)
    yf = y.astype(np.float64)

    def tallies(own, other_labels, other_idx):
        flat = own * K + other_labels[other_idx]
        A1 = np.bincount(flat, weights=yf, minlength=n * K).reshape(n, K)
        A0 = np.bincount(flat, weights=1.0 - yf, minlength=n * K).reshape(n, K)
        return A1, A0

    for sweep in range(1, cfg.iterations + 1):
        if cfg.update_labels:
            logB, log1mB = np.log(state.B), np.log1p(-state.B)
            A1, A0 = tallies(rows, state.z2, cols)
            state.z1 = _sbm_node_labels(A1, A0, logB, log1mB, np.log(state.theta1), rng)
            A1, A0 = tallies(cols, state.z1, rows)
            state.z2 = _sbm_node_labels(A1, A0, logB.T, log1mB.T, np.log(state.theta2), rng)
        if cfg.update_theta:
            state.theta1 = rng.dirichlet(alpha + np.bincount(state.z1, minlength=K))
            state.theta2 = rng.dirichlet(alpha + np.bincount(state.z2, minlength=K))
        if cfg.update_B:
            N1, N0 = _block_counts(state.z1[rows], state.z2[cols], y, K)
            state.B = update_B(SufficientCounts(None, None, N1, N0), h, rng, state.B,
                               cfg.free_B)
        if cfg.retained(sweep):
            rec.record(sweep, state, R)
    return rec.finish()


def run_mmsb_sampler(R, h, cfg, init=None):
    """Gibbs sampler for the mixed-membership SBM.

    Sweep: pairwise labels (senders then receivers), membership rows
    ``F_i ~ Dirichlet(alpha + m1[i] + m2[i])``, then ``B``.
    """
    state, rng, rec = _prepare(ModelKind.MMSB, R, h, cfg, init)
    alpha = np.asarray(h.alpha)
    counts = _label_counts(state, R)
    for sweep in range(1, cfg.iterations + 1):
        if cfg.update_labels:
            update_labels(state, R, rng)
            counts = _label_counts(state, R)
        if cfg.update_theta:
            state.F = _dirichlet_rows(alpha + counts.m1 + counts.m2, rng)
        if cfg.update_B:
            state.B = update_B(counts, h, rng, state.B, cfg.free_B)
        if cfg.retained(sweep):
            rec.record(sweep, state, R, counts)
    return rec.finish()


def _dirichlet_rows(conc, rng):
    g = rng.gamma(conc)
    total = g.sum(axis=1, keepdims=True)
    # all-underflow rows fall back to their expected value
    bad = total[:, 0] <= 0
    if np.any(bad):
        g[bad] = conc[bad]
        total[bad] = conc[bad].sum(axis=1, keepdims=True)
    return g / total


_SAMPLERS = {
    ModelKind.SBM: run_sbm_sampler,
    ModelKind.ISG: run_isg_sampler,
    ModelKind.LFSG: run_lfsg_sampler,
    ModelKind.MMSB: run_mmsb_sampler,
}


def run_sampler(R, h, cfg, init=None):
    """Run the sampler selected by ``cfg.model``."""
    return _SAMPLERS[cfg.model](R, h, cfg, init)


def posterior_predictive(trace, rows=None, cols=None):
    """Average predictive probability over retained samples.

    ISG/LFSG use the mixture intensity, SBM ``B[z1_i, z2_j]`` and MMSB
    ``F_i^T B F_j``.  Defaults to the trace's TEST cells.
    """
    if trace.n_samples == 0:
        raise ValueError("trace holds no retained samples")
    if rows is None:
        rows, cols = trace.test_rows, trace.test_cols
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    total = np.zeros(rows.shape)
    for index in range(trace.n_samples):
        total += _predict(trace.sample_state(index), rows, cols)
    return total / trace.n_samples
