"""Command-line entry point: ``smoothgraphon {simulate,fit,export-graphon,labels}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import evaluation, graphon, serialization
from .exceptions import DataError, NumericalError
from .inference import SamplerConfig, run_sampler
from .models import (Hyperparameters, ModelKind, generate, sample_mmsb_prior,
                     sample_prior)
from .relational import (Cell, induced_matrix, load_edge_list, read_dense_csv, read_edges,
                         row_wise_split, summarize, top_active_subsample, write_edge_list,
                         write_mask_csv)

log = logging.getLogger("smoothgraphon")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4

# independent streams derived from the user seed
_SPLIT_STREAM, _SUBSAMPLE_STREAM = 1, 2


def _open(path, mode="r"):
    return open(path, mode, encoding="utf-8", newline="\n" if "w" in mode else None)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _existing(text):
    if not os.path.exists(text):
        raise argparse.ArgumentTypeError(f"path does not exist: {text}")
    return text


def build_parser():
    parser = argparse.ArgumentParser(prog="smoothgraphon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True, choices=[k.value for k in ModelKind],
                       help="model family")
        p.add_argument("--k", type=_positive_int, default=4, help="number of groups")
        p.add_argument("--seed", type=int, required=True, help="random seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--alpha0", type=float,
                       help="Beta prior shape for B (fit default: TRAIN sparsity)")
        p.add_argument("--beta0", type=float,
                       help="Beta prior shape for B (fit default: 1 - sparsity)")
        p.add_argument("--resolution", type=_positive_int, default=200,
                       help="graphon grid size")
        p.add_argument("--self-loops", action="store_true", help="model diagonal cells")

    p = sub.add_parser("simulate", help="draw a synthetic dataset from a model prior")
    common(p)
    p.add_argument("--n", type=_positive_int, required=True, help="number of nodes")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="fix the smoothing parameter instead of drawing it")

    p = sub.add_parser("fit", help="split data row-wise, run MCMC and score held-out cells")
    common(p)
    p.add_argument("--data", type=_existing, required=True,
                   help="edge list (src<TAB>dst) or dense 0/1 CSV (.csv)")
    p.add_argument("--n", type=_positive_int, help="node count (default: max id + 1)")
    p.add_argument("--pool", type=_positive_int, help="keep the POOL most active nodes")
    p.add_argument("--sample", type=_positive_int, help="then sample this many of them")
    p.add_argument("--train-ratio", type=float, default=0.9,
                   help="fraction of each row kept for training")
    p.add_argument("--iters", type=_positive_int, default=2000, help="MCMC sweeps")
    p.add_argument("--burnin", type=int, default=1000, help="discarded sweeps")
    p.add_argument("--thin", type=_positive_int, default=5,
                   help="keep every THIN-th sweep after burn-in")
    p.add_argument("--step-b", type=float, default=0.2,
                   help="logit random-walk step for ISG block intensities")
    p.add_argument("--init-lambda", type=float, default=5.0,
                   help="starting smoothing parameter for isg/lfsg chains")
    p.add_argument("--prior-init", action="store_true",
                   help="start isg/lfsg chains from a prior draw instead of the data")

    p = sub.add_parser("export-graphon", help="write a graphon grid as CSV and PGM")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", type=_existing, help="state snapshot")
    src.add_argument("--trace", type=_existing, help="trace CSV (posterior-mean grid)")
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=_positive_int, default=200, help="grid size")
    p.add_argument("--mode", choices=["smooth", "piecewise"],
                   help="default: piecewise for sbm snapshots, smooth otherwise")

    p = sub.add_parser("labels", help="per-node label proportions from a fitted run")
    p.add_argument("--run", type=_existing, required=True, help="output directory of fit")
    p.add_argument("--out", help="destination directory (default: the run directory)")
    return parser


def _hyperparameters(args, sparsity=None):
    alpha0, beta0 = args.alpha0, args.beta0
    if alpha0 is None and beta0 is None and sparsity is not None:
        if not 0 < sparsity < 1:
            raise DataError(f"training sparsity is {sparsity}; cannot derive alpha0/beta0")
        alpha0, beta0 = sparsity, 1.0 - sparsity
    alpha0 = 1.0 if alpha0 is None else alpha0
    beta0 = 1.0 if beta0 is None else beta0
    return Hyperparameters(alpha0, beta0, (1.0,) * args.k)


def _write_grid(grid, out):
    with _open(os.path.join(out, "graphon.csv"), "w") as fh:
        serialization.write_grid_csv(grid, fh)
    with _open(os.path.join(out, "graphon.pgm"), "w") as fh:
        serialization.write_grid_pgm(grid, fh)


def cmd_simulate(args):
    if args.lam is not None and not args.lam > 0:
        raise DataError("--lambda must be positive")
    h = _hyperparameters(args)
    kind = ModelKind(args.model)
    rng = np.random.default_rng(args.seed)
    if kind is ModelKind.MMSB:
        state = sample_mmsb_prior(h, args.n, rng)
    else:
        state = sample_prior(h, args.n, rng, kind)
        if args.lam is not None:
            state.lam = args.lam
    R = generate(state, rng, self_loops=args.self_loops)
    os.makedirs(args.out, exist_ok=True)
    with _open(os.path.join(args.out, "edges.tsv"), "w") as fh:
        write_edge_list(R, fh)
    with _open(os.path.join(args.out, "state.txt"), "w") as fh:
        serialization.write_state(state, fh)
    if kind is not ModelKind.MMSB:
        mode = "piecewise" if kind is ModelKind.SBM else "smooth"
        _write_grid(graphon.intensity_grid(state.partition, state.B, state.lam,
                                           args.resolution, mode), args.out)
    summary = summarize(R)
    log.info("simulated %s: n=%d L=%d S=%.4f", kind.value, args.n, summary.positive_links,
             summary.sparsity)
    return 0


def _load_data(args, rng_subsample):
    path = args.data
    if path.endswith(".csv"):
        with _open(path) as fh:
            R = read_dense_csv(fh, self_loops=args.self_loops)
        if args.n is not None and args.n != R.n:
            raise DataError(f"--n {args.n} does not match the {R.n}x{R.n} matrix")
        return R
    with _open(path) as fh:
        edges = read_edges(fh)
    if args.pool is not None or args.sample is not None:
        if args.pool is None or args.sample is None:
            raise DataError("--pool and --sample must be given together")
        nodes = top_active_subsample(edges, args.pool, args.sample, rng_subsample)
        return induced_matrix(edges, nodes, self_loops=args.self_loops)
    n = args.n if args.n is not None else int(edges.max()) + 1 if edges.size else 0
    if n < 1:
        raise DataError("no nodes: empty edge list and no --n")
    with _open(path) as fh:
        return load_edge_list(fh, n, self_loops=args.self_loops)


def _echo(args, h, cfg, R):
    return {
        "command": "fit",
        "model": cfg.model.value,
        "data": args.data,
        "n": R.n,
        "pool": args.pool if args.pool is not None else "none",
        "sample": args.sample if args.sample is not None else "none",
        "k": h.K,
        "alpha0": float(h.alpha0),
        "beta0": float(h.beta0),
        "alpha": " ".join(repr(a) for a in h.alpha),
        "lambda_prior": f"gamma {h.lambda_shape!r} {h.lambda_rate!r}",
        "iters": cfg.iterations,
        "burnin": cfg.burn_in,
        "thin": cfg.thin,
        "alpha_u": cfg.alpha_u,
        "beta_u": cfg.beta_u,
        "step_b": cfg.step_B,
        "init_lambda": cfg.init_lambda,
        "prior_init": int(cfg.prior_init),
        "train_ratio": float(args.train_ratio),
        "seed": cfg.seed,
        "self_loops": int(args.self_loops),
        "resolution": args.resolution,
    }


def cmd_fit(args):
    if args.burnin < 0 or args.burnin >= args.iters:
        raise DataError(f"--burnin must lie in [0, iters), got {args.burnin}")
    if not 0 < args.train_ratio < 1:
        raise DataError(f"--train-ratio must lie in (0, 1), got {args.train_ratio}")
    R = _load_data(args, np.random.default_rng([args.seed, _SUBSAMPLE_STREAM]))
    R = row_wise_split(R, args.train_ratio, np.random.default_rng([args.seed, _SPLIT_STREAM]))

    train = R.mask == Cell.TRAIN
    sparsity = float(R.entries[train].mean()) if train.any() else 0.0
    h = _hyperparameters(args, sparsity)
    cfg = SamplerConfig(ModelKind(args.model), seed=args.seed, iterations=args.iters,
                        burn_in=args.burnin, thin=args.thin, step_B=args.step_b,
                        init_lambda=args.init_lambda, prior_init=args.prior_init)
    test_truth = R.entries[R.mask == Cell.TEST]
    if test_truth.size == 0 or test_truth.min() == test_truth.max():
        raise DataError("split degenerate: TEST cells need both positives and negatives")

    log.info("fitting %s on n=%d with %d train cells", cfg.model.value, R.n, int(train.sum()))
    trace = run_sampler(R, h, cfg)
    if trace.n_samples and not np.all(np.isfinite(trace.test_scores)):
        raise NumericalError("non-finite predictive scores")

    out = args.out
    os.makedirs(out, exist_ok=True)
    sc = evaluation.scored_test_cells(trace, R)
    metrics = {
        "auc": evaluation.auc_roc(sc),
        "average_precision": evaluation.average_precision(sc),
        "precision_at_k": evaluation.precision_at_k(sc),
        "n_test": sc.scores.size,
        "n_pos_test": sc.n_pos,
    }
    with _open(os.path.join(out, "metrics.txt"), "w") as fh:
        serialization.write_key_values(metrics, fh)
    with _open(os.path.join(out, "trace.csv"), "w") as fh:
        serialization.write_trace_csv(trace, fh)
    with _open(os.path.join(out, "accept.txt"), "w") as fh:
        serialization.write_key_values(trace.acceptance_rates(), fh)
    with _open(os.path.join(out, "config.echo"), "w") as fh:
        serialization.write_key_values(_echo(args, h, cfg, R), fh)
    with _open(os.path.join(out, "mask.csv"), "w") as fh:
        write_mask_csv(R, fh)
    if trace.has_labels:
        with _open(os.path.join(out, "label_counts.csv"), "w") as fh:
            serialization.write_label_counts(trace, fh)
    if cfg.model in (ModelKind.ISG, ModelKind.LFSG):
        _write_grid(_posterior_grid(trace.theta1, trace.theta2, trace.B, trace.lam,
                                    args.resolution, "smooth"), out)
    log.info("auc=%.4f average_precision=%.4f", metrics["auc"], metrics["average_precision"])
    return 0


def _posterior_grid(theta1, theta2, B, lam, resolution, mode):
    grid = np.zeros((resolution, resolution))
    for t1, t2, b, l in zip(theta1, theta2, B, lam):
        p = graphon.Partition.from_thetas(t1, t2)
        grid += graphon.intensity_grid(p, b, None if mode == "piecewise" else l,
                                       resolution, mode)
    return grid / len(B)


def cmd_export_graphon(args):
    if args.state is not None:
        with _open(args.state) as fh:
            state = serialization.read_state(fh)
        if state.kind is ModelKind.MMSB:
            raise DataError("an MMSB state has no graphon")
        mode = args.mode or ("piecewise" if state.kind is ModelKind.SBM else "smooth")
        if mode == "smooth" and state.lam is None:
            raise DataError("snapshot has no smoothing parameter; use --mode piecewise")
        grid = graphon.intensity_grid(state.partition, state.B, state.lam,
                                      args.resolution, mode)
    else:
        with _open(args.trace) as fh:
            t = serialization.read_trace_csv(fh)
        if len(t["sweeps"]) == 0:
            raise DataError("trace holds no samples")
        if np.any(np.isnan(t["theta1"])):
            raise DataError("trace has no partition (MMSB traces have no graphon)")
        smooth_ok = not np.any(np.isnan(t["lam"]))
        mode = args.mode or ("smooth" if smooth_ok else "piecewise")
        if mode == "smooth" and not smooth_ok:
            raise DataError("trace has no smoothing parameter; use --mode piecewise")
        grid = _posterior_grid(t["theta1"], t["theta2"], t["B"], t["lam"],
                               args.resolution, mode)
    os.makedirs(args.out, exist_ok=True)
    _write_grid(grid, args.out)
    return 0


def cmd_labels(args):
    run = args.run
    counts_path = os.path.join(run, "label_counts.csv")
    if not os.path.exists(counts_path):
        kind = "unknown"
        echo = os.path.join(run, "config.echo")
        if os.path.exists(echo):
            with _open(echo) as fh:
                kind = serialization.read_key_values(fh).get("model", kind)
        raise DataError(f"run has no retained labels (model {kind}); "
                        "only lfsg and mmsb fits record them")
    with _open(counts_path) as fh:
        senders, receivers = serialization.read_label_counts(fh)
    out = args.out or run
    os.makedirs(out, exist_ok=True)
    orders = {}
    for name, counts in (("sender", senders), ("receiver", receivers)):
        props = evaluation.proportions_from_counts(counts.astype(np.float64))
        with _open(os.path.join(out, f"labels_{name}.csv"), "w") as fh:
            serialization.write_grid_csv(props, fh)
        orders[name] = evaluation.node_order(props)
    with _open(os.path.join(out, "node_order.txt"), "w") as fh:
        for name, order in orders.items():
            fh.write(name + " " + " ".join(str(int(i)) for i in order) + "\n")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "export-graphon": cmd_export_graphon,
    "labels": cmd_labels,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
