"""Command-line front end: synth, import-csv, train, eval, grad-check.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
Set REPAUG_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import augment, metrics, nn, store, training

log = logging.getLogger("repaug")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

AUG_MODES = {"none": "none", "mask": "mask_only", "gen": "gen_only",
             "repaug": "full"}


def _parse_counts(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "expected 4 comma-separated counts (normal,crackle,wheeze,both)")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_seeds(text: str):
    try:
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repaug",
        description="Representation-level augmentation experiments on "
                    "stored embeddings (REPA files)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic Gaussian-blob dataset")
    p.add_argument("--dim", type=int, required=True, help="embedding dimension")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--counts", type=_parse_counts,
                       help="per-class counts normal,crackle,wheeze,both")
    group.add_argument("--icbhi-ratios", action="store_true",
                       help="derive counts from the ICBHI test-set class "
                            "ratios 57.29/23.55/13.97/5.19%% (needs --total)")
    p.add_argument("--total", type=int,
                   help="total example count for --icbhi-ratios")
    p.add_argument("--sep", type=float, default=1.0,
                   help="distance of each class mean from the origin")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--train-frac", type=float, default=0.6,
                   help="per-class train fraction (ICBHI uses a 60-40 split)")
    p.add_argument("--out", required=True, help="output REPA file")

    p = sub.add_parser("import-csv", help="convert label,split,v0,... rows to REPA")
    p.add_argument("--in", dest="input", required=True, help="input CSV")
    p.add_argument("--dim", type=int, required=True, help="embedding dimension")
    p.add_argument("--out", required=True, help="output REPA file")

    p = sub.add_parser("train", help="train the classifier head and report metrics")
    p.add_argument("--in", dest="input", required=True, help="input REPA file")
    p.add_argument("--preset", choices=sorted(training.PRESETS),
                   default="transformer",
                   help="recipe: transformer = lr 5e-5, batch 8, 50 epochs; "
                        "cnn = lr 1e-3, batch 64, 400 epochs")
    p.add_argument("--aug", choices=sorted(AUG_MODES), default="repaug",
                   help="augmentation policy (default repaug: mask all "
                        "classes, noise abnormal classes only)")
    p.add_argument("--seeds", type=_parse_seeds, default=[0],
                   help="comma-separated run seeds (paper protocol: 5 seeds)")
    p.add_argument("--lr", type=float, help="override preset learning rate")
    p.add_argument("--batch-size", type=int, help="override preset batch size")
    p.add_argument("--epochs", type=int, help="override preset epoch count")
    p.add_argument("--bands", type=int, default=2,
                   help="number of mask bands k (default 2)")
    p.add_argument("--max-band", type=int, default=288,
                   help="exclusive bound L on band length (default 288)")
    p.add_argument("--noise-mean", type=float, default=0.0,
                   help="Gaussian noise mean (default 0)")
    p.add_argument("--noise-std", type=float, default=1.0,
                   help="Gaussian noise std (default 1)")
    p.add_argument("--parallel-seeds", type=int, default=1,
                   help="run up to N seeds concurrently")
    p.add_argument("--out", help="write run results + aggregate as JSON")

    p = sub.add_parser("eval", help="evaluate saved parameters on a REPA test split")
    p.add_argument("--params", required=True,
                   help="JSON written by `repaug train`")
    p.add_argument("--run", type=int, default=0,
                   help="which run's parameters to use (default 0)")
    p.add_argument("--in", dest="input", required=True, help="input REPA file")

    p = sub.add_parser("grad-check", help="finite-difference check of the gradients")
    p.add_argument("--dim", type=int, default=8, help="embedding dimension")
    p.add_argument("--batch", type=int, default=4, help="batch size")
    p.add_argument("--seed", type=int, default=0, help="rng seed")
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="max acceptable relative error")
    return parser


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def cmd_synth(args) -> int:
    if args.counts is not None:
        counts = args.counts
    else:
        if args.total is None:
            raise UsageError("--icbhi-ratios requires --total")
        counts = store.icbhi_counts(args.total)
    dataset = store.synth_dataset(args.dim, counts, args.sep, args.seed,
                                  train_frac=args.train_frac)
    store.write_store(dataset, args.out)
    log.info("wrote %d records (dim %d) to %s", len(dataset), dataset.dim,
             args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return EXIT_OK


def cmd_import_csv(args) -> int:
    dataset = store.import_csv(args.input, args.dim)
    store.write_store(dataset, args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = store.load_store(args.input)
    overrides = {k: v for k, v in
                 (("lr", args.lr), ("batch_size", args.batch_size),
                  ("epochs", args.epochs)) if v is not None}
    aug = augment.AugmentConfig(num_bands=args.bands, max_band=args.max_band,
                                noise_mean=args.noise_mean,
                                noise_std=args.noise_std,
                                mode=AUG_MODES[args.aug])
    config = training.TrainConfig.preset(args.preset, augment=aug, **overrides)
    runs, agg = training.train_multi_seed(dataset, config, args.seeds,
                                          parallel=args.parallel_seeds)
    doc = {"config": config.to_dict(), "preset": args.preset,
           "seeds": args.seeds,
           "runs": [r.to_dict() for r in runs],
           "aggregate": agg}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(_dumps(doc))
        log.info("wrote results to %s", args.out)
    print(metrics.format_aggregate(agg))
    return EXIT_OK


def cmd_eval(args) -> int:
    dataset = store.load_store(args.input)
    try:
        with open(args.params) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise store.DataError(f"cannot read params {args.params}: {exc}")
    try:
        run = doc["runs"][args.run]
        params = nn.ClassifierParams.from_dict(run["params"])
    except (KeyError, IndexError, TypeError) as exc:
        raise store.DataError(f"{args.params}: no run {args.run} with "
                              f"parameters ({exc})")
    if params.dim != dataset.dim:
        raise store.DataError(f"params dim {params.dim} != data dim "
                              f"{dataset.dim}")
    test = dataset.test()
    report = metrics.evaluate(params, test.features.astype(np.float64),
                              test.labels.astype(np.int64))
    print(metrics.format_report(report))
    return EXIT_OK


def cmd_grad_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    params = nn.ClassifierParams.init(args.dim)
    params.weight = rng.normal(scale=0.5, size=params.weight.shape)
    params.bias = rng.normal(scale=0.5, size=params.bias.shape)
    params.ln_scale = 1.0 + 0.1 * rng.normal(size=args.dim)
    params.ln_shift = 0.1 * rng.normal(size=args.dim)
    feats = rng.normal(size=(args.batch, args.dim))
    labels = rng.integers(0, 4, size=args.batch)
    report = nn.grad_check(params, feats, labels, tolerance=args.tolerance,
                           seed=args.seed)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: max relative error {report.max_rel_error:.3e} over "
          f"{report.checked} coordinates (tolerance {report.tolerance:.1e}, "
          f"worst {report.worst_param}[{report.worst_index}])")
    return EXIT_OK if report.passed else EXIT_NUMERIC


class UsageError(Exception):
    pass


COMMANDS = {
    "synth": cmd_synth,
    "import-csv": cmd_import_csv,
    "train": cmd_train,
    "eval": cmd_eval,
    "grad-check": cmd_grad_check,
}


def main(argv=None) -> int:
    level = os.environ.get("REPAUG_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except store.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except training.DivergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
