"""Seeded training loop over stored representations.

Each epoch shuffles the train split with a seed-derived permutation,
augments every example freshly per step, and applies one Adam update per
batch. Evaluation always uses the clean (unaugmented) test split. A run is
fully determined by (dataset, config): per-example noise streams are
seeded from (run seed, epoch, example index), so neither batching nor
worker order can change the draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .augment import AugmentConfig, NoiseSource, repaugment
from .metrics import EvalReport, aggregate_reports, evaluate
from .nn import AdamState, ClassifierParams, adam_step, loss_and_grad
from .store import DataError, Dataset, TRAIN

PRESETS = {
    "transformer": {"lr": 5e-5, "batch_size": 8, "epochs": 50},
    "cnn": {"lr": 1e-3, "batch_size": 64, "epochs": 400},
}

_SEED_MASK = 2**63 - 1


class DivergenceError(Exception):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, step: int):
        super().__init__(f"non-finite loss at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step


@dataclass
class TrainConfig:
    lr: float = 5e-5
    batch_size: int = 8
    epochs: int = 50
    seed: int = 0
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")

    @classmethod
    def preset(cls, name: str, **overrides) -> "TrainConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
        kwargs = dict(PRESETS[name])
        kwargs.update(overrides)
        return cls(**kwargs)

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {"lr": self.lr, "batch_size": self.batch_size,
                "epochs": self.epochs, "seed": self.seed,
                "augment": {"num_bands": self.augment.num_bands,
                            "max_band": self.augment.max_band,
                            "noise_mean": self.augment.noise_mean,
                            "noise_std": self.augment.noise_std,
                            "mode": self.augment.mode,
                            "mask_with_zero": self.augment.mask_with_zero}}


@dataclass
class RunResult:
    params: ClassifierParams
    loss_trace: list
    report: EvalReport
    seed: int

    def to_dict(self) -> dict:
        return {"seed": self.seed,
                "loss_trace": self.loss_trace,
                "report": self.report.to_dict(),
                "params": self.params.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        return cls(params=ClassifierParams.from_dict(data["params"]),
                   loss_trace=list(data["loss_trace"]),
                   report=EvalReport.from_dict(data["report"]),
                   seed=data["seed"])


def _shuffle_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((seed & _SEED_MASK, 1, epoch)))


def augment_noise_source(seed: int, epoch: int, example_index: int) -> NoiseSource:
    """Per-example stream; independent of batch composition and order."""
    return NoiseSource(
        np.random.SeedSequence((seed & _SEED_MASK, 2, epoch, example_index)))


def train(dataset: Dataset, config: TrainConfig) -> RunResult:
    """Train the classifier head on the train split; evaluate on test."""
    train_mask = dataset.splits == TRAIN
    train_feats = dataset.features[train_mask].astype(np.float64)
    train_labels = dataset.labels[train_mask].astype(np.int64)
    train_idx = np.flatnonzero(train_mask)  # stable per-example identity
    test_feats = dataset.features[~train_mask].astype(np.float64)
    test_labels = dataset.labels[~train_mask].astype(np.int64)

    n = len(train_labels)
    if n == 0:
        raise DataError("train split is empty")
    if len(test_labels) == 0:
        raise DataError("test split is empty")
    missing = set(np.unique(test_labels)) - set(np.unique(train_labels))
    if missing:
        raise DataError(
            f"test classes {sorted(missing)} have no train examples")

    params = ClassifierParams.init(dataset.dim)
    state = AdamState.init(params, lr=config.lr)
    trace = []

    for epoch in range(config.epochs):
        perm = _shuffle_rng(config.seed, epoch).permutation(n)
        batch_losses = []
        batch_sizes = []
        for step, start in enumerate(range(0, n, config.batch_size)):
            batch = perm[start:start + config.batch_size]
            augmented = np.stack([
                repaugment(train_feats[i], int(train_labels[i]),
                           config.augment,
                           augment_noise_source(config.seed, epoch,
                                                int(train_idx[i])))
                for i in batch])
            loss, grads = loss_and_grad(params, augmented, train_labels[batch])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, step)
            params, state = adam_step(params, grads, state)
            batch_losses.append(loss * len(batch))
            batch_sizes.append(len(batch))
        trace.append(sum(batch_losses) / sum(batch_sizes))

    report = evaluate(params, test_feats, test_labels)
    return RunResult(params=params, loss_trace=trace, report=report,
                     seed=config.seed)


def train_multi_seed(dataset: Dataset, config: TrainConfig, seeds,
                     parallel: int = 1):
    """One run per seed; returns (runs, aggregate dict).

    The aggregate carries mean / variance / std per metric across seeds.
    Seeds are independent, so runs may execute in parallel.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    if parallel > 1 and len(seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            runs = list(pool.map(train, [dataset] * len(seeds),
                                 [config.with_seed(s) for s in seeds]))
    else:
        runs = [train(dataset, config.with_seed(s)) for s in seeds]
    return runs, aggregate_reports([r.report for r in runs])
